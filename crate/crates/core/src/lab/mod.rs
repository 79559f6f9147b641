//! Seeded verification sweeps, one per bound, and the conjecture scan.
//!
//! Every check draws its samples from child seeds of the configured seed,
//! evaluates them in parallel and assembles the report in sample order, so a
//! configuration always yields the same report up to `runtime_ms`.

mod checks;
mod report;
mod rigidity;
mod sampling;
mod scan;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::isometry::is_prime;
use crate::maps::MapSpec;
use crate::seed::{self, derive};

pub use report::{
    triangle_max_angle, Assertion, Metric, Params, ReportBuilder, SampleStats, VerificationReport, Witness,
    MAX_WITNESSES_PER_LABEL, SCHEMA_VERSION, WITNESS_TOLERANCE,
};
pub use rigidity::{
    adversarial_probe, chain_constraints, rigidity_probe, ChainConstraints, RigidityProbe, FEASIBILITY,
    REGULARITY_TOLERANCE,
};
pub use sampling::{
    circle_map, conjugate_map, equality_isometry, isometry_map, mixed_map, random_point, small_diameter_set,
    CONJUGATE_STRENGTH,
};
pub use scan::{conjecture_scan, question_statistic, QuestionStatistic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum CheckId {
    T11,
    T12,
    T13,
    T14,
    L22,
    L24,
    L26,
    L27,
    C31,
    Conjecture,
    Question,
}

impl CheckId {
    pub const ALL: [CheckId; 11] = [
        CheckId::T11,
        CheckId::T12,
        CheckId::T13,
        CheckId::T14,
        CheckId::L22,
        CheckId::L24,
        CheckId::L26,
        CheckId::L27,
        CheckId::C31,
        CheckId::Conjecture,
        CheckId::Question,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckId::T11 => "T1.1",
            CheckId::T12 => "T1.2",
            CheckId::T13 => "T1.3",
            CheckId::T14 => "T1.4",
            CheckId::L22 => "L2.2",
            CheckId::L24 => "L2.4",
            CheckId::L26 => "L2.6",
            CheckId::L27 => "L2.7",
            CheckId::C31 => "C3.1",
            CheckId::Conjecture => "conjecture",
            CheckId::Question => "question",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidConfig(format!("unknown check id {s:?}")))
    }
}

impl TryFrom<String> for CheckId {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<CheckId> for String {
    fn from(c: CheckId) -> Self {
        c.as_str().to_string()
    }
}

pub const DEFAULT_BUDGET: usize = 16;

/// Solver restarts per unit of budget for the orbit-sum system, whose basins
/// can be narrow under strongly distorted conjugators.
pub const LEMMA24_RESTARTS_PER_BUDGET: usize = 32;
pub const CLOSED_FORM_TOLERANCE: f64 = 1e-9;
pub const OPTIMIZER_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub check_id: CheckId,
    pub n: usize,
    /// Period; ignored by `L2.7`.
    pub p: usize,
    pub samples: usize,
    /// Optimizer restarts per sample.
    pub budget: usize,
    pub seed: u64,
    pub closed_form_tolerance: f64,
    pub optimizer_tolerance: f64,
}

impl CheckConfig {
    pub fn new(check_id: CheckId, n: usize, p: usize, samples: usize, seed: u64) -> Self {
        CheckConfig {
            check_id,
            n,
            p,
            samples,
            budget: DEFAULT_BUDGET,
            seed,
            closed_form_tolerance: CLOSED_FORM_TOLERANCE,
            optimizer_tolerance: OPTIMIZER_TOLERANCE,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(format!("{}: {msg}", self.check_id)));
        if self.n < 1 {
            return bad("n must be >= 1".into());
        }
        if self.samples < 1 || self.budget < 1 {
            return bad("samples and budget must be >= 1".into());
        }
        for t in [self.closed_form_tolerance, self.optimizer_tolerance] {
            if !(t.is_finite() && t > 0.0) {
                return bad(format!("tolerance {t} must be positive"));
            }
        }
        let (n, p) = (self.n, self.p);
        let prime = || {
            if is_prime(p) {
                Ok(())
            } else {
                bad(format!("needs a prime period, got {p}"))
            }
        };
        match self.check_id {
            CheckId::T11 | CheckId::L24 | CheckId::C31 | CheckId::Conjecture => prime(),
            CheckId::T12 if p < 2 => bad(format!("period must be >= 2, got {p}")),
            CheckId::T12 | CheckId::L27 => Ok(()),
            CheckId::T13 if p != 3 => bad(format!("needs p = 3, got {p}")),
            CheckId::T13 => Ok(()),
            CheckId::T14 | CheckId::L22 if n != 1 => bad(format!("needs n = 1, got {n}")),
            CheckId::T14 if p < 2 => bad(format!("period must be >= 2, got {p}")),
            CheckId::L22 if p < 3 => bad(format!("period must be >= 3, got {p}")),
            CheckId::T14 | CheckId::L22 => Ok(()),
            CheckId::L26 if p < 3 => bad(format!("needs p >= 3, got {p}")),
            CheckId::L26 => Ok(()),
            CheckId::Question if p < n + 2 => bad(format!("needs p >= n + 2 = {}, got {p}", n + 2)),
            CheckId::Question => prime(),
        }
    }

    /// Tolerance the report's margin is normalized to.
    pub fn reference_tolerance(&self) -> f64 {
        match self.check_id {
            CheckId::T11 | CheckId::T14 | CheckId::L22 | CheckId::L26 => self.closed_form_tolerance,
            _ => self.optimizer_tolerance,
        }
    }
}

/// Results of one sample, merged into the report in sample order.
#[derive(Debug, Default)]
pub(crate) struct SampleOutcome {
    pub map: Option<MapSpec>,
    pub values: BTreeMap<String, f64>,
    pub assertions: Vec<(&'static str, f64, f64)>,
    pub witnesses: Vec<Witness>,
    pub notes: Vec<String>,
}

impl SampleOutcome {
    pub fn value(&mut self, name: &str, v: f64) {
        if v.is_finite() {
            self.values.insert(name.to_string(), v);
        }
    }

    pub fn assert(&mut self, name: &'static str, slack: f64, tolerance: f64) {
        self.assertions.push((name, slack, tolerance));
    }

    pub fn witness(&mut self, w: Result<Witness>) {
        match w {
            Ok(w) => self.witnesses.push(w),
            Err(e) => self.notes.push(format!("witness not stored: {e}")),
        }
    }

    /// Records an unexpected error as a failed assertion.
    pub fn fail(&mut self, name: &'static str, e: &Error) {
        self.notes.push(format!("{name}: {e}"));
        self.assert(name, f64::MIN, 1.0);
    }
}

/// Runs `sample(index, seed)` for every sample in parallel and merges the
/// outcomes in order.
pub(crate) fn sweep<F>(cfg: &CheckConfig, sample: F) -> ReportBuilder
where
    F: Fn(usize, u64) -> SampleOutcome + Sync,
{
    let outcomes: Vec<SampleOutcome> = (0..cfg.samples)
        .into_par_iter()
        .map(|i| sample(i, derive(cfg.seed, seed::TAG_SAMPLE, i as u64)))
        .collect();
    let mut b = ReportBuilder::default();
    for (index, o) in outcomes.into_iter().enumerate() {
        let mut pass = true;
        for (name, slack, tol) in o.assertions {
            pass &= b.assert(name, slack, tol);
        }
        for w in o.witnesses {
            b.witness(w);
        }
        for note in o.notes {
            b.note(format!("sample {index}: {note}"));
        }
        b.stats.push(SampleStats {
            index,
            map: o.map,
            values: o.values,
            pass,
        });
    }
    b
}

/// Runs the check described by `cfg`.
pub fn run_check(cfg: &CheckConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let start = Instant::now();
    let builder = match cfg.check_id {
        CheckId::T11 => checks::shift_floor(cfg),
        CheckId::T12 => checks::simplex_floor(cfg),
        CheckId::T13 => checks::triangle_floor(cfg),
        CheckId::T14 => checks::circle_witnesses(cfg),
        CheckId::L22 => checks::degree_divisibility(cfg),
        CheckId::L24 => checks::lemma24(cfg),
        CheckId::L26 => checks::rigidity(cfg),
        CheckId::L27 => checks::jung_caps(cfg),
        CheckId::C31 => checks::isometry_diameter(cfg),
        CheckId::Conjecture | CheckId::Question => scan::scan(cfg),
    };
    let runtime_ms = start.elapsed().as_millis() as u64;
    Ok(builder.finish(cfg, cfg.reference_tolerance(), runtime_ms))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessCheck {
    pub label: String,
    pub stored: f64,
    /// `None` when the witness could not be rebuilt.
    pub recomputed: Option<f64>,
    pub ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerunCheck {
    pub pass: bool,
    pub min_margin: f64,
    pub pass_matches: bool,
    pub margin_deviation: f64,
    /// Whole report identical up to `runtime_ms`.
    pub identical: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayOutcome {
    pub witnesses: Vec<WitnessCheck>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rerun: Option<RerunCheck>,
    pub ok: bool,
}

/// Recomputes every stored witness and, if `rerun`, runs the configuration
/// again and compares the verdict and margin.
pub fn replay(report: &VerificationReport, rerun: bool) -> Result<ReplayOutcome> {
    if report.schema != SCHEMA_VERSION {
        return Err(Error::Serde(format!("unsupported report schema {}", report.schema)));
    }
    let witnesses: Vec<WitnessCheck> = report
        .witnesses
        .par_iter()
        .map(|w| match w.recompute() {
            Ok(v) => WitnessCheck {
                label: w.label.clone(),
                stored: w.value,
                recomputed: Some(v),
                ok: (v - w.value).abs() <= WITNESS_TOLERANCE,
                error: None,
            },
            Err(e) => WitnessCheck {
                label: w.label.clone(),
                stored: w.value,
                recomputed: None,
                ok: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let mut ok = witnesses.iter().all(|w| w.ok);
    let rerun = if rerun {
        let fresh = run_check(&report.config()?)?;
        let margin_deviation = (fresh.min_margin - report.min_margin).abs();
        let check = RerunCheck {
            pass: fresh.pass,
            min_margin: fresh.min_margin,
            pass_matches: fresh.pass == report.pass,
            margin_deviation,
            identical: fresh.canonical_json() == report.canonical_json(),
        };
        ok &= check.pass_matches && margin_deviation <= report.tolerance;
        Some(check)
    } else {
        None
    };
    Ok(ReplayOutcome { witnesses, rerun, ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn check_ids_round_trip() {
        for id in CheckId::ALL {
            assert_eq!(id.as_str().parse::<CheckId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(serde_json::from_str::<CheckId>(&json).unwrap(), id);
        }
        assert!("T9.9".parse::<CheckId>().is_err());
    }

    #[test]
    fn configs_are_validated() {
        assert!(CheckConfig::new(CheckId::T14, 2, 5, 1, 0).validate().is_err());
        assert!(CheckConfig::new(CheckId::T13, 2, 5, 1, 0).validate().is_err());
        assert!(CheckConfig::new(CheckId::T11, 2, 6, 1, 0).validate().is_err());
        assert!(CheckConfig::new(CheckId::L27, 3, 0, 1, 0).validate().is_ok());
        assert!(CheckConfig::new(CheckId::Question, 3, 5, 1, 0).validate().is_ok());
        assert!(CheckConfig::new(CheckId::Question, 3, 3, 1, 0).validate().is_err());
        assert!(CheckConfig::new(CheckId::T11, 2, 5, 0, 0).validate().is_err());
    }
}
