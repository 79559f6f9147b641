//! Verification reports and self-checking witnesses.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::CheckConfig;
use crate::circle::witness_chord;
use crate::error::{Error, Result};
use crate::geometry::{caratheodory_reduce, is_regular_pgon, origin_hull_distance, simplex_volume, SpherePoint};
use crate::isometry::{shift_exact, PeriodicIsometry};
use crate::maps::{MapSpec, PeriodicMap};
use crate::orbit::{circle_degree, lemma24_residual, orbit};

pub const SCHEMA_VERSION: u32 = 1;

/// Stored values must recompute to within this on reload.
pub const WITNESS_TOLERANCE: f64 = 1e-9;

/// One asserted inequality, summarized over all samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assertion {
    pub name: String,
    /// Smallest observed slack (`value - bound` for lower bounds).
    pub worst_slack: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub evaluated: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    pub values: BTreeMap<String, f64>,
    pub pass: bool,
}

/// What a witness measures; recomputed from the stored objects on reload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "snake_case")]
pub enum Metric {
    /// Largest singular value of `Q - I` for an isometry spec.
    ShiftExact,
    /// `|h(x) - x|`.
    ShiftAt,
    /// Diameter of the orbit of `x`.
    OrbitDiameter,
    /// `|h^i(x) - h^j(x)|`.
    OrbitChord { i: usize, j: usize },
    /// Residual `|lambda x + sum_1^{p-1} h^i(x)|`.
    Lemma24Residual { lambda: f64 },
    /// Distance from the origin to the hull of the orbit of `x`.
    OrbitHullDistance,
    /// Largest interior angle of the orbit triangle (period 3).
    TriangleMaxAngle,
    /// Largest of planarity residual and chord deviation of the orbit of `x`
    /// as a regular p-gon.
    PgonIrregularity,
    /// Same, for the stored point set.
    SetIrregularity,
    /// `|h^k(x) + x|`.
    AntipodalResidual { k: usize },
    /// Winding number of the barycentric map.
    CircleDegree { resolution: usize },
    /// Largest chord from `center` to `points`.
    CapRadius { center: SpherePoint },
    /// Distance from the origin to the hull of `points`.
    HullDistance,
    /// Chord of the circle witness construction for base `x`.
    WitnessChord,
    /// Volume of the Caratheodory-reduced simplex of the orbit of `x`.
    ReducedSimplexVolume,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<SpherePoint>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<SpherePoint>>,
    #[serde(flatten)]
    pub metric: Metric,
    pub value: f64,
}

impl Witness {
    pub fn on_map(label: &str, map: &PeriodicMap, x: Option<&SpherePoint>, metric: Metric) -> Result<Self> {
        let mut w = Witness {
            label: label.to_string(),
            map: map.provenance().cloned(),
            x: x.cloned(),
            points: None,
            metric,
            value: 0.0,
        };
        w.value = w.recompute()?;
        Ok(w)
    }

    pub fn on_points(label: &str, points: Vec<SpherePoint>, metric: Metric) -> Result<Self> {
        let mut w = Witness {
            label: label.to_string(),
            map: None,
            x: None,
            points: Some(points),
            metric,
            value: 0.0,
        };
        w.value = w.recompute()?;
        Ok(w)
    }

    fn map(&self) -> Result<PeriodicMap> {
        let spec = self
            .map
            .as_ref()
            .ok_or_else(|| Error::Serde(format!("witness {} has no map", self.label)))?;
        PeriodicMap::from_spec(spec)
    }

    fn base(&self) -> Result<&SpherePoint> {
        self.x
            .as_ref()
            .ok_or_else(|| Error::Serde(format!("witness {} has no point", self.label)))
    }

    fn stored_points(&self) -> Result<&[SpherePoint]> {
        self.points
            .as_deref()
            .ok_or_else(|| Error::Serde(format!("witness {} has no point set", self.label)))
    }

    /// Recomputes the metric from the stored objects.
    pub fn recompute(&self) -> Result<f64> {
        Ok(match &self.metric {
            Metric::ShiftExact => match self.map.as_ref() {
                Some(MapSpec::Isometry { spectrum }) => shift_exact(&PeriodicIsometry::from_spectrum(spectrum)?),
                _ => return Err(Error::Serde("exact shift needs an isometry".into())),
            },
            Metric::ShiftAt => {
                let h = self.map()?;
                let x = self.base()?;
                (h.apply(x.coords()) - x.coords()).norm()
            }
            Metric::OrbitDiameter => orbit(&self.map()?, self.base()?)?.diameter,
            Metric::OrbitChord { i, j } => {
                let o = orbit(&self.map()?, self.base()?)?;
                o.points[i - 1].chord(&o.points[j - 1])
            }
            Metric::Lemma24Residual { lambda } => lemma24_residual(&self.map()?, self.base()?.coords(), *lambda),
            Metric::OrbitHullDistance => origin_hull_distance(&orbit(&self.map()?, self.base()?)?.points)?.distance,
            Metric::TriangleMaxAngle => triangle_max_angle(&orbit(&self.map()?, self.base()?)?.points),
            Metric::PgonIrregularity => {
                let o = orbit(&self.map()?, self.base()?)?;
                let r = is_regular_pgon(&o.points, 1e-6);
                r.planarity_residual.max(r.chord_deviation)
            }
            Metric::SetIrregularity => {
                let r = is_regular_pgon(self.stored_points()?, 1e-6);
                r.planarity_residual.max(r.chord_deviation)
            }
            Metric::AntipodalResidual { k } => {
                let h = self.map()?;
                let x = self.base()?;
                let mut y = x.coords().clone();
                for _ in 0..*k {
                    y = h.apply(&y);
                }
                (y + x.coords()).norm()
            }
            Metric::CircleDegree { resolution } => circle_degree(&self.map()?, *resolution)?.degree as f64,
            Metric::CapRadius { center } => self
                .stored_points()?
                .iter()
                .map(|p| center.chord(p))
                .fold(0.0, f64::max),
            Metric::HullDistance => origin_hull_distance(self.stored_points()?)?.distance,
            Metric::WitnessChord => match self.map.as_ref() {
                Some(MapSpec::CircleHomeo(h)) => witness_chord(h, self.base()?)?.chord,
                _ => return Err(Error::Serde("witness chord needs a circle map".into())),
            },
            Metric::ReducedSimplexVolume => {
                let o = orbit(&self.map()?, self.base()?)?;
                simplex_volume(&caratheodory_reduce(&o.points)?.points)
            }
        })
    }

    pub fn reverify(&self) -> Result<f64> {
        let v = self.recompute()?;
        Ok((v - self.value).abs())
    }
}

/// Largest interior angle of the triangle spanned by three points.
pub fn triangle_max_angle(points: &[SpherePoint]) -> f64 {
    let v: Vec<_> = points.iter().map(|p| p.coords()).collect();
    let angle = |a: usize, b: usize, c: usize| {
        let u = v[b] - v[a];
        let w = v[c] - v[a];
        (u.dot(&w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos()
    };
    angle(0, 1, 2).max(angle(1, 2, 0)).max(angle(2, 0, 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub n: usize,
    pub p: usize,
    pub samples: usize,
    pub budget: usize,
    pub closed_form_tolerance: f64,
    pub optimizer_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub check_id: String,
    pub params: Params,
    pub seed: u64,
    pub pass: bool,
    /// Worst slack over all assertions. Nonnegative slacks are reported as
    /// is; a negative slack is rescaled by `tolerance / tol_i`, so `pass`
    /// holds exactly when `min_margin >= -tolerance`.
    pub min_margin: f64,
    pub tolerance: f64,
    pub assertions: Vec<Assertion>,
    pub witnesses: Vec<Witness>,
    pub per_sample_stats: Vec<SampleStats>,
    /// Aggregates over the whole sweep.
    #[serde(default)]
    pub summary: BTreeMap<String, f64>,
    #[serde(default)]
    pub notes: Vec<String>,
    pub runtime_ms: u64,
}

impl VerificationReport {
    pub fn config(&self) -> Result<CheckConfig> {
        Ok(CheckConfig {
            check_id: self.check_id.parse()?,
            n: self.params.n,
            p: self.params.p,
            samples: self.params.samples,
            budget: self.params.budget,
            seed: self.seed,
            closed_form_tolerance: self.params.closed_form_tolerance,
            optimizer_tolerance: self.params.optimizer_tolerance,
        })
    }

    /// Report as JSON with `runtime_ms` zeroed, for bitwise comparisons.
    pub fn canonical_json(&self) -> String {
        let mut r = self.clone();
        r.runtime_ms = 0;
        serde_json::to_string(&r).expect("report serializes")
    }
}

/// Collects assertions, witnesses and per-sample stats while a check runs.
#[derive(Debug, Default)]
pub struct ReportBuilder {
    assertions: Vec<Assertion>,
    pub witnesses: Vec<Witness>,
    pub stats: Vec<SampleStats>,
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Per-kind cap on stored witnesses.
pub const MAX_WITNESSES_PER_LABEL: usize = 8;

impl ReportBuilder {
    /// Records `slack >= -tolerance` under `name`.
    /// A NaN slack is recorded as `f64::MIN`, a failure. `tolerance` must be
    /// positive.
    pub fn assert(&mut self, name: &str, slack: f64, tolerance: f64) -> bool {
        debug_assert!(tolerance > 0.0);
        let slack = if slack.is_nan() { f64::MIN } else { slack };
        let ok = slack >= -tolerance;
        match self.assertions.iter_mut().find(|a| a.name == name) {
            Some(a) => {
                a.worst_slack = a.worst_slack.min(slack);
                a.pass &= ok;
                a.evaluated += 1;
            }
            None => self.assertions.push(Assertion {
                name: name.to_string(),
                worst_slack: slack,
                tolerance,
                pass: ok,
                evaluated: 1,
            }),
        }
        ok
    }

    pub fn witness(&mut self, w: Witness) {
        let count = self.witnesses.iter().filter(|x| x.label == w.label).count();
        if count < MAX_WITNESSES_PER_LABEL {
            self.witnesses.push(w);
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn finish(self, cfg: &CheckConfig, tolerance: f64, runtime_ms: u64) -> VerificationReport {
        let min_margin = self
            .assertions
            .iter()
            .map(|a| {
                if a.worst_slack >= 0.0 {
                    a.worst_slack
                } else {
                    a.worst_slack * (tolerance / a.tolerance)
                }
            })
            .reduce(f64::min)
            .unwrap_or(0.0);
        let pass = self.assertions.iter().all(|a| a.pass) && min_margin >= -tolerance;
        VerificationReport {
            schema: SCHEMA_VERSION,
            check_id: cfg.check_id.to_string(),
            params: Params {
                n: cfg.n,
                p: cfg.p,
                samples: cfg.samples,
                budget: cfg.budget,
                closed_form_tolerance: cfg.closed_form_tolerance,
                optimizer_tolerance: cfg.optimizer_tolerance,
            },
            seed: cfg.seed,
            pass,
            min_margin,
            tolerance,
            assertions: self.assertions,
            witnesses: self.witnesses,
            per_sample_stats: self.stats,
            summary: self.summary,
            notes: self.notes,
            runtime_ms,
        }
    }
}
