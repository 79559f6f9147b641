//! Orbital diameters of non-isometric periodic maps against `d_p`, and the
//! simplex statistic of the closing question.

use serde::{Deserialize, Serialize};

use super::report::{Metric, ReportBuilder, VerificationReport, Witness};
use super::sampling::{conjugate_map, random_point};
use super::{run_check, sweep, CheckConfig, CheckId, SampleOutcome, LEMMA24_RESTARTS_PER_BUDGET};
use crate::constants::{polygon_diameter, simplex_edge};
use crate::error::Result;
use crate::geometry::{caratheodory_reduce, origin_hull_distance, simplex_volume, SpherePoint};
use crate::maps::PeriodicMap;
use crate::orbit::{maximize_orbit_diameter, orbit, solve_lemma24};
use crate::seed::{self, derive};

/// Random base points probed per map for the question statistic.
pub const QUESTION_PROBES: usize = 32;
pub const SIMPLEX_VOLUME_FLOOR: f64 = 1e-8;

/// Projective conjugates of random isometries of period `p` on `S^n`: the
/// smallest orbital-diameter estimate and its margin against `d_p`.
pub fn conjecture_scan(
    n: usize,
    p: usize,
    family_samples: usize,
    budget: usize,
    seed: u64,
) -> Result<VerificationReport> {
    run_check(&CheckConfig::new(CheckId::Conjecture, n, p, family_samples, seed).with_budget(budget))
}

/// Largest proven lower bound on the orbital diameter for these parameters.
fn proven_floor(n: usize, p: usize) -> f64 {
    let mut floor = simplex_edge(n);
    if p == 2 {
        floor = 2.0;
    }
    if p == 3 || n == 1 {
        floor = floor.max(polygon_diameter(p));
    }
    floor
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionStatistic {
    pub probes: usize,
    /// Probed orbits whose hull contains the origin.
    pub containing: usize,
    /// Of those, orbits whose reduced hull is a nondegenerate simplex on
    /// `n + 2` points.
    pub simplices: usize,
    /// Whether the orbit of a solution of `lambda x + sum h^i(x) = 0` is one.
    pub solver_orbit_is_simplex: Option<bool>,
}

impl QuestionStatistic {
    pub fn fraction(&self) -> f64 {
        self.simplices as f64 / self.probes as f64
    }
}

fn reduces_to_simplex(points: &[SpherePoint]) -> Result<(bool, bool)> {
    let hd = origin_hull_distance(points)?;
    if !hd.contains_origin {
        return Ok((false, false));
    }
    let reduced = caratheodory_reduce(points)?;
    let d = points[0].ambient_dim();
    let simplex = reduced.points.len() == d + 1 && simplex_volume(&reduced.points) >= SIMPLEX_VOLUME_FLOOR;
    Ok((true, simplex))
}

/// How often orbits of `h` span a nondegenerate simplex around the origin.
pub fn question_statistic(h: &PeriodicMap, probes: usize, budget: usize, seed: u64) -> Result<QuestionStatistic> {
    let d = h.ambient_dim();
    let mut stat = QuestionStatistic {
        probes,
        containing: 0,
        simplices: 0,
        solver_orbit_is_simplex: None,
    };
    for j in 0..probes {
        let x = random_point(d, derive(seed, seed::TAG_PROBE, j as u64));
        let (inside, simplex) = reduces_to_simplex(&orbit(h, &x)?.points)?;
        stat.containing += inside as usize;
        stat.simplices += simplex as usize;
    }
    if let Ok(sol) = solve_lemma24(h, budget * LEMMA24_RESTARTS_PER_BUDGET, seed) {
        stat.solver_orbit_is_simplex = Some(reduces_to_simplex(&orbit(h, &sol.x)?.points)?.1);
    }
    Ok(stat)
}

pub(crate) fn scan(cfg: &CheckConfig) -> ReportBuilder {
    let (n, p) = (cfg.n, cfg.p);
    let dp = polygon_diameter(p);
    let floor = proven_floor(n, p);
    let question = cfg.check_id == CheckId::Question || (n == 3 && p == 5);
    let mut b = sweep(cfg, |_, s| {
        let mut o = SampleOutcome::default();
        let h = match conjugate_map(n, p, s) {
            Ok(h) => h,
            Err(e) => {
                o.fail("map construction", &e);
                return o;
            }
        };
        o.map = h.provenance().cloned();
        let est = maximize_orbit_diameter(&h, cfg.budget, s);
        o.value("theta", est.theta);
        o.value("margin_d_p", est.theta - dp);
        o.assert("theta >= proven floor", est.theta - floor, cfg.optimizer_tolerance);
        if est.theta < dp - cfg.optimizer_tolerance {
            o.notes.push(format!(
                "estimate {:.12} below d_p by {:.3e}; re-run with a larger budget before drawing conclusions",
                est.theta,
                dp - est.theta
            ));
        }
        o.witness(Witness::on_map(
            "orbit diameter",
            &h,
            Some(&est.x),
            Metric::OrbitDiameter,
        ));
        if question {
            match question_statistic(&h, QUESTION_PROBES, cfg.budget, derive(s, seed::TAG_RESTART, 5)) {
                Ok(q) => {
                    o.value("question_fraction", q.fraction());
                    o.value("question_containing", q.containing as f64);
                    if let Some(hit) = q.solver_orbit_is_simplex {
                        o.value("question_solver_orbit", hit as u8 as f64);
                    }
                }
                Err(e) => o.notes.push(format!("question statistic unavailable: {e}")),
            }
        }
        o
    });
    let thetas: Vec<f64> = b.stats.iter().filter_map(|s| s.values.get("theta").copied()).collect();
    if let Some(min) = thetas.iter().copied().reduce(f64::min) {
        b.summary.insert("min_theta".into(), min);
        b.summary.insert("margin_d_p".into(), min - dp);
        b.summary.insert("proven_floor".into(), floor);
        b.summary.insert(
            "below_d_p".into(),
            thetas.iter().filter(|&&t| t < dp - cfg.optimizer_tolerance).count() as f64,
        );
    }
    if question {
        let fractions: Vec<f64> = b
            .stats
            .iter()
            .filter_map(|s| s.values.get("question_fraction").copied())
            .collect();
        if !fractions.is_empty() {
            b.summary.insert(
                "question_mean_fraction".into(),
                fractions.iter().sum::<f64>() / fractions.len() as f64,
            );
            b.summary.insert(
                "question_maps_with_simplex".into(),
                fractions.iter().filter(|&&f| f > 0.0).count() as f64,
            );
        }
        let solver_hits: f64 = b
            .stats
            .iter()
            .filter_map(|s| s.values.get("question_solver_orbit"))
            .sum();
        b.summary.insert("question_solver_orbit_simplices".into(), solver_hits);
    }
    b.note("margins against d_p are reported, not asserted; only proven floors are checked");
    b
}
