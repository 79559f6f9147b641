//! Per-sample semantics of the bound checks.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use super::report::{triangle_max_angle, Metric, ReportBuilder, Witness};
use super::rigidity::{rigidity_probe, REGULARITY_TOLERANCE};
use super::sampling::{
    circle_map, conjugate_map, equality_isometry, isometry_map, mixed_map, random_point, small_diameter_set,
};
use super::{sweep, CheckConfig, SampleOutcome, LEMMA24_RESTARTS_PER_BUDGET};
use crate::circle::{antipodal_search, witness_chord, WitnessKind};
use crate::constants::{jung_radius, polygon_diameter, polygon_side, simplex_edge};
use crate::error::Error;
use crate::geometry::{is_regular_pgon, origin_hull_distance, set_diameter, smallest_enclosing_cap};
use crate::isometry::{random_periodic_isometry, shift_exact};
use crate::maps::PeriodicMap;
use crate::orbit::{circle_degree, maximize_orbit_diameter, maximize_shift, orbit, solve_lemma24, LEMMA24_TOLERANCE};
use crate::seed::{self, derive};

/// Probes per map for pointwise upper bounds on orbit diameters.
pub const UPPER_PROBES: usize = 64;

/// Winding-number resolution for degree checks.
pub const DEGREE_RESOLUTION: usize = 1024;

/// Fresh conjugators tried when a sampled circle map has a balanced orbit.
pub const DEGREE_RETRIES: usize = 32;

/// Orbit-hull containment accepted for solver-produced orbits.
pub const SOLVER_CONTAINMENT: f64 = 1e-6;

/// Shift is at least `rho_p`; all-ones spectra attain it on a regular p-gon.
pub(crate) fn shift_floor(cfg: &CheckConfig) -> ReportBuilder {
    let (n, p) = (cfg.n, cfg.p);
    let rho = polygon_side(p);
    let (tc, to) = (cfg.closed_form_tolerance, cfg.optimizer_tolerance);
    let mut b = sweep(cfg, |i, s| {
        let mut o = SampleOutcome::default();
        let q = if i % 4 == 1 {
            equality_isometry(n, p, s)
        } else {
            random_periodic_isometry(n, p, s)
        };
        let q = match q {
            Ok(q) => q,
            Err(e) => {
                o.fail("isometry construction", &e);
                return o;
            }
        };
        let h = PeriodicMap::from_isometry(&q);
        o.map = h.provenance().cloned();
        let shift = shift_exact(&q);
        o.value("shift", shift);
        o.value("blocks", q.spectrum.multipliers.len() as f64);
        o.assert("shift >= rho_p", shift - rho, tc);
        o.witness(Witness::on_map("shift", &h, None, Metric::ShiftExact));

        if q.spectrum.folded().iter().all(|&k| k == 1) {
            o.value("equality", 1.0);
            o.assert("all-ones spectrum: shift = rho_p", -(shift - rho).abs(), tc);
            let x = q.block_axis(0);
            match orbit(&h, &x) {
                Ok(orb) if p == 2 => {
                    o.assert("all-ones spectrum: antipodal orbit", -(orb.diameter - 2.0).abs(), tc);
                }
                Ok(orb) => {
                    let r = is_regular_pgon(&orb.points, REGULARITY_TOLERANCE);
                    let irregularity = r.planarity_residual.max(r.chord_deviation);
                    o.value("orbit_irregularity", irregularity);
                    o.assert(
                        "all-ones spectrum: regular p-gon orbit",
                        -irregularity,
                        REGULARITY_TOLERANCE,
                    );
                    o.assert(
                        "all-ones spectrum: distinct orbit points",
                        r.min_separation - REGULARITY_TOLERANCE,
                        tc,
                    );
                    o.witness(Witness::on_map(
                        "equality orbit",
                        &h,
                        Some(&x),
                        Metric::PgonIrregularity,
                    ));
                }
                Err(e) => o.fail("all-ones spectrum: regular p-gon orbit", &e),
            }
        }

        if i % 4 == 3 {
            match conjugate_map(n, p, derive(s, seed::TAG_CONJUGATOR, 3)) {
                Ok(g) => {
                    let (x, v) = maximize_shift(&g, cfg.budget, s);
                    o.value("conjugate_shift", v);
                    o.assert("sampled conjugate shift >= rho_p", v - rho, to);
                    o.witness(Witness::on_map("conjugate shift", &g, Some(&x), Metric::ShiftAt));
                }
                Err(e) => o.fail("sampled conjugate shift >= rho_p", &e),
            }
        }
        o
    });
    let equality = b.stats.iter().filter(|s| s.values.contains_key("equality")).count();
    b.summary.insert("equality_samples".into(), equality as f64);
    let min_shift = b
        .stats
        .iter()
        .filter_map(|s| s.values.get("shift"))
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min_shift.is_finite() {
        b.summary.insert("min_shift".into(), min_shift);
    }
    b
}

/// Orbital diameter is at least `t_n`; the margin against `t_{n-1}` is
/// reported for `n` outside `{1, 3, 7}` without being asserted.
pub(crate) fn simplex_floor(cfg: &CheckConfig) -> ReportBuilder {
    let (n, p) = (cfg.n, cfg.p);
    let t = simplex_edge(n);
    let previous = (n >= 2 && ![3, 7].contains(&n)).then(|| simplex_edge(n - 1));
    let mut b = sweep(cfg, |i, s| {
        let mut o = SampleOutcome::default();
        let h = match mixed_map(n, p, i, s, true) {
            Ok(h) => h,
            Err(e) => {
                o.fail("map construction", &e);
                return o;
            }
        };
        o.map = h.provenance().cloned();
        let est = maximize_orbit_diameter(&h, cfg.budget, s);
        o.value("theta", est.theta);
        o.assert("theta >= t_n", est.theta - t, cfg.optimizer_tolerance);
        if let Some(tp) = previous {
            o.value("margin_t_prev", est.theta - tp);
        }
        o.witness(Witness::on_map(
            "orbit diameter",
            &h,
            Some(&est.x),
            Metric::OrbitDiameter,
        ));
        o
    });
    if let Some(tp) = previous {
        let worst = b
            .stats
            .iter()
            .filter_map(|s| s.values.get("margin_t_prev"))
            .copied()
            .reduce(f64::min);
        if let Some(w) = worst {
            b.summary.insert("min_margin_t_prev".into(), w);
            b.note(format!("margin against t_(n-1) = {tp:.10} reported only"));
        }
    }
    b
}

/// Period 3: orbital diameter at least `sqrt 3`, with the triangle witness.
pub(crate) fn triangle_floor(cfg: &CheckConfig) -> ReportBuilder {
    let n = cfg.n;
    let d3 = polygon_diameter(3);
    let to = cfg.optimizer_tolerance;
    sweep(cfg, |i, s| {
        let mut o = SampleOutcome::default();
        let h = match mixed_map(n, 3, i, s, true) {
            Ok(h) => h,
            Err(e) => {
                o.fail("map construction", &e);
                return o;
            }
        };
        o.map = h.provenance().cloned();
        let est = maximize_orbit_diameter(&h, cfg.budget, s);
        o.value("theta", est.theta);
        o.assert("theta >= sqrt 3", est.theta - d3, to);
        o.witness(Witness::on_map(
            "orbit diameter",
            &h,
            Some(&est.x),
            Metric::OrbitDiameter,
        ));

        let sol = match solve_lemma24(
            &h,
            cfg.budget * LEMMA24_RESTARTS_PER_BUDGET,
            derive(s, seed::TAG_RESTART, 3),
        ) {
            Ok(sol) => sol,
            Err(e) => {
                o.fail("triangle witness: origin in orbit hull", &e);
                return o;
            }
        };
        let orb = match orbit(&h, &sol.x) {
            Ok(orb) => orb,
            Err(e) => {
                o.fail("triangle witness: origin in orbit hull", &e);
                return o;
            }
        };
        match origin_hull_distance(&orb.points) {
            Ok(hd) => {
                o.value("witness_hull_distance", hd.distance);
                o.assert(
                    "triangle witness: origin in orbit hull",
                    -hd.distance,
                    SOLVER_CONTAINMENT,
                );
            }
            Err(e) => o.fail("triangle witness: origin in orbit hull", &e),
        }
        let angle = triangle_max_angle(&orb.points);
        o.value("witness_max_angle", angle);
        o.value("witness_diameter", orb.diameter);
        o.assert("triangle witness: max angle >= pi/3", angle - FRAC_PI_3, to);
        o.assert("triangle witness: max angle <= pi/2", FRAC_PI_2 - angle, to);
        o.witness(Witness::on_map("triangle", &h, Some(&sol.x), Metric::TriangleMaxAngle));
        o
    })
}

/// Circle maps: witness chords of length `d_p` for odd `p`, antipodal
/// points for even `p`.
pub(crate) fn circle_witnesses(cfg: &CheckConfig) -> ReportBuilder {
    let p = cfg.p;
    let k = p / 2;
    let dp = polygon_diameter(p);
    let tc = cfg.closed_form_tolerance;
    let mut b = sweep(cfg, |_, s| {
        let mut o = SampleOutcome::default();
        let h = match circle_map(p, s) {
            Ok(h) => h,
            Err(e) => {
                o.fail("map construction", &e);
                return o;
            }
        };
        let map = PeriodicMap::from_circle(&h);
        o.map = map.provenance().cloned();
        let period = h.period_residual(1000);
        o.value("period_residual", period);
        o.assert("h^p = id on probes", -period, 1e-10);
        if p % 2 == 1 {
            let x = random_point(2, s);
            match witness_chord(&h, &x) {
                Ok(w) => {
                    o.value("chord", w.chord);
                    o.value("window_sum", w.window_sum);
                    o.value("antipodal_fallback", (w.kind == WitnessKind::Antipodal) as u8 as f64);
                    o.assert("witness chord >= d_p", w.chord - dp, tc);
                    o.assert(
                        "max window sum >= 2 pi k / p",
                        w.window_sum - 2.0 * PI * k as f64 / p as f64,
                        tc,
                    );
                    let realized = w.endpoints.0.chord(&w.endpoints.1);
                    o.assert(
                        "witness chord realized by its endpoints",
                        -(realized - w.chord).abs(),
                        1e-12,
                    );
                    o.witness(Witness::on_map("witness chord", &map, Some(&x), Metric::WitnessChord));
                }
                Err(e) => o.fail("witness chord >= d_p", &e),
            }
        } else {
            match antipodal_search(&h) {
                Ok(a) => {
                    o.value("antipodal_residual", a.residual);
                    o.assert("|h^k(x) + x| <= 1e-10", -a.residual, 1e-10);
                    match orbit(&map, &a.x) {
                        Ok(orb) => {
                            o.value("orbit_diameter", orb.diameter);
                            o.assert("antipodal orbit diameter = 2", orb.diameter - 2.0, tc);
                        }
                        Err(e) => o.fail("antipodal orbit diameter = 2", &e),
                    }
                    o.witness(Witness::on_map(
                        "antipodal point",
                        &map,
                        Some(&a.x),
                        Metric::AntipodalResidual { k },
                    ));
                }
                Err(e) => o.fail("|h^k(x) + x| <= 1e-10", &e),
            }
        }
        o
    });
    if p % 2 == 1 {
        let fallbacks: f64 = b.stats.iter().filter_map(|s| s.values.get("antipodal_fallback")).sum();
        b.summary.insert("antipodal_fallbacks".into(), fallbacks);
    }
    b
}

/// Degree of the barycentric map of circle maps without balanced orbits is
/// divisible by `p`.
pub(crate) fn degree_divisibility(cfg: &CheckConfig) -> ReportBuilder {
    let p = cfg.p;
    let mut b = sweep(cfg, |_, s| {
        let mut o = SampleOutcome::default();
        for attempt in 0..DEGREE_RETRIES {
            let h = match circle_map(p, derive(s, seed::TAG_RESTART, attempt as u64)) {
                Ok(h) => h,
                Err(e) => {
                    o.fail("map construction", &e);
                    return o;
                }
            };
            let map = PeriodicMap::from_circle(&h);
            match circle_degree(&map, DEGREE_RESOLUTION) {
                Ok(deg) => {
                    o.map = map.provenance().cloned();
                    let r = deg.degree.rem_euclid(p as i64);
                    let off = r.min(p as i64 - r) as f64;
                    o.value("degree", deg.degree as f64);
                    o.value("balanced_rejections", attempt as f64);
                    o.value("min_balance", deg.min_balance);
                    o.value("samples", deg.samples as f64);
                    o.assert("degree divisible by p", -off, cfg.closed_form_tolerance);
                    o.witness(Witness::on_map(
                        "degree",
                        &map,
                        None,
                        Metric::CircleDegree {
                            resolution: DEGREE_RESOLUTION,
                        },
                    ));
                    return o;
                }
                Err(Error::BalancedOrbit { .. }) => continue,
                Err(e) => {
                    o.fail("degree divisible by p", &e);
                    return o;
                }
            }
        }
        o.notes.push(format!(
            "every one of {DEGREE_RETRIES} conjugators had a balanced orbit"
        ));
        o.value("balanced_rejections", DEGREE_RETRIES as f64);
        o
    });
    let evaluated = b.stats.iter().filter(|s| s.values.contains_key("degree")).count();
    b.summary.insert("maps_without_balanced_orbit".into(), evaluated as f64);
    b
}

/// `lambda x + sum_1^{p-1} h^i(x) = 0` is solvable and its orbit surrounds
/// the origin.
pub(crate) fn lemma24(cfg: &CheckConfig) -> ReportBuilder {
    let (n, p) = (cfg.n, cfg.p);
    let mut b = sweep(cfg, |i, s| {
        let mut o = SampleOutcome::default();
        let h = if i % 2 == 0 {
            isometry_map(n, p, s)
        } else {
            conjugate_map(n, p, s)
        };
        let h = match h {
            Ok(h) => h,
            Err(e) => {
                o.fail("map construction", &e);
                return o;
            }
        };
        o.map = h.provenance().cloned();
        let sol = match solve_lemma24(&h, cfg.budget * LEMMA24_RESTARTS_PER_BUDGET, s) {
            Ok(sol) => sol,
            Err(Error::NonConvergence { residual, .. }) => {
                o.notes
                    .push(format!("solver budget exhausted, best residual {residual:e}"));
                o.assert("orbit-sum residual <= 1e-7", -residual, LEMMA24_TOLERANCE);
                return o;
            }
            Err(e) => {
                o.fail("orbit-sum residual <= 1e-7", &e);
                return o;
            }
        };
        o.value("residual", sol.residual);
        o.value("lambda", sol.lambda);
        o.value("restarts_used", sol.restarts_used as f64);
        o.value(
            "balanced_branch",
            matches!(sol.branch, crate::orbit::Lemma24Branch::Balanced) as u8 as f64,
        );
        o.assert("orbit-sum residual <= 1e-7", -sol.residual, LEMMA24_TOLERANCE);
        o.assert("lambda >= 1", sol.lambda - 1.0, cfg.closed_form_tolerance);
        o.witness(Witness::on_map(
            "orbit-sum solution",
            &h,
            Some(&sol.x),
            Metric::Lemma24Residual { lambda: sol.lambda },
        ));
        match orbit(&h, &sol.x).and_then(|orb| origin_hull_distance(&orb.points)) {
            Ok(hd) => {
                o.value("hull_distance", hd.distance);
                o.assert("origin in orbit hull", -hd.distance, SOLVER_CONTAINMENT);
                o.witness(Witness::on_map(
                    "orbit hull",
                    &h,
                    Some(&sol.x),
                    Metric::OrbitHullDistance,
                ));
            }
            Err(e) => o.fail("origin in orbit hull", &e),
        }
        o
    });
    let worst = b
        .stats
        .iter()
        .filter_map(|s| s.values.get("residual"))
        .copied()
        .reduce(f64::max);
    if let Some(w) = worst {
        b.summary.insert("max_residual".into(), w);
    }
    b
}

/// Adversarial restarts against chain-and-balance rigidity.
pub(crate) fn rigidity(cfg: &CheckConfig) -> ReportBuilder {
    let (n, p) = (cfg.n, cfg.p);
    let mut b = sweep(cfg, |_, s| {
        let mut o = SampleOutcome::default();
        let probe = match rigidity_probe(n, p, s) {
            Ok(probe) => probe,
            Err(e) => {
                o.fail("adversary", &e);
                return o;
            }
        };
        let irregularity = probe.irregularity();
        o.value("target_irregularity", probe.target);
        o.value("irregularity", irregularity);
        o.value("balance_residual", probe.constraints.balance_residual);
        o.value("chain_excess", probe.constraints.chain_excess);
        o.value("lambda", probe.constraints.lambda);
        o.value("feasible", probe.feasible as u8 as f64);
        if probe.feasible {
            o.assert(
                "feasible tuples are regular p-gons",
                -irregularity,
                REGULARITY_TOLERANCE,
            );
            o.assert(
                "feasible tuples have distinct vertices",
                probe.regularity.min_separation - REGULARITY_TOLERANCE,
                cfg.closed_form_tolerance,
            );
            if probe.is_violation() {
                o.witness(Witness::on_points(
                    "rigidity violation",
                    probe.points.clone(),
                    Metric::SetIrregularity,
                ));
            }
        }
        o
    });
    let feasible: Vec<f64> = b
        .stats
        .iter()
        .filter(|s| s.values.get("feasible") == Some(&1.0))
        .filter_map(|s| s.values.get("irregularity").copied())
        .collect();
    let violations = feasible.iter().filter(|&&v| v > REGULARITY_TOLERANCE).count();
    b.summary.insert("feasible".into(), feasible.len() as f64);
    b.summary.insert("violations".into(), violations as f64);
    if let Some(m) = feasible.iter().copied().reduce(f64::max) {
        b.summary.insert("max_feasible_irregularity".into(), m);
    }
    if feasible.is_empty() {
        b.note("no restart reached the feasible set; the sweep is vacuous");
    }
    b
}

/// Sets of diameter below `t_n` fit in a cap of chordal radius `delta_n`
/// and miss the origin with their hull.
pub(crate) fn jung_caps(cfg: &CheckConfig) -> ReportBuilder {
    let n = cfg.n;
    let delta = jung_radius(n);
    let tc = cfg.closed_form_tolerance;
    let mut b = sweep(cfg, |i, s| {
        let mut o = SampleOutcome::default();
        let set = match small_diameter_set(n, i, s) {
            Ok(set) => set,
            Err(e) => {
                o.fail("set construction", &e);
                return o;
            }
        };
        let diameter = set_diameter(&set);
        o.value("size", set.len() as f64);
        o.value("diameter", diameter);
        match smallest_enclosing_cap(&set) {
            Ok(cap) => {
                o.value("cap_radius", cap.chordal_radius);
                o.assert(
                    "cap radius <= delta_n",
                    delta - cap.chordal_radius,
                    cfg.optimizer_tolerance,
                );
                o.assert("cap radius >= diameter / 2", cap.chordal_radius - diameter / 2.0, tc);
                o.witness(Witness::on_points(
                    "cap",
                    set.clone(),
                    Metric::CapRadius {
                        center: cap.center.clone(),
                    },
                ));
            }
            Err(e) => o.fail("cap radius <= delta_n", &e),
        }
        match origin_hull_distance(&set) {
            Ok(hd) => {
                o.value("hull_distance", hd.distance);
                o.assert(
                    "origin outside hull",
                    hd.distance - crate::geometry::CONTAINMENT_THRESHOLD,
                    tc,
                );
                o.witness(Witness::on_points("hull", set, Metric::HullDistance));
            }
            Err(e) => o.fail("origin outside hull", &e),
        }
        o
    });
    let max_radius = b
        .stats
        .iter()
        .filter_map(|s| s.values.get("cap_radius"))
        .copied()
        .reduce(f64::max);
    if let Some(r) = max_radius {
        b.summary.insert("max_cap_radius".into(), r);
    }
    b
}

/// Isometries of prime period have orbital diameter exactly `d_p`: the
/// maximizer reaches it and no probed orbit exceeds it.
pub(crate) fn isometry_diameter(cfg: &CheckConfig) -> ReportBuilder {
    let (n, p) = (cfg.n, cfg.p);
    let dp = polygon_diameter(p);
    let (tc, to) = (cfg.closed_form_tolerance, cfg.optimizer_tolerance);
    sweep(cfg, |_, s| {
        let mut o = SampleOutcome::default();
        let h = match isometry_map(n, p, s) {
            Ok(h) => h,
            Err(e) => {
                o.fail("map construction", &e);
                return o;
            }
        };
        o.map = h.provenance().cloned();
        let est = maximize_orbit_diameter(&h, cfg.budget, s);
        o.value("theta", est.theta);
        o.assert("theta >= d_p", est.theta - dp, to);
        o.assert("theta <= d_p", dp - est.theta, to);
        let mut probe_max = est.theta;
        for j in 0..UPPER_PROBES {
            let x = random_point(n + 1, derive(s, seed::TAG_PROBE, j as u64));
            match orbit(&h, &x) {
                Ok(orb) => probe_max = probe_max.max(orb.diameter),
                Err(e) => {
                    o.fail("probed orbit diameter <= d_p", &e);
                    return o;
                }
            }
        }
        o.value("max_probed_diameter", probe_max);
        o.assert("probed orbit diameter <= d_p", dp - probe_max, tc);
        o.witness(Witness::on_map(
            "orbit diameter",
            &h,
            Some(&est.x),
            Metric::OrbitDiameter,
        ));
        o
    })
}
