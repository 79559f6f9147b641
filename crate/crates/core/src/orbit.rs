//! Orbits of periodic maps and the quantities derived from them.

use std::f64::consts::{PI, TAU};
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::linalg::{random_unit, tangent_basis};
use crate::maps::PeriodicMap;
use crate::optimize::{ascend, AscentOptions};
use crate::seed;

/// Orbits whose last iterate misses the base point by more than this are
/// rejected as evidence of a non-periodic map.
pub const PERIOD_VIOLATION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub base: SpherePoint,
    /// `h^1(x), ..., h^p(x)`.
    pub points: Vec<SpherePoint>,
    /// `|sum_i h^i(x)|`.
    pub balance_residual: f64,
    pub diameter: f64,
}

impl Orbit {
    pub fn from_points(base: SpherePoint, points: Vec<SpherePoint>) -> Self {
        let d = base.ambient_dim();
        let balance_residual = points.iter().fold(DVector::zeros(d), |acc, p| acc + p.coords()).norm();
        let diameter = crate::geometry::set_diameter(&points);
        Orbit {
            base,
            points,
            balance_residual,
            diameter,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sum(&self) -> DVector<f64> {
        self.points
            .iter()
            .fold(DVector::zeros(self.base.ambient_dim()), |acc, p| acc + p.coords())
    }

    /// CSV with header `i,x0,...,xn` and one row per iterate `i = 1..p`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let d = self.base.ambient_dim();
        let header: Vec<String> = std::iter::once("i".to_string())
            .chain((0..d).map(|j| format!("x{j}")))
            .collect();
        writeln!(out, "{}", header.join(","))?;
        for (i, p) in self.points.iter().enumerate() {
            let row: Vec<String> = p.coords().iter().map(|c| format!("{c:.17e}")).collect();
            writeln!(out, "{},{}", i + 1, row.join(","))?;
        }
        Ok(())
    }
}

pub fn orbit(h: &PeriodicMap, x: &SpherePoint) -> Result<Orbit> {
    if x.ambient_dim() != h.ambient_dim() {
        return Err(Error::DimensionMismatch {
            expected: h.ambient_dim(),
            got: x.ambient_dim(),
        });
    }
    let iterates = h.iterates(x.coords());
    if let Some(last) = iterates.last() {
        let residual = (last - x.coords()).norm();
        if residual > PERIOD_VIOLATION {
            return Err(Error::PeriodViolation { residual });
        }
    }
    let points = iterates
        .into_iter()
        .map(|v| SpherePoint::new(v).expect("unit iterate"))
        .collect();
    Ok(Orbit::from_points(x.clone(), points))
}

pub fn default_balance_tolerance(p: usize) -> f64 {
    1e-9 * p as f64
}

/// Normalized orbit sum; undefined on balanced orbits.
pub fn barycentric(h: &PeriodicMap, x: &SpherePoint, eps_bal: Option<f64>) -> Result<SpherePoint> {
    let eps = eps_bal.unwrap_or_else(|| default_balance_tolerance(h.period()));
    let o = orbit(h, x)?;
    if o.balance_residual <= eps {
        return Err(Error::BalancedOrbit {
            residual: o.balance_residual,
        });
    }
    SpherePoint::new(o.sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lemma24Branch {
    /// `sum_1^p h^i(x) = 0`, `lambda = 1`.
    Balanced,
    /// `beta(x) = -x`, `lambda = 1 + |sum_1^p h^i(x)|`.
    Antipodal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma24Solution {
    pub x: SpherePoint,
    pub lambda: f64,
    /// `|lambda x + sum_1^{p-1} h^i(x)|`.
    pub residual: f64,
    pub branch: Lemma24Branch,
    pub restarts_used: usize,
}

pub const LEMMA24_TOLERANCE: f64 = 1e-7;

/// Random candidates drawn per restart; restarts begin from the candidates
/// with the smallest residual at their optimal `lambda`.
const SCREENING: usize = 32;
const MAX_CANDIDATES: usize = 2048;

/// `|lambda x + sum_1^{p-1} h^i(x)|`.
pub fn lemma24_residual(h: &PeriodicMap, x: &DVector<f64>, lambda: f64) -> f64 {
    (partial_sum(h, x) + x * lambda).norm()
}

fn partial_sum(h: &PeriodicMap, x: &DVector<f64>) -> DVector<f64> {
    let mut s = DVector::zeros(x.len());
    let mut y = x.clone();
    for _ in 1..h.period() {
        y = h.apply(&y);
        s += &y;
    }
    s
}

/// Finds `x` on the sphere and `lambda >= 1` with
/// `lambda x + sum_1^{p-1} h^i(x) = 0`.
///
/// Writing `T(x) = sum_1^{p-1} h^i(x)`, the system `T(x) + lambda x = 0` has
/// `n + 1` equations in `n + 1` unknowns (tangent coordinates and `lambda`);
/// it covers both the balanced branch (`lambda = 1`) and `beta(x) = -x`.
/// Each restart runs damped Gauss-Newton with a finite-difference Jacobian
/// and `lambda` clamped to `[1, inf)`.
pub fn solve_lemma24(h: &PeriodicMap, budget: usize, seed: u64) -> Result<Lemma24Solution> {
    let d = h.ambient_dim();
    let budget = budget.max(1);
    let merit = |x: &DVector<f64>| {
        let t = partial_sum(h, x);
        let lambda = (-t.dot(x)).max(1.0);
        (t + x * lambda).norm()
    };
    let mut starts: Vec<(f64, usize, DVector<f64>)> = (0..(SCREENING * budget).min(MAX_CANDIDATES).max(budget))
        .map(|i| {
            let x = random_unit(d, &mut seed::child_rng(seed, seed::TAG_RESTART, i as u64));
            (merit(&x), i, x)
        })
        .collect();
    starts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best: Option<(DVector<f64>, f64, f64)> = None;
    let mut restarts_used = 0;
    for (r, (_, _, x0)) in starts.into_iter().take(budget).enumerate() {
        restarts_used = r + 1;
        let x0 = match r % 3 {
            1 => toward_large_shift(h, x0),
            2 => toward_antipodal_beta(h, x0),
            _ => x0,
        };
        let (x, lambda, res) = levenberg_marquardt(h, x0);
        if best.as_ref().is_none_or(|b| res < b.2) {
            best = Some((x, lambda, res));
        }
        if res <= 1e-12 {
            break;
        }
        if res <= LEMMA24_TOLERANCE && r + 1 >= 4 {
            break;
        }
    }
    let (x, lambda, residual) = best.expect("at least one restart");
    if residual > LEMMA24_TOLERANCE {
        return Err(Error::NonConvergence {
            solver: "orbit-sum",
            iterations: restarts_used,
            residual,
        });
    }
    let full = partial_sum(h, &x) + &x;
    let branch = if full.norm() <= default_balance_tolerance(h.period()).max(residual) {
        Lemma24Branch::Balanced
    } else {
        Lemma24Branch::Antipodal
    };
    Ok(Lemma24Solution {
        x: SpherePoint::new(x)?,
        lambda,
        residual,
        branch,
        restarts_used,
    })
}

/// Ascent on the displacement `|h(x) - x|`; orbits around the origin move
/// their points far, while starts near fixed points do not.
fn toward_large_shift(h: &PeriodicMap, x0: DVector<f64>) -> DVector<f64> {
    let f = |x: &DVector<f64>| (h.apply(x) - x).norm_squared();
    let opts = AscentOptions {
        max_iterations: 50,
        gradient_tolerance: 1e-8,
        ..Default::default()
    };
    ascend(&f, x0, &opts).0
}

/// Descent on `<beta(x), x>`, which reaches its minimum `-1` exactly where
/// `beta(x) = -x`.
fn toward_antipodal_beta(h: &PeriodicMap, x0: DVector<f64>) -> DVector<f64> {
    let f = |x: &DVector<f64>| {
        let s = partial_sum(h, x) + x;
        let sn = s.norm();
        if sn > 0.0 {
            -s.dot(x) / sn
        } else {
            1.0
        }
    };
    let opts = AscentOptions {
        max_iterations: 100,
        gradient_tolerance: 1e-10,
        ..Default::default()
    };
    ascend(&f, x0, &opts).0
}

fn levenberg_marquardt(h: &PeriodicMap, x0: DVector<f64>) -> (DVector<f64>, f64, f64) {
    let residual_vec = |x: &DVector<f64>, lambda: f64| partial_sum(h, x) + x * lambda;
    let mut x = x0;
    let mut lambda = (-partial_sum(h, &x).dot(&x)).max(1.0);
    let mut r = residual_vec(&x, lambda);
    let mut rn = r.norm();
    let mut mu = 1e-3;
    let d = x.len();
    for _ in 0..200 {
        if rn <= 1e-13 {
            break;
        }
        let basis = tangent_basis(&x);
        let mut jac = DMatrix::zeros(d, d);
        let eps = 1e-7;
        for j in 0..d - 1 {
            let b = basis.column(j).into_owned();
            let xp = (&x + &b * eps).normalize();
            let xm = (&x - &b * eps).normalize();
            let col = (residual_vec(&xp, lambda) - residual_vec(&xm, lambda)) / (2.0 * eps);
            jac.set_column(j, &col);
        }
        jac.set_column(d - 1, &x);
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &r;
        let mut improved = false;
        for _ in 0..30 {
            let mut a = jtj.clone();
            for i in 0..d {
                a[(i, i)] += mu * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-&g)) else {
                mu *= 10.0;
                continue;
            };
            let tangent_step = &basis * step.rows(0, d - 1);
            let xn = (&x + tangent_step).normalize();
            let ln = (lambda + step[d - 1]).max(1.0);
            let rnew = residual_vec(&xn, ln);
            if rnew.norm() < rn {
                x = xn;
                lambda = ln;
                r = rnew;
                rn = r.norm();
                mu = (mu / 3.0).max(1e-12);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (x, lambda, rn)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiameterEstimate {
    pub x: SpherePoint,
    /// Diameter of the orbit of `x`: a lower bound on the orbital diameter.
    pub theta: f64,
    /// Iterate exponents of the farthest pair.
    pub pair: (usize, usize),
}

fn farthest_pair(points: &[DVector<f64>]) -> (usize, usize, f64) {
    let mut best = (0, 0, 0.0);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = (&points[i] - &points[j]).norm();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    best
}

fn orbit_diameter(h: &PeriodicMap, x: &DVector<f64>) -> f64 {
    farthest_pair(&h.iterates(x)).2
}

/// Lower bound on the orbital diameter of `h`.
///
/// Evaluates `2 * budget` seeded random points, runs projected gradient
/// ascent on a log-sum-exp smoothing of the pairwise maximum (temperature
/// annealed from 1e-1 to 1e-4) from the first `budget` of them, then polishes
/// each result on its farthest pair. Restart `i` is identical for every
/// budget, so the estimate is monotone in `budget`.
pub fn maximize_orbit_diameter(h: &PeriodicMap, budget: usize, seed: u64) -> DiameterEstimate {
    let d = h.ambient_dim();
    if h.period() <= 1 {
        let x = SpherePoint::basis(d, 0);
        return DiameterEstimate {
            x,
            theta: 0.0,
            pair: (1, 1),
        };
    }
    let starts: Vec<DVector<f64>> = (0..2 * budget.max(1))
        .map(|i| random_unit(d, &mut seed::child_rng(seed, seed::TAG_PROBE, i as u64)))
        .collect();

    let candidates: Vec<(DVector<f64>, f64)> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x0)| {
            if i >= budget {
                return (x0.clone(), orbit_diameter(h, x0));
            }
            let x = anneal_and_polish(h, x0.clone());
            let v = orbit_diameter(h, &x);
            let v0 = orbit_diameter(h, x0);
            if v >= v0 {
                (x, v)
            } else {
                (x0.clone(), v0)
            }
        })
        .collect();

    // Index-ordered reduction keeps ties deterministic.
    let (x, theta) = candidates
        .into_iter()
        .fold(None::<(DVector<f64>, f64)>, |best, c| match best {
            Some(b) if b.1 >= c.1 => Some(b),
            _ => Some(c),
        })
        .expect("nonempty");
    let (i, j, _) = farthest_pair(&h.iterates(&x));
    DiameterEstimate {
        x: SpherePoint::new(x).expect("unit"),
        theta,
        pair: (i + 1, j + 1),
    }
}

fn anneal_and_polish(h: &PeriodicMap, x0: DVector<f64>) -> DVector<f64> {
    let mut x = x0;
    for temperature in [1e-1, 1e-2, 1e-3, 1e-4] {
        let smooth = |y: &DVector<f64>| {
            let it = h.iterates(y);
            let mut dists = Vec::with_capacity(it.len() * it.len() / 2);
            for a in 0..it.len() {
                for b in a + 1..it.len() {
                    dists.push((&it[a] - &it[b]).norm());
                }
            }
            let m = dists.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            m + temperature * dists.iter().map(|v| ((v - m) / temperature).exp()).sum::<f64>().ln()
        };
        let opts = AscentOptions {
            max_iterations: 60,
            gradient_tolerance: 1e-10,
            ..Default::default()
        };
        x = ascend(&smooth, x, &opts).0;
    }
    let (i, j, _) = farthest_pair(&h.iterates(&x));
    let pair = |y: &DVector<f64>| {
        let it = h.iterates(y);
        (&it[i] - &it[j]).norm_squared()
    };
    let opts = AscentOptions {
        max_iterations: 300,
        gradient_tolerance: 1e-11,
        ..Default::default()
    };
    ascend(&pair, x, &opts).0
}

/// Point and value of a sampled lower bound on the shift `sup |h(x) - x|`:
/// the best of `2 * budget` seeded points, the first `budget` of them
/// refined by projected gradient ascent.
pub fn maximize_shift(h: &PeriodicMap, budget: usize, seed: u64) -> (SpherePoint, f64) {
    let d = h.ambient_dim();
    let f = |x: &DVector<f64>| (h.apply(x) - x).norm_squared();
    let best = (0..2 * budget.max(1))
        .into_par_iter()
        .map(|i| {
            let x0 = random_unit(d, &mut seed::child_rng(seed, seed::TAG_PROBE, i as u64));
            if i < budget.max(1) {
                ascend(&f, x0, &AscentOptions::default())
            } else {
                let v = f(&x0);
                (x0, v)
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(None::<(DVector<f64>, f64)>, |acc, c| match acc {
            Some(a) if a.1 >= c.1 => Some(a),
            _ => Some(c),
        })
        .expect("at least one start");
    let x = SpherePoint::new(best.0).expect("unit start");
    let value = (h.apply(x.coords()) - x.coords()).norm();
    (x, value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleDegree {
    pub degree: i64,
    pub divisible_by_p: bool,
    pub samples: usize,
    /// Smallest orbit-sum norm seen along the sweep.
    pub min_balance: f64,
}

const DEGREE_SAMPLE_CAP: usize = 1 << 20;

/// Winding number of the barycentric map of a circle map.
pub fn circle_degree(h: &PeriodicMap, resolution: usize) -> Result<CircleDegree> {
    if h.n() != 1 {
        return Err(Error::InvalidParameter("circle_degree needs a map of S^1".into()));
    }
    let eps = default_balance_tolerance(h.period());
    let mut min_balance = f64::INFINITY;
    let mut samples = 0usize;
    let mut beta_angle = |t: f64, samples: &mut usize| -> Result<f64> {
        *samples += 1;
        let x = DVector::from_vec(vec![(TAU * t).cos(), (TAU * t).sin()]);
        let s = h.iterates(&x).into_iter().fold(DVector::zeros(2), |acc, y| acc + y);
        let n = s.norm();
        min_balance = min_balance.min(n);
        if n <= eps {
            return Err(Error::BalancedOrbit { residual: n });
        }
        Ok(s[1].atan2(s[0]))
    };
    let wrap = |d: f64| {
        let w = (d + PI).rem_euclid(TAU) - PI;
        if w == -PI {
            PI
        } else {
            w
        }
    };

    let n0 = resolution.max(8);
    let mut total = 0.0;
    let mut prev_t = 0.0;
    let mut prev_a = beta_angle(0.0, &mut samples)?;
    let first = prev_a;
    for i in 1..=n0 {
        let t = i as f64 / n0 as f64;
        let a = if i == n0 { first } else { beta_angle(t, &mut samples)? };
        // Refine the interval [prev_t, t] until every increment is small.
        let mut stack = vec![(prev_t, prev_a, t, a)];
        while let Some((ta, aa, tb, ab)) = stack.pop() {
            let delta = wrap(ab - aa);
            if delta.abs() <= PI / 4.0 {
                total += delta;
                continue;
            }
            if samples >= DEGREE_SAMPLE_CAP || tb - ta < 1e-15 {
                if delta.abs() > PI / 2.0 {
                    return Err(Error::ResolutionExhausted { samples });
                }
                total += delta;
                continue;
            }
            let tm = 0.5 * (ta + tb);
            let am = beta_angle(tm, &mut samples)?;
            // Left half is processed first.
            stack.push((tm, am, tb, ab));
            stack.push((ta, aa, tm, am));
        }
        prev_t = t;
        prev_a = a;
    }
    let degree = (total / TAU).round() as i64;
    Ok(CircleDegree {
        degree,
        divisible_by_p: degree.rem_euclid(h.period() as i64) == 0,
        samples,
        min_balance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::build_pl_conjugacy;
    use crate::constants::polygon_diameter;
    use crate::isometry::{build_block_isometry, canonical_simplex_rotation, RotationSpectrum};
    use crate::maps::{perturbation_matrix, projective_conjugate};

    fn axis_rotation() -> PeriodicMap {
        let q = build_block_isometry(&RotationSpectrum::new(2, 3, 1, vec![1]).unwrap()).unwrap();
        PeriodicMap::from_isometry(&q)
    }

    #[test]
    fn pole_is_fixed_and_equator_is_balanced() {
        let h = axis_rotation();
        let pole = SpherePoint::basis(3, 0);
        let o = orbit(&h, &pole).unwrap();
        assert_eq!(o.len(), 3);
        assert!(o.diameter < 1e-15);
        let eq = SpherePoint::from_slice(&[0.0, 0.6, 0.8]).unwrap();
        let o = orbit(&h, &eq).unwrap();
        assert!(o.balance_residual <= 1e-12);
        assert!((o.diameter - 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn simplex_orbit_diameter() {
        let (q, a) = canonical_simplex_rotation(5).unwrap();
        let o = orbit(&PeriodicMap::from_isometry(&q), &a).unwrap();
        assert!((o.diameter - 10f64.sqrt() / 2.0).abs() < 1e-12);
    }

    #[test]
    fn barycentric_cases() {
        let q = build_block_isometry(&RotationSpectrum::new(1, 3, 0, vec![1]).unwrap()).unwrap();
        let rot = PeriodicMap::from_isometry(&q);
        assert!(matches!(
            barycentric(&rot, &SpherePoint::on_circle(0.3), None),
            Err(Error::BalancedOrbit { .. })
        ));
        let h = axis_rotation();
        let x = SpherePoint::from_slice(&[0.4, 0.5, -0.3]).unwrap();
        let b = barycentric(&h, &x, None).unwrap();
        assert!(b.chord(&SpherePoint::basis(3, 0)) < 1e-9);
    }

    #[test]
    fn orbit_sum_antipodal_map() {
        let q = build_block_isometry(&RotationSpectrum::new(1, 2, 0, vec![1]).unwrap()).unwrap();
        let h = PeriodicMap::from_isometry(&q);
        let s = solve_lemma24(&h, 4, 0).unwrap();
        assert!((s.lambda - 1.0).abs() < 1e-12);
        assert!(s.residual < 1e-12);
    }

    #[test]
    fn orbit_sum_axis_rotation_is_balanced() {
        let s = solve_lemma24(&axis_rotation(), 8, 1).unwrap();
        assert!(s.residual <= 1e-9);
        assert!((s.lambda - 1.0).abs() < 1e-9);
        assert_eq!(s.branch, Lemma24Branch::Balanced);
    }

    #[test]
    fn orbit_sum_projective_conjugate() {
        let q = crate::isometry::random_periodic_isometry(3, 5, 3).unwrap();
        let h = projective_conjugate(&q, &perturbation_matrix(4, 2, 0.3)).unwrap();
        let s = solve_lemma24(&h, 32, 9).unwrap();
        assert!(s.lambda >= 1.0);
        let direct = lemma24_residual(&h, s.x.coords(), s.lambda);
        assert!(direct <= 1e-7, "{direct}");
    }

    #[test]
    fn diameter_of_antipodal_map_is_two() {
        let q = build_block_isometry(&RotationSpectrum::new(2, 2, 1, vec![1]).unwrap()).unwrap();
        let e = maximize_orbit_diameter(&PeriodicMap::from_isometry(&q), 4, 0);
        assert!((e.theta - 2.0).abs() < 1e-9);
        let q = build_block_isometry(&RotationSpectrum::new(3, 2, 0, vec![1, 1]).unwrap()).unwrap();
        let e = maximize_orbit_diameter(&PeriodicMap::from_isometry(&q), 2, 0);
        assert!((e.theta - 2.0).abs() < 1e-12);
    }

    #[test]
    fn diameter_of_prime_isometry_is_d_p() {
        for (n, p, s) in [(3, 5, 1), (4, 7, 2), (2, 3, 3)] {
            let q = crate::isometry::random_periodic_isometry(n, p, s).unwrap();
            let e = maximize_orbit_diameter(&PeriodicMap::from_isometry(&q), 8, s);
            assert!((e.theta - polygon_diameter(p)).abs() < 1e-6, "{n} {p}: {}", e.theta);
        }
    }

    #[test]
    fn identity_has_zero_orbital_diameter() {
        assert_eq!(maximize_orbit_diameter(&PeriodicMap::identity(3), 4, 0).theta, 0.0);
    }

    #[test]
    fn circle_degree_of_rotation_is_balanced() {
        let h = build_pl_conjugacy(1, 5, Some(vec![[0.0, 0.0], [1.0, 1.0]]), 0).unwrap();
        assert!(matches!(
            circle_degree(&PeriodicMap::from_circle(&h), 256),
            Err(Error::BalancedOrbit { .. })
        ));
    }

    #[test]
    fn circle_degree_of_conjugated_rotation_is_divisible() {
        let h = build_pl_conjugacy(1, 3, Some(vec![[0.0, 0.0], [0.2, 0.7], [1.0, 1.0]]), 0).unwrap();
        let d = circle_degree(&PeriodicMap::from_circle(&h), 512).unwrap();
        assert!(d.divisible_by_p, "{d:?}");
    }

    #[test]
    fn csv_layout() {
        let h = axis_rotation();
        let o = orbit(&h, &SpherePoint::basis(3, 1)).unwrap();
        let mut buf = Vec::new();
        o.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "i,x0,x1,x2");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
    }
}
