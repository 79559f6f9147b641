//! Distance from the origin to the convex hull of a finite point set.
//!
//! The solver is Wolfe's minimum-norm-point method: Gilbert's support-point
//! step (add the point minimizing `<x, p>`) followed by a corrective step that
//! re-projects onto the affine hull of the current corral. Corrals stay
//! affinely independent, so the witness has at most `dim + 1` nonzero
//! coefficients, and the iteration terminates finitely in exact arithmetic.

use nalgebra::{DMatrix, DVector};

use super::point::{check_points, dedup_indices, SpherePoint};
use crate::error::{Error, Result};

/// Frank-Wolfe duality gap at which the solver stops.
pub const HULL_GAP_TOLERANCE: f64 = 1e-10;
/// Distances below this are reported as containment.
pub const CONTAINMENT_THRESHOLD: f64 = 1e-8;

const MAX_ITERATIONS: usize = 100_000;
const DEDUP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct HullDistance {
    pub distance: f64,
    /// Convex coefficients, one per input point (duplicates share the weight
    /// of their first representative).
    pub coefficients: Vec<f64>,
    pub contains_origin: bool,
    pub iterations: usize,
}

impl HullDistance {
    pub fn nearest_point(&self, points: &[SpherePoint]) -> DVector<f64> {
        let d = points[0].ambient_dim();
        points
            .iter()
            .zip(&self.coefficients)
            .fold(DVector::zeros(d), |acc, (p, &w)| acc + p.coords() * w)
    }
}

pub fn origin_hull_distance(points: &[SpherePoint]) -> Result<HullDistance> {
    check_points(points)?;
    let raw: Vec<DVector<f64>> = points.iter().map(|p| p.coords().clone()).collect();
    let (reps, _) = dedup_indices(&raw, DEDUP_TOLERANCE);
    let unique: Vec<DVector<f64>> = reps.iter().map(|&i| raw[i].clone()).collect();
    let (x, weights, iterations) = min_norm_point(&unique)?;
    let mut coefficients = vec![0.0; points.len()];
    for (k, &i) in reps.iter().enumerate() {
        coefficients[i] = weights[k];
    }
    let distance = x.norm();
    Ok(HullDistance {
        distance,
        coefficients,
        contains_origin: distance < CONTAINMENT_THRESHOLD,
        iterations,
    })
}

/// Minimum-norm point of `conv(points)`; returns the point, its convex
/// weights and the number of major iterations.
pub(crate) fn min_norm_point(points: &[DVector<f64>]) -> Result<(DVector<f64>, Vec<f64>, usize)> {
    let m = points.len();
    let start = (0..m)
        .min_by(|&a, &b| points[a].norm_squared().total_cmp(&points[b].norm_squared()))
        .expect("nonempty");
    let mut corral: Vec<usize> = vec![start];
    let mut w: Vec<f64> = vec![1.0];
    let mut x = points[start].clone();

    for iter in 0..MAX_ITERATIONS {
        let (j, min_dot) = (0..m)
            .map(|i| (i, x.dot(&points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty");
        let gap = x.norm_squared() - min_dot;
        if gap <= HULL_GAP_TOLERANCE || corral.contains(&j) {
            return Ok((x, expand(&corral, &w, m), iter));
        }
        corral.push(j);
        w.push(0.0);

        // Minor cycles: move toward the affine minimizer, dropping points
        // whose weight reaches zero, until the minimizer is interior.
        loop {
            let alpha = affine_min_norm(points, &corral);
            if alpha.iter().all(|&a| a > 1e-14) {
                w = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (wi, ai) in w.iter().zip(&alpha) {
                if *ai <= 1e-14 && wi - ai > 0.0 {
                    theta = theta.min(wi / (wi - ai));
                }
            }
            for (wi, ai) in w.iter_mut().zip(&alpha) {
                *wi = theta * ai + (1.0 - theta) * *wi;
            }
            let mut k = 0;
            while k < corral.len() {
                if w[k] <= 1e-14 {
                    corral.swap_remove(k);
                    w.swap_remove(k);
                } else {
                    k += 1;
                }
            }
            if corral.len() <= 1 {
                w = vec![1.0; corral.len()];
                break;
            }
        }
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|wi| *wi /= total);
        let next = combine(points, &corral, &w);
        if next.norm_squared() >= x.norm_squared() && corral.len() > 1 {
            // No progress: round-off has stalled the corral.
            return Ok((x, expand(&corral, &w, m), iter));
        }
        x = next;
    }
    Err(Error::NonConvergence {
        solver: "min-norm-point",
        iterations: MAX_ITERATIONS,
        residual: x.norm(),
    })
}

fn combine(points: &[DVector<f64>], idx: &[usize], w: &[f64]) -> DVector<f64> {
    idx.iter()
        .zip(w)
        .fold(DVector::zeros(points[0].len()), |acc, (&i, &wi)| acc + &points[i] * wi)
}

fn expand(idx: &[usize], w: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m];
    for (&i, &wi) in idx.iter().zip(w) {
        out[i] = wi;
    }
    out
}

/// Affine coefficients (summing to 1) of the minimum-norm point of the affine
/// hull of `points[idx]`, via least squares on `s_0 + D beta`.
fn affine_min_norm(points: &[DVector<f64>], idx: &[usize]) -> Vec<f64> {
    let k = idx.len();
    if k == 1 {
        return vec![1.0];
    }
    let base = &points[idx[0]];
    let d = DMatrix::from_fn(base.len(), k - 1, |r, c| points[idx[c + 1]][r] - base[r]);
    let rhs = -base;
    let beta = d
        .svd(true, true)
        .solve(&rhs, 1e-13)
        .unwrap_or_else(|_| DVector::zeros(k - 1));
    let mut alpha = Vec::with_capacity(k);
    alpha.push(1.0 - beta.sum());
    alpha.extend(beta.iter());
    alpha
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaratheodorySubset {
    /// Indices into the input set.
    pub indices: Vec<usize>,
    /// Convex weights of the retained points.
    pub weights: Vec<f64>,
    pub points: Vec<SpherePoint>,
}

/// At most `n + 2` points of `points` whose hull still contains the origin.
pub fn caratheodory_reduce(points: &[SpherePoint]) -> Result<CaratheodorySubset> {
    let hull = origin_hull_distance(points)?;
    if !hull.contains_origin {
        return Err(Error::OriginNotInHull {
            distance: hull.distance,
        });
    }
    reduce_convex_combination(points, &hull.coefficients)
}

/// Constructive Caratheodory: while more than `dim + 1` points carry weight,
/// move along an affine dependence until one weight vanishes. The represented
/// point `sum w_i x_i` never changes.
pub fn reduce_convex_combination(points: &[SpherePoint], weights: &[f64]) -> Result<CaratheodorySubset> {
    let d = check_points(points)?;
    if weights.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidParameter("convex weights must be nonnegative".into()));
    }
    let mut support: Vec<usize> = (0..points.len()).filter(|&i| weights[i] > 0.0).collect();
    let mut w: Vec<f64> = support.iter().map(|&i| weights[i]).collect();

    while support.len() > d + 1 {
        let k = support.len();
        // Rows: coordinates plus a row of ones; any null vector is an affine
        // dependence among the supported points.
        let lifted = DMatrix::from_fn(
            d + 1,
            k,
            |r, c| {
                if r < d {
                    points[support[c]].coords()[r]
                } else {
                    1.0
                }
            },
        );
        let mu = null_vector(&lifted);
        let step = w
            .iter()
            .zip(mu.iter())
            .filter(|(_, &m)| m > 1e-15)
            .map(|(&wi, &m)| wi / m)
            .fold(f64::INFINITY, f64::min);
        let (step, mu) = if step.is_finite() {
            (step, mu)
        } else {
            let neg = -mu;
            let s = w
                .iter()
                .zip(neg.iter())
                .filter(|(_, &m)| m > 1e-15)
                .map(|(&wi, &m)| wi / m)
                .fold(f64::INFINITY, f64::min);
            (s, neg)
        };
        let mut drop = None;
        let mut smallest = f64::INFINITY;
        for (i, (wi, m)) in w.iter_mut().zip(mu.iter()).enumerate() {
            *wi -= step * m;
            if *m > 1e-15 && *wi < smallest {
                smallest = *wi;
                drop = Some(i);
            }
        }
        let drop = drop.expect("dependence has a positive entry");
        support.remove(drop);
        w.remove(drop);
        let mut i = 0;
        while i < support.len() {
            if w[i] <= 1e-15 {
                support.remove(i);
                w.remove(i);
            } else {
                i += 1;
            }
        }
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(CaratheodorySubset {
        points: support.iter().map(|&i| points[i].clone()).collect(),
        indices: support,
        weights: w,
    })
}

/// Right singular vector of the smallest singular value (a null vector when
/// the matrix has more columns than rows).
fn null_vector(m: &DMatrix<f64>) -> DVector<f64> {
    let (rows, cols) = m.shape();
    // Pad to square so the SVD yields a full right basis.
    let mut square = DMatrix::zeros(cols.max(rows), cols);
    square.rows_mut(0, rows).copy_from(m);
    let svd = square.svd(false, true);
    let v_t = svd.v_t.expect("v_t requested");
    let (i, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("nonempty");
    v_t.row(i).transpose()
}

/// Volume of the simplex spanned by `dim + 1` points in `R^dim`.
pub fn simplex_volume(points: &[SpherePoint]) -> f64 {
    let d = points[0].ambient_dim();
    if points.len() != d + 1 {
        return 0.0;
    }
    let base = points[0].coords();
    let edges = DMatrix::from_fn(d, d, |r, c| points[c + 1].coords()[r] - base[r]);
    let fact: f64 = (1..=d).map(|k| k as f64).product();
    edges.determinant().abs() / fact
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{regular_configuration, ConfigurationKind};
    use std::f64::consts::PI;

    #[test]
    fn single_point_is_at_distance_one() {
        let p = SpherePoint::from_slice(&[0.3, -0.2, 0.9]).unwrap();
        let h = origin_hull_distance(&[p]).unwrap();
        assert!((h.distance - 1.0).abs() < 1e-15);
        assert_eq!(h.coefficients, vec![1.0]);
    }

    #[test]
    fn equilateral_triangle_contains_origin() {
        let pts: Vec<_> = (0..3)
            .map(|j| SpherePoint::on_circle(2.0 * PI * j as f64 / 3.0))
            .collect();
        let h = origin_hull_distance(&pts).unwrap();
        assert!(h.contains_origin);
        assert!(h.distance < 1e-12);
        assert!((h.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn antipodal_pair_contains_origin() {
        let a = SpherePoint::basis(3, 1);
        let h = origin_hull_distance(&[a.clone(), a.antipode()]).unwrap();
        assert!(h.contains_origin);
        assert!((h.coefficients[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn duplicates_do_not_break_the_solver() {
        let a = SpherePoint::basis(3, 0);
        let b = SpherePoint::basis(3, 1);
        let h = origin_hull_distance(&[a.clone(), a.clone(), b.clone(), b]).unwrap();
        assert!((h.distance - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((h.coefficients.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn witness_reproduces_distance() {
        let pts = regular_configuration(ConfigurationKind::Simplex, 2, 4, 8).unwrap();
        // Three of the four tetrahedron vertices: the nearest point is the
        // centroid of that face, at distance 1/3.
        let h = origin_hull_distance(&pts[..3]).unwrap();
        assert!((h.distance - 1.0 / 3.0).abs() < 1e-12);
        assert!((h.nearest_point(&pts[..3]).norm() - h.distance).abs() < 1e-14);
    }

    #[test]
    fn reduces_heptagon_on_three_sphere() {
        let pts = regular_configuration(ConfigurationKind::Pgon, 7, 4, 2).unwrap();
        let uniform = vec![1.0 / 7.0; 7];
        let sub = reduce_convex_combination(&pts, &uniform).unwrap();
        assert!(sub.points.len() <= 5);
        assert!(origin_hull_distance(&sub.points).unwrap().distance < 1e-7);
        let via_solver = caratheodory_reduce(&pts).unwrap();
        assert!(via_solver.points.len() <= 5);
        assert!(origin_hull_distance(&via_solver.points).unwrap().distance < 1e-7);
    }

    #[test]
    fn triangle_is_already_reduced() {
        let pts: Vec<_> = (0..3)
            .map(|j| SpherePoint::on_circle(0.4 + 2.0 * PI * j as f64 / 3.0))
            .collect();
        let sub = caratheodory_reduce(&pts).unwrap();
        assert_eq!(sub.indices.len(), 3);
    }

    #[test]
    fn square_reduces_to_at_most_three() {
        let pts: Vec<_> = (0..4).map(|j| SpherePoint::on_circle(PI / 2.0 * j as f64)).collect();
        let sub = reduce_convex_combination(&pts, &[0.25; 4]).unwrap();
        assert!(sub.points.len() <= 3);
        assert!(origin_hull_distance(&sub.points).unwrap().distance < 1e-7);
    }

    #[test]
    fn reduction_requires_containment() {
        let pts = vec![SpherePoint::basis(2, 0), SpherePoint::basis(2, 1)];
        assert!(matches!(caratheodory_reduce(&pts), Err(Error::OriginNotInHull { .. })));
    }

    #[test]
    fn regular_simplex_volume() {
        // Equilateral triangle inscribed in the unit circle: 3*sqrt(3)/4.
        let pts = regular_configuration(ConfigurationKind::Simplex, 1, 2, 0).unwrap();
        assert!((simplex_volume(&pts) - 3.0 * 3f64.sqrt() / 4.0).abs() < 1e-12);
    }
}
