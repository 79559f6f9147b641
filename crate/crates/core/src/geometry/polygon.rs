use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::point::SpherePoint;
use crate::constants::polygon_side;

/// Outcome of [`is_regular_pgon`] with the residuals it was decided on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regularity {
    pub regular: bool,
    /// Largest distance from a point to the best-fit 2-plane through the origin.
    pub planarity_residual: f64,
    /// Largest deviation of a cyclically consecutive chord from `2 sin(pi/p)`.
    pub chord_deviation: f64,
    /// Smallest consecutive chord.
    pub min_separation: f64,
    /// Input indices in angular order around the best-fit plane.
    pub order: Vec<usize>,
}

/// Decides whether `points` are the vertices of a regular convex p-gon
/// inscribed in a great circle.
pub fn is_regular_pgon(points: &[SpherePoint], tol: f64) -> Regularity {
    let p = points.len();
    if p < 3 {
        return Regularity {
            regular: false,
            planarity_residual: f64::NAN,
            chord_deviation: f64::NAN,
            min_separation: f64::NAN,
            order: (0..p).collect(),
        };
    }
    let d = points[0].ambient_dim();
    let mut moment = DMatrix::<f64>::zeros(d, d);
    for x in points {
        moment += x.coords() * x.coords().transpose();
    }
    let eig = moment.symmetric_eigen();
    let mut idx: Vec<usize> = (0..d).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let e1 = eig.eigenvectors.column(idx[0]).into_owned();
    let e2 = eig.eigenvectors.column(idx[1]).into_owned();

    let mut planarity_residual = 0.0f64;
    let mut angles = Vec::with_capacity(p);
    for x in points {
        let a = x.coords().dot(&e1);
        let b = x.coords().dot(&e2);
        let off = (x.coords() - &e1 * a - &e2 * b).norm();
        planarity_residual = planarity_residual.max(off);
        angles.push(b.atan2(a));
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| angles[i].total_cmp(&angles[j]).then(i.cmp(&j)));

    let side = polygon_side(p);
    let mut chord_deviation = 0.0f64;
    let mut min_separation = f64::INFINITY;
    for k in 0..p {
        let c = points[order[k]].chord(&points[order[(k + 1) % p]]);
        chord_deviation = chord_deviation.max((c - side).abs());
        min_separation = min_separation.min(c);
    }
    Regularity {
        regular: planarity_residual <= tol && chord_deviation <= tol && min_separation > tol,
        planarity_residual,
        chord_deviation,
        min_separation,
        order,
    }
}
