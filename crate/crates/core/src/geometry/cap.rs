//! Smallest spherical cap (chordal radius) containing a point set.
//!
//! Since `|c - x|^2 = 2 - 2 <c, x>`, minimizing the largest chord from a unit
//! center is the same as maximizing `min_i <c, x_i>`. When the origin lies
//! outside the hull that maximum equals the distance from the origin to the
//! hull and is attained at the normalized nearest point. Otherwise the optimal
//! cap is at least a hemisphere and a multi-start projected subgradient method
//! is used.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use super::hull::origin_hull_distance;
use super::point::{check_points, set_diameter, SpherePoint};
use crate::error::{Error, Result};
use crate::linalg::{random_unit, tangent};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapCover {
    pub center: SpherePoint,
    pub chordal_radius: f64,
}

impl CapCover {
    pub fn covers(&self, points: &[SpherePoint], slack: f64) -> bool {
        points
            .iter()
            .all(|p| self.center.chord(p) <= self.chordal_radius + slack)
    }
}

pub fn smallest_enclosing_cap(points: &[SpherePoint]) -> Result<CapCover> {
    let dim = check_points(points)?;
    if set_diameter(points) >= 2.0 - 1e-9 {
        return Err(Error::AntipodalSet);
    }
    let hull = origin_hull_distance(points)?;
    let center = if !hull.contains_origin {
        hull.nearest_point(points)
    } else {
        subgradient_center(points, dim)
    };
    let center = SpherePoint::new(center)?;
    let chordal_radius = max_chord(&center, points);
    Ok(CapCover { center, chordal_radius })
}

fn max_chord(c: &SpherePoint, points: &[SpherePoint]) -> f64 {
    points.iter().map(|p| c.chord(p)).fold(0.0, f64::max)
}

/// Maximizes `min_i <c, x_i>` over unit `c` from several starts.
fn subgradient_center(points: &[SpherePoint], dim: usize) -> DVector<f64> {
    let margin = |c: &DVector<f64>| points.iter().map(|p| c.dot(p.coords())).fold(f64::INFINITY, f64::min);
    let mut starts: Vec<DVector<f64>> = points.iter().map(|p| p.coords().clone()).collect();
    let mut rng = seed::rng(0x00ca_9c0e);
    starts.extend((0..8).map(|_| random_unit(dim, &mut rng)));

    let mut best = starts[0].clone();
    let mut best_val = margin(&best);
    for start in starts {
        let mut c = start;
        let mut local_best = c.clone();
        let mut local_val = margin(&c);
        for k in 0..4000 {
            // Subgradient of the min: the worst point.
            let worst = points
                .iter()
                .min_by(|a, b| c.dot(a.coords()).total_cmp(&c.dot(b.coords())))
                .expect("nonempty");
            let g = tangent(&c, worst.coords());
            let gn = g.norm();
            if gn < 1e-15 {
                break;
            }
            let step = 0.5 / (1.0 + k as f64).sqrt();
            c += g * (step / gn);
            c /= c.norm();
            let v = margin(&c);
            if v > local_val {
                local_val = v;
                local_best = c.clone();
            }
        }
        if local_val > best_val {
            best_val = local_val;
            best = local_best;
        }
    }
    // Active-set polish: with the near-active points equalized, the best
    // center on the remaining great subsphere is closed-form.
    for delta in [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] {
        if let Some(c) = equalized_center(points, &best, delta) {
            let v = margin(&c);
            if v > best_val {
                best_val = v;
                best = c;
            }
        }
    }
    best
}

fn equalized_center(points: &[SpherePoint], c: &DVector<f64>, delta: f64) -> Option<DVector<f64>> {
    let dots: Vec<f64> = points.iter().map(|p| c.dot(p.coords())).collect();
    let lo = dots.iter().copied().fold(f64::INFINITY, f64::min);
    let active: Vec<&DVector<f64>> = points
        .iter()
        .zip(&dots)
        .filter(|(_, &d)| d <= lo + delta)
        .map(|(p, _)| p.coords())
        .collect();
    let anchor = active[0];
    // Orthonormal basis of span{x_i - x_0}, by Gram-Schmidt.
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for x in &active[1..] {
        let mut v = *x - anchor;
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let n = v.norm();
        if n > 1e-9 {
            basis.push(v / n);
        }
    }
    let project = |v: &DVector<f64>| {
        let mut w = v.clone();
        for b in &basis {
            w -= b * b.dot(v);
        }
        w
    };
    let mut cand = project(anchor);
    if cand.norm() < 1e-12 {
        // Every center on the subsphere has margin 0; keep the one nearest c.
        cand = project(c);
    }
    let n = cand.norm();
    (n > 1e-12).then(|| cand / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{jung_radius, regular_configuration, ConfigurationKind};

    #[test]
    fn single_point_cap_has_zero_radius() {
        let p = SpherePoint::from_slice(&[0.1, 0.7, -0.2]).unwrap();
        let cap = smallest_enclosing_cap(std::slice::from_ref(&p)).unwrap();
        assert!(cap.chordal_radius < 1e-12);
        assert!(cap.center.chord(&p) < 1e-12);
    }

    #[test]
    fn tetrahedron_face_needs_jung_radius() {
        let verts = regular_configuration(ConfigurationKind::Simplex, 2, 3, 17).unwrap();
        let cap = smallest_enclosing_cap(&verts[..3]).unwrap();
        assert!((cap.chordal_radius - jung_radius(2)).abs() < 1e-6);
        assert!(cap.center.chord(&verts[3].antipode()) < 1e-6);
    }

    #[test]
    fn antipodal_set_has_no_proper_cap() {
        let a = SpherePoint::basis(3, 2);
        assert_eq!(
            smallest_enclosing_cap(&[a.clone(), a.antipode()]),
            Err(Error::AntipodalSet)
        );
    }

    #[test]
    fn hull_containing_origin_falls_back_to_subgradient() {
        // Equilateral triangle on the equator of S^2: best cap is the
        // hemisphere centred at a pole, chordal radius sqrt(2).
        let pts: Vec<_> = (0..3)
            .map(|j| {
                let a = 2.0 * std::f64::consts::PI * j as f64 / 3.0;
                SpherePoint::from_slice(&[a.cos(), a.sin(), 0.0]).unwrap()
            })
            .collect();
        let cap = smallest_enclosing_cap(&pts).unwrap();
        assert!(cap.covers(&pts, 1e-12));
        assert!(
            (cap.chordal_radius - 2f64.sqrt()).abs() < 1e-6,
            "{}",
            cap.chordal_radius
        );
    }
}
