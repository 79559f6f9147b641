//! Closed-form extremal lengths and the regular configurations realizing them.
//!
//! All lengths are chordal, measured in the ambient Euclidean space.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::linalg::haar_orthogonal;
use crate::seed;

/// Side of the regular `p`-gon inscribed in the unit circle.
pub fn polygon_side(p: usize) -> f64 {
    2.0 * (PI / p as f64).sin()
}

/// Diameter of the regular `p`-gon inscribed in the unit circle.
pub fn polygon_diameter(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        2.0
    } else {
        let k = (p / 2) as f64;
        2.0 * (k * PI / p as f64).sin()
    }
}

/// Edge of the regular `(n+1)`-simplex inscribed in `S^n`.
pub fn simplex_edge(n: usize) -> f64 {
    (2.0 * (n as f64 + 2.0) / (n as f64 + 1.0)).sqrt()
}

/// Chordal radius of the spherical Jung cap in `S^n`: `delta^2 + t^2 = 4`.
pub fn jung_radius(n: usize) -> f64 {
    // 4 - t^2 = 2n / (n + 1), written directly to avoid cancellation.
    (2.0 * n as f64 / (n as f64 + 1.0)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtremalLengths {
    pub p: usize,
    pub n: usize,
    pub rho_p: f64,
    pub d_p: f64,
    pub t_n: f64,
    pub delta_n: f64,
}

pub fn extremal_lengths(p: usize, n: usize) -> Result<ExtremalLengths> {
    if p < 2 {
        return Err(Error::InvalidParameter(format!("period must be >= 2, got {p}")));
    }
    if n < 1 {
        return Err(Error::InvalidParameter(format!(
            "sphere dimension must be >= 1, got {n}"
        )));
    }
    Ok(ExtremalLengths {
        p,
        n,
        rho_p: polygon_side(p),
        d_p: polygon_diameter(p),
        t_n: simplex_edge(n),
        delta_n: jung_radius(n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConfigurationKind {
    /// Regular `p`-gon on a great circle.
    Pgon,
    /// Regular `(n+1)`-simplex inscribed in `S^n` (`n + 2` vertices).
    Simplex,
}

/// Regular p-gon (`size = p`) or regular simplex (`size = n`) on the unit
/// sphere of `R^embedding_dim`, rotated by a seeded Haar-random orthogonal
/// matrix.
pub fn regular_configuration(
    kind: ConfigurationKind,
    size: usize,
    embedding_dim: usize,
    seed: u64,
) -> Result<Vec<SpherePoint>> {
    let canonical = match kind {
        ConfigurationKind::Pgon => {
            if size < 2 {
                return Err(Error::InvalidParameter(format!("p-gon needs p >= 2, got {size}")));
            }
            if embedding_dim < 2 {
                return Err(Error::EmbeddingTooSmall {
                    dim: embedding_dim,
                    needed: 2,
                });
            }
            canonical_pgon(size, embedding_dim)
        }
        ConfigurationKind::Simplex => {
            if size < 1 {
                return Err(Error::InvalidParameter("simplex needs n >= 1".into()));
            }
            if embedding_dim < size + 1 {
                return Err(Error::EmbeddingTooSmall {
                    dim: embedding_dim,
                    needed: size + 1,
                });
            }
            canonical_simplex(size, embedding_dim)
        }
    };
    let rotation = haar_orthogonal(embedding_dim, &mut seed::rng(seed));
    Ok(canonical
        .into_iter()
        .map(|v| SpherePoint::new(&rotation * v).expect("rotated unit vector"))
        .collect())
}

fn canonical_pgon(p: usize, dim: usize) -> Vec<DVector<f64>> {
    (0..p)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / p as f64;
            let mut v = DVector::zeros(dim);
            v[0] = a.cos();
            v[1] = a.sin();
            v
        })
        .collect()
}

/// Standard basis of `R^{n+2}` centred and scaled onto the unit sphere of the
/// hyperplane `sum = 0`, then expressed in an orthonormal basis of that
/// hyperplane (`n + 1` coordinates), padded to `dim`.
fn canonical_simplex(n: usize, dim: usize) -> Vec<DVector<f64>> {
    let m = n + 2;
    let centred = DMatrix::from_fn(m, m, |i, j| if i == j { 1.0 - 1.0 / m as f64 } else { -1.0 / m as f64 });
    // Orthonormal basis of the sum-zero hyperplane: first m-1 columns of Q
    // from a QR of the centring matrix restricted to m-1 columns.
    let basis = centred.columns(0, m - 1).into_owned().qr().q();
    let scale = (1.0 - 1.0 / m as f64).sqrt();
    (0..m)
        .map(|i| {
            let coords = basis.transpose() * centred.column(i) / scale;
            let mut v = DVector::zeros(dim);
            v.rows_mut(0, m - 1).copy_from(&coords);
            v
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::set_diameter;

    fn pairwise(points: &[SpherePoint]) -> Vec<f64> {
        let mut out = Vec::new();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                out.push((points[i].coords() - points[j].coords()).norm());
            }
        }
        out
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(extremal_lengths(1, 3).is_err());
        assert!(extremal_lengths(3, 0).is_err());
    }

    #[test]
    fn period_three_diameter_is_sqrt_three() {
        let c = extremal_lengths(3, 2).unwrap();
        assert!((c.d_p - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn antipodal_pair_constants() {
        let c = extremal_lengths(2, 1).unwrap();
        assert_eq!(c.d_p, 2.0);
        assert!((c.rho_p - 2.0).abs() < 1e-15);
    }

    #[test]
    fn pentagon_in_three_sphere() {
        let c = extremal_lengths(5, 3).unwrap();
        assert!((c.rho_p - 1.175_570_5).abs() < 1e-7);
        assert!((c.d_p - 1.902_113_0).abs() < 1e-7);
        assert!((c.t_n - 1.581_138_8).abs() < 1e-7);
        assert!((c.delta_n - 1.224_744_9).abs() < 1e-7);
    }

    #[test]
    fn seven_sphere_simplex_edge_is_one_and_a_half() {
        assert!((simplex_edge(7) - 1.5).abs() < 1e-15);
        let pts = regular_configuration(ConfigurationKind::Simplex, 7, 8, 3).unwrap();
        assert_eq!(pts.len(), 9);
        for d in pairwise(&pts) {
            assert!((d - 1.5).abs() < 1e-12, "{d}");
        }
    }

    #[test]
    fn square_has_diameter_two() {
        let pts = regular_configuration(ConfigurationKind::Pgon, 4, 2, 0).unwrap();
        assert!((set_diameter(&pts) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_on_circle_is_equilateral() {
        let pts = regular_configuration(ConfigurationKind::Simplex, 1, 2, 11).unwrap();
        assert_eq!(pts.len(), 3);
        for d in pairwise(&pts) {
            assert!((d - 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn four_simplex_is_balanced() {
        let pts = regular_configuration(ConfigurationKind::Simplex, 3, 4, 5).unwrap();
        assert_eq!(pts.len(), 5);
        for d in pairwise(&pts) {
            assert!((d - 10f64.sqrt() / 2.0).abs() < 1e-12);
        }
        let sum: DVector<f64> = pts.iter().map(|p| p.coords().clone()).sum();
        assert!(sum.norm() <= 1e-12);
    }

    #[test]
    fn embedding_too_small() {
        assert!(matches!(
            regular_configuration(ConfigurationKind::Simplex, 3, 3, 0),
            Err(Error::EmbeddingTooSmall { .. })
        ));
        assert!(regular_configuration(ConfigurationKind::Pgon, 5, 1, 0).is_err());
    }
}
