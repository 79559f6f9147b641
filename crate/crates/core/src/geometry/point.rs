use std::ops::Deref;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of the unit sphere `S^n` in `R^{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SpherePoint(DVector<f64>);

impl SpherePoint {
    /// Normalizes `coords` onto the sphere.
    pub fn new(coords: DVector<f64>) -> Result<Self> {
        let norm = coords.norm();
        if coords.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "sphere points need at least 2 coordinates, got {}",
                coords.len()
            )));
        }
        if !(norm.is_finite() && norm > 1e-300) {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(SpherePoint(coords / norm))
    }

    pub fn from_slice(coords: &[f64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(coords))
    }

    /// Point on `S^1` at angle `theta` (radians).
    pub fn on_circle(theta: f64) -> Self {
        SpherePoint(DVector::from_vec(vec![theta.cos(), theta.sin()]))
    }

    /// Basis vector `e_i` of `R^{ambient}`.
    pub fn basis(ambient: usize, i: usize) -> Self {
        let mut v = DVector::zeros(ambient);
        v[i] = 1.0;
        SpherePoint(v)
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DVector<f64> {
        self.0
    }

    /// Dimension `n` of the sphere `S^n`.
    pub fn sphere_dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.0.len()
    }

    pub fn chord(&self, other: &SpherePoint) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn antipode(&self) -> SpherePoint {
        SpherePoint(-&self.0)
    }

    /// Angle on `S^1` in `(-pi, pi]`.
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0])
    }
}

impl TryFrom<Vec<f64>> for SpherePoint {
    type Error = Error;
    /// Already-unit input is kept bit for bit so stored points round-trip.
    fn try_from(v: Vec<f64>) -> Result<Self> {
        let v = DVector::from_vec(v);
        if v.len() >= 2 && (v.norm() - 1.0).abs() <= 1e-12 {
            return Ok(SpherePoint(v));
        }
        SpherePoint::new(v)
    }
}

impl From<SpherePoint> for Vec<f64> {
    fn from(p: SpherePoint) -> Vec<f64> {
        p.0.as_slice().to_vec()
    }
}

impl AsRef<DVector<f64>> for SpherePoint {
    fn as_ref(&self) -> &DVector<f64> {
        &self.0
    }
}

/// Nonempty set of sphere points of a common dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    points: Vec<SpherePoint>,
}

impl PointSet {
    pub fn new(points: Vec<SpherePoint>) -> Result<Self> {
        check_points(&points)?;
        Ok(PointSet { points })
    }

    pub fn sphere_dim(&self) -> usize {
        self.points[0].sphere_dim()
    }

    pub fn into_vec(self) -> Vec<SpherePoint> {
        self.points
    }
}

impl Deref for PointSet {
    type Target = [SpherePoint];
    fn deref(&self) -> &[SpherePoint] {
        &self.points
    }
}

pub(crate) fn check_points(points: &[SpherePoint]) -> Result<usize> {
    let first = points
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty point set".into()))?;
    let d = first.ambient_dim();
    for p in points {
        if p.ambient_dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: p.ambient_dim(),
            });
        }
    }
    Ok(d)
}

pub fn chord(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm()
}

/// Maximum pairwise chordal distance; 0 for singletons and empty sets.
pub fn set_diameter(points: &[SpherePoint]) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(a.chord(b));
        }
    }
    best
}

/// Indices of the first representative of each cluster of points closer
/// than `tol`, and for every input the index of its representative.
pub fn dedup_indices(points: &[DVector<f64>], tol: f64) -> (Vec<usize>, Vec<usize>) {
    let mut reps: Vec<usize> = Vec::new();
    let mut owner = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        match reps.iter().position(|&r| chord(&points[r], p) <= tol) {
            Some(k) => owner.push(k),
            None => {
                owner.push(reps.len());
                reps.push(i);
            }
        }
    }
    (reps, owner)
}
