//! Periodic self-maps of spheres behind a common evaluator.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::circle::{point_to_turns, turns_to_point, CircleHomeo};
use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::isometry::{PeriodicIsometry, RotationSpectrum};
use crate::linalg::{condition_number, gaussian_matrix, random_unit};
use crate::seed;

/// Largest condition number accepted for projective conjugators.
pub const MAX_CONDITION: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapKind {
    Identity,
    Isometry,
    ProjectiveConjugate,
    CircleHomeo,
}

/// Reproducible construction parameters of a [`PeriodicMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapSpec {
    Identity {
        n: usize,
    },
    Isometry {
        spectrum: RotationSpectrum,
    },
    /// `x -> M Q M^-1 x / |.|` with `M = I + strength * G`, `G` Gaussian from
    /// `conjugator_seed`.
    ProjectiveConjugate {
        spectrum: RotationSpectrum,
        conjugator_seed: u64,
        strength: f64,
    },
    CircleHomeo(CircleHomeo),
}

#[derive(Debug, Clone)]
enum Body {
    Identity,
    Linear(DMatrix<f64>),
    Circle(CircleHomeo),
}

#[derive(Debug, Clone)]
pub struct PeriodicMap {
    n: usize,
    period: usize,
    kind: MapKind,
    body: Body,
    provenance: Option<MapSpec>,
}

impl PeriodicMap {
    pub fn identity(n: usize) -> Self {
        PeriodicMap {
            n,
            period: 1,
            kind: MapKind::Identity,
            body: Body::Identity,
            provenance: Some(MapSpec::Identity { n }),
        }
    }

    pub fn from_isometry(q: &PeriodicIsometry) -> Self {
        let provenance = (q.conjugator.is_none() || q.spectrum.seed.is_some()).then(|| MapSpec::Isometry {
            spectrum: q.spectrum.clone(),
        });
        PeriodicMap {
            n: q.ambient_dim() - 1,
            period: q.period(),
            kind: MapKind::Isometry,
            body: Body::Linear(q.matrix.clone()),
            provenance,
        }
    }

    pub fn from_circle(h: &CircleHomeo) -> Self {
        PeriodicMap {
            n: 1,
            period: h.p,
            kind: MapKind::CircleHomeo,
            body: Body::Circle(h.clone()),
            provenance: Some(MapSpec::CircleHomeo(h.clone())),
        }
    }

    pub fn from_spec(spec: &MapSpec) -> Result<Self> {
        match spec {
            MapSpec::Identity { n } => Ok(Self::identity(*n)),
            MapSpec::Isometry { spectrum } => Ok(Self::from_isometry(&PeriodicIsometry::from_spectrum(spectrum)?)),
            MapSpec::ProjectiveConjugate {
                spectrum,
                conjugator_seed,
                strength,
            } => {
                let q = PeriodicIsometry::from_spectrum(spectrum)?;
                let m = perturbation_matrix(spectrum.n + 1, *conjugator_seed, *strength);
                let mut h = projective_conjugate(&q, &m)?;
                h.provenance = Some(spec.clone());
                Ok(h)
            }
            MapSpec::CircleHomeo(h) => {
                h.validate()?;
                Ok(Self::from_circle(h))
            }
        }
    }

    /// Sphere dimension `n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + 1
    }

    pub fn period(&self) -> usize {
        self.period
    }

    pub fn kind(&self) -> MapKind {
        self.kind
    }

    pub fn provenance(&self) -> Option<&MapSpec> {
        self.provenance.as_ref()
    }

    /// The linear part for isometries and projective conjugates.
    pub fn matrix(&self) -> Option<&DMatrix<f64>> {
        match &self.body {
            Body::Linear(m) => Some(m),
            _ => None,
        }
    }

    /// Evaluates the map on a unit vector; the result is renormalized.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        match &self.body {
            Body::Identity => x.clone(),
            Body::Linear(m) => {
                let y = m * x;
                let n = y.norm();
                y / n
            }
            Body::Circle(h) => {
                let p = SpherePoint::new(x.clone()).expect("nonzero input");
                turns_to_point(h.apply_turns(point_to_turns(&p))).into_inner()
            }
        }
    }

    pub fn apply_point(&self, x: &SpherePoint) -> SpherePoint {
        SpherePoint::new(self.apply(x.coords())).expect("unit image")
    }

    /// Iterates `h^1(x), ..., h^p(x)`.
    pub fn iterates(&self, x: &DVector<f64>) -> Vec<DVector<f64>> {
        let mut out = Vec::with_capacity(self.period);
        let mut y = x.clone();
        for _ in 0..self.period {
            y = self.apply(&y);
            out.push(y.clone());
        }
        out
    }

    /// Largest `|h^p(x) - x|` over seeded uniform probes.
    pub fn period_residual(&self, probes: usize, seed: u64) -> f64 {
        let mut rng = seed::child_rng(seed, seed::TAG_PROBE, 0);
        (0..probes)
            .map(|_| {
                let x = random_unit(self.ambient_dim(), &mut rng);
                let back = self.iterates(&x).pop().unwrap_or_else(|| x.clone());
                (back - x).norm()
            })
            .fold(0.0, f64::max)
    }
}

/// Seeded `I + strength * G`.
pub fn perturbation_matrix(dim: usize, seed: u64, strength: f64) -> DMatrix<f64> {
    let g = gaussian_matrix(dim, dim, &mut seed::child_rng(seed, seed::TAG_CONJUGATOR, 1));
    DMatrix::<f64>::identity(dim, dim) + g * strength
}

/// `g_M o Q o g_M^-1` with `g_M(x) = M x / |M x|`, which is `x -> M Q M^-1 x`
/// renormalized.
pub fn projective_conjugate(q: &PeriodicIsometry, m: &DMatrix<f64>) -> Result<PeriodicMap> {
    let d = q.ambient_dim();
    if m.nrows() != d || m.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: m.nrows(),
        });
    }
    let cond = condition_number(m);
    if cond.is_nan() || cond > MAX_CONDITION {
        return Err(Error::IllConditioned {
            cond,
            max: MAX_CONDITION,
        });
    }
    let inv = m.clone().try_inverse().ok_or(Error::IllConditioned {
        cond,
        max: MAX_CONDITION,
    })?;
    let composite = m * &q.matrix * inv;
    Ok(PeriodicMap {
        n: d - 1,
        period: q.period(),
        kind: MapKind::ProjectiveConjugate,
        body: Body::Linear(composite),
        provenance: None,
    })
}

/// Projective conjugate of a random isometry, drawing conjugators from
/// derived seeds until one is well conditioned.
pub fn random_projective_conjugate(n: usize, p: usize, seed: u64, strength: f64) -> Result<PeriodicMap> {
    let q = crate::isometry::random_periodic_isometry(n, p, seed)?;
    for attempt in 0..64 {
        let conjugator_seed = seed::derive(seed, seed::TAG_CONJUGATOR, attempt);
        let spec = MapSpec::ProjectiveConjugate {
            spectrum: q.spectrum.clone(),
            conjugator_seed,
            strength,
        };
        match PeriodicMap::from_spec(&spec) {
            Err(Error::IllConditioned { .. }) => continue,
            other => return other,
        }
    }
    Err(Error::InvalidParameter(format!(
        "strength {strength} never gave a conditioned conjugator"
    )))
}
