//! Periodic orthogonal maps built from rotation spectra.
//!
//! An isometry of prime period `p` splits `R^{n+1}` into a fixed subspace and
//! invariant 2-planes, each rotated by `2 pi k_i / p`. A [`RotationSpectrum`]
//! records that data; [`PeriodicIsometry`] realizes it as a matrix, optionally
//! conjugated by an orthogonal change of frame.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SpherePoint;
use crate::linalg::{distance_to_identity, haar_orthogonal, orthogonality_residual, reorthonormalize};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RotationSpectrum {
    pub n: usize,
    pub p: usize,
    pub fixed_dim: usize,
    pub multipliers: Vec<usize>,
    /// Seed of the Haar-random conjugator; `None` keeps the block frame.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RotationSpectrum {
    pub fn new(n: usize, p: usize, fixed_dim: usize, multipliers: Vec<usize>) -> Result<Self> {
        let s = RotationSpectrum {
            n,
            p,
            fixed_dim,
            multipliers,
            seed: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::InvalidSpectrum("sphere dimension must be >= 1".into()));
        }
        if self.p < 1 {
            return Err(Error::InvalidSpectrum("period must be >= 1".into()));
        }
        if self.fixed_dim + 2 * self.multipliers.len() != self.n + 1 {
            return Err(Error::InvalidSpectrum(format!(
                "fixed_dim {} + 2 * {} blocks != ambient dimension {}",
                self.fixed_dim,
                self.multipliers.len(),
                self.n + 1
            )));
        }
        if let Some(k) = self.multipliers.iter().find(|&&k| k % self.p == 0) {
            return Err(Error::InvalidSpectrum(format!("multiplier {k} is 0 mod {}", self.p)));
        }
        Ok(())
    }

    /// Multipliers folded into `[1, p/2]`; rotations by `k` and `p - k` are
    /// metrically identical.
    pub fn folded(&self) -> Vec<usize> {
        self.multipliers
            .iter()
            .map(|&k| {
                let k = k % self.p;
                k.min(self.p - k)
            })
            .collect()
    }

    /// Period of the realized map: `p / gcd(p, k_1, ..., k_m)`.
    pub fn realized_period(&self) -> usize {
        if self.multipliers.is_empty() {
            return 1;
        }
        let g = self.multipliers.iter().fold(self.p, |g, &k| gcd(g, k));
        self.p / g
    }

    /// `max_i 2 sin(pi k_i* / p)` over folded multipliers.
    pub fn shift_closed_form(&self) -> f64 {
        self.folded()
            .iter()
            .map(|&k| 2.0 * (PI * k as f64 / self.p as f64).sin())
            .fold(0.0, f64::max)
    }
}

pub fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_prime(p: usize) -> bool {
    p >= 2 && (2..).take_while(|d| d * d <= p).all(|d| !p.is_multiple_of(d))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicIsometry {
    pub matrix: DMatrix<f64>,
    pub spectrum: RotationSpectrum,
    pub conjugator: Option<DMatrix<f64>>,
}

impl PeriodicIsometry {
    /// Realizes `spectrum`, conjugating by the Haar matrix of its seed if set.
    pub fn from_spectrum(spectrum: &RotationSpectrum) -> Result<Self> {
        let block = build_block_isometry(spectrum)?;
        match spectrum.seed {
            None => Ok(block),
            Some(s) => {
                let c = haar_orthogonal(spectrum.n + 1, &mut seed::child_rng(s, seed::TAG_CONJUGATOR, 0));
                Ok(block.conjugated(c))
            }
        }
    }

    /// `C M C^T`; the block frame is carried to the columns of `C`.
    pub fn conjugated(self, c: DMatrix<f64>) -> Self {
        let matrix = &c * &self.matrix * c.transpose();
        PeriodicIsometry {
            matrix,
            spectrum: self.spectrum,
            conjugator: Some(c),
        }
    }

    pub fn ambient_dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn period(&self) -> usize {
        self.spectrum.realized_period()
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// Unit vector spanning the first coordinate of the `block`-th rotation
    /// plane, in the ambient frame.
    pub fn block_axis(&self, block: usize) -> SpherePoint {
        let e = SpherePoint::basis(self.ambient_dim(), self.spectrum.fixed_dim + 2 * block);
        match &self.conjugator {
            None => e,
            Some(c) => SpherePoint::new(c * e.coords()).expect("orthogonal image of a unit vector"),
        }
    }
}

pub fn build_block_isometry(spectrum: &RotationSpectrum) -> Result<PeriodicIsometry> {
    spectrum.validate()?;
    let d = spectrum.n + 1;
    let mut m = DMatrix::<f64>::identity(d, d);
    for (b, &k) in spectrum.multipliers.iter().enumerate() {
        let i = spectrum.fixed_dim + 2 * b;
        let a = 2.0 * PI * k as f64 / spectrum.p as f64;
        let (s, c) = a.sin_cos();
        m[(i, i)] = c;
        m[(i, i + 1)] = -s;
        m[(i + 1, i)] = s;
        m[(i + 1, i + 1)] = c;
    }
    Ok(PeriodicIsometry {
        matrix: m,
        spectrum: spectrum.clone(),
        conjugator: None,
    })
}

/// The rotation of `R^{p-1}` by `2 pi i / p` on its `i`-th plane, together
/// with the normalized base point `(1, 0, 1, 0, ..., 1, 0)` whose orbit is a
/// regular `(p-1)`-simplex.
pub fn canonical_simplex_rotation(p: usize) -> Result<(PeriodicIsometry, SpherePoint)> {
    if p < 3 || p.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("need an odd period >= 3, got {p}")));
    }
    if !is_prime(p) {
        return Err(Error::InvalidParameter(format!("{p} is not prime")));
    }
    let spectrum = RotationSpectrum::new(p - 2, p, 0, (1..=(p - 1) / 2).collect())?;
    let iso = build_block_isometry(&spectrum)?;
    let base = DVector::from_fn(p - 1, |i, _| if i % 2 == 0 { 1.0 } else { 0.0 });
    Ok((iso, SpherePoint::new(base)?))
}

/// Random spectrum of period `p` on `S^n`, conjugated by a Haar-random frame.
pub fn random_periodic_isometry(n: usize, p: usize, seed: u64) -> Result<PeriodicIsometry> {
    if n < 1 {
        return Err(Error::InvalidParameter("no admissible spectrum on S^0".into()));
    }
    if p < 2 {
        return Err(Error::InvalidParameter(format!("period must be >= 2, got {p}")));
    }
    let d = n + 1;
    let mut rng = seed::child_rng(seed, seed::TAG_SPECTRUM, 0);
    let blocks = rng.random_range(1..=d / 2);
    let multipliers = (0..blocks).map(|_| rng.random_range(1..p)).collect();
    let spectrum = RotationSpectrum::new(n, p, d - 2 * blocks, multipliers)?.with_seed(seed);
    PeriodicIsometry::from_spectrum(&spectrum)
}

/// `sup_x |Q x - x|`, the largest singular value of `Q - I`.
pub fn shift_exact(q: &PeriodicIsometry) -> f64 {
    let d = q.ambient_dim();
    (&q.matrix - DMatrix::<f64>::identity(d, d)).singular_values().max()
}

/// Smallest `m >= 1` with `|M^m - I| <= m * 1e-10`.
pub fn minimal_period(m: &DMatrix<f64>, p_max: usize) -> Result<usize> {
    if orthogonality_residual(m) > 1e-10 {
        return Err(Error::InvalidParameter("matrix is not orthogonal".into()));
    }
    let mut power = m.clone();
    for k in 1..=p_max {
        if distance_to_identity(&power) <= k as f64 * 1e-10 {
            return Ok(k);
        }
        power = &power * m;
        if k % 32 == 0 {
            power = reorthonormalize(&power);
        }
    }
    Err(Error::PeriodExceeds { p_max })
}
