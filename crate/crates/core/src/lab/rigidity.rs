//! Adversarial search against the chain-and-balance rigidity of regular
//! polygons.
//!
//! A cyclic tuple `x_1..x_p` on `S^n` is *feasible* when some `lambda >= 1`
//! gives `|lambda x_1 + sum_2^p x_i| <= FEASIBILITY` and every cyclically
//! consecutive chord is at most `rho_p + FEASIBILITY`. Rigidity says feasible
//! tuples are regular p-gons. The adversary fixes an irregularity level
//! `eta`, starts from a perturbed regular p-gon and drives the constraint
//! violation down by least squares while holding the irregularity near `eta`.

use std::f64::consts::TAU;

use nalgebra::DVector;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constants::{polygon_side, regular_configuration, ConfigurationKind};
use crate::error::Result;
use crate::geometry::{is_regular_pgon, Regularity, SpherePoint};
use crate::linalg::gaussian_vector;
use crate::optimize::least_squares;
use crate::seed::{self, child_rng};

pub const FEASIBILITY: f64 = 1e-9;
pub const REGULARITY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainConstraints {
    /// Best `lambda >= 1` for the balance equation.
    pub lambda: f64,
    pub balance_residual: f64,
    /// `max_i (|x_{i+1} - x_i| - bound)`, possibly negative.
    pub chain_excess: f64,
}

/// Constraint values of a cyclic tuple against the chain bound `bound`.
pub fn chain_constraints(points: &[SpherePoint], bound: f64) -> ChainConstraints {
    let p = points.len();
    let rest = points[1..]
        .iter()
        .fold(DVector::zeros(points[0].ambient_dim()), |s, x| s + x.coords());
    let x1 = points[0].coords();
    let lambda = (-rest.dot(x1)).max(1.0);
    let balance_residual = (x1 * lambda + rest).norm();
    let chain_excess = (0..p)
        .map(|i| points[i].chord(&points[(i + 1) % p]) - bound)
        .fold(f64::NEG_INFINITY, f64::max);
    ChainConstraints {
        lambda,
        balance_residual,
        chain_excess,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidityProbe {
    /// Irregularity level the adversary held.
    pub target: f64,
    pub points: Vec<SpherePoint>,
    pub constraints: ChainConstraints,
    pub feasible: bool,
    pub regularity: Regularity,
}

impl RigidityProbe {
    /// Largest of the planarity residual and the chord deviation.
    pub fn irregularity(&self) -> f64 {
        self.regularity.planarity_residual.max(self.regularity.chord_deviation)
    }

    pub fn is_violation(&self) -> bool {
        self.feasible && !self.regularity.regular
    }
}

/// Root mean square of the second differences `x_{i+2} + x_i - 2 cos(2 pi/p) x_{i+1}`,
/// which vanish exactly on regular p-gons traversed in order.
fn second_differences(xs: &[DVector<f64>]) -> f64 {
    let p = xs.len();
    let c = 2.0 * (TAU / p as f64).cos();
    let s: f64 = (0..p)
        .map(|i| (&xs[(i + 2) % p] + &xs[i] - &xs[(i + 1) % p] * c).norm_squared())
        .sum();
    (s / p as f64).sqrt()
}

/// One adversarial restart on `S^n` with `p` points and chain bound `bound`
/// (`rho_p` for the rigidity statement itself).
pub fn adversarial_probe(n: usize, p: usize, seed: u64, bound: f64) -> Result<RigidityProbe> {
    let d = n + 1;
    let mut rng = child_rng(seed, seed::TAG_RESTART, 0);
    let spread = 10f64.powf(rng.random_range(-5.7..-2.0));
    // A quarter of the probes only restore feasibility.
    let target = if rng.random_range(0..4) == 0 { 0.0 } else { spread };
    let start = regular_configuration(ConfigurationKind::Pgon, p, d, rng.random())?;
    let mut z = DVector::zeros(p * d + 1);
    for (i, x) in start.iter().enumerate() {
        let y = x.coords() + gaussian_vector(d, &mut rng) * spread;
        z.rows_mut(i * d, d).copy_from(&y.normalize());
    }

    let unpack = |z: &DVector<f64>| -> Vec<DVector<f64>> { (0..p).map(|i| z.rows(i * d, d).normalize()).collect() };
    let residual = |z: &DVector<f64>| {
        let xs = unpack(z);
        let lambda = 1.0 + z[p * d] * z[p * d];
        let balance = xs[1..].iter().fold(&xs[0] * lambda, |s, x| s + x);
        let mut r = DVector::zeros(d + p + 1);
        r.rows_mut(0, d).copy_from(&balance);
        for i in 0..p {
            r[d + i] = ((&xs[(i + 1) % p] - &xs[i]).norm() - bound).max(0.0);
        }
        r[d + p] = second_differences(&xs) - target;
        r
    };
    let normalize = |mut z: DVector<f64>| {
        for i in 0..p {
            let y = z.rows(i * d, d).normalize();
            z.rows_mut(i * d, d).copy_from(&y);
        }
        z
    };
    let (z, _) = least_squares(&residual, &normalize, z, 300);

    let points: Vec<SpherePoint> = unpack(&z)
        .into_iter()
        .map(|x| SpherePoint::new(x).expect("unit"))
        .collect();
    let constraints = chain_constraints(&points, bound);
    let feasible = constraints.balance_residual <= FEASIBILITY && constraints.chain_excess <= FEASIBILITY;
    let regularity = is_regular_pgon(&points, REGULARITY_TOLERANCE);
    Ok(RigidityProbe {
        target,
        points,
        constraints,
        feasible,
        regularity,
    })
}

/// `adversarial_probe` against the rigidity bound `rho_p`.
pub fn rigidity_probe(n: usize, p: usize, seed: u64) -> Result<RigidityProbe> {
    adversarial_probe(n, p, seed, polygon_side(p))
}
