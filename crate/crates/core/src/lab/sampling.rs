//! Seeded generators for the maps and point sets the checks sweep over.

use rand::Rng;

use crate::circle::{build_pl_conjugacy, CircleHomeo};
use crate::constants::{jung_radius, regular_configuration, simplex_edge, ConfigurationKind};
use crate::error::Result;
use crate::geometry::{set_diameter, SpherePoint};
use crate::isometry::{gcd, random_periodic_isometry, PeriodicIsometry, RotationSpectrum};
use crate::linalg::{random_unit, tangent};
use crate::maps::{random_projective_conjugate, PeriodicMap};
use crate::seed::{self, child_rng, derive};

/// `M = I + strength * G` for sampled projective conjugates.
pub const CONJUGATE_STRENGTH: f64 = 0.3;

pub fn random_point(dim: usize, seed: u64) -> SpherePoint {
    SpherePoint::new(random_unit(dim, &mut child_rng(seed, seed::TAG_PROBE, u64::MAX))).expect("random unit vector")
}

pub fn isometry_map(n: usize, p: usize, seed: u64) -> Result<PeriodicMap> {
    Ok(PeriodicMap::from_isometry(&random_periodic_isometry(n, p, seed)?))
}

/// Random isometry all of whose multipliers fold to 1.
pub fn equality_isometry(n: usize, p: usize, seed: u64) -> Result<PeriodicIsometry> {
    let d = n + 1;
    let mut rng = child_rng(seed, seed::TAG_SPECTRUM, 1);
    let blocks = rng.random_range(1..=d / 2);
    let multipliers = (0..blocks)
        .map(|_| if rng.random_bool(0.5) { 1 } else { p - 1 })
        .collect();
    let spectrum = RotationSpectrum::new(n, p, d - 2 * blocks, multipliers)?.with_seed(seed);
    PeriodicIsometry::from_spectrum(&spectrum)
}

pub fn conjugate_map(n: usize, p: usize, seed: u64) -> Result<PeriodicMap> {
    random_projective_conjugate(n, p, seed, CONJUGATE_STRENGTH)
}

/// `g o R_{q/p} o g^-1` with `q` uniform among residues prime to `p` and a
/// random conjugator.
pub fn circle_map(p: usize, seed: u64) -> Result<CircleHomeo> {
    let units: Vec<usize> = (1..p).filter(|&q| gcd(q, p) == 1).collect();
    let q = units[child_rng(seed, seed::TAG_SPECTRUM, 2).random_range(0..units.len())];
    build_pl_conjugacy(q, p, None, derive(seed, seed::TAG_CONJUGATOR, 2))
}

/// Rotates through isometries, projective conjugates and (on `S^1`, when
/// allowed) circle homeomorphisms.
pub fn mixed_map(n: usize, p: usize, index: usize, seed: u64, circles: bool) -> Result<PeriodicMap> {
    let families = if circles && n == 1 { 3 } else { 2 };
    match index % families {
        0 => isometry_map(n, p, seed),
        1 => conjugate_map(n, p, seed),
        _ => Ok(PeriodicMap::from_circle(&circle_map(p, seed)?)),
    }
}

/// Point at chordal distance `chord` from `center`, in direction `dir`.
fn offset(center: &SpherePoint, dir: &nalgebra::DVector<f64>, chord: f64) -> SpherePoint {
    let phi = 2.0 * (chord / 2.0).clamp(0.0, 1.0).asin();
    let u = tangent(center.coords(), dir).normalize();
    SpherePoint::new(center.coords() * phi.cos() + u * phi.sin()).expect("unit combination")
}

/// Random set of 2 to 32 points on `S^n` with diameter below `t_n`.
///
/// Kind `index % 3`: uniform in a random cap; a regular simplex face pulled
/// slightly toward its cap center (near the extremal case); a subset of
/// such a face padded with random interior points.
pub fn small_diameter_set(n: usize, index: usize, seed: u64) -> Result<Vec<SpherePoint>> {
    let d = n + 1;
    let t = simplex_edge(n);
    let mut rng = child_rng(seed, seed::TAG_SAMPLE, 3);
    let size = rng.random_range(2..=32usize);
    let points = match index % 3 {
        0 => {
            let center = SpherePoint::new(random_unit(d, &mut rng))?;
            let mut radius = rng.random_range(0.05..1.05) * jung_radius(n);
            loop {
                let pts: Vec<SpherePoint> = (0..size)
                    .map(|_| {
                        let dir = random_unit(d, &mut rng);
                        let r = radius * rng.random::<f64>().powf(1.0 / n as f64);
                        offset(&center, &dir, r)
                    })
                    .collect();
                if set_diameter(&pts) < t {
                    break pts;
                }
                radius *= 0.9;
            }
        }
        _ => {
            let simplex = regular_configuration(ConfigurationKind::Simplex, n, d, rng.random())?;
            let center = simplex[0].antipode();
            let pull = 10f64.powf(rng.random_range(-7.0..-2.0));
            let face: Vec<SpherePoint> = simplex[1..]
                .iter()
                .map(|v| {
                    let y = v.coords() + (center.coords() - v.coords()) * pull;
                    SpherePoint::new(y).expect("nonzero")
                })
                .collect();
            let r = face[0].chord(&center);
            let mut pts = if index % 3 == 1 {
                face
            } else {
                let keep = rng.random_range(1..=face.len());
                let mut idx: Vec<usize> = (0..face.len()).collect();
                for i in 0..keep {
                    let j = rng.random_range(i..idx.len());
                    idx.swap(i, j);
                }
                idx[..keep].iter().map(|&i| face[i].clone()).collect()
            };
            let mut attempts = 0;
            while pts.len() < size && attempts < 64 * size {
                attempts += 1;
                let dir = random_unit(d, &mut rng);
                let cand = offset(&center, &dir, r * rng.random::<f64>());
                if pts.iter().all(|q| q.chord(&cand) < t) {
                    pts.push(cand);
                }
            }
            pts
        }
    };
    Ok(points)
}
