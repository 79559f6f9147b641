#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use sphere_periods::linalg::random_unit;
use sphere_periods::SpherePoint;

/// Distance from the origin to `conv(points)` by enumerating every subset of
/// at most `dim + 1` points and keeping the affine minimum-norm points whose
/// barycentric weights are nonnegative.
pub fn brute_hull_distance(points: &[SpherePoint]) -> f64 {
    let m = points.len();
    let d = points[0].ambient_dim();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << m) {
        let idx: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).collect();
        if idx.len() > d + 1 {
            continue;
        }
        let k = idx.len();
        // KKT system of min |X w|^2 subject to sum w = 1.
        let mut a = DMatrix::zeros(k + 1, k + 1);
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[(r, c)] = points[i].coords().dot(points[j].coords());
            }
            a[(r, k)] = 1.0;
            a[(k, r)] = 1.0;
        }
        let mut rhs = DVector::zeros(k + 1);
        rhs[k] = 1.0;
        let Some(sol) = a.lu().solve(&rhs) else { continue };
        if (0..k).any(|r| sol[r].is_nan() || sol[r] < -1e-12) {
            continue;
        }
        let y = idx
            .iter()
            .enumerate()
            .fold(DVector::zeros(d), |acc, (r, &i)| acc + points[i].coords() * sol[r]);
        best = best.min(y.norm());
    }
    best
}

/// `size` random points in a cap of angular radius `radius` around a random
/// center of `S^n`; uniform on the whole sphere once `radius >= pi`.
pub fn cap_points<R: Rng>(rng: &mut R, n: usize, size: usize, radius: f64) -> Vec<SpherePoint> {
    if radius >= std::f64::consts::PI {
        return (0..size)
            .map(|_| SpherePoint::new(random_unit(n + 1, rng)).unwrap())
            .collect();
    }
    let center = random_unit(n + 1, rng);
    (0..size)
        .map(|_| {
            let v = random_unit(n + 1, rng);
            let t = (&v - &center * v.dot(&center)).normalize();
            let a = radius * rng.random::<f64>();
            SpherePoint::new(&center * a.cos() + t * a.sin()).unwrap()
        })
        .collect()
}

pub fn max_pairwise_chord(points: &[SpherePoint]) -> f64 {
    let mut best: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.max(a.chord(b));
        }
    }
    best
}

pub fn min_pairwise_chord(points: &[SpherePoint]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            best = best.min(a.chord(b));
        }
    }
    best
}
