//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// Haar-distributed orthogonal matrix: QR of a Gaussian matrix with the signs
/// of `R`'s diagonal folded into `Q`.
pub fn haar_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<f64> {
    let g = gaussian_matrix(dim, dim, rng);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Uniform point on the unit sphere of `R^dim`.
pub fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<f64> {
    loop {
        let v = gaussian_vector(dim, rng);
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Nearest orthogonal matrix (polar factor).
pub fn reorthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = m.clone().svd(true, true);
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v_t requested");
    u * v_t
}

/// Frobenius norm of `M^T M - I`.
pub fn orthogonality_residual(m: &DMatrix<f64>) -> f64 {
    let n = m.ncols();
    (m.transpose() * m - DMatrix::<f64>::identity(n, n)).norm()
}

/// Frobenius distance to the identity.
pub fn distance_to_identity(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    (m - DMatrix::<f64>::identity(n, n)).norm()
}

pub fn matrix_power(m: &DMatrix<f64>, exp: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut result = DMatrix::<f64>::identity(n, n);
    let mut base = m.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            result = &result * &base;
        }
        base = &base * &base;
        e >>= 1;
    }
    result
}

pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Project `v` onto the tangent space of the unit sphere at unit `x`.
pub fn tangent(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    v - x * x.dot(v)
}

/// Orthonormal basis (columns) of the tangent space at unit `x`.
pub fn tangent_basis(x: &DVector<f64>) -> DMatrix<f64> {
    let d = x.len();
    // Householder reflection sending x to e_0; its remaining columns span x^perp.
    let mut u = x.clone();
    let s = if x[0] >= 0.0 { 1.0 } else { -1.0 };
    u[0] += s;
    let un = u.norm_squared();
    let h = DMatrix::<f64>::identity(d, d) - (&u * u.transpose()) * (2.0 / un);
    h.columns(1, d - 1).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed;

    #[test]
    fn haar_is_orthogonal_and_deterministic() {
        let a = haar_orthogonal(6, &mut seed::rng(4));
        let b = haar_orthogonal(6, &mut seed::rng(4));
        assert_eq!(a, b);
        assert!(orthogonality_residual(&a) < 1e-13);
    }

    #[test]
    fn tangent_basis_is_orthonormal_and_orthogonal_to_x() {
        let mut rng = seed::rng(1);
        for d in 2..7 {
            let x = random_unit(d, &mut rng);
            let b = tangent_basis(&x);
            assert!((b.transpose() * &b - DMatrix::<f64>::identity(d - 1, d - 1)).norm() < 1e-13);
            assert!((b.transpose() * &x).norm() < 1e-13);
        }
    }

    #[test]
    fn power_by_squaring_matches_iteration() {
        let m = haar_orthogonal(4, &mut seed::rng(2));
        let mut it = DMatrix::<f64>::identity(4, 4);
        for _ in 0..13 {
            it = &it * &m;
        }
        assert!((matrix_power(&m, 13) - it).norm() < 1e-12);
    }
}
