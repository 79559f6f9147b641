//! Derivative-free projected gradient ascent on the unit sphere.
//!
//! Objectives are black boxes (map evaluators are arbitrary homeomorphisms),
//! so gradients are central differences along an orthonormal tangent basis.

use nalgebra::{DMatrix, DVector};

use crate::linalg::tangent_basis;

#[derive(Debug, Clone, Copy)]
pub struct AscentOptions {
    pub max_iterations: usize,
    /// Stop when the tangent gradient norm falls below this.
    pub gradient_tolerance: f64,
    pub fd_step: f64,
    pub initial_step: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions {
            max_iterations: 200,
            gradient_tolerance: 1e-9,
            fd_step: 1e-6,
            initial_step: 0.1,
        }
    }
}

fn retract(x: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    let y = x + v;
    let n = y.norm();
    y / n
}

/// Tangent gradient of `f` at unit `x`, as an ambient vector.
pub fn sphere_gradient<F>(f: &F, x: &DVector<f64>, h: f64) -> DVector<f64>
where
    F: Fn(&DVector<f64>) -> f64,
{
    let basis = tangent_basis(x);
    let mut g = DVector::zeros(x.len());
    for j in 0..basis.ncols() {
        let b = basis.column(j).into_owned();
        let fp = f(&retract(x, &(&b * h)));
        let fm = f(&retract(x, &(&b * -h)));
        g += b * ((fp - fm) / (2.0 * h));
    }
    g
}

/// Maximizes `f` from `x0` with Armijo backtracking; returns the best point
/// and value seen. Never returns a value below `f(x0)`.
pub fn ascend<F>(f: &F, x0: DVector<f64>, opts: &AscentOptions) -> (DVector<f64>, f64)
where
    F: Fn(&DVector<f64>) -> f64,
{
    let mut x = x0;
    let mut fx = f(&x);
    let mut step = opts.initial_step;
    for _ in 0..opts.max_iterations {
        let g = sphere_gradient(f, &x, opts.fd_step);
        let gn = g.norm();
        if gn.is_nan() || gn <= opts.gradient_tolerance {
            break;
        }
        let dir = &g / gn;
        let mut accepted = false;
        let mut t = step;
        while t > 1e-14 {
            let y = retract(&x, &(&dir * t));
            let fy = f(&y);
            if fy >= fx + 1e-4 * t * gn {
                x = y;
                fx = fy;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (2.0 * t).min(1.0);
    }
    (x, fx)
}

/// Levenberg-Marquardt on `|r(x)|^2` over unconstrained `x`, with a
/// forward-difference Jacobian. `normalize` is applied after each accepted
/// step (for parametrizations with a gauge freedom). Returns the final point
/// and `|r|`.
pub fn least_squares<R, N>(r: &R, normalize: &N, x0: DVector<f64>, max_iterations: usize) -> (DVector<f64>, f64)
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    N: Fn(DVector<f64>) -> DVector<f64>,
{
    let m = x0.len();
    let mut x = x0;
    let mut res = r(&x);
    let mut cost = res.norm_squared();
    let mut mu = 1e-3;
    for _ in 0..max_iterations {
        if cost == 0.0 {
            break;
        }
        let mut jac = DMatrix::zeros(res.len(), m);
        for j in 0..m {
            let h = 1e-8 * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            jac.set_column(j, &((r(&xp) - &res) / h));
        }
        let jt = jac.transpose();
        let jtj = &jt * &jac;
        let g = &jt * &res;
        let mut improved = false;
        for _ in 0..40 {
            let mut a = jtj.clone();
            for i in 0..m {
                a[(i, i)] += mu * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.cholesky().map(|c| c.solve(&(-&g))) else {
                mu *= 10.0;
                continue;
            };
            let xn = normalize(&x + step);
            let rn = r(&xn);
            let cn = rn.norm_squared();
            if cn < cost {
                x = xn;
                res = rn;
                cost = cn;
                mu = (mu / 3.0).max(1e-15);
                improved = true;
                break;
            }
            mu *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (x, cost.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_the_top_eigenvector() {
        let diag = DVector::from_vec(vec![1.0, 3.0, 2.0]);
        let f = |x: &DVector<f64>| x.component_mul(x).dot(&diag);
        let x0 = DVector::from_vec(vec![1.0, 0.2, 0.3]).normalize();
        let (x, v) = ascend(&f, x0, &AscentOptions::default());
        assert!((v - 3.0).abs() < 1e-10);
        assert!((x[1].abs() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn least_squares_solves_a_small_system() {
        let r = |x: &DVector<f64>| DVector::from_vec(vec![x[0] * x[0] - 2.0, x[0] * x[1] - 1.0]);
        let (x, n) = least_squares(&r, &|x| x, DVector::from_vec(vec![1.0, 1.0]), 100);
        assert!(n < 1e-12);
        assert!((x[0] - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn gradient_is_tangent() {
        let f = |x: &DVector<f64>| x[0] + 2.0 * x[1];
        let x = DVector::from_vec(vec![0.6, 0.8, 0.0]);
        let g = sphere_gradient(&f, &x, 1e-6);
        assert!(g.dot(&x).abs() < 1e-9);
    }
}
