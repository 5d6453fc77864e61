//! Central-difference Hessians and the covariance they imply.

use nalgebra::DMatrix;

/// Relative step: h_i = STEP · max(1, |x_i|).
pub(crate) const STEP: f64 = 1e-4;

pub(crate) fn steps(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| STEP * v.abs().max(1.0)).collect()
}

/// Hessian of `f` at `x` by central differences with per-coordinate steps `h`.
pub(crate) fn central_hessian<F>(mut f: F, x: &[f64], h: &[f64]) -> DMatrix<f64>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x.len();
    let mut at = |shifts: &[(usize, f64)]| {
        let mut p = x.to_vec();
        for &(i, d) in shifts {
            p[i] += d;
        }
        f(&p)
    };
    let f0 = at(&[]);
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let fp = at(&[(i, h[i])]);
        let fm = at(&[(i, -h[i])]);
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let fpp = at(&[(i, h[i]), (j, h[j])]);
            let fpm = at(&[(i, h[i]), (j, -h[j])]);
            let fmp = at(&[(i, -h[i]), (j, h[j])]);
            let fmm = at(&[(i, -h[i]), (j, -h[j])]);
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess
}
