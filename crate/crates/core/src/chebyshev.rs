//! Chebyshev-Gauss-Lobatto machinery: node sets, fast transforms between
//! nodal values and Chebyshev coefficients, spectral differentiation,
//! barycentric interpolation and Clenshaw-Curtis quadrature.
//!
//! Nodes are ordered as `cos(k*pi/(m-1))`, `k = 0..m`, i.e. from the upper
//! end of the interval down to the lower end.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Chebyshev-Gauss-Lobatto points on `[-1, 1]`, descending.
pub fn cgl_points(m: usize) -> Vec<f64> {
    assert!(m >= 2, "need at least two Lobatto points");
    let n = (m - 1) as f64;
    (0..m).map(|k| (k as f64 * PI / n).cos()).collect()
}

/// Lobatto points affinely mapped onto `[lo, hi]`. The end points are
/// reproduced exactly.
pub fn cgl_nodes(m: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mid = 0.5 * (hi + lo);
    let half = 0.5 * (hi - lo);
    let mut y: Vec<f64> = cgl_points(m).into_iter().map(|t| mid + half * t).collect();
    y[0] = hi;
    y[m - 1] = lo;
    y
}

/// Even extension of length `2(m-1)` followed by a complex FFT; returns the
/// real part, i.e. the DCT-I of `v` in the convention
/// `y_j = v_0 + (-1)^j v_N + 2 sum_{k=1}^{N-1} v_k cos(pi j k / N)`.
fn dct1(v: &[f64]) -> Vec<f64> {
    let m = v.len();
    let n = m - 1;
    let mut buf: Vec<Complex<f64>> = Vec::with_capacity(2 * n);
    buf.extend(v.iter().map(|&x| Complex::new(x, 0.0)));
    buf.extend(v[1..n].iter().rev().map(|&x| Complex::new(x, 0.0)));
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(2 * n);
    fft.process(&mut buf);
    buf.truncate(m);
    buf.into_iter().map(|z| z.re).collect()
}

/// Chebyshev coefficients `c_k` of the interpolant through nodal values
/// given on the (descending) Lobatto grid.
pub fn values_to_coeffs(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let n = (m - 1) as f64;
    let mut c = dct1(values);
    for ck in c.iter_mut() {
        *ck /= n;
    }
    c[0] *= 0.5;
    c[m - 1] *= 0.5;
    c
}

/// Inverse of [`values_to_coeffs`].
pub fn coeffs_to_values(coeffs: &[f64]) -> Vec<f64> {
    let m = coeffs.len();
    let mut x = coeffs.to_vec();
    for xk in x[1..m - 1].iter_mut() {
        *xk *= 0.5;
    }
    dct1(&x)
}

/// Coefficients of the derivative (on `[-1, 1]`) of a Chebyshev series.
pub fn differentiate_coeffs(c: &[f64]) -> Vec<f64> {
    let m = c.len();
    let mut d = vec![0.0; m];
    if m < 2 {
        return d;
    }
    d[m - 2] = 2.0 * (m - 1) as f64 * c[m - 1];
    for k in (1..m - 1).rev() {
        let above = if k + 1 < m { d[k + 1] } else { 0.0 };
        d[k - 1] = above + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d
}

/// Evaluates a Chebyshev series at `t` in `[-1, 1]` (Clenshaw).
pub fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c.first().copied().unwrap_or(0.0)
}

/// Barycentric weights for the Lobatto grid.
pub fn barycentric_weights(m: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..m).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
    w[0] *= 0.5;
    w[m - 1] *= 0.5;
    w
}

/// Weights `l_k(y)` such that `f(y) = sum_k l_k(y) f_k` for the polynomial
/// interpolant through `(nodes[k], f_k)`.
pub fn interpolation_weights(nodes: &[f64], bary: &[f64], y: f64) -> Vec<f64> {
    let mut out = vec![0.0; nodes.len()];
    if let Some(k) = nodes.iter().position(|&yk| yk == y) {
        out[k] = 1.0;
        return out;
    }
    let mut denom = 0.0;
    for (k, (&yk, &wk)) in nodes.iter().zip(bary).enumerate() {
        let t = wk / (y - yk);
        out[k] = t;
        denom += t;
    }
    for o in out.iter_mut() {
        *o /= denom;
    }
    out
}

/// First-derivative collocation matrix on the Lobatto grid mapped to
/// `[lo, hi]`, row-major `m x m`. Off-diagonal entries use the classical
/// closed form; diagonal entries use the negative-sum trick.
pub fn diff_matrix(m: usize, lo: f64, hi: f64) -> Vec<f64> {
    let t = cgl_points(m);
    let c: Vec<f64> = (0..m)
        .map(|k| {
            let edge = if k == 0 || k == m - 1 { 2.0 } else { 1.0 };
            if k % 2 == 0 {
                edge
            } else {
                -edge
            }
        })
        .collect();
    let mut d = vec![0.0; m * m];
    for i in 0..m {
        let mut row_sum = 0.0;
        for j in 0..m {
            if i != j {
                let v = (c[i] / c[j]) / (t[i] - t[j]);
                d[i * m + j] = v;
                row_sum += v;
            }
        }
        d[i * m + i] = -row_sum;
    }
    let scale = 2.0 / (hi - lo);
    for v in d.iter_mut() {
        *v *= scale;
    }
    d
}

/// Clenshaw-Curtis weights for the Lobatto grid on `[lo, hi]`.
pub fn clenshaw_curtis_weights(m: usize, lo: f64, hi: f64) -> Vec<f64> {
    let n = m - 1;
    let nf = n as f64;
    let mut w = vec![0.0; m];
    let theta: Vec<f64> = (0..m).map(|k| k as f64 * PI / nf).collect();
    let mut v = vec![1.0; m];
    if n % 2 == 0 {
        w[0] = 1.0 / (nf * nf - 1.0);
        w[n] = w[0];
        for k in 1..n / 2 {
            let kf = k as f64;
            for i in 1..n {
                v[i] -= 2.0 * (2.0 * kf * theta[i]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
        for i in 1..n {
            v[i] -= (nf * theta[i]).cos() / (nf * nf - 1.0);
        }
    } else {
        w[0] = 1.0 / (nf * nf);
        w[n] = w[0];
        for k in 1..=(n - 1) / 2 {
            let kf = k as f64;
            for i in 1..n {
                v[i] -= 2.0 * (2.0 * kf * theta[i]).cos() / (4.0 * kf * kf - 1.0);
            }
        }
    }
    for i in 1..n {
        w[i] = 2.0 * v[i] / nf;
    }
    let half = 0.5 * (hi - lo);
    w.iter().map(|x| x * half).collect()
}

/// Index of the last coefficient whose magnitude exceeds `tol * max|c|`.
pub fn resolved_degree(c: &[f64], tol: f64) -> usize {
    let scale = c.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return 0;
    }
    c.iter().rposition(|x| x.abs() > tol * scale).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn transform_round_trip() {
        let v: Vec<f64> = cgl_points(17).iter().map(|t| (3.0 * t).sin() + t * t).collect();
        let back = coeffs_to_values(&values_to_coeffs(&v));
        for (a, b) in v.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn coefficients_of_t3() {
        let v: Vec<f64> = cgl_points(9).iter().map(|t| 4.0 * t * t * t - 3.0 * t).collect();
        let c = values_to_coeffs(&v);
        for (k, ck) in c.iter().enumerate() {
            let expect = if k == 3 { 1.0 } else { 0.0 };
            assert_abs_diff_eq!(*ck, expect, epsilon = 1e-14);
        }
    }

    #[test]
    fn coefficient_derivative_matches_matrix() {
        let m = 20;
        let (lo, hi) = (-1.0, 0.3);
        let y = cgl_nodes(m, lo, hi);
        let f: Vec<f64> = y.iter().map(|y| (1.3 * y).exp()).collect();
        let d = diff_matrix(m, lo, hi);
        let scale = 2.0 / (hi - lo);
        let via_coeffs = coeffs_to_values(&differentiate_coeffs(&values_to_coeffs(&f)));
        for i in 0..m {
            let row: f64 = (0..m).map(|j| d[i * m + j] * f[j]).sum();
            assert_abs_diff_eq!(row, via_coeffs[i] * scale, epsilon = 1e-10);
            assert_abs_diff_eq!(row, 1.3 * (1.3 * y[i]).exp(), epsilon = 1e-9);
        }
    }

    #[test]
    fn clenshaw_curtis_integrates_exponential() {
        for m in [8, 9, 24, 33] {
            let (lo, hi) = (-2.0, 0.5);
            let y = cgl_nodes(m, lo, hi);
            let w = clenshaw_curtis_weights(m, lo, hi);
            let q: f64 = y.iter().zip(&w).map(|(y, w)| w * y.exp()).sum();
            let tol = if m < 10 { 1e-6 } else { 1e-13 };
            assert_abs_diff_eq!(q, hi.exp() - lo.exp(), epsilon = tol);
        }
    }

    #[test]
    fn barycentric_reproduces_polynomials() {
        let m = 12;
        let y = cgl_nodes(m, 0.0, 2.0);
        let w = barycentric_weights(m);
        let f: Vec<f64> = y.iter().map(|y| y.powi(5) - y).collect();
        for &x in &[0.1, 0.77, 1.5, 1.999] {
            let l = interpolation_weights(&y, &w, x);
            let v: f64 = l.iter().zip(&f).map(|(l, f)| l * f).sum();
            assert_abs_diff_eq!(v, x.powi(5) - x, epsilon = 1e-12);
        }
        assert_eq!(y[0], 2.0);
        assert_eq!(y[m - 1], 0.0);
    }

    #[test]
    fn clenshaw_matches_nodal_values() {
        let c = [0.5, -1.0, 0.25, 0.125];
        let v = coeffs_to_values(&c);
        for (t, vk) in cgl_points(4).iter().zip(&v) {
            assert_abs_diff_eq!(clenshaw(&c, *t), *vk, epsilon = 1e-14);
        }
    }
}
