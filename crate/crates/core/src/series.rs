//! Even truncated power series in `x` whose coefficients are functions of
//! `y` sampled on a Chebyshev-Gauss-Lobatto grid.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chebyshev;
use crate::error::{Error, Result};
use crate::profiles::Polynomial;

/// Norm below which a series coefficient counts as zero.
pub const COEFF_FLOOR: f64 = 1e-14;

/// Chebyshev modes below this fraction of the largest mode are treated as
/// transform roundoff before differentiation.
const ROUNDOFF_MODES: f64 = 8.0 * f64::EPSILON;

/// Lobatto grid on `[lo, hi]`, shared between all functions built on it.
#[derive(Debug, Clone)]
pub struct Grid {
    lo: f64,
    hi: f64,
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl Grid {
    pub fn new(m: usize, lo: f64, hi: f64) -> Result<Arc<Self>> {
        if m < 4 {
            return Err(Error::InvalidParameter(format!("need at least 4 nodes, got {m}")));
        }
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!("bad interval [{lo}, {hi}]")));
        }
        Ok(Arc::new(Self {
            lo,
            hi,
            nodes: chebyshev::cgl_nodes(m, lo, hi),
            bary: chebyshev::barycentric_weights(m),
        }))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    fn same_as(&self, other: &Grid) -> bool {
        self.lo == other.lo && self.hi == other.hi && self.nodes.len() == other.nodes.len()
    }

    /// Accepts `y` up to a relative roundoff margin outside the interval.
    pub fn check(&self, y: f64) -> Result<f64> {
        let slack = 1e-12 * (self.hi - self.lo);
        if y.is_nan() || y < self.lo - slack || y > self.hi + slack {
            return Err(Error::Domain { y, lo: self.lo, hi: self.hi });
        }
        Ok(y.clamp(self.lo, self.hi))
    }

    /// Barycentric interpolation weights at `y` (no domain check).
    pub fn weights(&self, y: f64) -> Vec<f64> {
        chebyshev::interpolation_weights(&self.nodes, &self.bary, y)
    }

    /// Clenshaw-Curtis quadrature weights on this grid.
    pub fn quadrature_weights(&self) -> Vec<f64> {
        chebyshev::clenshaw_curtis_weights(self.len(), self.lo, self.hi)
    }
}

/// A function of `y` held by its values at the Lobatto nodes.
#[derive(Debug, Clone)]
pub struct NodalFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl NodalFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Structure(format!(
                "{} values for a {}-node grid",
                values.len(),
                grid.len()
            )));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("nodal value {k}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&y| f(y)).collect();
        Self::new(grid, values)
    }

    pub fn constant(grid: Arc<Grid>, c: f64) -> Self {
        let values = vec![c; grid.len()];
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    fn compatible(&self, other: &NodalFunction) -> Result<()> {
        if Arc::ptr_eq(&self.grid, &other.grid) || self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::Structure(format!(
                "grids differ: {} nodes on [{}, {}] vs {} nodes on [{}, {}]",
                self.grid.len(),
                self.grid.lo,
                self.grid.hi,
                other.grid.len(),
                other.grid.lo,
                other.grid.hi
            )))
        }
    }

    fn zip_with(&self, other: &NodalFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.compatible(other)?;
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.grid.nodes().iter().zip(&self.values).map(|(&y, &v)| f(y, v)).collect();
        Self { grid: self.grid.clone(), values }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|_, v| s * v)
    }

    pub fn add_scaled(&self, alpha: f64, other: &NodalFunction, beta: f64) -> Result<Self> {
        self.zip_with(other, |a, b| alpha * a + beta * b)
    }

    pub fn mul(&self, other: &NodalFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    /// Interpolated value at `y`.
    pub fn eval(&self, y: f64) -> Result<f64> {
        let y = self.grid.check(y)?;
        Ok(dot(&self.grid.weights(y), &self.values))
    }

    pub fn chebyshev_coeffs(&self) -> Vec<f64> {
        chebyshev::values_to_coeffs(&self.values)
    }

    fn from_coeffs(grid: Arc<Grid>, c: &[f64]) -> Self {
        Self { values: chebyshev::coeffs_to_values(c), grid }
    }

    /// Derivative of order `k` of the interpolant, taken in Chebyshev
    /// coefficient space.
    pub fn derivative(&self, k: usize) -> Self {
        let scale = 2.0 / (self.grid.hi - self.grid.lo);
        let mut c = self.chebyshev_coeffs();
        // transform roundoff would otherwise be amplified by k^2 per derivative
        let floor = ROUNDOFF_MODES * c.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        for ck in c.iter_mut() {
            if ck.abs() <= floor {
                *ck = 0.0;
            }
        }
        for _ in 0..k {
            c = chebyshev::differentiate_coeffs(&c);
            for ck in c.iter_mut() {
                *ck *= scale;
            }
        }
        Self::from_coeffs(self.grid.clone(), &c)
    }

    /// Projection onto Chebyshev polynomials of degree at most `degree`.
    pub fn truncate_modes(&self, degree: usize) -> Self {
        let mut c = self.chebyshev_coeffs();
        for ck in c.iter_mut().skip(degree + 1) {
            *ck = 0.0;
        }
        Self::from_coeffs(self.grid.clone(), &c)
    }

    /// Integral over the whole interval (Clenshaw-Curtis).
    pub fn integral(&self) -> f64 {
        dot(&self.grid.quadrature_weights(), &self.values)
    }
}

/// Second derivative in `y`.
pub fn nodal_diff2(f: &NodalFunction) -> NodalFunction {
    f.derivative(2)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `psi(x, y) = sum_n a_{2n}(y) x^{2n}`, `n = 0..=N`.
#[derive(Debug, Clone)]
pub struct EvenSeries {
    coeffs: Vec<NodalFunction>,
}

impl EvenSeries {
    pub fn new(coeffs: Vec<NodalFunction>) -> Result<Self> {
        let first = coeffs
            .first()
            .ok_or_else(|| Error::Structure("series needs at least one coefficient".into()))?;
        for c in &coeffs[1..] {
            first.compatible(c)?;
        }
        Ok(Self { coeffs })
    }

    pub fn zeros(grid: Arc<Grid>, order: usize) -> Self {
        Self { coeffs: vec![NodalFunction::zeros(grid); order + 1] }
    }

    /// Series equal to the constant `c` (stored at every order up to `order`).
    pub fn constant(grid: Arc<Grid>, order: usize, c: f64) -> Self {
        let mut s = Self::zeros(grid.clone(), order);
        s.coeffs[0] = NodalFunction::constant(grid, c);
        s
    }

    /// Highest stored power is `x^(2N)`.
    pub fn truncation_order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.coeffs[0].grid()
    }

    pub fn coeffs(&self) -> &[NodalFunction] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> &NodalFunction {
        &self.coeffs[n]
    }

    pub fn set_coeff(&mut self, n: usize, f: NodalFunction) -> Result<()> {
        self.coeffs[0].compatible(&f)?;
        self.coeffs[n] = f;
        Ok(())
    }

    fn compatible(&self, other: &EvenSeries) -> Result<()> {
        if self.coeffs.len() != other.coeffs.len() {
            return Err(Error::Structure(format!(
                "truncation orders differ: {} vs {}",
                self.truncation_order(),
                other.truncation_order()
            )));
        }
        self.coeffs[0].compatible(&other.coeffs[0])
    }

    /// Coefficientwise `alpha * a + beta * b`.
    pub fn add(a: &EvenSeries, b: &EvenSeries, alpha: f64, beta: f64) -> Result<EvenSeries> {
        a.compatible(b)?;
        let coeffs = a
            .coeffs
            .iter()
            .zip(&b.coeffs)
            .map(|(x, y)| x.add_scaled(alpha, y, beta))
            .collect::<Result<Vec<_>>>()?;
        Ok(EvenSeries { coeffs })
    }

    /// Truncated Cauchy product on even powers.
    pub fn mul(a: &EvenSeries, b: &EvenSeries) -> Result<EvenSeries> {
        a.compatible(b)?;
        let m = a.grid().len();
        let order = a.truncation_order();
        let mut coeffs = Vec::with_capacity(order + 1);
        for n in 0..=order {
            let mut acc = vec![0.0; m];
            for k in 0..=n {
                let (ak, bk) = (a.coeffs[k].values(), b.coeffs[n - k].values());
                for i in 0..m {
                    acc[i] += ak[i] * bk[i];
                }
            }
            coeffs.push(NodalFunction::new(a.grid().clone(), acc)?);
        }
        Ok(EvenSeries { coeffs })
    }

    /// The series of `F(sign * psi)` by Horner's rule.
    pub fn compose_poly(f: &Polynomial, sign: f64, psi: &EvenSeries) -> Result<EvenSeries> {
        let grid = psi.grid().clone();
        let order = psi.truncation_order();
        let c = f.coeffs();
        let Some((&lead, rest)) = c.split_last() else {
            return Ok(EvenSeries::zeros(grid, order));
        };
        let arg = psi.scale(sign);
        let mut acc = EvenSeries::constant(grid, order, lead);
        for &ck in rest.iter().rev() {
            acc = EvenSeries::mul(&acc, &arg)?;
            acc.coeffs[0] = acc.coeffs[0].map(|_, v| v + ck);
        }
        if let Some(n) = acc.coeffs.iter().position(|a| a.values().iter().any(|v| !v.is_finite())) {
            return Err(Error::NonFinite(format!("composition coefficient of order {}", 2 * n)));
        }
        Ok(acc)
    }

    pub fn scale(&self, s: f64) -> EvenSeries {
        EvenSeries { coeffs: self.coeffs.iter().map(|c| c.scale(s)).collect() }
    }

    /// Coefficients `a_{2n}(y)` interpolated at `y`.
    pub fn coeffs_at(&self, y: f64) -> Result<Vec<f64>> {
        let y = self.grid().check(y)?;
        let w = self.grid().weights(y);
        Ok(self.coeffs.iter().map(|c| dot(&w, c.values())).collect())
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        Ok(horner_even(&self.coeffs_at(y)?, x))
    }

    /// `d psi / dx`, term by term.
    pub fn eval_dx(&self, x: f64, y: f64) -> Result<f64> {
        let a = self.coeffs_at(y)?;
        Ok(x * horner_even_derivative(&a, x))
    }

    /// The series of `d psi / dy`.
    pub fn dy(&self) -> EvenSeries {
        EvenSeries { coeffs: self.coeffs.iter().map(|c| c.derivative(1)).collect() }
    }

    /// The series of `d^2 psi / dy^2`.
    pub fn dyy(&self) -> EvenSeries {
        EvenSeries { coeffs: self.coeffs.iter().map(nodal_diff2).collect() }
    }

    /// `d^2 psi / dx^2` from the coefficients.
    pub fn eval_dxx(&self, x: f64, y: f64) -> Result<f64> {
        let a = self.coeffs_at(y)?;
        Ok(dxx_from_coeffs(&a, x))
    }

    /// Sup norms `||a_{2n}||` for every stored order.
    pub fn coeff_norms(&self) -> Vec<f64> {
        self.coeffs.iter().map(NodalFunction::sup_norm).collect()
    }

    /// Copy containing only orders `0..=upto`; higher orders are zeroed.
    pub fn partial(&self, upto: usize) -> EvenSeries {
        let mut s = self.clone();
        for c in s.coeffs.iter_mut().skip(upto + 1) {
            *c = NodalFunction::zeros(c.grid().clone());
        }
        s
    }

    pub fn to_record(&self) -> SeriesRecord {
        SeriesRecord {
            truncation_order: self.truncation_order(),
            nodes: self.grid().len(),
            y_lo: self.grid().lo(),
            y_hi: self.grid().hi(),
            y: self.grid().nodes().to_vec(),
            coeffs: self.coeffs.iter().map(|c| c.values().to_vec()).collect(),
        }
    }

    pub fn from_record(r: &SeriesRecord) -> Result<Self> {
        let grid = Grid::new(r.nodes, r.y_lo, r.y_hi)?;
        if r.coeffs.len() != r.truncation_order + 1 {
            return Err(Error::Parse("coefficient count does not match truncation order".into()));
        }
        let coeffs = r
            .coeffs
            .iter()
            .map(|v| NodalFunction::new(grid.clone(), v.clone()))
            .collect::<Result<Vec<_>>>()?;
        EvenSeries::new(coeffs)
    }
}

/// Serialized form of a series: nodal values of each coefficient.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeriesRecord {
    pub truncation_order: usize,
    pub nodes: usize,
    pub y_lo: f64,
    pub y_hi: f64,
    pub y: Vec<f64>,
    pub coeffs: Vec<Vec<f64>>,
}

/// `sum_n a[n] x^{2n}`; depends on `x` only through `x * x`.
pub fn horner_even(a: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    a.iter().rev().fold(0.0, |acc, &c| acc * x2 + c)
}

/// `sum_{n>=1} 2n a[n] x^{2n-2}`, so that `psi_x = x * (this)`.
fn horner_even_derivative(a: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    a.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (n, &c)| acc * x2 + 2.0 * n as f64 * c)
}

pub(crate) fn dxx_from_coeffs(a: &[f64], x: f64) -> f64 {
    let x2 = x * x;
    a.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (n, &c)| acc * x2 + (2 * n * (2 * n - 1)) as f64 * c)
}

/// Radius of convergence in `x`, or `None` when every coefficient beyond
/// the first is below [`COEFF_FLOOR`].
///
/// Fits `log ||a_{2n}||` against `2n` by least squares over the last
/// `ceil(N/2)` nonzero coefficients; the radius is `exp(-slope)`.
pub fn radius_estimate(psi: &EvenSeries) -> Result<Option<f64>> {
    radius_from_norms(&psi.coeff_norms())
}

pub fn radius_from_norms(norms: &[f64]) -> Result<Option<f64>> {
    let order = norms.len().saturating_sub(1);
    if order < 3 {
        return Err(Error::InsufficientData(format!("truncation order {order} < 3")));
    }
    let nonzero: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .skip(1)
        .filter(|(_, &s)| s >= COEFF_FLOOR)
        .map(|(n, &s)| ((2 * n) as f64, s.ln()))
        .collect();
    if nonzero.is_empty() {
        return Ok(None);
    }
    let take = order.div_ceil(2);
    let tail = &nonzero[nonzero.len().saturating_sub(take)..];
    if tail.len() < 2 {
        return Err(Error::InsufficientData("fewer than two nonzero coefficients".into()));
    }
    let slope = fit_slope(tail);
    Ok(Some((-slope).exp()))
}

/// Least-squares slope of `(t, v)` pairs.
pub(crate) fn fit_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let num: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mv)).sum();
    let den: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    num / den
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn grid(m: usize) -> Arc<Grid> {
        Grid::new(m, -1.0, 0.0).unwrap()
    }

    fn series(g: &Arc<Grid>, c: &[f64]) -> EvenSeries {
        EvenSeries::new(c.iter().map(|&v| NodalFunction::constant(g.clone(), v)).collect()).unwrap()
    }

    fn consts(s: &EvenSeries) -> Vec<f64> {
        s.coeffs().iter().map(|c| c.values()[3]).collect()
    }

    #[test]
    fn add_examples() {
        let g = grid(8);
        let a = series(&g, &[1.0, 2.0, 3.0]);
        let b = series(&g, &[5.0, -1.0, 0.5]);
        assert_eq!(consts(&EvenSeries::add(&a, &b, 1.0, 0.0).unwrap()), vec![1.0, 2.0, 3.0]);
        assert!(EvenSeries::add(&a, &a, 1.0, -1.0).unwrap().coeff_norms().iter().all(|&n| n == 0.0));
        let one = series(&g, &[1.0, 0.0]);
        let x2 = series(&g, &[0.0, 1.0]);
        assert_eq!(consts(&EvenSeries::add(&one, &x2, 1.0, 1.0).unwrap()), vec![1.0, 1.0]);
    }

    #[test]
    fn mismatches_are_structural_errors() {
        let a = series(&grid(8), &[1.0, 2.0]);
        let b = series(&grid(9), &[1.0, 2.0]);
        let c = series(&grid(8), &[1.0, 2.0, 3.0]);
        assert!(matches!(EvenSeries::add(&a, &b, 1.0, 1.0), Err(Error::Structure(_))));
        assert!(matches!(EvenSeries::mul(&a, &c), Err(Error::Structure(_))));
        let other_domain = series(&Grid::new(8, -2.0, 0.0).unwrap(), &[1.0, 2.0]);
        assert!(matches!(EvenSeries::mul(&a, &other_domain), Err(Error::Structure(_))));
    }

    #[test]
    fn mul_examples() {
        let g = grid(6);
        let p = series(&g, &[1.0, 1.0, 0.0]);
        let q = series(&g, &[1.0, -1.0, 0.0]);
        assert_eq!(consts(&EvenSeries::mul(&p, &q).unwrap()), vec![1.0, 0.0, -1.0]);
        let x2 = series(&g, &[0.0, 1.0]);
        assert_eq!(consts(&EvenSeries::mul(&x2, &x2).unwrap()), vec![0.0, 0.0]);
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).fold(1.0, |a, k| a * k as f64)
    }

    #[test]
    fn cos_squared_matches_half_angle() {
        // Even truncations of cos x and (1 + cos 2x)/2 with N = 4.
        let g = grid(6);
        let n = 4;
        let cos: Vec<f64> = (0..=n).map(|k| (-1f64).powi(k as i32) / factorial(2 * k)).collect();
        let half: Vec<f64> = (0..=n)
            .map(|k| {
                let c2 = (-1f64).powi(k as i32) * 2f64.powi(2 * k as i32) / factorial(2 * k);
                if k == 0 {
                    0.5 * (1.0 + c2)
                } else {
                    0.5 * c2
                }
            })
            .collect();
        let sq = EvenSeries::mul(&series(&g, &cos), &series(&g, &cos)).unwrap();
        for (a, b) in consts(&sq).iter().zip(&half) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn compose_examples() {
        let g = grid(6);
        let psi = series(&g, &[1.0, 1.0, 0.0]);
        let sq = Polynomial::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(consts(&EvenSeries::compose_poly(&sq, 1.0, &psi).unwrap()), vec![1.0, 2.0, 1.0]);

        let rho = Polynomial::new(vec![1.0, -0.1]).unwrap();
        let b = EvenSeries::compose_poly(&rho.derivative(), -1.0, &psi).unwrap();
        assert_eq!(consts(&b), vec![-0.1, 0.0, 0.0]);

        let y = NodalFunction::from_fn(g.clone(), |y| y.sin()).unwrap();
        let wavy = EvenSeries::new(vec![y.clone(), y.scale(0.3), y.scale(-2.0)]).unwrap();
        let beta = Polynomial::new(vec![0.0, -4.0]).unwrap();
        let c = EvenSeries::compose_poly(&beta, 1.0, &wavy).unwrap();
        for (cn, an) in c.coeffs().iter().zip(wavy.coeffs()) {
            for (u, v) in cn.values().iter().zip(an.values()) {
                assert_eq!(*u, -4.0 * v);
            }
        }
    }

    #[test]
    fn diff2_examples() {
        for m in [4, 7, 16] {
            let f = NodalFunction::from_fn(grid(m), |y| y * y).unwrap();
            for v in nodal_diff2(&f).values() {
                assert_abs_diff_eq!(*v, 2.0, epsilon = 1e-12);
            }
            let c = NodalFunction::constant(grid(m), 3.5);
            assert!(nodal_diff2(&c).sup_norm() < 1e-13);
        }
        let f = NodalFunction::from_fn(grid(32), |y| (2.0 * y).sinh()).unwrap();
        let d2 = nodal_diff2(&f);
        for (y, v) in f.grid().nodes().iter().zip(d2.values()) {
            assert!((v - 4.0 * (2.0 * y).sinh()).abs() < 1e-10);
        }
    }

    #[test]
    fn diff2_agrees_with_squared_collocation_matrix() {
        let m = 24;
        let (lo, hi) = (-1.0, 0.02);
        let g = Grid::new(m, lo, hi).unwrap();
        let f = NodalFunction::from_fn(g, |y| (1.7 * y).cosh() + y.powi(3)).unwrap();
        let d = chebyshev::diff_matrix(m, lo, hi);
        let mut d2 = vec![0.0; m * m];
        for i in 0..m {
            for k in 0..m {
                let dik = d[i * m + k];
                for j in 0..m {
                    d2[i * m + j] += dik * d[k * m + j];
                }
            }
        }
        let ours = nodal_diff2(&f);
        for i in 0..m {
            let row: f64 = (0..m).map(|j| d2[i * m + j] * f.values()[j]).sum();
            assert!((row - ours.values()[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn eval_examples() {
        let g = grid(10);
        let laminar = EvenSeries::new(vec![
            NodalFunction::from_fn(g.clone(), |y| -y).unwrap(),
            NodalFunction::zeros(g.clone()),
        ])
        .unwrap();
        assert_abs_diff_eq!(laminar.eval(0.3, -0.5).unwrap(), 0.5, epsilon = 1e-15);
        let a0 = NodalFunction::from_fn(g.clone(), |y| y.exp()).unwrap();
        let s = EvenSeries::new(vec![a0.clone(), a0.scale(7.0)]).unwrap();
        assert_eq!(s.eval(0.0, -0.25).unwrap(), a0.eval(-0.25).unwrap());
        assert!(matches!(s.eval(0.0, 0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn radius_examples() {
        let g = grid(6);
        let laminar = series(&g, &[1.0, 0.0, 0.0, 0.0, 0.0]);
        assert_eq!(radius_estimate(&laminar).unwrap(), None);
        let geo: Vec<f64> = (0..=10).map(|n| 2f64.powi(-2 * n)).collect();
        let r = radius_estimate(&series(&g, &geo)).unwrap().unwrap();
        assert!((1.9..=2.1).contains(&r), "r = {r}");
        assert!(matches!(radius_estimate(&series(&g, &[1.0, 1.0, 1.0])), Err(Error::InsufficientData(_))));
    }

    fn random_series(seed: &[f64], g: &Arc<Grid>) -> EvenSeries {
        let coeffs = seed
            .chunks(3)
            .map(|c| NodalFunction::from_fn(g.clone(), |y| c[0] + c[1] * y + c[2] * (3.0 * y).sin()).unwrap())
            .collect();
        EvenSeries::new(coeffs).unwrap()
    }

    fn max_rel_diff(a: &EvenSeries, b: &EvenSeries) -> f64 {
        let mut worst: f64 = 0.0;
        for (ca, cb) in a.coeffs().iter().zip(b.coeffs()) {
            let scale = ca.sup_norm().max(cb.sup_norm()).max(1e-300);
            for (x, y) in ca.values().iter().zip(cb.values()) {
                worst = worst.max((x - y).abs() / scale);
            }
        }
        worst
    }

    proptest! {
        #[test]
        fn mul_commutative_and_associative(v in proptest::collection::vec(-2.0f64..2.0, 36)) {
            let g = grid(9);
            let a = random_series(&v[0..12], &g);
            let b = random_series(&v[12..24], &g);
            let c = random_series(&v[24..36], &g);
            let ab = EvenSeries::mul(&a, &b).unwrap();
            let ba = EvenSeries::mul(&b, &a).unwrap();
            prop_assert!(max_rel_diff(&ab, &ba) <= 1e-13);
            let ab_c = EvenSeries::mul(&ab, &c).unwrap();
            let a_bc = EvenSeries::mul(&a, &EvenSeries::mul(&b, &c).unwrap()).unwrap();
            prop_assert!(max_rel_diff(&ab_c, &a_bc) <= 1e-13);
        }

        #[test]
        fn compose_respects_products(
            f in proptest::collection::vec(-1.0f64..1.0, 1..5),
            h in proptest::collection::vec(-1.0f64..1.0, 1..5),
            v in proptest::collection::vec(-1.0f64..1.0, 12),
            positive in any::<bool>(),
        ) {
            let g = grid(8);
            let psi = random_series(&v, &g);
            let sign = if positive { 1.0 } else { -1.0 };
            let f = Polynomial::new(f).unwrap();
            let h = Polynomial::new(h).unwrap();
            let lhs = EvenSeries::compose_poly(&f.mul(&h), sign, &psi).unwrap();
            let rhs = EvenSeries::mul(
                &EvenSeries::compose_poly(&f, sign, &psi).unwrap(),
                &EvenSeries::compose_poly(&h, sign, &psi).unwrap(),
            ).unwrap();
            for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                for (x, y) in a.values().iter().zip(b.values()) {
                    prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
                }
            }
        }

        #[test]
        fn diff2_exact_on_polynomials(c in proptest::collection::vec(-1.0f64..1.0, 1..12)) {
            let m = 12;
            let g = Grid::new(m, -1.0, 0.5).unwrap();
            let p = Polynomial::new(c).unwrap();
            let f = NodalFunction::from_fn(g.clone(), |y| p.value(y)).unwrap();
            let d2 = nodal_diff2(&f);
            for (y, v) in g.nodes().iter().zip(d2.values()) {
                prop_assert!((v - p.eval(2, *y)).abs() <= 1e-11);
            }
        }

        #[test]
        fn eval_is_even_bitwise(v in proptest::collection::vec(-3.0f64..3.0, 15), x in -2.0f64..2.0, t in 0.0f64..1.0) {
            let g = grid(7);
            let s = random_series(&v, &g);
            let y = -t;
            prop_assert_eq!(s.eval(x, y).unwrap().to_bits(), s.eval(-x, y).unwrap().to_bits());
        }
    }
}
