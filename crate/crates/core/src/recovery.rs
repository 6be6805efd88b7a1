//! Order-by-order recovery of the even series of `psi` from its trace
//! `a_0(y) = psi(0, y)` on the crest line.
//!
//! Substituting `psi = sum a_{2n}(y) x^{2n}` into
//! `lap psi - g y rho'(-psi) = -beta(psi)` and collecting `x^{2n-2}` gives
//!
//! ```text
//! (2n)(2n-1) a_{2n} = g y b_{2n-2} - c_{2n-2} - a''_{2n-2}
//! ```
//!
//! with `b`, `c` the series coefficients of `rho'(-psi)` and `beta(psi)`.
//! Those only involve `a_0 .. a_{2n-2}`, so the recursion is triangular.
//!
//! The recursion is a Cauchy problem for an elliptic operator: every step
//! applies a second derivative, so roundoff in high Chebyshev modes grows
//! like `k^4` per order. Two cutoffs keep that in check: every coefficient
//! is restricted to the Chebyshev modes resolved in `a_0`, and a noise floor
//! is propagated alongside the recursion, starting at the resolution
//! threshold of `a_0` and multiplied at each order by the gain of the second
//! derivative on the current top mode. Trailing modes below the floor are
//! indistinguishable from amplified roundoff and are dropped.

use serde::{Deserialize, Serialize};

use crate::axis::WaveParameters;
use crate::chebyshev::resolved_degree;
use crate::error::{Error, Result};
use crate::profiles::{BernoulliFunction, DensityProfile};
use crate::series::{dxx_from_coeffs, nodal_diff2, radius_estimate, EvenSeries, NodalFunction};

/// Default truncation order `N` (highest power `x^{2N}`).
pub const DEFAULT_ORDER: usize = 12;
/// Default number of Lobatto nodes for coefficient functions.
pub const DEFAULT_NODES: usize = 48;
/// Default relative threshold for resolved Chebyshev modes of `a_0`.
pub const DEFAULT_FILTER_TOL: f64 = 1e-15;
/// Fraction of the propagated noise floor below which trailing modes are
/// cut. The floor uses the worst-case gain of `d^2/dy^2`, which overstates
/// the growth of actual roundoff by roughly an order of magnitude.
pub const DEFAULT_NOISE_MARGIN: f64 = 0.03;

/// Sign in front of the `beta` coefficients in the recursion. `Minus` is
/// the one consistent with the interior equation; `Plus` reproduces the
/// sign as sometimes printed and exists to demonstrate that it fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BernoulliSign {
    #[default]
    Minus,
    Plus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryOptions {
    pub order: usize,
    /// Modes of `a_0` below `filter_tol * max|c_k|` are treated as noise and
    /// every recovered coefficient is restricted to the remaining degree.
    /// Zero disables the projection.
    pub filter_tol: f64,
    /// See [`DEFAULT_NOISE_MARGIN`]; zero keeps every mode up to the
    /// bandwidth of `a_0`.
    pub noise_margin: f64,
    pub sign: BernoulliSign,
}

impl Default for RecoveryOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            filter_tol: DEFAULT_FILTER_TOL,
            noise_margin: DEFAULT_NOISE_MARGIN,
            sign: BernoulliSign::Minus,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Recovered {
    pub series: EvenSeries,
    /// Chebyshev degree resolved in `a_0`.
    pub bandwidth: usize,
    /// Degree kept in each coefficient `a_{2n}`.
    pub degrees: Vec<usize>,
    /// Propagated noise floor of each coefficient's Chebyshev modes.
    pub noise_floor: Vec<f64>,
}

/// Sup norm of `T_k''` on an interval of length `span`.
fn second_derivative_gain(k: usize, span: f64) -> f64 {
    let k = k as f64;
    (2.0 / span).powi(2) * k * k * (k * k - 1.0) / 3.0
}

pub fn recover_series(
    a0: &NodalFunction,
    rho: &DensityProfile,
    beta: &BernoulliFunction,
    params: &WaveParameters,
    opts: &RecoveryOptions,
) -> Result<Recovered> {
    let grid = a0.grid().clone();
    let m = grid.len();
    let order = opts.order;
    let filtering = opts.filter_tol > 0.0;
    let c0 = a0.chebyshev_coeffs();
    let bandwidth = if filtering { resolved_degree(&c0, opts.filter_tol) } else { m - 1 };
    let span = grid.hi() - grid.lo();
    let mut degree = bandwidth;
    let mut floor = opts.filter_tol * c0.iter().fold(0.0_f64, |a, c| a.max(c.abs()));
    let mut degrees = vec![degree];
    let mut noise_floor = vec![floor];
    let drho = rho.derivative();
    let c_sign = match opts.sign {
        BernoulliSign::Minus => -1.0,
        BernoulliSign::Plus => 1.0,
    };
    let g = params.g;

    let mut series = EvenSeries::zeros(grid.clone(), order);
    series.set_coeff(0, a0.clone())?;
    for n in 1..=order {
        // coefficients a_0 .. a_{2n-2} as a series of order n - 1
        let partial = EvenSeries::new(series.coeffs()[..n].to_vec())?;
        let b = EvenSeries::compose_poly(&drho, -1.0, &partial)?;
        let c = EvenSeries::compose_poly(&beta.beta, 1.0, &partial)?;
        let prev = series.coeff(n - 1);
        let d2 = if n == 1 && degree + 1 < m {
            nodal_diff2(&prev.truncate_modes(degree))
        } else {
            nodal_diff2(prev)
        };
        let denom = ((2 * n) * (2 * n - 1)) as f64;
        let bn = b.coeff(n - 1).values();
        let cn = c.coeff(n - 1).values();
        let values: Vec<f64> = grid
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, &y)| (g * y * bn[k] + c_sign * cn[k] - d2.values()[k]) / denom)
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { order: n });
        }
        let raw = NodalFunction::new(grid.clone(), values)?;
        let an = if filtering {
            floor *= second_derivative_gain(degree, span).max(1.0) / denom;
            let cut = floor * opts.noise_margin;
            let c = raw.chebyshev_coeffs();
            match c[..=degree].iter().rposition(|x| x.abs() > cut) {
                Some(k) => {
                    degree = k;
                    raw.truncate_modes(k)
                }
                None => {
                    degree = 0;
                    NodalFunction::zeros(grid.clone())
                }
            }
        } else {
            raw
        };
        degrees.push(degree);
        noise_floor.push(floor);
        series.set_coeff(n, an)?;
    }
    Ok(Recovered { series, bandwidth, degrees, noise_floor })
}

/// Half-width of the `x` window used for residual and field evaluation:
/// `min(0.5, radius / 2)`.
pub fn evaluation_half_width(series: &EvenSeries) -> f64 {
    match radius_estimate(series) {
        Ok(Some(r)) => (0.5 * r).min(0.5),
        _ => 0.5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeResidual {
    pub sup_residual: f64,
    pub sup_laplacian: f64,
    pub x_half_width: f64,
    /// `sup_residual / (1 + sup_laplacian)`.
    pub normalized: f64,
    pub worst_x: f64,
    pub worst_y: f64,
}

/// Interior residual `lap psi - g y rho'(-psi) + beta(psi)` on `nx` evenly
/// spaced `x` values in `[-x_half_width, x_half_width]` times the Lobatto
/// nodes in `y`.
pub fn pde_residual(
    series: &EvenSeries,
    rho: &DensityProfile,
    beta: &BernoulliFunction,
    g: f64,
    x_half_width: f64,
    nx: usize,
) -> PdeResidual {
    let grid = series.grid();
    let dyy = series.dyy();
    let mut out = PdeResidual {
        sup_residual: 0.0,
        sup_laplacian: 0.0,
        x_half_width,
        normalized: 0.0,
        worst_x: 0.0,
        worst_y: 0.0,
    };
    let xs = symmetric_points(x_half_width, nx);
    for (k, &y) in grid.nodes().iter().enumerate() {
        let a: Vec<f64> = series.coeffs().iter().map(|c| c.values()[k]).collect();
        let a_yy: Vec<f64> = dyy.coeffs().iter().map(|c| c.values()[k]).collect();
        for &x in &xs {
            let psi = crate::series::horner_even(&a, x);
            let lap = dxx_from_coeffs(&a, x) + crate::series::horner_even(&a_yy, x);
            let r = lap - g * y * rho.derivative_at(-psi) + beta.at(psi);
            out.sup_laplacian = out.sup_laplacian.max(lap.abs());
            if r.abs() > out.sup_residual || r.is_nan() {
                out.sup_residual = r.abs();
                out.worst_x = x;
                out.worst_y = y;
            }
        }
    }
    out.normalized = out.sup_residual / (1.0 + out.sup_laplacian);
    out
}

/// `n` points evenly spaced on `[-h, h]`, mirror images negated bitwise.
pub fn symmetric_points(h: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let j = (2 * i) as f64 - last;
            if j == 0.0 {
                0.0
            } else {
                h * j / last
            }
        })
        .collect()
}
