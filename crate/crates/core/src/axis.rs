//! Crest-line data: the horizontal velocity `u(0, y)` and the wave height
//! `eta(0)`, and the axis stream function `a_0(y) = psi(0, y)` derived
//! from them.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chebyshev;
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::profiles::DensityProfile;
use crate::series::{dot, Grid, NodalFunction};

/// Standard gravity used throughout unless overridden.
pub const GRAVITY: f64 = 9.8;

/// Default number of RK4 substeps between consecutive Lobatto nodes.
pub const SUBSTEPS_PER_INTERVAL: usize = 8;

/// Physical constants of a wave and the two derived invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParameters {
    /// Wave speed.
    pub c: f64,
    /// Bed depth below the reference level `y = 0`.
    pub d: f64,
    pub g: f64,
    pub p_atm: f64,
    /// Pseudo mass flux; `psi = -p0` on the bed.
    pub p0: f64,
    /// Bernoulli head constant of the free-surface condition.
    pub q_head: f64,
}

/// Relative horizontal velocity sampled at Lobatto nodes of `[-d, eta0]`.
#[derive(Debug, Clone)]
pub struct AxisData {
    grid: Arc<Grid>,
    u: Vec<f64>,
    pub eta0: f64,
    pub c: f64,
    pub d: f64,
    pub g: f64,
    pub p_atm: f64,
}

impl AxisData {
    /// Velocity values already given at the Lobatto nodes of `[-d, eta0]`
    /// (descending in `y`).
    pub fn on_nodes(u: Vec<f64>, eta0: f64, c: f64, d: f64, g: f64, p_atm: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::InvalidParameter(format!("depth d = {d} must be positive")));
        }
        if !(eta0 > -d) {
            return Err(Error::InvalidParameter(format!("eta0 = {eta0} lies below the bed")));
        }
        let grid = Grid::new(u.len(), -d, eta0)?;
        if let Some(k) = u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("axis velocity sample {k}")));
        }
        Ok(Self { grid, u, eta0, c, d, g, p_atm })
    }

    /// Arbitrary `(y, u)` samples spanning exactly `[-d, eta0]`. Samples that
    /// already sit on a Lobatto grid are used as they are; anything else is
    /// fitted in the least-squares sense by a Chebyshev polynomial and
    /// evaluated on `m` Lobatto nodes.
    pub fn from_samples(
        samples: &[(f64, f64)],
        m: usize,
        eta0: f64,
        c: f64,
        d: f64,
        g: f64,
        p_atm: f64,
    ) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InsufficientData(format!("{} axis samples", samples.len())));
        }
        let mut s = samples.to_vec();
        s.sort_by(|a, b| b.0.total_cmp(&a.0));
        let span = eta0 + d;
        let tol = 1e-9 * span.abs().max(1.0);
        let (top, bottom) = (s[0].0, s[s.len() - 1].0);
        if (top - eta0).abs() > tol || (bottom + d).abs() > tol {
            return Err(Error::InvalidParameter(format!(
                "axis samples cover [{bottom}, {top}], expected [{}, {eta0}]",
                -d
            )));
        }
        let lobatto = chebyshev::cgl_nodes(s.len(), -d, eta0);
        let on_grid = s.iter().zip(&lobatto).all(|(a, y)| (a.0 - y).abs() <= tol);
        if on_grid {
            let axis = Self::on_nodes(s.iter().map(|p| p.1).collect(), eta0, c, d, g, p_atm)?;
            return if s.len() == m { Ok(axis) } else { axis.resampled(m) };
        }
        let degree = ((2.0 * (s.len() as f64).sqrt()).floor() as usize).min(s.len() - 1).min(m - 1);
        let coeffs = least_squares_chebyshev(&s, degree, -d, eta0)?;
        let t = chebyshev::cgl_points(m);
        let u = t.iter().map(|&t| chebyshev::clenshaw(&coeffs, t)).collect();
        Self::on_nodes(u, eta0, c, d, g, p_atm)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    /// `u` at the Lobatto nodes, top (`eta0`) first.
    pub fn velocity(&self) -> &[f64] {
        &self.u
    }

    pub fn samples(&self) -> Vec<(f64, f64)> {
        self.grid.nodes().iter().copied().zip(self.u.iter().copied()).collect()
    }

    pub fn velocity_at(&self, y: f64) -> Result<f64> {
        let y = self.grid.check(y)?;
        Ok(dot(&self.grid.weights(y), &self.u))
    }

    /// Velocity at the crest, `u(0, eta0)`.
    pub fn crest_velocity(&self) -> f64 {
        self.u[0]
    }

    /// Barycentric re-interpolation onto `m` Lobatto nodes.
    pub fn resampled(&self, m: usize) -> Result<Self> {
        let grid = Grid::new(m, -self.d, self.eta0)?;
        let u = grid
            .nodes()
            .iter()
            .map(|&y| dot(&self.grid.weights(y), &self.u))
            .collect();
        Ok(Self { grid, u, ..self.clone() })
    }
}

pub(crate) fn least_squares_chebyshev(s: &[(f64, f64)], degree: usize, lo: f64, hi: f64) -> Result<Vec<f64>> {
    let k = degree + 1;
    let mut ata = vec![0.0; k * k];
    let mut atb = vec![0.0; k];
    let mut row = vec![0.0; k];
    for &(y, u) in s {
        let t = (2.0 * y - (hi + lo)) / (hi - lo);
        row[0] = 1.0;
        if k > 1 {
            row[1] = t;
        }
        for j in 2..k {
            row[j] = 2.0 * t * row[j - 1] - row[j - 2];
        }
        for i in 0..k {
            atb[i] += row[i] * u;
            for j in 0..k {
                ata[i * k + j] += row[i] * row[j];
            }
        }
    }
    solve_dense(ata, atb)
}

/// Smallest value of `c - u` over the samples and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StagnationMargin {
    pub margin: f64,
    pub at_y: f64,
}

/// Fails with [`Error::Stagnation`] if `u >= c` at any sample.
pub fn check_no_stagnation(axis: &AxisData) -> Result<StagnationMargin> {
    let (at_y, margin) = axis
        .samples()
        .into_iter()
        .map(|(y, u)| (y, axis.c - u))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty axis");
    if !(margin > 0.0) {
        return Err(Error::Stagnation { y: at_y, margin });
    }
    Ok(StagnationMargin { margin, at_y })
}

/// Integrates `a0' = sqrt(rho(-a0)) (u(0, y) - c)` downward from the
/// surface condition `a0(eta0) = 0` with classical RK4, `substeps` steps per
/// node interval, on an `m`-node Lobatto grid. Returns `a0` and the pseudo
/// mass flux `p0 = -a0(-d)`.
pub fn solve_axis_streamfunction(
    axis: &AxisData,
    rho: &DensityProfile,
    m: usize,
    substeps: usize,
) -> Result<(NodalFunction, f64)> {
    let grid = Grid::new(m, -axis.d, axis.eta0)?;
    let nodes = grid.nodes();
    let rhs = |y: f64, a: f64| -> Result<f64> {
        let p = -a;
        let r = rho.at(p);
        if !(r > 0.0) {
            return Err(Error::ProfileRange { p, rho: r });
        }
        let u = dot(&axis.grid.weights(y), &axis.u);
        Ok(r.sqrt() * (u - axis.c))
    };
    let mut values = vec![0.0; m];
    let mut a = 0.0;
    for j in 0..m - 1 {
        let (ya, yb) = (nodes[j], nodes[j + 1]);
        let h = (yb - ya) / substeps as f64;
        for s in 0..substeps {
            let y = ya + s as f64 * h;
            let k1 = rhs(y, a)?;
            let k2 = rhs(y + 0.5 * h, a + 0.5 * h * k1)?;
            let k3 = rhs(y + 0.5 * h, a + 0.5 * h * k2)?;
            let k4 = rhs(y + h, a + h * k3)?;
            a += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
        }
        if !a.is_finite() {
            return Err(Error::IntegrationDivergence(format!("a0 non-finite at y = {yb}")));
        }
        values[j + 1] = a;
    }
    let p0 = -values[m - 1];
    Ok((NodalFunction::new(grid, values)?, p0))
}
