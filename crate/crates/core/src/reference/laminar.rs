//! Laminar (`q`-independent) flows of the height formulation:
//!
//! ```text
//! H'' + [beta(-p) - g (H - d) rho'(p)] H'^3 = 0,   H(p0) = 0,
//! 1 + H'(0)^2 (2 g rho(0) H(0) - Q) = 0,           H(0) = d.
//! ```
//!
//! The surface end fixes `H(0) = d` and `H'(0) = (Q - 2 g rho(0) d)^(-1/2)`,
//! so the flow is found by shooting downward from the surface and locating
//! the bed `p0` where `H` reaches zero.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::axis::{AxisData, WaveParameters};
use crate::error::{Error, Result};
use crate::profiles::{BernoulliFunction, DensityProfile};
use crate::series::{Grid, NodalFunction};

pub const LAMINAR_NODES: usize = 64;
const SUBSTEPS: usize = 8;
const MAX_ITER: usize = 60;
/// Marching steps per unit of `d / H'(0)` while bracketing the bed.
const BRACKET_STEPS: f64 = 256.0;

#[derive(Debug, Clone)]
pub struct LaminarFlow {
    pub params: WaveParameters,
    pub rho: DensityProfile,
    pub beta: BernoulliFunction,
    /// `H` and `H'` on Lobatto nodes of `[p0, 0]`.
    pub h: NodalFunction,
    pub hp: NodalFunction,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaminarResiduals {
    pub ode: f64,
    pub surface: f64,
    pub depth: f64,
    pub bed: f64,
}

struct Shot {
    h: Vec<f64>,
    hp: Vec<f64>,
    grid: Arc<Grid>,
}

fn rhs(rho: &DensityProfile, beta: &BernoulliFunction, g: f64, d: f64, p: f64, h: f64, s: f64) -> f64 {
    -(beta.at(-p) - g * (h - d) * rho.derivative_at(p)) * s * s * s
}

struct Ode<'a> {
    rho: &'a DensityProfile,
    beta: &'a BernoulliFunction,
    g: f64,
    d: f64,
}

impl Ode<'_> {
    fn rk4(&self, p: f64, y: f64, s: f64, dp: f64) -> (f64, f64) {
        let f = |p: f64, y: f64, s: f64| (s, rhs(self.rho, self.beta, self.g, self.d, p, y, s));
        let k1 = f(p, y, s);
        let k2 = f(p + 0.5 * dp, y + 0.5 * dp * k1.0, s + 0.5 * dp * k1.1);
        let k3 = f(p + 0.5 * dp, y + 0.5 * dp * k2.0, s + 0.5 * dp * k2.1);
        let k4 = f(p + dp, y + dp * k3.0, s + dp * k3.1);
        (
            y + dp * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) / 6.0,
            s + dp * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) / 6.0,
        )
    }

    /// Integrates from the surface down to `p0` through the Lobatto nodes
    /// of `[p0, 0]`.
    fn shoot(&self, p0: f64, s_top: f64) -> Result<Shot> {
        let grid = Grid::new(LAMINAR_NODES, p0, 0.0)?;
        let nodes = grid.nodes();
        let m = nodes.len();
        let (mut h, mut hp) = (vec![0.0; m], vec![0.0; m]);
        let (mut y, mut s) = (self.d, s_top);
        h[0] = y;
        hp[0] = s;
        for k in 0..m - 1 {
            let (pa, pb) = (nodes[k], nodes[k + 1]);
            let dp = (pb - pa) / SUBSTEPS as f64;
            for i in 0..SUBSTEPS {
                (y, s) = self.rk4(pa + i as f64 * dp, y, s, dp);
            }
            if !(y.is_finite() && s > 0.0 && s.is_finite()) {
                return Err(Error::NoLaminarFlow(format!("H' leaves (0, inf) above p = {pb}")));
            }
            h[k + 1] = y;
            hp[k + 1] = s;
        }
        Ok(Shot { h, hp, grid })
    }
}

/// Laminar flow of depth `d` and head `q_head`.
pub fn solve_laminar(
    rho: &DensityProfile,
    beta: &BernoulliFunction,
    d: f64,
    q_head: f64,
    g: f64,
) -> Result<LaminarFlow> {
    let rho0 = rho.at(0.0);
    let excess = q_head - 2.0 * g * rho0 * d;
    if !(d > 0.0) || !(rho0 > 0.0) || !(excess > 0.0) {
        return Err(Error::NoLaminarFlow(format!(
            "need d > 0 and Q > 2 g rho(0) d; got d = {d}, Q = {q_head}, 2 g rho(0) d = {}",
            2.0 * g * rho0 * d
        )));
    }
    let ode = Ode { rho, beta, g, d };
    let s_top = 1.0 / excess.sqrt();

    // march down until H changes sign
    let dp = -d / (s_top * BRACKET_STEPS);
    let (mut p, mut y, mut s) = (0.0, d, s_top);
    let mut steps = 0usize;
    while y > 0.0 {
        let (yn, sn) = ode.rk4(p, y, s, dp);
        if !(sn > 0.0 && sn.is_finite() && yn.is_finite()) {
            return Err(Error::NoLaminarFlow(format!("H' leaves (0, inf) near p = {p}")));
        }
        if yn <= 0.0 {
            // linear interpolation inside the step
            p += dp * y / (y - yn);
            break;
        }
        p += dp;
        y = yn;
        s = sn;
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::NoLaminarFlow("H does not reach the bed".into()));
        }
    }

    // Newton on H(p0) = 0 with H'(p0) from the same shot
    let mut p0 = p;
    let mut iterations = 0;
    let shot = loop {
        let shot = ode.shoot(p0, s_top)?;
        let (hb, sb) = (shot.h[LAMINAR_NODES - 1], shot.hp[LAMINAR_NODES - 1]);
        let step = hb / sb;
        if step.abs() <= 1e-15 * p0.abs() || iterations == MAX_ITER {
            if iterations == MAX_ITER && hb.abs() > 1e-10 * d {
                return Err(Error::NoLaminarFlow(format!("bed search stalled with H(p0) = {hb:e}")));
            }
            break shot;
        }
        p0 -= step;
        iterations += 1;
        if !(p0 < 0.0) {
            return Err(Error::NoLaminarFlow(format!("bed search left p < 0 (p0 = {p0})")));
        }
    };
    let params = WaveParameters { c: 0.0, d, g, p_atm: 0.0, p0, q_head };
    Ok(LaminarFlow {
        params,
        rho: rho.clone(),
        beta: beta.clone(),
        h: NodalFunction::new(shot.grid.clone(), shot.h)?,
        hp: NodalFunction::new(shot.grid, shot.hp)?,
        iterations,
    })
}

impl LaminarFlow {
    pub fn p0(&self) -> f64 {
        self.params.p0
    }

    pub fn h_at(&self, p: f64) -> Result<f64> {
        self.h.eval(p)
    }

    pub fn hp_at(&self, p: f64) -> Result<f64> {
        self.hp.eval(p)
    }

    /// Inverts `H(p) = y + d` by safeguarded Newton.
    pub fn p_at_y(&self, y: f64) -> Result<f64> {
        let target = y + self.params.d;
        let (mut lo, mut hi) = (self.p0(), 0.0);
        let mut p = self.p0() * (1.0 - target / self.params.d).clamp(0.0, 1.0);
        for _ in 0..100 {
            let r = self.h_at(p)? - target;
            if r > 0.0 {
                hi = p;
            } else {
                lo = p;
            }
            let step = r / self.hp_at(p)?;
            let next = p - step;
            let next = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if (next - p).abs() <= 1e-15 * (1.0 + p.abs()) {
                return Ok(next);
            }
            p = next;
        }
        Ok(p)
    }

    /// Stream function `psi(y) = -p(y)`.
    pub fn psi_at_y(&self, y: f64) -> Result<f64> {
        Ok(-self.p_at_y(y)?)
    }

    /// Horizontal velocity `c - 1 / (sqrt(rho) H')` at height `y`.
    pub fn velocity_at(&self, y: f64, c: f64) -> Result<f64> {
        let p = self.p_at_y(y)?;
        Ok(c - 1.0 / (self.rho.at(p).sqrt() * self.hp_at(p)?))
    }

    /// Surface height `H(0) - d`.
    pub fn eta0(&self) -> f64 {
        self.h.values()[0] - self.params.d
    }

    /// Crest-line data at `m` Lobatto nodes of `[-d, eta0]`.
    pub fn axis_data(&self, m: usize, c: f64, p_atm: f64) -> Result<AxisData> {
        let grid = Grid::new(m, -self.params.d, self.eta0())?;
        let u = grid.nodes().iter().map(|&y| self.velocity_at(y, c)).collect::<Result<Vec<_>>>()?;
        AxisData::on_nodes(u, self.eta0(), c, self.params.d, self.params.g, p_atm)
    }

    /// Residuals of the ODE (at interior nodes, with `H''` taken spectrally),
    /// the surface condition and the depth condition.
    pub fn residuals(&self) -> LaminarResiduals {
        let hpp = self.hp.derivative(1);
        let (g, d) = (self.params.g, self.params.d);
        let ode = self
            .h
            .grid()
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, &p)| {
                let (h, s) = (self.h.values()[k], self.hp.values()[k]);
                (hpp.values()[k] - rhs(&self.rho, &self.beta, g, d, p, h, s)).abs()
            })
            .fold(0.0, f64::max);
        let (h0, s) = (self.h.values()[0], self.hp.values()[0]);
        LaminarResiduals {
            bed: self.h.values()[self.h.len() - 1].abs(),
            ode,
            surface: (1.0 + s * s * (2.0 * g * self.rho.at(0.0) * h0 - self.params.q_head)).abs(),
            depth: (h0 - d).abs(),
        }
    }
}

/// Head `Q` at which the laminar flow of depth `d` admits a neutral
/// `cos q` perturbation, i.e. where the wave branch of period `2 pi`
/// bifurcates. The largest such head in `(2 g rho(0) d, q_max]` is the
/// surface mode; smaller roots belong to internal modes.
pub fn bifurcation_head(
    rho: &DensityProfile,
    beta: &BernoulliFunction,
    d: f64,
    g: f64,
    q_max: f64,
) -> Result<f64> {
    let q_min = 2.0 * g * rho.at(0.0) * d;
    let dispersion = |q: f64| -> Result<f64> {
        let lam = solve_laminar(rho, beta, d, q, g)?;
        Ok(neutral_mode_residual(&lam))
    };
    let n = 400;
    let span = q_max - q_min;
    let qs: Vec<f64> = (1..=n).map(|i| q_min + span * (i as f64 / n as f64).powi(2)).collect();
    let vals: Vec<Option<f64>> = qs.iter().map(|&q| dispersion(q).ok()).collect();
    let mut bracket = None;
    for i in (1..n).rev() {
        if let (Some(a), Some(b)) = (vals[i - 1], vals[i]) {
            if a.signum() != b.signum() {
                bracket = Some((qs[i - 1], a, qs[i]));
                break;
            }
        }
    }
    let (mut lo, flo, mut hi) =
        bracket.ok_or_else(|| Error::NoLaminarFlow(format!("no bifurcation head below Q = {q_max}")))?;
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= 1e-14 * mid {
            break;
        }
        let fm = dispersion(mid)?;
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Shoots `phi'' - H'^2 phi + 3 K H'^2 phi' - g rho' H'^3 phi = 0` from
/// `phi(p0) = 0, phi'(p0) = 1` and returns the linearized surface condition
/// `2 H' (2 g rho H - Q) phi' + 2 g rho H'^2 phi` at `p = 0`.
fn neutral_mode_residual(lam: &LaminarFlow) -> f64 {
    let (g, d, q) = (lam.params.g, lam.params.d, lam.params.q_head);
    let grid = lam.h.grid();
    let nodes = grid.nodes();
    let m = nodes.len();
    let coef = |p: f64| -> (f64, f64, f64) {
        let w = grid.weights(p);
        let h: f64 = w.iter().zip(lam.h.values()).map(|(a, b)| a * b).sum();
        let s: f64 = w.iter().zip(lam.hp.values()).map(|(a, b)| a * b).sum();
        let k = lam.beta.at(-p) - g * (h - d) * lam.rho.derivative_at(p);
        (s * s, 3.0 * k * s * s, g * lam.rho.derivative_at(p) * s * s * s)
    };
    let f = |p: f64, phi: f64, dphi: f64| {
        let (a, b, c) = coef(p);
        (dphi, a * phi - b * dphi + c * phi)
    };
    let (mut phi, mut dphi) = (0.0, 1.0);
    for k in (1..m).rev() {
        let (pa, pb) = (nodes[k], nodes[k - 1]);
        let dp = (pb - pa) / SUBSTEPS as f64;
        for i in 0..SUBSTEPS {
            let p = pa + i as f64 * dp;
            let k1 = f(p, phi, dphi);
            let k2 = f(p + 0.5 * dp, phi + 0.5 * dp * k1.0, dphi + 0.5 * dp * k1.1);
            let k3 = f(p + 0.5 * dp, phi + 0.5 * dp * k2.0, dphi + 0.5 * dp * k2.1);
            let k4 = f(p + dp, phi + dp * k3.0, dphi + dp * k3.1);
            phi += dp * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0) / 6.0;
            dphi += dp * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1) / 6.0;
        }
    }
    let (h0, s) = (lam.h.values()[0], lam.hp.values()[0]);
    let r0 = lam.rho.at(0.0);
    // normalize so the sign change is not swamped by the growth of phi
    let scale = phi.abs() + dphi.abs();
    (2.0 * s * (2.0 * g * r0 * h0 - q) * dphi + 2.0 * g * r0 * s * s * phi) / scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::GRAVITY;
    use crate::profiles::Polynomial;
    use approx::assert_abs_diff_eq;

    #[test]
    fn affine_homogeneous_solution() {
        let lam =
            solve_laminar(&DensityProfile::homogeneous(1.0), &BernoulliFunction::zero(), 1.0, 20.6, GRAVITY)
                .unwrap();
        assert_abs_diff_eq!(lam.p0(), -1.0, epsilon = 1e-12);
        for (p, h) in lam.h.grid().nodes().iter().zip(lam.h.values()) {
            assert_abs_diff_eq!(*h, p + 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(lam.velocity_at(-0.4, 1.0).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(lam.psi_at_y(-0.4).unwrap(), 0.4, epsilon = 1e-12);
    }

    #[test]
    fn affine_for_other_heads() {
        let lam =
            solve_laminar(&DensityProfile::homogeneous(1.3), &BernoulliFunction::zero(), 2.0, 60.0, GRAVITY)
                .unwrap();
        let s = lam.hp.values()[0];
        for (p, h) in lam.h.grid().nodes().iter().zip(lam.h.values()) {
            assert_abs_diff_eq!(*h, s * (p - lam.p0()), epsilon = 1e-11);
        }
    }

    #[test]
    fn stratified_residuals() {
        let rho = DensityProfile::new(Polynomial::new(vec![1.0, -0.2, 0.01]).unwrap());
        let lam = solve_laminar(&rho, &BernoulliFunction::zero(), 1.0, 20.6, GRAVITY).unwrap();
        let r = lam.residuals();
        assert!(r.ode <= 1e-10, "{r:?}");
        assert!(r.surface <= 1e-10 && r.depth <= 1e-10, "{r:?}");
        assert!(lam.p0() < 0.0);
    }

    #[test]
    fn subcritical_head_rejected() {
        let err = solve_laminar(&DensityProfile::homogeneous(1.0), &BernoulliFunction::zero(), 1.0, 10.0, GRAVITY);
        assert!(matches!(err, Err(Error::NoLaminarFlow(_))));
    }

    #[test]
    fn homogeneous_bifurcation_matches_dispersion_relation() {
        // U^2 = g tanh(d) with Q = U^2 + 2 g d
        let q = bifurcation_head(&DensityProfile::homogeneous(1.0), &BernoulliFunction::zero(), 1.0, GRAVITY, 60.0)
            .unwrap();
        assert_abs_diff_eq!(q, GRAVITY * 1f64.tanh() + 2.0 * GRAVITY, epsilon = 1e-9);
    }
}
