//! The free-boundary problem in height-function form on the rectangle
//! `q in [-pi, pi)`, `p in [p0, 0]`:
//!
//! ```text
//! (1 + h_q^2) h_pp - 2 h_q h_p h_qp + h_p^2 h_qq + [beta(-p) - g (h - d) rho'(p)] h_p^3 = 0
//! 1 + h_q^2 + h_p^2 (2 g rho h - Q) = 0      on p = 0
//! h = 0                                       on p = p0
//! ```
//!
//! Discretized with second-order central differences (periodic in `q`) and a
//! one-sided second-order `h_p` on the top row.
//!
//! The problem is invariant under translation in `q` and has the laminar
//! family as trivial solutions, so at fixed `Q` the Jacobian is singular
//! along `h_q` and nearly singular near the bifurcation. Newton therefore
//! works on even fields (`h(-q) = h(q)`, crest at `q = 0`) and treats `Q`
//! as an unknown fixed by prescribing the first cosine amplitude of the
//! surface.

use std::f64::consts::PI;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::axis::{least_squares_chebyshev, AxisData, WaveParameters};
use crate::chebyshev;
use crate::error::{Error, Result};
use crate::linalg::BandMatrix;
use crate::profiles::{BernoulliFunction, DensityProfile};
use crate::reference::laminar::LaminarFlow;

pub const DEFAULT_NQ: usize = 64;
pub const DEFAULT_NP: usize = 40;
pub const NEWTON_TOLERANCE: f64 = 1e-10;

/// Heights on a uniform grid; row `i` is `p = p0 + i dp` (row 0 is the bed),
/// column `j` is `q = -pi + j dq` (column `nq / 2` is the crest line).
#[derive(Debug, Clone, PartialEq)]
pub struct HeightField {
    pub params: WaveParameters,
    pub h: Array2<f64>,
}

impl HeightField {
    pub fn new(params: WaveParameters, h: Array2<f64>) -> Result<Self> {
        let (np, nq) = h.dim();
        if np < 4 || nq < 4 || nq % 2 != 0 {
            return Err(Error::Structure(format!("height grid {np}x{nq}: need np >= 4 and even nq >= 4")));
        }
        if !(params.p0 < 0.0) {
            return Err(Error::InvalidParameter(format!("p0 = {} must be negative", params.p0)));
        }
        if h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("height field".into()));
        }
        Ok(Self { params, h })
    }

    /// Laminar profile lifted to an `np x nq` grid.
    pub fn from_laminar(lam: &LaminarFlow, nq: usize, np: usize) -> Result<Self> {
        let p0 = lam.p0();
        let mut h = Array2::zeros((np, nq));
        for i in 1..np {
            let p = p_node(p0, np, i);
            let v = lam.h_at(p)?;
            h.row_mut(i).fill(v);
        }
        Self::new(lam.params, h)
    }

    pub fn nq(&self) -> usize {
        self.h.ncols()
    }

    pub fn np(&self) -> usize {
        self.h.nrows()
    }

    pub fn dq(&self) -> f64 {
        2.0 * PI / self.nq() as f64
    }

    pub fn dp(&self) -> f64 {
        -self.params.p0 / (self.np() - 1) as f64
    }

    pub fn q(&self, j: usize) -> f64 {
        q_node(self.nq(), j)
    }

    pub fn p(&self, i: usize) -> f64 {
        p_node(self.params.p0, self.np(), i)
    }

    pub fn crest_column(&self) -> usize {
        self.nq() / 2
    }

    /// `h_p` at `(i, j)`: central inside, one-sided second order on the
    /// top and bottom rows.
    pub fn h_p(&self, i: usize, j: usize) -> f64 {
        let (h, dp, np) = (&self.h, self.dp(), self.np());
        if i == 0 {
            (-3.0 * h[[0, j]] + 4.0 * h[[1, j]] - h[[2, j]]) / (2.0 * dp)
        } else if i == np - 1 {
            (3.0 * h[[i, j]] - 4.0 * h[[i - 1, j]] + h[[i - 2, j]]) / (2.0 * dp)
        } else {
            (h[[i + 1, j]] - h[[i - 1, j]]) / (2.0 * dp)
        }
    }

    /// Rolls columns so that the maximum of the top row sits at `q = 0`.
    pub fn crest_shifted(&self) -> HeightField {
        let nq = self.nq();
        let top = self.np() - 1;
        let jmax = (0..nq).max_by(|&a, &b| self.h[[top, a]].total_cmp(&self.h[[top, b]])).unwrap_or(0);
        let shift = (jmax + nq - self.crest_column()) % nq;
        let mut h = self.h.clone();
        for j in 0..nq {
            h.column_mut(j).assign(&self.h.column((j + shift) % nq));
        }
        HeightField { params: self.params, h }
    }

    /// Surface heights `(q, h(q, 0) - d)`.
    pub fn surface(&self) -> Vec<(f64, f64)> {
        let top = self.np() - 1;
        (0..self.nq()).map(|j| (self.q(j), self.h[[top, j]] - self.params.d)).collect()
    }

    /// First cosine amplitude of the surface, `(2/nq) sum h(q_j, 0) cos q_j`.
    pub fn amplitude(&self) -> f64 {
        let top = self.np() - 1;
        let nq = self.nq();
        2.0 / nq as f64 * (0..nq).map(|j| self.h[[top, j]] * self.q(j).cos()).sum::<f64>()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["q", "p", "h"])?;
        for i in 0..self.np() {
            for j in 0..self.nq() {
                wr.write_record([fmt17(self.q(j)), fmt17(self.p(i)), fmt17(self.h[[i, j]])])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads a `q,p,h` table written by [`HeightField::write_csv`].
    pub fn read_csv<R: std::io::Read>(r: R, params: WaveParameters) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut rows: Vec<(f64, f64, f64)> = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            let get = |k: usize| -> Result<f64> {
                rec.get(k)
                    .ok_or_else(|| Error::Parse(format!("height row has {} fields", rec.len())))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Parse(format!("height field: {e}")))
            };
            rows.push((get(0)?, get(1)?, get(2)?));
        }
        let nq = rows.iter().take_while(|r| r.1 == rows[0].1).count();
        if nq == 0 || rows.len() % nq != 0 {
            return Err(Error::Parse("height table is not a full q x p grid".into()));
        }
        let np = rows.len() / nq;
        let p0 = rows[0].1;
        let h = Array2::from_shape_fn((np, nq), |(i, j)| rows[i * nq + j].2);
        Self::new(WaveParameters { p0, ..params }, h)
    }
}

pub(crate) fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn q_node(nq: usize, j: usize) -> f64 {
    let k = 2 * j as i64 - nq as i64;
    if k == 0 {
        0.0
    } else {
        PI * k as f64 / nq as f64
    }
}

fn p_node(p0: f64, np: usize, i: usize) -> f64 {
    if i == np - 1 {
        0.0
    } else {
        p0 * (np - 1 - i) as f64 / (np - 1) as f64
    }
}

/// Model data shared by residual and Jacobian evaluation.
#[derive(Debug, Clone)]
pub struct HeightProblem<'a> {
    pub rho: &'a DensityProfile,
    pub beta: &'a BernoulliFunction,
}

/// Residual grid: interior equation on rows `1..np-1`, surface condition on
/// the top row, `h` itself on the bed row.
pub fn height_residual(field: &HeightField, prob: &HeightProblem, q_head: f64) -> Result<Array2<f64>> {
    let (np, nq) = (field.np(), field.nq());
    let mut r = Array2::zeros((np, nq));
    for j in 0..nq {
        r[[0, j]] = field.h[[0, j]];
    }
    for i in 1..np {
        for j in 0..nq {
            let loc = local(field, prob, q_head, i, j)?;
            r[[i, j]] = loc.value;
        }
    }
    Ok(r)
}

/// Sup norm of the interior and surface rows of the residual.
pub fn residual_norm(r: &Array2<f64>) -> f64 {
    r.rows().into_iter().skip(1).flatten().fold(0.0, |a: f64, v| a.max(v.abs()))
}

struct Local {
    value: f64,
    /// `(di, dj, weight)` entries of the linearization in `h`.
    entries: Vec<(isize, isize, f64)>,
    /// Derivative with respect to `Q`.
    d_q: f64,
}

fn local(field: &HeightField, prob: &HeightProblem, q_head: f64, i: usize, j: usize) -> Result<Local> {
    let (np, nq) = (field.np(), field.nq());
    let (dq, dp) = (field.dq(), field.dp());
    let h = &field.h;
    let col = |dj: isize| ((j as isize + dj).rem_euclid(nq as isize)) as usize;
    let at = |di: isize, dj: isize| h[[(i as isize + di) as usize, col(dj)]];
    let p = field.p(i);
    let g = field.params.g;
    let hv = at(0, 0);
    let hq = (at(0, 1) - at(0, -1)) / (2.0 * dq);
    let wq = 1.0 / (2.0 * dq);
    let mut entries = Vec::with_capacity(12);
    if i == np - 1 {
        let hp = (3.0 * at(0, 0) - 4.0 * at(-1, 0) + at(-2, 0)) / (2.0 * dp);
        if !(hp > 0.0) {
            return Err(Error::StagnationHeight { q: field.q(j), p, h_p: hp });
        }
        let r0 = prob.rho.at(p);
        let value = 1.0 + hq * hq + hp * hp * (2.0 * g * r0 * hv - q_head);
        let d_hq = 2.0 * hq;
        let d_hp = 2.0 * hp * (2.0 * g * r0 * hv - q_head);
        let d_h = 2.0 * g * r0 * hp * hp;
        let wp = 1.0 / (2.0 * dp);
        entries.extend([
            (0, 1, d_hq * wq),
            (0, -1, -d_hq * wq),
            (0, 0, d_hp * 3.0 * wp + d_h),
            (-1, 0, -4.0 * d_hp * wp),
            (-2, 0, d_hp * wp),
        ]);
        return Ok(Local { value, entries, d_q: -hp * hp });
    }
    let hp = (at(1, 0) - at(-1, 0)) / (2.0 * dp);
    if !(hp > 0.0) {
        return Err(Error::StagnationHeight { q: field.q(j), p, h_p: hp });
    }
    let hqq = (at(0, 1) - 2.0 * hv + at(0, -1)) / (dq * dq);
    let hpp = (at(1, 0) - 2.0 * hv + at(-1, 0)) / (dp * dp);
    let hqp = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * dq * dp);
    let drho = prob.rho.derivative_at(p);
    let k = prob.beta.at(-p) - g * (hv - field.params.d) * drho;
    let value = (1.0 + hq * hq) * hpp - 2.0 * hq * hp * hqp + hp * hp * hqq + k * hp * hp * hp;

    let d_hq = 2.0 * hq * hpp - 2.0 * hp * hqp;
    let d_hp = -2.0 * hq * hqp + 2.0 * hp * hqq + 3.0 * k * hp * hp;
    let d_hpp = 1.0 + hq * hq;
    let d_hqp = -2.0 * hq * hp;
    let d_hqq = hp * hp;
    let d_h = -g * drho * hp * hp * hp;
    let (wp, wqq, wpp, wqp) = (1.0 / (2.0 * dp), 1.0 / (dq * dq), 1.0 / (dp * dp), 1.0 / (4.0 * dq * dp));
    entries.extend([
        (0, 1, d_hq * wq + d_hqq * wqq),
        (0, -1, -d_hq * wq + d_hqq * wqq),
        (1, 0, d_hp * wp + d_hpp * wpp),
        (-1, 0, -d_hp * wp + d_hpp * wpp),
        (0, 0, -2.0 * d_hqq * wqq - 2.0 * d_hpp * wpp + d_h),
        (1, 1, d_hqp * wqp),
        (1, -1, -d_hqp * wqp),
        (-1, 1, -d_hqp * wqp),
        (-1, -1, d_hqp * wqp),
    ]);
    Ok(Local { value, entries, d_q: 0.0 })
}

/// Directional derivative of [`height_residual`] along `(dh, dq_head)`,
/// assembled from the analytic partials. `dh` must vanish on the bed row.
pub fn height_jacobian_action(
    field: &HeightField,
    prob: &HeightProblem,
    q_head: f64,
    dh: &Array2<f64>,
    dq_head: f64,
) -> Result<Array2<f64>> {
    let (np, nq) = (field.np(), field.nq());
    let mut out = Array2::zeros((np, nq));
    for j in 0..nq {
        out[[0, j]] = dh[[0, j]];
    }
    for i in 1..np {
        for j in 0..nq {
            let loc = local(field, prob, q_head, i, j)?;
            let mut s = loc.d_q * dq_head;
            for &(di, dj, w) in &loc.entries {
                let jj = ((j as isize + dj).rem_euclid(nq as isize)) as usize;
                s += w * dh[[(i as isize + di) as usize, jj]];
            }
            out[[i, j]] = s;
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonLog {
    /// Sup residual before each step, ending with the accepted final value.
    pub residuals: Vec<f64>,
    pub step_lengths: Vec<f64>,
    pub q_heads: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct NewtonSolution {
    pub field: HeightField,
    pub log: NewtonLog,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonOptions {
    pub max_iter: usize,
    pub tolerance: f64,
    /// Prescribed `(2/nq) sum h(q_j, 0) cos q_j`; `None` keeps the seed's.
    pub amplitude: Option<f64>,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 15, tolerance: NEWTON_TOLERANCE, amplitude: None }
    }
}

/// Damped Newton iteration on even fields with `Q` as an extra unknown.
///
/// The seed must be even in `q` about the crest column. Its `params.q_head`
/// is the initial head.
pub fn solve_height_newton(
    init: &HeightField,
    rho: &DensityProfile,
    beta: &BernoulliFunction,
    opts: &NewtonOptions,
) -> Result<NewtonSolution> {
    let prob = HeightProblem { rho, beta };
    let (np, nq) = (init.np(), init.nq());
    let half = nq / 2;
    let target = opts.amplitude.unwrap_or_else(|| init.amplitude());
    let mut field = init.clone();
    for i in 0..np {
        for j in 1..half {
            let v = field.h[[i, j]];
            field.h[[i, nq - j]] = v;
        }
    }
    let mut q_head = field.params.q_head;
    let ncols = half + 1;
    let nh = (np - 1) * ncols;
    let index = |i: usize, j: usize| (i - 1) * ncols + fold(nq, j);

    let weights: Vec<f64> = (0..ncols)
        .map(|j| {
            let mult = if j == 0 || j == half { 1.0 } else { 2.0 };
            2.0 / nq as f64 * mult * q_node(nq, j).cos()
        })
        .collect();
    let constraint = |f: &HeightField| f.amplitude() - target;

    let mut log = NewtonLog { residuals: vec![], step_lengths: vec![], q_heads: vec![], iterations: 0, converged: false };
    let norm = |f: &HeightField, q: f64| -> Result<f64> {
        let r = height_residual(f, &prob, q)?;
        Ok(residual_norm(&r).max(constraint(f).abs()))
    };
    let mut current = norm(&field, q_head)?;
    loop {
        log.residuals.push(current);
        log.q_heads.push(q_head);
        if current <= opts.tolerance {
            log.converged = true;
            break;
        }
        if log.iterations == opts.max_iter {
            return Err(Error::NonConvergence { iterations: log.iterations, best_residual: current });
        }
        // bordered system [A b; c^T 0] for (dh, dQ)
        let (kl, ku) = (2 * ncols + 1, ncols + 1);
        let mut a = BandMatrix::zeros(nh, kl, ku);
        let mut border = vec![0.0; nh];
        let mut rhs = vec![0.0; nh];
        for i in 1..np {
            for j in 0..=half {
                let row = index(i, j);
                let loc = local(&field, &prob, q_head, i, j)?;
                rhs[row] = -loc.value;
                border[row] = loc.d_q;
                for &(di, dj, w) in &loc.entries {
                    let ii = (i as isize + di) as usize;
                    if ii == 0 {
                        continue;
                    }
                    let jj = ((j as isize + dj).rem_euclid(nq as isize)) as usize;
                    a.add(row, index(ii, jj), w);
                }
            }
        }
        let lu = a.clone().factor()?;
        let top = |v: &[f64]| -> f64 { (0..ncols).map(|j| weights[j] * v[index(np - 1, j)]).sum() };
        let solve = |r1: &[f64], r2: f64| -> (Vec<f64>, f64) {
            let y1 = lu.solve(r1);
            let y2 = lu.solve(&border);
            let dq_head = (r2 - top(&y1)) / -top(&y2);
            let x: Vec<f64> = y1.iter().zip(&y2).map(|(u, v)| u - dq_head * v).collect();
            (x, dq_head)
        };
        let r2 = -constraint(&field);
        let (mut x, mut dq_head) = solve(&rhs, r2);
        // one step of iterative refinement on the full bordered system
        let ax = a.matvec(&x);
        let res1: Vec<f64> = (0..nh).map(|k| rhs[k] - ax[k] - border[k] * dq_head).collect();
        let res2 = r2 - top(&x);
        let (cx, cq) = solve(&res1, res2);
        for (xi, ci) in x.iter_mut().zip(&cx) {
            *xi += ci;
        }
        dq_head += cq;

        let mut t = 1.0;
        let accepted = loop {
            let mut trial = field.clone();
            for i in 1..np {
                for j in 0..nq {
                    trial.h[[i, j]] += t * x[index(i, j)];
                }
            }
            let q_trial = q_head + t * dq_head;
            if let Ok(n) = norm(&trial, q_trial) {
                if n < current {
                    break Some((trial, q_trial, n));
                }
            }
            t *= 0.5;
            if t < 1.0 / 1024.0 {
                break None;
            }
        };
        log.iterations += 1;
        match accepted {
            Some((f, q, n)) => {
                field = f;
                q_head = q;
                current = n;
                log.step_lengths.push(t);
            }
            None => return Err(Error::NonConvergence { iterations: log.iterations, best_residual: current }),
        }
    }
    field.params.q_head = q_head;
    Ok(NewtonSolution { field, log })
}

fn fold(nq: usize, j: usize) -> usize {
    if j <= nq / 2 {
        j
    } else {
        nq - j
    }
}

/// Seed `laminar + a cos(q) (p - p0) / (-p0)` on an `nq x np` grid at the
/// laminar head.
pub fn perturbed_seed(lam: &LaminarFlow, nq: usize, np: usize, a: f64) -> Result<HeightField> {
    let mut f = HeightField::from_laminar(lam, nq, np)?;
    let p0 = lam.p0();
    for i in 1..np {
        let shape = (f.p(i) - p0) / -p0;
        for j in 0..nq {
            f.h[[i, j]] += a * q_node(nq, j).cos() * shape;
        }
    }
    Ok(f)
}

/// Crest-line data from a height field: after the crest shift, the
/// `q = 0` column gives `y = h - d` and `u = c - 1 / (sqrt(rho) h_p)`.
///
/// `h_p` is taken from a least-squares Chebyshev fit of the column rather
/// than from the difference stencils: the one-sided end stencils carry a
/// different truncation error from the central ones, and that kink shows up
/// as a high-mode plateau that the coefficient recursion amplifies.
/// The samples are then fitted onto `m` Lobatto nodes of `[-d, eta0]`.
pub fn sample_axis_from_height(
    field: &HeightField,
    rho: &DensityProfile,
    c: f64,
    m: usize,
    p_atm: f64,
) -> Result<AxisData> {
    let f = field.crest_shifted();
    let j = f.crest_column();
    let d = f.params.d;
    let np = f.np();
    let p0 = f.params.p0;
    let column: Vec<(f64, f64)> = (0..np).map(|i| (f.p(i), f.h[[i, j]])).collect();
    let degree = ((2.0 * (np as f64).sqrt()).floor() as usize).min(np - 1);
    let fit = least_squares_chebyshev(&column, degree, p0, 0.0)?;
    let scale = 2.0 / -p0;
    let dfit: Vec<f64> = chebyshev::differentiate_coeffs(&fit).into_iter().map(|c| c * scale).collect();
    let mut samples = Vec::with_capacity(np);
    for &(p, h) in &column {
        let t = (2.0 * p - p0) / -p0;
        let hp = chebyshev::clenshaw(&dfit, t);
        if !(hp > 0.0) {
            return Err(Error::StagnationHeight { q: 0.0, p, h_p: hp });
        }
        samples.push((h - d, c - 1.0 / (rho.at(p).sqrt() * hp)));
    }
    let eta0 = f.h[[np - 1, j]] - d;
    AxisData::from_samples(&samples, m, eta0, c, d, f.params.g, p_atm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::GRAVITY;
    use crate::reference::laminar::solve_laminar;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn homogeneous() -> (DensityProfile, BernoulliFunction) {
        (DensityProfile::homogeneous(1.0), BernoulliFunction::zero())
    }

    #[test]
    fn laminar_is_discrete_root() {
        let (rho, beta) = homogeneous();
        let lam = solve_laminar(&rho, &beta, 1.0, 20.6, GRAVITY).unwrap();
        let f = HeightField::from_laminar(&lam, 16, 10).unwrap();
        let r = height_residual(&f, &HeightProblem { rho: &rho, beta: &beta }, 20.6).unwrap();
        assert!(residual_norm(&r) <= 1e-12, "{}", residual_norm(&r));
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let rho = DensityProfile::new(crate::profiles::Polynomial::new(vec![1.0, -0.1]).unwrap());
        let beta = BernoulliFunction::new(crate::profiles::Polynomial::new(vec![0.2, 0.5]).unwrap());
        let lam = solve_laminar(&rho, &beta, 1.0, 24.0, GRAVITY).unwrap();
        let mut f = perturbed_seed(&lam, 16, 10, 0.02).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for v in f.h.iter_mut().skip(16) {
            *v += 1e-3 * rng.random_range(-1.0..1.0);
        }
        let mut dir = Array2::from_shape_fn(f.h.dim(), |_| rng.random_range(-1.0..1.0));
        dir.row_mut(0).fill(0.0);
        let dq: f64 = rng.random_range(-1.0..1.0);
        let prob = HeightProblem { rho: &rho, beta: &beta };
        let q = 24.0;
        let jv = height_jacobian_action(&f, &prob, q, &dir, dq).unwrap();
        let eps = 1e-6;
        let plus = HeightField { h: &f.h + &(eps * &dir), ..f.clone() };
        let minus = HeightField { h: &f.h - &(eps * &dir), ..f.clone() };
        let fd = (height_residual(&plus, &prob, q + eps * dq).unwrap()
            - height_residual(&minus, &prob, q - eps * dq).unwrap())
            / (2.0 * eps);
        let err = (&fd - &jv).iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        let scale = jv.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!(err <= 1e-6 * scale, "{err} vs {scale}");
    }

    #[test]
    fn flat_zero_field_is_stagnant() {
        let params = WaveParameters { c: 1.0, d: 1.0, g: GRAVITY, p_atm: 0.0, p0: -1.0, q_head: 20.6 };
        let f = HeightField::new(params, Array2::zeros((8, 8))).unwrap();
        let (rho, beta) = homogeneous();
        let r = height_residual(&f, &HeightProblem { rho: &rho, beta: &beta }, 20.6);
        assert!(matches!(r, Err(Error::StagnationHeight { .. })));
    }

    #[test]
    fn crest_shift_and_csv_round_trip() {
        let params = WaveParameters { c: 1.0, d: 1.0, g: GRAVITY, p_atm: 0.0, p0: -1.0, q_head: 20.6 };
        let mut h = Array2::zeros((5, 8));
        for i in 1..5 {
            for j in 0..8 {
                h[[i, j]] = i as f64 * 0.25 + 0.01 * (q_node(8, j) - 0.7).cos();
            }
        }
        let f = HeightField::new(params, h).unwrap();
        let s = f.crest_shifted();
        let top = s.surface();
        assert!(top.iter().all(|&(_, e)| e <= top[4].1));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = HeightField::read_csv(buf.as_slice(), params).unwrap();
        assert_eq!(back.h, f.h);
        assert_eq!(back.params.p0, -1.0);
    }

    #[test]
    fn laminar_axis_sampling() {
        let (rho, beta) = homogeneous();
        let lam = solve_laminar(&rho, &beta, 1.0, 20.6, GRAVITY).unwrap();
        let f = HeightField::from_laminar(&lam, 16, 10).unwrap();
        let axis = sample_axis_from_height(&f, &rho, 1.0, 12, 0.0).unwrap();
        assert!(axis.velocity().iter().all(|u| u.abs() < 1e-12));
        assert!(axis.eta0.abs() < 1e-12);
    }
}
