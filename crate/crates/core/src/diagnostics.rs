//! Read-only checks of the qualitative properties of steady waves:
//! symmetry about the crest, monotone streamlines, constancy of the
//! energy head along streamlines, and decay of the Taylor coefficients.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FluidField;
use crate::profiles::{BernoulliFunction, DensityProfile};
use crate::reference::height::HeightField;
use crate::series::{radius_estimate, EvenSeries, COEFF_FLOOR};

/// Default number of point pairs sampled by [`bernoulli_residual`].
pub const BERNOULLI_SAMPLES: usize = 200;
/// Tolerance for row-wise comparisons in the monotonicity checks.
pub const MONOTONE_TOL: f64 = 1e-12;
/// Level spacing below which a sampled pair is skipped.
const MIN_LEVEL_GAP: f64 = 1e-8;

/// One line of a diagnostics report. Hard checks decide the exit status of
/// the pipelines; soft ones are informational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub hard: bool,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    /// Passes when `value <= tolerance`; NaN fails.
    pub fn at_most(name: &str, value: f64, tolerance: f64, hard: bool) -> Self {
        Self { name: name.into(), hard, pass: value <= tolerance, value, tolerance, witness: None, note: String::new() }
    }

    pub fn flag(name: &str, pass: bool, hard: bool) -> Self {
        Self { name: name.into(), hard, pass, value: if pass { 0.0 } else { 1.0 }, tolerance: 0.0, witness: None, note: String::new() }
    }

    pub fn witness(mut self, at: (f64, f64)) -> Self {
        self.witness = Some(at);
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    pub fn hard_failure(&self) -> bool {
        self.hard && !self.pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    /// `sup |f(x) - f(-x)| / sup |f|`.
    pub residual: f64,
    pub witness: (f64, f64),
}

/// Mirror-pair asymmetry of `psi` over the field's columns.
pub fn symmetry_residual_field(field: &FluidField) -> Result<SymmetryReport> {
    let (nx, ny) = field.shape();
    let mut worst = (0.0_f64, (0.0, 0.0));
    let mut scale = 0.0_f64;
    for i in 0..nx {
        let m = nx - 1 - i;
        if field.x[i] != -field.x[m] {
            return Err(Error::Structure(format!("column x = {} has no mirror image", field.x[i])));
        }
        for k in 0..ny {
            if field.y[[i, k]] != field.y[[m, k]] {
                return Err(Error::Structure(format!(
                    "columns at x = +-{} have different y nodes",
                    field.x[i].abs()
                )));
            }
            let d = (field.psi[[i, k]] - field.psi[[m, k]]).abs();
            scale = scale.max(field.psi[[i, k]].abs());
            if d > worst.0 {
                worst = (d, (field.x[i], field.y[[i, k]]));
            }
        }
    }
    Ok(SymmetryReport { residual: normalized(worst.0, scale), witness: worst.1 })
}

/// Asymmetry of `h` about the crest column `q = 0`.
pub fn symmetry_residual_height(field: &HeightField) -> Result<SymmetryReport> {
    let (np, nq) = field.h.dim();
    if nq % 2 != 0 {
        return Err(Error::Structure(format!("{nq} columns cannot be mirrored about q = 0")));
    }
    let mut worst = (0.0_f64, (0.0, 0.0));
    let mut scale = 0.0_f64;
    for i in 0..np {
        for j in 0..nq {
            let m = (nq - j) % nq;
            let d = (field.h[[i, j]] - field.h[[i, m]]).abs();
            scale = scale.max(field.h[[i, j]].abs());
            if d > worst.0 {
                worst = (d, (field.q(j), field.p(i)));
            }
        }
    }
    Ok(SymmetryReport { residual: normalized(worst.0, scale), witness: worst.1 })
}

fn normalized(v: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        v / scale
    } else {
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityReport {
    /// Every row attains its minimum at the trough, `h(+-pi, p) <= h(q, p)`.
    pub trough_minimum: bool,
    /// The surface row is strictly above its trough value away from `q = +-pi`.
    pub strict_at_surface: bool,
    /// Rows are nondecreasing on `[-pi, 0]`.
    pub monotone: bool,
    /// All rows are flat: the inequalities hold only with equality.
    pub degenerate_laminar: bool,
    pub pass: bool,
    pub worst_violation: f64,
    pub witness: (f64, f64),
}

/// Trough-minimum and monotonicity of the streamlines, on the crest-shifted
/// field. A flat (laminar) field passes and is reported as degenerate.
pub fn monotonicity_check(field: &HeightField) -> MonotonicityReport {
    let f = field.crest_shifted();
    let (np, nq) = f.h.dim();
    let half = nq / 2;
    let mut worst = (0.0_f64, (0.0, 0.0));
    let note = |v: f64, i: usize, j: usize, worst: &mut (f64, (f64, f64))| {
        if v > worst.0 {
            *worst = (v, (f.q(j), f.p(i)));
        }
    };
    let (mut trough, mut monotone) = (true, true);
    let mut flat = true;
    for i in 0..np {
        let base = f.h[[i, 0]];
        for j in 0..nq {
            let v = base - f.h[[i, j]];
            if v > MONOTONE_TOL {
                trough = false;
                note(v, i, j, &mut worst);
            }
            if (f.h[[i, j]] - base).abs() > MONOTONE_TOL {
                flat = false;
            }
        }
        for j in 0..half {
            let v = f.h[[i, j]] - f.h[[i, j + 1]];
            if v > MONOTONE_TOL {
                monotone = false;
                note(v, i, j, &mut worst);
            }
        }
    }
    let top = np - 1;
    let strict = (1..nq).all(|j| f.h[[top, j]] > f.h[[top, 0]]);
    let pass = trough && monotone && (strict || flat);
    MonotonicityReport {
        trough_minimum: trough,
        strict_at_surface: strict,
        monotone,
        degenerate_laminar: flat,
        pass,
        worst_violation: worst.0,
        witness: worst.1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovingPlaneReport {
    /// Minimum of `h(2 lambda - q, p) - h(q, p)` over `q < lambda`, all
    /// `lambda` in `(-pi, 0)` on grid lines.
    pub min_reflection: f64,
    pub at_lambda: f64,
    pub at: (f64, f64),
    pub pass: bool,
}

/// Reflection scan echoing the moving-plane argument: for each grid line
/// `lambda` in `(-pi, 0)` the reflected field should dominate on `q < lambda`.
pub fn moving_plane_scan(field: &HeightField) -> MovingPlaneReport {
    let f = field.crest_shifted();
    let (np, nq) = f.h.dim();
    let mut out = MovingPlaneReport { min_reflection: f64::INFINITY, at_lambda: 0.0, at: (0.0, 0.0), pass: true };
    for k in 1..nq / 2 {
        for j in 0..k {
            let r = (2 * k + nq - j) % nq;
            for i in 0..np {
                let w = f.h[[i, r]] - f.h[[i, j]];
                if w < out.min_reflection {
                    out.min_reflection = w;
                    out.at_lambda = f.q(k);
                    out.at = (f.q(j), f.p(i));
                }
            }
        }
    }
    out.pass = out.min_reflection >= -1e-10;
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliReport {
    /// `sup |dE/dpsi + dB/dpsi| / (1 + |dB/dpsi|)` over the used pairs,
    /// both as difference quotients.
    pub sup_mismatch: f64,
    pub pairs_used: usize,
    pub pairs_skipped: usize,
    pub witness: (f64, f64),
    pub seed: u64,
}

/// Samples `samples` pairs of neighbouring nodes in a column, recomputes the
/// energy head `E = P + rho/2 ((u - c)^2 + v^2) + g y rho` from the stored
/// fields and compares the difference quotient `dE/dpsi` with that of
/// `-B`, `B' = beta`; the two agree exactly for a consistent field.
pub fn bernoulli_residual(
    field: &FluidField,
    rho: &DensityProfile,
    beta: &BernoulliFunction,
    samples: usize,
    seed: u64,
) -> BernoulliReport {
    let (nx, ny) = field.shape();
    let (c, g) = (field.params.c, field.params.g);
    let head = |i: usize, k: usize| {
        let psi = field.psi[[i, k]];
        let r = rho.at(-psi);
        let du = field.u[[i, k]] - c;
        let v = field.v[[i, k]];
        field.pressure[[i, k]] + 0.5 * r * (du * du + v * v) + g * field.y[[i, k]] * r
    };
    let primitive = beta.primitive();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BernoulliReport { sup_mismatch: 0.0, pairs_used: 0, pairs_skipped: 0, witness: (0.0, 0.0), seed };
    for _ in 0..samples {
        let i = rng.random_range(0..nx);
        let k = rng.random_range(0..ny - 1);
        let (p1, p2) = (field.psi[[i, k]], field.psi[[i, k + 1]]);
        let gap = p2 - p1;
        if gap.abs() < MIN_LEVEL_GAP {
            out.pairs_skipped += 1;
            continue;
        }
        let slope = (head(i, k + 1) - head(i, k)) / gap;
        let b = (primitive.value(p2) - primitive.value(p1)) / gap;
        let mismatch = (slope + b).abs() / (1.0 + b.abs());
        out.pairs_used += 1;
        if mismatch > out.sup_mismatch || mismatch.is_nan() {
            out.sup_mismatch = mismatch;
            out.witness = (field.x[i], field.y[[i, k]]);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticityReport {
    /// `||a_{2n}||_inf` for `n = 0..=N`.
    pub norms: Vec<f64>,
    /// Slope of `ln ||a_{2n}||` against `2n` over the fitted tail.
    pub decay_rate: Option<f64>,
    /// `None` when unbounded (all higher coefficients below the floor).
    pub radius: Option<f64>,
    /// `ln ||a_{2n}||` decreases over the last `ceil(N/2)` nonzero orders.
    pub monotone_decay: bool,
    /// `(||a_{2n+2}|| / ||a_{2n}||) (2n+1)(2n+2)` for consecutive orders
    /// above the floor, starting at `n = 1`.
    pub factorial_ratios: Vec<f64>,
    /// Orders `n >= 1` for which the factorial law holds within a factor 2
    /// before the first violation.
    pub factorial_orders: usize,
    pub factorial_within_2: bool,
    pub note: String,
}

pub fn analyticity_report(psi: &EvenSeries) -> Result<AnalyticityReport> {
    let norms = psi.coeff_norms();
    let n = psi.truncation_order();
    let radius = radius_estimate(psi)?;
    let nonzero: Vec<usize> = (1..=n).filter(|&k| norms[k] > COEFF_FLOOR).collect();
    let tail: Vec<usize> = {
        let take = n.div_ceil(2).min(nonzero.len());
        nonzero[nonzero.len() - take..].to_vec()
    };
    let monotone_decay = tail.windows(2).all(|w| norms[w[1]] < norms[w[0]]);
    let decay_rate = radius.map(|r| -r.ln());

    let mut ratios = Vec::new();
    for k in 1..n {
        if norms[k] <= COEFF_FLOOR || norms[k + 1] <= COEFF_FLOOR {
            break;
        }
        ratios.push(norms[k + 1] / norms[k] * ((2 * k + 1) * (2 * k + 2)) as f64);
    }
    let within = |r: &f64| (0.5..=2.0).contains(r);
    let factorial_orders = ratios.iter().take_while(|r| within(r)).count();
    let factorial_within_2 = !ratios.is_empty() && ratios.iter().all(within);
    let note = if nonzero.is_empty() {
        "all higher coefficients below floor; unbounded radius".to_string()
    } else if factorial_within_2 {
        format!("factorial decay through order {}", 2 * (factorial_orders + 1))
    } else {
        format!(
            "factorial law holds through a_{}; later coefficients depart from it",
            2 * (factorial_orders + 1)
        )
    };
    Ok(AnalyticityReport {
        norms,
        decay_rate,
        radius,
        monotone_decay: nonzero.is_empty() || monotone_decay,
        factorial_ratios: ratios,
        factorial_orders,
        factorial_within_2,
        note,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axis::{WaveParameters, GRAVITY};
    use crate::reference::manufactured::{BedVariant, ManufacturedWave};
    use crate::series::{Grid, NodalFunction};
    use ndarray::Array2;
    use std::f64::consts::PI;

    fn params() -> WaveParameters {
        WaveParameters { c: 1.0, d: 1.0, g: GRAVITY, p_atm: 0.0, p0: -1.0, q_head: 20.6 }
    }

    fn height(f: impl Fn(f64, f64) -> f64) -> HeightField {
        let (np, nq) = (8, 16);
        let h = Array2::from_shape_fn((np, nq), |(i, j)| {
            let p = -1.0 + i as f64 / (np - 1) as f64;
            let q = -PI + 2.0 * PI * j as f64 / nq as f64;
            if i == 0 {
                0.0
            } else {
                f(q, p)
            }
        });
        HeightField::new(params(), h).unwrap()
    }

    #[test]
    fn laminar_height_is_degenerate_but_passes() {
        let f = height(|_, p| p + 1.0);
        let m = monotonicity_check(&f);
        assert!(m.pass && m.degenerate_laminar && !m.strict_at_surface, "{m:?}");
        assert_eq!(symmetry_residual_height(&f).unwrap().residual, 0.0);
        assert!(moving_plane_scan(&f).pass);
    }

    #[test]
    fn single_crest_passes_two_crests_fail() {
        let one = height(|q, p| (p + 1.0) * (1.0 + 0.01 * q.cos()));
        let m = monotonicity_check(&one);
        assert!(m.pass && m.strict_at_surface && !m.degenerate_laminar, "{m:?}");
        assert!(moving_plane_scan(&one).pass);
        let two = height(|q, p| (p + 1.0) * (1.0 + 0.01 * (2.0 * q).cos()));
        let m = monotonicity_check(&two);
        assert!(!m.pass);
        assert!(m.worst_violation > 0.0);
        assert!(!moving_plane_scan(&two).pass);
    }

    #[test]
    fn perturbed_height_flagged_asymmetric() {
        let base = height(|q, p| (p + 1.0) * (1.0 + 0.01 * q.cos()));
        let mut f = base.clone();
        for i in 1..f.np() {
            for j in 0..f.nq() {
                f.h[[i, j]] += 1e-3 * f.q(j).sin();
            }
        }
        let r = symmetry_residual_height(&f).unwrap().residual;
        let sup = f.h.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        // sin q_j - sin(-q_j) peaks at 2e-3 on the grid
        let peak = (0..f.nq()).map(|j| 2e-3 * f.q(j).sin().abs()).fold(0.0, f64::max);
        assert!((r - peak / sup).abs() < 1e-12, "{r}");
        assert_eq!(symmetry_residual_height(&base).unwrap().residual, 0.0);
    }

    #[test]
    fn geometric_series_radius() {
        let grid = Grid::new(8, -1.0, 0.0).unwrap();
        let coeffs = (0..=12).map(|n| NodalFunction::constant(grid.clone(), 2f64.powi(-2 * n))).collect();
        let s = EvenSeries::new(coeffs).unwrap();
        let r = analyticity_report(&s).unwrap();
        let radius = r.radius.unwrap();
        assert!((1.9..=2.1).contains(&radius), "{radius}");
        assert!(r.monotone_decay);
    }

    #[test]
    fn manufactured_coefficients_factorial() {
        let w = ManufacturedWave::new(-4.0, 0.01, 1.0, BedVariant::Cosh).unwrap();
        let s = w.taylor_series(12, 48).unwrap();
        let r = analyticity_report(&s).unwrap();
        assert!(r.factorial_within_2, "{r:?}");
        assert!(r.factorial_ratios.len() >= 5);
        assert!(r.radius.unwrap() >= PI);
    }

    #[test]
    fn laminar_series_unbounded() {
        let grid = Grid::new(8, -1.0, 0.0).unwrap();
        let mut s = EvenSeries::zeros(grid.clone(), 6);
        s.set_coeff(0, NodalFunction::from_fn(grid, |y| -y).unwrap()).unwrap();
        let r = analyticity_report(&s).unwrap();
        assert_eq!(r.radius, None);
        assert!(r.note.contains("unbounded"));
    }
}
