//! Physical fields from a recovered series: velocity, pressure, energy
//! head, free surface and the flux through vertical sections.

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::axis::{AxisData, WaveParameters};
use crate::chebyshev::{cgl_nodes, clenshaw_curtis_weights};
use crate::error::{Error, Result};
use crate::profiles::{BernoulliFunction, DensityProfile, Polynomial};
use crate::recovery::symmetric_points;
use crate::reference::height::fmt17;
use crate::series::EvenSeries;

/// Number of vertical sections used for the flux-invariance check.
pub const FLUX_STATIONS: usize = 9;
/// Default number of `x` columns in a field grid.
pub const DEFAULT_COLUMNS: usize = 41;
const SURFACE_TOL: f64 = 1e-12;

/// Bernoulli head `Q = rho(0) (u(0, eta0) - c)^2 + 2 g rho(0) (eta0 + d)`,
/// the surface condition evaluated at the crest where `v = 0`.
pub fn compute_head(axis: &AxisData, rho: &DensityProfile) -> f64 {
    let r0 = rho.at(0.0);
    let du = axis.crest_velocity() - axis.c;
    r0 * du * du + 2.0 * axis.g * r0 * (axis.eta0 + axis.d)
}

/// A recovered series together with everything needed to evaluate
/// physical quantities from it.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub series: EvenSeries,
    psi_y: EvenSeries,
    pub rho: DensityProfile,
    pub beta: BernoulliFunction,
    pub params: WaveParameters,
    primitive: Polynomial,
    /// `E` on the free surface.
    pub surface_energy: f64,
}

impl Reconstruction {
    pub fn new(series: EvenSeries, rho: DensityProfile, beta: BernoulliFunction, params: WaveParameters) -> Self {
        let psi_y = series.dy();
        let primitive = beta.primitive();
        let surface_energy = 0.5 * params.q_head + params.p_atm - params.g * rho.at(0.0) * params.d;
        Self { series, psi_y, rho, beta, params, primitive, surface_energy }
    }

    pub fn eta0(&self) -> f64 {
        self.series.grid().hi()
    }

    pub fn psi(&self, x: f64, y: f64) -> Result<f64> {
        self.series.eval(x, y)
    }

    fn check_inside(&self, x: f64, y: f64, psi: f64) -> Result<()> {
        if psi < -1e-10 * (1.0 + self.params.p0.abs()) {
            return Err(Error::AboveSurface { x, y });
        }
        Ok(())
    }

    /// `(u, v) = (c + psi_y / sqrt(rho), -psi_x / sqrt(rho))` with
    /// `rho = rho(-psi)`.
    pub fn velocity(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        let psi = self.series.eval(x, y)?;
        self.check_inside(x, y, psi)?;
        let sr = self.rho.at(-psi).sqrt();
        let psi_x = self.series.eval_dx(x, y)?;
        let psi_y = self.psi_y.eval(x, y)?;
        Ok((self.params.c + psi_y / sr, -psi_x / sr))
    }

    /// `E(psi) = E|_eta - B(psi)` with `B' = beta`, `B(0) = 0`.
    pub fn energy(&self, psi: f64) -> f64 {
        self.surface_energy - self.primitive.value(psi)
    }

    /// `P = E - rho/2 ((u - c)^2 + v^2) - g y rho`.
    pub fn pressure(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.point(x, y)?.pressure)
    }

    pub fn point(&self, x: f64, y: f64) -> Result<FieldPoint> {
        let psi = self.series.eval(x, y)?;
        let (u, v) = self.velocity(x, y)?;
        let r = self.rho.at(-psi);
        let e = self.energy(psi);
        let du = u - self.params.c;
        let pressure = e - 0.5 * r * (du * du + v * v) - self.params.g * y * r;
        Ok(FieldPoint { x, y, psi, u, v, pressure, energy: e })
    }

    /// Root of `psi(x, .)` on `[-d, eta0]`: bisection, then secant polish.
    pub fn surface(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (-self.params.d, self.eta0());
        let f = |y: f64| self.series.eval(x, y);
        let ftop = f(hi)?;
        if ftop.abs() <= SURFACE_TOL {
            return Ok(hi);
        }
        let fbot = f(lo)?;
        if !(fbot > 0.0 && ftop < 0.0) {
            return Err(Error::SurfaceEscape { x });
        }
        let (mut a, mut b) = (lo, hi);
        let (mut fa, mut fb) = (fbot, ftop);
        while b - a > 1e-6 * (hi - lo) {
            let m = 0.5 * (a + b);
            let fm = f(m)?;
            if fm > 0.0 {
                (a, fa) = (m, fm);
            } else {
                (b, fb) = (m, fm);
            }
        }
        // secant inside the bracket, falling back to bisection
        let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
        for _ in 0..60 {
            if best.1.abs() <= SURFACE_TOL || b - a <= f64::EPSILON * (1.0 + b.abs()) {
                break;
            }
            let mut m = b - fb * (b - a) / (fb - fa);
            if !(m > a && m < b) {
                m = 0.5 * (a + b);
            }
            let fm = f(m)?;
            if fm > 0.0 {
                (a, fa) = (m, fm);
            } else {
                (b, fb) = (m, fm);
            }
            if fm.abs() < best.1.abs() {
                best = (m, fm);
            }
        }
        Ok(best.0)
    }

    pub fn surfaces(&self, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
        xs.iter().map(|&x| Ok((x, self.surface(x)?))).collect()
    }

    /// `F(x) = int_{-d}^{eta(x)} sqrt(rho) (u - c) dy` by Clenshaw-Curtis
    /// quadrature on the Lobatto nodes of the section.
    pub fn flux(&self, x: f64) -> Result<f64> {
        let eta = self.surface(x)?;
        let m = self.series.grid().len();
        let nodes = cgl_nodes(m, -self.params.d, eta);
        let w = clenshaw_curtis_weights(m, -self.params.d, eta);
        let mut s = 0.0;
        for (y, wk) in nodes.iter().zip(&w) {
            s += wk * self.psi_y.eval(x, *y)?;
        }
        Ok(s)
    }

    pub fn flux_invariance(&self, half_width: f64, tol: f64) -> Result<FluxReport> {
        let xs = symmetric_points(half_width, FLUX_STATIONS);
        let flux = xs.iter().map(|&x| self.flux(x)).collect::<Result<Vec<_>>>()?;
        let p0 = self.params.p0;
        let max_dev = flux.iter().fold(0.0_f64, |a, f| a.max((f - p0).abs()));
        let relative = max_dev / p0.abs();
        Ok(FluxReport { stations: xs, flux, p0, max_deviation: max_dev, relative, pass: relative <= tol, tolerance: tol })
    }

    /// `|grad psi|^2 + 2 g rho(0) (eta + d) - Q` at the given surface points.
    pub fn surface_dynamic_residual(&self, surface: &[(f64, f64)]) -> Result<f64> {
        let mut worst = 0.0_f64;
        let r0 = self.rho.at(0.0);
        for &(x, eta) in surface {
            let px = self.series.eval_dx(x, eta)?;
            let py = self.psi_y.eval(x, eta)?;
            let r = px * px + py * py + 2.0 * self.params.g * r0 * (eta + self.params.d) - self.params.q_head;
            worst = worst.max(r.abs());
        }
        Ok(worst)
    }

    /// Field on `nx` symmetric columns in `[-half_width, half_width]`, each
    /// sampled at the Lobatto nodes of `[-d, eta(x)]`.
    pub fn field(&self, nx: usize, half_width: f64) -> Result<FluidField> {
        let xs = symmetric_points(half_width, nx);
        let m = self.series.grid().len();
        let columns: Vec<(f64, Vec<FieldPoint>)> = xs
            .par_iter()
            .map(|&x| {
                let eta = self.surface(x)?;
                let pts = cgl_nodes(m, -self.params.d, eta)
                    .into_iter()
                    .map(|y| self.point(x, y))
                    .collect::<Result<Vec<_>>>()?;
                Ok((eta, pts))
            })
            .collect::<Result<Vec<_>>>()?;
        let mut f = FluidField::empty(self.params, nx, m);
        f.x = xs.clone();
        for (i, (eta, pts)) in columns.into_iter().enumerate() {
            f.surface.push((xs[i], eta));
            for (k, pt) in pts.into_iter().enumerate() {
                f.y[[i, k]] = pt.y;
                f.psi[[i, k]] = pt.psi;
                f.u[[i, k]] = pt.u;
                f.v[[i, k]] = pt.v;
                f.pressure[[i, k]] = pt.pressure;
                f.energy[[i, k]] = pt.energy;
            }
        }
        Ok(f)
    }
}

/// Velocity at a point; see [`Reconstruction::velocity`].
pub fn reconstruct_velocity(
    series: &EvenSeries,
    rho: &DensityProfile,
    params: &WaveParameters,
    x: f64,
    y: f64,
) -> Result<(f64, f64)> {
    Reconstruction::new(series.clone(), rho.clone(), BernoulliFunction::zero(), *params).velocity(x, y)
}

/// Pressure at a point; see [`Reconstruction::pressure`].
pub fn reconstruct_pressure(
    series: &EvenSeries,
    rho: &DensityProfile,
    beta: &BernoulliFunction,
    params: &WaveParameters,
    x: f64,
    y: f64,
) -> Result<f64> {
    Reconstruction::new(series.clone(), rho.clone(), beta.clone(), *params).pressure(x, y)
}

/// Free-surface heights at the given abscissae.
pub fn recover_surface(series: &EvenSeries, params: &WaveParameters, xs: &[f64]) -> Result<Vec<(f64, f64)>> {
    Reconstruction::new(series.clone(), DensityProfile::homogeneous(1.0), BernoulliFunction::zero(), *params)
        .surfaces(xs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub psi: f64,
    pub u: f64,
    pub v: f64,
    pub pressure: f64,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub stations: Vec<f64>,
    pub flux: Vec<f64>,
    pub p0: f64,
    pub max_deviation: f64,
    pub relative: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Gridded fields; row `i` is the column at `x[i]`, entry `k` the `k`-th
/// Lobatto node of `[-d, eta(x[i])]` from the surface down.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidField {
    pub params: WaveParameters,
    pub x: Vec<f64>,
    pub y: Array2<f64>,
    pub psi: Array2<f64>,
    pub u: Array2<f64>,
    pub v: Array2<f64>,
    pub pressure: Array2<f64>,
    pub energy: Array2<f64>,
    pub surface: Vec<(f64, f64)>,
}

pub const FIELD_HEADER: [&str; 7] = ["x", "y", "psi", "u", "v", "P", "E"];

impl FluidField {
    fn empty(params: WaveParameters, nx: usize, ny: usize) -> Self {
        let z = Array2::zeros((nx, ny));
        Self {
            params,
            x: vec![0.0; nx],
            y: z.clone(),
            psi: z.clone(),
            u: z.clone(),
            v: z.clone(),
            pressure: z.clone(),
            energy: z,
            surface: Vec::with_capacity(nx),
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.psi.dim()
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(FIELD_HEADER)?;
        let (nx, ny) = self.shape();
        for i in 0..nx {
            for k in 0..ny {
                wr.write_record([
                    fmt17(self.x[i]),
                    fmt17(self.y[[i, k]]),
                    fmt17(self.psi[[i, k]]),
                    fmt17(self.u[[i, k]]),
                    fmt17(self.v[[i, k]]),
                    fmt17(self.pressure[[i, k]]),
                    fmt17(self.energy[[i, k]]),
                ])?;
            }
        }
        wr.flush()?;
        Ok(())
    }

    pub fn write_surface_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        write_surface(&self.surface, w)
    }

    /// Reads a table written by [`FluidField::write_csv`]; rows sharing an
    /// `x` value form one column. The surface is taken as the top node of
    /// each column.
    pub fn read_csv<R: std::io::Read>(r: R, params: WaveParameters) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let header: Vec<String> = rd.headers()?.iter().map(|s| s.trim().to_string()).collect();
        if header != FIELD_HEADER {
            return Err(Error::Parse(format!("field header {header:?}, expected {FIELD_HEADER:?}")));
        }
        let mut rows: Vec<[f64; 7]> = Vec::new();
        for rec in rd.records() {
            let rec = rec?;
            if rec.len() != 7 {
                return Err(Error::Parse(format!("field row with {} fields", rec.len())));
            }
            let mut row = [0.0; 7];
            for (k, v) in rec.iter().enumerate() {
                row[k] = v.trim().parse().map_err(|e| Error::Parse(format!("field value {v:?}: {e}")))?;
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse("empty field table".into()));
        }
        let ny = rows.iter().take_while(|r| r[0] == rows[0][0]).count();
        if rows.len() % ny != 0 {
            return Err(Error::Parse("field columns have unequal lengths".into()));
        }
        let nx = rows.len() / ny;
        let mut f = Self::empty(params, nx, ny);
        for i in 0..nx {
            f.x[i] = rows[i * ny][0];
            for k in 0..ny {
                let r = &rows[i * ny + k];
                if r[0] != f.x[i] {
                    return Err(Error::Parse(format!("row {} breaks column {i}", i * ny + k)));
                }
                f.y[[i, k]] = r[1];
                f.psi[[i, k]] = r[2];
                f.u[[i, k]] = r[3];
                f.v[[i, k]] = r[4];
                f.pressure[[i, k]] = r[5];
                f.energy[[i, k]] = r[6];
            }
            f.surface.push((f.x[i], f.y[[i, 0]]));
        }
        Ok(f)
    }
}

pub fn write_surface<W: std::io::Write>(surface: &[(f64, f64)], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(["x", "eta"])?;
    for &(x, eta) in surface {
        wr.write_record([fmt17(x), fmt17(eta)])?;
    }
    wr.flush()?;
    Ok(())
}
