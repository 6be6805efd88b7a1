//! The three batch pipelines behind the command line: `recover` a wave from
//! crest-line data, generate `forward` reference waves, and `verify`
//! existing field files. Each writes its artifacts plus `report.json` into
//! an output directory and returns the process exit code.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use ndarray::Array2;
use serde::Serialize;
use serde_json::{json, Value};

use crate::axis::{check_no_stagnation, solve_axis_streamfunction, WaveParameters, SUBSTEPS_PER_INTERVAL};
use crate::chebyshev::cgl_nodes;
use crate::config::{write_axis_csv, AxisConfig, Config, Mode};
use crate::diagnostics::{
    analyticity_report, bernoulli_residual, monotonicity_check, moving_plane_scan, symmetry_residual_field,
    symmetry_residual_height, Check, BERNOULLI_SAMPLES,
};
use crate::error::{Error, Result};
use crate::field::{compute_head, FluidField, Reconstruction, FIELD_HEADER};
use crate::profiles::validate_profiles;
use crate::recovery::{evaluation_half_width, pde_residual, recover_series, symmetric_points, RecoveryOptions};
use crate::reference::height::{
    perturbed_seed, sample_axis_from_height, solve_height_newton, HeightField, NewtonOptions,
};
use crate::reference::laminar::{bifurcation_head, solve_laminar};
use crate::reference::manufactured::ManufacturedWave;

/// Exit code when every stage ran but a hard diagnostic failed.
pub const EXIT_CHECKS_FAILED: i32 = 5;
/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "STRATIWAVE_THREADS";
/// Upper end of the head scan, in units of `2 g rho(0) d`.
const HEAD_SCAN_FACTOR: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub pipeline: String,
    pub exit_code: i32,
    pub all_pass: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<WaveParameters>,
    pub details: BTreeMap<String, Value>,
}

impl Report {
    fn new(pipeline: &str) -> Self {
        Self {
            pipeline: pipeline.into(),
            exit_code: 0,
            all_pass: true,
            checks: Vec::new(),
            parameters: None,
            details: BTreeMap::new(),
        }
    }

    fn detail(&mut self, key: &str, v: impl Serialize) -> Result<()> {
        self.details.insert(key.into(), serde_json::to_value(v)?);
        Ok(())
    }

    fn finish(&mut self) {
        self.all_pass = self.checks.iter().all(|c| c.pass);
        self.exit_code = if self.checks.iter().any(Check::hard_failure) { EXIT_CHECKS_FAILED } else { 0 };
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        self.report.exit_code
    }
}

/// Caps the global rayon pool from `STRATIWAVE_THREADS`, if set. Only the
/// first call has an effect.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} = {v:?} is not a positive integer")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

struct Artifacts {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let path = self.dir.join(name);
        let mut w = BufWriter::new(File::create(&path)?);
        f(&mut w)?;
        w.flush()?;
        self.files.push(path);
        Ok(())
    }

    fn json(&mut self, name: &str, v: &impl Serialize) -> Result<()> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, v)?;
            w.write_all(b"\n")?;
            Ok(())
        })
    }

    fn finish(mut self, mut report: Report) -> Result<Outcome> {
        report.finish();
        self.json("report.json", &report)?;
        Ok(Outcome { report, files: self.files })
    }
}

/// Crest-line data to series, fields, surface and diagnostics.
///
/// Writes `psi_series.json`, `field.csv`, `surface.csv` and `report.json`.
pub fn run_recover(cfg: &Config, out: &Path) -> Result<Outcome> {
    let rho = cfg.rho()?;
    let beta = cfg.beta()?;
    let tol = cfg.numerics.tolerances;
    let axis = cfg.axis_data()?;
    let margin = check_no_stagnation(&axis)?;
    let (a0, p0) = solve_axis_streamfunction(&axis, &rho, cfg.numerics.nodes, SUBSTEPS_PER_INTERVAL)?;
    let profiles = validate_profiles(&rho, &beta, p0);
    if !profiles.all_pass() {
        let names: Vec<String> = profiles
            .failures()
            .map(|c| format!("{} (p = {}, value {})", c.name, c.witness_p, c.witness_value))
            .collect();
        return Err(Error::InvalidParameter(format!("profile check failed: {}", names.join("; "))));
    }
    let params = WaveParameters {
        c: axis.c,
        d: axis.d,
        g: axis.g,
        p_atm: axis.p_atm,
        p0,
        q_head: compute_head(&axis, &rho),
    };
    let opts = RecoveryOptions {
        order: cfg.numerics.order,
        filter_tol: tol.filter,
        noise_margin: tol.noise_margin,
        sign: cfg.numerics.sign,
    };
    let recovered = recover_series(&a0, &rho, &beta, &params, &opts)?;
    let series = recovered.series;
    let half = evaluation_half_width(&series);
    let nx = cfg.numerics.grid.nx;
    let recon = Reconstruction::new(series.clone(), rho.clone(), beta.clone(), params);
    let field = recon.field(nx, half)?;

    let mut report = Report::new("recover");
    report.parameters = Some(params);
    report.checks.push(
        Check::at_most("stagnation margin", -margin.margin, 0.0, true)
            .witness((0.0, margin.at_y))
            .note("negated min of c - u over the axis samples"),
    );
    report.checks.push(Check::flag("profiles", true, true));

    let pde = pde_residual(&series, &rho, &beta, params.g, half, nx);
    report
        .checks
        .push(Check::at_most("pde residual", pde.normalized, tol.pde, true).witness((pde.worst_x, pde.worst_y)));
    let flux = recon.flux_invariance(half, tol.flux)?;
    report.checks.push(Check::at_most("flux invariance", flux.relative, tol.flux, true));
    let sym = symmetry_residual_field(&field)?;
    report.checks.push(Check::at_most("symmetry", sym.residual, tol.symmetry, true).witness(sym.witness));
    let bern = bernoulli_residual(&field, &rho, &beta, BERNOULLI_SAMPLES, cfg.numerics.seed);
    report
        .checks
        .push(Check::at_most("bernoulli", bern.sup_mismatch, tol.bernoulli, true).witness(bern.witness));
    let dynamic = recon.surface_dynamic_residual(&field.surface)? / params.q_head;
    report.checks.push(
        Check::at_most("surface dynamic condition", dynamic, tol.surface, false)
            .note("holds only for data taken from a dynamically consistent wave"),
    );
    let analytic = analyticity_report(&series)?;
    report.checks.push(Check::flag("coefficient decay", analytic.monotone_decay, false).note(analytic.note.clone()));

    report.detail("x_half_width", half)?;
    report.detail("bandwidth", recovered.bandwidth)?;
    report.detail("coefficient_degrees", &recovered.degrees)?;
    report.detail("stagnation", margin)?;
    report.detail("profiles", &profiles)?;
    report.detail("pde", pde)?;
    report.detail("flux", &flux)?;
    report.detail("bernoulli", bern)?;
    report.detail("analyticity", &analytic)?;

    let mut art = Artifacts::new(out)?;
    art.json("psi_series.json", &series.to_record())?;
    art.write("field.csv", |w| field.write_csv(w))?;
    art.write("surface.csv", |w| field.write_surface_csv(w))?;
    art.finish(report)
}

/// Reference waves. `laminar` and `newton` write `height.csv`,
/// `manufacture` writes the closed-form `field.csv`; all three write
/// `axis.csv` and a ready-to-run `recover.json`.
pub fn run_forward(cfg: &Config, out: &Path) -> Result<Outcome> {
    match cfg.mode {
        Mode::Laminar => forward_laminar(cfg, out),
        Mode::Newton => forward_newton(cfg, out),
        Mode::Manufacture => forward_manufactured(cfg, out),
        Mode::Recover => Err(Error::Config("forward needs mode laminar, newton or manufacture".into())),
    }
}

fn recover_config(cfg: &Config, rho: Vec<f64>, beta: Vec<f64>, c: f64, eta0: f64) -> Config {
    let mut next = cfg.clone();
    next.profiles.rho = rho;
    next.profiles.beta = beta;
    next.mode = Mode::Recover;
    next.forward = None;
    next.axis = Some(AxisConfig { c, eta0, samples: None, csv_path: Some(PathBuf::from("axis.csv")) });
    next
}

fn forward_laminar(cfg: &Config, out: &Path) -> Result<Outcome> {
    let (rho, beta) = (cfg.rho()?, cfg.beta()?);
    let fwd = cfg.forward();
    let g = cfg.geometry;
    let q = fwd.q_head.ok_or_else(|| Error::Config("mode laminar needs forward.Q".into()))?;
    let lam = solve_laminar(&rho, &beta, g.d, q, g.g)?;
    let grid = cfg.numerics.grid;
    let field = HeightField::from_laminar(&lam, grid.nq, grid.np)?;
    let axis = lam.axis_data(cfg.numerics.nodes, fwd.c, g.p_atm)?;
    let res = lam.residuals();

    let mut report = Report::new("forward laminar");
    report.parameters = Some(WaveParameters { c: fwd.c, p_atm: g.p_atm, ..lam.params });
    report.checks.push(Check::at_most("laminar ode", res.ode, 1e-8, true));
    report.checks.push(Check::at_most("laminar surface", res.surface, 1e-10, true));
    report.checks.push(Check::at_most("laminar bed", res.bed, 1e-10, true));
    report.detail("residuals", res)?;
    report.detail("newton_iterations", lam.iterations)?;
    report.detail("eta0", lam.eta0())?;

    let next = recover_config(cfg, cfg.profiles.rho.clone(), cfg.profiles.beta.clone(), fwd.c, lam.eta0());
    let mut art = Artifacts::new(out)?;
    art.write("height.csv", |w| field.write_csv(w))?;
    art.write("axis.csv", |w| write_axis_csv(&axis, w))?;
    art.json("recover.json", &next)?;
    art.finish(report)
}

fn forward_newton(cfg: &Config, out: &Path) -> Result<Outcome> {
    let (rho, beta) = (cfg.rho()?, cfg.beta()?);
    let fwd = cfg.forward();
    let g = cfg.geometry;
    let tol = cfg.numerics.tolerances;
    let q_star = match fwd.q_head {
        Some(q) => q,
        None => {
            let q_min = 2.0 * g.g * rho.at(0.0) * g.d;
            bifurcation_head(&rho, &beta, g.d, g.g, HEAD_SCAN_FACTOR * q_min)?
        }
    };
    let lam = solve_laminar(&rho, &beta, g.d, q_star, g.g)?;
    let grid = cfg.numerics.grid;
    let seed = perturbed_seed(&lam, grid.nq, grid.np, fwd.amplitude)?;
    let opts = NewtonOptions { max_iter: fwd.max_iter, tolerance: tol.newton, amplitude: None };
    let sol = solve_height_newton(&seed, &rho, &beta, &opts)?;
    let field = &sol.field;
    let axis = sample_axis_from_height(field, &rho, fwd.c, cfg.numerics.nodes, g.p_atm)?;

    let mut report = Report::new("forward newton");
    report.parameters = Some(WaveParameters { c: fwd.c, p_atm: g.p_atm, ..field.params });
    let last = *sol.log.residuals.last().unwrap_or(&f64::NAN);
    report.checks.push(Check::at_most("newton residual", last, tol.newton, true));
    report.checks.push(
        Check::at_most("newton iterations", sol.log.iterations as f64, fwd.max_iter as f64, true),
    );
    let sym = symmetry_residual_height(field)?;
    report.checks.push(Check::at_most("symmetry", sym.residual, tol.symmetry, true).witness(sym.witness));
    let mono = monotonicity_check(field);
    report
        .checks
        .push(Check::flag("monotonicity", mono.pass, true).witness(mono.witness).note(if mono.degenerate_laminar {
            "degenerate laminar"
        } else {
            ""
        }));
    let plane = moving_plane_scan(field);
    report.checks.push(Check::flag("moving plane", plane.pass, false).witness(plane.at));
    report.detail("newton", &sol.log)?;
    report.detail("seed_head", q_star)?;
    report.detail("monotonicity", &mono)?;
    report.detail("moving_plane", plane)?;
    report.detail("amplitude", field.amplitude())?;

    let next = recover_config(cfg, cfg.profiles.rho.clone(), cfg.profiles.beta.clone(), fwd.c, axis.eta0);
    let mut art = Artifacts::new(out)?;
    art.write("height.csv", |w| field.write_csv(w))?;
    art.write("axis.csv", |w| write_axis_csv(&axis, w))?;
    art.json("recover.json", &next)?;
    art.finish(report)
}

/// Closed-form fields on the same layout as [`Reconstruction::field`].
pub fn manufactured_field(w: &ManufacturedWave, params: WaveParameters, nx: usize, m: usize, half: f64) -> Result<FluidField> {
    let xs = symmetric_points(half, nx);
    let (rho, beta) = (w.rho(), w.beta());
    let primitive = beta.primitive();
    let r = rho.at(0.0);
    let e_surface = 0.5 * params.q_head + params.p_atm - params.g * r * params.d;
    let z = Array2::zeros((nx, m));
    let mut f = FluidField {
        params,
        x: xs.clone(),
        y: z.clone(),
        psi: z.clone(),
        u: z.clone(),
        v: z.clone(),
        pressure: z.clone(),
        energy: z,
        surface: Vec::with_capacity(nx),
    };
    for (i, &x) in xs.iter().enumerate() {
        let eta = w.surface(x)?;
        f.surface.push((x, eta));
        for (k, y) in cgl_nodes(m, -params.d, eta).into_iter().enumerate() {
            let psi = w.psi(x, y);
            let (u, v) = w.velocity(x, y);
            let energy = e_surface - primitive.value(psi);
            let (du, dv) = (u - w.c, v);
            f.y[[i, k]] = y;
            f.psi[[i, k]] = psi;
            f.u[[i, k]] = u;
            f.v[[i, k]] = v;
            f.energy[[i, k]] = energy;
            f.pressure[[i, k]] = energy - 0.5 * r * (du * du + dv * dv) - params.g * y * r;
        }
    }
    Ok(f)
}

fn forward_manufactured(cfg: &Config, out: &Path) -> Result<Outcome> {
    let fwd = cfg.forward();
    let g = cfg.geometry;
    let w = ManufacturedWave::new(fwd.lambda, fwd.epsilon, g.d, fwd.variant)?;
    let m = cfg.numerics.nodes;
    let axis = w.axis_data(m, g.g, g.p_atm)?;
    let params = WaveParameters {
        c: w.c,
        d: g.d,
        g: g.g,
        p_atm: g.p_atm,
        p0: w.p0(),
        q_head: compute_head(&axis, &w.rho()),
    };
    let field = manufactured_field(&w, params, cfg.numerics.grid.nx, m, 0.5)?;

    let mut report = Report::new("forward manufacture");
    report.parameters = Some(params);
    report.detail("wave", w)?;
    let sym = symmetry_residual_field(&field)?;
    report.checks.push(Check::at_most("symmetry", sym.residual, cfg.numerics.tolerances.symmetry, true));
    let user_profiles = (cfg.profiles.rho.as_slice(), cfg.profiles.beta.as_slice());
    let (rho, beta) = (vec![1.0], vec![0.0, w.lambda]);
    if user_profiles != (rho.as_slice(), beta.as_slice()) {
        report.detail("profiles_replaced", json!({ "rho": rho, "beta": beta }))?;
    }

    let next = recover_config(cfg, rho, beta, w.c, w.eta0);
    let mut art = Artifacts::new(out)?;
    art.write("field.csv", |wr| field.write_csv(wr))?;
    art.write("surface.csv", |wr| field.write_surface_csv(wr))?;
    art.write("axis.csv", |wr| write_axis_csv(&axis, wr))?;
    art.json("recover.json", &next)?;
    art.finish(report)
}

/// Kind of table, recognised from its header row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Field,
    Height,
    Surface,
}

pub fn detect_table(path: &Path) -> Result<TableKind> {
    let file = File::open(path).map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())))?;
    let mut line = String::new();
    BufReader::new(file)
        .read_line(&mut line)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    let header: Vec<&str> = line.trim().split(',').map(str::trim).collect();
    match header.as_slice() {
        h if h == FIELD_HEADER => Ok(TableKind::Field),
        ["q", "p", "h"] => Ok(TableKind::Height),
        ["x", "eta"] => Ok(TableKind::Surface),
        _ => Err(Error::Parse(format!("{}: unrecognised header {:?}", path.display(), line.trim()))),
    }
}

/// Diagnostics of existing tables; each file's checks are prefixed with its
/// name.
pub fn run_verify(cfg: &Config, paths: &[PathBuf], out: &Path) -> Result<Outcome> {
    if paths.is_empty() {
        return Err(Error::Config("verify needs at least one table".into()));
    }
    let (rho, beta) = (cfg.rho()?, cfg.beta()?);
    let tol = cfg.numerics.tolerances;
    let g = cfg.geometry;
    let c = cfg.axis.as_ref().map_or(cfg.forward().c, |a| a.c);
    let params = WaveParameters { c, d: g.d, g: g.g, p_atm: g.p_atm, p0: -1.0, q_head: 0.0 };
    let mut report = Report::new("verify");
    for path in paths {
        let name = path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
        let label = |s: &str| format!("{name}: {s}");
        let open = || File::open(path).map_err(|e| Error::Parse(format!("cannot open {}: {e}", path.display())));
        match detect_table(path)? {
            TableKind::Field => {
                let mut f = FluidField::read_csv(open()?, params).map_err(as_parse)?;
                let (_, ny) = f.shape();
                f.params.p0 = -f.psi[[0, ny - 1]];
                let sym = symmetry_residual_field(&f)?;
                report
                    .checks
                    .push(Check::at_most(&label("symmetry"), sym.residual, tol.symmetry, true).witness(sym.witness));
                let bern = bernoulli_residual(&f, &rho, &beta, BERNOULLI_SAMPLES, cfg.numerics.seed);
                report.checks.push(
                    Check::at_most(&label("bernoulli"), bern.sup_mismatch, tol.bernoulli, true).witness(bern.witness),
                );
                let (bed, spread) = bed_spread(&f);
                report.checks.push(Check::at_most(&label("bed streamline"), spread, tol.flux * bed.abs().max(1.0), false));
                report.detail(&label("bernoulli"), bern)?;
            }
            TableKind::Height => {
                let h = HeightField::read_csv(open()?, params).map_err(as_parse)?;
                let sym = symmetry_residual_height(&h)?;
                report
                    .checks
                    .push(Check::at_most(&label("symmetry"), sym.residual, tol.symmetry, true).witness(sym.witness));
                let mono = monotonicity_check(&h);
                report.checks.push(Check::flag(&label("monotonicity"), mono.pass, true).witness(mono.witness));
                let plane = moving_plane_scan(&h);
                report.checks.push(Check::flag(&label("moving plane"), plane.pass, false).witness(plane.at));
                report.detail(&label("monotonicity"), &mono)?;
            }
            TableKind::Surface => {
                let s = read_surface(open()?)?;
                let n = s.len();
                let (mut worst, mut at, mut scale) = (0.0_f64, (0.0, 0.0), 0.0_f64);
                for i in 0..n {
                    let (x, e) = s[i];
                    let (xm, em) = s[n - 1 - i];
                    if x != -xm {
                        return Err(Error::Structure(format!("{name}: x = {x} has no mirror image")));
                    }
                    scale = scale.max(e.abs());
                    if (e - em).abs() > worst {
                        worst = (e - em).abs();
                        at = (x, e);
                    }
                }
                let r = if scale > 0.0 { worst / scale } else { worst };
                report.checks.push(Check::at_most(&label("symmetry"), r, tol.symmetry, true).witness(at));
            }
        }
    }
    let art = Artifacts::new(out)?;
    art.finish(report)
}

fn as_parse(e: Error) -> Error {
    match e {
        Error::Csv(e) => Error::Parse(e.to_string()),
        other => other,
    }
}

/// `psi` on the bed row and its spread across columns.
fn bed_spread(f: &FluidField) -> (f64, f64) {
    let (nx, ny) = f.shape();
    let bed: Vec<f64> = (0..nx).map(|i| f.psi[[i, ny - 1]]).collect();
    let lo = bed.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = bed.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (bed[0], hi - lo)
}

fn read_surface(r: impl std::io::Read) -> Result<Vec<(f64, f64)>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let num = |k: usize| -> Result<f64> {
            let s = rec.get(k).ok_or_else(|| Error::Parse("short surface row".into()))?.trim();
            s.parse().map_err(|e| Error::Parse(format!("surface value {s:?}: {e}")))
        };
        out.push((num(0)?, num(1)?));
    }
    Ok(out)
}
