use std::fs;
use std::path::{Path, PathBuf};

use log::info;
use serde::Serialize;
use serde_json::{json, Map, Value};

use marchenko::direct::compute_scattering_data;
use marchenko::inverse::{invert_full, relative_l2_error, InverseOptions};
use marchenko::star::{assemble_diagonal, extract_star_data, scalar_marchenko_invert};
use marchenko::{
    build_boundary, validate_potential, BoundaryCondition, BoundStateData, CMat, KGrid, PotentialSpec,
    ReconstructionResult, ScatteringData, XGrid, C64,
};

use crate::config::{Mode, RunConfig};
use crate::error::CliError;
use crate::formats::{self, PotentialSamples};

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: &'static str,
    pub passed: bool,
    pub values: Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Report {
    fn new(mode: Mode) -> Self {
        Self { command: mode.name(), passed: true, values: Map::new(), checks: Vec::new() }
    }

    fn set(&mut self, key: &str, v: impl Into<Value>) {
        self.values.insert(key.to_string(), v.into());
    }

    fn check(&mut self, name: &str, passed: bool, detail: String) {
        self.passed &= passed;
        self.checks.push(Check { name: name.to_string(), passed, detail });
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}: {}\n", self.command, if self.passed { "ok" } else { "FAILED" });
        for (k, v) in &self.values {
            out.push_str(&format!("  {k} = {v}\n"));
        }
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("  {} {}: {}\n", status, c.name, c.detail));
        }
        out
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), message: e.to_string() })
}

fn parse<T>(path: &Path, f: impl Fn(&str) -> Result<T, formats::ParseError>) -> Result<T, CliError> {
    f(&read_file(path)?).map_err(|source| CliError::Parse { path: path.to_path_buf(), source })
}

/// Pending output files, written only once every computation has succeeded.
#[derive(Default)]
struct Outputs(Vec<(PathBuf, String)>);

impl Outputs {
    fn add(&mut self, path: PathBuf, contents: String) {
        self.0.push((path, contents));
    }

    fn commit(self) -> Result<(), CliError> {
        for (path, contents) in self.0 {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| CliError::Io { path: dir.to_path_buf(), message: e.to_string() })?;
            }
            fs::write(&path, contents).map_err(|e| CliError::Io { path: path.clone(), message: e.to_string() })?;
            info!("wrote {}", path.display());
        }
        Ok(())
    }
}

fn load_potential(path: &Path) -> Result<PotentialSpec, CliError> {
    let samples = parse(path, formats::read_potential)?;
    let spec = samples.to_spec()?;
    let report = validate_potential(&spec);
    if !report.passed() {
        return Err(CliError::Validation(report.failures.join("; ")));
    }
    Ok(spec)
}

fn load_boundary(path: &Path, n: usize) -> Result<BoundaryCondition, CliError> {
    let u = parse(path, formats::read_boundary)?;
    if u.nrows() != n {
        return Err(CliError::Validation(format!("boundary matrix is {0}x{0} but the potential is {n}x{n}", u.nrows())));
    }
    Ok(build_boundary(&u)?)
}

fn grids(cfg: &RunConfig) -> Result<(KGrid, XGrid), CliError> {
    Ok((KGrid::uniform(cfg.k_max, cfg.n_k)?, XGrid::new(cfg.x_max, cfg.n_x)?))
}

fn inverse_options(cfg: &RunConfig) -> InverseOptions {
    InverseOptions { unitarity_tolerance: cfg.unitarity_tolerance, screen: !cfg.force, ..InverseOptions::default() }
}

fn report_scattering(r: &mut Report, sd: &ScatteringData) {
    r.set("bound_states", sd.bound_states.len());
    r.set("kappas", sd.bound_states.iter().map(|b| b.kappa).collect::<Vec<_>>());
    r.set("max_unitarity_residual", sd.max_unitarity_residual());
    r.set("asymptote_gap", sd.asymptote_gap());
}

fn report_reconstruction(r: &mut Report, res: &ReconstructionResult) {
    let d = &res.diagnostics;
    r.set("marchenko_residual", d.marchenko_residual);
    r.set("condition", d.condition);
    r.set("g_asymmetry", d.g_asymmetry);
    r.set("extension_asymmetry", d.extension_asymmetry);
    r.set("q_asymmetry", d.q_asymmetry);
    r.set("roughness", d.roughness);
    r.set("boundary_spread", d.boundary_spread);
    r.set("truncation", d.truncation);
}

fn reconstruction_files(out: &mut Outputs, dir: &Path, x: Vec<f64>, q: Vec<CMat>, u: &CMat) {
    out.add(dir.join("potential.csv"), formats::write_potential(&PotentialSamples { x, q }));
    out.add(dir.join("boundary.csv"), formats::write_boundary(u));
}

pub fn run_direct(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = load_potential(cfg.potential.as_deref().unwrap())?;
    let bc = load_boundary(cfg.boundary.as_deref().unwrap(), p.n())?;
    let (kg, _) = grids(cfg)?;
    let sd = compute_scattering_data(&p, &bc, &kg)?;
    let mut r = Report::new(Mode::Direct);
    report_scattering(&mut r, &sd);
    let mut out = Outputs::default();
    if let Some(path) = &cfg.out {
        out.add(path.clone(), formats::write_scattering(&sd));
    }
    out.commit()?;
    Ok(r)
}

pub fn run_inverse(cfg: &RunConfig) -> Result<Report, CliError> {
    let sd = parse(cfg.data.as_deref().unwrap(), formats::read_scattering)?;
    let (_, xg) = grids(cfg)?;
    let res = invert_full(&sd, &xg, &inverse_options(cfg))?;
    let mut r = Report::new(Mode::Inverse);
    report_reconstruction(&mut r, &res);
    r.set("forced", cfg.force);
    let mut out = Outputs::default();
    if let Some(dir) = &cfg.out {
        reconstruction_files(&mut out, dir, res.x, res.q, &res.u);
    }
    out.commit()?;
    Ok(r)
}

pub fn run_roundtrip(cfg: &RunConfig) -> Result<Report, CliError> {
    let p = load_potential(cfg.potential.as_deref().unwrap())?;
    let bc = load_boundary(cfg.boundary.as_deref().unwrap(), p.n())?;
    let (kg, xg) = grids(cfg)?;
    let sd = compute_scattering_data(&p, &bc, &kg)?;
    let res = invert_full(&sd, &xg, &inverse_options(cfg))?;
    let truth: Vec<CMat> = res.x.iter().map(|&x| p.eval(x)).collect();
    let q_error = relative_l2_error(&res.q, &truth);
    let u_error = (&res.u - bc.u()).norm();
    let mut r = Report::new(Mode::Roundtrip);
    report_scattering(&mut r, &sd);
    report_reconstruction(&mut r, &res);
    r.check("q_error", q_error <= cfg.q_tolerance, format!("{q_error:.3e} (limit {:.1e})", cfg.q_tolerance));
    r.check("u_error", u_error <= cfg.u_tolerance, format!("{u_error:.3e} (limit {:.1e})", cfg.u_tolerance));
    let m = res.diagnostics.marchenko_residual;
    r.check("marchenko_residual", m <= cfg.marchenko_tolerance, format!("{m:.3e} (limit {:.1e})", cfg.marchenko_tolerance));
    let mut out = Outputs::default();
    if let Some(dir) = &cfg.out {
        out.add(dir.join("scattering.txt"), formats::write_scattering(&sd));
        reconstruction_files(&mut out, dir, res.x, res.q, &res.u);
    }
    out.commit()?;
    Ok(r)
}

pub fn run_stargraph(cfg: &RunConfig) -> Result<Report, CliError> {
    let sd = parse(cfg.data.as_deref().unwrap(), formats::read_scattering)?;
    let (_, xg) = grids(cfg)?;
    let star = extract_star_data(&sd)?;
    let opts = inverse_options(cfg);
    let edges = (0..star.n).map(|i| scalar_marchenko_invert(&star, i, &xg, &opts)).collect::<Result<Vec<_>, _>>()?;
    let q = assemble_diagonal(&edges)?;
    let mut u = CMat::zeros(star.n, star.n);
    for (i, e) in edges.iter().enumerate() {
        u[(i, i)] = e.phase;
    }
    let mut r = Report::new(Mode::Stargraph);
    r.set("edges", star.n);
    r.set("imaginary_residue", edges.iter().map(|e| e.imaginary_residue).fold(0.0, f64::max));
    r.set("phases", edges.iter().map(|e| json!([e.phase.re, e.phase.im])).collect::<Vec<_>>());
    let mut out = Outputs::default();
    if let Some(dir) = &cfg.out {
        let x = edges[0].x.clone();
        let values = x.iter().map(|&xi| q.eval(xi)).collect();
        reconstruction_files(&mut out, dir, x, values, &u);
    }
    out.commit()?;
    Ok(r)
}

fn reflectionless_potential(kappa: f64, gamma: f64, x: f64) -> f64 {
    let e = (-2.0 * kappa * x).exp();
    -4.0 * kappa * gamma * e / (1.0 + gamma * e / (2.0 * kappa)).powi(2)
}

/// Roots of `q cot(q a) = −κ`, `q = √(V₀ − κ²)`, by bracketing on a fine grid.
fn square_well_roots(v0: f64, a: f64) -> Vec<f64> {
    let f = |kappa: f64| {
        let q = (v0 - kappa * kappa).sqrt();
        q * (q * a).cos() + kappa * (q * a).sin()
    };
    let top = v0.sqrt();
    let steps = 20000;
    let mut roots = Vec::new();
    for i in 0..steps {
        let (mut lo, mut hi) = (top * i as f64 / steps as f64, top * (i + 1) as f64 / steps as f64);
        if lo == 0.0 {
            lo = 1e-12;
        }
        if f(lo) * f(hi) > 0.0 {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(lo) * f(mid) <= 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        // q = 0 solves the equation trivially at the top of the range.
        if v0 - root * root > 1e-10 {
            roots.push(root);
        }
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    roots
}

fn max_dev(s: &[CMat], f: impl Fn(usize) -> CMat) -> f64 {
    s.iter().enumerate().map(|(j, m)| (m - f(j)).norm()).fold(0.0, f64::max)
}

fn max_abs_q(res: &ReconstructionResult) -> f64 {
    res.q.iter().map(|q| q.norm()).fold(0.0, f64::max)
}

pub fn run_selftest(_cfg: &RunConfig) -> Result<Report, CliError> {
    let mut r = Report::new(Mode::Selftest);
    let kg = KGrid::uniform(40.0, 400)?;
    let xg = XGrid::new(5.0, 201)?;
    let opts = InverseOptions::default();
    let zero = PotentialSpec::zero(1);

    for (name, bc, sign) in [
        ("free Dirichlet", BoundaryCondition::dirichlet(1), -1.0),
        ("free Neumann", BoundaryCondition::neumann(1), 1.0),
    ] {
        let sd = compute_scattering_data(&zero, &bc, &kg)?;
        let ds = max_dev(&sd.s, |_| CMat::from_element(1, 1, C64::new(sign, 0.0)));
        let res = invert_full(&sd, &xg, &opts)?;
        let (dq, du) = (max_abs_q(&res), (&res.u - bc.u()).norm());
        let ok = ds < 1e-12 && sd.bound_states.is_empty() && dq < 1e-8 && du < 1e-6;
        r.check(name, ok, format!("|S - S0| = {ds:.1e}, |Q| = {dq:.1e}, |U - U0| = {du:.1e}"));
    }

    let h = 0.7;
    let bc = BoundaryCondition::robin(h);
    let sd = compute_scattering_data(&zero, &bc, &kg)?;
    let ds = max_dev(&sd.s, |j| {
        let k = C64::new(0.0, kg.values()[j]);
        CMat::from_element(1, 1, (k + h) / (k - h))
    });
    let res = invert_full(&sd, &xg, &opts)?;
    let (dq, du) = (max_abs_q(&res), (&res.u - bc.u()).norm());
    r.check(
        "free Robin",
        ds < 1e-10 && dq < 1e-3 && du < 1e-2,
        format!("|S - S0| = {ds:.1e}, |Q| = {dq:.1e}, |U - U0| = {du:.1e}"),
    );

    let (kappa, gamma): (f64, f64) = (1.0, 2.0);
    let minus = CMat::from_element(1, 1, C64::new(-1.0, 0.0));
    let sd = ScatteringData {
        s: vec![minus.clone(); kg.len()],
        kgrid: kg.clone(),
        uhat: minus,
        bound_states: vec![BoundStateData { kappa, c: CMat::from_element(1, 1, C64::new(gamma.sqrt(), 0.0)) }],
    };
    let res = invert_full(&sd, &XGrid::new(10.0, 2001)?, &opts)?;
    let dq = res
        .x
        .iter()
        .zip(&res.q)
        .map(|(&x, q)| (q[(0, 0)].re - reflectionless_potential(kappa, gamma, x)).abs())
        .fold(0.0, f64::max);
    r.check("reflectionless", dq < 1e-4, format!("sup |Q - closed form| = {dq:.1e}"));

    let (v0, a) = (20.0, 1.0);
    let well = PotentialSpec::square_well(1, -v0, a)?;
    let sd = compute_scattering_data(&well, &BoundaryCondition::dirichlet(1), &kg)?;
    let roots = square_well_roots(v0, a);
    let found: Vec<f64> = sd.bound_states.iter().map(|b| b.kappa).collect();
    let dk = if found.len() == roots.len() {
        found.iter().zip(&roots).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    r.check(
        "square well",
        dk < 1e-8,
        format!("{} bound states (expected {}), max |kappa - root| = {dk:.1e}", found.len(), roots.len()),
    );
    Ok(r)
}

/// Validates the configuration and runs the selected command.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    match cfg.mode {
        Mode::Direct => run_direct(cfg),
        Mode::Inverse => run_inverse(cfg),
        Mode::Roundtrip => run_roundtrip(cfg),
        Mode::Stargraph => run_stargraph(cfg),
        Mode::Selftest => run_selftest(cfg),
    }
}
