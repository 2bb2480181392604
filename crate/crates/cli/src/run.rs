//! Scenario execution.

use std::collections::BTreeMap;
use std::f64::consts::{E, PI};
use std::path::{Path, PathBuf};
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use wgqed::ddesolver::integrate_dde;
use wgqed::dynamics::{
    amplitude_branch_sum, amplitude_independent, amplitude_markovian, amplitude_series, beta_for_max_rate,
    critical_separation, instantaneous_rate, max_instantaneous_rate, BranchSumOptions,
};
use wgqed::field::{guided_norm, intensity_map, spectral_amplitudes, IntensityMode, Quadrature, Time};
use wgqed::lambert::lambert_w;
use wgqed::observables::{
    coherence_trace, cooperativity, linear_entropy_trace, non_markovianity, optimal_bic_delay, scan_bic_delay,
};
use wgqed::{GeneralInitialState, ModelParams, Parity};

use crate::config::{ConfigError, MapMode, Method, RunConfig, Scenario, StateChoice};
use crate::output::{prepare_dir, write_manifest, write_table, RunManifest, Table, MANIFEST_SCHEMA};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Compute { context: String, source: wgqed::Error },
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Process exit code: 1 config, 2 compute or I/O.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 1,
            RunError::Compute { source: wgqed::Error::Config(_), .. } => 1,
            RunError::Compute { .. } | RunError::Io { .. } => 2,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "config error: {e}"),
            RunError::Compute { context, source } => write!(f, "{context}: {source}"),
            RunError::Io { path, source } => write!(f, "{}: {source}", path.display()),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `output_dir` from the config.
    pub output_dir: Option<PathBuf>,
    pub quiet: bool,
}

pub const DEFAULT_OUTPUT_DIR: &str = "output";

type Res<T> = std::result::Result<T, RunError>;

fn ctx<T>(context: impl FnOnce() -> String, r: wgqed::Result<T>) -> Res<T> {
    r.map_err(|source| RunError::Compute { context: context(), source })
}

fn cfg_err(key: &str, reason: impl std::fmt::Display) -> RunError {
    RunError::Config(ConfigError(format!("{key}: {reason}")))
}

/// Tables and scalars produced by a scenario.
#[derive(Default)]
struct Products {
    tables: Vec<Table>,
    diagnostics: BTreeMap<String, f64>,
    scalars: BTreeMap<String, f64>,
    failures: usize,
}

/// Validates, runs the scenario, writes every artifact and the manifest.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Res<RunManifest> {
    config.validate()?;
    let dir = opts
        .output_dir
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));
    prepare_dir(&dir).map_err(|source| {
        RunError::Config(ConfigError(format!("output_dir: {} is not writable ({source})", dir.display())))
    })?;
    let start = Instant::now();
    let products = match config.scenario {
        Scenario::Amplitude => amplitude(config)?,
        Scenario::Intensity => intensity(config)?,
        Scenario::Cooperativity => cooperativity_sweep(config)?,
        Scenario::NonMarkovianity => non_markovian(config)?,
        Scenario::Entropy => entropy(config)?,
        Scenario::CriticalScan => critical_scan(config)?,
        Scenario::RateScan => rate_scan(config)?,
        Scenario::Validate => validate_suite(config)?,
    };
    finish(config, &dir, products, start, opts.quiet)
}

fn finish(config: &RunConfig, dir: &Path, products: Products, start: Instant, quiet: bool) -> Res<RunManifest> {
    let mut files = Vec::new();
    for table in &products.tables {
        let entry = write_table(dir, table).map_err(|source| RunError::Io { path: dir.join(table.name), source })?;
        if !quiet {
            eprintln!("wrote {} ({} rows)", dir.join(&entry.path).display(), entry.rows);
        }
        files.push(entry);
    }
    let manifest = RunManifest {
        schema_version: MANIFEST_SCHEMA,
        library: "wgqed",
        version: env!("CARGO_PKG_VERSION"),
        scenario: config.scenario.name(),
        status: if products.failures == 0 { "ok" } else { "validation_failed" },
        config: serde_json::to_value(config).expect("config serializes"),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        threads: rayon::current_num_threads(),
        diagnostics: products.diagnostics,
        scalars: products.scalars,
        files,
    };
    let path = write_manifest(dir, &manifest).map_err(|source| RunError::Io { path: dir.to_path_buf(), source })?;
    if !quiet {
        eprintln!("wrote {}", path.display());
    }
    Ok(manifest)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

fn tau_grid(config: &RunConfig, max: f64, points: usize) -> Vec<f64> {
    let g = &config.grid;
    linspace(0.0, g.tau_max.unwrap_or(max), g.tau_points.unwrap_or(points))
}

fn etas(config: &RunConfig) -> Vec<f64> {
    config.grid.etas.clone().unwrap_or_else(|| vec![config.model.eta])
}

fn betas(config: &RunConfig) -> Vec<f64> {
    config.grid.betas.clone().unwrap_or_else(|| vec![config.model.beta])
}

fn with_eta(config: &RunConfig, eta: f64) -> ModelParams {
    ModelParams { eta, ..config.params() }
}

fn parities(config: &RunConfig, key: &str) -> Res<&'static [Parity]> {
    match config.state() {
        StateChoice::Parities(p) => Ok(p),
        StateChoice::General(_) => Err(cfg_err(key, "this scenario needs state.parity, not state.theta")),
    }
}

fn dde_step(config: &RunConfig, eta: f64) -> f64 {
    config.solver.dde_step.unwrap_or(if eta > 0.0 { (eta / 64.0).min(0.005) } else { 0.005 })
}

fn branch_options(config: &RunConfig) -> BranchSumOptions {
    BranchSumOptions { n_max: config.solver.n_max, ..Default::default() }
}

fn quadrature(config: &RunConfig) -> Quadrature {
    let t = &config.tolerances;
    Quadrature { cutoff: t.cutoff, points: t.points, tolerance: Some(t.quadrature), n_max: config.solver.n_max }
}

fn bump(map: &mut BTreeMap<String, f64>, key: &str, value: f64) {
    let slot = map.entry(key.to_string()).or_insert(value);
    *slot = slot.max(value);
}

/// `amplitude.csv`: `eta,parity,solver,emitter,tau,re_c,im_c,abs2_c`.
fn amplitude(config: &RunConfig) -> Res<Products> {
    let tau = tau_grid(config, 10.0, 401);
    let method = config.solver.method;
    let mut out = Products::default();
    let mut table = Table::new("amplitude", &["eta", "parity", "solver", "emitter", "tau", "re_c", "im_c", "abs2_c"]);
    let states: Vec<(&'static str, GeneralInitialState, Option<Parity>)> = match config.state() {
        StateChoice::Parities(ps) => {
            ps.iter().map(|&p| (p.name(), GeneralInitialState::from_parity(p), Some(p))).collect()
        }
        StateChoice::General(g) => {
            if !matches!(method, Method::Dde | Method::All) {
                return Err(cfg_err("solver.method", "general states are integrated with dde only"));
            }
            vec![("general", g, None)]
        }
    };
    // Parity states have c_2 = +/- c_1.
    let push = |table: &mut Table, eta: f64, label: &'static str, solver: &'static str, t: &[f64], c1: &[Complex64], sign: f64| {
        for (emitter, s) in [(1usize, 1.0), (2, sign)] {
            for (k, &tk) in t.iter().enumerate() {
                let c = c1[k] * s;
                table.push(vec![eta.into(), label.into(), solver.into(), emitter.into(), tk.into(), c.re.into(), c.im.into(), c.norm_sqr().into()]);
            }
        }
    };
    for eta in etas(config) {
        let p = with_eta(config, eta);
        for &(label, init, parity) in &states {
            if let Some(parity) = parity {
                let sign = parity.sign();
                if eta == 0.0 {
                    let m = ctx(|| format!("markovian eta={eta}"), amplitude_markovian(&p, parity, &tau))?;
                    push(&mut table, eta, label, "markovian", &tau, &m.values, sign);
                } else {
                    let mut branch = None;
                    if matches!(method, Method::BranchSum | Method::All) {
                        let b = ctx(|| format!("branch sum eta={eta} {parity}"), amplitude_branch_sum(&p, parity, &tau, &branch_options(config)))?;
                        if let Some(t) = b.truncation {
                            bump(&mut out.diagnostics, "branch_sum_tail_estimate", t.tail_estimate);
                        }
                        push(&mut table, eta, label, "branch_sum", &tau, &b.values, sign);
                        branch = Some(b.values);
                    }
                    if matches!(method, Method::Series | Method::All) {
                        let s = ctx(|| format!("series eta={eta} {parity}"), amplitude_series(&p, parity, &tau))?;
                        if let Some(b) = &branch {
                            let gap = b.iter().zip(&s.values).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                            bump(&mut out.diagnostics, "max_branch_series_gap", gap);
                        }
                        push(&mut table, eta, label, "series", &tau, &s.values, sign);
                    }
                }
            }
            if matches!(method, Method::Dde | Method::All) {
                let tau_max = *tau.last().unwrap();
                let tr = ctx(|| format!("dde eta={eta}"), integrate_dde(&p, init, tau_max, dde_step(config, eta)))?;
                let stride = ((tr.tau.len() - 1) / (tau.len() - 1).max(1)).max(1);
                let idx: Vec<usize> = (0..tr.tau.len()).step_by(stride).collect();
                for (emitter, c) in [(1usize, &tr.c1), (2, &tr.c2)] {
                    for &k in &idx {
                        let v = c[k];
                        table.push(vec![eta.into(), label.into(), "dde".into(), emitter.into(), tr.tau[k].into(), v.re.into(), v.im.into(), v.norm_sqr().into()]);
                    }
                }
            }
        }
    }
    if config.grid.include_independent.unwrap_or(false) {
        let c = amplitude_independent(&tau);
        for &(label, _, parity) in &states {
            if let Some(parity) = parity {
                push(&mut table, f64::INFINITY, label, "independent", &tau, &c, parity.sign());
            }
        }
    }
    out.tables.push(table);
    Ok(out)
}

/// `intensity.csv`: `parity,tau,xi,intensity`; optional
/// `spectrum.csv`: `parity,tau,detuning,re_a,im_a,re_b,im_b,abs2_a`.
fn intensity(config: &RunConfig) -> Res<Products> {
    let p = config.params();
    if !(p.eta > 0.0) {
        return Err(cfg_err("model.eta", "intensity maps need eta > 0"));
    }
    let g = &config.grid;
    let tau = tau_grid(config, 8.0, 201);
    let xi = linspace(g.xi_min.unwrap_or(-4.0), g.xi_max.unwrap_or(4.0), g.xi_points.unwrap_or(201));
    let mode = match g.intensity_mode.unwrap_or_default() {
        MapMode::Envelope => IntensityMode::Envelope,
        MapMode::FullFringe => IntensityMode::FullFringe,
    };
    let mut out = Products::default();
    let mut table = Table::new("intensity", &["parity", "tau", "xi", "intensity"]);
    let ps = parities(config, "state")?;
    for &parity in ps {
        let map = ctx(|| format!("intensity map {parity}"), intensity_map(&p, parity, &xi, &tau, config.solver.n_max, mode))?;
        // Stored as I / I_0 with I_0 the map maximum.
        let (scaled, peak) = map.normalized();
        out.scalars.insert(format!("peak_intensity_{}", parity.name()), peak);
        for (i, &t) in tau.iter().enumerate() {
            for (j, &x) in xi.iter().enumerate() {
                table.push(vec![parity.name().into(), t.into(), x.into(), scaled[i * xi.len() + j].into()]);
            }
        }
    }
    out.tables.push(table);
    if let Some(n) = g.detuning_points {
        let dmax = g.detuning_max.unwrap_or(10.0);
        let detuning = linspace(-dmax, dmax, n);
        let mut spec = Table::new("spectrum", &["parity", "tau", "detuning", "re_a", "im_a", "re_b", "im_b", "abs2_a"]);
        let t_end = *tau.last().unwrap();
        for &parity in ps {
            for time in [Time::Finite(t_end), Time::Infinite] {
                let s = ctx(|| format!("spectral amplitudes {parity}"), spectral_amplitudes(&p, parity, time, &detuning, config.solver.n_max))?;
                let tv = match time {
                    Time::Finite(t) => t,
                    Time::Infinite => f64::INFINITY,
                };
                for ((&d, a), b) in detuning.iter().zip(&s.a).zip(&s.b) {
                    spec.push(vec![parity.name().into(), tv.into(), d.into(), a.re.into(), a.im.into(), b.re.into(), b.im.into(), a.norm_sqr().into()]);
                }
            }
            let norm = ctx(|| format!("guided norm {parity}"), guided_norm(&p, parity, Time::Finite(t_end), &quadrature(config)))?;
            out.scalars.insert(format!("guided_norm_{}", parity.name()), norm.value);
            bump(&mut out.diagnostics, "quadrature_refinement_change", norm.refinement_change.unwrap_or(0.0));
        }
        out.tables.push(spec);
    }
    Ok(out)
}

/// `cooperativity.csv`: `parity,beta,eta,value,extrapolation_change`.
fn cooperativity_sweep(config: &RunConfig) -> Res<Products> {
    let ps = parities(config, "state")?;
    let mut points = Vec::new();
    for &parity in ps {
        for beta in betas(config) {
            for eta in etas(config) {
                points.push((parity, beta, eta));
            }
        }
    }
    let n_max = config.solver.n_max;
    let values: Vec<Res<(f64, f64)>> = points
        .par_iter()
        .map(|&(parity, beta, eta)| {
            let p = ModelParams { beta, eta, ..config.params() };
            let c = ctx(|| format!("cooperativity beta={beta} eta={eta} {parity}"), cooperativity(&p, parity, n_max))?;
            Ok((c.value, c.metadata.get("extrapolation_change").copied().unwrap_or(0.0)))
        })
        .collect();
    let mut out = Products::default();
    let mut table = Table::new("cooperativity", &["parity", "beta", "eta", "value", "extrapolation_change"]);
    for (&(parity, beta, eta), v) in points.iter().zip(values) {
        let (value, change) = v?;
        bump(&mut out.diagnostics, "max_extrapolation_change", change);
        table.push(vec![parity.name().into(), beta.into(), eta.into(), value.into(), change.into()]);
    }
    out.tables.push(table);
    Ok(out)
}

/// `non_markovianity.csv`: `eta,value,argmax_theta,symmetric,antisymmetric`;
/// `coherence.csv`: `eta,theta,phi,tau,coherence`.
fn non_markovian(config: &RunConfig) -> Res<Products> {
    let tau = tau_grid(config, 20.0, 401);
    let states: Vec<GeneralInitialState> = match config.state() {
        StateChoice::Parities(ps) => ps.iter().map(|&p| GeneralInitialState::from_parity(p)).collect(),
        StateChoice::General(g) => vec![g],
    };
    let samples = config.tolerances.theta_samples;
    let list = etas(config);
    let scalars: Vec<Res<_>> = list
        .par_iter()
        .map(|&eta| {
            let p = with_eta(config, eta);
            ctx(|| format!("non-markovianity eta={eta}"), non_markovianity(&p, None, samples))
        })
        .collect();
    let mut out = Products::default();
    let mut nm = Table::new("non_markovianity", &["eta", "value", "argmax_theta", "symmetric", "antisymmetric"]);
    let mut coh = Table::new("coherence", &["eta", "theta", "phi", "tau", "coherence"]);
    for (&eta, s) in list.iter().zip(scalars) {
        let s = s?;
        let m = |k: &str| s.metadata.get(k).copied().unwrap_or(f64::NAN);
        nm.push(vec![eta.into(), s.value.into(), m("argmax_theta").into(), m("symmetric").into(), m("antisymmetric").into()]);
        let p = with_eta(config, eta);
        for state in &states {
            let tr = ctx(|| format!("coherence eta={eta}"), coherence_trace(&p, *state, &tau))?;
            for (t, c) in tau.iter().zip(&tr.coherence) {
                coh.push(vec![eta.into(), state.theta.into(), state.phi.into(), (*t).into(), (*c).into()]);
            }
        }
    }
    out.tables.push(nm);
    out.tables.push(coh);
    Ok(out)
}

/// `entropy.csv`: `eta,parity,tau,value`.
fn entropy(config: &RunConfig) -> Res<Products> {
    let tau = tau_grid(config, 20.0, 401);
    let ps = parities(config, "state")?;
    let mut out = Products::default();
    let mut table = Table::new("entropy", &["eta", "parity", "tau", "value"]);
    for eta in etas(config) {
        let p = with_eta(config, eta);
        for &parity in ps {
            let s = ctx(|| format!("linear entropy eta={eta} {parity}"), linear_entropy_trace(&p, parity, &tau))?;
            for (t, v) in tau.iter().zip(s) {
                table.push(vec![eta.into(), parity.name().into(), (*t).into(), v.into()]);
            }
        }
    }
    out.scalars.insert("optimal_bic_delay".into(), optimal_bic_delay());
    out.tables.push(table);
    Ok(out)
}

fn scan_betas(config: &RunConfig) -> Res<Vec<f64>> {
    let b = config.grid.betas.clone().unwrap_or_else(|| (1..=200).map(|k| k as f64 / 200.0).collect());
    if b[0] <= 0.0 {
        return Err(cfg_err("grid.betas", "scans need beta > 0"));
    }
    Ok(b)
}

/// `critical_scan.csv`: `beta,value` with `value = eta_c(beta)`.
fn critical_scan(config: &RunConfig) -> Res<Products> {
    let mut out = Products::default();
    let mut table = Table::new("critical_scan", &["beta", "value"]);
    for beta in scan_betas(config)? {
        let eta = ctx(|| format!("critical separation beta={beta}"), critical_separation(beta))?;
        table.push(vec![beta.into(), eta.into()]);
    }
    out.tables.push(table);
    Ok(out)
}

/// `peak_rate.csv`: `beta,eta,value` at `eta = eta_c(beta)`; with
/// `grid.etas`, also `rate_scan.csv`: `beta,eta,value`.
fn rate_scan(config: &RunConfig) -> Res<Products> {
    let betas = scan_betas(config)?;
    let mut out = Products::default();
    let mut peak = Table::new("peak_rate", &["beta", "eta", "value"]);
    for &beta in &betas {
        let eta = ctx(|| format!("critical separation beta={beta}"), critical_separation(beta))?;
        let rate = ctx(|| format!("peak rate beta={beta}"), max_instantaneous_rate(beta))?;
        peak.push(vec![beta.into(), eta.into(), rate.into()]);
    }
    out.tables.push(peak);
    if let Some(etas) = &config.grid.etas {
        let mut table = Table::new("rate_scan", &["beta", "eta", "value"]);
        for &beta in &betas {
            for &eta in etas {
                let p = ModelParams { beta, eta, ..config.params() };
                let r = ctx(|| format!("instantaneous rate beta={beta} eta={eta}"), instantaneous_rate(&p))?;
                table.push(vec![beta.into(), eta.into(), r.rate.into()]);
            }
        }
        out.tables.push(table);
    }
    out.scalars.insert("beta_for_peak_rate_2".into(), beta_for_max_rate(2.0).expect("rate 2 is admissible"));
    out.scalars.insert("peak_rate_beta_1".into(), max_instantaneous_rate(1.0).expect("beta 1 is admissible"));
    Ok(out)
}

fn c<T>(what: &str, r: wgqed::Result<T>) -> Res<T> {
    ctx(|| format!("validate: {what}"), r)
}

struct Check {
    name: &'static str,
    deviation: f64,
    tolerance: f64,
}

fn gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Cross-solver oracle suite. `validation.csv`: `check,value,tolerance,passed`.
fn validate_suite(config: &RunConfig) -> Res<Products> {
    let oracle = config.tolerances.oracle;
    let tau: Vec<f64> = linspace(0.0, 10.0, 401);
    let mut checks = Vec::new();

    let eta_c = c("critical separation", critical_separation(1.0))?;
    let w = c("lambert", lambert_w(0, Complex64::new(1.0 / E, 0.0)))?;
    checks.push(Check { name: "critical_separation", deviation: (eta_c - 2.0 * w.re).abs(), tolerance: 1e-14 });

    let mut triangle: f64 = 0.0;
    for beta in [0.5, 1.0] {
        for eta in [0.3, eta_c, 2.0] {
            let p = ModelParams::new(beta, eta).expect("valid");
            for parity in Parity::BOTH {
                let b = c("branch sum", amplitude_branch_sum(&p, parity, &tau, &BranchSumOptions::default()))?.values;
                let s = c("series", amplitude_series(&p, parity, &tau))?.values;
                let d = c("dde", integrate_dde(&p, GeneralInitialState::from_parity(parity), 10.0, (eta / 64.0).min(0.005)))?;
                let bd = c("branch sum", amplitude_branch_sum(&p, parity, &d.tau, &BranchSumOptions::default()))?.values;
                triangle = triangle.max(gap(&b, &s)).max(gap(&bd, &d.c1));
            }
        }
    }
    checks.push(Check { name: "solver_triangle", deviation: triangle, tolerance: oracle });

    let mut dicke: f64 = 0.0;
    for parity in Parity::BOTH {
        let p = ModelParams::new(1.0, 1e-9).expect("valid");
        let d = c("dde", integrate_dde(&p, GeneralInitialState::from_parity(parity), 10.0, 0.01))?;
        let rate = 1.0 + parity.sign();
        for (t, v) in d.tau.iter().zip(&d.c1) {
            dicke = dicke.max((v - (-0.5 * rate * t).exp() / 2f64.sqrt()).norm());
        }
    }
    checks.push(Check { name: "dicke_limit", deviation: dicke, tolerance: oracle });

    let mut budget: f64 = 0.0;
    let p = ModelParams::new(1.0, 0.5).expect("valid");
    for parity in Parity::BOTH {
        let g = c("guided norm", guided_norm(&p, parity, Time::Finite(5.0), &quadrature(config)))?;
        let v = c("branch sum", amplitude_branch_sum(&p, parity, &[5.0], &BranchSumOptions::default()))?.values[0];
        budget = budget.max((g.value + 2.0 * v.norm_sqr() - 1.0).abs());
    }
    checks.push(Check { name: "unitarity_budget", deviation: budget, tolerance: 1e-3 });

    let p = ModelParams::new(1.0, 1.0).expect("valid");
    let v = c("branch sum", amplitude_branch_sum(&p, Parity::Sub, &[40.0], &BranchSumOptions::default()))?.values[0];
    checks.push(Check { name: "subradiant_plateau", deviation: (2.0 * v.norm_sqr() - 4.0 / 9.0).abs(), tolerance: 1e-4 });

    let mut coop: f64 = 0.0;
    let p = ModelParams::new(0.5, 1.0).expect("valid");
    for parity in Parity::BOTH {
        let closed = c("cooperativity", cooperativity(&p, parity, None))?.value;
        let g = c("guided norm", guided_norm(&p, parity, Time::Infinite, &quadrature(config)))?.value;
        coop = coop.max((closed - g / (1.0 - p.beta)).abs() / closed.max(1.0));
    }
    checks.push(Check { name: "cooperativity_quadrature", deviation: coop, tolerance: 1e-3 });

    let scanned = c("bic scan", scan_bic_delay(0.3, 1.5))?;
    checks.push(Check { name: "bic_scan", deviation: (scanned - optimal_bic_delay()).abs(), tolerance: 1e-3 });

    let mut lambert: f64 = 0.0;
    for k in 0..2000 {
        // Deterministic spiral through branches, radii and angles.
        let n = (k % 7) as i64 - 3;
        let r = 10f64.powf(-6.0 + 10.0 * ((k as f64 * 0.618_033_988_749_895) % 1.0));
        let z = Complex64::from_polar(r, PI * (2.0 * ((k as f64 * 0.414_213_562_373_095) % 1.0) - 1.0));
        let w = c("lambert", lambert_w(n, z))?;
        lambert = lambert.max((w * w.exp() - z).norm() / r.max(1.0));
    }
    checks.push(Check { name: "lambert_residual", deviation: lambert, tolerance: 1e-12 });

    let mut out = Products::default();
    let mut table = Table::new("validation", &["check", "value", "tolerance", "passed"]);
    for ch in &checks {
        let passed = ch.deviation <= ch.tolerance;
        out.failures += usize::from(!passed);
        out.diagnostics.insert(ch.name.to_string(), ch.deviation);
        table.push(vec![ch.name.into(), ch.deviation.into(), ch.tolerance.into(), if passed { "true" } else { "false" }.into()]);
    }
    out.scalars.insert("failed_checks".into(), out.failures as f64);
    out.tables.push(table);
    Ok(out)
}

/// Config used by the `validate` subcommand.
pub fn validation_config() -> RunConfig {
    crate::config::parse_config("scenario = \"validate\"\n[model]\nbeta = 1.0\neta = 1.0\n").expect("builtin config")
}
