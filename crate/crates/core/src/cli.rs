//! The `zeno` command line. Every subcommand writes its data files and a
//! `manifest.json` into `--out`.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use crate::analytics::{free_evolution_fidelity, perturbative_ground_energy, preparation_stats};
use crate::dynamics::{bloch::default_bloch_dt, integrator, master::default_master_dt};
use crate::dynamics::{
    bloch_evolution, efficiency_sweep, free_evolution, jump_ensemble, nonselective_decay_rate,
    nonselective_fidelity_closed, null_trajectory, pair_count, reduced_master_equation, BlochState,
    EnsembleOptions, Model, ReducedDensityState,
};
use crate::error::{Error, Result};
use crate::io::{
    read_csv, write_csv, write_json, write_svg, RunManifest, Series, Settings, Table, TOOL_VERSION,
};
use crate::oracle::{
    build_bose_hubbard, default_oracle_dt, exact_evolve_fidelity, exact_ground_state, fock_basis,
    fock_dimension, perturbative_fock_state, FOCK_CAP,
};
use crate::register::{
    build_basis, build_free_hamiltonian, fidelity, perturbative_ground_state, Layout, StateVector,
};
use crate::units::{derive_params, regime_check, DerivedParams, RegimeReport};

#[derive(Debug, Parser)]
#[command(
    name = "zeno",
    version,
    about = "Measurement-assisted register initialization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Derived parameters and regime checks.
    Params,
    /// Perturbative ground state of the free register.
    Ground,
    /// Null-result trajectory from the ground state.
    Trajectory,
    /// Jump Monte Carlo ensemble.
    Ensemble,
    /// Nonselective measurement: reduced master equation, Bloch system and
    /// closed-form decay.
    Nonselective,
    /// Target fidelity for imperfect detectors.
    Efficiency,
    /// Free evolution from the unit-filled state: closed form, register
    /// model and exact reference.
    Free,
    /// Exact Bose-Hubbard reference on a small lattice.
    Oracle,
    /// Renders a CSV as an SVG line plot.
    Plot {
        /// CSV with the x values in the first column.
        input: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Flags {
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Register size (odd).
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long = "u-over-j", global = true)]
    pub u_over_j: Option<String>,
    /// End time in units of 1/U; `x/J` is also accepted.
    #[arg(long = "t-end", global = true)]
    pub t_end: Option<String>,
    #[arg(long, global = true)]
    pub dt: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, global = true)]
    pub traj: Option<String>,
    /// Detector efficiency; `efficiency` sweeps {1.0, 0.9, 0.8} without it.
    #[arg(long, global = true)]
    pub eta: Option<String>,
    /// `full` or `eliminated`.
    #[arg(long, global = true)]
    pub model: Option<String>,
    /// `open` or `periodic`, for the exact reference.
    #[arg(long, global = true)]
    pub boundary: Option<String>,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Treat regime violations as errors.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Report times in seconds instead of 1/U.
    #[arg(long, global = true)]
    pub hz: bool,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Params => "params",
            Command::Ground => "ground",
            Command::Trajectory => "trajectory",
            Command::Ensemble => "ensemble",
            Command::Nonselective => "nonselective",
            Command::Efficiency => "efficiency",
            Command::Free => "free",
            Command::Oracle => "oracle",
            Command::Plot { .. } => "plot",
        }
    }
}

/// Exit status for an error: 2 for configuration problems, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => 2,
        _ => 1,
    }
}

/// Defaults < config file < flags.
pub fn resolve_settings(flags: &Flags) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &flags.config {
        s.apply_file(path)?;
    }
    let pairs = [
        ("register_size", &flags.n),
        ("u_over_j", &flags.u_over_j),
        ("t_end", &flags.t_end),
        ("dt", &flags.dt),
        ("seed", &flags.seed),
        ("traj", &flags.traj),
        ("detector_efficiency", &flags.eta),
        ("model", &flags.model),
        ("boundary", &flags.boundary),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            s.set(key, v)?;
        }
    }
    Ok(s)
}

/// Parameters after applying a `u_over_j` override.
pub fn resolve_params(s: &Settings) -> Result<DerivedParams> {
    let p = derive_params(&s.physical).map_err(|e| match e {
        Error::Domain(msg) => Error::Config {
            key: "physical".into(),
            msg,
        },
        other => other,
    })?;
    Ok(match s.u_over_j {
        Some(r) => p.with_u_over_j(r),
        None => p,
    })
}

/// The fixed-key parameter report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamsReport {
    pub u_hz: f64,
    pub j_over_u: f64,
    pub delta_over_u: f64,
    pub kappa_over_u: f64,
    pub omega_m_over_u: f64,
    pub gamma_m_over_u: f64,
    pub vc_over_u: f64,
    pub s_a: f64,
    pub strength: f64,
    pub p_h: f64,
}

impl ParamsReport {
    pub fn new(p: &DerivedParams, r: &RegimeReport) -> Self {
        Self {
            u_hz: p.u_hz,
            j_over_u: p.j,
            delta_over_u: p.delta,
            kappa_over_u: p.kappa,
            omega_m_over_u: p.omega_m,
            gamma_m_over_u: p.gamma_m,
            vc_over_u: p.vc_abs,
            s_a: p.s_a,
            strength: r.strength,
            p_h: r.hole_prob,
        }
    }
}

struct Run {
    settings: Settings,
    params: Option<DerivedParams>,
    out: PathBuf,
    hz: bool,
    manifest: RunManifest,
}

impl Run {
    fn params(&self) -> &DerivedParams {
        self.params.as_ref().expect("subcommand needs parameters")
    }

    fn n(&self) -> usize {
        self.settings.physical.register_size
    }

    fn t_end(&self, default: f64) -> Result<f64> {
        let r = self
            .params
            .as_ref()
            .map_or(f64::INFINITY, DerivedParams::u_over_j);
        self.settings.t_end_or(default, r)
    }

    fn time_unit(&self) -> &'static str {
        if self.hz {
            "s"
        } else {
            "1/U"
        }
    }

    fn time(&self, t: f64) -> f64 {
        if self.hz {
            t / (2.0 * PI * self.params().u_hz)
        } else {
            t
        }
    }

    fn time_column(&self, times: &[f64]) -> (&'static str, Vec<f64>) {
        let header = if self.hz { "t_s" } else { "t_over_U" };
        (header, times.iter().map(|&t| self.time(t)).collect())
    }

    fn table(&self, times: &[f64]) -> Table {
        let (h, col) = self.time_column(times);
        Table::new().with(h, col)
    }

    fn sidecar(&self, extra: Value) -> Value {
        let mut v = json!({
            "subcommand": self.manifest.subcommand,
            "seed": self.manifest.seed,
            "provenance": TOOL_VERSION,
            "time_unit": self.time_unit(),
        });
        if let Some(p) = &self.params {
            let r = regime_check(
                p,
                self.n(),
                self.settings.physical.atom_number,
                self.settings.physical.hole_threshold,
            )
            .ok();
            if let Some(r) = r {
                v["params"] = serde_json::to_value(ParamsReport::new(p, &r)).unwrap();
            }
        }
        if let (Value::Object(base), Value::Object(more)) = (&mut v, extra) {
            base.extend(more);
        }
        v
    }

    fn write_csv(&mut self, name: &str, table: &Table) -> Result<()> {
        write_csv(&self.out.join(name), table)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<()> {
        write_json(&self.out.join(name), value)?;
        self.manifest.outputs.push(name.to_string());
        Ok(())
    }
}

/// Worker count from `ZENO_THREADS`, if set and positive.
pub fn env_workers() -> Option<usize> {
    std::env::var("ZENO_THREADS")
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&w| w > 0)
}

/// Runs a parsed command line. Warnings go to stderr.
pub fn run(cli: &Cli) -> Result<()> {
    let settings = resolve_settings(&cli.flags)?;
    let needs_params = !matches!(cli.command, Command::Plot { .. });
    let params = if needs_params {
        Some(resolve_params(&settings)?)
    } else {
        None
    };
    if let Some(p) = &params {
        let phys = &settings.physical;
        let report = regime_check(p, phys.register_size, phys.atom_number, phys.hole_threshold)?;
        let violations = report.violations();
        if !violations.is_empty() {
            let msg = format!("regime violation: {}", violations.join(", "));
            if cli.flags.strict {
                return Err(Error::Domain(msg));
            }
            eprintln!("warning: {msg}");
        }
    }
    std::fs::create_dir_all(&cli.flags.out)?;
    let seed = matches!(cli.command, Command::Ensemble).then_some(settings.seed);
    let mut run = Run {
        manifest: RunManifest::new(cli.command.name(), &settings, seed),
        settings,
        params,
        out: cli.flags.out.clone(),
        hz: cli.flags.hz,
    };
    match &cli.command {
        Command::Params => cmd_params(&mut run)?,
        Command::Ground => cmd_ground(&mut run)?,
        Command::Trajectory => cmd_trajectory(&mut run)?,
        Command::Ensemble => cmd_ensemble(&mut run)?,
        Command::Nonselective => cmd_nonselective(&mut run)?,
        Command::Efficiency => cmd_efficiency(&mut run, cli.flags.eta.is_some())?,
        Command::Free => cmd_free(&mut run)?,
        Command::Oracle => cmd_oracle(&mut run)?,
        Command::Plot { input } => cmd_plot(&mut run, input)?,
    }
    run.manifest.write(&run.out)
}

fn cmd_params(run: &mut Run) -> Result<()> {
    let p = run.params().clone();
    let phys = &run.settings.physical;
    let report = regime_check(
        &p,
        phys.register_size,
        phys.atom_number,
        phys.hole_threshold,
    )?;
    let mut v = serde_json::to_value(ParamsReport::new(&p, &report))?;
    v["regime"] = serde_json::to_value(&report)?;
    v["provenance"] = json!(TOOL_VERSION);
    println!("{}", serde_json::to_string_pretty(&v)?);
    run.write_json("params.json", &v)
}

fn cmd_ground(run: &mut Run) -> Result<()> {
    let p = run.params().clone();
    let n = run.n();
    let basis = build_basis(n)?;
    let ground = perturbative_ground_state(&basis, &p)?;
    let f = fidelity(&ground)?;
    let t_prep = preparation_stats(&p, n).ok().map(|s| run.time(s.t_prep));
    let v = run.sidecar(json!({
        "n": n,
        "fidelity": f,
        "p_fail": 1.0 - f,
        "t_prep": t_prep,
        "energy_estimate": perturbative_ground_energy(n, p.j, 1.0)?,
        "state": ground,
    }));
    run.write_json("ground.json", &v)
}

fn model_for(run: &Run) -> Model {
    run.settings
        .model
        .unwrap_or_else(|| Model::default_for(run.n()))
}

fn cmd_trajectory(run: &mut Run) -> Result<()> {
    let p = run.params().clone();
    let model = model_for(run);
    let t_end = run.t_end(30.0)?;
    let traj = null_trajectory(&p, run.n(), model, t_end, run.settings.dt)?;
    let s = &traj.series;
    let table = run
        .table(&s.times)
        .with("fidelity", s.fidelity.clone())
        .with("norm_sq", s.norm_sq.clone());
    run.write_csv("trajectory.csv", &table)?;
    let v = run.sidecar(json!({
        "n": run.n(),
        "model": model,
        "t_end": run.time(t_end),
        "t_sat": run.time(traj.t_sat),
        "initial_fidelity": s.fidelity[0],
        "final_fidelity": s.final_fidelity(),
    }));
    run.write_json("trajectory.json", &v)
}

fn cmd_ensemble(run: &mut Run) -> Result<()> {
    let p = run.params().clone();
    let model = model_for(run);
    let t_end = run.t_end(30.0)?;
    let opts = EnsembleOptions {
        model,
        dt: run.settings.dt,
        workers: env_workers(),
        ..Default::default()
    };
    let r = jump_ensemble(
        &p,
        run.n(),
        run.settings.traj,
        run.settings.seed,
        t_end,
        &opts,
    )?;
    let table = run
        .table(&r.times)
        .with("survival", r.survival.clone())
        .with("conditional_fidelity", r.conditional_fidelity.clone())
        .with("target_population", r.target_population());
    run.write_csv("ensemble.csv", &table)?;
    let edges: Vec<f64> = r.histogram_edges.iter().map(|&t| run.time(t)).collect();
    let v = run.sidecar(json!({
        "n": run.n(),
        "model": model,
        "n_traj": r.n_traj,
        "t_end": run.time(t_end),
        "failures": r.failures(),
        "histogram_edges": edges,
        "histogram_counts": r.histogram_counts,
    }));
    run.write_json("ensemble.json", &v)
}

fn cmd_nonselective(run: &mut Run) -> Result<()> {
    let p = run.params().clone();
    let n = run.n();
    let t_end = run.t_end(1000.0)?;
    let dt = run
        .settings
        .dt
        .unwrap_or_else(|| default_master_dt(&p).min(default_bloch_dt(&p)));
    let basis = build_basis(n)?;
    let rho0 = ReducedDensityState::from_state(&StateVector::target(&basis, Layout::PairOnly));
    let master = reduced_master_equation(&p, n, &rho0, t_end, dt, integrator::MAX_SAMPLES)?;
    let pairs = pair_count(n);
    let bloch = bloch_evolution(&p, pairs, BlochState::TARGET, t_end, dt)?;
    let closed: Vec<f64> = master
        .times
        .iter()
        .map(|&t| nonselective_fidelity_closed(&p, pairs, 1.0, t))
        .collect();
    let table = run
        .table(&master.times)
        .with("rho_tt_master", master.rho_tt())
        .with("rho_tt_bloch", bloch.rho_tt())
        .with("rho_tt_closed", closed);
    run.write_csv("nonselective.csv", &table)?;
    let rate = nonselective_decay_rate(&p, pairs);
    let rate = if run.hz {
        rate * 2.0 * PI * p.u_hz
    } else {
        rate
    };
    let v = run.sidecar(json!({
        "n": n,
        "pairs": pairs,
        "t_end": run.time(t_end),
        "decay_rate": rate,
    }));
    run.write_json("nonselective.json", &v)
}

fn cmd_efficiency(run: &mut Run, single: bool) -> Result<()> {
    let p = run.params().clone();
    let etas: Vec<f64> = if single {
        vec![run.settings.physical.detector_efficiency]
    } else {
        vec![1.0, 0.9, 0.8]
    };
    let model = model_for(run);
    let t_end = run.t_end(100.0)?;
    let sweep = efficiency_sweep(&p, run.n(), &etas, t_end, model, run.settings.dt)?;
    let mut table = run.table(&sweep.times);
    for c in &sweep.curves {
        table.push(format!("fidelity_eta_{:.2}", c.eta), c.simulated.clone());
    }
    for c in &sweep.curves {
        table.push(format!("closed_eta_{:.2}", c.eta), c.closed.clone());
    }
    run.write_csv("efficiency.csv", &table)?;
    let plateaus: Vec<Value> = sweep
        .curves
        .iter()
        .map(
            |c| json!({"eta": c.eta, "final": c.simulated.last(), "closed_final": c.closed.last()}),
        )
        .collect();
    let v = run.sidecar(json!({
        "n": run.n(),
        "model": model,
        "t_end": run.time(t_end),
        "plateaus": plateaus,
    }));
    run.write_json("efficiency.json", &v)
}

fn cmd_free(run: &mut Run) -> Result<()> {
    let p = run.params().clone();
    let n = run.n();
    let t_end = run.t_end(p.u_over_j())?;
    let basis = build_basis(n)?;
    let h = build_free_hamiltonian(&basis, &p);
    let mut dt = run
        .settings
        .dt
        .unwrap_or_else(|| 0.2 * integrator::max_step(&h).min(integrator::STEP_CAP));
    let fock_dim = fock_dimension(n, n);
    let fock = if fock_dim <= FOCK_CAP {
        let fb = fock_basis(n, n, run.settings.boundary)?;
        if run.settings.dt.is_none() {
            dt = dt.min(default_oracle_dt(&build_bose_hubbard(
                &fb, p.j, 1.0, p.delta,
            )));
        }
        Some(fb)
    } else {
        None
    };
    let restricted = free_evolution(
        &p,
        &StateVector::target(&basis, Layout::Full),
        t_end,
        Some(dt),
    )?;
    let closed: Vec<f64> = restricted
        .times
        .iter()
        .map(|&t| free_evolution_fidelity(pair_count(n), p.j, 1.0, p.delta, t))
        .collect();
    let mut table = run
        .table(&restricted.times)
        .with("closed_form", closed)
        .with("restricted", restricted.fidelity);
    if let Some(fb) = &fock {
        let exact = exact_evolve_fidelity(fb, p.j, 1.0, p.delta, t_end, Some(dt))?;
        table.push("oracle", exact.fidelity);
    }
    run.write_csv("free.csv", &table)?;
    let v = run.sidecar(json!({
        "n": n,
        "t_end": run.time(t_end),
        "boundary": run.settings.boundary,
        "basis_dim": fock.as_ref().map(|b| b.dim()),
    }));
    run.write_json("free.json", &v)
}

fn cmd_oracle(run: &mut Run) -> Result<()> {
    let p = run.params().clone();
    let n = run.n();
    let boundary = run.settings.boundary;
    let t_end = run.t_end(p.u_over_j())?;
    let fb = fock_basis(n, n, boundary)?;
    let h = build_bose_hubbard(&fb, p.j, 1.0, p.delta);
    let ground = exact_ground_state(&h)?;
    let offset = h
        .get(
            fb.unit_filled_index().unwrap_or(0),
            fb.unit_filled_index().unwrap_or(0),
        )
        .re;
    let trial = perturbative_fock_state(&fb, p.j, 1.0, p.delta)?;
    let variational = h.expectation(&trial).re - offset;
    let bonds = fb.bonds().len();
    let series = exact_evolve_fidelity(&fb, p.j, 1.0, p.delta, t_end, run.settings.dt)?;
    let table = run
        .table(&series.times)
        .with("fidelity", series.fidelity.clone())
        .with("norm_sq", series.norm_sq.clone());
    run.write_csv("oracle.csv", &table)?;
    let v = run.sidecar(json!({
        "n": n,
        "boundary": boundary,
        "basis_dim": fb.dim(),
        "t_end": run.time(t_end),
        "ground_energy": ground.energy - offset,
        "ground_residual": ground.residual,
        "variational_energy": variational,
        "perturbative_energy": -4.0 * bonds as f64 * p.j * p.j,
        "ground_overlap_unit_filled": fb.unit_filled_index().map(|i| ground.vector[i].norm_sqr()),
    }));
    run.write_json("oracle.json", &v)
}

fn cmd_plot(run: &mut Run, input: &Path) -> Result<()> {
    let table = read_csv(input).map_err(|e| match e {
        Error::Io(io) => Error::Config {
            key: "input".into(),
            msg: format!("{}: {io}", input.display()),
        },
        other => other,
    })?;
    if table.headers.len() < 2 {
        return Err(Error::Domain(
            "plot needs an x column and at least one series".into(),
        ));
    }
    let x = table.columns[0].clone();
    let series: Vec<Series> = table.headers[1..]
        .iter()
        .zip(&table.columns[1..])
        .map(|(name, y)| Series::new(name.clone(), x.clone(), y.clone()))
        .collect();
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let name = format!("{stem}.svg");
    write_svg(&run.out.join(&name), &series, &table.headers[0], "value")?;
    run.manifest.outputs.push(name);
    Ok(())
}
