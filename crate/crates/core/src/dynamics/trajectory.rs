//! Null-result trajectories and the jump Monte Carlo ensemble.
//!
//! A jump is a molecular decay: the products leave the lattice, so the
//! trajectory ends as a failed preparation. With a single jump channel every
//! trajectory follows the same no-jump path until its jump, which lets the
//! ensemble share one integration of that path across all trajectories.

use num_complex::Complex64;
use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::integrator::{self, propagate_with, TrajectorySeries, MAX_SAMPLES};
use crate::error::{Error, Result};
use crate::register::{
    build_basis, build_effective_hamiltonian, build_eliminated_hamiltonian,
    perturbative_ground_state, RestrictedBasis, StateVector,
};
use crate::sparse::SparseOperator;
use crate::units::DerivedParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    /// Explicit molecular states decaying at γ_M.
    Full,
    /// Molecular states adiabatically eliminated into κ_j.
    Eliminated,
}

impl Model {
    /// Eliminated above 50 sites, full otherwise.
    pub fn default_for(n: usize) -> Self {
        if n > 50 {
            Model::Eliminated
        } else {
            Model::Full
        }
    }
}

impl std::str::FromStr for Model {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "full" => Ok(Model::Full),
            "eliminated" => Ok(Model::Eliminated),
            other => Err(format!(
                "unknown model `{other}` (expected full or eliminated)"
            )),
        }
    }
}

/// Default step: `0.02/γ_M` for the full model, `0.01/(U+|V_c|)` for the
/// eliminated one, never above the integrator's stability cap.
pub fn default_dt(model: Model, p: &DerivedParams, h: &SparseOperator) -> f64 {
    let dt = match model {
        Model::Full if p.gamma_m > 0.0 => 0.02 / p.gamma_m,
        _ => 0.01 / (1.0 + p.vc_abs),
    };
    dt.min(integrator::max_step(h))
}

/// Null-result Hamiltonian and the perturbative ground state in the layout
/// it acts on.
pub fn null_problem(
    basis: &RestrictedBasis,
    p: &DerivedParams,
    model: Model,
) -> Result<(SparseOperator, StateVector)> {
    let ground = perturbative_ground_state(basis, p)?;
    Ok(match model {
        Model::Full => (build_effective_hamiltonian(basis, p), ground),
        Model::Eliminated => (
            build_eliminated_hamiltonian(basis, p).op,
            ground.to_pair_only(),
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullTrajectory {
    pub series: TrajectorySeries,
    /// First sample time with F ≥ 0.999·F(t_end).
    pub t_sat: f64,
    pub final_state: StateVector,
}

/// Saturation time: first time the fidelity reaches 0.999 of its final value.
pub fn saturation_time(series: &TrajectorySeries) -> f64 {
    let target = 0.999 * series.final_fidelity();
    series
        .times
        .iter()
        .zip(&series.fidelity)
        .find(|(_, &f)| f >= target)
        .map(|(&t, _)| t)
        .unwrap_or(f64::NAN)
}

/// Conditioned evolution from the perturbative ground state given that no
/// molecular decay is detected.
pub fn null_trajectory(
    p: &DerivedParams,
    n: usize,
    model: Model,
    t_end: f64,
    dt: Option<f64>,
) -> Result<NullTrajectory> {
    let basis = build_basis(n)?;
    let (h, psi0) = null_problem(&basis, p, model)?;
    let dt = dt.unwrap_or_else(|| default_dt(model, p, &h));
    let mut psi = psi0.into_amplitudes();
    let series = propagate_with(&h, &mut psi, 0, t_end, dt, MAX_SAMPLES, |_, _| {})?;
    let t_sat = saturation_time(&series);
    Ok(NullTrajectory {
        series,
        t_sat,
        final_state: StateVector::new(&basis, psi)?,
    })
}

#[derive(Debug, Clone)]
pub struct EnsembleOptions {
    pub model: Model,
    pub dt: Option<f64>,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    pub histogram_bins: usize,
}

impl Default for EnsembleOptions {
    fn default() -> Self {
        Self {
            model: Model::Eliminated,
            dt: None,
            workers: None,
            histogram_bins: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub n_traj: usize,
    pub seed: u64,
    pub times: Vec<f64>,
    /// Fraction of trajectories without a jump up to each time.
    pub survival: Vec<f64>,
    /// Mean conditioned fidelity of the surviving trajectories.
    pub conditional_fidelity: Vec<f64>,
    /// Per-trajectory jump time, in trajectory index order.
    pub jump_times: Vec<Option<f64>>,
    /// Lower bin edges and counts of jump times over `[0, t_end]`.
    pub histogram_edges: Vec<f64>,
    pub histogram_counts: Vec<usize>,
}

impl EnsembleResult {
    /// Unconditioned target population: survivors contribute their
    /// conditioned fidelity, failures contribute zero.
    pub fn target_population(&self) -> Vec<f64> {
        self.survival
            .iter()
            .zip(&self.conditional_fidelity)
            .map(|(s, f)| s * f)
            .collect()
    }

    pub fn failures(&self) -> usize {
        self.jump_times.iter().filter(|j| j.is_some()).count()
    }
}

/// Random stream for trajectory `index`: ChaCha8 keyed by the ensemble seed
/// with the trajectory index as stream id.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// No-jump norm at every integration step.
struct NullRecord {
    h: f64,
    norm_sq: Vec<f64>,
}

impl NullRecord {
    /// Waiting-time rule: the jump happens when ‖ψ‖² first drops to `r`.
    /// The crossing inside a step is located by log-linear interpolation.
    fn jump_time(&self, r: f64) -> Option<f64> {
        let k = self.norm_sq.partition_point(|&n| n > r);
        if k >= self.norm_sq.len() {
            return None;
        }
        if k == 0 {
            return Some(0.0);
        }
        let (a, b) = (self.norm_sq[k - 1].ln(), self.norm_sq[k].ln());
        let frac = if a > b {
            ((a - r.ln()) / (a - b)).clamp(0.0, 1.0)
        } else {
            1.0
        };
        Some((k as f64 - 1.0 + frac) * self.h)
    }
}

/// Jump Monte Carlo with the waiting-time algorithm. Trajectory `i` draws its
/// threshold from [`trajectory_rng`]`(seed, i)`, so the result depends only on
/// `(seed, n_traj, parameters)` and never on the worker count.
pub fn jump_ensemble(
    p: &DerivedParams,
    n: usize,
    n_traj: usize,
    seed: u64,
    t_end: f64,
    opts: &EnsembleOptions,
) -> Result<EnsembleResult> {
    if n_traj == 0 {
        return Err(Error::Domain(
            "ensemble needs at least one trajectory".into(),
        ));
    }
    let basis = build_basis(n)?;
    let (h, psi0) = null_problem(&basis, p, opts.model)?;
    let dt = opts.dt.unwrap_or_else(|| default_dt(opts.model, p, &h));
    let mut psi = psi0.into_amplitudes();

    let plan = integrator::StepPlan::new(t_end, dt, MAX_SAMPLES);
    let mut norm_sq = Vec::with_capacity(plan.steps + 1);
    norm_sq.push(psi.iter().map(Complex64::norm_sqr).sum::<f64>());
    let null = propagate_with(&h, &mut psi, 0, t_end, dt, MAX_SAMPLES, |_, y| {
        norm_sq.push(y.iter().map(Complex64::norm_sqr).sum());
    })?;
    let record = NullRecord { h: plan.h, norm_sq };

    let draw = |i: usize| -> Option<f64> {
        let mut rng = trajectory_rng(seed, i as u64);
        let r: f64 = Open01.sample(&mut rng);
        record.jump_time(r)
    };
    let jump_times: Vec<Option<f64>> = match opts.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?
            .install(|| (0..n_traj).into_par_iter().map(draw).collect()),
        None => (0..n_traj).into_par_iter().map(draw).collect(),
    };

    let mut sorted: Vec<f64> = jump_times.iter().flatten().copied().collect();
    sorted.sort_by(f64::total_cmp);
    let survival: Vec<f64> = null
        .times
        .iter()
        .map(|&t| {
            let jumped = sorted.partition_point(|&j| j <= t);
            (n_traj - jumped) as f64 / n_traj as f64
        })
        .collect();

    let bins = opts.histogram_bins.max(1);
    let width = if t_end > 0.0 {
        t_end / bins as f64
    } else {
        1.0
    };
    let histogram_edges: Vec<f64> = (0..bins).map(|b| b as f64 * width).collect();
    let mut histogram_counts = vec![0; bins];
    for &j in &sorted {
        histogram_counts[((j / width) as usize).min(bins - 1)] += 1;
    }

    Ok(EnsembleResult {
        n_traj,
        seed,
        times: null.times,
        survival,
        conditional_fidelity: null.fidelity,
        jump_times,
        histogram_edges,
        histogram_counts,
    })
}
