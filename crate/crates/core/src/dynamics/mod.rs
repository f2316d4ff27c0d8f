//! Time evolution of the register: conditioned trajectories, the jump
//! ensemble, the reduced master equation and the pseudo-Bloch reduction.

pub mod bloch;
pub mod integrator;
pub mod master;
pub mod trajectory;

pub use bloch::{
    bloch_evolution, finite_efficiency_fidelity, nonselective_decay_rate,
    nonselective_fidelity_closed, pair_count, BlochSeries, BlochState,
};
pub use integrator::{propagate, StepPlan, TrajectorySeries};
pub use master::{reduced_master_equation, MasterSeries, ReducedDensityState};
pub use trajectory::{
    jump_ensemble, null_trajectory, saturation_time, EnsembleOptions, EnsembleResult, Model,
    NullTrajectory,
};

use crate::error::Result;
use crate::register::{build_basis, build_free_hamiltonian, StateVector};
use crate::sparse::SparseOperator;
use crate::units::DerivedParams;

/// Evolves `psi0` under an arbitrary operator on its layout.
pub fn evolve(
    h: &SparseOperator,
    psi0: &StateVector,
    t_end: f64,
    dt: f64,
) -> Result<(TrajectorySeries, StateVector)> {
    let basis = build_basis(psi0.n())?;
    let mut psi = psi0.amplitudes().to_vec();
    let series = propagate(h, &mut psi, 0, t_end, dt)?;
    Ok((series, StateVector::new(&basis, psi)?))
}

/// Free Bose-Hubbard evolution after the catalysis light is switched off.
/// The state is renormalized first; molecular amplitudes are dropped.
pub fn free_evolution(
    p: &DerivedParams,
    psi0: &StateVector,
    t_end: f64,
    dt: Option<f64>,
) -> Result<TrajectorySeries> {
    let basis = build_basis(psi0.n())?;
    let h = build_free_hamiltonian(&basis, p);
    let start = psi0.to_pair_only().to_full().normalized();
    let dt = dt.unwrap_or_else(|| 0.2 * integrator::max_step(&h).min(0.05));
    Ok(evolve(&h, &start, t_end, dt)?.0)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EfficiencyCurve {
    pub eta: f64,
    /// `η F_null(t) + (1−η) ρ_TT(t)` from the simulated null trajectory and
    /// reduced master equation.
    pub simulated: Vec<f64>,
    /// `η + (1−η) ρ_TT(0) e^{−rate t}`.
    pub closed: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EfficiencySweep {
    pub times: Vec<f64>,
    pub null_fidelity: Vec<f64>,
    pub nonselective: Vec<f64>,
    pub curves: Vec<EfficiencyCurve>,
}

/// Target fidelity for imperfect detectors. A fraction `η` of the runs sees
/// every decay and is postselected on the null record; the rest learns
/// nothing and follows the nonselective evolution. Both parts start from the
/// perturbative ground state and share one time grid.
pub fn efficiency_sweep(
    p: &DerivedParams,
    n: usize,
    etas: &[f64],
    t_end: f64,
    model: Model,
    dt: Option<f64>,
) -> Result<EfficiencySweep> {
    use crate::error::domain;
    use crate::register::{fidelity, perturbative_ground_state};

    for &eta in etas {
        if !(0.0..=1.0).contains(&eta) {
            return domain(format!("detector efficiency {eta} outside [0, 1]"));
        }
    }
    let basis = build_basis(n)?;
    let (h, _) = trajectory::null_problem(&basis, p, model)?;
    let dt = dt
        .unwrap_or_else(|| trajectory::default_dt(model, p, &h).min(master::default_master_dt(p)));
    let null = null_trajectory(p, n, model, t_end, Some(dt))?;
    let ground = perturbative_ground_state(&basis, p)?;
    let rho0 = ReducedDensityState::from_state(&ground);
    let ns = reduced_master_equation(p, n, &rho0, t_end, dt, integrator::MAX_SAMPLES)?.rho_tt();
    let f0 = fidelity(&ground)?;
    let pairs = pair_count(n);
    let times = null.series.times;
    let curves = etas
        .iter()
        .map(|&eta| EfficiencyCurve {
            eta,
            simulated: null
                .series
                .fidelity
                .iter()
                .zip(&ns)
                .map(|(f, r)| eta * f + (1.0 - eta) * r)
                .collect(),
            closed: times
                .iter()
                .map(|&t| eta + (1.0 - eta) * nonselective_fidelity_closed(p, pairs, f0, t))
                .collect(),
        })
        .collect();
    Ok(EfficiencySweep {
        times,
        null_fidelity: null.series.fidelity,
        nonselective: ns,
        curves,
    })
}
