//! Reduced density-matrix equations for the pair-hole populations and their
//! coherences with the target, with the molecular coherences eliminated.
//!
//! Per pair state `S`:
//!
//! ```text
//! dρ_ST/dt = −i(E_S + |V_c|) ρ_ST + i√2 J (ρ_TT − ρ_SS) − γ_S ρ_ST
//! dρ_SS/dt = −i√2 J (ρ_ST − ρ_TS) − 2κ ρ_SS
//! dρ_TT/dt = Σ_S i√2 J (ρ_ST − ρ_TS)
//! ```
//!
//! where `γ_S` uses the detuning `|V_c| + E_S − U` of the molecular line and
//! `2κ` uses `U`. Coherences between different pair states are dropped.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

use super::integrator::{Rk4, StepPlan, MAX_SAMPLES};
use crate::error::{domain, Error, Result};
use crate::register::{build_basis, coherence_damping, pair_state_energy, StateVector};
use crate::units::DerivedParams;

/// Populations below this are an integration failure, not rounding.
pub const NEGATIVE_POPULATION_LIMIT: f64 = -1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensityState {
    pub rho_tt: f64,
    /// `ρ_{S,T}` for each pair state in basis order.
    pub coherences: Vec<Complex64>,
    /// `ρ_{S,S}` for each pair state in basis order.
    pub populations: Vec<f64>,
}

impl ReducedDensityState {
    /// Diagonal and target-row part of `|ψ⟩⟨ψ|` for a register state.
    pub fn from_state(psi: &StateVector) -> Self {
        let pair = psi.to_pair_only();
        let a = pair.amplitudes();
        let ct = a[0];
        Self {
            rho_tt: ct.norm_sqr(),
            coherences: a[1..].iter().map(|cs| cs * ct.conj()).collect(),
            populations: a[1..].iter().map(|cs| cs.norm_sqr()).collect(),
        }
    }

    pub fn trace(&self) -> f64 {
        self.rho_tt + self.populations.iter().sum::<f64>()
    }

    pub fn min_population(&self) -> f64 {
        self.populations.iter().copied().fold(self.rho_tt, f64::min)
    }

    fn pack(&self, out: &mut [f64]) {
        let m = self.populations.len();
        out[0] = self.rho_tt;
        for s in 0..m {
            out[1 + 3 * s] = self.coherences[s].re;
            out[2 + 3 * s] = self.coherences[s].im;
            out[3 + 3 * s] = self.populations[s];
        }
    }

    fn unpack(y: &[f64]) -> Self {
        let m = (y.len() - 1) / 3;
        Self {
            rho_tt: y[0],
            coherences: (0..m)
                .map(|s| Complex64::new(y[1 + 3 * s], y[2 + 3 * s]))
                .collect(),
            populations: (0..m).map(|s| y[3 + 3 * s]).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasterSeries {
    pub times: Vec<f64>,
    pub states: Vec<ReducedDensityState>,
}

impl MasterSeries {
    pub fn rho_tt(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.rho_tt).collect()
    }

    pub fn trace(&self) -> Vec<f64> {
        self.states.iter().map(ReducedDensityState::trace).collect()
    }
}

/// Default step `0.01/(U + |V_c|)`.
pub fn default_master_dt(p: &DerivedParams) -> f64 {
    0.01 / (1.0 + p.vc_abs)
}

/// Integrates the reduced equations from `rho0`, keeping at most
/// `max_samples` snapshots on a uniform grid.
pub fn reduced_master_equation(
    p: &DerivedParams,
    n: usize,
    rho0: &ReducedDensityState,
    t_end: f64,
    dt: f64,
    max_samples: usize,
) -> Result<MasterSeries> {
    let basis = build_basis(n)?;
    let m = 2 * basis.bond_count();
    if rho0.coherences.len() != m || rho0.populations.len() != m {
        return domain(format!("initial state must carry {m} pair states"));
    }
    if !(dt > 0.0) {
        return domain("time step must be positive");
    }
    let energies: Vec<f64> = basis
        .pair_states()
        .map(|(j, o)| pair_state_energy(j, o, 1.0, p.delta) + p.vc_abs)
        .collect();
    let damping: Vec<f64> = basis
        .pair_states()
        .map(|(j, o)| coherence_damping(p, pair_state_energy(j, o, 1.0, p.delta)))
        .collect();
    let loss = 2.0 * p.kappa;
    let g = SQRT_2 * p.j;

    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let rho_tt = y[0];
        let mut dtt = 0.0;
        for s in 0..m {
            let (re, im, pop) = (y[1 + 3 * s], y[2 + 3 * s], y[3 + 3 * s]);
            let e = energies[s];
            let gs = damping[s];
            // −iE ρ − γ ρ + i g (ρ_TT − ρ_SS)
            dy[1 + 3 * s] = e * im - gs * re;
            dy[2 + 3 * s] = -e * re - gs * im + g * (rho_tt - pop);
            // i g (ρ_ST − ρ_TS) = i g (2i Im ρ_ST) = −2 g Im ρ_ST
            dy[3 + 3 * s] = 2.0 * g * im - loss * pop;
            dtt -= 2.0 * g * im;
        }
        dy[0] = dtt;
    };

    let plan = StepPlan::new(t_end, dt, max_samples.clamp(2, MAX_SAMPLES));
    let mut y = vec![0.0; 1 + 3 * m];
    rho0.pack(&mut y);
    let mut rk = Rk4::new(y.len());
    let mut series = MasterSeries {
        times: plan.sample_times(),
        states: vec![rho0.clone()],
    };
    for k in 0..plan.steps {
        rk.step(k as f64 * plan.h, plan.h, &mut y, rhs);
        if (k + 1) % plan.stride == 0 {
            let state = ReducedDensityState::unpack(&y);
            let low = state.min_population();
            if low < NEGATIVE_POPULATION_LIMIT {
                return Err(Error::Accuracy(format!(
                    "population {low:e} at t = {}",
                    (k + 1) as f64 * plan.h
                )));
            }
            series.states.push(state);
        }
    }
    Ok(series)
}
