//! Pseudo two-state reduction of the nonselective dynamics and its closed
//! forms.
//!
//! `n_pairs` below is the pair count entering the collective coupling
//! `√(2 n_pairs) J`. For an open register of `n` sites the `2(n−1)` pair
//! states form `n−1` pairs, so callers pass `n − 1`.

use serde::{Deserialize, Serialize};

use super::integrator::{Rk4, StepPlan, MAX_SAMPLES};
use crate::error::{domain, Result};
use crate::units::DerivedParams;

/// `u = Re ρ_ST`, `v = Im ρ_ST`, `w = ρ_SS − ρ_TT`, `x = Tr ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub x: f64,
}

impl BlochState {
    /// All population in the target.
    pub const TARGET: BlochState = BlochState {
        u: 0.0,
        v: 0.0,
        w: -1.0,
        x: 1.0,
    };

    pub fn rho_tt(&self) -> f64 {
        0.5 * (self.x - self.w)
    }

    pub fn rho_ss(&self) -> f64 {
        0.5 * (self.x + self.w)
    }

    fn to_array(self) -> [f64; 4] {
        [self.u, self.v, self.w, self.x]
    }

    fn from_slice(y: &[f64]) -> Self {
        Self {
            u: y[0],
            v: y[1],
            w: y[2],
            x: y[3],
        }
    }
}

/// Pair count used by the collective coupling for an `n`-site register.
pub fn pair_count(n: usize) -> usize {
    n.saturating_sub(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochSeries {
    pub times: Vec<f64>,
    pub states: Vec<BlochState>,
}

impl BlochSeries {
    pub fn rho_tt(&self) -> Vec<f64> {
        self.states.iter().map(BlochState::rho_tt).collect()
    }
}

/// Default step `0.01/(U + |V_c|)`.
pub fn default_bloch_dt(p: &DerivedParams) -> f64 {
    0.01 / (1.0 + p.vc_abs)
}

/// Integrates
///
/// ```text
/// du/dt = (U+|V_c|) v − κ u
/// dv/dt = −κ v − (U+|V_c|) u − √(2n) J w
/// dw/dt = −κ (x + w) + 4 √(2n) J v
/// dx/dt = −κ (x + w)
/// ```
pub fn bloch_evolution(
    p: &DerivedParams,
    n_pairs: usize,
    b0: BlochState,
    t_end: f64,
    dt: f64,
) -> Result<BlochSeries> {
    if !(dt > 0.0) || !(t_end >= 0.0) {
        return domain("bloch evolution needs dt > 0 and t_end >= 0");
    }
    let split = 1.0 + p.vc_abs;
    let kappa = p.kappa;
    let g = (2.0 * n_pairs as f64).sqrt() * p.j;
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        let (u, v, w, x) = (y[0], y[1], y[2], y[3]);
        dy[0] = split * v - kappa * u;
        dy[1] = -kappa * v - split * u - g * w;
        dy[2] = -kappa * (x + w) + 4.0 * g * v;
        dy[3] = -kappa * (x + w);
    };
    let plan = StepPlan::new(t_end, dt, MAX_SAMPLES);
    let mut y = b0.to_array().to_vec();
    let mut rk = Rk4::new(4);
    let mut states = Vec::with_capacity(plan.intervals + 1);
    states.push(b0);
    for k in 0..plan.steps {
        rk.step(k as f64 * plan.h, plan.h, &mut y, rhs);
        if (k + 1) % plan.stride == 0 {
            states.push(BlochState::from_slice(&y));
        }
    }
    Ok(BlochSeries {
        times: plan.sample_times(),
        states,
    })
}

/// Decay rate `8 n J² κ / ((U+|V_c|)² + κ²)` of the target population under
/// nonselective measurement.
pub fn nonselective_decay_rate(p: &DerivedParams, n_pairs: usize) -> f64 {
    let split = 1.0 + p.vc_abs;
    8.0 * n_pairs as f64 * p.j * p.j * p.kappa / (split * split + p.kappa * p.kappa)
}

/// `ρ_TT(0) · exp(−rate · t)`.
pub fn nonselective_fidelity_closed(
    p: &DerivedParams,
    n_pairs: usize,
    rho_tt0: f64,
    t: f64,
) -> f64 {
    rho_tt0 * (-nonselective_decay_rate(p, n_pairs) * t).exp()
}

/// Target fidelity with detector efficiency `eta`: `η + (1−η) ρ^ns_TT(t)`.
pub fn finite_efficiency_fidelity(
    eta: f64,
    p: &DerivedParams,
    n_pairs: usize,
    rho_tt0: f64,
    t: f64,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return domain(format!("detector efficiency {eta} outside [0, 1]"));
    }
    Ok(eta + (1.0 - eta) * nonselective_fidelity_closed(p, n_pairs, rho_tt0, t))
}
