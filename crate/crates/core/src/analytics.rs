//! Closed-form results: free evolution after the measurement, ground-state
//! energetics and preparation statistics. Energies and rates in units of U
//! unless an explicit `u` is passed.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::register::{build_basis, fidelity, perturbative_ground_state};
use crate::units::DerivedParams;

/// Below this |sin(δt)| the ratio of sines is replaced by its limit.
const SINE_RATIO_SINGULAR: f64 = 1e-8;

/// `sin(δ(n−1)t) / sin(δt)` with its removable singularities filled in.
pub fn sine_ratio(n: f64, delta: f64, t: f64) -> f64 {
    let x = delta * t;
    let s = x.sin();
    if s.abs() < SINE_RATIO_SINGULAR {
        (n - 1.0) * ((n - 1.0) * x).cos() / x.cos()
    } else {
        ((n - 1.0) * x).sin() / s
    }
}

/// First-order target fidelity after starting in `|T⟩` and evolving freely:
/// `1 − 8(J/U)² (n − cos(Ut) (1 + sin(δ(n−1)t)/sin(δt)))`.
///
/// `n` counts the pair-hole pairs, i.e. bonds of the register.
pub fn free_evolution_fidelity(n: usize, j: f64, u: f64, delta: f64, t: f64) -> f64 {
    let n = n as f64;
    let ratio = sine_ratio(n, delta, t);
    1.0 - 8.0 * (j / u).powi(2) * (n - (u * t).cos() * (1.0 + ratio))
}

/// Mean of `1 − F` over the fast oscillation, `8n(J/U)²`.
pub fn time_averaged_infidelity(n: usize, j: f64, u: f64) -> f64 {
    8.0 * n as f64 * (j / u).powi(2)
}

/// `E_g = −4 N J² / U`.
pub fn perturbative_ground_energy(atoms: usize, j: f64, u: f64) -> Result<f64> {
    if !(u > 0.0) {
        return domain("ground energy needs U > 0");
    }
    Ok(-4.0 * atoms as f64 * j * j / u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreparationStats {
    /// `1/κ` in units of 1/U.
    pub t_prep: f64,
    /// `1 − ρ_TT(0)` of the perturbative ground state.
    pub p_fail: f64,
}

pub fn preparation_stats(p: &DerivedParams, n: usize) -> Result<PreparationStats> {
    if !(p.kappa > 0.0) {
        return domain("preparation time needs a nonzero measurement strength");
    }
    let basis = build_basis(n)?;
    let ground = perturbative_ground_state(&basis, p)?;
    Ok(PreparationStats {
        t_prep: 1.0 / p.kappa,
        p_fail: 1.0 - fidelity(&ground)?,
    })
}

/// Angular frequency of the strongest component of a uniformly sampled
/// series within `[omega_lo, omega_hi]`, from the periodogram of the
/// mean-removed samples refined by golden-section search.
pub fn spectral_peak(times: &[f64], values: &[f64], omega_lo: f64, omega_hi: f64) -> f64 {
    assert_eq!(times.len(), values.len());
    assert!(times.len() >= 4 && omega_hi > omega_lo);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let x: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let power = |w: f64| {
        let (mut c, mut s) = (0.0, 0.0);
        for (t, v) in times.iter().zip(&x) {
            let (sn, cs) = (w * t).sin_cos();
            c += v * cs;
            s += v * sn;
        }
        c * c + s * s
    };
    let span = times[times.len() - 1] - times[0];
    let step = std::f64::consts::PI / (8.0 * span);
    let count = ((omega_hi - omega_lo) / step).ceil() as usize;
    let (mut best_w, mut best_p) = (omega_lo, f64::NEG_INFINITY);
    for k in 0..=count {
        let w = omega_lo + k as f64 * step;
        let pw = power(w);
        if pw > best_p {
            best_p = pw;
            best_w = w;
        }
    }
    let (mut a, mut b) = (best_w - step, best_w + step);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if power(c) > power(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}
