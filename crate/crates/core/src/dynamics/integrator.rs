//! Fixed-step classical Runge-Kutta integration.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::ops::{Add, Mul};

use crate::error::{Error, Result};
use crate::sparse::SparseOperator;

/// Output grids never exceed this many samples.
pub const MAX_SAMPLES: usize = 5000;

/// Stability cap on `dt · ω_max` for the Schrödinger integrator.
pub const STEP_CAP: f64 = 0.05;

/// Uniform step plan: `steps = stride · intervals` steps of size `h`, with a
/// sample taken every `stride` steps including both end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepPlan {
    pub h: f64,
    pub steps: usize,
    pub stride: usize,
    pub intervals: usize,
}

impl StepPlan {
    /// Plan for reaching `t_end` with steps no larger than `dt` and at most
    /// `max_samples` output samples.
    pub fn new(t_end: f64, dt: f64, max_samples: usize) -> Self {
        assert!(t_end >= 0.0 && dt > 0.0 && max_samples >= 2);
        let needed = ((t_end / dt).ceil() as usize).max(1);
        let intervals = needed.min(max_samples - 1);
        let stride = needed.div_ceil(intervals);
        let steps = stride * intervals;
        Self {
            h: t_end / steps as f64,
            steps,
            stride,
            intervals,
        }
    }

    pub fn sample_times(&self) -> Vec<f64> {
        (0..=self.intervals)
            .map(|k| (k * self.stride) as f64 * self.h)
            .collect()
    }
}

/// RK4 stepper for `y' = f(t, y)` over any vector-space element type, with
/// reusable scratch buffers.
pub struct Rk4<T> {
    k1: Vec<T>,
    k2: Vec<T>,
    k3: Vec<T>,
    k4: Vec<T>,
    tmp: Vec<T>,
}

impl<T> Rk4<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    pub fn new(dim: usize) -> Self {
        Self {
            k1: vec![T::default(); dim],
            k2: vec![T::default(); dim],
            k3: vec![T::default(); dim],
            k4: vec![T::default(); dim],
            tmp: vec![T::default(); dim],
        }
    }

    pub fn step<F>(&mut self, t: f64, h: f64, y: &mut [T], mut f: F)
    where
        F: FnMut(f64, &[T], &mut [T]),
    {
        f(t, y, &mut self.k1);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + self.k1[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k2);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + self.k2[i] * (0.5 * h);
        }
        f(t + 0.5 * h, &self.tmp, &mut self.k3);
        for i in 0..y.len() {
            self.tmp[i] = y[i] + self.k3[i] * h;
        }
        f(t + h, &self.tmp, &mut self.k4);
        let sixth = h / 6.0;
        for i in 0..y.len() {
            y[i] = y[i] + (self.k1[i] + self.k2[i] * 2.0 + self.k3[i] * 2.0 + self.k4[i]) * sixth;
        }
    }
}

/// Largest step accepted for `H`.
pub fn max_step(h: &SparseOperator) -> f64 {
    let w = h.omega_max();
    if w == 0.0 {
        f64::INFINITY
    } else {
        STEP_CAP / w
    }
}

pub fn check_step(h: &SparseOperator, dt: f64) -> Result<()> {
    let cap = max_step(h);
    if !(dt > 0.0) || dt > cap {
        return Err(Error::StepTooLarge { dt, required: cap });
    }
    Ok(())
}

/// Sampled fidelity and norm of an evolving state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySeries {
    /// Times in units of 1/U.
    pub times: Vec<f64>,
    /// Conditioned (renormalized) target fidelity.
    pub fidelity: Vec<f64>,
    pub norm_sq: Vec<f64>,
    pub jump_time: Option<f64>,
}

impl TrajectorySeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_fidelity(&self) -> f64 {
        *self.fidelity.last().expect("empty series")
    }

    /// True if the squared norm never rises by more than `tol` between samples.
    pub fn norm_nonincreasing(&self, tol: f64) -> bool {
        self.norm_sq.windows(2).all(|w| w[1] <= w[0] + tol)
    }
}

/// Integrates `i dψ/dt = H ψ` with fixed-step RK4, calling `on_step(t, ψ)`
/// after every step and recording fidelity with basis state `target`.
pub fn propagate_with<F>(
    h: &SparseOperator,
    psi: &mut [Complex64],
    target: usize,
    t_end: f64,
    dt: f64,
    max_samples: usize,
    mut on_step: F,
) -> Result<TrajectorySeries>
where
    F: FnMut(f64, &[Complex64]),
{
    check_step(h, dt)?;
    let plan = StepPlan::new(t_end, dt, max_samples);
    let mut series = TrajectorySeries {
        times: plan.sample_times(),
        fidelity: Vec::with_capacity(plan.intervals + 1),
        norm_sq: Vec::with_capacity(plan.intervals + 1),
        jump_time: None,
    };
    let record = |s: &mut TrajectorySeries, psi: &[Complex64]| {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        s.norm_sq.push(norm);
        s.fidelity.push(if norm > 0.0 {
            psi[target].norm_sqr() / norm
        } else {
            0.0
        });
    };
    record(&mut series, psi);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut rk = Rk4::new(psi.len());
    for k in 0..plan.steps {
        let t = k as f64 * plan.h;
        rk.step(t, plan.h, psi, |_, y, dy| {
            h.apply(y, dy);
            for v in dy.iter_mut() {
                *v *= minus_i;
            }
        });
        on_step(t + plan.h, psi);
        if (k + 1) % plan.stride == 0 {
            record(&mut series, psi);
        }
    }
    Ok(series)
}

pub fn propagate(
    h: &SparseOperator,
    psi: &mut [Complex64],
    target: usize,
    t_end: f64,
    dt: f64,
) -> Result<TrajectorySeries> {
    propagate_with(h, psi, target, t_end, dt, MAX_SAMPLES, |_, _| {})
}
