//! Physical inputs and the dimensionless parameters derived from them.
//!
//! All energies handed to the rest of the crate are ratios to the on-site
//! interaction `U`. Quoted frequencies are ordinary (Hz); since only ratios
//! enter the model, the factor 2π between ordinary and angular frequency
//! cancels and is never applied explicitly.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Planck constant, J s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Mass of a ⁸⁷Rb atom in kg.
pub const RB87_MASS: f64 = 1.443_160_648e-25;

/// Below this a hole-leak probability is reported as exactly zero.
pub const HOLE_UNDERFLOW: f64 = 1e-300;

/// How the catalysis light shift relates to the atomic saturation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LightShift {
    /// |V_c| = 2 |Δ| s_A = Ω_A² / |Δ|, twice the single-atom light shift.
    TwiceSingle,
    /// |V_c| = |Δ| s_A, the single-atom shift alone.
    Single,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConfig {
    /// Lattice laser wavelength λ in m; k = 2π/λ.
    pub lattice_wavelength: f64,
    pub atom_mass: f64,
    pub scattering_length: f64,
    /// Depth along the tunneling axis, units of E_R.
    pub depth_parallel: f64,
    /// Depth of the two tight transverse axes, units of E_R.
    pub depth_transverse: f64,
    /// Magnetic trap frequency ω_T/2π in Hz.
    pub trap_frequency: f64,
    /// Atomic Rabi frequency Ω_A in units of Γ.
    pub atomic_rabi: f64,
    /// Atomic linewidth Γ/2π in Hz.
    pub atomic_linewidth: f64,
    /// Catalysis detuning Δ in units of Γ (signed).
    pub catalysis_detuning: f64,
    pub franck_condon: f64,
    pub detector_efficiency: f64,
    pub atom_number: usize,
    pub register_size: usize,
    pub light_shift: LightShift,
    pub hole_threshold: f64,
}

impl Default for PhysicalConfig {
    /// The ⁸⁷Rb example: 501-site register inside 551 atoms.
    fn default() -> Self {
        Self {
            lattice_wavelength: 785e-9,
            atom_mass: RB87_MASS,
            scattering_length: 5.6e-9,
            depth_parallel: 22.0,
            depth_transverse: 38.5,
            trap_frequency: 8.0,
            atomic_rabi: 25.0,
            atomic_linewidth: 6.065e6,
            catalysis_detuning: -6.85e4,
            franck_condon: 5e-7,
            detector_efficiency: 1.0,
            atom_number: 551,
            register_size: 501,
            light_shift: LightShift::TwiceSingle,
            hole_threshold: 1e-6,
        }
    }
}

impl PhysicalConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lattice_wavelength", self.lattice_wavelength),
            ("atom_mass", self.atom_mass),
            ("depth_parallel", self.depth_parallel),
            ("depth_transverse", self.depth_transverse),
            ("atomic_linewidth", self.atomic_linewidth),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{key} must be positive and finite, got {v}"));
            }
        }
        if !(self.scattering_length >= 0.0) {
            return domain("scattering_length must be nonnegative");
        }
        if !(self.trap_frequency >= 0.0) {
            return domain("trap_frequency must be nonnegative");
        }
        if !(self.atomic_rabi >= 0.0) {
            return domain("atomic_rabi must be nonnegative");
        }
        if !(0.0..=1.0).contains(&self.detector_efficiency) {
            return domain("detector_efficiency must lie in [0, 1]");
        }
        if !(self.franck_condon > 0.0 && self.franck_condon < 1.0) {
            return domain("franck_condon must lie in (0, 1)");
        }
        if self.register_size % 2 == 0 {
            return domain("register_size must be odd");
        }
        if self.register_size == 0 || self.register_size > self.atom_number {
            return domain("register_size must satisfy 0 < n <= N");
        }
        Ok(())
    }
}

/// Model parameters in units of `U`, plus the two absolute scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    pub u_hz: f64,
    pub e_r_hz: f64,
    pub j: f64,
    pub delta: f64,
    pub kappa: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    pub vc_abs: f64,
    /// Atomic saturation Ω_A²/(2Δ²); dimensionless on its own.
    pub s_a: f64,
}

impl DerivedParams {
    /// Replaces the tunneling energy so that U/J equals `u_over_j`.
    pub fn with_u_over_j(mut self, u_over_j: f64) -> Self {
        self.j = if u_over_j.is_infinite() {
            0.0
        } else {
            1.0 / u_over_j
        };
        self
    }

    /// Sets Ω_M and recomputes κ from it.
    pub fn with_omega_m(mut self, omega_m: f64) -> Self {
        self.omega_m = omega_m;
        self.kappa = measurement_strength(omega_m, self.gamma_m);
        self
    }

    /// Sets Ω_M so that κ (in units of U) takes the requested value.
    pub fn with_kappa(self, kappa: f64) -> Self {
        let g = self.gamma_m;
        let omega_m = (8.0 * kappa * (1.0 + 0.25 * g * g) / g).sqrt();
        self.with_omega_m(omega_m)
    }

    pub fn u_over_j(&self) -> f64 {
        1.0 / self.j
    }
}

/// κ in units of U from Ω_M and γ_M (also in units of U).
pub fn measurement_strength(omega_m: f64, gamma_m: f64) -> f64 {
    if gamma_m == 0.0 {
        return 0.0;
    }
    omega_m * omega_m * gamma_m / (8.0 * (1.0 + 0.25 * gamma_m * gamma_m))
}

/// Recoil energy E_R/h = h/(2mλ²) in Hz.
pub fn recoil_energy(wavelength: f64, mass: f64) -> Result<f64> {
    if !(wavelength > 0.0) || !(mass > 0.0) {
        return domain("recoil energy needs positive wavelength and mass");
    }
    Ok(PLANCK / (2.0 * mass * wavelength * wavelength))
}

/// Tight-binding tunneling energy for a lattice of depth `v_over_er` recoils,
/// returned in the same unit as `e_r`.
pub fn tunneling_rate(v_over_er: f64, e_r: f64) -> Result<f64> {
    if !(v_over_er > 0.0) {
        return domain("lattice depth must be positive");
    }
    Ok(4.0 / PI.sqrt() * e_r * v_over_er.powf(0.75) * (-2.0 * v_over_er.sqrt()).exp())
}

/// On-site interaction U/h in Hz, harmonic approximation of the Wannier
/// function with two transverse axes at `depth_transverse` and one axis at
/// `depth_parallel`.
pub fn onsite_interaction(cfg: &PhysicalConfig) -> Result<f64> {
    if !(cfg.depth_parallel > 0.0) || !(cfg.depth_transverse > 0.0) {
        return domain("lattice depths must be positive");
    }
    let e_r = recoil_energy(cfg.lattice_wavelength, cfg.atom_mass)?;
    let k = 2.0 * PI / cfg.lattice_wavelength;
    let geom = (cfg.depth_transverse * cfg.depth_transverse * cfg.depth_parallel).powf(0.25);
    Ok((8.0 / PI).sqrt() * k * cfg.scattering_length * e_r * geom)
}

/// Trap energy scale δ/h in Hz such that ε(j) = δ j².
pub fn trap_energy_scale(trap_frequency: f64, wavelength: f64, mass: f64) -> Result<f64> {
    if !(trap_frequency >= 0.0) {
        return domain("trap frequency must be nonnegative");
    }
    let spacing = 0.5 * wavelength;
    let omega = 2.0 * PI * trap_frequency;
    Ok(0.5 * mass * spacing * spacing * omega * omega / PLANCK)
}

pub fn derive_params(cfg: &PhysicalConfig) -> Result<DerivedParams> {
    cfg.validate()?;
    if cfg.catalysis_detuning == 0.0 {
        return domain("resonant catalysis (detuning 0) is not modeled");
    }
    let e_r_hz = recoil_energy(cfg.lattice_wavelength, cfg.atom_mass)?;
    let u_hz = onsite_interaction(cfg)?;
    if !(u_hz > 0.0) {
        return domain("on-site interaction vanishes; nothing to measure against");
    }
    let j_hz = tunneling_rate(cfg.depth_parallel, e_r_hz)?;
    let delta_hz = trap_energy_scale(cfg.trap_frequency, cfg.lattice_wavelength, cfg.atom_mass)?;

    let gamma = cfg.atomic_linewidth / u_hz;
    let omega_a = cfg.atomic_rabi * gamma;
    let detuning = cfg.catalysis_detuning.abs() * gamma;
    let s_a = cfg.atomic_rabi * cfg.atomic_rabi / (2.0 * cfg.catalysis_detuning.powi(2));
    let vc_abs = match cfg.light_shift {
        LightShift::TwiceSingle => 2.0 * detuning * s_a,
        LightShift::Single => detuning * s_a,
    };
    let gamma_m = 2.0 * gamma;
    let omega_m = cfg.franck_condon.sqrt() * omega_a;

    Ok(DerivedParams {
        u_hz,
        e_r_hz,
        j: j_hz / u_hz,
        delta: delta_hz / u_hz,
        kappa: measurement_strength(omega_m, gamma_m),
        omega_m,
        gamma_m,
        vc_abs,
        s_a,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub omega_ratio: f64,
    /// κ/(2√n J); infinite when J = 0.
    pub strength: f64,
    pub edge_ratio: f64,
    pub barrier: f64,
    pub hole_prob: f64,
    pub hole_underflow: bool,
    pub omega_pass: bool,
    pub strength_pass: bool,
    pub edge_pass: bool,
    pub hole_pass: bool,
}

impl RegimeReport {
    pub fn all_pass(&self) -> bool {
        self.omega_pass && self.strength_pass && self.edge_pass && self.hole_pass
    }

    /// Names of the constraints that fail.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.omega_pass {
            out.push("omega_ratio >= 0.1");
        }
        if !self.strength_pass {
            out.push("strength <= 1");
        }
        if !self.edge_pass {
            out.push("edge_ratio >= 1");
        }
        if !self.hole_pass {
            out.push("hole probability above threshold");
        }
        out
    }
}

pub fn regime_check(
    p: &DerivedParams,
    n: usize,
    atoms: usize,
    hole_threshold: f64,
) -> Result<RegimeReport> {
    if n % 2 == 0 || n > atoms {
        return domain("register size must be odd and no larger than the atom number");
    }
    let omega_ratio = if p.gamma_m > 0.0 {
        p.omega_m / p.gamma_m
    } else {
        f64::INFINITY
    };
    let strength = if p.j == 0.0 {
        f64::INFINITY
    } else {
        p.kappa / (2.0 * (n as f64).sqrt() * p.j)
    };
    let edge = 0.5 * (atoms as f64 - 1.0);
    let edge_ratio = p.delta * edge * edge;
    let barrier = if p.delta > 0.0 {
        p.j / (n as f64 * p.delta)
    } else {
        f64::INFINITY
    };
    let hole = if atoms > n && p.delta > 0.0 {
        hole_leak_probability(p.j, p.delta, n, atoms)?
    } else if p.j == 0.0 {
        HoleLeak {
            probability: 0.0,
            underflow: false,
        }
    } else if atoms == n {
        // no barrier at all: the register edge is the cloud edge
        HoleLeak {
            probability: 1.0,
            underflow: false,
        }
    } else {
        HoleLeak {
            probability: f64::INFINITY,
            underflow: false,
        }
    };
    Ok(RegimeReport {
        omega_ratio,
        strength,
        edge_ratio,
        barrier,
        hole_prob: hole.probability,
        hole_underflow: hole.underflow,
        omega_pass: omega_ratio < 0.1,
        strength_pass: strength > 1.0,
        edge_pass: edge_ratio < 1.0,
        hole_pass: hole.probability < hole_threshold,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoleLeak {
    pub probability: f64,
    /// The value fell below [`HOLE_UNDERFLOW`] and was clamped to zero.
    pub underflow: bool,
}

/// Probability that a hole tunnels through the barrier into the register,
/// `(J/2δ)^(N−n+2) (Γ(n/2)/Γ(N/2+1))²`, evaluated in log space.
pub fn hole_leak_probability(j: f64, delta: f64, n: usize, atoms: usize) -> Result<HoleLeak> {
    if !(delta > 0.0) {
        return domain("hole leak probability needs a positive trap scale");
    }
    if atoms <= n {
        return domain("hole leak probability needs N > n");
    }
    if j == 0.0 {
        return Ok(HoleLeak {
            probability: 0.0,
            underflow: false,
        });
    }
    let exponent = (atoms - n + 2) as f64;
    let ln_p = exponent * (j / (2.0 * delta)).ln()
        + 2.0 * (ln_gamma(n as f64 / 2.0) - ln_gamma(atoms as f64 / 2.0 + 1.0));
    let p = ln_p.exp();
    if p < HOLE_UNDERFLOW {
        Ok(HoleLeak {
            probability: 0.0,
            underflow: true,
        })
    } else {
        Ok(HoleLeak {
            probability: p,
            underflow: false,
        })
    }
}

/// Product form `∏_{j=(n−1)/2}^{(N−1)/2} (J/(δ(2j+1)))²` of the same estimate.
pub fn hole_leak_product(j: f64, delta: f64, n: usize, atoms: usize) -> Result<f64> {
    if !(delta > 0.0) {
        return domain("hole leak probability needs a positive trap scale");
    }
    if n % 2 == 0 || atoms % 2 == 0 || atoms <= n {
        return domain("product form needs odd n < N");
    }
    let mut p = 1.0;
    for k in (n..=atoms).step_by(2) {
        let f = j / (delta * k as f64);
        p *= f * f;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper() -> PhysicalConfig {
        PhysicalConfig::default()
    }

    #[test]
    fn recoil_energy_rb87() {
        let er = recoil_energy(785e-9, 1.4432e-25).unwrap();
        assert!((er - 3725.0).abs() < 1.0, "{er}");
        let er2 = recoil_energy(2.0 * 785e-9, 1.4432e-25).unwrap();
        assert!((er2 - er / 4.0).abs() < 1e-9);
        let er3 = recoil_energy(785e-9, 2.0 * 1.4432e-25).unwrap();
        assert!((er3 - er / 2.0).abs() < 1e-9);
        assert!(recoil_energy(0.0, 1.0).is_err());
        assert!(recoil_energy(1.0, -1.0).is_err());
    }

    #[test]
    fn tunneling_examples() {
        let j = tunneling_rate(22.0, 3725.0).unwrap();
        assert!((j - 7.21).abs() < 0.01, "{j}");
        let mut prev = f64::INFINITY;
        for i in 0..=450 {
            let v = 5.0 + 0.1 * i as f64;
            let jv = tunneling_rate(v, 3725.0).unwrap();
            assert!(jv < prev);
            prev = jv;
        }
        assert!(tunneling_rate(1e4, 3725.0).unwrap() < 1e-70);
        assert!(tunneling_rate(0.0, 1.0).is_err());
    }

    #[test]
    fn onsite_interaction_examples() {
        let mut cfg = paper();
        cfg.atom_mass = 1.4432e-25;
        let u = onsite_interaction(&cfg).unwrap();
        assert!((u / 3574.0 - 1.0).abs() < 0.005, "{u}");
        let mut doubled = cfg.clone();
        doubled.scattering_length *= 2.0;
        assert!((onsite_interaction(&doubled).unwrap() / u - 2.0).abs() < 1e-12);
        cfg.scattering_length = 0.0;
        assert_eq!(onsite_interaction(&cfg).unwrap(), 0.0);
    }

    #[test]
    fn trap_scale_examples() {
        let d = trap_energy_scale(8.0, 785e-9, 1.4432e-25).unwrap();
        assert!((d - 0.0424).abs() < 5e-4, "{d}");
        assert!((d * 275.0 * 275.0 / 3574.0 - 0.9).abs() < 0.01);
        assert_eq!(trap_energy_scale(0.0, 785e-9, 1.4432e-25).unwrap(), 0.0);
        let d2 = trap_energy_scale(16.0, 785e-9, 1.4432e-25).unwrap();
        assert!((d2 / d - 4.0).abs() < 1e-12);
    }

    #[test]
    fn derived_paper_values() {
        let p = derive_params(&paper()).unwrap();
        assert!((p.kappa - 0.133).abs() < 0.002, "{}", p.kappa);
        assert!((p.vc_abs - 15.5).abs() < 0.1, "{}", p.vc_abs);
        assert!((p.s_a / 6.7e-8 - 1.0).abs() < 0.01, "{}", p.s_a);
        // γ_M = 2Γ/U and Ω_M = √F Ω_A
        let gamma = 6.065e6 / p.u_hz;
        assert!((p.gamma_m - 2.0 * gamma).abs() < 1e-9 * p.gamma_m);
        assert_eq!(p.omega_m, 5e-7_f64.sqrt() * (25.0 * gamma));
    }

    #[test]
    fn zero_detuning_rejected() {
        let mut cfg = paper();
        cfg.catalysis_detuning = 0.0;
        assert!(derive_params(&cfg).is_err());
    }

    #[test]
    fn single_light_shift_is_half() {
        let mut cfg = paper();
        let twice = derive_params(&cfg).unwrap().vc_abs;
        cfg.light_shift = LightShift::Single;
        let single = derive_params(&cfg).unwrap().vc_abs;
        assert!((twice / single - 2.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = paper();
        cfg.register_size = 500;
        assert!(cfg.validate().is_err());
        let mut cfg = paper();
        cfg.register_size = 553;
        assert!(cfg.validate().is_err());
        let mut cfg = paper();
        cfg.detector_efficiency = 1.5;
        assert!(cfg.validate().is_err());
        let mut cfg = paper();
        cfg.franck_condon = 1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn regime_paper_values() {
        let p = derive_params(&paper()).unwrap();
        let r = regime_check(&p, 501, 551, 1e-6).unwrap();
        // √(5e-7)·25/2
        assert!((r.omega_ratio - 5e-7_f64.sqrt() * 12.5).abs() < 1e-12);
        assert!(r.omega_pass);
        assert!((r.strength - 1.5).abs() < 0.15, "{}", r.strength);
        assert!(r.strength_pass && r.edge_pass && r.hole_pass);
        assert!(r.hole_prob < 1e-10);
        let r500 = regime_check(&p, 499, 551, 1e-6).unwrap();
        assert!(r500.strength > r.strength);
    }

    #[test]
    fn regime_without_tunneling() {
        let p = derive_params(&paper())
            .unwrap()
            .with_u_over_j(f64::INFINITY);
        let r = regime_check(&p, 501, 551, 1e-6).unwrap();
        assert!(r.strength.is_infinite() && r.strength_pass);
        assert_eq!(r.hole_prob, 0.0);
    }

    #[test]
    fn hole_leak_forms_agree() {
        let closed = hole_leak_probability(5.0, 1.0, 11, 21).unwrap().probability;
        let product = hole_leak_product(5.0, 1.0, 11, 21).unwrap();
        assert!((closed / product - 1.0).abs() < 1e-10, "{closed} {product}");
        assert_eq!(
            hole_leak_probability(0.0, 1.0, 11, 21).unwrap().probability,
            0.0
        );
        assert!(hole_leak_probability(1.0, 0.0, 11, 21).is_err());
    }

    #[test]
    fn hole_leak_underflow_clamps() {
        let h = hole_leak_probability(1e-3, 1.0, 3, 801).unwrap();
        assert!(h.underflow);
        assert_eq!(h.probability, 0.0);
    }

    #[test]
    fn hole_leak_paper_example() {
        let h = hole_leak_probability(7.21, 0.0424, 501, 551).unwrap();
        assert!(h.probability < 1e-10);
    }
}
