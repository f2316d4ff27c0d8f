//! Flat `key = value` configuration, one key per line, `#` starts a comment.
//!
//! Precedence is defaults < file < command-line flags; the CLI applies flags
//! through [`Settings::set`] after the file.

use serde::{Deserialize, Serialize};
use std::path::Path;

use crate::dynamics::Model;
use crate::error::{Error, Result};
use crate::oracle::Boundary;
use crate::units::{LightShift, PhysicalConfig};

/// Everything a run needs: the physical inputs plus run controls. Unset run
/// controls fall back to per-subcommand defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    pub physical: PhysicalConfig,
    /// Overrides the tunneling energy derived from the lattice depth.
    pub u_over_j: Option<f64>,
    /// End time as written, e.g. `30` (units of 1/U) or `0.5/J`.
    pub t_end: Option<String>,
    pub dt: Option<f64>,
    pub seed: u64,
    pub traj: usize,
    pub model: Option<Model>,
    pub boundary: Boundary,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            physical: PhysicalConfig::default(),
            u_over_j: None,
            t_end: None,
            dt: None,
            seed: 1,
            traj: 1000,
            model: None,
            boundary: Boundary::Open,
        }
    }
}

fn bad(key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn number(key: &str, value: &str) -> Result<f64> {
    value
        .parse::<f64>()
        .map_err(|_| bad(key, format!("`{value}` is not a number")))
}

fn count(key: &str, value: &str) -> Result<usize> {
    value
        .parse::<usize>()
        .map_err(|_| bad(key, format!("`{value}` is not a nonnegative integer")))
}

impl Settings {
    pub const KEYS: [&'static str; 22] = [
        "lattice_wavelength",
        "atom_mass",
        "scattering_length",
        "depth_parallel",
        "depth_transverse",
        "trap_frequency",
        "atomic_rabi",
        "atomic_linewidth",
        "catalysis_detuning",
        "franck_condon",
        "detector_efficiency",
        "atom_number",
        "register_size",
        "light_shift",
        "hole_threshold",
        "u_over_j",
        "t_end",
        "dt",
        "seed",
        "traj",
        "model",
        "boundary",
    ];

    /// Applies one key. Unknown keys and unparsable values are config errors
    /// naming the key.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let phys = &mut self.physical;
        match key {
            "lattice_wavelength" => phys.lattice_wavelength = number(key, value)?,
            "atom_mass" => phys.atom_mass = number(key, value)?,
            "scattering_length" => phys.scattering_length = number(key, value)?,
            "depth_parallel" => phys.depth_parallel = number(key, value)?,
            "depth_transverse" => phys.depth_transverse = number(key, value)?,
            "trap_frequency" => phys.trap_frequency = number(key, value)?,
            "atomic_rabi" => phys.atomic_rabi = number(key, value)?,
            "atomic_linewidth" => phys.atomic_linewidth = number(key, value)?,
            "catalysis_detuning" => phys.catalysis_detuning = number(key, value)?,
            "franck_condon" => phys.franck_condon = number(key, value)?,
            "detector_efficiency" => phys.detector_efficiency = number(key, value)?,
            "atom_number" => phys.atom_number = count(key, value)?,
            "register_size" => phys.register_size = count(key, value)?,
            "light_shift" => {
                phys.light_shift = match value {
                    "twice_single" => LightShift::TwiceSingle,
                    "single" => LightShift::Single,
                    _ => return Err(bad(key, "expected twice_single or single")),
                }
            }
            "hole_threshold" => phys.hole_threshold = number(key, value)?,
            "u_over_j" => self.u_over_j = Some(number(key, value)?),
            "t_end" => {
                parse_time(value, 1.0).map_err(|m| bad(key, m))?;
                self.t_end = Some(value.to_string());
            }
            "dt" => self.dt = Some(number(key, value)?),
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| bad(key, format!("`{value}` is not a seed")))?
            }
            "traj" => self.traj = count(key, value)?,
            "model" => self.model = Some(value.parse().map_err(|m: String| bad(key, m))?),
            "boundary" => self.boundary = value.parse().map_err(|m: String| bad(key, m))?,
            _ => return Err(bad(key, "unknown key")),
        }
        Ok(())
    }

    /// Applies every pair from a config text.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (key, value) in parse_config(text)? {
            self.set(&key, &value)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad("config", format!("cannot read {}: {e}", path.display())))?;
        self.apply_text(&text)
    }

    /// End time in units of 1/U, given U/J for `/J` suffixes.
    pub fn t_end_or(&self, default: f64, u_over_j: f64) -> Result<f64> {
        match &self.t_end {
            None => Ok(default),
            Some(s) => parse_time(s, u_over_j).map_err(|m| bad("t_end", m)),
        }
    }
}

/// Parses `x`, `x/U` or `x/J` into units of 1/U.
pub fn parse_time(s: &str, u_over_j: f64) -> std::result::Result<f64, String> {
    let s = s.trim();
    let (num, scale) = if let Some(head) = s.strip_suffix("/J") {
        (head, u_over_j)
    } else if let Some(head) = s.strip_suffix("/U") {
        (head, 1.0)
    } else {
        (s, 1.0)
    };
    let x: f64 = num
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a time"))?;
    let t = x * scale;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(format!("time `{s}` must be finite and nonnegative"));
    }
    Ok(t)
}

/// Splits a config text into `(key, value)` pairs in file order.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(bad(line, format!("line {} is not key=value", lineno + 1)));
        };
        let key = key.trim();
        if !Settings::KEYS.contains(&key) {
            return Err(bad(key, "unknown key"));
        }
        out.push((key.to_string(), value.trim().to_string()));
    }
    Ok(out)
}
