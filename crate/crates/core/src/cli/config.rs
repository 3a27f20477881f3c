//! TOML run configuration.
//!
//! Every key is optional and falls back to the reference values. Angles are
//! given in degrees and matter as density plus electron fraction; both are
//! converted once, in [`RunConfigFile::into_settings`].

use std::path::Path;

use serde::Deserialize;

use crate::correlator::BaselineSchedule;
use crate::optimize::{Evaluator, ScanGrid};
use crate::params::{potential_from_density, OscillationParams};

use super::CliError;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OscillationSection {
    pub dm21_sq: f64,
    pub dm31_sq: f64,
    pub theta12_deg: f64,
    pub theta13_deg: f64,
    pub theta23_deg: f64,
    pub delta_cp_deg: f64,
    pub energy_gev: f64,
    pub rho: f64,
    pub ye: f64,
    pub alpha: Option<f64>,
}

impl Default for OscillationSection {
    fn default() -> Self {
        let p = OscillationParams::reference();
        OscillationSection {
            dm21_sq: p.dm21_sq,
            dm31_sq: p.dm31_sq,
            theta12_deg: 33.48,
            theta13_deg: 8.5,
            theta23_deg: 42.3,
            delta_cp_deg: 306.0,
            energy_gev: p.energy,
            rho: 3.0,
            ye: 0.5,
            alpha: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScheduleSection {
    pub l1: f64,
    pub spacing: f64,
}

impl Default for ScheduleSection {
    fn default() -> Self {
        ScheduleSection {
            l1: 140.15,
            spacing: 1255.7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub l1_min: f64,
    pub l1_max: f64,
    pub l1_steps: usize,
    pub dl_min: f64,
    pub dl_max: f64,
    pub dl_steps: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        let g = ScanGrid::default();
        GridSection {
            l1_min: g.l1_min,
            l1_max: g.l1_max,
            l1_steps: g.l1_steps,
            dl_min: g.dl_min,
            dl_max: g.dl_max,
            dl_steps: g.dl_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub theta13_deg: Vec<f64>,
    pub alpha: Vec<f64>,
    pub delta_cp_deg: Vec<f64>,
    pub refine: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            theta13_deg: vec![0.0, 4.0, 6.0, 8.5, 12.0],
            alpha: vec![0.0, 0.01, 0.0305, 0.06],
            delta_cp_deg: vec![0.0, 306.0],
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationSection {
    pub n_runs: u64,
    pub seed: u64,
}

impl Default for SimulationSection {
    fn default() -> Self {
        SimulationSection {
            n_runs: 1_000_000,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfigFile {
    pub oscillation: OscillationSection,
    pub schedule: ScheduleSection,
    pub grid: GridSection,
    pub sweep: SweepSection,
    pub simulation: SimulationSection,
}

/// Sweep values in internal units (radians for angles).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSettings {
    pub theta13: Vec<f64>,
    pub alpha: Vec<f64>,
    pub delta_cp: Vec<f64>,
    pub refine: bool,
}

/// Validated configuration in internal units.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub params: OscillationParams,
    pub schedule: BaselineSchedule,
    pub grid: ScanGrid,
    pub sweep: SweepSettings,
    pub n_runs: u64,
    pub seed: u64,
    pub evaluator: Evaluator,
}

fn invalid(key: &str, message: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{key}: {message}"))
}

fn finite(key: &str, value: f64) -> Result<f64, CliError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(invalid(key, "must be finite"))
    }
}

fn angle(key: &str, degrees: f64) -> Result<f64, CliError> {
    let d = finite(key, degrees)?;
    if !(0.0..=90.0).contains(&d) {
        return Err(invalid(key, format!("{d} is outside [0, 90] degrees")));
    }
    Ok(d.to_radians())
}

impl RunConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {}", e.message())))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn into_settings(self) -> Result<Settings, CliError> {
        let o = &self.oscillation;
        let potential = potential_from_density(finite("oscillation.rho", o.rho)?, o.ye)
            .map_err(|e| invalid("oscillation.rho/ye", e))?;
        let mut params = OscillationParams {
            dm21_sq: finite("oscillation.dm21_sq", o.dm21_sq)?,
            dm31_sq: finite("oscillation.dm31_sq", o.dm31_sq)?,
            theta12: angle("oscillation.theta12_deg", o.theta12_deg)?,
            theta13: angle("oscillation.theta13_deg", o.theta13_deg)?,
            theta23: angle("oscillation.theta23_deg", o.theta23_deg)?,
            delta_cp: 0.0,
            energy: o.energy_gev,
            potential,
            alpha_override: o.alpha,
        };
        params =
            params.with_delta_cp(finite("oscillation.delta_cp_deg", o.delta_cp_deg)?.to_radians());
        if params.dm31_sq == 0.0 {
            return Err(invalid("oscillation.dm31_sq", "must be nonzero"));
        }
        if !(params.energy.is_finite() && params.energy > 0.0) {
            return Err(invalid("oscillation.energy_gev", "must be positive"));
        }
        if let Some(a) = o.alpha {
            finite("oscillation.alpha", a)?;
        }
        params.validate().map_err(|e| invalid("oscillation", e))?;

        let schedule = BaselineSchedule::new(self.schedule.l1, self.schedule.spacing)
            .map_err(|e| invalid("schedule", e))?;

        let g = &self.grid;
        let grid = ScanGrid::new(
            (g.l1_min, g.l1_max, g.l1_steps),
            (g.dl_min, g.dl_max, g.dl_steps),
        )
        .map_err(|e| invalid("grid", e))?;

        let theta13 = self
            .sweep
            .theta13_deg
            .iter()
            .map(|&d| angle("sweep.theta13_deg", d))
            .collect::<Result<_, _>>()?;
        let alpha = self
            .sweep
            .alpha
            .iter()
            .map(|&a| finite("sweep.alpha", a))
            .collect::<Result<_, _>>()?;
        let delta_cp = self
            .sweep
            .delta_cp_deg
            .iter()
            .map(|&d| finite("sweep.delta_cp_deg", d).map(f64::to_radians))
            .collect::<Result<_, _>>()?;

        if self.simulation.n_runs == 0 {
            return Err(invalid("simulation.n_runs", "must be at least 1"));
        }

        Ok(Settings {
            params,
            schedule,
            grid,
            sweep: SweepSettings {
                theta13,
                alpha,
                delta_cp,
                refine: self.sweep.refine,
            },
            n_runs: self.simulation.n_runs,
            seed: self.simulation.seed,
            evaluator: Evaluator::Expansion,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_reference_values() {
        let s = RunConfigFile::parse("").unwrap().into_settings().unwrap();
        let r = OscillationParams::reference();
        assert_eq!(s.params.dm21_sq, r.dm21_sq);
        assert!((s.params.theta13 - r.theta13).abs() < 1e-15);
        assert!((s.params.delta_cp - r.delta_cp).abs() < 1e-15);
        assert!((s.params.potential - r.potential).abs() < 1e-27);
        assert_eq!(s.grid, ScanGrid::default());
        assert_eq!(s.schedule, BaselineSchedule::new(140.15, 1255.7).unwrap());
    }

    #[test]
    fn partial_sections_overlay_defaults() {
        let text = "[oscillation]\ntheta13_deg = 0.0\n[grid]\nl1_steps = 11\n";
        let s = RunConfigFile::parse(text).unwrap().into_settings().unwrap();
        assert_eq!(s.params.theta13, 0.0);
        assert_eq!(s.params.dm31_sq, 2.457e-3);
        assert_eq!(s.grid.l1_steps, 11);
        assert_eq!(s.grid.dl_steps, 301);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfigFile::parse("[oscillation]\ntheta14_deg = 3.0\n").unwrap_err();
        assert!(err.to_string().contains("theta14_deg"), "{err}");
        assert!(RunConfigFile::parse("[nonsense]\nx = 1\n").is_err());
    }

    #[test]
    fn validation_names_the_key() {
        let err = RunConfigFile::parse("[oscillation]\ntheta23_deg = 95.0\n")
            .unwrap()
            .into_settings()
            .unwrap_err();
        assert!(err.to_string().contains("oscillation.theta23_deg"), "{err}");
        let err = RunConfigFile::parse("[sweep]\ntheta13_deg = [1.0, -2.0]\n")
            .unwrap()
            .into_settings()
            .unwrap_err();
        assert!(err.to_string().contains("sweep.theta13_deg"), "{err}");
        let err = RunConfigFile::parse("[grid]\nl1_min = 5.0\nl1_max = 1.0\n")
            .unwrap()
            .into_settings()
            .unwrap_err();
        assert!(err.to_string().starts_with("grid:"), "{err}");
    }
}
