use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::IoError;
use crate::closure::{ClosureParams, SamplingParams};
use crate::maximality::CrovisierSetup;
use crate::torus::{System, SystemSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub max_cycle_len: usize,
    pub n_paths: usize,
    pub path_len: usize,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        let d = SamplingParams::default();
        SamplingConfig {
            max_cycle_len: d.max_cycle_len,
            n_paths: d.n_paths,
            path_len: d.path_len,
            seed: d.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrovisierConfig {
    pub q_period: u32,
    pub depth: u32,
    /// In units of the grid cell width.
    pub v_cells: f64,
    pub n_iter: usize,
    /// Length of the unstable segment of `B` carried by the witness family.
    pub a: f64,
    pub n_half: i64,
    pub n_t: usize,
}

impl Default for CrovisierConfig {
    fn default() -> Self {
        let s = CrovisierSetup::default();
        CrovisierConfig {
            q_period: s.q_period,
            depth: s.depth,
            v_cells: 2.0,
            n_iter: s.n_iter,
            a: 0.3,
            n_half: 30,
            n_t: 31,
        }
    }
}

impl CrovisierConfig {
    pub fn cell_width(&self) -> f64 {
        0.5f64.powi(self.depth as i32)
    }

    pub fn setup(&self) -> CrovisierSetup {
        CrovisierSetup {
            q_period: self.q_period,
            v_radius: self.v_cells * self.cell_width(),
            depth: self.depth,
            n_iter: self.n_iter,
            ..CrovisierSetup::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

/// Everything a subcommand needs. Defaults, then a TOML file, then flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub delta: f64,
    pub epsilon: f64,
    pub resolution: f64,
    pub u_radius: f64,
    pub max_iter: usize,
    /// Membership tolerance for bracket checks; `2 · resolution` when absent.
    pub membership_tol: Option<f64>,
    pub kmax: usize,
    pub system: SystemSpec,
    pub sampling: SamplingConfig,
    pub crovisier: CrovisierConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            delta: 0.04,
            epsilon: 0.1,
            resolution: 0.004,
            u_radius: 0.15,
            max_iter: 10,
            membership_tol: None,
            kmax: 8,
            system: SystemSpec::default(),
            sampling: SamplingConfig::default(),
            crovisier: CrovisierConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| IoError::Toml(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn membership_tol(&self) -> f64 {
        self.membership_tol.unwrap_or(2.0 * self.resolution)
    }

    pub fn sampling_params(&self) -> SamplingParams {
        SamplingParams {
            max_cycle_len: self.sampling.max_cycle_len,
            n_paths: self.sampling.n_paths,
            path_len: self.sampling.path_len,
            seed: self.sampling.seed,
            ..SamplingParams::default()
        }
    }

    pub fn closure_params(&self) -> ClosureParams {
        ClosureParams {
            delta: self.delta,
            u_radius: self.u_radius,
            max_iter: self.max_iter,
            sampling: self.sampling_params(),
        }
    }

    /// Every violated invariant, not just the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        let mut positive = |name: &str, x: f64| {
            if !(x > 0.0 && x.is_finite()) {
                v.push(format!("{name} must be positive and finite (got {x})"));
            }
        };
        positive("delta", self.delta);
        positive("epsilon", self.epsilon);
        positive("resolution", self.resolution);
        positive("u_radius", self.u_radius);
        positive("crovisier.a", self.crovisier.a);
        if let Some(t) = self.membership_tol {
            positive("membership_tol", t);
        }
        if !(self.crovisier.v_cells >= 0.0 && self.crovisier.v_cells.is_finite()) {
            v.push(format!("crovisier.v_cells must be non-negative (got {})", self.crovisier.v_cells));
        }
        let mut at_least = |name: &str, x: usize, min: usize| {
            if x < min {
                v.push(format!("{name} must be at least {min} (got {x})"));
            }
        };
        at_least("max_iter", self.max_iter, 1);
        at_least("kmax", self.kmax, 1);
        at_least("sampling.max_cycle_len", self.sampling.max_cycle_len, 1);
        at_least("sampling.path_len", self.sampling.path_len, 2);
        at_least("crovisier.n_iter", self.crovisier.n_iter, 1);
        at_least("crovisier.n_t", self.crovisier.n_t, 2);
        at_least("crovisier.depth", self.crovisier.depth as usize, 1);
        if self.crovisier.n_half < 1 {
            v.push(format!("crovisier.n_half must be at least 1 (got {})", self.crovisier.n_half));
        }
        if let Err(e) = self.system.build() {
            v.push(format!("system: {e}"));
        }
        v
    }

    pub fn validate(&self) -> Result<(), IoError> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(IoError::Invalid(v))
        }
    }

    pub fn build_system(&self) -> Result<System, IoError> {
        self.system.build().map_err(|e| IoError::Invalid(vec![format!("system: {e}")]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_roundtrip() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(ExperimentConfig::from_toml(&c.to_toml()).unwrap(), c);
    }

    #[test]
    fn partial_file_keeps_defaults() {
        let c = ExperimentConfig::from_toml("delta = 0.02\n[sampling]\nseed = 9\n").unwrap();
        assert_eq!(c.delta, 0.02);
        assert_eq!(c.sampling.seed, 9);
        assert_eq!(c.sampling.n_paths, SamplingConfig::default().n_paths);
        assert!(ExperimentConfig::from_toml("detla = 1\n").is_err());
    }

    #[test]
    fn reports_every_violation() {
        let c = ExperimentConfig {
            delta: -1.0,
            resolution: 0.0,
            kmax: 0,
            system: SystemSpec::Automorphism {
                matrix: vec![vec![1, 0], vec![0, 1]],
            },
            ..ExperimentConfig::default()
        };
        let v = c.violations();
        assert_eq!(v.len(), 4, "{v:?}");
        assert!(matches!(c.validate(), Err(IoError::Invalid(list)) if list == v));
    }
}
