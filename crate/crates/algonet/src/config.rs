use std::path::{Path, PathBuf};

use algonet_core::analysis;
use algonet_core::dynamics::{EpidemicParams, ImitationSource};
use algonet_core::graph::NetworkParams;
use algonet_core::machines::{DEFAULT_ENUMERATION_LIMIT, DEFAULT_K_MAX, MAX_K_MAX};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formats::parse_bits;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OmegaMethodConfig {
    Enumerate,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceConfig {
    All,
    Infected,
}

impl From<SourceConfig> for ImitationSource {
    fn from(s: SourceConfig) -> Self {
        match s {
            SourceConfig::All => ImitationSource::AllNeighbors,
            SourceConfig::Infected => ImitationSource::InfectedNeighbors,
        }
    }
}

/// Flat experiment configuration. Every field has a default, and the
/// resolved values are written next to the outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub nu: Vec<f64>,
    pub delta: Vec<f64>,
    pub rho0: f64,
    /// Exponent in `c(N) = ceil(N^C)`.
    pub c: f64,
    pub k_max: usize,
    /// Step budget per machine run.
    pub t_max: u64,
    /// Network input word as a 0/1 string.
    pub w: String,
    pub t_max_steps: u64,
    pub t0: usize,
    pub window: usize,
    pub tolerance: f64,
    pub reimitation: bool,
    pub imitation_source: SourceConfig,
    pub seeds: u64,
    pub master_seed: u64,
    pub omega_method: OmegaMethodConfig,
    pub omega_samples: u64,
    pub omega_max_len: usize,
    pub out_dir: PathBuf,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub export_graphs: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: vec![100, 1000, 10_000],
            m: vec![3],
            nu: vec![0.25],
            delta: vec![1.0],
            rho0: 0.01,
            c: analysis::DEFAULT_C,
            k_max: DEFAULT_K_MAX,
            t_max: 10_000,
            w: String::new(),
            t_max_steps: 2000,
            t0: analysis::DEFAULT_T0,
            window: analysis::DEFAULT_WINDOW,
            tolerance: analysis::DEFAULT_TOLERANCE,
            reimitation: false,
            imitation_source: SourceConfig::All,
            seeds: 10,
            master_seed: 0,
            omega_method: OmegaMethodConfig::MonteCarlo,
            omega_samples: 100_000,
            omega_max_len: 18,
            out_dir: PathBuf::from("out"),
            workers: 0,
            export_graphs: false,
        }
    }
}

/// One point of the parameter grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub m: usize,
    pub nu: f64,
    pub delta: f64,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn input_word(&self) -> Vec<bool> {
        parse_bits(&self.w).expect("validated")
    }

    pub fn epidemic(&self, nu: f64, delta: f64) -> EpidemicParams {
        EpidemicParams::new(nu, delta, self.rho0)
            .with_reimitation(self.reimitation)
            .with_source(self.imitation_source.into())
    }

    /// Cells in row-major order over `(N, m, nu, delta)`.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                for &nu in &self.nu {
                    for &delta in &self.delta {
                        out.push(Cell {
                            index: out.len(),
                            n,
                            m,
                            nu,
                            delta,
                        });
                    }
                }
            }
        }
        out
    }

    /// Steps simulated per run: enough to cover both the requested horizon
    /// and the window up to `c(N)`.
    pub fn horizon(&self, n: usize) -> u64 {
        let cn = analysis::c_of_n(n, self.c).expect("validated") as u64;
        self.t_max_steps.max(cn)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: String| Err(ConfigError::Invalid(msg));
        for (name, empty) in [
            ("n", self.n.is_empty()),
            ("m", self.m.is_empty()),
            ("nu", self.nu.is_empty()),
            ("delta", self.delta.is_empty()),
        ] {
            if empty {
                return bad(format!("grid dimension `{name}` is empty"));
            }
        }
        for &n in &self.n {
            for &m in &self.m {
                if let Err(e) = NetworkParams::new(n, m, 0).validate() {
                    return bad(format!("N={n}, m={m}: {e}"));
                }
            }
        }
        for &nu in &self.nu {
            for &delta in &self.delta {
                if let Err(e) = self.epidemic(nu, delta).validate() {
                    return bad(format!("nu={nu}, delta={delta}: {e}"));
                }
            }
        }
        if let Err(e) = analysis::c_of_n(1, self.c) {
            return bad(format!("C={}: {e}", self.c));
        }
        if self.k_max == 0 || self.k_max > MAX_K_MAX {
            return bad(format!("k_max must be in 1..={MAX_K_MAX}"));
        }
        if self.t_max == 0 {
            return bad("t_max must be at least 1".into());
        }
        if parse_bits(&self.w).is_err() {
            return bad("w must be a string of 0s and 1s".into());
        }
        if self.t_max_steps == 0 {
            return bad("t_max_steps must be at least 1".into());
        }
        if self.window < 2 || !(self.tolerance > 0.0) {
            return bad("stationarity needs window >= 2 and tolerance > 0".into());
        }
        for &n in &self.n {
            let cn = analysis::c_of_n(n, self.c).expect("checked");
            if self.t0 >= cn {
                return bad(format!("t0={} must be below c(N)={cn} for N={n}", self.t0));
            }
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1".into());
        }
        match self.omega_method {
            OmegaMethodConfig::MonteCarlo if self.omega_samples == 0 => {
                return bad("omega_samples must be at least 1".into())
            }
            OmegaMethodConfig::Enumerate if self.omega_max_len > DEFAULT_ENUMERATION_LIMIT => {
                return bad(format!("omega_max_len must be at most {DEFAULT_ENUMERATION_LIMIT}"))
            }
            _ => {}
        }
        Ok(())
    }
}
