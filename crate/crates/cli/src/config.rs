use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mpf_core::bounds::RangeClass;
use mpf_core::hamiltonian::{heisenberg_chain, long_range_chain};
use mpf_core::mpf::MpfSpec;
use mpf_core::{HamiltonianSpec, NormConfig, NormMode};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Core(#[from] mpf_core::Error),
}

/// Where the Hamiltonian comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum HamiltonianSource {
    Heisenberg {
        n: usize,
        #[serde(default = "one")]
        coupling: f64,
        #[serde(default)]
        field: f64,
        #[serde(default = "yes")]
        open_boundary: bool,
    },
    LongRange {
        n: usize,
        exponent: f64,
        #[serde(default = "one")]
        base: f64,
    },
    File {
        path: PathBuf,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl Default for HamiltonianSource {
    fn default() -> Self {
        HamiltonianSource::Heisenberg {
            n: 4,
            coupling: 1.0,
            field: 0.0,
            open_boundary: true,
        }
    }
}

impl HamiltonianSource {
    /// The same family at a different size; files have a fixed size.
    pub fn build_at(&self, n: Option<usize>) -> Result<HamiltonianSpec, ConfigError> {
        Ok(match self {
            HamiltonianSource::Heisenberg {
                n: n0,
                coupling,
                field,
                open_boundary,
            } => heisenberg_chain(n.unwrap_or(*n0), *coupling, *field, *open_boundary)?,
            HamiltonianSource::LongRange { n: n0, exponent, base } => {
                long_range_chain(n.unwrap_or(*n0), *exponent, *base)?
            }
            HamiltonianSource::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                    path: path.clone(),
                    source,
                })?;
                HamiltonianSpec::from_json(&text)?
            }
        })
    }

    pub fn is_family(&self) -> bool {
        !matches!(self, HamiltonianSource::File { .. })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for TauGrid {
    fn default() -> Self {
        Self {
            min: 1e-2,
            max: 3e-1,
            points: 12,
        }
    }
}

impl std::str::FromStr for TauGrid {
    type Err = ConfigError;

    /// `min:max:points`.
    fn from_str(s: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || ConfigError::Invalid(format!("tau grid {s:?} is not min:max:points"));
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(Self {
            min: parts[0].trim().parse().map_err(|_| bad())?,
            max: parts[1].trim().parse().map_err(|_| bad())?,
            points: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum NormModeArg {
    Exact,
    OneNorm,
}

impl From<NormModeArg> for NormMode {
    fn from(m: NormModeArg) -> Self {
        match m {
            NormModeArg::Exact => NormMode::ExactDense,
            NormModeArg::OneNorm => NormMode::OneNormBound,
        }
    }
}

/// Parameters of the formula-level cost sweeps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostConfig {
    /// System sizes for the N sweep; g is recomputed per size for families.
    pub n_values: Vec<f64>,
    pub eps_values: Vec<f64>,
    pub range_class: RangeClass,
    pub decay: f64,
    pub dimension: f64,
    /// Window of orders for the untruncated growth diagnostics.
    pub q_window: (usize, usize),
}

impl Default for CostConfig {
    fn default() -> Self {
        Self {
            n_values: vec![4.0, 16.0, 64.0, 256.0, 1024.0],
            eps_values: vec![1e-2, 1e-3, 1e-4, 1e-5, 1e-6],
            range_class: RangeClass::FiniteRange,
            decay: 0.0,
            dimension: 1.0,
            q_window: (2, 40),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub hamiltonian: HamiltonianSource,
    pub p: usize,
    /// Number of Richardson terms J.
    pub terms: usize,
    /// Explicit step multipliers; overrides `terms` when present.
    pub k_list: Option<Vec<u32>>,
    pub tau_grid: TauGrid,
    pub eps: f64,
    pub t: f64,
    pub norm_mode: NormModeArg,
    pub dense_cap: usize,
    pub q_max: usize,
    /// Composition count searched for μ.
    pub mu_n_max: usize,
    pub out_dir: PathBuf,
    pub cost: CostConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            hamiltonian: HamiltonianSource::default(),
            p: 2,
            terms: 2,
            k_list: None,
            tau_grid: TauGrid::default(),
            eps: 1e-3,
            t: 1.0,
            norm_mode: NormModeArg::Exact,
            dense_cap: mpf_core::dense::DEFAULT_DENSE_CAP,
            q_max: mpf_core::bch::DEFAULT_Q_MAX,
            mu_n_max: 8,
            out_dir: PathBuf::from("."),
            cost: CostConfig::default(),
        }
    }
}

impl ExperimentConfig {
    /// Reads JSON for `.json` files and TOML otherwise.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let parse_err = |message: String| ConfigError::Parse {
            path: path.to_path_buf(),
            message,
        };
        if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
            serde_json::from_str(&text).map_err(|e| parse_err(e.to_string()))
        } else {
            toml::from_str(&text).map_err(|e| parse_err(e.to_string()))
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if ![1, 2, 4, 6].contains(&self.p) {
            return bad(format!("p must be one of 1, 2, 4, 6, got {}", self.p));
        }
        if self.terms == 0 {
            return bad("J must be at least 1".into());
        }
        if let Some(k) = &self.k_list {
            if k.is_empty() {
                return bad("k_list must not be empty".into());
            }
        }
        let g = self.tau_grid;
        if !(g.min > 0.0 && g.max > g.min && g.max.is_finite()) || g.points < 2 {
            return bad(format!(
                "tau grid needs 0 < min < max and at least 2 points, got {}:{}:{}",
                g.min, g.max, g.points
            ));
        }
        for (name, v) in [("eps", self.eps), ("t", self.t)] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if self.q_max < 2 {
            return bad(format!("q_max must be at least 2, got {}", self.q_max));
        }
        if self.mu_n_max == 0 {
            return bad("mu_n_max must be at least 1".into());
        }
        if self.cost.q_window.0 < 2 || self.cost.q_window.1 < self.cost.q_window.0 {
            return bad(format!("invalid q_window {:?}", self.cost.q_window));
        }
        if self.cost.n_values.iter().chain(&self.cost.eps_values).any(|v| !(*v > 0.0)) {
            return bad("sweep values must be positive".into());
        }
        Ok(())
    }

    pub fn norm(&self) -> NormConfig {
        NormConfig {
            mode: self.norm_mode.into(),
            dense_cap: self.dense_cap,
        }
    }

    /// Richardson coefficients for the configured base order.
    pub fn mpf_spec(&self) -> Result<MpfSpec, ConfigError> {
        Ok(match &self.k_list {
            Some(k) => MpfSpec::richardson(self.p, k)?,
            None => MpfSpec::richardson_consecutive(self.p, self.terms)?,
        })
    }

    pub fn tau_values(&self) -> Vec<f64> {
        mpf_core::fit::geometric_grid(self.tau_grid.min, self.tau_grid.max, self.tau_grid.points)
    }
}
