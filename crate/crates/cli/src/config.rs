//! Run configuration: one JSON file drives every subcommand, command-line
//! flags and `ISING_CURRENTS_SEED` override its keys.

use std::path::Path;

use ising_currents::model::{CouplingModel, Kernel, Term};
use ising_currents::percolation::BlockFamily;
use ising_currents::region::{Boundary, Region};
use ising_currents::sampler::{Algorithm, ChainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "ISING_CURRENTS_SEED";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeSpec {
    #[default]
    Box,
    Torus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    #[serde(flatten)]
    pub kernel: Kernel<f64>,
    #[serde(default = "one")]
    pub weight: f64,
}

fn one() -> f64 {
    1.0
}

fn nearest_neighbor_terms() -> Vec<TermSpec> {
    vec![TermSpec {
        kernel: Kernel::NearestNeighbor,
        weight: 1.0,
    }]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSpec {
    pub algorithm: Algorithm,
    pub sweeps: u64,
    /// Defaults to a tenth of `sweeps`.
    pub burn_in: Option<u64>,
    pub thinning: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::Worm,
            sweeps: 10_000,
            burn_in: None,
            thinning: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PercolationSpec {
    /// Half-width of the block in the LRO chain; defaults to `L / 2`.
    pub block: Option<usize>,
    pub uniqueness_fraction: f64,
    pub uniqueness_threshold: f64,
    pub order_parameters: bool,
    pub block_family: BlockFamily,
    pub spin_algorithm: Algorithm,
    pub cross_check: bool,
    /// Separations for the even-observable mixing scan; empty skips it.
    pub mixing_separations: Vec<usize>,
}

impl Default for PercolationSpec {
    fn default() -> Self {
        Self {
            block: None,
            uniqueness_fraction: 0.05,
            uniqueness_threshold: 0.01,
            order_parameters: true,
            block_family: BlockFamily::Boxes,
            spin_algorithm: Algorithm::SpinSw,
            cross_check: false,
            mixing_separations: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralSpec {
    /// Displacements `x - y` for the Green-function table.
    pub green: Vec<Vec<i64>>,
    pub block_averages: Vec<usize>,
    /// Expected transience verdict, asserted when present.
    pub expect: Option<String>,
}

impl Default for SpectralSpec {
    fn default() -> Self {
        Self {
            green: Vec::new(),
            block_averages: vec![2, 4, 8],
            expect: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSpec {
    pub betas: Vec<f64>,
    /// `[start, stop, step]`, inclusive of `stop` up to rounding.
    pub range: Option<[f64; 3]>,
    /// Box half-widths; defaults to `[L]`.
    pub sides: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OracleSpec {
    pub random_regions: usize,
    pub sampler_seeds: u64,
    pub sampler_samples: u64,
    pub sampler_beta: f64,
}

impl Default for OracleSpec {
    fn default() -> Self {
        Self {
            random_regions: 50,
            sampler_seeds: 20,
            sampler_samples: 5000,
            sampler_beta: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub dimension: usize,
    #[serde(default = "nearest_neighbor_terms")]
    pub terms: Vec<TermSpec>,
    /// Overrides the family default (nearest-neighbor, exponential and
    /// power-law kernels with positive weights).
    #[serde(default)]
    pub reflection_positive: Option<bool>,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(default)]
    pub shape: ShapeSpec,
    #[serde(default = "free")]
    pub bc: Boundary,
    pub beta: f64,
    #[serde(default)]
    pub h: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampler: SamplerSpec,
    #[serde(default)]
    pub percolation: PercolationSpec,
    #[serde(default)]
    pub spectral: SpectralSpec,
    #[serde(default)]
    pub scan: ScanSpec,
    #[serde(default)]
    pub oracle: OracleSpec,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

fn free() -> Boundary {
    Boundary::Free
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub beta: Option<f64>,
    pub seed: Option<u64>,
    pub l: Option<usize>,
    pub bc: Option<Boundary>,
    pub sweeps: Option<u64>,
    pub algorithm: Option<Algorithm>,
}

impl Config {
    /// Reads a config file, or the `config` echoed inside a run manifest.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let value: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
        let value = match value.get("config") {
            Some(inner) if value.get("files").is_some() => inner.clone(),
            _ => value,
        };
        let cfg: Config = serde_json::from_value(value).map_err(|e| e.to_string())?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            ));
        }
        Ok(cfg)
    }

    /// Built-in configuration for commands that may run without a file.
    pub fn default_oracle() -> Self {
        Self::parse(r#"{"dimension": 2, "L": 1, "bc": "plus", "beta": 0.6}"#).unwrap()
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), CliError> {
        if let Ok(s) = std::env::var(SEED_ENV) {
            self.seed = s
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("{SEED_ENV}={s:?} is not an unsigned integer")))?;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(b) = o.beta {
            self.beta = b;
        }
        if let Some(l) = o.l {
            self.l = l;
        }
        if let Some(bc) = o.bc {
            self.bc = bc;
        }
        if let Some(s) = o.sweeps {
            self.sampler.sweeps = s;
        }
        if let Some(a) = o.algorithm {
            self.sampler.algorithm = a;
        }
        Ok(())
    }

    /// The checked model; fails on couplings that violate the standing conditions.
    pub fn model(&self) -> Result<CouplingModel<f64>, CliError> {
        let m = CouplingModel::new(self.dimension, self.terms(), self.h)?;
        Ok(match self.reflection_positive {
            Some(flag) => m.with_reflection_positive(flag),
            None => m,
        })
    }

    /// The model without validation, for reporting which conditions fail.
    pub fn model_unchecked(&self) -> CouplingModel<f64> {
        let m = CouplingModel::new_unchecked(self.dimension, self.terms(), self.h);
        match self.reflection_positive {
            Some(flag) => m.with_reflection_positive(flag),
            None => m,
        }
    }

    fn terms(&self) -> Vec<Term<f64>> {
        self.terms.iter().map(|t| Term::new(t.kernel, t.weight)).collect()
    }

    pub fn region(&self) -> Result<Region<f64>, CliError> {
        let model = self.model()?;
        Ok(match self.shape {
            ShapeSpec::Box => Region::lattice_box(&model, self.l, self.bc)?,
            ShapeSpec::Torus => {
                if self.bc == Boundary::Plus {
                    return Err(CliError::Usage("a torus has no plus boundary condition".into()));
                }
                Region::torus(&model, self.l)?
            }
        })
    }

    pub fn chain(&self) -> ChainConfig {
        let s = &self.sampler;
        ChainConfig::new(self.beta, self.bc, s.sweeps, self.seed)
            .with_algorithm(s.algorithm)
            .with_burn_in(s.burn_in.unwrap_or(s.sweeps / 10))
            .with_thinning(s.thinning)
    }

    /// The scan grid, sorted ascending.
    pub fn betas(&self) -> Result<Vec<f64>, CliError> {
        let mut betas = self.scan.betas.clone();
        if let Some([start, stop, step]) = self.scan.range {
            if !(step > 0.0) || stop < start {
                return Err(CliError::Usage("scan range needs start <= stop and step > 0".into()));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            betas.extend((0..=n).map(|i| start + step * i as f64));
        }
        if betas.is_empty() {
            betas.push(self.beta);
        }
        if betas.iter().any(|b| !(b.is_finite() && *b >= 0.0)) {
            return Err(CliError::Usage("scan betas must be finite and >= 0".into()));
        }
        if betas.windows(2).any(|w| w[1] < w[0]) {
            return Err(CliError::Usage("scan betas must be sorted ascending".into()));
        }
        Ok(betas)
    }
}
