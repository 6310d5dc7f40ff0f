use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use apriesz_core::bohrint::{Budget, MIN_GRID};
use apriesz_core::criteria::ScanStrategy;
use apriesz_core::flatness::PolyFamilySpec;
use apriesz_core::riesz::{RankOneParams, StageConfig};
use apriesz_core::{Error, Result, SymbolBasis};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    #[serde(default)]
    pub basis: BasisConfig,
    pub rank_one: Option<RankOneConfig>,
    pub family: Option<PolyFamilySpec>,
    #[serde(default)]
    pub analysis: AnalysisConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    /// Declared symbols besides the implicit unit symbol `1`.
    #[serde(default)]
    pub symbols: Vec<SymbolConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SymbolConfig {
    pub name: String,
    pub value: f64,
}

/// Explicit stages over the declared basis, or generated independent-symbol
/// stages with the listed cut numbers.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankOneConfig {
    pub stages: Option<Vec<StageConfig>>,
    pub independent: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodChoice {
    #[default]
    Auto,
    Tensor,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyChoice {
    #[default]
    Greedy,
    FixedStride,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisConfig {
    pub method: MethodChoice,
    pub samples: u64,
    pub nodes: usize,
    pub k_max: usize,
    pub strategy: StrategyChoice,
    pub window: usize,
    pub start: usize,
    pub stride: usize,
    /// Subsequence (`Q` stages) for riesz-check, fejer and degree-report.
    pub indices: Vec<usize>,
    /// Stage paired with `indices` in fejer.
    pub m: Option<usize>,
    /// Number of stages summed by guenais.
    pub stages: Option<usize>,
    pub q: usize,
    pub l: Vec<u32>,
    pub a: f64,
    pub b: f64,
    /// Prikhod'ko sizes `p_n`; `m_n = p_n / m_divisor`, `eps_n = eps_numerator / p_n`.
    pub sizes: Vec<u64>,
    pub m_divisor: u64,
    pub eps_numerator: u64,
    pub support_cap: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            method: MethodChoice::Auto,
            samples: 100_000,
            nodes: MIN_GRID,
            k_max: 5,
            strategy: StrategyChoice::Greedy,
            window: 3,
            start: 0,
            stride: 1,
            indices: Vec::new(),
            m: None,
            stages: None,
            q: 128,
            l: vec![2],
            a: 1.0,
            b: 2.0,
            sizes: vec![64, 128, 256],
            m_divisor: 64,
            eps_numerator: 16,
            support_cap: apriesz_core::riesz::DEFAULT_SUPPORT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: "results".into() }
    }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Canonical text of the resolved config; its hash goes in the manifest.
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fills in the seed: the override if given, else the configured one,
    /// else one drawn from the clock.
    pub fn resolve_seed(&mut self, seed_override: Option<u64>) -> u64 {
        let seed = seed_override.or(self.seed).unwrap_or_else(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_nanos() as u64)
                .unwrap_or(0)
        });
        self.seed = Some(seed);
        seed
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn basis(&self) -> Result<Arc<SymbolBasis>> {
        SymbolBasis::with_unit(self.basis.symbols.iter().map(|s| (s.name.clone(), s.value)))
    }

    pub fn rank_one_params(&self) -> Result<RankOneParams> {
        let cfg = self
            .rank_one
            .as_ref()
            .ok_or_else(|| Error::Config("missing [rank_one] section".into()))?;
        match (&cfg.stages, &cfg.independent) {
            (Some(stages), None) => RankOneParams::from_config(&self.basis()?, stages).map_err(|e| match e {
                Error::InvalidParams(msg) => Error::InvalidParams(format!("rank_one.stages: {msg}")),
                Error::Config(msg) => Error::Config(format!("rank_one.{msg}")),
                other => other,
            }),
            (None, Some(ps)) => RankOneParams::independent(ps)
                .map_err(|e| Error::InvalidParams(format!("rank_one.independent: {e}"))),
            (Some(_), Some(_)) => Err(Error::Config(
                "rank_one: give either `stages` or `independent`, not both".into(),
            )),
            (None, None) => Err(Error::Config("rank_one: `stages` or `independent` is required".into())),
        }
    }

    pub fn budget(&self) -> Budget {
        let a = &self.analysis;
        match a.method {
            MethodChoice::Auto => Budget::auto(a.samples, self.seed()),
            MethodChoice::Tensor => Budget::Tensor { min_nodes: a.nodes },
            MethodChoice::MonteCarlo => Budget::monte_carlo(a.samples, self.seed()),
        }
    }

    pub fn strategy(&self) -> ScanStrategy {
        let a = &self.analysis;
        match a.strategy {
            StrategyChoice::Greedy => ScanStrategy::Greedy { window: a.window },
            StrategyChoice::FixedStride => ScanStrategy::FixedStride {
                start: a.start,
                stride: a.stride,
            },
        }
    }
}
