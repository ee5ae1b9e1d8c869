//! Benchmark grid configuration.
//!
//! A config is a JSON object whose keys are the [`BenchConfig`] field names.
//! Missing keys take their defaults, so `{}` is a valid config.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use secant_fw::problems::{ProblemClass, Solver};
use secant_fw::stepsizes::StrategyKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Problem class names, e.g. `"QuadProb"`.
    pub problems: Vec<String>,
    /// Sizes applied to every class. Empty means each class's desk size.
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    /// Step-size strategy names, e.g. `"secant"`.
    pub strategies: Vec<String>,
    pub solver: String,
    pub gap_tol: f64,
    pub max_iters: usize,
    pub time_limit_s: f64,
    pub out: PathBuf,
    pub workers: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            problems: vec!["QuadProb".into()],
            sizes: Vec::new(),
            seeds: vec![0],
            strategies: vec!["secant".into()],
            solver: "bpcg".into(),
            gap_tol: 1e-7,
            max_iters: 10_000,
            time_limit_s: 60.0,
            out: PathBuf::from("bench_out"),
            workers: 1,
        }
    }
}

/// Side length or dimension used when a config names no sizes.
pub fn desk_size(class: ProblemClass) -> usize {
    match class {
        ProblemClass::QuadProb | ProblemClass::Ill => 100,
        ProblemClass::Port | ProblemClass::OD | ProblemClass::OA => 50,
        ProblemClass::Birkhoff => 10,
        ProblemClass::Spec | ProblemClass::Nuclear => 20,
    }
}

/// One problem instance of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InstanceKey {
    pub class: ProblemClass,
    pub size: usize,
    pub seed: u64,
}

/// A validated config with every name parsed.
#[derive(Debug, Clone)]
pub struct Grid {
    pub instances: Vec<InstanceKey>,
    pub strategies: Vec<StrategyKind>,
    pub solver: Solver,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).context("invalid benchmark config")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Checks the config and expands it into the instance grid.
    pub fn grid(&self) -> Result<Grid> {
        if !(self.gap_tol > 0.0) {
            bail!("gap_tol must be positive, got {}", self.gap_tol);
        }
        if !(self.time_limit_s > 0.0) {
            bail!("time_limit_s must be positive, got {}", self.time_limit_s);
        }
        if self.workers == 0 {
            bail!("workers must be at least 1");
        }
        let classes = self
            .problems
            .iter()
            .map(|p| p.parse::<ProblemClass>().map_err(anyhow::Error::from))
            .collect::<Result<Vec<_>>>()?;
        let strategies = self
            .strategies
            .iter()
            .map(|s| s.parse::<StrategyKind>().map_err(|e| anyhow::anyhow!(e)))
            .collect::<Result<Vec<_>>>()?;
        let solver = self.solver.parse::<Solver>().map_err(|e| anyhow::anyhow!(e))?;
        let mut instances = Vec::new();
        for &class in &classes {
            let sizes = if self.sizes.is_empty() { vec![desk_size(class)] } else { self.sizes.clone() };
            for size in sizes {
                for &seed in &self.seeds {
                    instances.push(InstanceKey { class, size, seed });
                }
            }
        }
        if instances.is_empty() {
            bail!("the grid has no instances (check problems and seeds)");
        }
        if strategies.is_empty() {
            bail!("the grid has no strategies");
        }
        Ok(Grid { instances, strategies, solver })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_the_default() {
        assert_eq!(BenchConfig::from_json("{}").unwrap(), BenchConfig::default());
    }

    #[test]
    fn json_round_trip() {
        let cfg = BenchConfig { sizes: vec![10, 20], seeds: vec![1, 2, 3], workers: 4, ..BenchConfig::default() };
        assert_eq!(BenchConfig::from_json(&cfg.to_json()).unwrap(), cfg);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(BenchConfig::from_json(r#"{"gap_tolerance": 1e-3}"#).is_err());
    }

    #[test]
    fn grid_expands_classes_sizes_and_seeds() {
        let cfg = BenchConfig {
            problems: vec!["QuadProb".into(), "birkhoff".into()],
            seeds: vec![0, 1],
            strategies: vec!["secant".into(), "agnostic".into()],
            ..BenchConfig::default()
        };
        let grid = cfg.grid().unwrap();
        assert_eq!(grid.instances.len(), 4);
        assert_eq!(grid.instances[2], InstanceKey { class: ProblemClass::Birkhoff, size: 10, seed: 0 });
        assert_eq!(grid.strategies, vec![StrategyKind::Secant, StrategyKind::Agnostic]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad = [
            BenchConfig { gap_tol: 0.0, ..BenchConfig::default() },
            BenchConfig { seeds: vec![], ..BenchConfig::default() },
            BenchConfig { strategies: vec![], ..BenchConfig::default() },
            BenchConfig { problems: vec!["Nope".into()], ..BenchConfig::default() },
            BenchConfig { solver: "newton".into(), ..BenchConfig::default() },
            BenchConfig { workers: 0, ..BenchConfig::default() },
        ];
        for cfg in bad {
            assert!(cfg.grid().is_err(), "{cfg:?}");
        }
    }
}
