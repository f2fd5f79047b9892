//! Experiment configuration files.
//!
//! A config is a TOML document; every key is optional and falls back to the
//! desk-scale default shown by [`ExperimentConfig::default`].
//!
//! ```toml
//! seed = 7
//! solver = "both"        # ihooi | alsas | both | hooi
//!
//! [problem]
//! family = "gaussian"    # gaussian | powerlaw
//! shape = [20, 20, 20]
//! ranks = [3, 3, 3]
//! sample_ratio = 0.5
//! noise = 0.0
//!
//! [solve]
//! tol = 1e-6
//! max_iters = 2000
//! rank_strategy = "fixed"  # fixed | increasing
//!
//! [grid]
//! ranks = [2, 4]
//! sample_ratios = [0.3, 0.5, 0.7]
//! trials = 10
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::solvers::{RankStrategy, SolverConfig};
use crate::synthetic::{Family, GeneratorSpec};
use crate::tensor::Shape;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Ihooi,
    Alsas,
    Both,
    Hooi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Convergence,
    Phase,
    Recover,
    Complete,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub family: String,
    pub shape: Vec<usize>,
    pub ranks: Vec<usize>,
    pub sample_ratio: f64,
    pub noise: f64,
    pub orthonormalize_factors: bool,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            family: "gaussian".into(),
            shape: vec![20, 20, 20],
            ranks: vec![3, 3, 3],
            sample_ratio: 0.5,
            noise: 0.0,
            orthonormalize_factors: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Fixed,
    Increasing,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSettings {
    pub tol: f64,
    pub max_iters: usize,
    /// Wall-clock cap in seconds; absent means unlimited.
    pub max_seconds: Option<f64>,
    pub rank_strategy: StrategyKind,
    /// Starting ranks for the increasing strategy (default: all ones).
    pub rank_start: Option<Vec<usize>>,
    /// Rank caps for the increasing strategy (default: true ranks + 2,
    /// clipped to the dimensions).
    pub rank_max: Option<Vec<usize>>,
    pub rank_delta: usize,
    pub fit_stall_threshold: f64,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 2000,
            max_seconds: None,
            rank_strategy: StrategyKind::Fixed,
            rank_start: None,
            rank_max: None,
            rank_delta: 1,
            fit_stall_threshold: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Each entry `r` stands for the multilinear rank `(r, …, r)`.
    pub ranks: Vec<usize>,
    pub sample_ratios: Vec<f64>,
    pub trials: usize,
    pub early_exit: bool,
    /// Score the ground truth itself instead of a solver estimate.
    pub inject_truth: bool,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            ranks: vec![2, 4],
            sample_ratios: vec![0.3, 0.5, 0.7],
            trials: 10,
            early_exit: false,
            inject_truth: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub seed: u64,
    pub solver: SolverChoice,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
    pub out: Option<PathBuf>,
    pub problem: ProblemConfig,
    pub solve: SolveSettings,
    pub grid: GridConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: None,
            seed: 0,
            solver: SolverChoice::Both,
            threads: 0,
            out: None,
            problem: ProblemConfig::default(),
            solve: SolveSettings::default(),
            grid: GridConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn family(&self) -> Result<Family> {
        self.problem
            .family
            .parse()
            .map_err(|e: Error| Error::Config(e.to_string()))
    }

    pub fn shape(&self) -> Result<Shape> {
        Shape::new(self.problem.shape.clone()).map_err(|e| Error::Config(e.to_string()))
    }

    /// Generator for the single-instance experiments.
    pub fn generator(&self, seed: u64) -> Result<GeneratorSpec> {
        self.generator_with_ranks(&self.problem.ranks, seed)
    }

    pub fn generator_with_ranks(&self, ranks: &[usize], seed: u64) -> Result<GeneratorSpec> {
        let mut spec = GeneratorSpec::new(self.family()?, &self.problem.shape, ranks, seed)
            .map_err(|e| Error::Config(e.to_string()))?;
        spec.orthonormalize_factors = self.problem.orthonormalize_factors;
        Ok(spec)
    }

    /// Solver settings for an instance whose true ranks are `truth`.
    pub fn solver_config(&self, truth: &[usize], seed: u64) -> Result<SolverConfig> {
        let s = &self.solve;
        let dims = &self.problem.shape;
        let rank_strategy = match s.rank_strategy {
            StrategyKind::Fixed => RankStrategy::Fixed(truth.to_vec()),
            StrategyKind::Increasing => RankStrategy::Increasing {
                start: s.rank_start.clone().unwrap_or_else(|| vec![1; dims.len()]),
                max: s.rank_max.clone().unwrap_or_else(|| {
                    truth.iter().zip(dims).map(|(&r, &m)| (r + 2).min(m)).collect()
                }),
                delta: s.rank_delta,
                fit_stall_threshold: s.fit_stall_threshold,
            },
        };
        let config = SolverConfig {
            tol: s.tol,
            max_iters: s.max_iters,
            max_seconds: s.max_seconds.unwrap_or(f64::INFINITY),
            rank_strategy,
            seed,
        };
        config
            .validate(&self.shape()?)
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(config)
    }

    /// Checks everything that can be checked without running anything.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        self.family()?;
        let shape = self.shape()?;
        let sr = self.problem.sample_ratio;
        if !(sr > 0.0 && sr <= 1.0) {
            return cfg_err(format!("sample_ratio must lie in (0, 1], got {sr}"));
        }
        if !(self.problem.noise >= 0.0 && self.problem.noise.is_finite()) {
            return cfg_err(format!("noise must be nonnegative, got {}", self.problem.noise));
        }
        match kind {
            ExperimentKind::Phase | ExperimentKind::Recover => {
                let g = &self.grid;
                if g.ranks.is_empty() || g.sample_ratios.is_empty() {
                    return cfg_err("grid axes must be nonempty".into());
                }
                if g.trials == 0 {
                    return cfg_err("grid.trials must be at least 1".into());
                }
                if let Some(bad) = g.sample_ratios.iter().find(|&&s| !(s > 0.0 && s <= 1.0)) {
                    return cfg_err(format!("grid sample ratio {bad} outside (0, 1]"));
                }
                for &r in &g.ranks {
                    let ranks = vec![r; shape.ndims()];
                    self.generator_with_ranks(&ranks, 0)?;
                    self.solver_config(&ranks, 0)?;
                }
            }
            ExperimentKind::Convergence | ExperimentKind::Complete => {
                self.generator(0)?;
                self.solver_config(&self.problem.ranks, 0)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = ExperimentConfig::default();
        for kind in [
            ExperimentKind::Convergence,
            ExperimentKind::Phase,
            ExperimentKind::Recover,
            ExperimentKind::Complete,
        ] {
            cfg.validate(kind).unwrap();
        }
    }

    #[test]
    fn parses_partial_documents() {
        let cfg = ExperimentConfig::from_toml(
            "seed = 3\nsolver = \"alsas\"\n[problem]\nshape = [6, 6, 6]\n[grid]\ntrials = 2\n",
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.solver, SolverChoice::Alsas);
        assert_eq!(cfg.problem.shape, vec![6, 6, 6]);
        assert_eq!(cfg.problem.ranks, vec![3, 3, 3]);
        assert_eq!(cfg.grid.trials, 2);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_toml("sead = 3\n").is_err());
        assert!(ExperimentConfig::from_toml("solver = \"newton\"\n").is_err());
        let cfg = ExperimentConfig::from_toml("[problem]\nsample_ratio = 1.5\n").unwrap();
        assert!(cfg.validate(ExperimentKind::Convergence).is_err());
        let cfg = ExperimentConfig::from_toml("[grid]\ntrials = 0\n").unwrap();
        assert!(cfg.validate(ExperimentKind::Phase).is_err());
        let cfg = ExperimentConfig::from_toml("[problem]\nranks = [11, 2, 2]\n").unwrap();
        assert!(cfg.validate(ExperimentKind::Complete).is_err());
    }

    #[test]
    fn increasing_strategy_defaults() {
        let cfg =
            ExperimentConfig::from_toml("[solve]\nrank_strategy = \"increasing\"\n").unwrap();
        let sc = cfg.solver_config(&[2, 2, 19], 0).unwrap();
        assert_eq!(
            sc.rank_strategy,
            RankStrategy::Increasing {
                start: vec![1, 1, 1],
                max: vec![4, 4, 20],
                delta: 1,
                fit_stall_threshold: 1e-2
            }
        );
    }
}
