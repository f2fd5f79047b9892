use crate::matrix::Matrix;
use crate::tensor::DenseTensor;

use super::model::FactorModel;

/// Diagnostics for one iteration.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// 1-based iteration counter.
    pub iteration: usize,
    /// Residual on the observed entries after the iteration.
    pub fit: f64,
    /// Objective value after the iteration.
    pub obj: f64,
    /// `|obj_{k+1} − obj_k| / (1 + obj_k)`.
    pub rel_obj_change: f64,
    /// `σ_{r+1}/σ_r` of each mode's SVD input; empty for solvers without one.
    pub gap_ratios: Vec<f64>,
    /// `‖X_{k+1} − X_k‖_F`.
    pub x_change: f64,
    /// `‖P_Ωc(X_{k+1})‖_F`.
    pub unobserved_norm: f64,
    pub ranks: Vec<usize>,
    /// Seconds since the solver started.
    pub elapsed: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    /// Relative fit on `Ω` dropped below tolerance.
    FitTolerance,
    /// Relative objective change dropped below tolerance.
    ObjectiveStall,
    MaxIterations,
    MaxSeconds,
}

impl StopReason {
    pub fn name(self) -> &'static str {
        match self {
            StopReason::FitTolerance => "fit_tolerance",
            StopReason::ObjectiveStall => "objective_stall",
            StopReason::MaxIterations => "max_iterations",
            StopReason::MaxSeconds => "max_seconds",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct IterationTrace {
    /// Objective at the starting point.
    pub initial_obj: f64,
    /// Fit at the starting point.
    pub initial_fit: f64,
    pub records: Vec<IterationRecord>,
    pub stop: Option<StopReason>,
    pub warnings: Vec<String>,
}

impl IterationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Fit of the latest iterate and of the one before it.
    pub fn last_two_fits(&self) -> Option<(f64, f64)> {
        match self.records.as_slice() {
            [] => None,
            [only] => Some((self.initial_fit, only.fit)),
            [.., prev, last] => Some((prev.fit, last.fit)),
        }
    }

    /// Objective values including the starting point.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.initial_obj)
            .chain(self.records.iter().map(|r| r.obj))
            .collect()
    }

    pub fn max_gap_ratio(&self) -> Option<f64> {
        self.records
            .iter()
            .flat_map(|r| r.gap_ratios.iter().copied())
            .reduce(f64::max)
    }

    /// Whether the objective never rose by more than `slack·(1 + previous)`.
    pub fn is_monotone(&self, slack: f64) -> bool {
        self.objectives()
            .windows(2)
            .all(|w| w[1] <= w[0] + slack * (1.0 + w[0]))
    }
}

/// Result of a solver run.
#[derive(Clone, Debug)]
pub struct SolveOutput {
    pub model: FactorModel,
    /// Final completed tensor; equals the data on `Ω`.
    pub x: DenseTensor,
    pub trace: IterationTrace,
}

impl SolveOutput {
    pub fn factors(&self) -> &[Matrix] {
        &self.model.factors
    }
}
