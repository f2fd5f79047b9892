//! Desk-scale experiment protocols.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::metrics::{factor_recovery_error, relative_error, success, SUCCESS_THRESHOLD};
use crate::observation::sample_uniform;
use crate::rng::derive_seed;
use crate::solvers::{
    alsas_solve_with_init, hooi_solve, ihooi_solve_with_init, initial_factors, FactorModel,
    IterationTrace, MaskedData, SolveOutput, SolverConfig,
};
use crate::synthetic::{add_noise, generate, GeneratorSpec};
use crate::tensor::DenseTensor;

use super::config::{ExperimentConfig, ExperimentKind, SolverChoice};
use super::svg::{heat_map, line_plot, Series};
use super::table::{float, opt_float, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Ihooi,
    Alsas,
    Hooi,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Ihooi => "ihooi",
            Method::Alsas => "alsas",
            Method::Hooi => "hooi",
        }
    }

    pub fn from_choice(choice: SolverChoice) -> Vec<Method> {
        match choice {
            SolverChoice::Ihooi => vec![Method::Ihooi],
            SolverChoice::Alsas => vec![Method::Alsas],
            SolverChoice::Both => vec![Method::Ihooi, Method::Alsas],
            SolverChoice::Hooi => vec![Method::Hooi],
        }
    }
}

/// One generated problem: ground truth, the (possibly noisy) data and the
/// observed part of it.
pub struct Instance {
    pub spec: GeneratorSpec,
    pub truth: FactorModel,
    pub clean: DenseTensor,
    pub noisy: DenseTensor,
    pub data: MaskedData,
    pub solver_seed: u64,
}

/// Seed for one trial of one grid cell.
pub fn trial_seed(base: u64, rank: usize, sr: f64, trial: usize) -> u64 {
    derive_seed(base, &[rank as u64, sr.to_bits(), trial as u64])
}

pub fn build_instance(cfg: &ExperimentConfig, ranks: &[usize], sr: f64, seed: u64) -> Result<Instance> {
    let spec = cfg.generator_with_ranks(ranks, derive_seed(seed, &[1]))?;
    let (truth, clean) = generate(&spec)?;
    let noisy = add_noise(&clean, cfg.problem.noise, derive_seed(seed, &[3]))?;
    let mask = sample_uniform(clean.shape(), sr, derive_seed(seed, &[2]))?;
    let data = MaskedData::new(mask, &noisy)?;
    Ok(Instance {
        spec,
        truth,
        clean,
        noisy,
        data,
        solver_seed: derive_seed(seed, &[4]),
    })
}

/// Runs `method` on `inst`; iHOOI and ALSaS share the starting factors
/// drawn from the solver seed, HOOI starts from the truncated HOSVD of the
/// complete data.
pub fn run_method(method: Method, inst: &Instance, config: &SolverConfig) -> Result<SolveOutput> {
    let init = || -> Result<Vec<Matrix>> {
        initial_factors(
            inst.data.shape(),
            config.rank_strategy.initial_ranks(),
            config.seed,
        )
    };
    match method {
        Method::Ihooi => ihooi_solve_with_init(&inst.data, config, init()?),
        Method::Alsas => alsas_solve_with_init(&inst.data, config, init()?),
        Method::Hooi => {
            let (model, trace) = hooi_solve(&inst.noisy, &inst.spec.ranks, config)?;
            Ok(SolveOutput {
                model,
                x: inst.noisy.clone(),
                trace,
            })
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

fn ranks_label(r: &[usize]) -> String {
    r.iter().map(usize::to_string).collect::<Vec<_>>().join("x")
}

pub struct ConvergenceResult {
    pub runs: Vec<(Method, IterationTrace)>,
    pub files: Vec<PathBuf>,
}

/// Traces of each selected solver on one instance from a common start.
pub fn run_convergence(cfg: &ExperimentConfig, out: &Path) -> Result<ConvergenceResult> {
    cfg.validate(ExperimentKind::Convergence)?;
    ensure_dir(out)?;
    let ranks = &cfg.problem.ranks;
    let sr = cfg.problem.sample_ratio;
    let inst = build_instance(cfg, ranks, sr, trial_seed(cfg.seed, ranks[0], sr, 0))?;
    let config = cfg.solver_config(ranks, inst.solver_seed)?;
    let methods = Method::from_choice(cfg.solver);
    let outputs = methods
        .par_iter()
        .map(|&m| run_method(m, &inst, &config))
        .collect::<Result<Vec<_>>>()?;

    let n = ranks.len();
    let mut columns = vec![
        "solver",
        "iteration",
        "relerr",
        "fit",
        "objective",
        "rel_obj_change",
        "x_change",
        "unobserved_norm",
        "ranks",
    ];
    let gap_names: Vec<String> = (1..=n).map(|i| format!("gap_{i}")).collect();
    columns.extend(gap_names.iter().map(String::as_str));
    let mut table = Table::new("convergence", &columns);
    let mut timing = Table::new("convergence_timing", &["solver", "iteration", "seconds"]);
    let norm = inst.noisy.fro_norm();
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let mut by_iter = Vec::new();
    let mut by_time = Vec::new();
    for (m, o) in methods.iter().zip(&outputs) {
        for r in &o.trace.records {
            let mut row = vec![
                m.name().to_string(),
                r.iteration.to_string(),
                float(r.fit / scale),
                float(r.fit),
                float(r.obj),
                float(r.rel_obj_change),
                float(r.x_change),
                float(r.unobserved_norm),
                ranks_label(&r.ranks),
            ];
            row.extend((0..n).map(|i| opt_float(r.gap_ratios.get(i).copied())));
            table.push(row);
            timing.push(vec![m.name().into(), r.iteration.to_string(), float(r.elapsed)]);
        }
        by_iter.push(Series {
            name: m.name(),
            points: o.trace.records.iter().map(|r| (r.iteration as f64, r.fit / scale)).collect(),
        });
        by_time.push(Series {
            name: m.name(),
            points: o.trace.records.iter().map(|r| (r.elapsed, r.fit / scale)).collect(),
        });
    }
    let title = format!(
        "{} {} rank {} SR {}",
        cfg.problem.family,
        ranks_label(&cfg.problem.shape),
        ranks_label(ranks),
        sr
    );
    let files = vec![
        out.join("convergence.csv"),
        out.join("convergence_timing.csv"),
        out.join("convergence.svg"),
        out.join("convergence_time.svg"),
        out.join("instance.manifest"),
    ];
    table.write(&files[0])?;
    timing.write(&files[1])?;
    fs::write(&files[2], line_plot(&title, "iteration", "relative fit", &by_iter, true))?;
    fs::write(&files[3], line_plot(&title, "seconds", "relative fit", &by_time, true))?;
    fs::write(&files[4], inst.spec.to_manifest())?;
    Ok(ConvergenceResult {
        runs: methods.into_iter().zip(outputs.into_iter().map(|o| o.trace)).collect(),
        files,
    })
}

/// Aggregated trials of one `(solver, r, SR)` cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub solver: Method,
    pub rank: usize,
    pub sample_ratio: f64,
    pub successes: usize,
    pub trials: usize,
    pub mean_err: Option<f64>,
    pub mean_iters: Option<f64>,
    /// False when the cell was filled in by the early-exit rule.
    pub computed: bool,
}

impl CellResult {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum GridScore {
    Reconstruction,
    Factors,
}

fn run_trial(
    cfg: &ExperimentConfig,
    score: GridScore,
    method: Method,
    r: usize,
    sr: f64,
    trial: usize,
) -> Result<(f64, usize)> {
    let ranks = vec![r; cfg.problem.shape.len()];
    let inst = build_instance(cfg, &ranks, sr, trial_seed(cfg.seed, r, sr, trial))?;
    let (model, iters) = if cfg.grid.inject_truth {
        (inst.truth.clone(), 0)
    } else {
        let config = cfg.solver_config(&ranks, inst.solver_seed)?;
        let out = run_method(method, &inst, &config)?;
        let iters = out.trace.len();
        (out.model, iters)
    };
    let err = match score {
        GridScore::Reconstruction => relative_error(&model.reconstruct(), &inst.clean)?,
        // an estimate whose ranks drifted cannot be matched factor by factor
        GridScore::Factors => factor_recovery_error(&inst.truth, &model).unwrap_or(f64::INFINITY),
    };
    Ok((err, iters))
}

fn sorted_axes(cfg: &ExperimentConfig) -> (Vec<usize>, Vec<f64>) {
    let mut ranks = cfg.grid.ranks.clone();
    ranks.sort_unstable();
    ranks.dedup();
    let mut srs = cfg.grid.sample_ratios.clone();
    srs.sort_by(f64::total_cmp);
    srs.dedup();
    (ranks, srs)
}

/// Evaluates the grid cell by cell in ascending `(r, SR)` order. Trials of a
/// cell run in parallel. With early exit, once every trial of a cell
/// succeeds the larger SRs at that rank are recorded as successes, and once
/// every trial fails the larger ranks at that SR are recorded as failures.
fn run_grid(cfg: &ExperimentConfig, score: GridScore) -> Result<Vec<CellResult>> {
    let (ranks, srs) = sorted_axes(cfg);
    let trials = cfg.grid.trials;
    let mut cells = Vec::new();
    for method in Method::from_choice(cfg.solver) {
        let mut failed_at_sr = vec![false; srs.len()];
        for &r in &ranks {
            let mut succeeded = false;
            for (j, &sr) in srs.iter().enumerate() {
                let skipped = |successes| CellResult {
                    solver: method,
                    rank: r,
                    sample_ratio: sr,
                    successes,
                    trials,
                    mean_err: None,
                    mean_iters: None,
                    computed: false,
                };
                if cfg.grid.early_exit && succeeded {
                    cells.push(skipped(trials));
                    continue;
                }
                if cfg.grid.early_exit && failed_at_sr[j] {
                    cells.push(skipped(0));
                    continue;
                }
                let results = (0..trials)
                    .into_par_iter()
                    .map(|t| run_trial(cfg, score, method, r, sr, t))
                    .collect::<Result<Vec<_>>>()?;
                let successes = results
                    .iter()
                    .filter(|(e, _)| success(*e, SUCCESS_THRESHOLD))
                    .count();
                let mean_err = results.iter().map(|(e, _)| e).sum::<f64>() / trials as f64;
                let mean_iters = results.iter().map(|(_, k)| *k as f64).sum::<f64>() / trials as f64;
                succeeded = successes == trials;
                if successes == 0 {
                    failed_at_sr[j] = true;
                }
                cells.push(CellResult {
                    solver: method,
                    rank: r,
                    sample_ratio: sr,
                    successes,
                    trials,
                    mean_err: Some(mean_err),
                    mean_iters: Some(mean_iters),
                    computed: true,
                });
            }
        }
    }
    Ok(cells)
}

fn grid_table(schema: &str, err_column: &str, cells: &[CellResult]) -> Table {
    let mut t = Table::new(
        schema,
        &[
            "solver",
            "r",
            "sr",
            "successes",
            "trials",
            "success_rate",
            err_column,
            "mean_iters",
            "computed",
        ],
    );
    for c in cells {
        t.push(vec![
            c.solver.name().into(),
            c.rank.to_string(),
            float(c.sample_ratio),
            c.successes.to_string(),
            c.trials.to_string(),
            float(c.rate()),
            opt_float(c.mean_err),
            opt_float(c.mean_iters),
            c.computed.to_string(),
        ]);
    }
    t
}

fn grid_plots(cfg: &ExperimentConfig, stem: &str, what: &str, cells: &[CellResult], out: &Path) -> Result<Vec<PathBuf>> {
    let (ranks, srs) = sorted_axes(cfg);
    let mut files = Vec::new();
    for method in Method::from_choice(cfg.solver) {
        let values: Vec<Vec<Option<f64>>> = ranks
            .iter()
            .map(|&r| {
                srs.iter()
                    .map(|&sr| {
                        cells
                            .iter()
                            .find(|c| c.solver == method && c.rank == r && c.sample_ratio == sr)
                            .map(CellResult::rate)
                    })
                    .collect()
            })
            .collect();
        let path = out.join(format!("{stem}_{}.svg", method.name()));
        let svg = heat_map(
            &format!("{what}: {} on {} tensors", method.name(), cfg.problem.family),
            "sample ratio",
            "rank r",
            &srs.iter().map(|s| format!("{s}")).collect::<Vec<_>>(),
            &ranks.iter().map(|r| r.to_string()).collect::<Vec<_>>(),
            &values,
        );
        fs::write(&path, svg)?;
        files.push(path);
    }
    Ok(files)
}

pub struct GridResult {
    pub cells: Vec<CellResult>,
    pub files: Vec<PathBuf>,
}

/// Success rate of recovering the full tensor over a `(r, SR)` grid.
pub fn run_phase_transition(cfg: &ExperimentConfig, out: &Path) -> Result<GridResult> {
    cfg.validate(ExperimentKind::Phase)?;
    ensure_dir(out)?;
    let cells = run_grid(cfg, GridScore::Reconstruction)?;
    let csv = out.join("phase.csv");
    grid_table("phase", "mean_relerr", &cells).write(&csv)?;
    let mut files = vec![csv];
    files.extend(grid_plots(cfg, "phase", "recovery rate", &cells, out)?);
    Ok(GridResult { cells, files })
}

/// Success rate of recovering the factors themselves over a `(r, SR)` grid.
pub fn run_recoverability(cfg: &ExperimentConfig, out: &Path) -> Result<GridResult> {
    cfg.validate(ExperimentKind::Recover)?;
    ensure_dir(out)?;
    let cells = run_grid(cfg, GridScore::Factors)?;
    let csv = out.join("recover.csv");
    grid_table("recover", "mean_factor_err", &cells).write(&csv)?;
    let mut files = vec![csv];
    files.extend(grid_plots(cfg, "recover", "factor recovery rate", &cells, out)?);
    Ok(GridResult { cells, files })
}

#[derive(Clone, Debug)]
pub struct CompletionRow {
    pub solver: Method,
    pub relerr: f64,
    pub relerr_observed: f64,
    pub iterations: usize,
    pub seconds: f64,
    pub stop: String,
}

pub struct CompletionResult {
    pub rows: Vec<CompletionRow>,
    pub files: Vec<PathBuf>,
}

/// Completion of one (optionally noisy) instance by each selected solver.
pub fn run_completion(cfg: &ExperimentConfig, out: &Path) -> Result<CompletionResult> {
    cfg.validate(ExperimentKind::Complete)?;
    ensure_dir(out)?;
    let ranks = &cfg.problem.ranks;
    let sr = cfg.problem.sample_ratio;
    let inst = build_instance(cfg, ranks, sr, trial_seed(cfg.seed, ranks[0], sr, 0))?;
    let config = cfg.solver_config(ranks, inst.solver_seed)?;
    let methods = Method::from_choice(cfg.solver);
    let rows = methods
        .par_iter()
        .map(|&m| -> Result<CompletionRow> {
            let start = Instant::now();
            let o = run_method(m, &inst, &config)?;
            let seconds = start.elapsed().as_secs_f64();
            let rec = o.model.reconstruct();
            Ok(CompletionRow {
                solver: m,
                relerr: relative_error(&rec, &inst.clean)?,
                relerr_observed: relative_error(
                    &inst.data.mask().project(&rec)?,
                    inst.data.observed(),
                )
                .unwrap_or(0.0),
                iterations: o.trace.len(),
                seconds,
                stop: o.trace.stop.map_or("none", |s| s.name()).into(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut table = Table::new(
        "complete",
        &["solver", "noise", "relerr", "relerr_observed", "iterations", "stop"],
    );
    let mut timing = Table::new("complete_timing", &["solver", "seconds"]);
    for r in &rows {
        table.push(vec![
            r.solver.name().into(),
            float(cfg.problem.noise),
            float(r.relerr),
            float(r.relerr_observed),
            r.iterations.to_string(),
            r.stop.clone(),
        ]);
        timing.push(vec![r.solver.name().into(), float(r.seconds)]);
    }
    let files = vec![
        out.join("complete.csv"),
        out.join("complete_timing.csv"),
        out.join("instance.manifest"),
    ];
    table.write(&files[0])?;
    timing.write(&files[1])?;
    fs::write(&files[2], inst.spec.to_manifest())?;
    Ok(CompletionResult { rows, files })
}

/// Maps a failure to the CLI exit code: 2 for numerical trouble, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        2
    } else {
        1
    }
}
