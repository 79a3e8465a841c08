use std::fs;
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Scenario};
use crate::algorithms::{self, Algorithm, RunConfig, RunStatus, RunTrace, Tau};
use crate::analysis::budget_comparison;
use crate::error::{Error, Result};
use crate::graph::{connected_erdos_renyi, Graph};
use crate::linalg::{format_f64, Matrix};
use crate::problems::{
    gen_linear_synthetic, gen_logistic_synthetic, load_csv_dataset, partition_uniform, solve_reference, Objective,
    ObjectiveKind, ObjectiveSpec, Problem,
};
use crate::pruning::{Beta, PruneParams};
use crate::stream::{derive_seed, purpose, substream};

/// Attempts at drawing a connected Erdős–Rényi graph.
pub const GRAPH_ATTEMPTS: usize = 1000;

pub const SUMMARY_HEADER: [&str; 17] = [
    "scenario",
    "algorithm",
    "kappa",
    "tau",
    "beta",
    "alpha",
    "trials",
    "reached",
    "volume_mean",
    "volume_median",
    "rounds_mean",
    "rounds_median",
    "iterations_mean",
    "final_error_median",
    "spectral_gap_mean",
    "baseline_error_median",
    "failures",
];

pub const RUNS_HEADER: [&str; 16] = [
    "point",
    "trial",
    "graph_seed",
    "run_seed",
    "algorithm",
    "kappa",
    "tau",
    "beta",
    "alpha",
    "status",
    "iterations",
    "volume_at_tol",
    "rounds_at_tol",
    "final_error",
    "spectral_gap",
    "baseline_error",
];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub algorithm: Algorithm,
    pub kappa: f64,
    pub tau: Tau,
    pub beta: Beta,
    /// `None` when the step size is tuned per run.
    pub alpha: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub point: usize,
    pub trial: usize,
    pub graph_seed: u64,
    pub run_seed: u64,
    pub alpha: Option<f64>,
    /// Terminal run status, or `error: ...` for a failed run.
    pub status: String,
    pub iterations: Option<usize>,
    pub volume_at_tol: Option<u64>,
    pub rounds_at_tol: Option<u64>,
    pub final_error: Option<f64>,
    pub spectral_gap: Option<f64>,
    pub baseline_error: Option<f64>,
}

impl RunRecord {
    fn failed(point: usize, trial: usize, graph_seed: u64, run_seed: u64, err: &Error) -> Self {
        Self {
            point,
            trial,
            graph_seed,
            run_seed,
            alpha: None,
            status: format!("error: {err}"),
            iterations: None,
            volume_at_tol: None,
            rounds_at_tol: None,
            final_error: None,
            spectral_gap: None,
            baseline_error: None,
        }
    }

    pub fn is_failure(&self) -> bool {
        self.status.starts_with("error")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub point: GridPoint,
    pub trials: usize,
    pub reached: usize,
    pub volume_mean: Option<f64>,
    pub volume_median: Option<f64>,
    pub rounds_mean: Option<f64>,
    pub rounds_median: Option<f64>,
    pub iterations_mean: Option<f64>,
    pub final_error_median: Option<f64>,
    pub spectral_gap_mean: Option<f64>,
    pub baseline_error_median: Option<f64>,
    pub failures: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub scenario: Scenario,
    pub points: Vec<GridPoint>,
    pub summary: Vec<SummaryRow>,
    pub runs: Vec<RunRecord>,
    /// `(file name, csv)` per run, when traces were requested.
    pub traces: Vec<(String, String)>,
}

/// Outcome of trying every step size of a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearch {
    pub best_alpha: f64,
    /// Final optimality error per step size; `None` when the run diverged.
    pub outcomes: Vec<(f64, Option<f64>)>,
}

/// Runs `cfg` to its iteration cap for every step size in `grid` and keeps
/// the one with the smallest final optimality error, preferring the larger
/// step on ties.
pub fn step_size_grid_search(
    cfg: &RunConfig,
    obj: &dyn Objective,
    x0: &Matrix,
    f_star: f64,
    grid: &[f64],
) -> Result<GridSearch> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty step-size grid".into()));
    }
    let mut outcomes = Vec::with_capacity(grid.len());
    let mut best: Option<(f64, f64)> = None;
    for &alpha in grid {
        let mut c = cfg.clone();
        c.alpha = alpha;
        c.tolerance = 0.0;
        let trace = algorithms::run(&c, x0, Some((obj, Some(f_star))))?;
        let err = match trace.status {
            RunStatus::Diverged => None,
            _ => trace.last().optimality_error,
        };
        outcomes.push((alpha, err));
        if let Some(e) = err {
            let better = match best {
                None => true,
                Some((ba, be)) => e < be || (e == be && alpha > ba),
            };
            if better {
                best = Some((alpha, e));
            }
        }
    }
    best.map(|(best_alpha, _)| GridSearch { best_alpha, outcomes })
        .ok_or(Error::AllDiverged)
}

/// Data and optimum shared by every run of an optimization sweep.
pub struct PreparedProblem {
    pub problem: Problem,
    pub f_star: f64,
}

pub fn prepare_problem(cfg: &ExperimentConfig) -> Result<Option<PreparedProblem>> {
    let kind = match cfg.scenario {
        Scenario::Linreg => ObjectiveKind::Linear,
        Scenario::Logreg => ObjectiveKind::Logistic,
        _ => return Ok(None),
    };
    let spec = &cfg.problem;
    let data = match &spec.data {
        Some(path) => load_csv_dataset(path, &spec.label_col, spec.normalize)?,
        None if kind == ObjectiveKind::Linear => gen_linear_synthetic(spec.samples, spec.dim, spec.noise, spec.seed)?.0,
        None => gen_logistic_synthetic(spec.samples, spec.dim, spec.noise, spec.seed)?.0,
    };
    let partitions = partition_uniform(data.sample_count(), cfg.graph.n, derive_seed(spec.seed, &[purpose::DATA]))?;
    let problem = Problem::new(
        ObjectiveSpec {
            kind,
            partitions,
            lambda: spec.lambda,
        },
        data,
    )?;
    let f_star = solve_reference(&problem)?.f_star;
    Ok(Some(PreparedProblem { problem, f_star }))
}

/// Standard normal `n × d` initial states for a consensus run.
pub fn initial_states(n: usize, d: usize, run_seed: u64) -> Matrix {
    let mut rng = substream(run_seed, &[purpose::INITIAL_STATE]);
    Matrix::from_fn(n, d, |_, _| rng.sample(StandardNormal))
}

pub fn grid_points(cfg: &ExperimentConfig) -> Vec<GridPoint> {
    let alphas: Vec<Option<f64>> = if !cfg.scenario_is_optimization() || cfg.tune_alpha {
        vec![None]
    } else {
        cfg.alpha.iter().copied().map(Some).collect()
    };
    let mut out = Vec::new();
    for algorithm in cfg.algorithms() {
        for &kappa in &cfg.kappa {
            for &tau in &cfg.tau {
                for &beta in &cfg.beta {
                    for &alpha in &alphas {
                        out.push(GridPoint {
                            algorithm,
                            kappa,
                            tau,
                            beta,
                            alpha,
                        });
                    }
                }
            }
        }
    }
    out
}

impl ExperimentConfig {
    fn scenario_is_optimization(&self) -> bool {
        matches!(self.scenario, Scenario::Linreg | Scenario::Logreg)
    }

    pub fn run_seed(&self, trial: usize) -> u64 {
        derive_seed(self.seed, &[trial as u64])
    }

    fn run_config(&self, point: &GridPoint, graph: &Graph, run_seed: u64) -> Result<RunConfig> {
        let mut rc = RunConfig::new(point.algorithm, graph.clone());
        rc.prune = PruneParams::keep_one_neighbor(graph, point.kappa, point.beta)?;
        rc.tau = point.tau;
        rc.alpha = point.alpha.unwrap_or(self.alpha[0]);
        rc.shared_prune = self.shared_prune;
        rc.refresh_period = self.refresh_period;
        rc.max_iters = self.max_iters;
        rc.seed = run_seed;
        rc.tolerance = self.tolerance;
        rc.count_pruning_overhead = self.count_pruning_overhead;
        rc.track_spectral_gap = self.track_spectral_gap;
        Ok(rc)
    }
}

fn one_run(
    cfg: &ExperimentConfig,
    prepared: Option<&PreparedProblem>,
    idx: usize,
    point: &GridPoint,
    trial: usize,
) -> (RunRecord, Option<RunTrace>) {
    let graph_seed = cfg.graph.seed_for(trial);
    let run_seed = cfg.run_seed(trial);
    match try_run(cfg, prepared, idx, point, trial, graph_seed, run_seed) {
        Ok(r) => r,
        Err(e) => (RunRecord::failed(idx, trial, graph_seed, run_seed, &e), None),
    }
}

fn try_run(
    cfg: &ExperimentConfig,
    prepared: Option<&PreparedProblem>,
    idx: usize,
    point: &GridPoint,
    trial: usize,
    graph_seed: u64,
    run_seed: u64,
) -> Result<(RunRecord, Option<RunTrace>)> {
    let n = cfg.graph.n;
    let (graph, _) = connected_erdos_renyi(n, cfg.graph.p, graph_seed, GRAPH_ATTEMPTS)
        .ok_or_else(|| Error::InvalidParameter(format!("no connected G({n}, {}) drawn", cfg.graph.p)))?;
    let mut record = RunRecord::failed(idx, trial, graph_seed, run_seed, &Error::AllDiverged);

    if cfg.scenario == Scenario::Budget {
        let spec = cfg.budget.as_ref().expect("validated config has a budget");
        let x0 = initial_states(n, cfg.dim, run_seed);
        let (report, ..) = budget_comparison(&graph, point.kappa, spec.bits, spec.bits_per_vector, &x0, run_seed)?;
        record.status = if report.pruned_connected { "ok" } else { "disconnected" }.into();
        record.iterations = Some(report.pruned_iterations);
        record.final_error = Some(report.pruned_error);
        record.spectral_gap = Some(report.pruned_gap);
        record.baseline_error = Some(report.error);
        return Ok((record, None));
    }

    let mut rc = cfg.run_config(point, &graph, run_seed)?;
    let trace = match prepared {
        None => {
            let x0 = initial_states(n, cfg.dim, run_seed);
            algorithms::run(&rc, &x0, None)?
        }
        Some(p) => {
            let x0 = Matrix::zeros(n, p.problem.dim());
            if point.alpha.is_none() {
                rc.alpha = step_size_grid_search(&rc, &p.problem, &x0, p.f_star, &cfg.alpha)?.best_alpha;
            }
            algorithms::run(&rc, &x0, Some((&p.problem, Some(p.f_star))))?
        }
    };
    let hit = trace.first_below(cfg.tolerance);
    let last = trace.last();
    record.alpha = prepared.map(|_| rc.alpha);
    record.status = trace.status.to_string();
    record.iterations = Some(trace.iterations());
    record.volume_at_tol = hit.map(|r| r.comm_volume);
    record.rounds_at_tol = hit.map(|r| r.comm_rounds);
    record.final_error = Some(last.optimality_error.unwrap_or(last.consensus_error));
    record.spectral_gap = trace.mean_cycle_gap();
    Ok((record, cfg.traces.then_some(trace)))
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Median with the two middle values averaged.
pub fn median(v: &[f64]) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    Some(if s.len() % 2 == 1 { s[m] } else { 0.5 * (s[m - 1] + s[m]) })
}

fn summarize(point: GridPoint, runs: &[&RunRecord]) -> SummaryRow {
    let collect = |f: &dyn Fn(&RunRecord) -> Option<f64>| runs.iter().filter_map(|r| f(r)).collect::<Vec<f64>>();
    let volumes = collect(&|r| r.volume_at_tol.map(|v| v as f64));
    let rounds = collect(&|r| r.rounds_at_tol.map(|v| v as f64));
    let iterations = collect(&|r| r.iterations.map(|v| v as f64));
    let errors = collect(&|r| r.final_error);
    let gaps = collect(&|r| r.spectral_gap);
    let baseline = collect(&|r| r.baseline_error);
    SummaryRow {
        point,
        trials: runs.len(),
        reached: volumes.len(),
        volume_mean: mean(&volumes),
        volume_median: median(&volumes),
        rounds_mean: mean(&rounds),
        rounds_median: median(&rounds),
        iterations_mean: mean(&iterations),
        final_error_median: median(&errors),
        spectral_gap_mean: mean(&gaps),
        baseline_error_median: median(&baseline),
        failures: runs.iter().filter(|r| r.is_failure()).count(),
    }
}

/// Executes every grid point for every trial, in parallel up to
/// `cfg.jobs` threads. Results are ordered by point, then trial.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let prepared = prepare_problem(cfg)?;
    let points = grid_points(cfg);
    let tasks: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let results: Vec<(RunRecord, Option<RunTrace>)> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(p, t)| one_run(cfg, prepared.as_ref(), p, &points[p], t))
            .collect()
    });
    let mut traces = Vec::new();
    let mut runs = Vec::with_capacity(results.len());
    for (record, trace) in results {
        if let Some(trace) = trace {
            traces.push((format!("trace_p{}_t{}.csv", record.point, record.trial), trace.to_csv_string()?));
        }
        runs.push(record);
    }
    let summary = points
        .iter()
        .enumerate()
        .map(|(i, p)| summarize(*p, &runs.iter().filter(|r| r.point == i).collect::<Vec<_>>()))
        .collect();
    Ok(SweepResult {
        scenario: cfg.scenario,
        points,
        summary,
        runs,
        traces,
    })
}

fn opt_f(v: Option<f64>) -> String {
    v.map(format_f64).unwrap_or_default()
}

fn opt_u<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn scenario_name(s: Scenario) -> &'static str {
    match s {
        Scenario::Consensus => "consensus",
        Scenario::Linreg => "linreg",
        Scenario::Logreg => "logreg",
        Scenario::Budget => "budget",
    }
}

fn algorithm_name(a: Algorithm) -> &'static str {
    match a {
        Algorithm::Ac => "ac",
        Algorithm::Acgt => "acgt",
        Algorithm::DistAvg => "dist_avg",
        Algorithm::RandomGossip => "random_gossip",
        Algorithm::Gta => "gta",
    }
}

impl SweepResult {
    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(SUMMARY_HEADER)?;
        for s in &self.summary {
            let p = &s.point;
            w.write_record([
                scenario_name(self.scenario).to_string(),
                algorithm_name(p.algorithm).to_string(),
                format_f64(p.kappa),
                p.tau.to_string(),
                p.beta.to_string(),
                opt_f(p.alpha),
                s.trials.to_string(),
                s.reached.to_string(),
                opt_f(s.volume_mean),
                opt_f(s.volume_median),
                opt_f(s.rounds_mean),
                opt_f(s.rounds_median),
                opt_f(s.iterations_mean),
                opt_f(s.final_error_median),
                opt_f(s.spectral_gap_mean),
                opt_f(s.baseline_error_median),
                s.failures.to_string(),
            ])?;
        }
        into_string(w)
    }

    pub fn runs_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(RUNS_HEADER)?;
        for r in &self.runs {
            let p = &self.points[r.point];
            w.write_record([
                r.point.to_string(),
                r.trial.to_string(),
                r.graph_seed.to_string(),
                r.run_seed.to_string(),
                algorithm_name(p.algorithm).to_string(),
                format_f64(p.kappa),
                p.tau.to_string(),
                p.beta.to_string(),
                opt_f(r.alpha),
                r.status.clone(),
                opt_u(r.iterations),
                opt_u(r.volume_at_tol),
                opt_u(r.rounds_at_tol),
                opt_f(r.final_error),
                opt_f(r.spectral_gap),
                opt_f(r.baseline_error),
            ])?;
        }
        into_string(w)
    }

    /// Writes `summary.csv`, `runs.csv` and any traces under `traces/`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir)?;
        fs::write(dir.join("summary.csv"), self.summary_csv()?)?;
        fs::write(dir.join("runs.csv"), self.runs_csv()?)?;
        if !self.traces.is_empty() {
            let tdir = dir.join("traces");
            fs::create_dir_all(&tdir)?;
            for (name, text) in &self.traces {
                fs::write(tdir.join(name), text)?;
            }
        }
        Ok(())
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}
