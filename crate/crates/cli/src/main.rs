use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adacons::algorithms::{self, Algorithm, RunConfig, RunStatus, RunTrace, Tau};
use adacons::analysis::envelope::tau_bar_from_refresh;
use adacons::analysis::{
    budget_comparison, compute_rho_prime, measure_tau_bar, suggest_step_size, consensus_envelope, BudgetReport,
    EnvelopeParams, StepSizeInputs,
};
use adacons::graph::{connected_erdos_renyi, diameter, Graph};
use adacons::harness::sweep::{initial_states, prepare_problem, GRAPH_ATTEMPTS};
use adacons::harness::{run_sweep, BudgetSpec, ExperimentConfig, Scenario};
use adacons::linalg::Matrix;
use adacons::pruning::{Beta, PruneParams};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "adacons", version, about = "Adaptive network pruning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one consensus experiment and write its trace.
    Consensus(ConsensusArgs),
    /// Run one decentralized optimization experiment and write its trace.
    Optimize(OptimizeArgs),
    /// Run every grid point of a config file.
    Sweep(SweepArgs),
    /// Check a run against the convergence guarantees.
    Analyze(AnalyzeArgs),
    /// Compare averaging on a pruned and an unpruned graph under one bit budget.
    Budget(BudgetArgs),
}

#[derive(Args, Clone, Default)]
struct Shared {
    /// Experiment config (JSON); flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write one trace CSV per run.
    #[arg(long)]
    traces: bool,
}

#[derive(Args, Clone, Default)]
struct GraphArgs {
    /// Node count of the G(n, p) graph.
    #[arg(long)]
    nodes: Option<usize>,
    /// Edge probability of the G(n, p) graph.
    #[arg(long)]
    edge_prob: Option<f64>,
    #[arg(long)]
    graph_seed: Option<u64>,
    #[arg(long)]
    kappa: Option<f64>,
    /// Cycle length, or "inf".
    #[arg(long)]
    tau: Option<Tau>,
    /// Softmax temperature, or "greedy".
    #[arg(long)]
    beta: Option<Beta>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    refresh_period: Option<usize>,
}

#[derive(Args)]
struct ConsensusArgs {
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    graph: GraphArgs,
    /// ac, dist-avg or random-gossip.
    #[arg(long)]
    algorithm: Option<Algorithm>,
    /// Columns of the initial states.
    #[arg(long)]
    dim: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    Linreg,
    Logreg,
}

#[derive(Args)]
struct OptimizeArgs {
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    problem: Option<ProblemKind>,
    /// CSV dataset; synthetic data when absent.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    label_col: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// acgt or gta.
    #[arg(long)]
    algorithm: Option<Algorithm>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    shared: Shared,
}

#[derive(Clone, Copy, ValueEnum)]
enum Check {
    Envelope,
    RhoPrime,
    StepSize,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    graph: GraphArgs,
    #[arg(long, value_enum)]
    check: Check,
    /// Window for the rho-prime check.
    #[arg(long)]
    tau_hat: Option<usize>,
    /// Smoothness constant for the step-size check.
    #[arg(long, default_value_t = 1.0)]
    smoothness: f64,
}

#[derive(Args)]
struct BudgetArgs {
    #[command(flatten)]
    shared: Shared,
    #[command(flatten)]
    graph: GraphArgs,
    /// Total bit budget.
    #[arg(long)]
    bits: Option<u64>,
    #[arg(long)]
    bits_per_vector: Option<u64>,
}

enum Failure {
    Config(String),
    Run(String),
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Failure::Config(e.to_string())
    }

    fn run(e: impl std::fmt::Display) -> Self {
        Failure::Run(e.to_string())
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn base_config(shared: &Shared, scenario: Scenario) -> Outcome<ExperimentConfig> {
    let mut cfg = match &shared.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text).map_err(Failure::config)?
        }
        None => ExperimentConfig::new(scenario, 32, 0.5),
    };
    if let Some(s) = shared.seed {
        cfg.seed = s;
    }
    if let Some(o) = &shared.out {
        cfg.output = o.clone();
    }
    if shared.jobs.is_some() {
        cfg.jobs = shared.jobs;
    }
    cfg.traces |= shared.traces;
    Ok(cfg)
}

fn apply_graph(cfg: &mut ExperimentConfig, g: &GraphArgs) {
    if let Some(n) = g.nodes {
        cfg.graph.n = n;
    }
    if let Some(p) = g.edge_prob {
        cfg.graph.p = p;
    }
    if let Some(s) = g.graph_seed {
        cfg.graph.seeds = vec![s];
    }
    if let Some(k) = g.kappa {
        cfg.kappa = vec![k];
    }
    if let Some(t) = g.tau {
        cfg.tau = vec![t];
    }
    if let Some(b) = g.beta {
        cfg.beta = vec![b];
    }
    if let Some(t) = g.tol {
        cfg.tolerance = t;
    }
    if let Some(m) = g.max_iters {
        cfg.max_iters = m;
    }
    if g.refresh_period.is_some() {
        cfg.refresh_period = g.refresh_period;
    }
}

fn finish(cfg: ExperimentConfig) -> Outcome<ExperimentConfig> {
    cfg.validate().map_err(Failure::config)?;
    Ok(cfg)
}

fn draw_graph(cfg: &ExperimentConfig) -> Outcome<Graph> {
    connected_erdos_renyi(cfg.graph.n, cfg.graph.p, cfg.graph.seed_for(0), GRAPH_ATTEMPTS)
        .map(|(g, _)| g)
        .ok_or_else(|| Failure::run(format!("no connected G({}, {}) drawn", cfg.graph.n, cfg.graph.p)))
}

/// Run config for the first grid point and trial of `cfg`.
fn single_run_config(cfg: &ExperimentConfig, algorithm: Algorithm, graph: &Graph) -> Outcome<RunConfig> {
    let mut rc = RunConfig::new(algorithm, graph.clone());
    rc.prune = PruneParams::keep_one_neighbor(graph, cfg.kappa[0], cfg.beta[0]).map_err(Failure::config)?;
    rc.tau = cfg.tau[0];
    rc.alpha = cfg.alpha[0];
    rc.shared_prune = cfg.shared_prune;
    rc.refresh_period = cfg.refresh_period;
    rc.max_iters = cfg.max_iters;
    rc.seed = cfg.run_seed(0);
    rc.tolerance = cfg.tolerance;
    rc.count_pruning_overhead = cfg.count_pruning_overhead;
    rc.track_spectral_gap = cfg.track_spectral_gap;
    Ok(rc)
}

fn write(dir: &Path, name: &str, text: &str) -> Outcome {
    fs::create_dir_all(dir).map_err(Failure::run)?;
    fs::write(dir.join(name), text).map_err(|e| Failure::run(format!("{}: {e}", dir.join(name).display())))
}

fn write_trace(dir: &Path, trace: &RunTrace) -> Outcome {
    write(dir, "trace.csv", &trace.to_csv_string().map_err(Failure::run)?)?;
    let last = trace.last();
    let summary = serde_json::json!({
        "status": trace.status.to_string(),
        "iterations": trace.iterations(),
        "comm_volume": trace.ledger.volume,
        "comm_rounds": trace.ledger.rounds,
        "consensus_error": last.consensus_error,
        "optimality_error": last.optimality_error,
        "mean_spectral_gap": trace.mean_cycle_gap(),
    });
    write(dir, "summary.json", &serde_json::to_string_pretty(&summary).map_err(Failure::run)?)?;
    println!(
        "{} after {} iterations, volume {}, rounds {}",
        trace.status,
        trace.iterations(),
        trace.ledger.volume,
        trace.ledger.rounds
    );
    if trace.status == RunStatus::Diverged {
        return Err(Failure::Run("run diverged".into()));
    }
    Ok(())
}

fn consensus(args: ConsensusArgs) -> Outcome {
    let mut cfg = base_config(&args.shared, Scenario::Consensus)?;
    apply_graph(&mut cfg, &args.graph);
    if let Some(a) = args.algorithm {
        cfg.algorithms = vec![a];
    }
    if let Some(d) = args.dim {
        cfg.dim = d;
    }
    let cfg = finish(cfg)?;
    if cfg.scenario != Scenario::Consensus {
        return Err(Failure::config("config scenario is not consensus"));
    }
    let graph = draw_graph(&cfg)?;
    let rc = single_run_config(&cfg, cfg.algorithms()[0], &graph)?;
    let x0 = initial_states(graph.node_count(), cfg.dim, rc.seed);
    let trace = algorithms::run(&rc, &x0, None).map_err(Failure::run)?;
    write_trace(&cfg.output, &trace)
}

fn optimize(args: OptimizeArgs) -> Outcome {
    let scenario = match args.problem {
        Some(ProblemKind::Logreg) => Scenario::Logreg,
        _ => Scenario::Linreg,
    };
    let mut cfg = base_config(&args.shared, scenario)?;
    if args.problem.is_some() || !matches!(cfg.scenario, Scenario::Linreg | Scenario::Logreg) {
        cfg.scenario = scenario;
    }
    apply_graph(&mut cfg, &args.graph);
    if let Some(a) = args.alpha {
        cfg.alpha = vec![a];
    }
    if let Some(a) = args.algorithm {
        cfg.algorithms = vec![a];
    }
    if args.data.is_some() {
        cfg.problem.data = args.data.clone();
    }
    if let Some(l) = &args.label_col {
        cfg.problem.label_col = l.clone();
    }
    let cfg = finish(cfg)?;
    let prepared = prepare_problem(&cfg).map_err(Failure::config)?.expect("optimization scenario");
    let graph = draw_graph(&cfg)?;
    let rc = single_run_config(&cfg, cfg.algorithms()[0], &graph)?;
    let x0 = Matrix::zeros(graph.node_count(), adacons::problems::Objective::dim(&prepared.problem));
    let trace = algorithms::run(&rc, &x0, Some((&prepared.problem, Some(prepared.f_star)))).map_err(Failure::run)?;
    write_trace(&cfg.output, &trace)
}

fn sweep(args: SweepArgs) -> Outcome {
    if args.shared.config.is_none() {
        return Err(Failure::config("sweep needs --config"));
    }
    let cfg = finish(base_config(&args.shared, Scenario::Consensus)?)?;
    let res = run_sweep(&cfg).map_err(Failure::run)?;
    res.write_to(&cfg.output).map_err(Failure::run)?;
    let failures: usize = res.summary.iter().map(|s| s.failures).sum();
    println!(
        "{} grid points, {} runs ({} failed) -> {}",
        res.summary.len(),
        res.runs.len(),
        failures,
        cfg.output.display()
    );
    Ok(())
}

fn analyze(args: AnalyzeArgs) -> Outcome {
    let mut cfg = base_config(&args.shared, Scenario::Consensus)?;
    apply_graph(&mut cfg, &args.graph);
    let cfg = finish(cfg)?;
    let graph = draw_graph(&cfg)?;
    let mut rc = single_run_config(&cfg, Algorithm::Ac, &graph)?;
    rc.record_matrices = true;
    let x0 = initial_states(graph.node_count(), cfg.dim, rc.seed);
    let trace = algorithms::ac_run(&rc, &x0).map_err(Failure::run)?;
    let out = &cfg.output;
    match args.check {
        Check::Envelope => {
            let tau_bar = match (cfg.refresh_period, rc.tau) {
                (Some(r), Tau::Finite(t)) => tau_bar_from_refresh(r, t),
                (Some(_), Tau::Infinite) => 1,
                (None, _) => measure_tau_bar(&trace)
                    .ok_or_else(|| Failure::run("no connectivity window covers the run"))?,
            };
            let params = EnvelopeParams::for_reference(&graph, tau_bar).map_err(Failure::run)?;
            let rep = consensus_envelope(&trace, &params).map_err(Failure::run)?;
            let mut csv = Vec::new();
            rep.write_csv(&mut csv).map_err(Failure::run)?;
            write(out, "envelope.csv", &String::from_utf8_lossy(&csv))?;
            write(out, "envelope.json", &rep.summary_json().map_err(Failure::run)?)?;
            println!("envelope {} (tau_bar {tau_bar}, min margin {:e})", if rep.holds { "holds" } else { "violated" }, rep.min_margin);
            if !rep.holds {
                return Err(Failure::Run("envelope violated".into()));
            }
        }
        Check::RhoPrime => {
            let seq = trace.iteration_matrices().expect("matrices recorded");
            let tau_hat = args.tau_hat.unwrap_or(1);
            let rho = compute_rho_prime(&seq, seq.len(), tau_hat).map_err(Failure::run)?;
            let json = serde_json::json!({ "tau_hat": tau_hat, "k": seq.len(), "rho_prime": rho });
            write(out, "rho_prime.json", &serde_json::to_string_pretty(&json).map_err(Failure::run)?)?;
            println!("rho' = {rho:e} (tau_hat {tau_hat}, {} matrices)", seq.len());
        }
        Check::StepSize => {
            let seq = trace.iteration_matrices().expect("matrices recorded");
            let inputs = StepSizeInputs {
                n: graph.node_count(),
                q: 1.0 / (1.0 + graph.max_degree() as f64),
                tau_bar: measure_tau_bar(&trace).unwrap_or(1),
                d_g: diameter(&graph).finite().unwrap_or(1).max(1),
                l: args.smoothness,
            };
            let rep = suggest_step_size(&inputs, Some(&seq)).map_err(Failure::config)?;
            write(out, "step_size.json", &serde_json::to_string_pretty(&rep).map_err(Failure::run)?)?;
            println!("eta {}, tau_hat {}, alpha_max {:e}", rep.eta, rep.tau_hat, rep.alpha_max);
        }
    }
    Ok(())
}

fn budget(args: BudgetArgs) -> Outcome {
    let mut cfg = base_config(&args.shared, Scenario::Budget)?;
    cfg.scenario = Scenario::Budget;
    apply_graph(&mut cfg, &args.graph);
    let mut spec = cfg.budget.clone().unwrap_or(BudgetSpec { bits: 0, bits_per_vector: 640 });
    if let Some(b) = args.bits {
        spec.bits = b;
    }
    if let Some(d) = args.bits_per_vector {
        spec.bits_per_vector = d;
    }
    if spec.bits == 0 {
        return Err(Failure::config("budget needs --bits or a budget section"));
    }
    cfg.budget = Some(spec.clone());
    let cfg = finish(cfg)?;
    let graph = draw_graph(&cfg)?;
    let seed = cfg.run_seed(0);
    let x0 = initial_states(graph.node_count(), cfg.dim, seed);
    let (rep, reference, pruned) =
        budget_comparison(&graph, cfg.kappa[0], spec.bits, spec.bits_per_vector, &x0, seed).map_err(Failure::run)?;
    let mut csv = Vec::new();
    BudgetReport::write_csv(&mut csv, &reference, &pruned).map_err(Failure::run)?;
    write(&cfg.output, "budget.csv", &String::from_utf8_lossy(&csv))?;
    write(&cfg.output, "budget.json", &rep.summary_json().map_err(Failure::run)?)?;
    println!(
        "T = {}, T_prune = {}, error {:e} vs pruned {:e}{}",
        rep.iterations,
        rep.pruned_iterations,
        rep.error,
        rep.pruned_error,
        if rep.pruned_connected { "" } else { " (pruned graph disconnected)" }
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Consensus(a) => consensus(a),
        Command::Optimize(a) => optimize(a),
        Command::Sweep(a) => sweep(a),
        Command::Analyze(a) => analyze(a),
        Command::Budget(a) => budget(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Run(m)) => {
            eprintln!("run failed: {m}");
            ExitCode::from(2)
        }
    }
}
