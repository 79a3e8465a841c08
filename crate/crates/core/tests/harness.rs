use adacons::algorithms::{dist_avg_run, Algorithm, RunConfig, Tau};
use adacons::graph::{connected_erdos_renyi, Graph};
use adacons::harness::sweep::{initial_states, median, prepare_problem};
use adacons::harness::{run_sweep, step_size_grid_search, BudgetSpec, ExperimentConfig, Scenario};
use adacons::linalg::Matrix;
use adacons::problems::Objective;
use adacons::pruning::Beta;
use adacons::Error;

fn small_consensus() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(Scenario::Consensus, 12, 0.5);
    cfg.kappa = vec![0.0, 0.5];
    cfg.tau = vec![Tau::Finite(5)];
    cfg.trials = 3;
    cfg.dim = 3;
    cfg.max_iters = 2000;
    cfg.tolerance = 1e-8;
    cfg
}

#[test]
fn summary_has_one_row_per_point() {
    let mut cfg = small_consensus();
    cfg.tau = vec![Tau::Finite(1), Tau::Finite(5)];
    cfg.beta = vec![Beta::Finite(0.0), Beta::Greedy];
    let res = run_sweep(&cfg).unwrap();
    assert_eq!(res.summary.len(), 2 * 2 * 2);
    assert_eq!(res.runs.len(), 8 * 3);
    assert!(res.summary.iter().all(|s| s.trials == 3 && s.failures == 0));
    let csv = res.summary_csv().unwrap();
    assert_eq!(csv.lines().count(), 9);
    assert!(csv.starts_with("scenario,algorithm,kappa,tau,beta,alpha,trials,reached,"));
}

#[test]
fn sweeps_are_reproducible_across_job_counts() {
    let mut cfg = small_consensus();
    cfg.traces = true;
    cfg.jobs = Some(1);
    let a = run_sweep(&cfg).unwrap();
    cfg.jobs = Some(4);
    let b = run_sweep(&cfg).unwrap();
    assert_eq!(a.summary_csv().unwrap(), b.summary_csv().unwrap());
    assert_eq!(a.runs_csv().unwrap(), b.runs_csv().unwrap());
    assert_eq!(a.traces, b.traces);
    assert_eq!(a.traces.len(), 6);

    let dir = tempfile::tempdir().unwrap();
    a.write_to(dir.path()).unwrap();
    let first = std::fs::read(dir.path().join("summary.csv")).unwrap();
    b.write_to(dir.path()).unwrap();
    assert_eq!(first, std::fs::read(dir.path().join("summary.csv")).unwrap());
    assert!(dir.path().join("traces/trace_p1_t2.csv").exists());
}

#[test]
fn unpruned_point_matches_plain_averaging() {
    let mut cfg = small_consensus();
    cfg.kappa = vec![0.0];
    cfg.trials = 1;
    let res = run_sweep(&cfg).unwrap();
    let (g, _) = connected_erdos_renyi(12, 0.5, cfg.graph.seed_for(0), 1000).unwrap();
    let x0 = initial_states(12, 3, cfg.run_seed(0));
    let base = dist_avg_run(&g, &x0, cfg.max_iters, cfg.tolerance).unwrap();
    let hit = base.first_below(cfg.tolerance).unwrap();
    let s = &res.summary[0];
    assert_eq!(s.volume_mean, Some(hit.comm_volume as f64));
    assert_eq!(s.rounds_mean, Some(hit.comm_rounds as f64));
}

#[test]
fn failed_runs_are_recorded() {
    let mut cfg = small_consensus();
    cfg.graph.p = 0.0;
    cfg.trials = 2;
    let res = run_sweep(&cfg).unwrap();
    assert!(res.runs.iter().all(|r| r.is_failure()));
    assert!(res.summary.iter().all(|s| s.failures == 2 && s.reached == 0));
    assert!(res.runs_csv().unwrap().contains("error: "));
}

#[test]
fn budget_scenario_reports_both_errors() {
    let mut cfg = ExperimentConfig::new(Scenario::Budget, 16, 0.6);
    cfg.kappa = vec![0.0, 0.5];
    cfg.trials = 2;
    cfg.budget = Some(BudgetSpec {
        bits: 64 * 10 * 2 * 60 * 20,
        bits_per_vector: 640,
    });
    let res = run_sweep(&cfg).unwrap();
    let zero = &res.summary[0];
    assert_eq!(zero.final_error_median, zero.baseline_error_median);
    assert!(res.summary[1].baseline_error_median.is_some());
}

#[test]
fn optimization_sweep_tunes_step_size() {
    let mut cfg = ExperimentConfig::new(Scenario::Linreg, 8, 0.6);
    cfg.problem.samples = 160;
    cfg.problem.dim = 3;
    cfg.alpha = vec![1e-3, 1e-2, 1e-1];
    cfg.tune_alpha = true;
    cfg.trials = 1;
    cfg.max_iters = 300;
    cfg.tolerance = 1e-8;
    let res = run_sweep(&cfg).unwrap();
    assert_eq!(res.summary.len(), 1);
    let alpha = res.runs[0].alpha.unwrap();
    assert!(cfg.alpha.contains(&alpha));
    assert!(prepare_problem(&cfg).unwrap().is_some());
}

#[test]
fn median_of_even_and_odd() {
    assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
    assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    assert_eq!(median(&[]), None);
}

/// `f_i(x) = (L/2) ‖x - c_i‖²`.
struct Scaled {
    l: f64,
    centers: Matrix,
}

impl Objective for Scaled {
    fn node_count(&self) -> usize {
        self.centers.rows()
    }
    fn dim(&self) -> usize {
        self.centers.cols()
    }
    fn local_gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        for ((o, a), c) in out.iter_mut().zip(x).zip(self.centers.row(i)) {
            *o = self.l * (a - c);
        }
    }
    fn local_value(&self, i: usize, x: &[f64]) -> f64 {
        0.5 * self.l * x.iter().zip(self.centers.row(i)).map(|(a, c)| (a - c).powi(2)).sum::<f64>()
    }
}

fn quadratic_setup(l: f64) -> (RunConfig, Scaled, Matrix, f64) {
    let g = Graph::cycle(5);
    let centers = Matrix::from_fn(5, 2, |i, j| (i + 2 * j) as f64);
    let obj = Scaled { l, centers };
    let mean: Vec<f64> = (0..2).map(|j| (0..5).map(|i| obj.centers[(i, j)]).sum::<f64>() / 5.0).collect();
    let f_star = obj.value(&mean);
    let mut cfg = RunConfig::new(Algorithm::Gta, g);
    cfg.max_iters = 200;
    (cfg, obj, Matrix::zeros(5, 2), f_star)
}

#[test]
fn grid_search_singleton_and_divergence() {
    let (cfg, obj, x0, f_star) = quadratic_setup(10.0);
    let r = step_size_grid_search(&cfg, &obj, &x0, f_star, &[0.01]).unwrap();
    assert_eq!(r.best_alpha, 0.01);
    assert!(matches!(
        step_size_grid_search(&cfg, &obj, &x0, f_star, &[1.0]),
        Err(Error::AllDiverged)
    ));
    assert!(step_size_grid_search(&cfg, &obj, &x0, f_star, &[]).is_err());
}

#[test]
fn grid_search_picks_smallest_final_error() {
    let (cfg, obj, x0, f_star) = quadratic_setup(1.0);
    let grid = [1e-4, 1e-3, 1e-2, 1e-1, 1.0];
    let r = step_size_grid_search(&cfg, &obj, &x0, f_star, &grid).unwrap();
    let best = r.outcomes.iter().find(|o| o.0 == r.best_alpha).unwrap().1.unwrap();
    assert!(r.outcomes.iter().all(|o| o.1.is_none_or(|e| best <= e)));
}
