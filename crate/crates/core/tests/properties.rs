mod common;

use adacons::algorithms::{ac_run, acgt_run, dist_avg_run, gta_run, random_gossip_run, Algorithm, RunConfig, Tau};
use adacons::analysis::{suggest_step_size, StepSizeInputs};
use adacons::graph::{diameter, Graph};
use adacons::linalg::{norm, Matrix};
use adacons::mixing::metropolis_hastings;
use adacons::problems::{solve_reference, Objective, ObjectiveKind, Quadratic};
use adacons::pruning::{Beta, PruneParams};
use adacons::stream::substream;
use rand::Rng;
use rand_distr::StandardNormal;

use common::{er, problem, states};

#[test]
fn unpruned_ac_equals_averaging_bitwise() {
    for seed in 0..5 {
        let g = er(16, 0.4, seed);
        let x0 = states(16, 4, 100 + seed);
        let mut cfg = RunConfig::new(Algorithm::Ac, g.clone());
        cfg.prune = PruneParams::keep_one_neighbor(&g, 0.0, Beta::Finite(1.0)).unwrap();
        cfg.tau = Tau::Infinite;
        cfg.max_iters = 400;
        cfg.seed = seed;
        let ac = ac_run(&cfg, &x0).unwrap();
        let avg = dist_avg_run(&g, &x0, 400, cfg.tolerance).unwrap();
        assert_eq!(ac.rows, avg.rows);
        assert_eq!(ac.ledger, avg.ledger);
        assert_eq!(ac.final_x, avg.final_x);
        assert_eq!(ac.status, avg.status);
    }
}

#[test]
fn unpruned_tracking_equals_plain_tracking_bitwise() {
    let obj = problem(ObjectiveKind::Linear, 240, 4, 12, 0.01, 3);
    let f_star = solve_reference(&obj).unwrap().f_star;
    for seed in 0..5 {
        let g = er(12, 0.5, seed);
        let x0 = Matrix::zeros(12, 4);
        let mut cfg = RunConfig::new(Algorithm::Acgt, g.clone());
        cfg.prune = PruneParams::keep_one_neighbor(&g, 0.0, Beta::Finite(1.0)).unwrap();
        cfg.tau = Tau::Finite(1);
        cfg.shared_prune = true;
        cfg.alpha = 0.05;
        cfg.max_iters = 300;
        cfg.tolerance = 1e-9;
        cfg.seed = seed;
        let a = acgt_run(&cfg, &obj, &x0, Some(f_star)).unwrap();
        let b = gta_run(&g, &obj, &x0, 0.05, 300, 1e-9, Some(f_star)).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.ledger, b.ledger);
        assert_eq!(a.final_x, b.final_x);
        assert_eq!(a.final_y, b.final_y);
    }
}

#[test]
fn averaging_methods_preserve_the_mean() {
    for seed in 0..20 {
        let g = er(12, 0.4, seed);
        let x0 = states(12, 3, seed);
        let mut cfg = RunConfig::new(Algorithm::Ac, g.clone());
        cfg.prune = PruneParams::keep_one_neighbor(&g, 0.6, Beta::Finite(1.0)).unwrap();
        cfg.tau = Tau::Finite(3);
        cfg.max_iters = 200;
        cfg.seed = seed;
        let traces = [
            ac_run(&cfg, &x0).unwrap(),
            dist_avg_run(&g, &x0, 200, 0.0).unwrap(),
            random_gossip_run(&g, &x0, 200, 0.0, seed).unwrap(),
        ];
        for t in &traces {
            assert!(t.rows.iter().all(|r| r.mean_drift <= 1e-10), "seed {seed}");
        }
    }
}

fn gradient_agrees(obj: &dyn Objective, seed: u64) {
    let mut rng = substream(seed, &[77]);
    let d = obj.dim();
    let h = 1e-6;
    for _ in 0..100 {
        let x: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let i = rng.random_range(0..obj.node_count());
        let g = obj.local_gradient(i, &x);
        let fd: Vec<f64> = (0..d)
            .map(|j| {
                let (mut p, mut m) = (x.clone(), x.clone());
                p[j] += h;
                m[j] -= h;
                (obj.local_value(i, &p) - obj.local_value(i, &m)) / (2.0 * h)
            })
            .collect();
        let diff: Vec<f64> = g.iter().zip(&fd).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&g).max(1e-8);
        assert!(rel < 1e-5, "relative error {rel}");
    }
}

#[test]
fn analytic_gradients_match_differences() {
    gradient_agrees(&problem(ObjectiveKind::Linear, 120, 5, 4, 0.1, 1), 1);
    gradient_agrees(&problem(ObjectiveKind::Logistic, 120, 5, 4, 0.1, 2), 2);
}

#[test]
fn reference_solutions_are_stationary() {
    for kind in [ObjectiveKind::Linear, ObjectiveKind::Logistic] {
        let p = problem(kind, 400, 6, 8, 0.01, 5);
        let r = solve_reference(&p).unwrap();
        assert!(r.grad_norm <= 1e-10, "{kind:?}: {}", r.grad_norm);
        assert!(norm(&p.gradient(&r.x_star)) <= 1e-10);
    }
}

#[test]
fn half_the_suggested_step_converges() {
    let g = Graph::complete(4);
    let centers = Matrix::from_fn(4, 2, |i, j| (i as f64) - 2.0 * j as f64);
    let obj = Quadratic::new(centers);
    let x_star = obj.minimizer();
    let f_star = obj.value(&x_star);
    let x0 = Matrix::zeros(4, 2);

    let seq = vec![metropolis_hastings(&g).into_matrix(); 200];
    let inputs = StepSizeInputs {
        n: 4,
        q: 0.25,
        tau_bar: 1,
        d_g: diameter(&g).finite().unwrap(),
        l: 1.0,
    };
    let report = suggest_step_size(&inputs, Some(&seq)).unwrap();
    assert_eq!(report.tau_hat, 1);
    assert!(report.alpha_max > 0.0 && report.certified() == Some(true));

    let mut cfg = RunConfig::new(Algorithm::Acgt, g);
    cfg.alpha = report.alpha_max / 2.0;
    cfg.max_iters = 20_000;
    cfg.tolerance = 1e-10;
    let trace = acgt_run(&cfg, &obj, &x0, Some(f_star)).unwrap();
    assert!(trace.converged(), "{:?} after {}", trace.status, trace.iterations());
}
