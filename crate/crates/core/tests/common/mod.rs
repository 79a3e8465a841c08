#![allow(dead_code, unused_imports)]

use adacons::graph::{connected_erdos_renyi, Graph};
use adacons::harness::sweep::initial_states;
use adacons::problems::{
    gen_linear_synthetic, gen_logistic_synthetic, partition_uniform, ObjectiveKind, ObjectiveSpec, Problem,
};

pub fn er(n: usize, p: f64, seed: u64) -> Graph {
    connected_erdos_renyi(n, p, seed, 1000).expect("connected draw").0
}

pub use adacons::harness::sweep::median;

pub fn states(n: usize, d: usize, seed: u64) -> adacons::linalg::Matrix {
    initial_states(n, d, seed)
}

pub fn problem(kind: ObjectiveKind, samples: usize, dim: usize, nodes: usize, lambda: f64, seed: u64) -> Problem {
    let data = match kind {
        ObjectiveKind::Linear => gen_linear_synthetic(samples, dim, 0.1, seed).unwrap().0,
        ObjectiveKind::Logistic => gen_logistic_synthetic(samples, dim, 0.5, seed).unwrap().0,
    };
    let partitions = partition_uniform(samples, nodes, seed + 1).unwrap();
    Problem::new(ObjectiveSpec { kind, partitions, lambda }, data).unwrap()
}
