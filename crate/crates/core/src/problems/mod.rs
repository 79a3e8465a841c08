//! Local objectives, datasets and reference solutions.

mod dataset;
mod loader;
mod objective;
mod synthetic;

pub use dataset::Dataset;
pub use loader::{load_csv_dataset, read_csv_dataset};
pub use objective::{
    solve_reference, ObjectiveKind, ObjectiveSpec, Problem, Quadratic, Reference, Smoothness,
};
pub use synthetic::{gen_linear_synthetic, gen_logistic_synthetic, partition_uniform};

/// A network objective `F(x) = (1/n) Σ_i f_i(x)` split across `n` nodes.
pub trait Objective: Sync {
    fn node_count(&self) -> usize;

    fn dim(&self) -> usize;

    /// Writes `∇f_i(x)` into `out`.
    fn local_gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]);

    fn local_value(&self, i: usize, x: &[f64]) -> f64;

    fn value(&self, x: &[f64]) -> f64 {
        let n = self.node_count();
        (0..n).map(|i| self.local_value(i, x)).sum::<f64>() / n as f64
    }

    fn local_gradient(&self, i: usize, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        self.local_gradient_into(i, x, &mut g);
        g
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let n = self.node_count();
        let mut total = vec![0.0; self.dim()];
        let mut g = vec![0.0; self.dim()];
        for i in 0..n {
            self.local_gradient_into(i, x, &mut g);
            crate::linalg::axpy(1.0, &g, &mut total);
        }
        total.iter_mut().for_each(|v| *v /= n as f64);
        total
    }
}
