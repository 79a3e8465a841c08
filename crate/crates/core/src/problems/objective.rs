use serde::{Deserialize, Serialize};

use super::{Dataset, Objective};
use crate::error::{Error, Result};
use crate::linalg::{axpy, cholesky_solve, dot, norm, power_max_eigenvalue, symmetric_eigenvalues, Matrix};

const NEWTON_MAX_ITERS: usize = 200;
const NEWTON_GRAD_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    /// `f_i(x) = (1/|D_i|) Σ (a_jᵀx - b_j)² + λ‖x‖²`
    Linear,
    /// `f_i(x) = (1/|D_i|) Σ [log(1 + e^{a_jᵀx}) - b_j a_jᵀx] + (λ/2)‖x‖²`
    Logistic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub kind: ObjectiveKind,
    pub partitions: Vec<Vec<usize>>,
    pub lambda: f64,
}

/// An objective bound to its data.
#[derive(Clone, Debug)]
pub struct Problem {
    spec: ObjectiveSpec,
    data: Dataset,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Smoothness {
    /// Constants of the network objective `F = (1/n) Σ f_i`.
    pub l: f64,
    pub mu: f64,
    pub local_l: Vec<f64>,
    pub local_mu: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub x_star: Vec<f64>,
    pub f_star: f64,
    pub grad_norm: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

impl Problem {
    pub fn new(spec: ObjectiveSpec, data: Dataset) -> Result<Self> {
        if !(spec.lambda >= 0.0) || !spec.lambda.is_finite() {
            return Err(Error::InvalidParameter(format!("lambda {} < 0", spec.lambda)));
        }
        if spec.partitions.is_empty() {
            return Err(Error::InvalidParameter("no partitions".into()));
        }
        let mut seen = vec![false; data.sample_count()];
        for (i, block) in spec.partitions.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidParameter(format!("partition {i} is empty")));
            }
            for &j in block {
                if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::InvalidParameter(format!(
                        "partition {i}: sample {j} out of range or repeated"
                    )));
                }
            }
        }
        if let Some(j) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidParameter(format!("sample {j} is not assigned to any node")));
        }
        if spec.kind == ObjectiveKind::Logistic {
            data.require_binary_labels()?;
        }
        Ok(Self { spec, data })
    }

    pub fn spec(&self) -> &ObjectiveSpec {
        &self.spec
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    /// Gram matrix `(1/|S|) Σ_{j∈S} a_j a_jᵀ` over a sample subset.
    fn gram<'a>(&self, samples: impl IntoIterator<Item = (&'a usize, f64)>) -> Matrix {
        let d = self.data.dim();
        let mut g = Matrix::zeros(d, d);
        for (&j, w) in samples {
            let a = self.data.features().row(j);
            for r in 0..d {
                let s = w * a[r];
                for c in 0..d {
                    g[(r, c)] += s * a[c];
                }
            }
        }
        g
    }

    /// Network-level sample weights `1 / (n |D_i|)`.
    fn sample_weights(&self) -> impl Iterator<Item = (&usize, f64)> + '_ {
        let n = self.spec.partitions.len() as f64;
        self.spec
            .partitions
            .iter()
            .flat_map(move |b| b.iter().map(move |j| (j, 1.0 / (n * b.len() as f64))))
    }

    /// Hessian of the network objective.
    pub fn hessian(&self, x: &[f64]) -> Matrix {
        let d = self.data.dim();
        let mut h = match self.spec.kind {
            ObjectiveKind::Linear => self.gram(self.sample_weights().map(|(j, w)| (j, 2.0 * w))),
            ObjectiveKind::Logistic => {
                let weighted: Vec<(&usize, f64)> = self
                    .sample_weights()
                    .map(|(j, w)| {
                        let s = sigmoid(dot(self.data.features().row(*j), x));
                        (j, w * s * (1.0 - s))
                    })
                    .collect();
                self.gram(weighted)
            }
        };
        let reg = match self.spec.kind {
            ObjectiveKind::Linear => 2.0 * self.spec.lambda,
            ObjectiveKind::Logistic => self.spec.lambda,
        };
        for k in 0..d {
            h[(k, k)] += reg;
        }
        h
    }

    pub fn smoothness_constants(&self) -> Result<Smoothness> {
        let lambda = self.spec.lambda;
        let d = self.data.dim();
        let constants = |gram: Matrix| -> Result<(f64, f64)> {
            match self.spec.kind {
                ObjectiveKind::Linear => {
                    let ev = symmetric_eigenvalues(&gram)?;
                    let lo = ev[d - 1].max(0.0);
                    Ok((2.0 * ev[0] + 2.0 * lambda, 2.0 * lo + 2.0 * lambda))
                }
                ObjectiveKind::Logistic => Ok((power_max_eigenvalue(&gram) / 4.0 + lambda, lambda)),
            }
        };
        let (l, mu) = constants(self.gram(self.sample_weights()))?;
        let mut local_l = Vec::new();
        let mut local_mu = Vec::new();
        for block in &self.spec.partitions {
            let w = 1.0 / block.len() as f64;
            let (li, mi) = constants(self.gram(block.iter().map(|j| (j, w))))?;
            local_l.push(li);
            local_mu.push(mi);
        }
        Ok(Smoothness { l, mu, local_l, local_mu })
    }
}

impl Objective for Problem {
    fn node_count(&self) -> usize {
        self.spec.partitions.len()
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn local_gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        let block = &self.spec.partitions[i];
        out.iter_mut().for_each(|v| *v = 0.0);
        for &j in block {
            let (a, b) = self.data.sample(j);
            let z = dot(a, x);
            let r = match self.spec.kind {
                ObjectiveKind::Linear => 2.0 * (z - b),
                ObjectiveKind::Logistic => sigmoid(z) - b,
            };
            axpy(r, a, out);
        }
        let m = block.len() as f64;
        let reg = match self.spec.kind {
            ObjectiveKind::Linear => 2.0 * self.spec.lambda,
            ObjectiveKind::Logistic => self.spec.lambda,
        };
        for (o, xi) in out.iter_mut().zip(x) {
            *o = *o / m + reg * xi;
        }
    }

    fn local_value(&self, i: usize, x: &[f64]) -> f64 {
        let block = &self.spec.partitions[i];
        let loss: f64 = block
            .iter()
            .map(|&j| {
                let (a, b) = self.data.sample(j);
                let z = dot(a, x);
                match self.spec.kind {
                    ObjectiveKind::Linear => (z - b).powi(2),
                    ObjectiveKind::Logistic => softplus(z) - b * z,
                }
            })
            .sum();
        let sq = dot(x, x);
        let reg = match self.spec.kind {
            ObjectiveKind::Linear => self.spec.lambda * sq,
            ObjectiveKind::Logistic => 0.5 * self.spec.lambda * sq,
        };
        loss / block.len() as f64 + reg
    }
}

/// Minimizer of the network objective: normal equations for least squares,
/// damped Newton for logistic regression.
pub fn solve_reference(problem: &Problem) -> Result<Reference> {
    let d = problem.dim();
    let x_star = match problem.spec.kind {
        ObjectiveKind::Linear => {
            let h = problem.hessian(&vec![0.0; d]);
            // ∇F(x) = H x - ∇F(0)·(-1), so H x* = -∇F(0)
            let g0 = problem.gradient(&vec![0.0; d]);
            let rhs: Vec<f64> = g0.iter().map(|v| -v).collect();
            cholesky_solve(&h, &rhs)?
        }
        ObjectiveKind::Logistic => newton(problem)?,
    };
    let f_star = problem.value(&x_star);
    let grad_norm = norm(&problem.gradient(&x_star));
    Ok(Reference { x_star, f_star, grad_norm })
}

fn newton(problem: &Problem) -> Result<Vec<f64>> {
    let d = problem.dim();
    let mut x = vec![0.0; d];
    let mut f = problem.value(&x);
    let mut g = problem.gradient(&x);
    for _ in 0..NEWTON_MAX_ITERS {
        if norm(&g) <= NEWTON_GRAD_TOL {
            return Ok(x);
        }
        let step = cholesky_solve(&problem.hessian(&x), &g)?;
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi - t * si).collect();
            let ft = problem.value(&trial);
            if ft <= f + 1e-15 * f.abs() || t < 1e-10 {
                let gt = problem.gradient(&trial);
                if t < 1e-10 && norm(&gt) >= norm(&g) {
                    return Err(Error::NoConvergence {
                        iterations: NEWTON_MAX_ITERS,
                        grad_norm: norm(&g),
                    });
                }
                x = trial;
                f = ft;
                g = gt;
                break;
            }
            t *= 0.5;
        }
    }
    if norm(&g) <= NEWTON_GRAD_TOL {
        Ok(x)
    } else {
        Err(Error::NoConvergence {
            iterations: NEWTON_MAX_ITERS,
            grad_norm: norm(&g),
        })
    }
}

/// `f_i(x) = ½‖x - c_i‖²`, one center per row.
#[derive(Clone, Debug)]
pub struct Quadratic {
    centers: Matrix,
}

impl Quadratic {
    pub fn new(centers: Matrix) -> Self {
        Self { centers }
    }

    pub fn minimizer(&self) -> Vec<f64> {
        let n = self.centers.rows() as f64;
        (0..self.centers.cols())
            .map(|c| (0..self.centers.rows()).map(|r| self.centers[(r, c)]).sum::<f64>() / n)
            .collect()
    }
}

impl Objective for Quadratic {
    fn node_count(&self) -> usize {
        self.centers.rows()
    }

    fn dim(&self) -> usize {
        self.centers.cols()
    }

    fn local_gradient_into(&self, i: usize, x: &[f64], out: &mut [f64]) {
        for ((o, xi), ci) in out.iter_mut().zip(x).zip(self.centers.row(i)) {
            *o = xi - ci;
        }
    }

    fn local_value(&self, i: usize, x: &[f64]) -> f64 {
        0.5 * x
            .iter()
            .zip(self.centers.row(i))
            .map(|(xi, ci)| (xi - ci).powi(2))
            .sum::<f64>()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{gen_linear_synthetic, partition_uniform};
    use proptest::prelude::*;

    fn linear(samples: usize, dim: usize, nodes: usize, noise: f64, lambda: f64, seed: u64) -> (Problem, Vec<f64>) {
        let (data, truth) = gen_linear_synthetic(samples, dim, noise, seed).unwrap();
        let spec = ObjectiveSpec {
            kind: ObjectiveKind::Linear,
            partitions: partition_uniform(samples, nodes, seed + 1).unwrap(),
            lambda,
        };
        (Problem::new(spec, data).unwrap(), truth)
    }

    fn logistic(samples: usize, dim: usize, nodes: usize, lambda: f64, seed: u64) -> Problem {
        let (data, _) = gen_linear_synthetic(samples, dim, 0.5, seed).unwrap();
        let labels = data.labels().iter().map(|&b| f64::from(u8::from(b > 0.0))).collect();
        let data = Dataset::new(data.features().clone(), labels).unwrap();
        let spec = ObjectiveSpec {
            kind: ObjectiveKind::Logistic,
            partitions: partition_uniform(samples, nodes, seed + 1).unwrap(),
            lambda,
        };
        Problem::new(spec, data).unwrap()
    }

    #[test]
    fn noiseless_reference_recovers_truth() {
        let (p, truth) = linear(200, 5, 4, 0.0, 0.0, 3);
        let r = solve_reference(&p).unwrap();
        for (a, b) in r.x_star.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(r.grad_norm <= 1e-10);
    }

    #[test]
    fn unequal_partitions_use_network_weights() {
        let (p, _) = linear(103, 4, 5, 0.3, 1e-3, 8);
        let r = solve_reference(&p).unwrap();
        assert!(r.grad_norm <= 1e-10, "{}", r.grad_norm);
    }

    #[test]
    fn local_minimizer_has_zero_gradient() {
        let (data, _) = gen_linear_synthetic(40, 3, 0.2, 4).unwrap();
        let spec = ObjectiveSpec { kind: ObjectiveKind::Linear, partitions: vec![(0..40).collect()], lambda: 0.0 };
        let p = Problem::new(spec, data).unwrap();
        let r = solve_reference(&p).unwrap();
        assert!(norm(&p.local_gradient(0, &r.x_star)) < 1e-10);
    }

    #[test]
    fn symmetric_logistic_gradient_vanishes_at_origin() {
        let a = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, -2.0], vec![0.5, -3.0], vec![-0.5, 3.0]]).unwrap();
        let data = Dataset::new(a, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let spec = ObjectiveSpec { kind: ObjectiveKind::Logistic, partitions: vec![vec![0, 1, 2, 3]], lambda: 0.0 };
        let p = Problem::new(spec, data).unwrap();
        assert!(norm(&p.local_gradient(0, &[0.0, 0.0])) < 1e-15);
    }

    #[test]
    fn logistic_reference_beats_origin() {
        let a = Matrix::from_rows(&[vec![1.0, 1.0], vec![2.0, 0.5], vec![-1.0, -1.0], vec![-2.0, -0.5]]).unwrap();
        let data = Dataset::new(a, vec![1.0, 1.0, 0.0, 0.0]).unwrap();
        let spec = ObjectiveSpec { kind: ObjectiveKind::Logistic, partitions: vec![vec![0, 1], vec![2, 3]], lambda: 0.1 };
        let p = Problem::new(spec, data).unwrap();
        assert!((p.value(&[0.0, 0.0]) - std::f64::consts::LN_2).abs() < 1e-15);
        let r = solve_reference(&p).unwrap();
        assert!(r.f_star < std::f64::consts::LN_2);
        assert!(r.grad_norm <= 1e-12);
    }

    #[test]
    fn logistic_reference_on_synthetic() {
        let p = logistic(500, 6, 8, 1e-4, 2);
        let r = solve_reference(&p).unwrap();
        assert!(r.grad_norm <= 1e-12, "{}", r.grad_norm);
        // one gradient step barely moves f*
        let l = p.smoothness_constants().unwrap().l;
        let g = p.gradient(&r.x_star);
        let x1: Vec<f64> = r.x_star.iter().zip(&g).map(|(x, g)| x - g / l).collect();
        assert!((p.value(&x1) - r.f_star).abs() <= 1e-15 * r.f_star.abs().max(1.0));
    }

    #[test]
    fn smoothness_examples() {
        let p = logistic(200, 4, 4, 1e-4, 5);
        let s = p.smoothness_constants().unwrap();
        assert_eq!(s.mu, 1e-4);
        assert!(s.local_mu.iter().all(|&m| m == 1e-4));

        // rows ±√2 e_k: AᵀA/N = I
        let r2 = 2f64.sqrt();
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|k| {
                let mut v = vec![0.0, 0.0];
                v[k % 2] = if k < 2 { r2 } else { -r2 };
                v
            })
            .collect();
        let data = Dataset::new(Matrix::from_rows(&rows).unwrap(), vec![0.0; 4]).unwrap();
        let spec = ObjectiveSpec { kind: ObjectiveKind::Linear, partitions: vec![vec![0, 1, 2, 3]], lambda: 0.0 };
        let s = Problem::new(spec, data).unwrap().smoothness_constants().unwrap();
        assert!((s.l - 2.0).abs() < 1e-12 && (s.mu - 2.0).abs() < 1e-12);
    }

    #[test]
    fn smoothness_matches_power_iteration() {
        let (p, _) = linear(1000, 10, 10, 0.1, 0.0, 6);
        let s = p.smoothness_constants().unwrap();
        let h = p.hessian(&[0.0; 10]);
        let est = power_max_eigenvalue(&h);
        assert!((s.l - est).abs() <= 0.1 * est);
    }

    #[test]
    fn network_gradient_is_mean_of_local() {
        let (p, _) = linear(96, 3, 6, 0.1, 0.01, 2);
        let x = [0.3, -1.0, 2.0];
        let g = p.gradient(&x);
        let h = p.hessian(&x);
        let x_star = solve_reference(&p).unwrap().x_star;
        let diff: Vec<f64> = x.iter().zip(&x_star).map(|(a, b)| a - b).collect();
        let hg = h.matvec(&diff);
        for (a, b) in g.iter().zip(&hg) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn partition_validation() {
        let (data, _) = gen_linear_synthetic(4, 2, 0.0, 0).unwrap();
        let bad = |partitions| ObjectiveSpec { kind: ObjectiveKind::Linear, partitions, lambda: 0.0 };
        assert!(Problem::new(bad(vec![vec![0, 1], vec![1, 2, 3]]), data.clone()).is_err());
        assert!(Problem::new(bad(vec![vec![0, 1], vec![2]]), data.clone()).is_err());
        assert!(Problem::new(bad(vec![vec![0, 1], vec![2, 9]]), data.clone()).is_err());
        let spec = ObjectiveSpec { kind: ObjectiveKind::Logistic, partitions: vec![vec![0, 1, 2, 3]], lambda: 0.0 };
        assert!(Problem::new(spec, data).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn objectives_are_convex(seed: u64, t in 0.01f64..0.99) {
            let (lin, _) = linear(60, 3, 3, 0.5, 0.01, seed % 1000);
            let log = logistic(60, 3, 3, 0.01, seed % 1000);
            let mut rng = crate::stream::substream(seed, &[]);
            let mut draw = || -> Vec<f64> { (0..3).map(|_| rand::Rng::random_range(&mut rng, -3.0..3.0)).collect() };
            let (x, z) = (draw(), draw());
            let mid: Vec<f64> = x.iter().zip(&z).map(|(a, b)| t * a + (1.0 - t) * b).collect();
            for p in [&lin, &log] {
                prop_assert!(p.value(&mid) <= t * p.value(&x) + (1.0 - t) * p.value(&z) + 1e-12);
            }
        }
    }
}
