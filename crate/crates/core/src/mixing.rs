//! Metropolis–Hastings mixing matrices and their contraction diagnostics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::linalg::{self, Matrix};

/// Absolute tolerance on every row and column sum of a mixing matrix.
pub const DOUBLY_STOCHASTIC_TOL: f64 = 1e-12;

/// Looser row-sum tolerance for products of many stochastic matrices.
pub const ROW_STOCHASTIC_TOL: f64 = 1e-9;

/// A doubly stochastic weight matrix aligned with a graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingMatrix {
    matrix: Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub spectral_gap: f64,
    pub ergodicity: f64,
    pub row_dissimilarity: f64,
    pub min_positive_entry: f64,
}

impl MixingMatrix {
    /// Wraps an existing matrix after checking double stochasticity.
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        check_doubly_stochastic(&matrix, DOUBLY_STOCHASTIC_TOL)?;
        Ok(Self { matrix })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix {
        self.matrix
    }

    /// One averaging step: row `i` of the result is `Σ_j q_ij x_j`.
    pub fn mix(&self, states: &Matrix) -> Matrix {
        self.matrix.matmul(states)
    }

    pub fn min_positive_entry(&self) -> f64 {
        self.matrix
            .data()
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn report(&self) -> Result<SpectralReport> {
        Ok(SpectralReport {
            spectral_gap: spectral_gap(&self.matrix)?,
            ergodicity: ergodicity_coefficient(&self.matrix)?,
            row_dissimilarity: row_dissimilarity(&self.matrix),
            min_positive_entry: self.min_positive_entry(),
        })
    }
}

impl AsRef<Matrix> for MixingMatrix {
    fn as_ref(&self) -> &Matrix {
        &self.matrix
    }
}

/// Metropolis–Hastings weights: `1 / (1 + max(deg i, deg j))` on edges, the
/// remaining mass on the diagonal, zero elsewhere.
pub fn metropolis_hastings(g: &Graph) -> MixingMatrix {
    let n = g.node_count();
    let mut q = Matrix::zeros(n, n);
    for i in 0..n {
        let mut off = 0.0;
        for &j in g.neighbors(i) {
            let w = 1.0 / (1 + g.degree(i).max(g.degree(j))) as f64;
            q[(i, j)] = w;
            off += w;
        }
        q[(i, i)] = 1.0 - off;
    }
    MixingMatrix { matrix: q }
}

pub fn check_doubly_stochastic(m: &Matrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.rows(),
            found: m.cols(),
        });
    }
    check_row_stochastic(m, tol)?;
    for j in 0..m.cols() {
        let sum: f64 = (0..m.rows()).map(|i| m[(i, j)]).sum();
        if (sum - 1.0).abs() > tol {
            return Err(Error::NotStochastic {
                axis: "column",
                index: j,
                sum,
            });
        }
    }
    Ok(())
}

pub fn check_row_stochastic(m: &Matrix, tol: f64) -> Result<()> {
    for (i, row) in m.row_iter().enumerate() {
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > tol || row.iter().any(|&v| v < -tol) {
            return Err(Error::NotStochastic {
                axis: "row",
                index: i,
                sum,
            });
        }
    }
    Ok(())
}

/// `1 - max(|λ_2|, |λ_n|)` for a symmetric stochastic matrix, clamped to
/// `[0, 1]`. Disconnected supports give `λ_2 = 1` and therefore 0. A 1×1
/// matrix has no second eigenvalue; its gap is 1.
pub fn spectral_gap(m: &Matrix) -> Result<f64> {
    let values = linalg::symmetric_eigenvalues(m)?;
    if values.len() < 2 {
        return Ok(1.0);
    }
    let second = values[1].abs().max(values[values.len() - 1].abs());
    Ok((1.0 - second).clamp(0.0, 1.0))
}

/// Coefficient of ergodicity: one minus the smallest overlap
/// `Σ_j min(q_{aj}, q_{bj})` over row pairs `(a, b)`.
pub fn ergodicity_coefficient(m: &Matrix) -> Result<f64> {
    check_row_stochastic(m, ROW_STOCHASTIC_TOL)?;
    let n = m.rows();
    let mut min_overlap = f64::INFINITY;
    for a in 0..n {
        for b in (a + 1)..n {
            let overlap: f64 = m.row(a).iter().zip(m.row(b)).map(|(x, y)| x.min(*y)).sum();
            min_overlap = min_overlap.min(overlap);
        }
    }
    if n < 2 {
        return Ok(0.0);
    }
    Ok((1.0 - min_overlap).clamp(0.0, 1.0))
}

/// Largest column-wise spread `max_j max_{a,b} |q_aj - q_bj|`.
pub fn row_dissimilarity(m: &Matrix) -> f64 {
    let mut worst: f64 = 0.0;
    for j in 0..m.cols() {
        let (lo, hi) = (0..m.rows()).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            (lo.min(m[(i, j)]), hi.max(m[(i, j)]))
        });
        if m.rows() > 0 {
            worst = worst.max(hi - lo);
        }
    }
    worst
}

/// `Q[r:s] = Q_{s-1} ⋯ Q_r`; the empty range is the identity.
pub fn product_range<M: AsRef<Matrix>>(ms: &[M], r: usize, s: usize) -> Result<Matrix> {
    if r > s || s > ms.len() {
        return Err(Error::RangeOutOfBounds {
            start: r,
            end: s,
            len: ms.len(),
        });
    }
    let n = match ms.first() {
        Some(m) => m.as_ref().rows(),
        None => return Ok(Matrix::identity(0)),
    };
    let mut acc = Matrix::identity(n);
    for m in &ms[r..s] {
        acc = m.as_ref().matmul(&acc);
    }
    Ok(acc)
}

/// Spectral norm of `M - (1/n) 1 1ᵀ`.
pub fn deviation_norm(m: &Matrix) -> f64 {
    linalg::spectral_norm(&m.sub(&Matrix::averaging(m.rows())))
}
