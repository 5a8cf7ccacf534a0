//! Dense and sparse storage plus the two square solvers used for the
//! transient system.

mod csc;
mod dense;
mod lu;
mod qr;

pub use csc::CscMatrix;
pub use dense::DenseMatrix;
pub use lu::PivotFreeLu;
pub use qr::HouseholderQr;

use serde::{Deserialize, Serialize};

/// `C = alpha * A * B + beta * C` on strided raw storage.
///
/// # Safety
/// Every pointer/stride pair must describe a valid matrix of the given shape,
/// and `c` must not overlap `a` or `b`.
pub(crate) unsafe fn gemm(
    m: usize,
    k: usize,
    n: usize,
    alpha: f64,
    a: (*const f64, isize, isize),
    b: (*const f64, isize, isize),
    beta: f64,
    c: (*mut f64, isize, isize),
) {
    if m == 0 || n == 0 {
        return;
    }
    matrixmultiply::dgemm(m, k, n, alpha, a.0, a.1, a.2, b.0, b.1, b.2, beta, c.0, c.1, c.2);
}

/// Which factorization backs the transient solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Orthogonal-triangular factorization from Householder reflections.
    #[default]
    Householder,
    /// Gaussian elimination without pivoting.
    PivotFreeLu,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverKind::Householder => f.write_str("householder-qr"),
            SolverKind::PivotFreeLu => f.write_str("pivot-free-lu"),
        }
    }
}

/// A factored square matrix.
#[derive(Debug, Clone)]
pub enum Factorization {
    Qr(HouseholderQr),
    Lu(PivotFreeLu),
}

impl Factorization {
    pub fn new(a: DenseMatrix, kind: SolverKind) -> Self {
        match kind {
            SolverKind::Householder => Factorization::Qr(HouseholderQr::factor(a)),
            SolverKind::PivotFreeLu => Factorization::Lu(PivotFreeLu::factor(a)),
        }
    }

    pub fn kind(&self) -> SolverKind {
        match self {
            Factorization::Qr(_) => SolverKind::Householder,
            Factorization::Lu(_) => SolverKind::PivotFreeLu,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Factorization::Qr(f) => f.dim(),
            Factorization::Lu(f) => f.dim(),
        }
    }

    pub fn solve(&self, b: &mut [f64]) {
        match self {
            Factorization::Qr(f) => f.solve(b),
            Factorization::Lu(f) => f.solve(b),
        }
    }

    pub fn solve_transpose(&self, b: &mut [f64]) {
        match self {
            Factorization::Qr(f) => f.solve_transpose(b),
            Factorization::Lu(f) => f.solve_transpose(b),
        }
    }

    /// Diagonal of the triangular factor that carries the pivots.
    pub fn pivots(&self) -> Vec<f64> {
        match self {
            Factorization::Qr(f) => f.r_diagonal(),
            Factorization::Lu(f) => f.u_diagonal(),
        }
    }

    /// Index and magnitude of the smallest pivot, if any.
    pub fn smallest_pivot(&self) -> Option<(usize, f64)> {
        self.pivots()
            .into_iter()
            .map(f64::abs)
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
