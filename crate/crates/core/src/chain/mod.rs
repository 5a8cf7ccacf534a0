//! Finite Markov chains: validation, classification, canonical blocks and
//! Kronecker composition.
//!
//! Transition matrices are column-stochastic throughout: `T[i][j]` is the
//! probability of moving to state `i` from state `j`.

mod blocks;
mod classify;
mod distribution;
mod kron;

pub use blocks::{canonical_blocks, permuted_matrix, CanonicalBlocks};
pub use classify::{classify_states, ClassKind, StateClass, StateClassification};
pub use distribution::DistributionVector;
pub use kron::{kron_compose, kron_compose_with, kron_distribution, KronOptions};

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use crate::linalg::{CscMatrix, DenseMatrix};
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_DENSE_THRESHOLD: usize = 512;

static NEXT_CHAIN_ID: AtomicU64 = AtomicU64::new(1);

/// Identity token of a constructed chain. Caches built from one chain refuse
/// to be combined with another.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ChainId(u64);

impl ChainId {
    fn fresh() -> Self {
        ChainId(NEXT_CHAIN_ID.fetch_add(1, Ordering::Relaxed))
    }

    pub fn value(self) -> u64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainOptions {
    pub tol_stochastic: f64,
    /// Chains with more states than this are stored sparse.
    pub dense_threshold: usize,
}

impl Default for ChainOptions {
    fn default() -> Self {
        Self {
            tol_stochastic: DEFAULT_TOL,
            dense_threshold: DEFAULT_DENSE_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TransitionMatrix {
    Dense(DenseMatrix),
    Sparse(CscMatrix),
}

/// Structural nonzeros `(row, value)` of one column.
pub enum Column<'a> {
    Dense(std::iter::Enumerate<std::slice::Iter<'a, f64>>),
    Sparse(std::iter::Zip<std::slice::Iter<'a, usize>, std::slice::Iter<'a, f64>>),
}

impl Iterator for Column<'_> {
    type Item = (usize, f64);

    #[inline]
    fn next(&mut self) -> Option<(usize, f64)> {
        match self {
            Column::Dense(it) => it.find(|(_, &v)| v != 0.0).map(|(i, &v)| (i, v)),
            Column::Sparse(it) => it.next().map(|(&i, &v)| (i, v)),
        }
    }
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        match self {
            TransitionMatrix::Dense(m) => m.ncols(),
            TransitionMatrix::Sparse(m) => m.ncols(),
        }
    }

    pub fn column(&self, j: usize) -> Column<'_> {
        match self {
            TransitionMatrix::Dense(m) => Column::Dense(m.column(j).iter().enumerate()),
            TransitionMatrix::Sparse(m) => {
                Column::Sparse(m.column_rows(j).iter().zip(m.column_values(j).iter()))
            }
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match self {
            TransitionMatrix::Dense(m) => m[(i, j)],
            TransitionMatrix::Sparse(m) => m.get(i, j),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, TransitionMatrix::Sparse(_))
    }

    fn to_csc(&self) -> CscMatrix {
        match self {
            TransitionMatrix::Dense(m) => CscMatrix::from_dense(m),
            TransitionMatrix::Sparse(m) => m.clone(),
        }
    }
}

/// A validated column-stochastic transition matrix with state labels.
#[derive(Debug, Clone)]
pub struct StochasticChain {
    id: ChainId,
    labels: Vec<String>,
    index: HashMap<String, usize>,
    matrix: TransitionMatrix,
    tol: f64,
}

/// Validates a dense matrix as a chain; see [`StochasticChain::with_options`].
pub fn validate_chain(
    raw: &DenseMatrix,
    labels: Option<Vec<String>>,
    tol: f64,
) -> Result<StochasticChain> {
    StochasticChain::with_options(
        raw,
        labels,
        ChainOptions {
            tol_stochastic: tol,
            ..ChainOptions::default()
        },
    )
}

fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("s{i}")).collect()
}

fn label_index(labels: &[String]) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(labels.len());
    for (i, l) in labels.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    Ok(index)
}

/// Checks one column in place: clamps tiny negatives, optionally rescales a
/// sum that is within `tol` of one.
fn validate_column(
    j: usize,
    rows: &[usize],
    values: &mut [f64],
    tol: f64,
    renormalize: bool,
) -> Result<()> {
    let mut sum = 0.0;
    for (&i, v) in rows.iter().zip(values.iter_mut()) {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
        if *v < -tol {
            return Err(Error::NegativeEntry {
                row: i,
                col: j,
                value: *v,
            });
        }
        if *v < 0.0 {
            *v = 0.0;
        }
        if *v > 1.0 + tol {
            return Err(Error::EntryAboveOne {
                row: i,
                col: j,
                value: *v,
            });
        }
        sum += *v;
    }
    let deviation = (sum - 1.0).abs();
    if deviation > tol {
        return Err(Error::NonStochastic {
            column: j,
            deviation,
        });
    }
    if renormalize && sum != 1.0 {
        for v in values.iter_mut() {
            *v /= sum;
        }
    }
    Ok(())
}

impl StochasticChain {
    /// Validates with default tolerance and storage policy.
    pub fn new(raw: &DenseMatrix, labels: Option<Vec<String>>) -> Result<Self> {
        Self::with_options(raw, labels, ChainOptions::default())
    }

    /// Validates a dense matrix. Entries must be finite and in `[0, 1]` and
    /// every column must sum to one, all within `tol_stochastic`; columns
    /// inside the tolerance are rescaled to sum to one.
    pub fn with_options(
        raw: &DenseMatrix,
        labels: Option<Vec<String>>,
        opts: ChainOptions,
    ) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::NonSquare {
                rows: raw.nrows(),
                cols: raw.ncols(),
            });
        }
        let n = raw.nrows();
        if n == 0 {
            return Err(Error::EmptyChain);
        }
        let mut m = raw.clone();
        let rows: Vec<usize> = (0..n).collect();
        for j in 0..n {
            validate_column(j, &rows, m.column_mut(j), opts.tol_stochastic, true)?;
        }
        let matrix = if n > opts.dense_threshold {
            TransitionMatrix::Sparse(CscMatrix::from_dense(&m))
        } else {
            TransitionMatrix::Dense(m)
        };
        Self::assemble(matrix, labels, opts.tol_stochastic)
    }

    /// Validates a sparse matrix; storage follows `opts.dense_threshold`.
    pub fn from_csc(
        raw: CscMatrix,
        labels: Option<Vec<String>>,
        opts: ChainOptions,
    ) -> Result<Self> {
        Self::from_csc_inner(raw, labels, opts, true)
    }

    pub(crate) fn from_csc_inner(
        mut raw: CscMatrix,
        labels: Option<Vec<String>>,
        opts: ChainOptions,
        renormalize: bool,
    ) -> Result<Self> {
        if raw.nrows() != raw.ncols() {
            return Err(Error::NonSquare {
                rows: raw.nrows(),
                cols: raw.ncols(),
            });
        }
        let n = raw.nrows();
        if n == 0 {
            return Err(Error::EmptyChain);
        }
        for j in 0..n {
            let rows = raw.column_rows(j).to_vec();
            validate_column(
                j,
                &rows,
                raw.column_values_mut(j),
                opts.tol_stochastic,
                renormalize,
            )?;
        }
        let raw = raw.prune_zeros();
        let matrix = if n > opts.dense_threshold {
            TransitionMatrix::Sparse(raw)
        } else {
            TransitionMatrix::Dense(raw.to_dense())
        };
        Self::assemble(matrix, labels, opts.tol_stochastic)
    }

    fn assemble(matrix: TransitionMatrix, labels: Option<Vec<String>>, tol: f64) -> Result<Self> {
        let n = matrix.dim();
        let labels = labels.unwrap_or_else(|| default_labels(n));
        if labels.len() != n {
            return Err(Error::LabelCount {
                expected: n,
                found: labels.len(),
            });
        }
        let index = label_index(&labels)?;
        Ok(Self {
            id: ChainId::fresh(),
            labels,
            index,
            matrix,
            tol,
        })
    }

    /// Same states, new values on the same structure. Used by perturbation
    /// experiments; the result is re-validated.
    pub(crate) fn with_matrix(&self, matrix: CscMatrix) -> Result<Self> {
        let opts = ChainOptions {
            tol_stochastic: self.tol,
            dense_threshold: if self.matrix.is_sparse() { 0 } else { usize::MAX },
        };
        Self::from_csc_inner(matrix, Some(self.labels.clone()), opts, false)
    }

    pub fn id(&self) -> ChainId {
        self.id
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn state_index(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownState(label.to_string()))
    }

    pub fn matrix(&self) -> &TransitionMatrix {
        &self.matrix
    }

    /// Structural nonzeros of column `j`: the possible successors of state `j`.
    pub fn column(&self, j: usize) -> Column<'_> {
        self.matrix.column(j)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix.get(i, j)
    }

    pub fn nnz(&self) -> usize {
        (0..self.n()).map(|j| self.column(j).count()).sum()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        match &self.matrix {
            TransitionMatrix::Dense(m) => m.clone(),
            TransitionMatrix::Sparse(m) => m.to_dense(),
        }
    }

    pub fn to_csc(&self) -> CscMatrix {
        self.matrix.to_csc()
    }

    pub fn frobenius_norm(&self) -> f64 {
        (0..self.n())
            .flat_map(|j| self.column(j))
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }

    /// `T x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (i, v) in self.column(j) {
                y[i] += v * xj;
            }
        }
        y
    }
}
