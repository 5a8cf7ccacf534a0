//! Transition masks: a weight for every possible move `s_j -> s_i`.
//!
//! Only entries where `T[i][j] > 0` ever influence an expectation, so masks
//! are either an explicit sparse table or a weight function that is only
//! evaluated at the chain's structural nonzeros.

mod builders;
mod lead;

pub use builders::{
    mask_absorption_probability, mask_arrivals, mask_departures, mask_distance,
    mask_steady_state_loop, mask_steps_to_absorption, mask_transition_set,
};
pub use lead::{mask_lead_changes_2p, mask_lead_changes_p, LeadVariant};

use std::fmt;
use std::sync::Arc;

use crate::chain::StochasticChain;
use crate::linalg::{CscMatrix, DenseMatrix};
use crate::{Error, Result};

type WeightFn = dyn Fn(usize, usize) -> f64 + Send + Sync;

#[derive(Clone)]
enum Weights {
    Explicit(Arc<CscMatrix>),
    Lazy(Arc<WeightFn>),
}

/// Weights `M[i][j]` for transitions `s_j -> s_i` of an `n`-state chain.
#[derive(Clone)]
pub struct Mask {
    n: usize,
    weights: Weights,
    kind: String,
    time_average_only: bool,
    notes: Vec<String>,
}

impl fmt::Debug for Mask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Mask")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("lazy", &self.is_lazy())
            .field("time_average_only", &self.time_average_only)
            .finish()
    }
}

impl Mask {
    /// Explicit square table; `m[(i, j)]` weighs the move from `j` to `i`.
    pub fn explicit(m: CscMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NonSquare {
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        for j in 0..m.ncols() {
            for (i, v) in m.column(j) {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(Self {
            n: m.ncols(),
            weights: Weights::Explicit(Arc::new(m)),
            kind: "explicit".into(),
            time_average_only: false,
            notes: Vec::new(),
        })
    }

    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        Self::explicit(CscMatrix::from_dense(m))
    }

    /// Weight function over `n` states, evaluated lazily.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(usize, usize) -> f64 + Send + Sync + 'static,
    {
        Self {
            n,
            weights: Weights::Lazy(Arc::new(f)),
            kind: "function".into(),
            time_average_only: false,
            notes: Vec::new(),
        }
    }

    pub fn zero(n: usize) -> Self {
        Self::explicit(CscMatrix::zeros(n, n)).expect("zero mask is valid")
    }

    pub fn with_kind(mut self, kind: impl Into<String>) -> Self {
        self.kind = kind.into();
        self
    }

    pub(crate) fn time_average(mut self) -> Self {
        self.time_average_only = true;
        self
    }

    pub(crate) fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Name of the builder that produced the mask.
    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn is_lazy(&self) -> bool {
        matches!(self.weights, Weights::Lazy(_))
    }

    /// Set for masks that only make sense in time-average analysis.
    pub fn time_average_only(&self) -> bool {
        self.time_average_only
    }

    /// Interpretation notes attached by builders.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// The stored table of an explicit mask.
    pub fn explicit_entries(&self) -> Option<&CscMatrix> {
        match &self.weights {
            Weights::Explicit(m) => Some(m),
            Weights::Lazy(_) => None,
        }
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        match &self.weights {
            Weights::Explicit(m) => m.get(i, j),
            Weights::Lazy(f) => f(i, j),
        }
    }

    /// Weights of column `j` at the given rows. Explicit masks merge the two
    /// sorted index lists instead of searching per entry.
    pub(crate) fn column_weights(&self, j: usize, rows: &[usize], out: &mut Vec<f64>) {
        out.clear();
        match &self.weights {
            Weights::Explicit(m) => {
                let mr = m.column_rows(j);
                let mv = m.column_values(j);
                let mut k = 0;
                for &i in rows {
                    while k < mr.len() && mr[k] < i {
                        k += 1;
                    }
                    out.push(if k < mr.len() && mr[k] == i { mv[k] } else { 0.0 });
                }
            }
            Weights::Lazy(f) => out.extend(rows.iter().map(|&i| f(i, j))),
        }
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.n != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: self.n,
            });
        }
        Ok(())
    }

    /// `alpha * M`.
    pub fn scaled(&self, alpha: f64) -> Self {
        let weights = match &self.weights {
            Weights::Explicit(m) => {
                let columns = (0..m.ncols())
                    .map(|j| m.column(j).map(|(i, v)| (i, alpha * v)).collect())
                    .collect();
                Weights::Explicit(Arc::new(
                    CscMatrix::from_columns(m.nrows(), columns).prune_zeros(),
                ))
            }
            Weights::Lazy(f) => {
                let f = Arc::clone(f);
                Weights::Lazy(Arc::new(move |i, j| alpha * f(i, j)))
            }
        };
        Self {
            weights,
            kind: format!("{}*{alpha}", self.kind),
            ..self.clone()
        }
    }

    /// `alpha * a + beta * b`.
    pub fn linear_combination(alpha: f64, a: &Mask, beta: f64, b: &Mask) -> Result<Self> {
        a.check_dim(b.n)?;
        let kind = format!("{alpha}*{} + {beta}*{}", a.kind, b.kind);
        let time_average_only = a.time_average_only || b.time_average_only;
        let weights = match (&a.weights, &b.weights) {
            (Weights::Explicit(x), Weights::Explicit(y)) => {
                let mut triplets = Vec::with_capacity(x.nnz() + y.nnz());
                for j in 0..a.n {
                    triplets.extend(x.column(j).map(|(i, v)| (i, j, alpha * v)));
                    triplets.extend(y.column(j).map(|(i, v)| (i, j, beta * v)));
                }
                Weights::Explicit(Arc::new(CscMatrix::from_triplets(a.n, a.n, &triplets)))
            }
            _ => {
                let (a, b) = (a.clone(), b.clone());
                Weights::Lazy(Arc::new(move |i, j| {
                    alpha * a.weight(i, j) + beta * b.weight(i, j)
                }))
            }
        };
        let mut notes = a.notes.clone();
        notes.extend(b.notes.iter().cloned());
        Ok(Self {
            n: a.n,
            weights,
            kind,
            time_average_only,
            notes,
        })
    }

    /// Entries that can matter for `chain`: the mask at every structural
    /// nonzero of `T`, plus any explicit entries off that pattern.
    pub fn materialize(&self, chain: &StochasticChain) -> Result<CscMatrix> {
        self.check_dim(chain.n())?;
        let mut triplets = Vec::new();
        for j in 0..self.n {
            for (i, _) in chain.column(j) {
                let w = self.weight(i, j);
                if w != 0.0 {
                    triplets.push((i, j, w));
                }
            }
            if let Weights::Explicit(m) = &self.weights {
                for (i, v) in m.column(j) {
                    if chain.get(i, j) == 0.0 {
                        triplets.push((i, j, v));
                    }
                }
            }
        }
        Ok(CscMatrix::from_triplets(self.n, self.n, &triplets))
    }

    /// `||M||_F` over the entries returned by [`materialize`](Self::materialize).
    pub fn frobenius_norm(&self, chain: &StochasticChain) -> Result<f64> {
        let mut sum = 0.0;
        self.check_dim(chain.n())?;
        for j in 0..self.n {
            for (i, _) in chain.column(j) {
                let w = self.weight(i, j);
                sum += w * w;
            }
            if let Weights::Explicit(m) = &self.weights {
                for (i, v) in m.column(j) {
                    if chain.get(i, j) == 0.0 {
                        sum += v * v;
                    }
                }
            }
        }
        Ok(sum.sqrt())
    }
}
