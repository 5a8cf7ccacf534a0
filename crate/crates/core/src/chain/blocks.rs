use super::{StateClassification, StochasticChain};
use crate::linalg::{CscMatrix, DenseMatrix};
use crate::{Error, Result};

/// The chain in canonical coordinates, split as `[A_T 0; B_T E_T]`.
#[derive(Debug, Clone)]
pub struct CanonicalBlocks {
    /// Transient to transient, `t x t`.
    pub transient: CscMatrix,
    /// Transient to ergodic, `(n - t) x t`.
    pub exits: CscMatrix,
    /// Ergodic to ergodic, block diagonal over the ergodic classes.
    pub ergodic: CscMatrix,
}

impl CanonicalBlocks {
    pub fn t(&self) -> usize {
        self.transient.ncols()
    }

    pub fn n(&self) -> usize {
        self.transient.ncols() + self.ergodic.ncols()
    }

    /// `I - A_T` as a dense matrix.
    pub fn identity_minus_transient(&self) -> DenseMatrix {
        let t = self.t();
        let mut m = DenseMatrix::identity(t);
        for j in 0..t {
            for (i, v) in self.transient.column(j) {
                m[(i, j)] -= v;
            }
        }
        m
    }

    /// Puts the three blocks back together in canonical coordinates.
    pub fn reassemble(&self) -> CscMatrix {
        let t = self.t();
        let n = self.n();
        let mut columns = Vec::with_capacity(n);
        for j in 0..t {
            let mut col: Vec<(usize, f64)> = self.transient.column(j).collect();
            col.extend(self.exits.column(j).map(|(i, v)| (i + t, v)));
            columns.push(col);
        }
        for j in 0..n - t {
            columns.push(self.ergodic.column(j).map(|(i, v)| (i + t, v)).collect());
        }
        CscMatrix::from_columns(n, columns)
    }
}

/// `T` with rows and columns permuted into canonical order.
pub fn permuted_matrix(chain: &StochasticChain, classification: &StateClassification) -> CscMatrix {
    let pos = classification.position();
    let columns = classification
        .canonical_order()
        .iter()
        .map(|&j| {
            let mut col: Vec<(usize, f64)> = chain.column(j).map(|(i, v)| (pos[i], v)).collect();
            col.sort_by_key(|&(i, _)| i);
            col
        })
        .collect();
    CscMatrix::from_columns(chain.n(), columns)
}

/// Extracts `A_T`, `B_T` and `E_T` and checks the structure the rest of the
/// library relies on: nothing flows from ergodic to transient states, ergodic
/// classes do not talk to each other, transient classes are listed in
/// topological order, and each transient class leaks (which gives
/// `rho(A_T) < 1`).
pub fn canonical_blocks(
    chain: &StochasticChain,
    classification: &StateClassification,
) -> Result<CanonicalBlocks> {
    if classification.chain_id() != chain.id() {
        return Err(Error::ChainMismatch);
    }
    let t = classification.transient_count();
    let n = chain.n();
    let pos = classification.position();
    let canonical = permuted_matrix(chain, classification);

    for class in classification.transient_classes() {
        if class.leak <= 0.0 {
            return Err(Error::Internal(format!(
                "transient class starting at state {} has no outgoing mass",
                class.states[0]
            )));
        }
    }

    let mut a_cols = Vec::with_capacity(t);
    let mut b_cols = Vec::with_capacity(t);
    for j in 0..t {
        let own_class = classification.class_of(classification.canonical_order()[j]);
        let mut a = Vec::new();
        let mut b = Vec::new();
        for (i, v) in canonical.column(j) {
            if i < t {
                let dest_class = classification.class_of(classification.canonical_order()[i]);
                if dest_class < own_class {
                    return Err(Error::Internal(format!(
                        "transition from canonical {j} to {i} runs against class order"
                    )));
                }
                a.push((i, v));
            } else {
                b.push((i - t, v));
            }
        }
        a_cols.push(a);
        b_cols.push(b);
    }
    let mut e_cols = Vec::with_capacity(n - t);
    for j in t..n {
        let own_class = classification.class_of(classification.canonical_order()[j]);
        let mut e = Vec::new();
        for (i, v) in canonical.column(j) {
            let dest = classification.canonical_order()[i];
            if i < t || classification.class_of(dest) != own_class {
                return Err(Error::Internal(format!(
                    "ergodic state {} leaks to state {dest}",
                    classification.canonical_order()[j]
                )));
            }
            e.push((i - t, v));
        }
        e_cols.push(e);
    }
    debug_assert_eq!(pos.len(), n);
    Ok(CanonicalBlocks {
        transient: CscMatrix::from_columns(t, a_cols),
        exits: CscMatrix::from_columns(n - t, b_cols),
        ergodic: CscMatrix::from_columns(n - t, e_cols),
    })
}
