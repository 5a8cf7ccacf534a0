use super::{ChainOptions, DistributionVector, StochasticChain};
use crate::{Error, Result};

/// Guard on composite size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KronOptions {
    pub max_states: usize,
    pub dense_threshold: usize,
}

impl Default for KronOptions {
    fn default() -> Self {
        Self {
            max_states: 1_000_000,
            dense_threshold: super::DEFAULT_DENSE_THRESHOLD,
        }
    }
}

/// Chain of two independent chains stepping together. Composite state
/// `(i1, i2)` has index `i1 * n2 + i2` and label `(a,b)`.
pub fn kron_compose(first: &StochasticChain, second: &StochasticChain) -> Result<StochasticChain> {
    kron_compose_with(first, second, KronOptions::default())
}

pub fn kron_compose_with(
    first: &StochasticChain,
    second: &StochasticChain,
    opts: KronOptions,
) -> Result<StochasticChain> {
    let n = first
        .n()
        .checked_mul(second.n())
        .filter(|&n| n <= opts.max_states)
        .ok_or(Error::TooManyStates {
            requested: first.n().saturating_mul(second.n()),
            limit: opts.max_states,
        })?;
    let matrix = first.to_csc().kron(&second.to_csc());
    debug_assert_eq!(matrix.ncols(), n);
    let mut labels = Vec::with_capacity(n);
    for a in first.labels() {
        for b in second.labels() {
            labels.push(format!("({a},{b})"));
        }
    }
    // Products of validated columns sum to one up to rounding, so no rescale.
    let chain_opts = ChainOptions {
        tol_stochastic: 2.0 * first.tol().max(second.tol()),
        dense_threshold: opts.dense_threshold,
    };
    StochasticChain::from_csc_inner(matrix, Some(labels), chain_opts, false)
}

/// `mu1 ⊗ mu2` in the composite index order of [`kron_compose`].
pub fn kron_distribution(
    first: &DistributionVector,
    second: &DistributionVector,
) -> DistributionVector {
    let mut mu = Vec::with_capacity(first.len() * second.len());
    for &a in first.as_slice() {
        for &b in second.as_slice() {
            mu.push(a * b);
        }
    }
    DistributionVector::from_vec_unchecked(mu)
}
