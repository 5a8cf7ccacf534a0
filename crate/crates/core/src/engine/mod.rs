//! Cumulative and time-average expectations of masks.
//!
//! A cumulative expectation is `sum_j nu_j sum_i M[i][j] T[i][j]` where `nu`
//! holds the expected number of visits to each transient state, obtained from
//! one solve with `I - A_T`. The factorization is computed once per chain and
//! shared by every distribution and mask evaluated against it.

mod cesaro;
mod series;

pub use cesaro::{cesaro_projector, cesaro_projector_with, time_average_expect, CesaroProjector};
pub use series::{series_terms_for_tail, truncated_series_oracle};

use std::sync::Arc;

use serde::Serialize;

use crate::chain::{
    canonical_blocks, CanonicalBlocks, ChainId, DistributionVector, StateClassification,
    StochasticChain,
};
use crate::linalg::{norm2, CscMatrix, DenseMatrix, Factorization, SolverKind};
use crate::masks::Mask;
use crate::{Error, Result};

/// Pivots below this mark the transient system as singular.
pub const PIVOT_FLOOR: f64 = 1e-14;
/// Largest accepted normwise relative residual of a transient solve.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SetupOptions {
    pub solver: SolverKind,
}

/// The factored transient system of one chain. Independent of `mu`.
#[derive(Debug)]
pub struct TransientSystem {
    chain: StochasticChain,
    classification: StateClassification,
    blocks: CanonicalBlocks,
    factor: Option<Factorization>,
    frob_system: f64,
}

impl TransientSystem {
    /// Extracts the canonical blocks and factors `I - A_T`.
    pub fn new(
        chain: &StochasticChain,
        classification: &StateClassification,
        opts: SetupOptions,
    ) -> Result<Self> {
        let blocks = canonical_blocks(chain, classification)?;
        let (factor, frob_system) = if blocks.t() == 0 {
            (None, 0.0)
        } else {
            let system = blocks.identity_minus_transient();
            let frob = system.frobenius_norm();
            let factor = Factorization::new(system, opts.solver);
            if let Some((k, pivot)) = factor.smallest_pivot() {
                if !(pivot >= PIVOT_FLOOR) {
                    return Err(Error::SingularSystem {
                        index: classification.transient_states()[k],
                        pivot,
                    });
                }
            }
            (Some(factor), frob)
        };
        Ok(Self {
            chain: chain.clone(),
            classification: classification.clone(),
            blocks,
            factor,
            frob_system,
        })
    }

    pub fn chain(&self) -> &StochasticChain {
        &self.chain
    }

    pub fn classification(&self) -> &StateClassification {
        &self.classification
    }

    pub fn blocks(&self) -> &CanonicalBlocks {
        &self.blocks
    }

    pub fn t(&self) -> usize {
        self.blocks.t()
    }

    pub fn solver(&self) -> Option<SolverKind> {
        self.factor.as_ref().map(Factorization::kind)
    }

    /// Smallest pivot magnitude of the factorization.
    pub fn smallest_pivot(&self) -> Option<f64> {
        self.factor
            .as_ref()
            .and_then(|f| f.smallest_pivot())
            .map(|p| p.1)
    }

    /// Solves `(I - A_T) x = b` in transient coordinates.
    pub fn solve(&self, b: &mut [f64]) {
        if let Some(f) = &self.factor {
            f.solve(b);
        }
    }

    /// Solves `(I - A_T)^T x = b` in transient coordinates.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        if let Some(f) = &self.factor {
            f.solve_transpose(b);
        }
    }

    /// `(I - A_T) x` in transient coordinates.
    pub fn apply_system(&self, x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for (j, &xj) in x.iter().enumerate() {
            for (i, v) in self.blocks.transient.column(j) {
                y[i] -= v * xj;
            }
        }
        y
    }

    /// Normwise relative residual of `(I - A_T) x = b`.
    pub fn relative_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let ax = self.apply_system(x);
        let r: Vec<f64> = ax.iter().zip(b).map(|(a, b)| a - b).collect();
        let denom = self.frob_system * norm2(x) + norm2(b);
        if denom == 0.0 {
            0.0
        } else {
            norm2(&r) / denom
        }
    }

    /// The (1,2)-inverse `Q^-` of `I - T` in the chain's own state order:
    /// `(I - A_T)^{-1}` on the transient states, zero elsewhere.
    pub fn generalized_inverse(&self) -> DenseMatrix {
        let n = self.chain.n();
        let transient = self.classification.transient_states();
        let mut q = DenseMatrix::zeros(n, n);
        for (k, &j) in transient.iter().enumerate() {
            let mut e = vec![0.0; transient.len()];
            e[k] = 1.0;
            self.solve(&mut e);
            for (r, &i) in transient.iter().enumerate() {
                q[(i, j)] = e[r];
            }
        }
        q
    }

    fn transient_part(&self, mu: &[f64]) -> Vec<f64> {
        self.classification
            .transient_states()
            .iter()
            .map(|&j| mu[j])
            .collect()
    }
}

/// Everything needed to evaluate cumulative expectations for one chain and
/// one initial distribution.
#[derive(Debug, Clone)]
pub struct SetupCache {
    system: Arc<TransientSystem>,
    mu: Vec<f64>,
    nu: Vec<f64>,
    /// Columns of `T diag(nu)` for states with `nu_j != 0`.
    scaled: CscMatrix,
    residual: f64,
}

/// Factors the transient system with the default solver and solves for `nu`.
pub fn setup(
    chain: &StochasticChain,
    classification: &StateClassification,
    mu: &DistributionVector,
) -> Result<SetupCache> {
    setup_with(chain, classification, mu, SetupOptions::default())
}

pub fn setup_with(
    chain: &StochasticChain,
    classification: &StateClassification,
    mu: &DistributionVector,
    opts: SetupOptions,
) -> Result<SetupCache> {
    let system = Arc::new(TransientSystem::new(chain, classification, opts)?);
    SetupCache::from_system(system, mu.as_slice())
}

impl SetupCache {
    /// Solves for `nu` against an existing factorization. `mu` is used as
    /// given; callers validate it.
    pub fn from_system(system: Arc<TransientSystem>, mu: &[f64]) -> Result<Self> {
        let n = system.chain.n();
        if mu.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: mu.len(),
            });
        }
        let rhs = system.transient_part(mu);
        let mut nu_t = rhs.clone();
        system.solve(&mut nu_t);
        let residual = system.relative_residual(&nu_t, &rhs);
        if !(residual <= RESIDUAL_LIMIT) {
            return Err(Error::ResidualTooLarge { residual });
        }
        let mut nu = vec![0.0; n];
        for (k, &j) in system.classification.transient_states().iter().enumerate() {
            nu[j] = nu_t[k];
        }
        let scaled = CscMatrix::from_columns(
            n,
            (0..n)
                .map(|j| {
                    if nu[j] == 0.0 {
                        Vec::new()
                    } else {
                        system.chain.column(j).map(|(i, v)| (i, nu[j] * v)).collect()
                    }
                })
                .collect(),
        );
        Ok(Self {
            system,
            mu: mu.to_vec(),
            nu,
            scaled,
            residual,
        })
    }

    /// Same chain and factorization, new initial distribution.
    pub fn with_distribution(&self, mu: &DistributionVector) -> Result<Self> {
        Self::from_system(Arc::clone(&self.system), mu.as_slice())
    }

    pub fn system(&self) -> &Arc<TransientSystem> {
        &self.system
    }

    pub fn chain(&self) -> &StochasticChain {
        &self.system.chain
    }

    pub fn chain_id(&self) -> ChainId {
        self.system.chain.id()
    }

    pub fn classification(&self) -> &StateClassification {
        &self.system.classification
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Expected visits to each state before entering an ergodic class; zero
    /// on ergodic states.
    pub fn nu(&self) -> &[f64] {
        &self.nu
    }

    /// Diagonal of `D = diag(nu)`.
    pub fn d_diag(&self) -> &[f64] {
        &self.nu
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn t(&self) -> usize {
        self.system.t()
    }

    pub fn solver(&self) -> Option<SolverKind> {
        self.system.solver()
    }

    /// `||T D||_F`.
    pub fn scaled_frobenius_norm(&self) -> f64 {
        (0..self.scaled.ncols())
            .flat_map(|j| self.scaled.column_values(j).iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpectationMode {
    Cumulative,
    TimeAverage,
}

/// An expectation together with what produced it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpectationResult {
    pub value: f64,
    pub mask_kind: String,
    pub mode: ExpectationMode,
    #[serde(skip)]
    pub chain_id: ChainId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverKind>,
}

/// Rejects masks that weigh a move between two ergodic states.
pub fn check_zero_condition(
    chain: &StochasticChain,
    classification: &StateClassification,
    mask: &Mask,
) -> Result<()> {
    let mut rows = Vec::new();
    let mut w = Vec::new();
    for j in 0..chain.n() {
        if !classification.is_ergodic(j) {
            continue;
        }
        rows.clear();
        rows.extend(chain.column(j).map(|(i, _)| i));
        mask.column_weights(j, &rows, &mut w);
        for (&i, &wi) in rows.iter().zip(&w) {
            if wi != 0.0 && classification.is_ergodic(i) {
                return Err(Error::ZeroConditionViolated { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Cumulative expectation `E_mu Y_M` of a mask.
pub fn expect(setup: &SetupCache, mask: &Mask) -> Result<ExpectationResult> {
    let chain = setup.chain();
    mask.check_dim(chain.n())?;
    check_zero_condition(chain, setup.classification(), mask)?;
    let value = scaled_trace(&setup.scaled, mask);
    if !value.is_finite() {
        return Err(Error::Internal("expectation is not finite".into()));
    }
    Ok(ExpectationResult {
        value,
        mask_kind: mask.kind().to_string(),
        mode: ExpectationMode::Cumulative,
        chain_id: chain.id(),
        solver: setup.solver(),
    })
}

/// `sum_j sum_i M[i][j] R[i][j]` over the stored entries of `r`.
pub(crate) fn scaled_trace(r: &CscMatrix, mask: &Mask) -> f64 {
    let mut w = Vec::new();
    let mut total = 0.0;
    for j in 0..r.ncols() {
        let rows = r.column_rows(j);
        if rows.is_empty() {
            continue;
        }
        mask.column_weights(j, rows, &mut w);
        let col: f64 = w.iter().zip(r.column_values(j)).map(|(m, v)| m * v).sum();
        total += col;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::classify_states;
    use crate::masks::{
        mask_absorption_probability, mask_arrivals, mask_departures, mask_steady_state_loop,
        mask_steps_to_absorption,
    };

    fn chain(rows: &[&[f64]]) -> StochasticChain {
        StochasticChain::new(&DenseMatrix::from_rows(rows), None).unwrap()
    }

    fn c1() -> StochasticChain {
        chain(&[&[0.5, 0.0], &[0.5, 1.0]])
    }

    fn c5() -> StochasticChain {
        chain(&[&[0.5, 0.0, 0.0], &[0.25, 0.5, 0.0], &[0.25, 0.5, 1.0]])
    }

    fn prepare(c: &StochasticChain, mu: DistributionVector) -> SetupCache {
        setup(c, &classify_states(c), &mu).unwrap()
    }

    #[test]
    fn visits_for_hand_chains() {
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14);
        assert!(close(prepare(&c1(), DistributionVector::delta(2, 0)).nu(), &[2.0, 0.0]));
        assert!(close(prepare(&c5(), DistributionVector::delta(3, 0)).nu(), &[2.0, 1.0, 0.0]));
        let cyc = chain(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let s = prepare(&cyc, DistributionVector::uniform(2));
        assert_eq!(s.nu(), &[0.0, 0.0]);
        assert_eq!(s.t(), 0);
    }

    #[test]
    fn hand_expectations() {
        let c = c1();
        let s = prepare(&c, DistributionVector::delta(2, 0));
        let m = mask_steps_to_absorption(s.classification()).unwrap();
        assert!((expect(&s, &m).unwrap().value - 2.0).abs() < 1e-12);

        let c = c5();
        let s = prepare(&c, DistributionVector::delta(3, 0));
        let k = s.classification();
        let steps = expect(&s, &mask_steps_to_absorption(k).unwrap()).unwrap().value;
        assert!((steps - 3.0).abs() < 1e-12);
        let arr = expect(&s, &mask_arrivals(k, 1).unwrap()).unwrap().value;
        assert!((arr - 1.0).abs() < 1e-12);
        let dep = expect(&s, &mask_departures(k, 1).unwrap()).unwrap().value;
        assert!((dep - 1.0).abs() < 1e-12);

        let c2 = chain(&[&[0.0, 0.0, 0.0], &[0.3, 1.0, 0.0], &[0.7, 0.0, 1.0]]);
        let s = prepare(&c2, DistributionVector::delta(3, 0));
        let p0 = expect(&s, &mask_absorption_probability(s.classification(), 0).unwrap());
        let p1 = expect(&s, &mask_absorption_probability(s.classification(), 1).unwrap());
        assert!((p0.unwrap().value - 0.3).abs() < 1e-12);
        assert!((p1.unwrap().value - 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_condition_is_enforced() {
        let c = c5();
        let s = prepare(&c, DistributionVector::delta(3, 0));
        let m = mask_steady_state_loop(s.classification(), 2).unwrap();
        assert_eq!(
            expect(&s, &m).unwrap_err(),
            Error::ZeroConditionViolated { row: 2, col: 2 }
        );
    }

    #[test]
    fn both_solvers_agree() {
        let c = c5();
        let k = classify_states(&c);
        let mu = DistributionVector::uniform(3);
        let a = setup_with(&c, &k, &mu, SetupOptions { solver: SolverKind::Householder }).unwrap();
        let b = setup_with(&c, &k, &mu, SetupOptions { solver: SolverKind::PivotFreeLu }).unwrap();
        for (x, y) in a.nu().iter().zip(b.nu()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn singular_transient_system_is_refused() {
        // A transient class that leaks only 1e-16 per step.
        let eps = 1e-16;
        let c = StochasticChain::from_csc(
            CscMatrix::from_dense(&DenseMatrix::from_rows(&[
                &[0.0, 1.0 - eps, 0.0],
                &[1.0, 0.0, 0.0],
                &[0.0, eps, 1.0],
            ])),
            None,
            Default::default(),
        )
        .unwrap();
        let k = classify_states(&c);
        assert_eq!(k.transient_count(), 2);
        let err = setup(&c, &k, &DistributionVector::delta(3, 0)).unwrap_err();
        assert!(matches!(err, Error::SingularSystem { .. }));
        assert!(err.is_numerical());
    }

    #[test]
    fn generalized_inverse_identities() {
        let c = c5();
        let s = prepare(&c, DistributionVector::delta(3, 0));
        let q = s.system().generalized_inverse();
        let s_mat = DenseMatrix::identity(3).sub(&c.to_dense());
        let a = s_mat.matmul(&q).matmul(&s_mat);
        assert!(a.max_abs_diff(&s_mat) < 1e-14);
        let b = q.matmul(&s_mat).matmul(&q);
        assert!(b.max_abs_diff(&q) < 1e-14);
    }

    #[test]
    fn reuse_is_bit_exact() {
        let c = c5();
        let s = prepare(&c, DistributionVector::uniform(3));
        let fresh = prepare(&c, DistributionVector::uniform(3));
        let m = mask_steps_to_absorption(s.classification()).unwrap();
        let again = s.with_distribution(&DistributionVector::uniform(3)).unwrap();
        let v = expect(&s, &m).unwrap().value;
        assert_eq!(v.to_bits(), expect(&fresh, &m).unwrap().value.to_bits());
        assert_eq!(v.to_bits(), expect(&again, &m).unwrap().value.to_bits());
    }
}
