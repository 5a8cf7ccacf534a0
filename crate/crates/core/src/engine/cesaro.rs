use std::sync::Arc;

use super::{ExpectationMode, ExpectationResult, SetupOptions, TransientSystem};
use crate::chain::{ChainId, DistributionVector, StateClassification, StochasticChain};
use crate::linalg::{CscMatrix, DenseMatrix, HouseholderQr};
use crate::masks::Mask;
use crate::{Error, Result};

const STATIONARY_RESIDUAL: f64 = 1e-12;

/// The Cesàro limit `G = lim (1/N) sum_{k<N} T^k`, stored by class: one
/// stationary vector per ergodic class and the probability of ending up in
/// each class from each transient state.
#[derive(Debug, Clone)]
pub struct CesaroProjector {
    chain_id: ChainId,
    n: usize,
    /// `(state, pi)` for each ergodic class.
    stationary: Vec<Vec<(usize, f64)>>,
    /// `absorption[m][k]`: probability that transient state
    /// `transient[k]` eventually enters ergodic class `m`.
    absorption: Vec<Vec<f64>>,
    transient: Vec<usize>,
    ergodic_class: Vec<Option<usize>>,
}

impl CesaroProjector {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn chain_id(&self) -> ChainId {
        self.chain_id
    }

    /// Stationary distribution of ergodic class `m` as `(state, pi)` pairs.
    pub fn stationary(&self, m: usize) -> &[(usize, f64)] {
        &self.stationary[m]
    }

    /// Probability of eventually entering ergodic class `m` from `state`.
    pub fn absorption_probability(&self, m: usize, state: usize) -> f64 {
        match self.ergodic_class[state] {
            Some(c) => f64::from(u8::from(c == m)),
            None => {
                let k = self.transient.iter().position(|&s| s == state).expect("transient");
                self.absorption[m][k]
            }
        }
    }

    /// `G mu`.
    pub fn apply(&self, mu: &[f64]) -> Vec<f64> {
        assert_eq!(mu.len(), self.n);
        let mut mass = vec![0.0; self.stationary.len()];
        for (j, &x) in mu.iter().enumerate() {
            if let Some(m) = self.ergodic_class[j] {
                mass[m] += x;
            }
        }
        for (m, probs) in self.absorption.iter().enumerate() {
            for (k, &j) in self.transient.iter().enumerate() {
                mass[m] += probs[k] * mu[j];
            }
        }
        let mut out = vec![0.0; self.n];
        for (m, pi) in self.stationary.iter().enumerate() {
            for &(s, p) in pi {
                out[s] += mass[m] * p;
            }
        }
        out
    }

    /// Column `j` of `G`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; self.n];
        e[j] = 1.0;
        self.apply(&e)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut g = DenseMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            g.column_mut(j).copy_from_slice(&self.column(j));
        }
        g
    }
}

/// Builds `G` with a fresh factorization of the transient system.
pub fn cesaro_projector(
    chain: &StochasticChain,
    classification: &StateClassification,
) -> Result<CesaroProjector> {
    let system = TransientSystem::new(chain, classification, SetupOptions::default())?;
    cesaro_projector_with(&Arc::new(system))
}

/// Builds `G` reusing an existing factorization.
pub fn cesaro_projector_with(system: &Arc<TransientSystem>) -> Result<CesaroProjector> {
    let chain = system.chain();
    let cls = system.classification();
    let n = chain.n();
    let t = cls.transient_count();
    let transient = cls.transient_states().to_vec();
    let mut ergodic_class = vec![None; n];
    let mut stationary = Vec::new();
    for (m, class) in cls.ergodic_classes().iter().enumerate() {
        for &s in &class.states {
            ergodic_class[s] = Some(m);
        }
        let pi = stationary_vector(chain, &class.states)
            .map_err(|residual| Error::StationaryFailure { class: m, residual })?;
        stationary.push(class.states.iter().copied().zip(pi).collect());
    }

    // Row m of B_T summed over the class, then one transposed solve each.
    let mut absorption = Vec::with_capacity(stationary.len());
    for m in 0..stationary.len() {
        let mut y: Vec<f64> = transient
            .iter()
            .map(|&j| {
                chain
                    .column(j)
                    .filter(|&(i, _)| ergodic_class[i] == Some(m))
                    .map(|(_, v)| v)
                    .sum()
            })
            .collect();
        if t > 0 {
            system.solve_transpose(&mut y);
        }
        absorption.push(y);
    }
    Ok(CesaroProjector {
        chain_id: chain.id(),
        n,
        stationary,
        absorption,
        transient,
        ergodic_class,
    })
}

/// Solves `(T_mm - I) pi = 0, sum(pi) = 1` on a closed class with the last
/// balance equation replaced by the normalization, then refines.
fn stationary_vector(
    chain: &StochasticChain,
    states: &[usize],
) -> std::result::Result<Vec<f64>, f64> {
    let k = states.len();
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let mut local = vec![usize::MAX; chain.n()];
    for (a, &s) in states.iter().enumerate() {
        local[s] = a;
    }
    let mut triplets = Vec::new();
    for (b, &s) in states.iter().enumerate() {
        for (i, v) in chain.column(s) {
            if local[i] != usize::MAX {
                triplets.push((local[i], b, v));
            }
        }
    }
    let tm = CscMatrix::from_triplets(k, k, &triplets);

    let mut a = tm.to_dense();
    for d in 0..k {
        a[(d, d)] -= 1.0;
    }
    for b in 0..k {
        a[(k - 1, b)] = 1.0;
    }
    let qr = HouseholderQr::factor(a.clone());
    let mut rhs = vec![0.0; k];
    rhs[k - 1] = 1.0;
    let mut pi = rhs.clone();
    qr.solve(&mut pi);

    let balance = |pi: &[f64]| -> (Vec<f64>, f64) {
        let mut r = tm.matvec(pi);
        for (ri, p) in r.iter_mut().zip(pi) {
            *ri -= p;
        }
        let worst = r.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        (r, worst)
    };
    for _ in 0..3 {
        let (_, worst) = balance(&pi);
        let total: f64 = pi.iter().sum();
        if worst <= STATIONARY_RESIDUAL && (total - 1.0).abs() <= STATIONARY_RESIDUAL {
            break;
        }
        let ax = a.matvec(&pi);
        let mut d: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        qr.solve(&mut d);
        for (p, di) in pi.iter_mut().zip(&d) {
            *p += di;
        }
    }
    for p in pi.iter_mut() {
        if *p < 0.0 && *p > -STATIONARY_RESIDUAL {
            *p = 0.0;
        }
    }
    let (_, worst) = balance(&pi);
    let total: f64 = pi.iter().sum();
    let worst = worst.max((total - 1.0).abs());
    if !(worst <= STATIONARY_RESIDUAL) || pi.iter().any(|&p| p < 0.0) {
        return Err(worst);
    }
    Ok(pi)
}

/// Time-average expectation `sum_j (G mu)_j sum_i M[i][j] T[i][j]`.
pub fn time_average_expect(
    chain: &StochasticChain,
    projector: &CesaroProjector,
    mu: &DistributionVector,
    mask: &Mask,
) -> Result<ExpectationResult> {
    if projector.chain_id != chain.id() {
        return Err(Error::ChainMismatch);
    }
    mask.check_dim(chain.n())?;
    if mu.len() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            found: mu.len(),
        });
    }
    let g_mu = projector.apply(mu.as_slice());
    let scaled = CscMatrix::from_columns(
        chain.n(),
        (0..chain.n())
            .map(|j| {
                if g_mu[j] == 0.0 {
                    Vec::new()
                } else {
                    chain.column(j).map(|(i, v)| (i, g_mu[j] * v)).collect()
                }
            })
            .collect(),
    );
    Ok(ExpectationResult {
        value: super::scaled_trace(&scaled, mask),
        mask_kind: mask.kind().to_string(),
        mode: ExpectationMode::TimeAverage,
        chain_id: chain.id(),
        solver: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::classify_states;
    use crate::masks::{mask_steady_state_loop, mask_transition_set};

    fn chain(rows: &[&[f64]]) -> StochasticChain {
        StochasticChain::new(&DenseMatrix::from_rows(rows), None).unwrap()
    }

    fn projector(c: &StochasticChain) -> CesaroProjector {
        cesaro_projector(c, &classify_states(c)).unwrap()
    }

    #[test]
    fn hand_projectors() {
        let cyc = chain(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let g = projector(&cyc).to_dense();
        assert!(g.max_abs_diff(&DenseMatrix::from_rows(&[&[0.5, 0.5], &[0.5, 0.5]])) < 1e-15);

        let c1 = chain(&[&[0.5, 0.0], &[0.5, 1.0]]);
        assert_eq!(
            projector(&c1).to_dense(),
            DenseMatrix::from_rows(&[&[0.0, 0.0], &[1.0, 1.0]])
        );

        let c2 = chain(&[&[0.0, 0.0, 0.0], &[0.3, 1.0, 0.0], &[0.7, 0.0, 1.0]]);
        let g = projector(&c2).to_dense();
        let want = DenseMatrix::from_rows(&[&[0.0, 0.0, 0.0], &[0.3, 1.0, 0.0], &[0.7, 0.0, 1.0]]);
        assert!(g.max_abs_diff(&want) < 1e-15);
    }

    #[test]
    fn time_average_hand_values() {
        let cyc = chain(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let p = projector(&cyc);
        let m = mask_transition_set(2, |i, j| i == 1 && j == 0, |_, _| 1.0);
        let v = time_average_expect(&cyc, &p, &DistributionVector::delta(2, 0), &m).unwrap();
        assert!((v.value - 0.5).abs() < 1e-15);
        let ones = mask_transition_set(2, |_, _| true, |_, _| 1.0);
        let v = time_average_expect(&cyc, &p, &DistributionVector::delta(2, 1), &ones).unwrap();
        assert!((v.value - 1.0).abs() < 1e-15);

        let c2 = chain(&[&[0.0, 0.0, 0.0], &[0.3, 1.0, 0.0], &[0.7, 0.0, 1.0]]);
        let k = classify_states(&c2);
        let p = cesaro_projector(&c2, &k).unwrap();
        let mu = DistributionVector::delta(3, 0);
        let a1 = time_average_expect(&c2, &p, &mu, &mask_steady_state_loop(&k, 1).unwrap());
        let a2 = time_average_expect(&c2, &p, &mu, &mask_steady_state_loop(&k, 2).unwrap());
        assert!((a1.unwrap().value - 0.3).abs() < 1e-15);
        assert!((a2.unwrap().value - 0.7).abs() < 1e-15);
    }

    #[test]
    fn periodic_class_with_transient_feed() {
        // t -> 3-cycle {a, b, c} or absorbing d.
        let c = chain(&[
            &[0.2, 0.0, 0.0, 0.0, 0.0],
            &[0.3, 0.0, 0.0, 1.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0, 0.0],
            &[0.5, 0.0, 0.0, 0.0, 1.0],
        ]);
        let g = projector(&c).to_dense();
        let t = c.to_dense();
        let gg = g.matmul(&g);
        assert!(gg.max_abs_diff(&g) < 1e-12);
        assert!(t.matmul(&g).max_abs_diff(&g) < 1e-12);
        for s in 1..4 {
            assert!((g[(s, 0)] - 0.125).abs() < 1e-12);
        }
        assert!((g[(4, 0)] - 0.625).abs() < 1e-12);
    }

    #[test]
    fn foreign_projector_is_rejected() {
        let a = chain(&[&[1.0]]);
        let b = chain(&[&[1.0]]);
        let p = projector(&b);
        let m = mask_transition_set(1, |_, _| true, |_, _| 1.0);
        assert_eq!(
            time_average_expect(&a, &p, &DistributionVector::delta(1, 0), &m).unwrap_err(),
            Error::ChainMismatch
        );
    }
}
