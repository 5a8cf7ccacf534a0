use crate::chain::{canonical_blocks, DistributionVector, StateClassification, StochasticChain};
use crate::linalg::DenseMatrix;
use crate::masks::Mask;
use crate::{Error, Result};

/// Partial sum `sum_{k=0}^{K} sum_i [(M ⊙ T) T^k mu]_i`, computed by stepping
/// the distribution forward. Independent of any factorization.
pub fn truncated_series_oracle(
    chain: &StochasticChain,
    mu: &DistributionVector,
    mask: &Mask,
    k_max: usize,
) -> Result<f64> {
    mask.check_dim(chain.n())?;
    if mu.len() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            found: mu.len(),
        });
    }
    let n = chain.n();
    let column_weight: Vec<f64> = (0..n)
        .map(|j| chain.column(j).map(|(i, v)| mask.weight(i, j) * v).sum())
        .collect();
    let mut x = mu.as_slice().to_vec();
    let mut total = 0.0;
    for k in 0..=k_max {
        total += x.iter().zip(&column_weight).map(|(a, b)| a * b).sum::<f64>();
        if k < k_max {
            x = chain.apply(&x);
        }
    }
    Ok(total)
}

/// Number of terms after which the tail of the series is below `tol` for
/// every initial distribution, from a bound on `||A_T^s||_1 < 1`. Meant for
/// small chains; `A_T` is formed densely.
pub fn series_terms_for_tail(
    chain: &StochasticChain,
    classification: &StateClassification,
    mask: &Mask,
    tol: f64,
) -> Result<usize> {
    let blocks = canonical_blocks(chain, classification)?;
    let t = blocks.t();
    if t == 0 {
        return Ok(0);
    }
    let a = blocks.transient.to_dense();
    let weight = classification
        .transient_states()
        .iter()
        .map(|&j| chain.column(j).map(|(i, v)| (mask.weight(i, j) * v).abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if weight == 0.0 {
        return Ok(0);
    }
    // Smallest s with ||A^s||_1 < 1; it exists because every transient class leaks.
    let mut power = a.clone();
    let mut s = 1;
    let mut q = norm1(&power);
    while q >= 1.0 - 1e-12 {
        if s > 4 * t {
            return Err(Error::Internal("transient block does not contract".into()));
        }
        power = power.matmul(&a);
        s += 1;
        q = norm1(&power);
    }
    // tail after K terms <= weight * sum_{k>K} ||A^k||_1
    //                    <= weight * s * q^{floor((K+1)/s)} / (1 - q)
    let bound = |blocks_done: usize| weight * s as f64 * q.powi(blocks_done as i32) / (1.0 - q);
    let mut m = 0usize;
    while bound(m) > tol {
        m += 1;
        if m > 10_000_000 {
            return Err(Error::Internal("series tail bound does not converge".into()));
        }
    }
    Ok((m * s).saturating_sub(1))
}

fn norm1(a: &DenseMatrix) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::classify_states;
    use crate::masks::{mask_absorption_probability, mask_steps_to_absorption};

    fn chain(rows: &[&[f64]]) -> StochasticChain {
        StochasticChain::new(&DenseMatrix::from_rows(rows), None).unwrap()
    }

    #[test]
    fn geometric_series_converges() {
        let c = chain(&[&[0.5, 0.0], &[0.5, 1.0]]);
        let k = classify_states(&c);
        let m = mask_steps_to_absorption(&k).unwrap();
        let v = truncated_series_oracle(&c, &DistributionVector::delta(2, 0), &m, 60).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let terms = series_terms_for_tail(&c, &k, &m, 1e-12).unwrap();
        let v = truncated_series_oracle(&c, &DistributionVector::delta(2, 0), &m, terms).unwrap();
        assert!((v - 2.0).abs() <= 1e-12);
    }

    #[test]
    fn single_step_absorption_is_exact() {
        let c = chain(&[&[0.0, 0.0, 0.0], &[0.3, 1.0, 0.0], &[0.7, 0.0, 1.0]]);
        let k = classify_states(&c);
        let m = mask_absorption_probability(&k, 0).unwrap();
        let v = truncated_series_oracle(&c, &DistributionVector::delta(3, 0), &m, 0).unwrap();
        assert_eq!(v, 0.3);
        let zero = Mask::zero(3);
        assert_eq!(
            truncated_series_oracle(&c, &DistributionVector::uniform(3), &zero, 25).unwrap(),
            0.0
        );
    }
}
