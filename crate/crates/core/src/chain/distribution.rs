use crate::{Error, Result};

/// A stochastic initial distribution `mu`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionVector {
    mu: Vec<f64>,
}

impl DistributionVector {
    /// Entries within `tol` below zero are clamped to zero; the total must be
    /// within `tol` of one. The vector is not rescaled.
    pub fn new(mut mu: Vec<f64>, tol: f64) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::InvalidDistribution("empty vector".into()));
        }
        for (i, v) in mu.iter_mut().enumerate() {
            if !v.is_finite() {
                return Err(Error::InvalidDistribution(format!("entry {i} is not finite")));
            }
            if *v < -tol {
                return Err(Error::InvalidDistribution(format!(
                    "entry {i} is negative ({v})"
                )));
            }
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        let total: f64 = mu.iter().sum();
        if (total - 1.0).abs() > tol {
            return Err(Error::InvalidDistribution(format!(
                "entries sum to {total}, not 1"
            )));
        }
        Ok(Self { mu })
    }

    /// Point mass on state `i`.
    pub fn delta(n: usize, i: usize) -> Self {
        assert!(i < n, "state {i} out of range for {n} states");
        let mut mu = vec![0.0; n];
        mu[i] = 1.0;
        Self { mu }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        Self {
            mu: vec![1.0 / n as f64; n],
        }
    }

    pub fn len(&self) -> usize {
        self.mu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.mu
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.mu
    }

    pub(crate) fn from_vec_unchecked(mu: Vec<f64>) -> Self {
        Self { mu }
    }
}

impl std::ops::Index<usize> for DistributionVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.mu[i]
    }
}
