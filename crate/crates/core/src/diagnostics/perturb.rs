use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{condition_bounds, float_or_tag, ConditionReport};
use crate::chain::{classify_states, DistributionVector, StateClassification, StochasticChain};
use crate::engine::{expect, setup_with, SetupCache, SetupOptions};
use crate::linalg::{norm2, CscMatrix};
use crate::masks::Mask;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationOptions {
    pub samples: usize,
    pub seed: u64,
    pub solver: crate::linalg::SolverKind,
}

impl Default for PerturbationOptions {
    fn default() -> Self {
        Self {
            samples: 20,
            seed: 0x5eed,
            solver: Default::default(),
        }
    }
}

/// Largest observed relative change in `psi` per relative change in each
/// input, next to the corresponding condition bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub delta: f64,
    pub samples: usize,
    pub ratio_m: f64,
    pub ratio_t: f64,
    pub ratio_mu: f64,
    /// Ratio for the perturbation `delta * M / ||M||_F`; one by linearity.
    pub ratio_m_aligned: f64,
    pub condition: ConditionReport,
    #[serde(serialize_with = "float_or_tag")]
    pub slack: f64,
}

impl PerturbationReport {
    /// True when every observed ratio is within `slack` of its bound.
    pub fn within_bounds(&self) -> bool {
        let c = &self.condition;
        self.ratio_m <= c.kappa_m_bound * self.slack
            && self.ratio_t <= c.kappa_t_bound * self.slack
            && self.ratio_mu <= c.kappa_mu_bound * self.slack
            && self.ratio_m_aligned <= c.kappa_m_bound * self.slack
    }
}

fn random_unit(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = norm2(&v);
        if norm > 1e-3 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Samples random perturbations of size `delta` (Frobenius or 2-norm) of
/// `M`, `T` and `mu`, recomputes `psi` and reports the worst amplification.
///
/// `M` moves freely on the moves out of transient states. `T` moves only on
/// entries away from 0 and 1 and keeps every column sum. `mu` moves freely.
pub fn empirical_perturbation_check(
    chain: &StochasticChain,
    classification: &StateClassification,
    mask: &Mask,
    mu: &DistributionVector,
    delta: f64,
    opts: PerturbationOptions,
) -> Result<PerturbationReport> {
    let base = setup_with(chain, classification, mu, SetupOptions { solver: opts.solver })?;
    let psi_result = expect(&base, mask)?;
    let psi = psi_result.value;
    let condition = condition_bounds(&base, mask, &psi_result)?;
    let slack = 1.1;
    let mut report = PerturbationReport {
        delta,
        samples: opts.samples,
        ratio_m: 0.0,
        ratio_t: 0.0,
        ratio_mu: 0.0,
        ratio_m_aligned: 0.0,
        condition,
        slack,
    };
    if delta == 0.0 {
        return Ok(report);
    }
    if psi == 0.0 {
        return Err(Error::Internal("perturbation ratios need a nonzero expectation".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ratio = |psi_new: f64, rel_input: f64| ((psi_new - psi) / psi).abs() / rel_input;

    let frob_m = mask.frobenius_norm(chain)?;
    let support: Vec<(usize, usize)> = (0..chain.n())
        .filter(|&j| classification.is_transient(j))
        .flat_map(|j| chain.column(j).map(move |(i, _)| (i, j)))
        .collect();
    if frob_m > 0.0 && !support.is_empty() {
        for _ in 0..opts.samples {
            let dir = random_unit(&mut rng, support.len());
            let triplets: Vec<_> = support
                .iter()
                .zip(&dir)
                .map(|(&(i, j), d)| (i, j, delta * d))
                .collect();
            let e = Mask::explicit(CscMatrix::from_triplets(chain.n(), chain.n(), &triplets))?;
            let moved = Mask::linear_combination(1.0, mask, 1.0, &e)?;
            let r = ratio(expect(&base, &moved)?.value, delta / frob_m);
            report.ratio_m = report.ratio_m.max(r);
        }
        let aligned = mask.scaled(1.0 + delta / frob_m);
        report.ratio_m_aligned = ratio(expect(&base, &aligned)?.value, delta / frob_m);
    }

    let mu_norm = norm2(mu.as_slice());
    for _ in 0..opts.samples {
        let dir = random_unit(&mut rng, mu.len());
        let moved: Vec<f64> = mu.as_slice().iter().zip(&dir).map(|(m, d)| m + delta * d).collect();
        let s = SetupCache::from_system(Arc::clone(base.system()), &moved)?;
        let r = ratio(expect(&s, mask)?.value, delta / mu_norm);
        report.ratio_mu = report.ratio_mu.max(r);
    }

    let t_csc = chain.to_csc();
    let frob_t = chain.frobenius_norm();
    let free: Vec<Vec<usize>> = (0..chain.n())
        .map(|j| {
            let rows = t_csc.column_rows(j);
            let vals = t_csc.column_values(j);
            (0..rows.len())
                .filter(|&k| vals[k] > 2.0 * delta && vals[k] < 1.0 - 2.0 * delta)
                .collect()
        })
        .collect();
    let dims: usize = free.iter().filter(|f| f.len() >= 2).map(Vec::len).sum();
    if dims > 0 {
        for _ in 0..opts.samples {
            let mut perturbed = t_csc.clone();
            let mut dirs: Vec<(usize, Vec<f64>)> = Vec::new();
            let mut total = 0.0;
            for (j, f) in free.iter().enumerate() {
                if f.len() < 2 {
                    continue;
                }
                let mut d: Vec<f64> = (0..f.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let mean = d.iter().sum::<f64>() / d.len() as f64;
                for x in d.iter_mut() {
                    *x -= mean;
                }
                total += d.iter().map(|x| x * x).sum::<f64>();
                dirs.push((j, d));
            }
            if total == 0.0 {
                continue;
            }
            let scale = delta / total.sqrt();
            for (j, d) in dirs {
                let vals = perturbed.column_values_mut(j);
                for (&k, x) in free[j].iter().zip(d) {
                    vals[k] += scale * x;
                }
            }
            let moved = chain.with_matrix(perturbed)?;
            let moved_cls = classify_states(&moved);
            let s = setup_with(&moved, &moved_cls, mu, SetupOptions { solver: opts.solver })?;
            let r = ratio(expect(&s, mask)?.value, delta / frob_t);
            report.ratio_t = report.ratio_t.max(r);
        }
    }
    Ok(report)
}
