//! Simulation of chain realizations, used as an independent check on the
//! closed-form expectations.
//!
//! Path `p` draws from its own ChaCha8 stream `(seed, p)`, and paths are
//! grouped into fixed chunks whose statistics are merged in a fixed tree, so
//! estimates are bit-identical for any number of worker threads.

mod stats;

pub use stats::RunningStats;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::{DistributionVector, StateClassification, StochasticChain};
use crate::engine::check_zero_condition;
use crate::masks::Mask;
use crate::{Error, Result};

/// Environment variable capping the number of simulation threads.
pub const THREADS_ENV: &str = "MARKOV_MASK_THREADS";
/// Paths per independently simulated chunk.
pub const CHUNK: u64 = 1024;
/// Largest tolerated fraction of truncated paths in cumulative mode.
pub const MAX_TRUNCATED_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationOptions {
    pub n_paths: u64,
    pub seed: u64,
    /// Step cap per path in cumulative mode; defaults to `100 n`.
    pub max_steps: Option<usize>,
    /// Worker threads; defaults to `MARKOV_MASK_THREADS`, then to rayon's choice.
    pub threads: Option<usize>,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self {
            n_paths: 100_000,
            seed: 0,
            max_steps: None,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: u64,
    pub seed: u64,
    pub truncations: u64,
}

impl SimulationEstimate {
    /// `(value - mean) / stderr`. A sample with no spread only admits
    /// rounding-level differences, which count as zero.
    pub fn z_score(&self, value: f64) -> f64 {
        let diff = value - self.mean;
        if self.stderr == 0.0 && diff.abs() <= 64.0 * f64::EPSILON * value.abs().max(1.0) {
            0.0
        } else {
            diff / self.stderr
        }
    }
}

/// Per-column inverse-CDF tables over structural nonzeros, with the weights
/// of every mask for each move stored alongside.
struct Sampler {
    offsets: Vec<usize>,
    rows: Vec<usize>,
    cdf: Vec<f64>,
    /// `weights[k * masks + m]` is mask `m` on structural nonzero `k`.
    weights: Vec<f64>,
    masks: usize,
    start: Vec<f64>,
}

impl Sampler {
    fn new(chain: &StochasticChain, mu: &DistributionVector, masks: &[&Mask]) -> Self {
        let n = chain.n();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut rows = Vec::new();
        let mut cdf = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for j in 0..n {
            let mut acc = 0.0;
            for (i, v) in chain.column(j) {
                acc += v;
                rows.push(i);
                cdf.push(acc);
                weights.extend(masks.iter().map(|m| m.weight(i, j)));
            }
            offsets.push(rows.len());
        }
        let mut acc = 0.0;
        let start = mu
            .as_slice()
            .iter()
            .map(|&p| {
                acc += p;
                acc
            })
            .collect();
        Self {
            offsets,
            rows,
            cdf,
            weights,
            masks: masks.len(),
            start,
        }
    }

    fn pick(cdf: &[f64], u: f64) -> usize {
        let total = *cdf.last().expect("nonempty column");
        let k = cdf.partition_point(|&c| c <= u * total);
        k.min(cdf.len() - 1)
    }

    fn initial<R: Rng>(&self, rng: &mut R) -> usize {
        let mut k = Self::pick(&self.start, rng.gen::<f64>());
        // Never start on a state with zero initial mass.
        while k > 0 && self.start[k] == self.start[k - 1] {
            k -= 1;
        }
        k
    }

    /// Next state and the position of the move in the weight table.
    #[inline]
    fn step<R: Rng>(&self, rng: &mut R, j: usize) -> (usize, usize) {
        let (a, b) = (self.offsets[j], self.offsets[j + 1]);
        let k = a + Self::pick(&self.cdf[a..b], rng.gen::<f64>());
        (self.rows[k], k)
    }

    #[inline]
    fn accumulate(&self, k: usize, y: &mut [f64]) {
        let w = &self.weights[k * self.masks..(k + 1) * self.masks];
        for (acc, w) in y.iter_mut().zip(w) {
            *acc += w;
        }
    }
}

fn path_rng(seed: u64, path: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path);
    rng
}

/// When a sampled path ends.
#[derive(Debug, Clone, Copy)]
pub enum Stop<'a> {
    /// On entering an ergodic class, or after `max_steps` transitions.
    Absorbed(&'a StateClassification, usize),
    /// After exactly this many transitions.
    Horizon(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledPath {
    pub states: Vec<usize>,
    pub truncated: bool,
}

/// One realization `X_0, X_1, ...` with `X_0 ~ mu`.
pub fn sample_path<R: Rng>(
    chain: &StochasticChain,
    mu: &DistributionVector,
    rng: &mut R,
    stop: Stop<'_>,
) -> Result<SampledPath> {
    check_mu(chain, mu)?;
    let sampler = Sampler::new(chain, mu, &[]);
    let mut x = sampler.initial(rng);
    let mut states = vec![x];
    let (cls, max_steps) = match stop {
        Stop::Absorbed(cls, m) => {
            if cls.chain_id() != chain.id() {
                return Err(Error::ChainMismatch);
            }
            (Some(cls), m)
        }
        Stop::Horizon(m) => (None, m),
    };
    for _ in 0..max_steps {
        if cls.is_some_and(|c| c.is_ergodic(x)) {
            return Ok(SampledPath {
                states,
                truncated: false,
            });
        }
        x = sampler.step(rng, x).0;
        states.push(x);
    }
    let truncated = cls.is_some_and(|c| !c.is_ergodic(x));
    Ok(SampledPath { states, truncated })
}

fn check_mu(chain: &StochasticChain, mu: &DistributionVector) -> Result<()> {
    if mu.len() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            found: mu.len(),
        });
    }
    Ok(())
}

fn thread_count(opts: &SimulationOptions) -> Option<usize> {
    opts.threads.or_else(|| {
        std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&t| t > 0)
    })
}

/// Runs `per_path` over all paths in chunks and merges deterministically.
/// `per_path` fills one value per output and reports truncation.
fn run_paths<F>(opts: &SimulationOptions, outputs: usize, per_path: F) -> Result<Vec<RunningStats>>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> bool + Sync,
{
    let chunks = opts.n_paths.div_ceil(CHUNK);
    let work = || -> Vec<Vec<RunningStats>> {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut stats = vec![RunningStats::default(); outputs];
                let mut y = vec![0.0; outputs];
                let end = ((c + 1) * CHUNK).min(opts.n_paths);
                for p in c * CHUNK..end {
                    let mut rng = path_rng(opts.seed, p);
                    y.fill(0.0);
                    let truncated = per_path(&mut rng, &mut y);
                    for (s, &v) in stats.iter_mut().zip(&y) {
                        s.push(v, truncated);
                    }
                }
                stats
            })
            .collect()
    };
    let parts = match thread_count(opts) {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };
    Ok((0..outputs)
        .map(|m| {
            let column: Vec<RunningStats> = parts.iter().map(|p| p[m]).collect();
            RunningStats::merge_tree(&column)
        })
        .collect())
}

fn check_masks(chain: &StochasticChain, mu: &DistributionVector, masks: &[&Mask]) -> Result<()> {
    check_mu(chain, mu)?;
    masks.iter().try_for_each(|m| m.check_dim(chain.n()))
}

/// Mean and standard error of the cumulative event `Y_M` over simulated
/// paths that stop on entering an ergodic class.
pub fn estimate_cumulative(
    chain: &StochasticChain,
    classification: &StateClassification,
    mu: &DistributionVector,
    mask: &Mask,
    opts: SimulationOptions,
) -> Result<SimulationEstimate> {
    let mut est = estimate_cumulative_many(chain, classification, mu, &[mask], opts)?;
    Ok(est.remove(0))
}

/// [`estimate_cumulative`] for several masks scored on the same paths. Each
/// estimate equals the one a single-mask run with the same seed returns.
pub fn estimate_cumulative_many(
    chain: &StochasticChain,
    classification: &StateClassification,
    mu: &DistributionVector,
    masks: &[&Mask],
    opts: SimulationOptions,
) -> Result<Vec<SimulationEstimate>> {
    check_masks(chain, mu, masks)?;
    if classification.chain_id() != chain.id() {
        return Err(Error::ChainMismatch);
    }
    for m in masks {
        check_zero_condition(chain, classification, m)?;
    }
    let max_steps = opts.max_steps.unwrap_or(100 * chain.n()).max(1);
    let sampler = Sampler::new(chain, mu, masks);
    let ergodic: Vec<bool> = (0..chain.n()).map(|i| classification.is_ergodic(i)).collect();
    let stats = run_paths(&opts, masks.len(), |rng, y| {
        let mut x = sampler.initial(rng);
        for _ in 0..max_steps {
            if ergodic[x] {
                return false;
            }
            let (next, k) = sampler.step(rng, x);
            sampler.accumulate(k, y);
            x = next;
        }
        !ergodic[x]
    })?;
    let estimates: Vec<SimulationEstimate> = stats.iter().map(|s| s.estimate(opts.seed)).collect();
    if let Some(est) = estimates.first() {
        if est.n_paths > 0
            && est.truncations as f64 > MAX_TRUNCATED_FRACTION * est.n_paths as f64
        {
            return Err(Error::ExcessiveTruncation {
                truncated: est.truncations,
                paths: est.n_paths,
            });
        }
    }
    Ok(estimates)
}

/// Mean over paths of `(1/N) sum_{k=0}^{N} M[X_{k+1}][X_k]`.
pub fn estimate_time_average(
    chain: &StochasticChain,
    mu: &DistributionVector,
    mask: &Mask,
    horizon: usize,
    opts: SimulationOptions,
) -> Result<SimulationEstimate> {
    let mut est = estimate_time_average_many(chain, mu, &[mask], horizon, opts)?;
    Ok(est.remove(0))
}

/// [`estimate_time_average`] for several masks on the same paths.
pub fn estimate_time_average_many(
    chain: &StochasticChain,
    mu: &DistributionVector,
    masks: &[&Mask],
    horizon: usize,
    opts: SimulationOptions,
) -> Result<Vec<SimulationEstimate>> {
    check_masks(chain, mu, masks)?;
    if horizon == 0 {
        return Err(Error::Internal("time-average horizon must be at least 1".into()));
    }
    let sampler = Sampler::new(chain, mu, masks);
    let stats = run_paths(&opts, masks.len(), |rng, y| {
        let mut x = sampler.initial(rng);
        for _ in 0..=horizon {
            let (next, k) = sampler.step(rng, x);
            sampler.accumulate(k, y);
            x = next;
        }
        for v in y.iter_mut() {
            *v /= horizon as f64;
        }
        false
    })?;
    Ok(stats.iter().map(|s| s.estimate(opts.seed)).collect())
}
