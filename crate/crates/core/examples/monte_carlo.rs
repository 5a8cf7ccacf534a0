//! Closed-form expectations checked against simulation. Results depend only
//! on the seed, not on the number of worker threads.

use markov_mask::chain::{classify_states, DistributionVector, StochasticChain};
use markov_mask::engine::{cesaro_projector, expect, setup, time_average_expect};
use markov_mask::linalg::DenseMatrix;
use markov_mask::masks::{mask_steps_to_absorption, mask_transition_set};
use markov_mask::montecarlo::{estimate_cumulative, estimate_time_average, SimulationOptions};

fn main() -> markov_mask::Result<()> {
    let t = DenseMatrix::from_rows(&[
        &[0.5, 0.0, 0.0],
        &[0.25, 0.5, 0.0],
        &[0.25, 0.5, 1.0],
    ]);
    let chain = StochasticChain::new(&t, None)?;
    let cls = classify_states(&chain);
    let mu = DistributionVector::delta(3, 0);
    let steps = mask_steps_to_absorption(&cls)?;
    let opts = SimulationOptions { n_paths: 200_000, seed: 7, ..Default::default() };

    let exact = expect(&setup(&chain, &cls, &mu)?, &steps)?.value;
    let est = estimate_cumulative(&chain, &cls, &mu, &steps, opts)?;
    println!("steps: exact {exact}, simulated {:.4} +- {:.4}, z = {:.2}", est.mean, est.stderr, est.z_score(exact));

    let single = SimulationOptions { threads: Some(1), ..opts };
    let again = estimate_cumulative(&chain, &cls, &mu, &steps, single)?;
    println!("one thread gives the same mean: {}", again.mean == est.mean);

    let cycle = StochasticChain::new(&DenseMatrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), None)?;
    let g = cesaro_projector(&cycle, &classify_states(&cycle))?;
    let start = DistributionVector::delta(2, 0);
    let forward = mask_transition_set(2, |i, j| (i, j) == (1, 0), |_, _| 1.0);
    let exact = time_average_expect(&cycle, &g, &start, &forward)?.value;
    let est = estimate_time_average(&cycle, &start, &forward, 1001, opts)?;
    println!("cycle: exact {exact}, simulated {:.4} over 1001 steps", est.mean);
    Ok(())
}
