//! How sensitive an expectation is to its inputs, and how much rounding the
//! solve can introduce.

use markov_mask::chain::{classify_states, DistributionVector, StochasticChain};
use markov_mask::diagnostics::{
    condition_bounds, empirical_perturbation_check, stability_bounds, PerturbationOptions,
    DEFAULT_GAMMA_CONSTANT, DOUBLE_ROUNDOFF,
};
use markov_mask::engine::{expect, setup};
use markov_mask::linalg::DenseMatrix;
use markov_mask::masks::mask_steps_to_absorption;

fn main() -> markov_mask::Result<()> {
    let t = DenseMatrix::from_rows(&[
        &[0.5, 0.0, 0.0],
        &[0.25, 0.5, 0.0],
        &[0.25, 0.5, 1.0],
    ]);
    let chain = StochasticChain::new(&t, None)?;
    let cls = classify_states(&chain);
    let mu = DistributionVector::delta(3, 0);
    let mask = mask_steps_to_absorption(&cls)?;

    let s = setup(&chain, &cls, &mu)?;
    let psi = expect(&s, &mask)?;
    let c = condition_bounds(&s, &mask, &psi)?;
    println!("psi = {}", c.expectation);
    println!("kappa_M = {:.4}  kappa_T <= {:.4}  kappa_mu <= {:.4}", c.kappa_m_bound, c.kappa_t_bound, c.kappa_mu_bound);
    println!("||(I - A)^-1||_2 = {:.6}", c.inv_norm_2);

    let r = empirical_perturbation_check(&chain, &cls, &mask, &mu, 1e-7, PerturbationOptions::default())?;
    println!(
        "observed ratios M {:.4}  T {:.4}  mu {:.4}  within bounds: {}",
        r.ratio_m, r.ratio_t, r.ratio_mu, r.within_bounds()
    );

    for n in [3, 1_000, 10_000_000] {
        let b = stability_bounds(n, n - 1, DEFAULT_GAMMA_CONSTANT, DOUBLE_ROUNDOFF);
        println!("n = {n:>8}: deltaT <= {:.3e}  deltaM <= {:.3e}  applicable {}", b.delta_t_bound, b.delta_m_bound, b.applicable);
    }
    Ok(())
}
