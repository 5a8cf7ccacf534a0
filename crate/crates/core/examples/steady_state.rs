//! Long-run averages through the Cesaro projector, including a periodic
//! closed class that the power iteration would never settle on.

use markov_mask::chain::{classify_states, DistributionVector, StochasticChain};
use markov_mask::engine::{cesaro_projector, time_average_expect};
use markov_mask::linalg::DenseMatrix;
use markov_mask::masks::{mask_steady_state_loop, mask_transition_set};

fn main() -> markov_mask::Result<()> {
    // d feeds the 2-cycle u <-> v or the absorbing state a.
    let t = DenseMatrix::from_rows(&[
        &[0.0, 0.0, 0.0, 0.0],
        &[0.25, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.75, 0.0, 0.0, 1.0],
    ]);
    let chain = StochasticChain::new(&t, Some(["d", "u", "v", "a"].map(String::from).to_vec()))?;
    let cls = classify_states(&chain);
    let g = cesaro_projector(&chain, &cls)?;
    for m in 0..cls.ergodic_classes().len() {
        println!("class {m} stationary {:?}", g.stationary(m));
    }
    let mu = DistributionVector::delta(4, 0);
    println!("G mu = {:?}", g.apply(mu.as_slice()));

    let u_to_v = mask_transition_set(4, |i, j| (i, j) == (2, 1), |_, _| 1.0);
    let in_a = mask_steady_state_loop(&cls, 3)?;
    let every = mask_transition_set(4, |_, _| true, |_, _| 1.0);
    for (name, m) in [("u->v per step", &u_to_v), ("time in a", &in_a), ("all moves", &every)] {
        println!("{name:<14} {}", time_average_expect(&chain, &g, &mu, m)?.value);
    }
    Ok(())
}
