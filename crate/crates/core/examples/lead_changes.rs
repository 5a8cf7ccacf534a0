//! Two and three independent players on the same race, composed with the
//! Kronecker product, counting how often the lead changes hands.

use markov_mask::chain::{classify_states, kron_compose, kron_distribution, DistributionVector, StochasticChain};
use markov_mask::engine::{expect, setup};
use markov_mask::linalg::DenseMatrix;
use markov_mask::masks::{mask_lead_changes_2p, mask_lead_changes_p, mask_steps_to_absorption, LeadVariant};

/// Race over squares 0..=3: each turn move one square with probability 1/2.
fn race() -> markov_mask::Result<StochasticChain> {
    let t = DenseMatrix::from_rows(&[
        &[0.5, 0.0, 0.0, 0.0],
        &[0.5, 0.5, 0.0, 0.0],
        &[0.0, 0.5, 0.5, 0.0],
        &[0.0, 0.0, 0.5, 1.0],
    ]);
    StochasticChain::new(&t, None)
}

fn main() -> markov_mask::Result<()> {
    let one = race()?;
    let start = DistributionVector::delta(4, 0);

    let two = kron_compose(&one, &one)?;
    let cls2 = classify_states(&two);
    let s2 = setup(&two, &cls2, &kron_distribution(&start, &start))?;
    println!("2 players: {} states, {} transient", two.n(), cls2.transient_count());
    println!("  rounds until someone finishes {}", expect(&s2, &mask_steps_to_absorption(&cls2)?)?.value);
    println!("  lead changes                  {}", expect(&s2, &mask_lead_changes_2p(&cls2, 4, None)?)?.value);

    let three = kron_compose(&two, &one)?;
    let cls3 = classify_states(&three);
    let mu3 = kron_distribution(&kron_distribution(&start, &start), &start);
    let s3 = setup(&three, &cls3, &mu3)?;
    println!("3 players: {} states", three.n());
    for variant in [LeadVariant::LeaderPassing, LeadVariant::PermutationCount] {
        let m = mask_lead_changes_p(&cls3, 4, 3, variant, None)?;
        println!("  {variant:?}: {}", expect(&s3, &m)?.value);
    }
    Ok(())
}
