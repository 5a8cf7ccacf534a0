//! Cumulative expectations before absorption, with one setup reused across
//! several masks.

use std::collections::HashMap;

use markov_mask::chain::{classify_states, DistributionVector, StochasticChain};
use markov_mask::engine::{expect, setup, setup_with, SetupOptions};
use markov_mask::linalg::{DenseMatrix, SolverKind};
use markov_mask::masks::{
    mask_absorption_probability, mask_arrivals, mask_departures, mask_distance,
    mask_steps_to_absorption,
};

fn main() -> markov_mask::Result<()> {
    // t1 -> t2 -> a, with self loops on both transient states.
    let t = DenseMatrix::from_rows(&[
        &[0.5, 0.0, 0.0],
        &[0.25, 0.5, 0.0],
        &[0.25, 0.5, 1.0],
    ]);
    let chain = StochasticChain::new(&t, Some(vec!["t1".into(), "t2".into(), "a".into()]))?;
    let cls = classify_states(&chain);
    let mu = DistributionVector::delta(3, 0);

    let s = setup(&chain, &cls, &mu)?;
    println!("expected visits nu = {:?}", s.nu());

    let mut distance = HashMap::new();
    for (from, to, d) in [(0, 0, 0.0), (0, 1, 2.0), (0, 2, 5.0), (1, 1, 0.0), (1, 2, 3.0)] {
        distance.insert((from, to), d);
    }
    let masks = [
        mask_steps_to_absorption(&cls)?,
        mask_arrivals(&cls, 1)?,
        mask_departures(&cls, 1)?,
        mask_absorption_probability(&cls, 0)?,
        mask_distance(&chain, &cls, &distance)?,
    ];
    for m in &masks {
        println!("{:<24} {}", m.kind(), expect(&s, m)?.value);
    }

    let lu = setup_with(&chain, &cls, &mu, SetupOptions { solver: SolverKind::PivotFreeLu })?;
    println!("pivot-free LU steps      {}", expect(&lu, &masks[0])?.value);

    // Same factorization, new starting point.
    let from_t2 = s.with_distribution(&DistributionVector::delta(3, 1))?;
    println!("steps from t2            {}", expect(&from_t2, &masks[0])?.value);
    Ok(())
}
