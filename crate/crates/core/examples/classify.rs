//! Split a reducible chain into transient states and closed classes.

use markov_mask::chain::{classify_states, ClassKind, StochasticChain};
use markov_mask::linalg::DenseMatrix;

fn main() -> markov_mask::Result<()> {
    // Column j holds the moves out of state j. States 0 and 1 are transient,
    // 2 is absorbing and 3 <-> 4 is a periodic closed class.
    let t = DenseMatrix::from_rows(&[
        &[0.2, 0.0, 0.0, 0.0, 0.0],
        &[0.5, 0.1, 0.0, 0.0, 0.0],
        &[0.3, 0.4, 1.0, 0.0, 0.0],
        &[0.0, 0.5, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 0.0, 1.0, 0.0],
    ]);
    let labels = ["start", "middle", "done", "ping", "pong"].map(String::from).to_vec();
    let chain = StochasticChain::new(&t, Some(labels))?;
    let cls = classify_states(&chain);

    println!(
        "{} transient states, {} closed classes",
        cls.transient_count(),
        cls.ergodic_classes().len()
    );
    for class in cls.classes() {
        let names: Vec<&str> = class.states.iter().map(|&s| chain.label(s)).collect();
        match class.kind {
            ClassKind::Transient => println!("transient {names:?} leaks {}", class.leak),
            ClassKind::Ergodic => println!("closed    {names:?}"),
        }
    }
    let order: Vec<&str> = cls.canonical_order().iter().map(|&s| chain.label(s)).collect();
    println!("canonical order {order:?}");
    println!("absorbing {:?}", cls.absorbing_states());
    Ok(())
}
