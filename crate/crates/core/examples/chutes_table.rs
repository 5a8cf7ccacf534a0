//! Expected values of game events in Chutes and Ladders for one and two
//! players on the standard board. The two-player chain has 6724 states.

use markov_mask::chutes::{build_chutes_chain, BoardSpec};
use markov_mask::engine::{expect, setup};

fn main() -> markov_mask::Result<()> {
    let board = BoardSpec::standard();
    for p in [1, 2] {
        let model = build_chutes_chain(&board, p)?;
        let s = setup(&model.chain, &model.classification, &model.start)?;
        println!("{p} player(s), {} states", model.chain.n());
        for (name, mask) in &model.masks {
            println!("  {name:<24} {:.6}", expect(&s, mask)?.value);
        }
    }
    Ok(())
}
