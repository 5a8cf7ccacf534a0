//! Chains, masks and distributions as files: JSON, Matrix Market with a
//! labels sidecar, and builder or explicit mask documents.

use markov_mask::chain::classify_states;
use markov_mask::engine::{expect, setup};
use markov_mask::io::{
    builder_mask_json, chain_from_json, distribution_arg, mask_to_json, parse_chain, parse_mask,
    write_chain, write_document,
};
use serde_json::json;

const CHAIN: &str = r#"{
  "orientation": "row",
  "states": ["home", "work", "gone"],
  "matrix": [[0.6, 0.3, 0.1],
             [0.4, 0.5, 0.1],
             [0.0, 0.0, 1.0]]
}"#;

fn main() -> markov_mask::Result<()> {
    let dir = std::env::temp_dir().join(format!("markov-mask-formats-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let chain = chain_from_json(CHAIN, "inline")?;
    write_chain(&chain, &dir.join("chain.json"))?;
    write_chain(&chain, &dir.join("chain.mtx"))?;
    let from_mtx = parse_chain(&dir.join("chain.mtx"))?;
    println!("matrix market round trip exact: {}", from_mtx.to_dense() == chain.to_dense());
    println!("{}", std::fs::read_to_string(dir.join("chain.mtx"))?);

    let mask_path = dir.join("commutes.json");
    let doc = builder_mask_json(
        "transition_set",
        json!({"pairs": [{"from": "home", "to": "work"}, {"from": "work", "to": "home"}]}),
    );
    write_document(&mask_path, &doc)?;
    let mask = parse_mask(&mask_path, &chain)?;

    let cls = classify_states(&chain);
    let mu = distribution_arg("delta:home", &chain)?;
    let s = setup(&chain, &cls, &mu)?;
    println!("expected commutes before leaving: {}", expect(&s, &mask)?.value);
    println!("as an explicit document:\n{}", mask_to_json(&mask, &chain)?);

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
