#![allow(dead_code)]

use markov_mask::chain::StochasticChain;
use markov_mask::linalg::{CscMatrix, DenseMatrix};
use markov_mask::masks::Mask;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn chain(rows: &[&[f64]], labels: &[&str]) -> StochasticChain {
    let labels = labels.iter().map(|s| s.to_string()).collect();
    StochasticChain::new(&DenseMatrix::from_rows(rows), Some(labels)).unwrap()
}

pub fn c1() -> StochasticChain {
    chain(&[&[0.5, 0.0], &[0.5, 1.0]], &["t1", "a1"])
}

pub fn c2() -> StochasticChain {
    chain(
        &[&[0.0, 0.0, 0.0], &[0.3, 1.0, 0.0], &[0.7, 0.0, 1.0]],
        &["t1", "a1", "a2"],
    )
}

pub fn c5() -> StochasticChain {
    chain(
        &[&[0.5, 0.0, 0.0], &[0.25, 0.5, 0.0], &[0.25, 0.5, 1.0]],
        &["t1", "t2", "a"],
    )
}

pub fn cycle2() -> StochasticChain {
    chain(&[&[0.0, 1.0], &[1.0, 0.0]], &["u", "v"])
}

/// Shape of a random closed class.
#[derive(Debug, Clone, Copy)]
pub enum ClassShape {
    Absorbing,
    Dense(usize),
    Cycle(usize),
}

/// Random reducible chain with `t` transient states and the given closed
/// classes, states shuffled. Every transient state sends at least 0.3 of
/// its mass to a later transient state or to a closed class, so the
/// transient block has spectral radius below one.
pub fn random_chain(rng: &mut ChaCha8Rng, t: usize, classes: &[ClassShape]) -> StochasticChain {
    let mut blocks: Vec<(usize, ClassShape)> = Vec::new();
    let mut n = t;
    for &c in classes {
        blocks.push((n, c));
        n += match c {
            ClassShape::Absorbing => 1,
            ClassShape::Dense(k) | ClassShape::Cycle(k) => k,
        };
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for j in 0..t {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        let later = rng.gen_range(j + 1..n);
        entries.push((later, 0.3));
        let extra = rng.gen_range(0..4);
        let mut rest = Vec::new();
        for _ in 0..extra {
            rest.push((rng.gen_range(0..n), rng.gen_range(0.05..1.0)));
        }
        if rest.is_empty() {
            rest.push((later, 1.0));
        }
        let total: f64 = rest.iter().map(|r| r.1).sum();
        entries.extend(rest.into_iter().map(|(i, w)| (i, 0.7 * w / total)));
        cols[j] = entries;
    }
    for &(first, shape) in &blocks {
        match shape {
            ClassShape::Absorbing => cols[first] = vec![(first, 1.0)],
            ClassShape::Cycle(k) => {
                for m in 0..k {
                    cols[first + m] = vec![(first + (m + 1) % k, 1.0)];
                }
            }
            ClassShape::Dense(k) => {
                for m in 0..k {
                    let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.01..1.0)).collect();
                    let total: f64 = w.iter().sum();
                    cols[first + m] = w.iter().enumerate().map(|(r, x)| (first + r, x / total)).collect();
                }
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut triplets = Vec::new();
    for (j, col) in cols.iter().enumerate() {
        for &(i, v) in col {
            triplets.push((perm[i], perm[j], v));
        }
    }
    let m = CscMatrix::from_triplets(n, n, &triplets);
    let labels = (0..n).map(|i| format!("x{i}")).collect();
    StochasticChain::from_csc(m, Some(labels), Default::default()).unwrap()
}

/// Random chain with `n <= 20` states, at least one transient state and one
/// to three closed classes drawn from all shapes.
pub fn random_small_chain(seed: u64) -> StochasticChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.gen_range(1..=10);
    let k = rng.gen_range(1..=3);
    let classes: Vec<ClassShape> = (0..k)
        .map(|_| match rng.gen_range(0..3) {
            0 => ClassShape::Absorbing,
            1 => ClassShape::Dense(rng.gen_range(1..=3)),
            _ => ClassShape::Cycle(rng.gen_range(2..=3)),
        })
        .collect();
    random_chain(&mut rng, t, &classes)
}

/// Random absorbing chain (every closed class a single state).
pub fn random_absorbing_chain(seed: u64) -> StochasticChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = rng.gen_range(1..=15);
    let k = rng.gen_range(1..=4);
    random_chain(&mut rng, t, &vec![ClassShape::Absorbing; k])
}

/// Random nonnegative mask on the transient-source moves of `chain`.
pub fn random_mask(chain: &StochasticChain, transient: &[bool], seed: u64) -> Mask {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6d61736b);
    let mut triplets = Vec::new();
    for j in 0..chain.n() {
        if !transient[j] {
            continue;
        }
        for (i, _) in chain.column(j) {
            if rng.gen_bool(0.8) {
                triplets.push((i, j, rng.gen_range(0.0..3.0)));
            }
        }
    }
    Mask::explicit(CscMatrix::from_triplets(chain.n(), chain.n(), &triplets)).unwrap()
}

pub fn identity_minus(t: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::identity(t.nrows()).sub(t)
}
