use std::collections::HashMap;
use std::sync::Arc;

use super::Mask;
use crate::chain::{StateClassification, StochasticChain};
use crate::linalg::CscMatrix;
use crate::{Error, Result};

fn ergodic_flags(cls: &StateClassification) -> Arc<Vec<bool>> {
    Arc::new((0..cls.n()).map(|i| cls.is_ergodic(i)).collect())
}

fn check_state(cls: &StateClassification, h: usize) -> Result<()> {
    if h >= cls.n() {
        return Err(Error::UnknownState(format!("index {h}")));
    }
    Ok(())
}

/// Weight 1 on every move out of a transient state: counts steps until the
/// chain enters an ergodic class.
pub fn mask_steps_to_absorption(cls: &StateClassification) -> Result<Mask> {
    if cls.transient_count() == 0 {
        return Err(Error::NoTransientStates);
    }
    let erg = ergodic_flags(cls);
    Ok(Mask::from_fn(cls.n(), move |_, j| if erg[j] { 0.0 } else { 1.0 })
        .with_kind("steps_to_absorption"))
}

/// Weight 1 on every move from a transient state into ergodic class `m`.
pub fn mask_absorption_probability(cls: &StateClassification, m: usize) -> Result<Mask> {
    let class = cls.ergodic_classes().get(m).ok_or(Error::UnknownClass(m))?;
    let mut target = vec![false; cls.n()];
    for &s in &class.states {
        target[s] = true;
    }
    let erg = ergodic_flags(cls);
    Ok(Mask::from_fn(cls.n(), move |i, j| {
        if target[i] && !erg[j] {
            1.0
        } else {
            0.0
        }
    })
    .with_kind("absorption_probability"))
}

/// Weight 1 on moves into `h` from transient states.
pub fn mask_arrivals(cls: &StateClassification, h: usize) -> Result<Mask> {
    check_state(cls, h)?;
    let erg = ergodic_flags(cls);
    Ok(
        Mask::from_fn(cls.n(), move |i, j| if i == h && !erg[j] { 1.0 } else { 0.0 })
            .with_kind("arrivals"),
    )
}

/// Weight 1 on moves out of `h` when `h` is transient.
pub fn mask_departures(cls: &StateClassification, h: usize) -> Result<Mask> {
    check_state(cls, h)?;
    let transient = cls.is_transient(h);
    Ok(Mask::from_fn(cls.n(), move |_, j| {
        if j == h && transient {
            1.0
        } else {
            0.0
        }
    })
    .with_kind("departures"))
}

/// Distance travelled: `M[i][j] = d(j, i)` on moves out of transient states.
/// `distances` is keyed by `(from, to)` and must cover every possible move
/// out of a transient state.
pub fn mask_distance(
    chain: &StochasticChain,
    cls: &StateClassification,
    distances: &HashMap<(usize, usize), f64>,
) -> Result<Mask> {
    if chain.id() != cls.chain_id() {
        return Err(Error::ChainMismatch);
    }
    let mut columns = Vec::with_capacity(chain.n());
    for j in 0..chain.n() {
        let mut col = Vec::new();
        if cls.is_transient(j) {
            for (i, _) in chain.column(j) {
                let d = *distances
                    .get(&(j, i))
                    .ok_or(Error::MissingDistance { from: j, to: i })?;
                if !d.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if d != 0.0 {
                    col.push((i, d));
                }
            }
        }
        columns.push(col);
    }
    Ok(Mask::explicit(CscMatrix::from_columns(chain.n(), columns))?.with_kind("distance"))
}

/// `w(i, j)` on moves selected by `predicate(i, j)`, zero elsewhere.
pub fn mask_transition_set<P, W>(n: usize, predicate: P, weight: W) -> Mask
where
    P: Fn(usize, usize) -> bool + Send + Sync + 'static,
    W: Fn(usize, usize) -> f64 + Send + Sync + 'static,
{
    Mask::from_fn(n, move |i, j| if predicate(i, j) { weight(i, j) } else { 0.0 })
        .with_kind("transition_set")
}

/// The self-loop of absorbing state `j`. Its time-average expectation is the
/// probability of ending in `j`.
pub fn mask_steady_state_loop(cls: &StateClassification, j: usize) -> Result<Mask> {
    check_state(cls, j)?;
    if !cls.is_absorbing(j) {
        return Err(Error::NotAbsorbing(format!("index {j}")));
    }
    let n = cls.n();
    Ok(Mask::explicit(CscMatrix::from_triplets(n, n, &[(j, j, 1.0)]))?
        .with_kind("steady_state_loop")
        .time_average())
}
