use std::cmp::Ordering;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Mask;
use crate::chain::StateClassification;
use crate::{Error, Result};

/// How lead changes among more than two players are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeadVariant {
    /// 1 when the unique leader changes, 1/2 when the set of players tied
    /// for the lead changes otherwise.
    LeaderPassing,
    /// One per pair of players whose strict order flips, 1/2 per pair that
    /// enters or leaves a tie.
    PermutationCount,
}

struct Composite {
    n0: usize,
    p: usize,
    progress: Vec<f64>,
    absorbing: Vec<bool>,
}

impl Composite {
    fn new(
        cls: &StateClassification,
        n0: usize,
        p: usize,
        progress: Option<&[f64]>,
    ) -> Result<Self> {
        let n = cls.n();
        let not_composite = Error::NotComposite {
            states: n,
            base: n0,
            players: p,
        };
        if n0 == 0 || p == 0 || n0.checked_pow(p as u32) != Some(n) {
            return Err(not_composite);
        }
        let progress = match progress {
            Some(r) if r.len() != n0 => {
                return Err(Error::DimensionMismatch {
                    expected: n0,
                    found: r.len(),
                })
            }
            Some(r) => r.to_vec(),
            None => (0..n0).map(|i| i as f64).collect(),
        };
        // A base state is absorbing exactly when all players sitting on it
        // is an absorbing composite state.
        let diag_step: usize = (0..p).map(|k| n0.pow(k as u32)).sum();
        let absorbing = (0..n0).map(|j| cls.is_absorbing(j * diag_step)).collect();
        Ok(Self {
            n0,
            p,
            progress,
            absorbing,
        })
    }

    fn decode(&self, mut idx: usize, out: &mut [usize]) {
        for k in (0..self.p).rev() {
            out[k] = idx % self.n0;
            idx /= self.n0;
        }
    }

    fn cmp(&self, a: usize, b: usize) -> Ordering {
        self.progress[a]
            .partial_cmp(&self.progress[b])
            .unwrap_or(Ordering::Equal)
    }
}

fn pair_weight(before: Ordering, after: Ordering) -> f64 {
    use Ordering::Equal;
    match (before, after) {
        (Equal, Equal) => 0.0,
        (Equal, _) | (_, Equal) => 0.5,
        (b, a) if b != a => 1.0,
        _ => 0.0,
    }
}

/// Lead changes between two players on a composite of a base game with `n0`
/// states. `progress` ranks base states (higher is closer to winning) and
/// defaults to the state index. Moves out of a composite state where either
/// player sits on an absorbing base state carry no weight.
pub fn mask_lead_changes_2p(
    cls: &StateClassification,
    n0: usize,
    progress: Option<&[f64]>,
) -> Result<Mask> {
    let c = Arc::new(Composite::new(cls, n0, 2, progress)?);
    Ok(Mask::from_fn(cls.n(), move |i, j| {
        let (j1, j2) = (j / c.n0, j % c.n0);
        if c.absorbing[j1] || c.absorbing[j2] {
            return 0.0;
        }
        let (i1, i2) = (i / c.n0, i % c.n0);
        pair_weight(c.cmp(j2, j1), c.cmp(i2, i1))
    })
    .with_kind("lead_changes_2p"))
}

/// Lead changes among `p` players; see [`LeadVariant`].
pub fn mask_lead_changes_p(
    cls: &StateClassification,
    n0: usize,
    p: usize,
    variant: LeadVariant,
    progress: Option<&[f64]>,
) -> Result<Mask> {
    let c = Arc::new(Composite::new(cls, n0, p, progress)?);
    let mask = Mask::from_fn(cls.n(), move |i, j| {
        let mut src = vec![0; c.p];
        let mut dst = vec![0; c.p];
        c.decode(j, &mut src);
        if src.iter().any(|&s| c.absorbing[s]) {
            return 0.0;
        }
        c.decode(i, &mut dst);
        match variant {
            LeadVariant::PermutationCount => {
                let mut w = 0.0;
                for a in 0..c.p {
                    for b in a + 1..c.p {
                        w += pair_weight(c.cmp(src[b], src[a]), c.cmp(dst[b], dst[a]));
                    }
                }
                w
            }
            LeadVariant::LeaderPassing => {
                let before = leaders(&c, &src);
                let after = leaders(&c, &dst);
                if before == after {
                    0.0
                } else if before.len() == 1 && after.len() == 1 {
                    1.0
                } else {
                    0.5
                }
            }
        }
    })
    .with_kind(match variant {
        LeadVariant::LeaderPassing => "lead_changes_p/leader-passing",
        LeadVariant::PermutationCount => "lead_changes_p/permutation-count",
    });
    Ok(if p > 2 {
        mask.with_note(match variant {
            LeadVariant::LeaderPassing => {
                "half weights for ties at the lead extend the two-player rule"
            }
            LeadVariant::PermutationCount => {
                "weight counts discordant player pairs; ties score one half per pair"
            }
        })
    } else {
        mask
    })
}

fn leaders(c: &Composite, coords: &[usize]) -> Vec<usize> {
    let best = coords
        .iter()
        .copied()
        .max_by(|&a, &b| c.cmp(a, b))
        .expect("at least one player");
    (0..coords.len())
        .filter(|&k| c.cmp(coords[k], best) == Ordering::Equal)
        .collect()
}
