//! Chutes and Ladders as an absorbing chain, for one player or two.
//!
//! A state is a square a token can rest on: the start square 0 and every
//! board square that is not the foot of a jump. Each turn the player spins
//! `1..=spinner` uniformly, moves, and follows a chute or ladder if the
//! landing square has one.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chain::{
    classify_states, kron_compose, kron_distribution, ChainOptions, DistributionVector,
    StateClassification, StochasticChain,
};
use crate::linalg::CscMatrix;
use crate::masks::{mask_lead_changes_2p, mask_steps_to_absorption, Mask};
use crate::{Error, Result};

const STANDARD_BOARD: &str = include_str!("../boards/standard.json");

/// What happens when a spin would carry the token past the final square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Overshoot {
    /// The token does not move.
    #[default]
    Stay,
    /// The token walks back from the final square by the excess.
    Bounce,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardSpec {
    /// Number of the final square; the token starts off the board on 0.
    pub squares: usize,
    /// Foot of each chute or ladder mapped to where it leads.
    pub jumps: BTreeMap<usize, usize>,
    pub spinner: usize,
    #[serde(default)]
    pub overshoot: Overshoot,
}

impl BoardSpec {
    /// The common 100-square commercial board with a 1-6 spinner.
    pub fn standard() -> Self {
        serde_json::from_str(STANDARD_BOARD).expect("bundled board parses")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidBoard(msg));
        if self.squares == 0 {
            return bad("the board needs at least one square".into());
        }
        if self.spinner == 0 {
            return bad("the spinner needs at least one value".into());
        }
        if self.overshoot == Overshoot::Bounce && self.spinner > 2 * self.squares {
            return bad("spinner can bounce past the start".into());
        }
        for (&from, &to) in &self.jumps {
            if from == 0 || from >= self.squares {
                return bad(format!("jump from square {from} must start inside the board"));
            }
            if to == from || to > self.squares {
                return bad(format!("jump {from} -> {to} is out of range"));
            }
            if self.jumps.contains_key(&to) {
                return bad(format!("jump {from} -> {to} lands on another jump"));
            }
        }
        Ok(())
    }

    /// Squares a token can rest on, ascending.
    pub fn resting_squares(&self) -> Vec<usize> {
        (0..=self.squares)
            .filter(|s| !self.jumps.contains_key(s))
            .collect()
    }

    /// The ladder with the largest climb, if any.
    pub fn largest_ladder(&self) -> Option<(usize, usize)> {
        self.jumps
            .iter()
            .filter(|(&a, &b)| b > a)
            .max_by_key(|(&a, &b)| (b - a, std::cmp::Reverse(a)))
            .map(|(&a, &b)| (a, b))
    }

    fn landing(&self, square: usize, spin: usize) -> usize {
        let raw = square + spin;
        if raw <= self.squares {
            raw
        } else {
            match self.overshoot {
                Overshoot::Stay => square,
                Overshoot::Bounce => 2 * self.squares - raw,
            }
        }
    }
}

/// Chain, start distribution and the named event masks for one game setup.
#[derive(Debug, Clone)]
pub struct ChutesModel {
    pub board: BoardSpec,
    pub players: usize,
    pub chain: StochasticChain,
    pub classification: StateClassification,
    pub start: DistributionVector,
    pub masks: Vec<(String, Mask)>,
}

impl ChutesModel {
    pub fn mask(&self, name: &str) -> Option<&Mask> {
        self.masks.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }
}

/// Event names, in output order.
pub const EVENTS_ONE_PLAYER: [&str; 3] = ["second_to_last_square", "large_ladder", "game_length"];
pub const EVENTS_TWO_PLAYERS: [&str; 6] = [
    "second_to_last_square",
    "large_ladder",
    "game_length",
    "lead_changes",
    "first_player_advantage",
    "first_player_wins",
];

struct SinglePlayer {
    squares: Vec<usize>,
    chain: StochasticChain,
    /// Fractional weights: probability of the event along the move divided by
    /// the move's probability.
    stuck: Arc<CscMatrix>,
    ladder: Option<Arc<CscMatrix>>,
    finish: usize,
}

fn single_player(board: &BoardSpec) -> Result<SinglePlayer> {
    board.validate()?;
    let squares = board.resting_squares();
    let n = squares.len();
    let mut index = vec![usize::MAX; board.squares + 1];
    for (k, &s) in squares.iter().enumerate() {
        index[s] = k;
    }
    let p = 1.0 / board.spinner as f64;
    let ladder_foot = board.largest_ladder().map(|l| l.0);
    let stuck_square = board.squares - 1;
    let mut t = Vec::new();
    let mut stuck = Vec::new();
    let mut ladder = Vec::new();
    for (j, &s) in squares.iter().enumerate() {
        if s == board.squares {
            t.push((j, j, 1.0));
            continue;
        }
        for spin in 1..=board.spinner {
            let land = board.landing(s, spin);
            let rest = board.jumps.get(&land).copied().unwrap_or(land);
            let i = index[rest];
            t.push((i, j, p));
            if s == stuck_square && rest == s {
                stuck.push((i, j, p));
            }
            if Some(land) == ladder_foot {
                ladder.push((i, j, p));
            }
        }
    }
    let t = CscMatrix::from_triplets(n, n, &t);
    let fraction = |events: &[(usize, usize, f64)]| {
        let e = CscMatrix::from_triplets(n, n, events);
        let columns = (0..n)
            .map(|j| e.column(j).map(|(i, v)| (i, v / t.get(i, j))).collect())
            .collect();
        Arc::new(CscMatrix::from_columns(n, columns))
    };
    let stuck = fraction(&stuck);
    let ladder = ladder_foot.map(|_| fraction(&ladder));
    let labels = squares.iter().map(|s| s.to_string()).collect();
    let chain = StochasticChain::from_csc(t, Some(labels), ChainOptions::default())?;
    Ok(SinglePlayer {
        finish: index[board.squares],
        squares,
        chain,
        stuck,
        ladder,
    })
}

/// Builds the game for `players` in `{1, 2}`. Two players take turns within
/// a round, the first player spinning first; one composite step is one round
/// and the game ends with the round in which somebody reaches the final
/// square.
pub fn build_chutes_chain(board: &BoardSpec, players: usize) -> Result<ChutesModel> {
    let single = single_player(board)?;
    let n0 = single.chain.n();
    let start0 = DistributionVector::delta(n0, 0);
    match players {
        1 => {
            let classification = classify_states(&single.chain);
            let mut masks = vec![(
                "second_to_last_square".to_string(),
                Mask::explicit((*single.stuck).clone())?.with_kind("second_to_last_square"),
            )];
            if let Some(l) = &single.ladder {
                masks.push((
                    "large_ladder".into(),
                    Mask::explicit((**l).clone())?.with_kind("large_ladder"),
                ));
            }
            masks.push((
                "game_length".into(),
                mask_steps_to_absorption(&classification)?.with_kind("game_length"),
            ));
            Ok(ChutesModel {
                board: board.clone(),
                players,
                chain: single.chain,
                classification,
                start: start0,
                masks,
            })
        }
        2 => {
            let chain = kron_compose(&single.chain, &single.chain)?;
            let classification = classify_states(&chain);
            let start = kron_distribution(&start0, &start0);
            let f = single.finish;
            let live = move |j: usize| j / n0 != f && j % n0 != f;
            let both = |e: Arc<CscMatrix>, kind: &str| {
                Mask::from_fn(n0 * n0, move |i, j| {
                    if !live(j) {
                        return 0.0;
                    }
                    e.get(i / n0, j / n0) + e.get(i % n0, j % n0)
                })
                .with_kind(kind)
            };
            let mut masks = vec![(
                "second_to_last_square".to_string(),
                both(Arc::clone(&single.stuck), "second_to_last_square"),
            )];
            if let Some(l) = &single.ladder {
                masks.push(("large_ladder".into(), both(Arc::clone(l), "large_ladder")));
            }
            masks.push((
                "game_length".into(),
                Mask::from_fn(n0 * n0, move |_, j| f64::from(u8::from(live(j))))
                    .with_kind("game_length"),
            ));
            let progress: Vec<f64> = single.squares.iter().map(|&s| s as f64).collect();
            masks.push((
                "lead_changes".into(),
                mask_lead_changes_2p(&classification, n0, Some(&progress))?
                    .with_kind("lead_changes"),
            ));
            masks.push((
                "first_player_advantage".into(),
                Mask::from_fn(n0 * n0, move |i, j| {
                    f64::from(u8::from(live(j) && i / n0 == f && i % n0 == f))
                })
                .with_kind("first_player_advantage"),
            ));
            masks.push((
                "first_player_wins".into(),
                Mask::from_fn(n0 * n0, move |i, j| f64::from(u8::from(live(j) && i / n0 == f)))
                    .with_kind("first_player_wins"),
            ));
            Ok(ChutesModel {
                board: board.clone(),
                players,
                chain,
                classification,
                start,
                masks,
            })
        }
        p => Err(Error::InvalidBoard(format!(
            "{p} players requested; only 1 or 2 are supported"
        ))),
    }
}
