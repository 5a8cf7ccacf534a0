//! Reading and writing chains, masks, distributions and boards.
//!
//! Chains are JSON documents
//!
//! ```json
//! {"orientation": "column", "states": ["t1", "a1"],
//!  "transitions": [{"from": "t1", "to": "t1", "p": 0.5}, {"from": 0, "to": 1, "p": 0.5}]}
//! ```
//!
//! or Matrix Market coordinate files with an optional `.labels` sidecar
//! (one label per line). A JSON chain may give a dense `"matrix"` instead of
//! `"transitions"`; `orientation` then says whether its columns (`column`)
//! or its rows (`row`) are the outgoing distributions. In a Matrix Market file
//! the entry `(i, j)` is the probability of moving from `j` to `i`, unless a
//! `% orientation: row` comment says it is from `i` to `j`.
//!
//! Floats are written in shortest round-trip form, so parsing a written
//! document reproduces every value bit for bit.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::chain::{
    classify_states, ChainOptions, DistributionVector, StateClassification, StochasticChain,
    DEFAULT_TOL,
};
use crate::chutes::{build_chutes_chain, BoardSpec};
use crate::linalg::CscMatrix;
use crate::masks::{
    mask_absorption_probability, mask_arrivals, mask_departures, mask_distance,
    mask_lead_changes_2p, mask_lead_changes_p, mask_steady_state_loop, mask_steps_to_absorption,
    mask_transition_set, LeadVariant, Mask,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// `T[i][j]` is the probability of moving from `j` to `i`.
    #[default]
    Column,
    /// Entry `(i, j)` is the probability of moving from `i` to `j`.
    Row,
}

/// A state given by position or by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateRef {
    Index(usize),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionEntry {
    from: StateRef,
    to: StateRef,
    p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChainDoc {
    #[serde(default)]
    orientation: Orientation,
    states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    transitions: Option<Vec<TransitionEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightEntry {
    from: StateRef,
    to: StateRef,
    w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum MaskDoc {
    Explicit {
        explicit: Vec<WeightEntry>,
    },
    Builder {
        kind: String,
        #[serde(default)]
        args: Value,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn json_error(source: &str, e: serde_json::Error) -> Error {
    Error::schema(
        format!("{source}:{}:{}", e.line(), e.column()),
        e.to_string(),
    )
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, source: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| json_error(source, e))
}

fn check_probability(p: f64, location: impl FnOnce() -> String) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::schema(
            location(),
            format!("probability {p} is outside [0, 1]"),
        ));
    }
    Ok(())
}

fn resolve(
    r: &StateRef,
    n: usize,
    names: &HashMap<&str, usize>,
    location: impl Fn() -> String,
) -> Result<usize> {
    match r {
        StateRef::Index(i) if *i < n => Ok(*i),
        StateRef::Index(i) => Err(Error::schema(
            location(),
            format!("state index {i} out of range for {n} states"),
        )),
        StateRef::Name(s) => names
            .get(s.as_str())
            .copied()
            .ok_or_else(|| Error::schema(location(), format!("unknown state {s:?}"))),
    }
}

fn name_index(labels: &[String]) -> HashMap<&str, usize> {
    labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.as_str(), i))
        .collect()
}

/// Values are kept as written: columns are checked against the default
/// tolerance but not rescaled.
fn chain_from_triplets(
    n: usize,
    triplets: &[(usize, usize, f64)],
    labels: Vec<String>,
) -> Result<StochasticChain> {
    StochasticChain::from_csc_inner(
        CscMatrix::from_triplets(n, n, triplets),
        Some(labels),
        ChainOptions::default(),
        false,
    )
}

/// Parses a chain document held in memory; `source` names it in errors.
pub fn chain_from_json(text: &str, source: &str) -> Result<StochasticChain> {
    let doc: ChainDoc = parse_json(text, source)?;
    let n = doc.states.len();
    let names = name_index(&doc.states);
    let mut triplets = Vec::new();
    match (&doc.transitions, &doc.matrix) {
        (Some(list), None) => {
            let mut seen = HashSet::new();
            for (k, t) in list.iter().enumerate() {
                let loc = |field: &str| format!("{source}: transitions[{k}].{field}");
                let j = resolve(&t.from, n, &names, || loc("from"))?;
                let i = resolve(&t.to, n, &names, || loc("to"))?;
                check_probability(t.p, || loc("p"))?;
                if !seen.insert((i, j)) {
                    return Err(Error::schema(loc("to"), "transition listed twice"));
                }
                triplets.push((i, j, t.p));
            }
        }
        (None, Some(rows)) => {
            if rows.len() != n {
                return Err(Error::schema(
                    format!("{source}: matrix"),
                    format!("{} rows for {n} states", rows.len()),
                ));
            }
            for (r, row) in rows.iter().enumerate() {
                if row.len() != n {
                    return Err(Error::schema(
                        format!("{source}: matrix[{r}]"),
                        format!("{} entries for {n} states", row.len()),
                    ));
                }
                for (c, &p) in row.iter().enumerate() {
                    check_probability(p, || format!("{source}: matrix[{r}][{c}]"))?;
                    if p != 0.0 {
                        triplets.push(match doc.orientation {
                            Orientation::Column => (r, c, p),
                            Orientation::Row => (c, r, p),
                        });
                    }
                }
            }
        }
        _ => {
            return Err(Error::schema(
                source,
                "give exactly one of \"transitions\" and \"matrix\"",
            ))
        }
    }
    chain_from_triplets(n, &triplets, doc.states)
}

/// Canonical chain document: column orientation, transitions listed column
/// by column with state labels.
pub fn chain_to_json(chain: &StochasticChain) -> String {
    let transitions = (0..chain.n())
        .flat_map(|j| {
            chain.column(j).filter(|&(_, p)| p != 0.0).map(move |(i, p)| TransitionEntry {
                from: StateRef::Name(chain.label(j).to_string()),
                to: StateRef::Name(chain.label(i).to_string()),
                p,
            })
        })
        .collect();
    let doc = ChainDoc {
        orientation: Orientation::Column,
        states: chain.labels().to_vec(),
        transitions: Some(transitions),
        matrix: None,
    };
    serde_json::to_string_pretty(&doc).expect("chain document serializes")
}

/// Path of the labels file that accompanies a Matrix Market file.
pub fn labels_sidecar(path: &Path) -> PathBuf {
    path.with_extension("labels")
}

/// Parses Matrix Market coordinate text. `labels` defaults to `s1..sn`.
pub fn chain_from_matrix_market(
    text: &str,
    labels: Option<Vec<String>>,
    source: &str,
) -> Result<StochasticChain> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::schema(format!("{source}:1"), "empty file"))?;
    let header: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if header.len() != 5
        || header[0] != "%%matrixmarket"
        || header[1] != "matrix"
        || header[2] != "coordinate"
        || header[4] != "general"
        || !matches!(header[3].as_str(), "real" | "double" | "integer")
    {
        return Err(Error::schema(
            format!("{source}:1"),
            "expected a real general coordinate matrix header",
        ));
    }
    let mut orientation = Orientation::Column;
    let mut size = None;
    let mut triplets = Vec::new();
    let mut seen = HashSet::new();
    for (k, line) in lines {
        let at = || format!("{source}:{}", k + 1);
        let line = line.trim();
        if let Some(comment) = line.strip_prefix('%') {
            let comment = comment.trim().to_lowercase();
            if let Some(o) = comment.strip_prefix("orientation:") {
                orientation = match o.trim() {
                    "row" => Orientation::Row,
                    "column" => Orientation::Column,
                    other => {
                        return Err(Error::schema(at(), format!("unknown orientation {other:?}")))
                    }
                };
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let Some((n, nnz)) = size else {
            let parsed: Vec<usize> = fields
                .iter()
                .map(|f| f.parse())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::schema(at(), "bad size line"))?;
            if parsed.len() != 3 || parsed[0] != parsed[1] {
                return Err(Error::schema(at(), "size line must be `n n nnz`"));
            }
            size = Some((parsed[0], parsed[2]));
            continue;
        };
        if fields.len() != 3 {
            return Err(Error::schema(at(), "entry must be `row col value`"));
        }
        let index = |f: &str| -> Result<usize> {
            match f.parse::<usize>() {
                Ok(v) if (1..=n).contains(&v) => Ok(v - 1),
                _ => Err(Error::schema(at(), format!("bad index {f:?}"))),
            }
        };
        let (r, c) = (index(fields[0])?, index(fields[1])?);
        let p: f64 = fields[2]
            .parse()
            .map_err(|_| Error::schema(at(), format!("bad value {:?}", fields[2])))?;
        check_probability(p, at)?;
        let (i, j) = match orientation {
            Orientation::Column => (r, c),
            Orientation::Row => (c, r),
        };
        if !seen.insert((i, j)) {
            return Err(Error::schema(at(), "entry listed twice"));
        }
        triplets.push((i, j, p));
        if triplets.len() > nnz {
            return Err(Error::schema(at(), "more entries than declared"));
        }
    }
    let (n, nnz) = size.ok_or_else(|| Error::schema(source, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(Error::schema(
            source,
            format!("declared {nnz} entries, found {}", triplets.len()),
        ));
    }
    let labels = labels.unwrap_or_else(|| (1..=n).map(|i| format!("s{i}")).collect());
    chain_from_triplets(n, &triplets, labels)
}

/// Matrix Market text in column orientation.
pub fn chain_to_matrix_market(chain: &StochasticChain) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str("% orientation: column\n");
    let entries: Vec<(usize, usize, f64)> = (0..chain.n())
        .flat_map(|j| chain.column(j).filter(|&(_, p)| p != 0.0).map(move |(i, p)| (i, j, p)))
        .collect();
    let _ = writeln!(out, "{} {} {}", chain.n(), chain.n(), entries.len());
    for (i, j, p) in entries {
        let _ = writeln!(out, "{} {} {p:?}", i + 1, j + 1);
    }
    out
}

/// Reads a chain from a `.mtx` file (with its sidecar if present) or from a
/// JSON document.
pub fn parse_chain(path: &Path) -> Result<StochasticChain> {
    let text = read(path)?;
    let source = path.display().to_string();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx")) {
        let sidecar = labels_sidecar(path);
        let labels = if sidecar.exists() {
            Some(read(&sidecar)?.lines().map(str::to_string).collect())
        } else {
            None
        };
        chain_from_matrix_market(&text, labels, &source)
    } else {
        chain_from_json(&text, &source)
    }
}

/// Writes a chain; `.mtx` paths get Matrix Market plus a labels sidecar.
pub fn write_chain(chain: &StochasticChain, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("mtx")) {
        write(path, &chain_to_matrix_market(chain))?;
        write(&labels_sidecar(path), &(chain.labels().join("\n") + "\n"))
    } else {
        write(path, &chain_to_json(chain))
    }
}

fn arg<'a>(args: &'a Value, key: &str, source: &str) -> Result<&'a Value> {
    args.get(key)
        .ok_or_else(|| Error::schema(format!("{source}: args.{key}"), "missing argument"))
}

fn arg_as<T: for<'de> Deserialize<'de>>(args: &Value, key: &str, source: &str) -> Result<T> {
    T::deserialize(arg(args, key, source)?)
        .map_err(|e| Error::schema(format!("{source}: args.{key}"), e.to_string()))
}

fn opt_arg<T: for<'de> Deserialize<'de>>(args: &Value, key: &str, source: &str) -> Result<Option<T>> {
    match args.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(_) => arg_as(args, key, source).map(Some),
    }
}

fn state_arg(
    args: &Value,
    key: &str,
    chain: &StochasticChain,
    source: &str,
) -> Result<usize> {
    let r: StateRef = arg_as(args, key, source)?;
    match r {
        StateRef::Index(i) if i < chain.n() => Ok(i),
        StateRef::Index(i) => Err(Error::UnknownState(format!("index {i}"))),
        StateRef::Name(s) => chain.state_index(&s),
    }
}

#[derive(Deserialize)]
struct DistanceEntry {
    from: StateRef,
    to: StateRef,
    d: f64,
}

#[derive(Deserialize)]
struct PairEntry {
    from: StateRef,
    to: StateRef,
}

/// Builds a mask from a `{"kind", "args"}` document. Kinds are the builder
/// names: `steps_to_absorption`, `absorption_probability` (`class` or
/// `state`), `arrivals`/`departures`/`steady_state_loop` (`state`),
/// `distance` (`distances: [{from, to, d}]`), `transition_set` (`pairs:
/// [{from, to}]` or `all: true`, optional `weight`), `lead_changes_2p`
/// (`n0`, optional `progress`), `lead_changes_p` (`n0`, `p`, `variant`,
/// optional `progress`) and `chutes` (`event`, `players`, optional `board`).
pub fn mask_from_builder(
    kind: &str,
    args: &Value,
    chain: &StochasticChain,
    cls: &StateClassification,
    source: &str,
) -> Result<Mask> {
    let names = name_index(chain.labels());
    let n = chain.n();
    let resolve_pair = |from: &StateRef, to: &StateRef, k: usize, field: &str| {
        let loc = || format!("{source}: args.{field}[{k}]");
        Ok::<_, Error>((resolve(from, n, &names, loc)?, resolve(to, n, &names, loc)?))
    };
    match kind {
        "steps_to_absorption" => mask_steps_to_absorption(cls),
        "absorption_probability" => {
            let m = match opt_arg::<usize>(args, "class", source)? {
                Some(m) => m,
                None => {
                    let s = state_arg(args, "state", chain, source)?;
                    cls.ergodic_class_of(s)
                        .ok_or_else(|| Error::NotAbsorbing(chain.label(s).to_string()))?
                }
            };
            mask_absorption_probability(cls, m)
        }
        "arrivals" => mask_arrivals(cls, state_arg(args, "state", chain, source)?),
        "departures" => mask_departures(cls, state_arg(args, "state", chain, source)?),
        "steady_state_loop" => mask_steady_state_loop(cls, state_arg(args, "state", chain, source)?),
        "distance" => {
            let list: Vec<DistanceEntry> = arg_as(args, "distances", source)?;
            let mut d = HashMap::new();
            for (k, e) in list.iter().enumerate() {
                d.insert(resolve_pair(&e.from, &e.to, k, "distances")?, e.d);
            }
            mask_distance(chain, cls, &d)
        }
        "transition_set" => {
            let weight = opt_arg::<f64>(args, "weight", source)?.unwrap_or(1.0);
            if opt_arg::<bool>(args, "all", source)?.unwrap_or(false) {
                return Ok(mask_transition_set(n, |_, _| true, move |_, _| weight));
            }
            let list: Vec<PairEntry> = arg_as(args, "pairs", source)?;
            let mut set = HashSet::new();
            for (k, e) in list.iter().enumerate() {
                let (j, i) = resolve_pair(&e.from, &e.to, k, "pairs")?;
                set.insert((i, j));
            }
            Ok(mask_transition_set(
                n,
                move |i, j| set.contains(&(i, j)),
                move |_, _| weight,
            ))
        }
        "lead_changes_2p" => {
            let n0: usize = arg_as(args, "n0", source)?;
            let progress: Option<Vec<f64>> = opt_arg(args, "progress", source)?;
            mask_lead_changes_2p(cls, n0, progress.as_deref())
        }
        "lead_changes_p" => {
            let n0: usize = arg_as(args, "n0", source)?;
            let p: usize = arg_as(args, "p", source)?;
            let variant: LeadVariant = arg_as(args, "variant", source)?;
            let progress: Option<Vec<f64>> = opt_arg(args, "progress", source)?;
            mask_lead_changes_p(cls, n0, p, variant, progress.as_deref())
        }
        "chutes" => {
            let event: String = arg_as(args, "event", source)?;
            let players: usize = arg_as(args, "players", source)?;
            let board: BoardSpec = opt_arg(args, "board", source)?.unwrap_or_else(BoardSpec::standard);
            let model = build_chutes_chain(&board, players)?;
            if model.chain.n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: model.chain.n(),
                });
            }
            model
                .mask(&event)
                .cloned()
                .ok_or_else(|| Error::schema(format!("{source}: args.event"), format!("unknown event {event:?}")))
        }
        other => Err(Error::schema(
            format!("{source}: kind"),
            format!("unknown mask kind {other:?}"),
        )),
    }
}

/// Parses a mask document held in memory for `chain`.
pub fn mask_from_json(
    text: &str,
    chain: &StochasticChain,
    cls: &StateClassification,
    source: &str,
) -> Result<Mask> {
    let doc: MaskDoc = parse_json(text, source)?;
    match doc {
        MaskDoc::Explicit { explicit } => {
            let n = chain.n();
            let names = name_index(chain.labels());
            let mut seen = HashSet::new();
            let mut triplets = Vec::with_capacity(explicit.len());
            for (k, e) in explicit.iter().enumerate() {
                let loc = |field: &str| format!("{source}: explicit[{k}].{field}");
                let j = resolve(&e.from, n, &names, || loc("from"))?;
                let i = resolve(&e.to, n, &names, || loc("to"))?;
                if !e.w.is_finite() {
                    return Err(Error::schema(loc("w"), "weight must be finite"));
                }
                if !seen.insert((i, j)) {
                    return Err(Error::schema(loc("to"), "weight listed twice"));
                }
                triplets.push((i, j, e.w));
            }
            Mask::explicit(CscMatrix::from_triplets(n, n, &triplets))
        }
        MaskDoc::Builder { kind, args } => mask_from_builder(&kind, &args, chain, cls, source),
    }
}

/// Reads a mask for `chain` from a JSON document.
pub fn parse_mask(path: &Path, chain: &StochasticChain) -> Result<Mask> {
    let cls = classify_states(chain);
    mask_from_json(&read(path)?, chain, &cls, &path.display().to_string())
}

/// Explicit mask document listing every nonzero weight the mask puts on the
/// chain's transitions, plus any explicit entries off them.
pub fn mask_to_json(mask: &Mask, chain: &StochasticChain) -> Result<String> {
    let m = mask.materialize(chain)?;
    let explicit: Vec<WeightEntry> = (0..m.ncols())
        .flat_map(|j| {
            m.column(j).filter(|&(_, w)| w != 0.0).map(move |(i, w)| WeightEntry {
                from: StateRef::Name(chain.label(j).to_string()),
                to: StateRef::Name(chain.label(i).to_string()),
                w,
            })
        })
        .collect();
    Ok(serde_json::to_string_pretty(&MaskDoc::Explicit { explicit }).expect("mask serializes"))
}

/// A builder document `{"kind", "args"}`.
pub fn builder_mask_json(kind: &str, args: Value) -> String {
    serde_json::to_string_pretty(&MaskDoc::Builder {
        kind: kind.to_string(),
        args,
    })
    .expect("mask serializes")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionDoc {
    mu: Value,
}

/// Parses `{"mu": [..]}` or `{"mu": {"label": p, ..}}`. Label maps need the
/// chain's labels; pass `None` to accept only the list form.
pub fn distribution_from_json(
    text: &str,
    labels: Option<&[String]>,
    source: &str,
) -> Result<DistributionVector> {
    let doc: DistributionDoc = parse_json(text, source)?;
    let loc = format!("{source}: mu");
    let mu = match doc.mu {
        Value::Array(_) => Vec::<f64>::deserialize(&doc.mu)
            .map_err(|e| Error::schema(&loc, e.to_string()))?,
        Value::Object(map) => {
            let labels = labels.ok_or_else(|| {
                Error::schema(&loc, "a label map needs the chain's state labels")
            })?;
            let names = name_index(labels);
            let mut mu = vec![0.0; labels.len()];
            for (k, v) in map {
                let i = *names
                    .get(k.as_str())
                    .ok_or_else(|| Error::schema(&loc, format!("unknown state {k:?}")))?;
                mu[i] = v
                    .as_f64()
                    .ok_or_else(|| Error::schema(format!("{loc}.{k}"), "expected a number"))?;
            }
            mu
        }
        _ => return Err(Error::schema(loc, "expected a list or a label map")),
    };
    if let Some(l) = labels {
        if l.len() != mu.len() {
            return Err(Error::DimensionMismatch {
                expected: l.len(),
                found: mu.len(),
            });
        }
    }
    DistributionVector::new(mu, DEFAULT_TOL)
}

/// Reads a list-form distribution document.
pub fn parse_distribution(path: &Path) -> Result<DistributionVector> {
    distribution_from_json(&read(path)?, None, &path.display().to_string())
}

/// Resolves a distribution argument against a chain: `uniform`,
/// `delta:LABEL`, or the path of a distribution document.
pub fn distribution_arg(spec: &str, chain: &StochasticChain) -> Result<DistributionVector> {
    if spec == "uniform" {
        return Ok(DistributionVector::uniform(chain.n()));
    }
    if let Some(label) = spec.strip_prefix("delta:") {
        return Ok(DistributionVector::delta(chain.n(), chain.state_index(label)?));
    }
    let path = Path::new(spec);
    distribution_from_json(&read(path)?, Some(chain.labels()), spec)
}

pub fn distribution_to_json(mu: &DistributionVector) -> String {
    let mut map = Map::new();
    map.insert("mu".into(), serde_json::to_value(mu.as_slice()).expect("floats serialize"));
    serde_json::to_string_pretty(&Value::Object(map)).expect("distribution serializes")
}

pub fn board_from_json(text: &str, source: &str) -> Result<BoardSpec> {
    let board: BoardSpec = parse_json(text, source)?;
    board.validate()?;
    Ok(board)
}

pub fn parse_board(path: &Path) -> Result<BoardSpec> {
    board_from_json(&read(path)?, &path.display().to_string())
}

pub fn board_to_json(board: &BoardSpec) -> String {
    serde_json::to_string_pretty(board).expect("board serializes")
}

/// Writes any text document, reporting the path on failure.
pub fn write_document(path: &Path, text: &str) -> Result<()> {
    write(path, text)
}

/// Label-keyed view of a distribution, for human-readable output.
pub fn distribution_by_label(
    mu: &DistributionVector,
    chain: &StochasticChain,
) -> BTreeMap<String, f64> {
    mu.as_slice()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p != 0.0)
        .map(|(i, &p)| (chain.label(i).to_string(), p))
        .collect()
}
