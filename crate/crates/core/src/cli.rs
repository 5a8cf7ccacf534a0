//! The `markov-mask` command line.
//!
//! Every subcommand prints JSON with full-precision floats; `--table` prints
//! aligned text rounded to six significant digits instead. Exit status is 0
//! on success, 2 for invalid input and 3 when a numerical step fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::chain::{classify_states, kron_compose, ClassKind, StateClassification, StochasticChain};
use crate::chutes::{build_chutes_chain, BoardSpec};
use crate::diagnostics::{
    condition_bounds, stability_bounds, DEFAULT_GAMMA_CONSTANT, DOUBLE_ROUNDOFF,
};
use crate::engine::{
    cesaro_projector_with, expect, time_average_expect, ExpectationResult, SetupCache,
    SetupOptions, TransientSystem,
};
use crate::io::{
    board_to_json, builder_mask_json, distribution_arg, distribution_to_json, parse_board,
    parse_chain, parse_mask, write_chain, write_document,
};
use crate::linalg::SolverKind;
use crate::masks::Mask;
use crate::montecarlo::{estimate_cumulative, estimate_time_average, SimulationOptions};
use crate::Result;

#[derive(Debug, Parser)]
#[command(name = "markov-mask", version, about = "Exact expectations of transition events on finite Markov chains")]
struct Cli {
    /// Print a rounded text table instead of JSON.
    #[arg(long, global = true)]
    table: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Partition the states into transient and ergodic classes.
    Classify { chain: PathBuf },
    /// Cumulative expectation of each mask before absorption.
    Analyze {
        chain: PathBuf,
        #[arg(required = true)]
        masks: Vec<PathBuf>,
        #[command(flatten)]
        mu: MuArg,
        /// Add condition numbers and the rounding-error bound.
        #[arg(long)]
        diagnostics: bool,
        #[arg(long, value_enum, default_value_t = SolverArg::Householder)]
        solver: SolverArg,
    },
    /// Long-run average of each mask per step.
    Steady {
        chain: PathBuf,
        #[arg(required = true)]
        masks: Vec<PathBuf>,
        #[command(flatten)]
        mu: MuArg,
    },
    /// Monte Carlo estimate of one mask.
    Simulate(SimArgs),
    /// Closed form against Monte Carlo, with the z-score of the difference.
    Compare(SimArgs),
    /// Composite chain of two independent chains.
    Kron {
        chain1: PathBuf,
        chain2: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Generate ready-made inputs.
    #[command(subcommand)]
    Example(Example),
}

#[derive(Debug, Args)]
struct MuArg {
    /// Initial distribution: a document path, `uniform` or `delta:LABEL`.
    #[arg(long)]
    mu: String,
}

#[derive(Debug, Args)]
struct SimArgs {
    chain: PathBuf,
    mask: PathBuf,
    #[command(flatten)]
    mu: MuArg,
    #[arg(long, default_value_t = 100_000)]
    paths: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Estimate the long-run average per step instead.
    #[arg(long, requires = "horizon")]
    time_average: bool,
    /// Steps averaged per path in time-average mode.
    #[arg(long)]
    horizon: Option<usize>,
    /// Step cap per path in cumulative mode (default 100 times the state count).
    #[arg(long)]
    max_steps: Option<usize>,
    /// Worker threads (default: MARKOV_MASK_THREADS, then all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Example {
    /// Chutes and Ladders chain, start distribution and event masks.
    Chutes {
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=2))]
        players: u8,
        /// Board document; the standard 100-square board by default.
        #[arg(long)]
        board: Option<PathBuf>,
        #[arg(short, long, default_value = "chutes")]
        output: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SolverArg {
    Householder,
    PivotFreeLu,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Householder => SolverKind::Householder,
            SolverArg::PivotFreeLu => SolverKind::PivotFreeLu,
        }
    }
}

/// Runs the command line with `args` (program name first) and returns the
/// exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
                return 2;
            }
            let _ = write!(out, "{text}");
            return 0;
        }
    };
    match execute(cli) {
        Ok(report) => {
            let _ = writeln!(out, "{report}");
            0
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}

/// Rounds to six significant digits for tables.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (5 - mag).max(0) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

fn table(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().filter_map(|r| r.get(c)).map(String::len).max().unwrap_or(0))
        .collect();
    rows.iter()
        .map(|r| {
            r.iter()
                .enumerate()
                .map(|(c, s)| format!("{s:<w$}", w = widths[c]))
                .collect::<Vec<_>>()
                .join("  ")
                .trim_end()
                .to_string()
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn labels(chain: &StochasticChain, states: &[usize]) -> Vec<String> {
    states.iter().map(|&s| chain.label(s).to_string()).collect()
}

fn load(chain: &Path) -> Result<(StochasticChain, StateClassification)> {
    let chain = parse_chain(chain)?;
    let cls = classify_states(&chain);
    Ok((chain, cls))
}

fn load_masks(paths: &[PathBuf], chain: &StochasticChain) -> Result<Vec<Mask>> {
    paths.iter().map(|p| parse_mask(p, chain)).collect()
}

fn execute(cli: Cli) -> Result<String> {
    let t = cli.table;
    match cli.command {
        Command::Classify { chain } => classify(&chain, t),
        Command::Analyze {
            chain,
            masks,
            mu,
            diagnostics,
            solver,
        } => analyze(&chain, &masks, &mu.mu, diagnostics, solver.into(), t),
        Command::Steady { chain, masks, mu } => steady(&chain, &masks, &mu.mu, t),
        Command::Simulate(args) => simulate(&args, t),
        Command::Compare(args) => compare(&args, t),
        Command::Kron {
            chain1,
            chain2,
            output,
        } => {
            let c = kron_compose(&parse_chain(&chain1)?, &parse_chain(&chain2)?)?;
            write_chain(&c, &output)?;
            let report = json!({"output": output, "states": c.n(), "transitions": c.nnz()});
            Ok(if t {
                format!("wrote {} ({} states, {} transitions)", output.display(), c.n(), c.nnz())
            } else {
                to_json(&report)
            })
        }
        Command::Example(Example::Chutes {
            players,
            board,
            output,
        }) => chutes_example(usize::from(players), board.as_deref(), &output, t),
    }
}

fn classify(path: &Path, t: bool) -> Result<String> {
    let (chain, cls) = load(path)?;
    let classes: Vec<Value> = cls
        .classes()
        .iter()
        .map(|c| json!({"kind": c.kind, "states": labels(&chain, &c.states), "leak": c.leak}))
        .collect();
    if t {
        let mut rows = vec![vec!["class".into(), "kind".into(), "size".into(), "states".into()]];
        for (k, c) in cls.classes().iter().enumerate() {
            let kind = match c.kind {
                ClassKind::Transient => "transient",
                ClassKind::Ergodic => "ergodic",
            };
            let mut names = labels(&chain, &c.states);
            if names.len() > 8 {
                names.truncate(8);
                names.push("...".into());
            }
            rows.push(vec![k.to_string(), kind.into(), c.states.len().to_string(), names.join(" ")]);
        }
        let mut text = table(&rows);
        for w in cls.warnings() {
            text.push_str(&format!("\nwarning: {w}"));
        }
        return Ok(text);
    }
    Ok(to_json(&json!({
        "states": chain.n(),
        "transient": cls.transient_count(),
        "ergodic_states": cls.ergodic_count(),
        "ergodic_classes": cls.ergodic_classes().len(),
        "absorbing": labels(&chain, &cls.absorbing_states()),
        "canonical_order": labels(&chain, cls.canonical_order()),
        "classes": classes,
        "warnings": cls.warnings(),
    })))
}

fn result_rows(paths: &[PathBuf], results: &[ExpectationResult]) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["mask".into(), "kind".into(), "value".into()]];
    for (p, r) in paths.iter().zip(results) {
        rows.push(vec![p.display().to_string(), r.mask_kind.clone(), sig6(r.value)]);
    }
    rows
}

fn analyze(
    chain_path: &Path,
    mask_paths: &[PathBuf],
    mu: &str,
    diagnostics: bool,
    solver: SolverKind,
    t: bool,
) -> Result<String> {
    let (chain, cls) = load(chain_path)?;
    let masks = load_masks(mask_paths, &chain)?;
    let mu = distribution_arg(mu, &chain)?;
    let system = Arc::new(TransientSystem::new(&chain, &cls, SetupOptions { solver })?);
    let setup = SetupCache::from_system(system, mu.as_slice())?;
    let mut results = Vec::with_capacity(masks.len());
    let mut reports = Vec::new();
    for m in &masks {
        let r = expect(&setup, m)?;
        if diagnostics {
            reports.push(condition_bounds(&setup, m, &r)?);
        }
        results.push(r);
    }
    let stability = stability_bounds(chain.n(), cls.transient_count(), DEFAULT_GAMMA_CONSTANT, DOUBLE_ROUNDOFF)
        .with_solver(setup.solver());
    if t {
        let mut rows = result_rows(mask_paths, &results);
        if diagnostics {
            rows[0].extend(["kappa".into(), "kappa_T".into(), "kappa_mu".into()]);
            for (row, c) in rows[1..].iter_mut().zip(&reports) {
                row.extend([sig6(c.kappa), sig6(c.kappa_t_bound), sig6(c.kappa_mu_bound)]);
            }
        }
        let mut text = table(&rows);
        if diagnostics {
            text.push_str(&format!(
                "\nstability: deltaT <= {}, deltaM <= {}, applicable = {}",
                sig6(stability.delta_t_bound),
                sig6(stability.delta_m_bound),
                stability.applicable
            ));
        }
        return Ok(text);
    }
    let entries: Vec<Value> = mask_paths
        .iter()
        .zip(&results)
        .enumerate()
        .map(|(k, (p, r))| {
            let mut v = json!({"mask": p, "kind": r.mask_kind, "mode": r.mode, "value": r.value});
            if let Some(c) = reports.get(k) {
                v["condition"] = serde_json::to_value(c).expect("report serializes");
            }
            v
        })
        .collect();
    let mut report = json!({
        "states": chain.n(),
        "transient": cls.transient_count(),
        "solver": setup.solver(),
        "residual": setup.residual(),
        "results": entries,
    });
    if diagnostics {
        report["stability"] = serde_json::to_value(&stability).expect("report serializes");
    }
    Ok(to_json(&report))
}

fn steady(chain_path: &Path, mask_paths: &[PathBuf], mu: &str, t: bool) -> Result<String> {
    let (chain, cls) = load(chain_path)?;
    let masks = load_masks(mask_paths, &chain)?;
    let mu = distribution_arg(mu, &chain)?;
    let system = Arc::new(TransientSystem::new(&chain, &cls, SetupOptions::default())?);
    let projector = cesaro_projector_with(&system)?;
    let results = masks
        .iter()
        .map(|m| time_average_expect(&chain, &projector, &mu, m))
        .collect::<Result<Vec<_>>>()?;
    if t {
        return Ok(table(&result_rows(mask_paths, &results)));
    }
    let entries: Vec<Value> = mask_paths
        .iter()
        .zip(&results)
        .map(|(p, r)| json!({"mask": p, "kind": r.mask_kind, "mode": r.mode, "value": r.value}))
        .collect();
    Ok(to_json(&json!({"states": chain.n(), "results": entries})))
}

struct Simulated {
    chain: StochasticChain,
    cls: StateClassification,
    mu: crate::chain::DistributionVector,
    mask: Mask,
    estimate: crate::montecarlo::SimulationEstimate,
}

fn run_simulation(a: &SimArgs) -> Result<Simulated> {
    let (chain, cls) = load(&a.chain)?;
    let mask = parse_mask(&a.mask, &chain)?;
    let mu = distribution_arg(&a.mu.mu, &chain)?;
    let opts = SimulationOptions {
        n_paths: a.paths,
        seed: a.seed,
        max_steps: a.max_steps,
        threads: a.threads,
    };
    let estimate = match (a.time_average, a.horizon) {
        (true, Some(h)) => estimate_time_average(&chain, &mu, &mask, h, opts)?,
        _ => estimate_cumulative(&chain, &cls, &mu, &mask, opts)?,
    };
    Ok(Simulated {
        chain,
        cls,
        mu,
        mask,
        estimate,
    })
}

fn simulate(a: &SimArgs, t: bool) -> Result<String> {
    let e = run_simulation(a)?.estimate;
    if t {
        return Ok(table(&[
            vec!["mean".into(), "stderr".into(), "paths".into(), "seed".into(), "truncations".into()],
            vec![
                sig6(e.mean),
                sig6(e.stderr),
                e.n_paths.to_string(),
                e.seed.to_string(),
                e.truncations.to_string(),
            ],
        ]));
    }
    Ok(to_json(&e))
}

fn compare(a: &SimArgs, t: bool) -> Result<String> {
    let s = run_simulation(a)?;
    let system = Arc::new(TransientSystem::new(&s.chain, &s.cls, SetupOptions::default())?);
    let exact = if a.time_average {
        time_average_expect(&s.chain, &cesaro_projector_with(&system)?, &s.mu, &s.mask)?.value
    } else {
        expect(&SetupCache::from_system(system, s.mu.as_slice())?, &s.mask)?.value
    };
    let z = s.estimate.z_score(exact);
    if t {
        return Ok(table(&[
            vec!["closed_form".into(), "mean".into(), "stderr".into(), "z".into()],
            vec![sig6(exact), sig6(s.estimate.mean), sig6(s.estimate.stderr), sig6(z)],
        ]));
    }
    let mut report = serde_json::to_value(&s.estimate).expect("estimate serializes");
    report["closed_form"] = json!(exact);
    report["z"] = json!(z);
    Ok(to_json(&report))
}

fn chutes_example(players: usize, board: Option<&Path>, dir: &Path, t: bool) -> Result<String> {
    let board = match board {
        Some(p) => parse_board(p)?,
        None => BoardSpec::standard(),
    };
    let model = build_chutes_chain(&board, players)?;
    let masks_dir = dir.join("masks");
    std::fs::create_dir_all(&masks_dir)?;
    let chain_path = dir.join("chain.json");
    write_chain(&model.chain, &chain_path)?;
    write_document(&dir.join("start.json"), &distribution_to_json(&model.start))?;
    write_document(&dir.join("board.json"), &board_to_json(&board))?;
    let mut written = Vec::new();
    for (name, _) in &model.masks {
        let path = masks_dir.join(format!("{name}.json"));
        let doc = builder_mask_json(
            "chutes",
            json!({"event": name, "players": players, "board": board}),
        );
        write_document(&path, &doc)?;
        written.push(path);
    }
    if t {
        let mut text = format!(
            "wrote {} ({} states) and {} masks under {}",
            chain_path.display(),
            model.chain.n(),
            written.len(),
            dir.display()
        );
        for p in &written {
            text.push_str(&format!("\n  {}", p.display()));
        }
        return Ok(text);
    }
    Ok(to_json(&json!({
        "chain": chain_path,
        "states": model.chain.n(),
        "start": dir.join("start.json"),
        "masks": written,
    })))
}
