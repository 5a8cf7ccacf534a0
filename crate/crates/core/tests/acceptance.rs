//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Run with `cargo test --test acceptance`.

mod common;

use std::collections::HashMap;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use markov_mask::chain::{classify_states, DistributionVector, StochasticChain};
use markov_mask::chutes::{build_chutes_chain, BoardSpec, ChutesModel};
use markov_mask::diagnostics::{
    condition_bounds, empirical_perturbation_check, gamma, stability_bounds, PerturbationOptions,
    DOUBLE_ROUNDOFF,
};
use markov_mask::engine::{
    cesaro_projector, expect, series_terms_for_tail, setup, time_average_expect,
    truncated_series_oracle, SetupCache, SetupOptions, TransientSystem,
};
use markov_mask::linalg::{CscMatrix, DenseMatrix};
use markov_mask::masks::{
    mask_absorption_probability, mask_arrivals, mask_departures, mask_distance,
    mask_steps_to_absorption, mask_transition_set, Mask,
};
use markov_mask::montecarlo::{estimate_cumulative_many, SimulationOptions};
use markov_mask::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome {
        pass,
        detail: detail.into(),
    })
}

fn any_mu(n: usize, seed: u64) -> DistributionVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mu: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
    let total: f64 = mu.iter().sum();
    DistributionVector::new(mu.into_iter().map(|x| x / total).collect(), 1e-12).unwrap()
}

fn transient_flags(chain: &StochasticChain) -> Vec<bool> {
    let k = classify_states(chain);
    (0..chain.n()).map(|j| k.is_transient(j)).collect()
}

fn oracle_equivalence() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let c = random_small_chain(1000 + seed);
        let k = classify_states(&c);
        let mask = random_mask(&c, &transient_flags(&c), seed);
        let mu = any_mu(c.n(), seed);
        let terms = series_terms_for_tail(&c, &k, &mask, 1e-12)?;
        let oracle = truncated_series_oracle(&c, &mu, &mask, terms)?;
        let psi = expect(&setup(&c, &k, &mu)?, &mask)?.value;
        worst = worst.max((psi - oracle).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= 1e-9 && secs < 5.0,
        format!("50 chains, max |engine - series| = {worst:.2e} (tol 1e-9), {secs:.2} s (limit 5 s)"),
    )
}

fn inverse_identities() -> Result<Outcome> {
    let mut worst_sqs: f64 = 0.0;
    let mut worst_qsq: f64 = 0.0;
    for seed in 0..50u64 {
        let c = random_absorbing_chain(1000 + seed);
        let k = classify_states(&c);
        let q = TransientSystem::new(&c, &k, SetupOptions::default())?.generalized_inverse();
        let s = identity_minus(&c.to_dense());
        worst_sqs = worst_sqs.max(s.matmul(&q).matmul(&s).max_abs_diff(&s));
        worst_qsq = worst_qsq.max(q.matmul(&s).matmul(&q).max_abs_diff(&q));
    }
    // Chains with larger closed classes: only the second identity is claimed.
    let mut worst_general: f64 = 0.0;
    for seed in 0..50u64 {
        let c = random_small_chain(1000 + seed);
        let k = classify_states(&c);
        let q = TransientSystem::new(&c, &k, SetupOptions::default())?.generalized_inverse();
        let s = identity_minus(&c.to_dense());
        worst_general = worst_general.max(q.matmul(&s).matmul(&q).max_abs_diff(&q));
    }
    outcome(
        worst_sqs <= 1e-10 && worst_qsq <= 1e-10 && worst_general <= 1e-10,
        format!(
            "50 absorbing chains: |SQS - S| = {worst_sqs:.2e}, |QSQ - Q| = {worst_qsq:.2e}; \
             50 reducible chains: |QSQ - Q| = {worst_general:.2e} (tol 1e-10)"
        ),
    )
}

fn cesaro_properties() -> Result<Outcome> {
    let mut worst = [0.0f64; 3];
    let mut periodic = 0;
    let mut cases = 0;
    let mut check = |c: &StochasticChain| -> Result<()> {
        let k = classify_states(c);
        let g = cesaro_projector(c, &k)?.to_dense();
        let n = c.n();
        worst[0] = worst[0].max(g.matmul(&g).max_abs_diff(&g));
        worst[1] = worst[1].max(identity_minus(&c.to_dense()).matmul(&g).max_abs_diff(&DenseMatrix::zeros(n, n)));
        for j in 0..n {
            let sum: f64 = g.column(j).iter().sum();
            let negative = g.column(j).iter().fold(0.0f64, |m, &x| m.max(-x));
            worst[2] = worst[2].max((sum - 1.0).abs()).max(negative);
        }
        cases += 1;
        Ok(())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for seed in 0..50u64 {
        let c = random_small_chain(2000 + seed);
        check(&c)?;
    }
    for _ in 0..25 {
        let t = rng.gen_range(0..=8);
        let shapes = [ClassShape::Cycle(rng.gen_range(2..=4)), ClassShape::Dense(rng.gen_range(1..=3))];
        let c = random_chain(&mut rng, t, &shapes);
        check(&c)?;
        periodic += 1;
    }
    check(&cycle2())?;
    let pass = worst.iter().all(|&w| w <= 1e-10);
    outcome(
        pass,
        format!(
            "{cases} chains ({} with a forced periodic class): |G^2 - G| = {:.2e}, |(I - T)G| = {:.2e}, \
             column sum / sign error = {:.2e} (tol 1e-10)",
            periodic + 1,
            worst[0],
            worst[1],
            worst[2]
        ),
    )
}

fn hand_values() -> Result<Outcome> {
    let mut rows = Vec::new();
    let mut pass = true;
    let mut record = |name: &str, got: f64, want: f64| {
        let err = (got - want).abs();
        pass &= err <= 1e-12;
        rows.push(format!("{name} {got} (err {err:.1e})"));
    };
    let c1 = c1();
    let k1 = classify_states(&c1);
    let s1 = setup(&c1, &k1, &DistributionVector::delta(2, 0))?;
    record("C1 steps", expect(&s1, &mask_steps_to_absorption(&k1)?)?.value, 2.0);

    let c5 = c5();
    let k5 = classify_states(&c5);
    let s5 = setup(&c5, &k5, &DistributionVector::delta(3, 0))?;
    record("C5 steps", expect(&s5, &mask_steps_to_absorption(&k5)?)?.value, 3.0);
    record("C5 arrivals t2", expect(&s5, &mask_arrivals(&k5, 1)?)?.value, 1.0);

    let c2 = c2();
    let k2 = classify_states(&c2);
    let s2 = setup(&c2, &k2, &DistributionVector::delta(3, 0))?;
    let class_of = |state: usize| k2.ergodic_class_of(state).unwrap();
    record("C2 absorb a1", expect(&s2, &mask_absorption_probability(&k2, class_of(1))?)?.value, 0.3);
    record("C2 absorb a2", expect(&s2, &mask_absorption_probability(&k2, class_of(2))?)?.value, 0.7);

    let cyc = cycle2();
    let kc = classify_states(&cyc);
    let g = cesaro_projector(&cyc, &kc)?;
    let vu = mask_transition_set(2, |i, j| i == 1 && j == 0, |_, _| 1.0);
    record(
        "cycle2 (v,u) average",
        time_average_expect(&cyc, &g, &DistributionVector::delta(2, 0), &vu)?.value,
        0.5,
    );
    outcome(pass, format!("{} (tol 1e-12)", rows.join("; ")))
}

/// Every mask builder that applies to the chain, each absorbing class and
/// each state as a target.
fn small_chain_masks(c: &StochasticChain) -> Result<Vec<Mask>> {
    let k = classify_states(c);
    let mut masks = vec![mask_steps_to_absorption(&k)?];
    for m in 0..k.ergodic_classes().len() {
        masks.push(mask_absorption_probability(&k, m)?);
    }
    for h in 0..c.n() {
        masks.push(mask_arrivals(&k, h)?);
        if k.is_transient(h) {
            masks.push(mask_departures(&k, h)?);
        }
    }
    let mut distances = HashMap::new();
    for j in 0..c.n() {
        for (i, _) in c.column(j) {
            distances.insert((j, i), 1.0 + (i as f64 - j as f64).abs());
        }
    }
    masks.push(mask_distance(c, &k, &distances)?);
    masks.push(mask_transition_set(c.n(), |i, j| i != j, |_, _| 1.0));
    Ok(masks)
}

fn simulate_and_score(
    chain: &StochasticChain,
    mu: &DistributionVector,
    masks: &[&Mask],
    paths: u64,
    seed: u64,
) -> Result<Vec<(String, f64, f64, f64)>> {
    let k = classify_states(chain);
    let s = setup(chain, &k, mu)?;
    let opts = SimulationOptions {
        n_paths: paths,
        seed,
        ..Default::default()
    };
    let est = estimate_cumulative_many(chain, &k, mu, masks, opts)?;
    masks
        .iter()
        .zip(est)
        .map(|(m, e)| {
            let exact = expect(&s, m)?.value;
            Ok((m.kind().to_string(), exact, e.mean, e.z_score(exact)))
        })
        .collect()
}

fn monte_carlo_agreement() -> Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (name, c) in [("C1", c1()), ("C2", c2()), ("C5", c5())] {
        let masks = small_chain_masks(&c)?;
        let refs: Vec<&Mask> = masks.iter().collect();
        let mu = DistributionVector::delta(c.n(), 0);
        for (kind, exact, mean, z) in simulate_and_score(&c, &mu, &refs, 1_000_000, 5)? {
            if !(z.abs() < 4.0) {
                println!("    {name} {kind}: exact {exact} mean {mean} z {z}");
            }
            worst = worst.max(z.abs());
            count += 1;
        }
    }
    let m = build_chutes_chain(&BoardSpec::standard(), 1)?;
    let refs: Vec<&Mask> = m.masks.iter().map(|(_, mask)| mask).collect();
    for (kind, exact, mean, z) in simulate_and_score(&m.chain, &m.start, &refs, 1_000_000, 5)? {
        if !(z.abs() < 4.0) {
            println!("    chutes {kind}: exact {exact} mean {mean} z {z}");
        }
        worst = worst.max(z.abs());
        count += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 4.0 && secs < 60.0,
        format!("{count} masks at 1e6 paths, max |z| = {worst:.2} (limit 4), {secs:.1} s (limit 60 s)"),
    )
}

/// Three significant digits: within half a unit in the third digit.
fn three_digits(got: f64, want: f64) -> bool {
    let unit = 10f64.powf(want.abs().log10().floor() - 2.0);
    (got - want).abs() <= 0.5 * unit
}

fn table_reproduction(two: &ChutesModel) -> Result<Outcome> {
    let one = build_chutes_chain(&BoardSpec::standard(), 1)?;
    let reference: [(&ChutesModel, &[(&str, f64)]); 2] = [
        (
            &one,
            &[("second_to_last_square", 1.2958), ("large_ladder", 0.5896), ("game_length", 39.598)],
        ),
        (
            two,
            &[
                ("second_to_last_square", 1.1166),
                ("large_ladder", 0.8180),
                ("game_length", 26.513),
                ("lead_changes", 3.9679),
                ("first_player_advantage", 0.0156),
                ("first_player_wins", 0.5078),
            ],
        ),
    ];
    let mut pass = true;
    let mut lines = Vec::new();
    for (model, rows) in reference {
        let s = setup(&model.chain, &model.classification, &model.start)?;
        let masks: Vec<&Mask> = rows.iter().map(|(name, _)| model.mask(name).unwrap()).collect();
        let opts = SimulationOptions {
            n_paths: 10_000_000,
            seed: 2024,
            ..Default::default()
        };
        let est = estimate_cumulative_many(&model.chain, &model.classification, &model.start, &masks, opts)?;
        for ((name, want), (mask, e)) in rows.iter().zip(masks.iter().zip(&est)) {
            let got = expect(&s, mask)?.value;
            let z = e.z_score(got);
            let ok = three_digits(got, *want) && z.abs() < 4.0;
            pass &= ok;
            lines.push(format!(
                "    {}p {name:<24} closed {got:<12.8} reference {want:<8} simulated {:.6} (z {z:+.2}) {}",
                model.players,
                e.mean,
                if ok { "ok" } else { "MISMATCH" }
            ));
        }
    }
    let b = BoardSpec::standard();
    let detail = format!(
        "standard board ({} squares, spinner 1-{}, overshoot {:?}, {} jumps), 3 significant digits and |z| < 4 at 1e7 paths\n{}",
        b.squares,
        b.spinner,
        b.overshoot,
        b.jumps.len(),
        lines.join("\n")
    );
    outcome(pass, detail)
}

fn min_time<T>(repeats: usize, mut f: impl FnMut() -> Result<T>) -> Result<Duration> {
    let mut best = Duration::MAX;
    for _ in 0..repeats {
        let start = Instant::now();
        std::hint::black_box(f()?);
        best = best.min(start.elapsed());
    }
    Ok(best)
}

/// `t` transient states with dense columns leaking 0.1 to one absorbing state.
fn dense_chain(t: usize, seed: u64) -> StochasticChain {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets = Vec::with_capacity(t * (t + 1) + 1);
    for j in 0..t {
        let w: Vec<f64> = (0..t).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = w.iter().sum();
        triplets.extend(w.iter().enumerate().map(|(i, x)| (i, j, 0.9 * x / total)));
        triplets.push((t, j, 0.1));
    }
    triplets.push((t, t, 1.0));
    StochasticChain::from_csc(CscMatrix::from_triplets(t + 1, t + 1, &triplets), None, Default::default())
        .unwrap()
}

/// 200 transient states, each column with `per_column` entries spread over
/// 8000 absorbing states and the transient block, plus a fixed leak.
fn wide_chain(per_column: usize, seed: u64) -> StochasticChain {
    let t = 200;
    let n = t + 8000;
    let sink = n - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut triplets = Vec::new();
    for j in 0..t {
        let targets = rand::seq::index::sample(&mut rng, sink, per_column);
        let w: Vec<f64> = (0..per_column).map(|_| rng.gen_range(0.01..1.0)).collect();
        let total: f64 = w.iter().sum();
        triplets.extend(targets.iter().zip(&w).map(|(i, x)| (i, j, 0.8 * x / total)));
        triplets.push((sink, j, 0.2));
    }
    for s in t..n {
        triplets.push((s, s, 1.0));
    }
    let m = CscMatrix::from_triplets(n, n, &triplets);
    StochasticChain::from_csc(m, None, Default::default()).unwrap()
}

fn complexity_scaling() -> Result<Outcome> {
    let mut setup_times = Vec::new();
    for t in [200, 400, 800] {
        let c = dense_chain(t, t as u64);
        let mu = DistributionVector::delta(c.n(), 0);
        let time = min_time(3, || {
            let k = classify_states(&c);
            setup(&c, &k, &mu)
        })?;
        setup_times.push((t, time.as_secs_f64()));
    }
    let mut mask_times = Vec::new();
    for per_column in [100, 200, 400, 800] {
        let c = wide_chain(per_column, per_column as u64);
        let k = classify_states(&c);
        let mu = DistributionVector::delta(c.n(), 0);
        let s = setup(&c, &k, &mu)?;
        let mask = mask_steps_to_absorption(&k)?;
        let time = min_time(30, || expect(&s, &mask))?;
        let nnz: usize = k.transient_states().iter().map(|&j| c.column(j).count()).sum();
        mask_times.push((nnz, time.as_secs_f64()));
    }
    let setup_growth: Vec<f64> = setup_times.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let mask_growth: Vec<f64> = mask_times.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let pass = setup_growth.iter().all(|&g| g <= 10.0) && mask_growth.iter().all(|&g| g <= 2.5);
    let fmt = |v: &[f64]| v.iter().map(|g| format!("{g:.2}")).collect::<Vec<_>>().join(", ");
    outcome(
        pass,
        format!(
            "setup t = 200/400/800: {} s, growth {} (limit 10); mask on {} nonzeros: {} ms, growth {} (limit 2.5)",
            setup_times.iter().map(|(_, s)| format!("{s:.3}")).collect::<Vec<_>>().join("/"),
            fmt(&setup_growth),
            mask_times.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>().join("/"),
            mask_times.iter().map(|(_, s)| format!("{:.3}", s * 1e3)).collect::<Vec<_>>().join("/"),
            fmt(&mask_growth)
        ),
    )
}

fn two_player_timing(model: &ChutesModel) -> Result<Outcome> {
    let start = Instant::now();
    let system = Arc::new(TransientSystem::new(&model.chain, &model.classification, SetupOptions::default())?);
    let s = SetupCache::from_system(system, model.start.as_slice())?;
    let setup_secs = start.elapsed().as_secs_f64();
    let mut slowest: f64 = 0.0;
    for (_, mask) in &model.masks {
        let t = Instant::now();
        expect(&s, mask)?;
        slowest = slowest.max(t.elapsed().as_secs_f64());
    }
    outcome(
        setup_secs < 60.0 && slowest < 1.0,
        format!(
            "{} states, {} transient: setup {setup_secs:.1} s (limit 60 s), slowest of {} masks {:.3} s (limit 1 s)",
            model.chain.n(),
            model.classification.transient_count(),
            model.masks.len(),
            slowest
        ),
    )
}

fn conditioning_harness() -> Result<Outcome> {
    let mut cases: Vec<(&str, StochasticChain, Box<dyn Fn(&_) -> Result<Mask>>)> = vec![
        ("C1 steps", c1(), Box::new(|k| mask_steps_to_absorption(k))),
        ("C5 steps", c5(), Box::new(|k| mask_steps_to_absorption(k))),
        ("C5 arrivals t2", c5(), Box::new(|k| mask_arrivals(k, 1))),
    ];
    for m in 0..2 {
        cases.push(("C2 absorption", c2(), Box::new(move |k| mask_absorption_probability(k, m))));
    }
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for (name, c, build) in &cases {
        let k = classify_states(c);
        let mask = build(&k)?;
        let mu = DistributionVector::delta(c.n(), 0);
        let r = empirical_perturbation_check(c, &k, &mask, &mu, 1e-8, PerturbationOptions::default())?;
        let b = &r.condition;
        for (ratio, bound) in [
            (r.ratio_m, b.kappa_m_bound),
            (r.ratio_m_aligned, b.kappa_m_bound),
            (r.ratio_t, b.kappa_t_bound),
            (r.ratio_mu, b.kappa_mu_bound),
        ] {
            worst = worst.max(ratio / bound);
        }
        if !r.within_bounds() {
            pass = false;
            println!("    {name}: {r:?}");
        }
    }
    let c = c1();
    let k = classify_states(&c);
    let s = setup(&c, &k, &DistributionVector::delta(2, 0))?;
    let mask = mask_steps_to_absorption(&k)?;
    let kappa = condition_bounds(&s, &mask, &expect(&s, &mask)?)?.kappa;
    let kappa_err = (kappa - 3f64.sqrt()).abs();
    pass &= kappa_err <= 1e-10;
    outcome(
        pass,
        format!(
            "{} cases at delta 1e-8, worst ratio / bound = {worst:.3} (limit 1.1); C1 steps kappa = {kappa} (|kappa - sqrt 3| = {kappa_err:.1e}, tol 1e-10)",
            cases.len()
        ),
    )
}

fn stability_report() -> Result<Outcome> {
    let u = DOUBLE_ROUNDOFF;
    let r = stability_bounds(2, 1, 1.0, u);
    let gt4 = 4.0 * u / (1.0 - 4.0 * u);
    let want = 2.0 * 2f64.sqrt() * gt4;
    let rel = ((r.delta_t_bound - want) / want).abs();
    let mut pass = rel <= 1e-15 && r.applicable && (r.gamma_tilde_n2 - gt4).abs() <= 1e-30;
    // First n where 1 - 4 sqrt(n) gamma~_{n^2} <= 0, found by bisection on
    // the independent formula.
    let margin = |n: f64| 1.0 - 4.0 * n.sqrt() * gamma(n * n, u);
    let (mut lo, mut hi) = (2u64, 1u64 << 40);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if margin(mid as f64) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let below = stability_bounds(lo as usize, 1, 1.0, u);
    let above = stability_bounds(hi as usize, 1, 1.0, u);
    pass &= below.applicable && !above.applicable && above.delta_t_bound.is_infinite();
    outcome(
        pass,
        format!(
            "n = 2, c = 1: deltaT = {:.6e}, expected 2 sqrt 2 gamma~_4 = {want:.6e} (rel err {rel:.1e}); applicable at n = {lo}, not at n = {hi}",
            r.delta_t_bound
        ),
    )
}

fn main() -> ExitCode {
    let start = Instant::now();
    let two = match build_chutes_chain(&BoardSpec::standard(), 2) {
        Ok(m) => m,
        Err(e) => {
            println!("FAIL  two-player model could not be built: {e}");
            return ExitCode::FAILURE;
        }
    };
    let criteria: Vec<(&str, Box<dyn Fn() -> Result<Outcome> + '_>)> = vec![
        ("oracle equivalence", Box::new(oracle_equivalence)),
        ("generalized inverse identities", Box::new(inverse_identities)),
        ("Cesaro projector properties", Box::new(cesaro_properties)),
        ("hand-value suite", Box::new(hand_values)),
        ("Monte Carlo agreement", Box::new(monte_carlo_agreement)),
        ("Chutes and Ladders table", Box::new(|| table_reproduction(&two))),
        ("complexity scaling", Box::new(complexity_scaling)),
        ("two-player end to end", Box::new(|| two_player_timing(&two))),
        ("conditioning harness", Box::new(conditioning_harness)),
        ("stability report", Box::new(stability_report)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let (pass, detail) = match check() {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("{} {:>2} {name}: {detail}", if pass { "PASS" } else { "FAIL" }, k + 1);
    }
    println!(
        "{} of {} criteria passed in {:.0} s",
        criteria.len() - failed,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
