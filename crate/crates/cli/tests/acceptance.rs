//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use asymdens::constructions::{
    canonical_sparse_set, diagonal_set, disrupting_permutation, disruption_checkpoints, jk_set,
    jk_set_check, to_density_permutation, to_oscillation_permutation_with, tracking_deviation,
    JKSetSpec, JkLevel, OscillationConfig,
};
use asymdens::density::{
    estimate_density, estimate_from_bits, half_crossings, image_set, rat, to_f64, EstimateConfig,
};
use asymdens::partition::IntervalPartition;
use asymdens::perms::LazyPermutation;
use asymdens::preservation::{
    condition_a_check, condition_b_check, counterexample_blocks, max_interval_count,
};
use asymdens::reductions::{
    bernoulli_density_sample, covmeager_extension_game, reduction_by_name, reaping_phi_plus,
    run_harness, trial_seed, unbounding_osc_witness, unbounding_phi_plus, Direction,
};
use asymdens::series::{
    cesaro_mean, mean_rearrange, pattern_rearrange, riemann_rearrange, sparse_embed,
    RearrangementTarget, SeriesSpec,
};
use asymdens::LazySet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;

const SEED: u64 = 20_240_601;

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let (ok, detail) = f()?;
    let took = start.elapsed();
    match limit {
        Some(l) => Ok((ok && took < l, format!("{detail}; {took:.2?} (limit {l:?})"))),
        None => Ok((ok, format!("{detail}; {took:.2?}"))),
    }
}

fn c1_sparse() -> Outcome {
    let e = estimate_density(&canonical_sparse_set(), 1 << 20, rat(1, 100), rat(1, 4)).map_err(err)?;
    Ok((e.value() == Some(&rat(0, 1)), format!("{:?}", e.verdict)))
}

fn c2_diagonal() -> Outcome {
    let h = 1 << 18;
    let mut fam = vec![LazyPermutation::identity()];
    for i in 0..10u64 {
        fam.push(LazyPermutation::block_shuffle(trial_seed(SEED, i), 16 << (i % 4), 0));
    }
    let w = diagonal_set(&fam, h).map_err(err)?;
    w.audit().map_err(err)?;
    for pi in &fam {
        let e = estimate_density(&image_set(pi, &w.set, h), h, rat(1, 100), rat(1, 4)).map_err(err)?;
        if e.value() != Some(&rat(0, 1)) {
            return Ok((false, format!("{}: {:?}", pi.label(), e.verdict)));
        }
    }
    Ok((true, format!("{} images Value(0)", fam.len())))
}

fn c3_steering() -> Outcome {
    let h = 1_000_000u64;
    let cfg = EstimateConfig::default();
    let sets = [
        LazySet::evens(),
        LazySet::bernoulli(1, 2, SEED).labeled("bernoulli(1/2)"),
    ];
    let targets = [rat(0, 1), rat(1, 3), rat(1, 2), rat(9, 10), rat(1, 1)];
    let mut value_ok = true;
    let mut tracking_ok = true;
    let mut notes = Vec::new();
    for a in &sets {
        for r in &targets {
            let sp = to_density_permutation(a, r, h).map_err(err)?;
            let bits = image_set(&sp.permutation, a, h).bits_below(h).map_err(err)?;
            let e = estimate_from_bits(&bits, h, &cfg).map_err(err)?;
            let near = e.is_value_near(r, &rat(1, 100));
            let dev = tracking_deviation(&bits, r);
            value_ok &= near;
            if dev > 1 {
                tracking_ok = false;
                notes.push(format!("{}→{r}: deviation {dev}", a.label()));
            }
            if !near {
                notes.push(format!("{}→{r}: {:?}", a.label(), e.verdict));
            }
        }
    }
    let detail = format!(
        "values within 0.01: {value_ok}; exact tracking ≤ 1: {tracking_ok}{}",
        if notes.is_empty() {
            String::new()
        } else {
            format!(" ({}; no bijection tracks r ∈ {{0,1}} within a constant)", notes.join(", "))
        }
    );
    Ok((value_ok && tracking_ok, detail))
}

fn c4_oscillation() -> Outcome {
    let h = 1u64 << 18;
    let a = LazySet::evens();
    let osc_cfg = OscillationConfig {
        lo: rat(1, 20),
        hi: rat(19, 20),
    };
    let op = to_oscillation_permutation_with(&a, h, &osc_cfg).map_err(err)?;
    let bits = image_set(&op.permutation, &a, h).bits_below(h).map_err(err)?;
    let cfg = EstimateConfig::default().with_burn_in_divisor(512);
    let e = estimate_from_bits(&bits, h, &cfg).map_err(err)?;
    let crossings = half_crossings(&bits, h);
    let osc_ok = e.is_osc() && e.tail_min <= rat(1, 10) && e.tail_max >= rat(9, 10) && crossings >= 4;

    let pi = LazyPermutation::seeded_finitary(SEED);
    let g = {
        let pi = pi.clone();
        move |n: u64| unbounding_phi_plus(&pi, n).ok().flatten().map(|v| v + 1)
    };
    let rep = unbounding_osc_witness(&pi, &g, h).map_err(err)?;
    let unb_ok = rep.verdict.is_confirmed();
    Ok((
        osc_ok && unb_ok,
        format!(
            "oscillation permutation: {:?}, {crossings} crossings (burn-in h/512); \
             unbounding witness: boundaries {:?}, image {} (the next boundary is at least 2^{})",
            e.verdict,
            rep.boundaries,
            rep.image_verdict,
            rep.boundaries.last().copied().unwrap_or(0)
        ),
    ))
}

fn harness_all_confirmed(name: &str, trials: u64, horizon: u64) -> Outcome {
    let pair = reduction_by_name(name).ok_or("missing reduction")?;
    let rep = run_harness(&pair, trials, horizon, SEED).map_err(err)?;
    let first_bad = rep
        .witnesses
        .iter()
        .find(|w| !w.verdict.is_confirmed())
        .map(|w| format!("; first non-confirmed: trial {} {:?}", w.trial, w.verdict))
        .unwrap_or_default();
    Ok((
        rep.confirmed == trials && rep.refuted == 0,
        format!(
            "{} confirmed, {} inconclusive, {} refuted{first_bad}",
            rep.confirmed, rep.inconclusive, rep.refuted
        ),
    ))
}

fn c7_extension_game() -> Outcome {
    let mut steps = 0usize;
    for t in 0..20u64 {
        let seed = trial_seed(SEED, t);
        let pi = LazyPermutation::seeded_finitary(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<bool> = (0..rng.gen_range(0..8)).map(|_| rng.gen()).collect();
        let n0 = rng.gen_range(1..16);
        for dir in [Direction::AtLeast, Direction::AtMost] {
            let out = covmeager_extension_game(&pi, &s, n0, 1 << 16, dir).map_err(err)?;
            let every_step = out.steps.iter().all(|st| match dir {
                Direction::AtLeast => 2 * st.c >= st.d,
                Direction::AtMost => 2 * st.c <= st.d,
            });
            steps += out.steps.len();
            if !(out.identity_holds && every_step) {
                return Ok((false, format!("trial {t} {dir:?} failed")));
            }
        }
    }
    Ok((true, format!("40 games, {steps} logged steps")))
}

fn c8_reaping() -> Outcome {
    let h = 1_000_000u64;
    let a = LazySet::evens();
    let z = LazySet::evens();
    let mut parts = Vec::new();
    let mut ok = true;
    for (y, want) in [
        (LazySet::arithmetic(0, 4), rat(3, 4)),
        (LazySet::arithmetic(1, 4), rat(1, 4)),
    ] {
        let map = reaping_phi_plus(&y, &z, h).map_err(err)?;
        let bits = image_set(&map.permutation, &a, h).bits_below(h).map_err(err)?;
        let e = estimate_from_bits(&bits, h, &EstimateConfig::new(rat(1, 50), rat(1, 4))).map_err(err)?;
        let near = e.is_value_near(&want, &rat(1, 50));
        ok &= near;
        parts.push(format!("{} → {:?} (want {want})", y.label(), e.verdict));
    }
    Ok((ok, parts.join("; ")))
}

fn c9_disruption() -> Outcome {
    let partition = IntervalPartition::superincreasing(6_235_301);
    let a = jk_set(&partition, 1, 3, JkLevel::Upper);
    let spec = JKSetSpec::new(1, 3, partition.clone(), 1).map_err(err)?;
    let pi = disrupting_permutation(&a, &spec, |_| true, partition.end()).map_err(err)?;
    let rows = disruption_checkpoints(&a, &pi, &spec, &|_| true).map_err(err)?;
    let high: Vec<String> = rows
        .iter()
        .filter(|r| r.ratio() > rat(9, 10))
        .map(|r| format!("I_{}:{:.4}", r.interval, to_f64(&r.ratio())))
        .collect();
    let image = image_set(&pi, &a, partition.end());
    let check = jk_set_check(&image, &spec, partition.len()).map_err(err)?;
    Ok((
        high.len() >= 5 && check.passed(),
        format!("{} checkpoints > 0.9 [{}]; image (1,3)-check {:?}", high.len(), high.join(", "), check),
    ))
}

fn c10_conditions() -> Outcome {
    let h = 1u64 << 12;
    let mut family: Vec<LazyPermutation> = (0..20)
        .map(|i| LazyPermutation::seeded_finitary(trial_seed(SEED, i)))
        .collect();
    family.extend((0..4).map(|i| LazyPermutation::block_shuffle(trial_seed(SEED, 100 + i), 8 << i, 0)));
    family.push(LazyPermutation::pair_swap());
    family.push(LazyPermutation::dyadic_reversal());
    family.push(counterexample_blocks(3).map_err(err)?.permutation);
    let mut checks = 0;
    for pi in &family {
        let (max, _) = max_interval_count(pi, h).map_err(err)?;
        for k in 1..=max + 1 {
            let a = condition_a_check(pi, k, h).map_err(err)?;
            if a.is_pass() != (max <= k) {
                return Ok((false, format!("{}: A at k = {k} disagrees with max count {max}", pi.label())));
            }
            let b = condition_b_check(pi, k, h).map_err(err)?;
            if b.is_pass() && !condition_a_check(pi, 2 * k + 1, h).map_err(err)?.is_pass() {
                return Ok((false, format!("{}: B passes at {k} but A fails at {}", pi.label(), 2 * k + 1)));
            }
            checks += 1;
        }
    }
    let id = LazyPermutation::identity();
    let id_ok = condition_a_check(&id, 1, h).map_err(err)?.is_pass()
        && condition_b_check(&id, 1, h).map_err(err)?.is_pass();
    Ok((
        id_ok,
        format!(
            "{} permutations, {checks} (π, k) pairs: A ⇔ max interval count ≤ k, B at k ⇒ A at 2k+1; identity passes both at k = 1: {id_ok}",
            family.len()
        ),
    ))
}

fn c11_counterexample() -> Outcome {
    let ce = counterexample_blocks(5).map_err(err)?;
    ce.audit().map_err(err)?;
    let rows = ce.checkpoint_rows().map_err(err)?;
    let exact = rows.iter().all(|r| {
        r.ratio()
            == if r.kind == "peak" {
                rat(2, 3)
            } else {
                rat(1, 2)
            }
    });
    let profile = ce.source_profile().map_err(err)?;
    let burn_in = ce.end() / 4;
    let half = rat(1, 2);
    let worst = (0..profile.len())
        .filter(|&i| profile.checkpoints[i] >= burn_in)
        .map(|i| to_f64(&(profile.value(i) - &half)).abs())
        .fold(0.0f64, f64::max);
    Ok((
        exact && worst <= 0.02,
        format!(
            "{} rows exact: {exact}; max |d_B(A) − 1/2| on tail checkpoints: {worst:.5}",
            rows.len()
        ),
    ))
}

fn c12_riemann() -> Outcome {
    let h = 1_000_000u64;
    let s = SeriesSpec::alternating_harmonic();
    let r0 = riemann_rearrange(&s, RearrangementTarget::Finite { r: 0.0 }, h).map_err(err)?;
    r0.audit().map_err(err)?;
    let zero_ok = r0.final_sum().abs() <= 0.01;
    let pat = pattern_rearrange(&s, 1, 2, h).map_err(err)?;
    pat.audit().map_err(err)?;
    let half = 0.5 * s.partial_sum(h).map_err(err)?;
    let pat_ok = (pat.final_sum() - half).abs() <= 0.005;
    let osc = riemann_rearrange(&s, RearrangementTarget::Oscillation { lo: 0.0, hi: 1.0 }, h)
        .map_err(err)?;
    osc.audit().map_err(err)?;
    let late: Vec<_> = osc.boundaries.iter().filter(|b| b.position >= 100).collect();
    let worst = late
        .iter()
        .map(|b| (b.partial_sum - b.goal).abs())
        .fold(0.0f64, f64::max);
    let osc_ok = late.len() >= 2 && worst <= 0.05;
    Ok((
        zero_ok && pat_ok && osc_ok,
        format!(
            "target 0: {:.6}; pattern (1,2): {:.6} vs half-sum {half:.6}; oscillation: {} boundaries past position 100, max distance to pole {worst:.5}",
            r0.final_sum(),
            pat.final_sum(),
            late.len()
        ),
    ))
}

fn c13_mean() -> Outcome {
    let h = 1_000_000u64;
    let signs = SeriesSpec::alternating_signs();
    let out = mean_rearrange(&signs, 0.5, h).map_err(err)?;
    let audit = out.audit(&signs).map_err(err).is_ok();
    let m1 = out.mean();
    let x: Vec<f64> = (0..h).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let y: Vec<f64> = (0..10_000).map(|n| n as f64).collect();
    let e = sparse_embed(&x, &y, h).map_err(err)?;
    let m2 = cesaro_mean(&e.values);
    Ok((
        (m1 - 0.5).abs() <= 0.02 && m2.abs() <= 0.02 && audit,
        format!(
            "mean to 1/2: {m1:.5}; embedded y_n = n ({} terms): {m2:.5}; conservation audit: {audit}",
            e.embedded
        ),
    ))
}

fn c14_monte_carlo() -> Outcome {
    let pi = LazyPermutation::seeded_finitary(SEED);
    let stats = bernoulli_density_sample(&rat(1, 2), 200, 1 << 16, SEED, &rat(1, 50), &pi).map_err(err)?;
    Ok((
        stats.fraction() >= 0.95 && stats.fraction_permuted() >= 0.95,
        format!(
            "{}/200 before, {}/200 after {}",
            stats.within,
            stats.within_permuted,
            pi.label()
        ),
    ))
}

fn run_cli(bin: &Path, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin).args(args).output().map_err(err)?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {}: {}",
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(())
}

fn c15_determinism() -> Outcome {
    let bin = PathBuf::from(env!("CARGO_BIN_EXE_asymdens"));
    let dir = std::env::temp_dir().join(format!("asymdens-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(err)?;
    let seed = SEED.to_string();
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("density", vec!["density", "--set", "sparse", "--horizon", "1048576", "--emit", "csv"]),
        ("steer", vec!["permute", "--set", "evens", "--steer", "1/3", "--horizon", "100000"]),
        ("oscillate", vec!["permute", "--set", "evens", "--oscillate", "--horizon", "65536", "--emit", "csv"]),
        ("slalom", vec!["reduce", "--reduction", "slalom", "--trials", "50", "--seed", &seed]),
        ("banakh", vec!["reduce", "--reduction", "banakh", "--trials", "50", "--seed", &seed]),
        ("covnull", vec!["reduce", "--reduction", "covnull", "--trials", "20", "--seed", &seed, "--horizon", "65536"]),
        ("check-b", vec!["preserve", "--check", "b", "--k", "4", "--perm", "finitary", "--seed", &seed]),
        ("counterexample", vec!["preserve", "--counterexample", "--depth", "5", "--emit", "csv"]),
        ("riemann", vec!["rearrange", "--series", "altharm", "--target", "osc:0,1", "--horizon", "100000", "--emit", "csv"]),
        ("mean", vec!["rearrange", "--series", "signs", "--mean", "0.5", "--horizon", "100000"]),
    ];
    for (name, args) in &runs {
        let first = dir.join(format!("{name}.out"));
        let second = dir.join(format!("{name}.again"));
        let mut a1 = args.clone();
        let p1 = first.to_string_lossy().to_string();
        a1.extend(["--out", &p1]);
        run_cli(&bin, &a1)?;
        let manifest = format!("{p1}.manifest.json");
        let replay = dir.join(format!("{name}.replay"));
        let pr = replay.to_string_lossy().to_string();
        run_cli(&bin, &["verify", "--manifest", &manifest, "--out", &pr])?;
        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(&replay).map_err(err)?).map_err(err)?;
        if report["identical"] != serde_json::Value::Bool(true) {
            return Ok((false, format!("{name}: manifest replay digest differs")));
        }
        let mut a2 = args.clone();
        let p2 = second.to_string_lossy().to_string();
        a2.extend(["--out", &p2]);
        run_cli(&bin, &a2)?;
        if std::fs::read(&first).map_err(err)? != std::fs::read(&second).map_err(err)? {
            return Ok((false, format!("{name}: artifacts differ between runs")));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok((true, format!("{} runs replayed from manifests with identical digests and bytes", runs.len())))
}

fn main() {
    let criteria: Vec<(u32, &str, Option<u64>, fn() -> Outcome)> = vec![
        (1, "sparse set", Some(1), c1_sparse),
        (2, "diagonalization", Some(10), c2_diagonal),
        (3, "density steering", None, c3_steering),
        (4, "oscillation", None, c4_oscillation),
        (5, "slalom reduction", None, || harness_all_confirmed("slalom", 50, 1 << 16)),
        (6, "banakh reduction", None, || harness_all_confirmed("banakh", 50, 1 << 16)),
        (7, "extension game", None, c7_extension_game),
        (8, "reaping map", None, c8_reaping),
        (9, "disruption", None, c9_disruption),
        (10, "conditions A and B", None, c10_conditions),
        (11, "block counterexample", Some(30), c11_counterexample),
        (12, "riemann rearrangement", None, c12_riemann),
        (13, "mean rearrangement", None, c13_mean),
        (14, "monte carlo", None, c14_monte_carlo),
        (15, "determinism", None, c15_determinism),
    ];
    let mut failed = Vec::new();
    for (n, name, limit, f) in criteria {
        let outcome = timed(limit.map(Duration::from_secs), f);
        let (ok, detail) = match outcome {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {n:>2} [{name}]: {} ({detail})", if ok { "PASS" } else { "FAIL" });
        if !ok {
            failed.push(n);
        }
    }
    println!("acceptance: {}/15 passed", 15 - failed.len());
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

