use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use asymdens::constructions::{
    canonical_sparse_set, diagonal_set, to_density_permutation, to_oscillation_permutation,
};
use asymdens::density::{
    checkpoint_schedule, density_profile, estimate_density_with, image_set, parse_rational, rat,
    EstimateConfig,
};
use asymdens::perms::LazyPermutation;
use asymdens::preservation::{
    condition_a_check, condition_b_check, counterexample_blocks, preservation_audit, Counterexample,
};
use asymdens::reductions::{reduction_by_name, reduction_pairs, run_harness, ReductionVerdict};
use asymdens::series::{mean_rearrange, riemann_rearrange, RearrangementTarget, SeriesSpec};
use asymdens::{DensityError, LazySet};
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser, Debug)]
#[command(name = "asymdens", version, about = "Density experiments on finite prefixes")]
struct Cli {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Prefix length examined; each subcommand has its own default.
    #[arg(long, global = true)]
    horizon: Option<u64>,
    #[arg(long, global = true, default_value = "1/100")]
    tol: String,
    #[arg(long, global = true, default_value = "1/4")]
    gap: String,
    #[arg(long, global = true, value_enum, default_value_t = Emit::Json)]
    emit: Emit,
    /// Artifact path; a manifest is written next to it as `<path>.manifest.json`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Emit {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Condition {
    A,
    B,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Density profile and verdict of a set.
    Density {
        #[arg(long, default_value = "sparse")]
        set: String,
    },
    /// Density of the image of a set under a permutation.
    Permute {
        #[arg(long, default_value = "evens")]
        set: String,
        #[arg(long, default_value = "identity")]
        perm: String,
        /// Use the steering permutation onto density r instead of --perm.
        #[arg(long)]
        steer: Option<String>,
        /// Use the oscillation permutation instead of --perm.
        #[arg(long)]
        oscillate: bool,
    },
    /// Rearrange a series toward a target sum, or a sequence toward a Cesàro mean.
    Rearrange {
        #[arg(long, default_value = "altharm")]
        series: String,
        #[arg(long, default_value = "value:0")]
        target: String,
        /// Rearrange to this Cesàro mean instead of a sum target.
        #[arg(long, allow_hyphen_values = true)]
        mean: Option<f64>,
    },
    /// Run seeded trials of a reduction map check.
    Reduce {
        #[arg(long)]
        reduction: String,
        #[arg(long, default_value_t = 50)]
        trials: u64,
    },
    /// Conditions A and B, the block counterexample, and the preservation audit.
    Preserve {
        #[arg(long, value_enum)]
        check: Option<Condition>,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value = "identity")]
        perm: String,
        #[arg(long)]
        counterexample: bool,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        /// Number of seeded pairs for the preservation audit.
        #[arg(long)]
        audit: Option<u64>,
    },
    /// Run the property suite, or replay a manifest.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Density { .. } => "density",
            Cmd::Permute { .. } => "permute",
            Cmd::Rearrange { .. } => "rearrange",
            Cmd::Reduce { .. } => "reduce",
            Cmd::Preserve { .. } => "preserve",
            Cmd::Verify { .. } => "verify",
        }
    }

    fn default_horizon(&self) -> u64 {
        match self {
            Cmd::Rearrange { .. } => 100_000,
            Cmd::Preserve { .. } => 1 << 12,
            Cmd::Reduce { .. } => 1 << 14,
            _ => 1 << 16,
        }
    }
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
struct RunManifest {
    subcommand: String,
    parameters: Vec<String>,
    seed: u64,
    horizon: u64,
    tool_version: String,
    output_digest: String,
}

/// Artifact bytes plus whether the run found a refuted property.
struct Outcome {
    bytes: Vec<u8>,
    failed: bool,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Outcome {
            bytes,
            failed: false,
        }
    }

    fn json(v: &Value) -> Self {
        Self::ok(pretty(v))
    }
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s.into_bytes()
}

fn digest(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(bytes);
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn parse_set(spec: &str, seed: u64) -> anyhow::Result<LazySet> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match name {
        "sparse" => canonical_sparse_set(),
        "evens" => LazySet::evens(),
        "odds" => LazySet::odds(),
        "naturals" => LazySet::naturals(),
        "squares" => LazySet::from_predicate("squares", |n| {
            let r = n.isqrt();
            r * r == n
        }),
        "arithmetic" => {
            let (a, d) = arg
                .split_once(',')
                .ok_or_else(|| anyhow!("arithmetic:<start>,<step>"))?;
            LazySet::arithmetic(a.parse()?, d.parse()?)
        }
        "bernoulli" => {
            let p = parse_rational(if arg.is_empty() { "1/2" } else { arg })?;
            let num = p.numer().try_into().context("numerator")?;
            let den = p.denom().try_into().context("denominator")?;
            LazySet::bernoulli(num, den, seed)
        }
        _ => bail!("unknown set {spec:?}"),
    })
}

fn parse_pair(arg: &str) -> anyhow::Result<(u64, u64)> {
    let (a, b) = arg
        .split_once(',')
        .ok_or_else(|| anyhow!("expected <a>,<b>, got {arg:?}"))?;
    Ok((a.parse()?, b.parse()?))
}

fn parse_perm(spec: &str, seed: u64) -> anyhow::Result<LazyPermutation> {
    let (name, arg) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match name {
        "identity" => LazyPermutation::identity(),
        "pair-swap" => LazyPermutation::pair_swap(),
        "dyadic-reversal" => LazyPermutation::dyadic_reversal(),
        "block-swap" => LazyPermutation::block_swap(arg.parse()?),
        "block-shuffle" => LazyPermutation::block_shuffle(seed, arg.parse()?, 0),
        "finitary" => LazyPermutation::seeded_finitary(seed),
        "transposition" => {
            let (a, b) = parse_pair(arg)?;
            LazyPermutation::transposition(a, b)
        }
        "interval-reversal" => {
            let (a, b) = parse_pair(arg)?;
            LazyPermutation::interval_reversal(a, b)
        }
        "counterexample" => counterexample_blocks(arg.parse()?)?.permutation,
        _ => bail!("unknown permutation {spec:?}"),
    })
}

fn parse_series(spec: &str) -> anyhow::Result<SeriesSpec> {
    if let Some(path) = spec.strip_prefix("custom:") {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let values = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<f64>().with_context(|| format!("bad term {t:?}")))
            .collect::<anyhow::Result<Vec<_>>>()?;
        return Ok(SeriesSpec::from_values(format!("custom:{path}"), values));
    }
    Ok(match spec {
        "altharm" => SeriesSpec::alternating_harmonic(),
        "signs" => SeriesSpec::alternating_signs(),
        "invsq" => SeriesSpec::inverse_squares(),
        _ => bail!("unknown series {spec:?}"),
    })
}

fn profile_csv(label: &str, a: &LazySet, horizon: u64) -> anyhow::Result<Vec<u8>> {
    let p = density_profile(a, &checkpoint_schedule(horizon))?;
    let mut s = String::from("set,horizon,checkpoint,numerator,denominator\n");
    for i in 0..p.len() {
        writeln!(
            s,
            "{label},{horizon},{},{},{}",
            p.checkpoints[i], p.numerators[i], p.denominators[i]
        )?;
    }
    Ok(s.into_bytes())
}

fn estimate_json(label: &str, a: &LazySet, horizon: u64, cfg: &EstimateConfig) -> anyhow::Result<Value> {
    let est = estimate_density_with(a, horizon, cfg)?;
    Ok(json!({
        "set": label,
        "estimate": serde_json::from_str::<Value>(&est.to_json())?,
    }))
}

fn run(cli: &Cli) -> anyhow::Result<Outcome> {
    let horizon = cli.horizon.unwrap_or_else(|| cli.cmd.default_horizon());
    let cfg = EstimateConfig::new(parse_rational(&cli.tol)?, parse_rational(&cli.gap)?);
    let seed = cli.seed;
    match &cli.cmd {
        Cmd::Density { set } => {
            let a = parse_set(set, seed)?;
            match cli.emit {
                Emit::Csv => Ok(Outcome::ok(profile_csv(set, &a, horizon)?)),
                Emit::Json => Ok(Outcome::json(&estimate_json(set, &a, horizon, &cfg)?)),
            }
        }
        Cmd::Permute {
            set,
            perm,
            steer,
            oscillate,
        } => {
            let a = parse_set(set, seed)?;
            let (label, image) = if let Some(r) = steer {
                let sp = to_density_permutation(&a, &parse_rational(r)?, horizon)?;
                (sp.permutation.label().to_string(), image_set(&sp.permutation, &a, horizon))
            } else if *oscillate {
                let op = to_oscillation_permutation(&a, horizon)?;
                (op.permutation.label().to_string(), image_set(&op.permutation, &a, horizon))
            } else {
                let pi = parse_perm(perm, seed)?;
                (pi.label().to_string(), image_set(&pi, &a, horizon))
            };
            let label = format!("{label}[{set}]");
            match cli.emit {
                Emit::Csv => Ok(Outcome::ok(profile_csv(&label, &image, horizon)?)),
                Emit::Json => Ok(Outcome::json(&estimate_json(&label, &image, horizon, &cfg)?)),
            }
        }
        Cmd::Rearrange {
            series,
            target,
            mean,
        } => {
            let s = parse_series(series)?;
            if let Some(m) = mean {
                let out = mean_rearrange(&s, *m, horizon)?;
                out.audit(&s)?;
                return Ok(match cli.emit {
                    Emit::Csv => Outcome::ok(out.rearrangement.to_csv().into_bytes()),
                    Emit::Json => Outcome::json(&json!({
                        "series": series,
                        "mean_target": m,
                        "horizon": horizon,
                        "branch": out.branch,
                        "liminf_evidence": out.liminf,
                        "limsup_evidence": out.limsup,
                        "embedded": out.embedded,
                        "cesaro_mean": out.mean(),
                    })),
                });
            }
            let t: RearrangementTarget = target.parse()?;
            let r = riemann_rearrange(&s, t, horizon)?;
            r.audit()?;
            Ok(match cli.emit {
                Emit::Csv => Outcome::ok(r.to_csv().into_bytes()),
                Emit::Json => Outcome::json(&json!({
                    "series": series,
                    "target": t,
                    "horizon": horizon,
                    "final_partial_sum": r.final_sum(),
                    "phase_boundaries": r.boundaries.len(),
                    "overshoot_bound_holds": r.boundaries.iter().all(|b| b.within_overshoot()),
                    "last_boundaries": r.boundaries.iter().rev().take(8).collect::<Vec<_>>(),
                    "complete_below": r.complete_below,
                })),
            })
        }
        Cmd::Reduce { reduction, trials } => {
            let pair = reduction_by_name(reduction).ok_or_else(|| {
                let names: Vec<&str> = reduction_pairs().iter().map(|p| p.name).collect();
                anyhow!("unknown reduction {reduction:?}; known: {}", names.join(", "))
            })?;
            let report = run_harness(&pair, *trials, horizon, seed)?;
            let failed = report.refuted > 0;
            let bytes = match cli.emit {
                Emit::Json => pretty(&serde_json::to_value(&report)?),
                Emit::Csv => {
                    let mut s = String::from("reduction,horizon,trial,seed,verdict\n");
                    for w in &report.witnesses {
                        let v = match w.verdict {
                            ReductionVerdict::Confirmed { .. } => "confirmed",
                            ReductionVerdict::Inconclusive { .. } => "inconclusive",
                            ReductionVerdict::Refuted { .. } => "refuted",
                        };
                        writeln!(s, "{},{horizon},{},{},{v}", report.reduction, w.trial, w.seed)?;
                    }
                    s.into_bytes()
                }
            };
            Ok(Outcome { bytes, failed })
        }
        Cmd::Preserve {
            check,
            k,
            perm,
            counterexample,
            depth,
            audit,
        } => {
            if *counterexample {
                let ce = counterexample_blocks(*depth)?;
                ce.audit()?;
                let rows = ce.checkpoint_rows()?;
                return Ok(match cli.emit {
                    Emit::Csv => Outcome::ok(Counterexample::rows_to_csv(&rows).into_bytes()),
                    Emit::Json => Outcome::json(&json!({
                        "depth": depth,
                        "horizon": ce.end(),
                        "k": ce.blocks.k,
                        "ell": ce.blocks.ell,
                        "rows": rows.iter().map(|r| json!({
                            "kind": r.kind,
                            "block": r.block,
                            "checkpoint": r.checkpoint,
                            "ratio": r.ratio().to_string(),
                        })).collect::<Vec<_>>(),
                    })),
                });
            }
            let pi = parse_perm(perm, seed)?;
            if let Some(trials) = audit {
                let stats = preservation_audit(&pi, *k, *trials, horizon, seed, &cfg)?;
                return Ok(Outcome::json(&json!({
                    "perm": pi.label(),
                    "k": k,
                    "horizon": horizon,
                    "audit": stats,
                })));
            }
            let cond = check.ok_or_else(|| anyhow!("pass --check A|B, --counterexample or --audit"))?;
            let v = match cond {
                Condition::A => condition_a_check(&pi, *k, horizon)?,
                Condition::B => condition_b_check(&pi, *k, horizon)?,
            };
            Ok(Outcome::json(&json!({
                "perm": pi.label(),
                "condition": format!("{cond:?}"),
                "label": v.to_string(),
                "result": v,
            })))
        }
        Cmd::Verify { quick, manifest } => match manifest {
            Some(path) => replay(path),
            None => verify_suite(*quick, seed),
        },
    }
}

fn replay(path: &Path) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let m: RunManifest = serde_json::from_str(&text)?;
    let args = std::iter::once("asymdens".to_string()).chain(m.parameters.iter().cloned());
    let cli = Cli::try_parse_from(args).map_err(|e| anyhow!("manifest parameters: {e}"))?;
    let out = run(&cli)?;
    let recomputed = digest(&out.bytes);
    let identical = recomputed == m.output_digest;
    Ok(Outcome {
        bytes: pretty(&json!({
            "manifest": path.display().to_string(),
            "subcommand": m.subcommand,
            "recorded_digest": m.output_digest,
            "recomputed_digest": recomputed,
            "identical": identical,
        })),
        failed: !identical,
    })
}

type Check = (&'static str, Box<dyn Fn() -> anyhow::Result<(bool, String)>>);

fn verify_suite(quick: bool, seed: u64) -> anyhow::Result<Outcome> {
    let h = if quick { 1 << 14 } else { 1 << 18 };
    let trials = if quick { 10 } else { 50 };
    let checks: Vec<Check> = vec![
        (
            "sparse set has density 0",
            Box::new(move || {
                let e = estimate_density_with(&canonical_sparse_set(), h, &EstimateConfig::default())?;
                Ok((e.value() == Some(&rat(0, 1)), format!("{:?}", e.verdict)))
            }),
        ),
        (
            "diagonal set is null for every family member",
            Box::new(move || {
                let fam: Vec<LazyPermutation> = std::iter::once(LazyPermutation::identity())
                    .chain((0..4).map(|i| LazyPermutation::block_shuffle(seed + i, 64, 0)))
                    .collect();
                let w = diagonal_set(&fam, h)?;
                w.audit()?;
                for pi in &fam {
                    let e = estimate_density_with(&image_set(pi, &w.set, h), h, &EstimateConfig::default())?;
                    if e.value() != Some(&rat(0, 1)) {
                        return Ok((false, format!("{} gives {:?}", pi.label(), e.verdict)));
                    }
                }
                Ok((true, format!("{} permutations", fam.len())))
            }),
        ),
        (
            "steering onto 1/3 tracks within 1",
            Box::new(move || {
                let sp = to_density_permutation(&LazySet::evens(), &rat(1, 3), h)?;
                let bits = image_set(&sp.permutation, &LazySet::evens(), h).bits_below(h)?;
                let dev = asymdens::constructions::tracking_deviation(&bits, &rat(1, 3));
                Ok((dev <= 1, format!("max deviation {dev}")))
            }),
        ),
        (
            "condition A matches interval counts",
            Box::new(move || {
                for s in 0..trials {
                    let pi = LazyPermutation::seeded_finitary(seed + s);
                    let (max, _) = asymdens::preservation::max_interval_count(&pi, 1 << 10)?;
                    for k in 1..=max + 1 {
                        if condition_a_check(&pi, k, 1 << 10)?.is_pass() != (max <= k) {
                            return Ok((false, format!("seed {} k {k}", seed + s)));
                        }
                    }
                }
                Ok((true, format!("{trials} permutations")))
            }),
        ),
        (
            "counterexample rows are exactly 2/3 and 1/2",
            Box::new(|| {
                let ce = counterexample_blocks(4)?;
                ce.audit()?;
                let rows = ce.checkpoint_rows()?;
                let ok = rows.iter().all(|r| {
                    r.ratio() == if r.kind == "peak" { rat(2, 3) } else { rat(1, 2) }
                });
                Ok((ok, format!("{} rows", rows.len())))
            }),
        ),
        (
            "alternating harmonic rearranges to 0",
            Box::new(move || {
                let r = riemann_rearrange(
                    &SeriesSpec::alternating_harmonic(),
                    RearrangementTarget::Finite { r: 0.0 },
                    h,
                )?;
                r.audit()?;
                Ok((r.final_sum().abs() < 0.01, format!("sum {:.6}", r.final_sum())))
            }),
        ),
        (
            "(-1)^n rearranges to mean 1/2",
            Box::new(move || {
                let s = SeriesSpec::alternating_signs();
                let out = mean_rearrange(&s, 0.5, h)?;
                out.audit(&s)?;
                Ok(((out.mean() - 0.5).abs() < 0.02, format!("mean {:.6}", out.mean())))
            }),
        ),
    ];
    let mut lines = Vec::new();
    let mut failed = false;
    for (name, check) in &checks {
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed |= !pass;
        lines.push(json!({ "check": name, "pass": pass, "detail": detail }));
    }
    for name in ["slalom", "banakh", "covmeager", "reaping", "continuum"] {
        let pair = reduction_by_name(name).expect("registered reduction");
        let rep = run_harness(&pair, trials, 1 << 14, seed)?;
        let pass = rep.refuted == 0;
        failed |= !pass;
        lines.push(json!({
            "check": format!("reduction {name}: no refuted trials"),
            "pass": pass,
            "detail": format!("{} confirmed, {} inconclusive, {} refuted", rep.confirmed, rep.inconclusive, rep.refuted),
        }));
    }
    Ok(Outcome {
        bytes: pretty(&json!({ "quick": quick, "horizon": h, "checks": lines })),
        failed,
    })
}

/// Command-line words minus the output flag, for the manifest.
fn manifest_parameters(args: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in args.iter().skip(1) {
        if skip {
            skip = false;
            continue;
        }
        if a == "--out" {
            skip = true;
            continue;
        }
        if a.starts_with("--out=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

fn exit_code_for(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<DensityError>() {
        Some(d) if d.is_horizon_or_resource() => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let started = Instant::now();
    let outcome = match run(&cli) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(exit_code_for(&e));
        }
    };
    let written = match &cli.out {
        Some(path) => {
            let manifest = RunManifest {
                subcommand: cli.cmd.name().to_string(),
                parameters: manifest_parameters(&args),
                seed: cli.seed,
                horizon: cli.horizon.unwrap_or_else(|| cli.cmd.default_horizon()),
                tool_version: env!("CARGO_PKG_VERSION").to_string(),
                output_digest: digest(&outcome.bytes),
            };
            let mpath = PathBuf::from(format!("{}.manifest.json", path.display()));
            std::fs::write(path, &outcome.bytes)
                .and_then(|_| {
                    std::fs::write(
                        &mpath,
                        pretty(&serde_json::to_value(&manifest).expect("manifest serializes")),
                    )
                })
                .with_context(|| format!("writing {}", path.display()))
        }
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(&outcome.bytes)
                .context("writing stdout")
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    eprintln!("{} finished in {:.2?}", cli.cmd.name(), started.elapsed());
    if outcome.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}
