//! Explicit sets and permutations: sparse and diagonal sets, density steering,
//! oscillation forcing, (j,k)-sets and their disruptors, block sets, and the σ mixer.

use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::density::{closure_bound, forward_closure_bound, image_set, rat_u};
use crate::error::{DensityError, Result};
use crate::partition::IntervalPartition;
use crate::perms::{LazyPermutation, PermOracle, Tail};
use crate::sets::LazySet;

/// `{a_n}` with `a_0 = 0`, `a_{n+1} = a_n + gap(n)`; requires `gap(n) > 2^n`.
///
/// The recursion is realized until it leaves `u64`, so at most 64 elements exist.
pub fn sparse_set<F>(gap: F) -> Result<LazySet>
where
    F: Fn(u64) -> u64,
{
    let mut elems = vec![0u64];
    let mut a = 0u64;
    for n in 0..64u32 {
        let g = gap(n as u64);
        if (g as u128) <= 1u128 << n {
            return Err(DensityError::Precondition(format!(
                "gap({n}) = {g} does not exceed 2^{n}"
            )));
        }
        match a.checked_add(g) {
            Some(next) => {
                a = next;
                elems.push(a);
            }
            None => break,
        }
    }
    Ok(LazySet::from_enumeration("sparse", move |i| elems.get(i as usize).copied())
        .with_horizon_hint(64))
}

/// The sparse set with `gap(n) = 2^n + 1`: `{0, 2, 5, 10, 19, 36, …}`.
pub fn canonical_sparse_set() -> LazySet {
    sparse_set(|n| (1u64 << n).saturating_add(1))
        .expect("2^n + 1 exceeds 2^n")
        .labeled("canonical-sparse")
}

/// A set whose images under every family member are sparse.
#[derive(Clone, Debug)]
pub struct DiagonalWitness {
    pub family: Vec<LazyPermutation>,
    pub set: LazySet,
    /// Realized `a_0 < a_1 < …`.
    pub schedule: Vec<u64>,
    /// The set is known exactly below this bound.
    pub frontier: u64,
    /// False if the search stopped before reaching `2·horizon`.
    pub complete: bool,
}

impl DiagonalWitness {
    /// Checks `π_i(a_{n+1}) − π_i(a_n) ≥ 2^n` for every `i ≤ n`.
    pub fn audit(&self) -> Result<()> {
        for n in 0..self.schedule.len().saturating_sub(1) {
            let step = 1u128 << n.min(127);
            for (i, pi) in self.family.iter().enumerate().take(n + 1) {
                let lo = pi.forward(self.schedule[n])? as u128;
                let hi = pi.forward(self.schedule[n + 1])? as u128;
                if hi < lo + step {
                    return Err(DensityError::Integrity(format!(
                        "member {i} grows by {} < 2^{n} between a_{n} and a_{}",
                        hi as i128 - lo as i128,
                        n + 1
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Greedy diagonalization: `a_0 = 1`, `a_{n+1}` the least `b > a_n` with
/// `π_i(b) ≥ π_i(a_n) + 2^n` for all `i ≤ min(n, |family| − 1)`.
pub fn diagonal_set(family: &[LazyPermutation], horizon: u64) -> Result<DiagonalWitness> {
    if family.is_empty() {
        return Err(DensityError::Precondition("family must be nonempty".into()));
    }
    let target = horizon.saturating_mul(2);
    let cap = horizon.saturating_mul(64).max(1 << 20);
    let mut schedule = vec![1u64];
    let mut complete = true;
    let mut frontier = 2u64;
    let mut n = 0usize;
    while *schedule.last().expect("nonempty") < target {
        let a = *schedule.last().expect("nonempty");
        if n >= 63 {
            complete = false;
            break;
        }
        let active = &family[..family.len().min(n + 1)];
        let mut need = Vec::with_capacity(active.len());
        for pi in active {
            need.push((pi.forward(a)? as u128) + (1u128 << n));
        }
        let mut found = None;
        let mut b = a + 1;
        while b < cap {
            let mut ok = true;
            for (pi, &t) in active.iter().zip(&need) {
                if (pi.forward(b)? as u128) < t {
                    ok = false;
                    break;
                }
            }
            if ok {
                found = Some(b);
                break;
            }
            b += 1;
        }
        match found {
            Some(b) => {
                schedule.push(b);
                frontier = b + 1;
            }
            None => {
                frontier = cap;
                complete = false;
                break;
            }
        }
        n += 1;
    }
    let set = LazySet::from_sorted("diagonal", schedule.clone(), frontier)?;
    Ok(DiagonalWitness {
        family: family.to_vec(),
        set,
        schedule,
        frontier,
        complete,
    })
}

/// Positions reserved for `π[A]` in a steering permutation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum SlotRule {
    /// `m` is an A-slot iff `⌊p(m+1)/q⌋ > ⌊pm/q⌋`, with `0 < p < q`.
    Ratio { p: u64, q: u64 },
    /// The positions `k² − 1`, `k ≥ 1`, go to A when `sparse_to_a`, else to the complement.
    Squares { sparse_to_a: bool },
}

fn square_count_below(m: u64) -> u64 {
    // #{k ≥ 1 : k² − 1 < m}
    m.isqrt()
}

fn is_square_slot(m: u64) -> bool {
    let r = (m as u128 + 1).isqrt();
    r * r == m as u128 + 1
}

impl SlotRule {
    fn a_count_below(&self, m: u64) -> u64 {
        match *self {
            SlotRule::Ratio { p, q } => ((p as u128 * m as u128) / q as u128) as u64,
            SlotRule::Squares { sparse_to_a: true } => square_count_below(m),
            SlotRule::Squares { sparse_to_a: false } => m - square_count_below(m),
        }
    }

    fn is_a(&self, m: u64) -> bool {
        match *self {
            SlotRule::Ratio { .. } => self.a_count_below(m + 1) > self.a_count_below(m),
            SlotRule::Squares { sparse_to_a } => is_square_slot(m) == sparse_to_a,
        }
    }

    fn a_slot(&self, i: u64) -> Result<u64> {
        match *self {
            SlotRule::Ratio { p, q } => {
                let v = ((i as u128 + 1) * q as u128).div_ceil(p as u128) - 1;
                u64::try_from(v).map_err(|_| DensityError::Resource("slot overflows u64".into()))
            }
            SlotRule::Squares { sparse_to_a: true } => square_slot(i),
            SlotRule::Squares { sparse_to_a: false } => Ok(dense_slot(i)),
        }
    }

    fn c_slot(&self, t: u64) -> Result<u64> {
        match *self {
            SlotRule::Ratio { p, q } => {
                // least m with (m+1) − a_count_below(m+1) = t + 1
                let c_below = |m: u64| m - self.a_count_below(m);
                let mut lo = t;
                let mut hi = u64::try_from(
                    (t as u128 + 1) * q as u128 / (q - p) as u128 + 2,
                )
                .map_err(|_| DensityError::Resource("slot overflows u64".into()))?;
                while lo < hi {
                    let mid = lo + (hi - lo) / 2;
                    if c_below(mid + 1) >= t + 1 {
                        hi = mid;
                    } else {
                        lo = mid + 1;
                    }
                }
                Ok(lo)
            }
            SlotRule::Squares { sparse_to_a: true } => Ok(dense_slot(t)),
            SlotRule::Squares { sparse_to_a: false } => square_slot(t),
        }
    }
}

fn square_slot(i: u64) -> Result<u64> {
    let k = i as u128 + 1;
    u64::try_from(k * k - 1)
        .map_err(|_| DensityError::Resource(format!("square slot {i} overflows u64")))
}

/// The `t`-th position that is not of the form `k² − 1`, `k ≥ 1`.
fn dense_slot(t: u64) -> u64 {
    let mut m = t;
    loop {
        let next = t + square_count_below(m + 1);
        if next == m {
            return m;
        }
        m = next;
    }
}

struct Steering {
    a: LazySet,
    comp: LazySet,
    rule: SlotRule,
}

impl PermOracle for Steering {
    fn forward(&self, n: u64) -> Result<u64> {
        let rank = self.a.rank(n)?;
        if self.a.contains(n)? {
            self.rule.a_slot(rank)
        } else {
            self.rule.c_slot(n - rank)
        }
    }

    fn inverse(&self, m: u64) -> Result<u64> {
        let i = self.rule.a_count_below(m);
        if self.rule.is_a(m) {
            self.a.nth(i)
        } else {
            self.comp.nth(m - i)
        }
    }
}

/// A permutation steering `π[A]` onto a fixed slot pattern.
#[derive(Clone, Debug)]
pub struct SteeringPermutation {
    pub permutation: LazyPermutation,
    rule: SlotRule,
    r: BigRational,
}

impl SteeringPermutation {
    /// `π[A]` read off the slot pattern, without querying `A`.
    pub fn image(&self) -> LazySet {
        let rule = self.rule;
        LazySet::from_predicate(format!("slots({})", self.r), move |m| rule.is_a(m))
    }

    pub fn target(&self) -> &BigRational {
        &self.r
    }

    /// Bound on `| |π[A] ∩ n| − ⌊rn⌋ |` valid for every `n ≤ end`: 1 for `0 < r < 1`,
    /// `⌊√end⌋` for `r ∈ {0, 1}`, where no bijection tracks within a constant.
    pub fn tracking_bound(&self, end: u64) -> u64 {
        match self.rule {
            SlotRule::Ratio { .. } => 1,
            SlotRule::Squares { .. } => square_count_below(end).max(1),
        }
    }
}

/// Largest `| |S ∩ n| − ⌊rn⌋ |` over `1 ≤ n ≤ bits.len()`.
pub fn tracking_deviation(bits: &[bool], r: &BigRational) -> u64 {
    let p = r.numer().to_u128().unwrap_or(0);
    let q = r.denom().to_u128().unwrap_or(1);
    let mut count = 0u128;
    let mut worst = 0u128;
    for (i, &b) in bits.iter().enumerate() {
        count += b as u128;
        let n = i as u128 + 1;
        let ideal = p * n / q;
        worst = worst.max(count.abs_diff(ideal));
    }
    worst as u64
}

/// Interleaves `A` and its complement so that `π[A]` has density `r`.
pub fn to_density_permutation(
    a: &LazySet,
    r: &BigRational,
    horizon: u64,
) -> Result<SteeringPermutation> {
    if r.is_negative() || *r > rat_u(1, 1) {
        return Err(DensityError::Precondition(format!("r = {r} is not in [0,1]")));
    }
    a.audit_infinite_coinfinite(horizon)?;
    let rule = if r.is_zero() {
        SlotRule::Squares { sparse_to_a: true }
    } else if *r == rat_u(1, 1) {
        SlotRule::Squares { sparse_to_a: false }
    } else {
        let p = r
            .numer()
            .to_u64()
            .ok_or_else(|| DensityError::Resource("numerator too large".into()))?;
        let q = r
            .denom()
            .to_u64()
            .ok_or_else(|| DensityError::Resource("denominator too large".into()))?;
        SlotRule::Ratio { p, q }
    };
    let oracle = Steering {
        a: a.clone(),
        comp: a.complement(),
        rule,
    };
    Ok(SteeringPermutation {
        permutation: LazyPermutation::from_oracle(
            format!("steer({},{r})", a.label()),
            Arc::new(oracle),
        ),
        rule,
        r: r.clone(),
    })
}

/// Switching thresholds for the oscillation interleave.
#[derive(Clone, Debug)]
pub struct OscillationConfig {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Default for OscillationConfig {
    fn default() -> Self {
        OscillationConfig {
            lo: rat_u(1, 4),
            hi: rat_u(3, 4),
        }
    }
}

/// A maximal run of positions reserved for one side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Run {
    pub start: u64,
    pub len: u64,
    /// Members of the same side placed before this run.
    pub before: u64,
    pub to_a: bool,
}

struct Oscillating {
    a: LazySet,
    comp: LazySet,
    runs: Arc<Vec<Run>>,
    a_runs: Vec<Run>,
    c_runs: Vec<Run>,
}

fn locate(runs: &[Run], idx: u64) -> Result<u64> {
    let k = runs.partition_point(|r| r.before <= idx);
    if k == 0 {
        return Err(DensityError::Integrity("no run holds index".into()));
    }
    let r = runs[k - 1];
    if idx >= r.before + r.len {
        return Err(DensityError::Resource(format!(
            "index {idx} lies beyond the realized runs"
        )));
    }
    Ok(r.start + (idx - r.before))
}

impl PermOracle for Oscillating {
    fn forward(&self, n: u64) -> Result<u64> {
        let rank = self.a.rank(n)?;
        if self.a.contains(n)? {
            locate(&self.a_runs, rank)
        } else {
            locate(&self.c_runs, n - rank)
        }
    }

    fn inverse(&self, m: u64) -> Result<u64> {
        let k = self.runs.partition_point(|r| r.start <= m);
        let r = self.runs[k - 1];
        if m >= r.start + r.len {
            return Err(DensityError::Resource(format!(
                "position {m} lies beyond the realized runs"
            )));
        }
        if r.to_a {
            self.a.nth(r.before + (m - r.start))
        } else {
            self.comp.nth(r.before + (m - r.start))
        }
    }
}

/// Permutation whose image of `A` alternates solid runs, plus its run layout.
#[derive(Clone, Debug)]
pub struct OscillationPermutation {
    pub permutation: LazyPermutation,
    pub runs: Arc<Vec<Run>>,
}

impl OscillationPermutation {
    pub fn image(&self) -> LazySet {
        let runs = Arc::clone(&self.runs);
        LazySet::from_predicate("oscillating-slots", move |m| {
            let k = runs.partition_point(|r| r.start <= m);
            runs[k - 1].to_a
        })
    }
}

fn small_ratio(r: &BigRational) -> Result<(u128, u128)> {
    match (r.numer().to_u64(), r.denom().to_u64()) {
        (Some(p), Some(q)) => Ok((p as u128, q as u128)),
        _ => Err(DensityError::Resource(format!("threshold {r} too large"))),
    }
}

fn oscillation_runs(cfg: &OscillationConfig) -> Result<Vec<Run>> {
    let (ln, ld) = small_ratio(&cfg.lo)?;
    let (hn, hd) = small_ratio(&cfg.hi)?;
    let limit = 1u128 << 62;
    let mut runs = Vec::new();
    let (mut n, mut c) = (0u128, 0u128);
    let mut to_a = true;
    while n < limit {
        let len = if to_a {
            // least L ≥ 1 with (c+L)/(n+L) > hn/hd
            let rhs = hn as i128 * n as i128 - c as i128 * hd as i128;
            if rhs < 0 {
                1
            } else {
                rhs as u128 / (hd - hn) + 1
            }
        } else {
            // least L ≥ 1 with c/(n+L) < ln/ld
            let rhs = c as i128 * ld as i128 - ln as i128 * n as i128;
            if rhs < 0 {
                1
            } else {
                rhs as u128 / ln + 1
            }
        };
        let before = if to_a { c } else { n - c };
        runs.push(Run {
            start: n as u64,
            len: len.min(limit) as u64,
            before: before as u64,
            to_a,
        });
        n += len;
        if to_a {
            c += len;
        }
        to_a = !to_a;
    }
    Ok(runs)
}

/// Alternating-phase interleave with the default thresholds 1/4 and 3/4.
pub fn to_oscillation_permutation(a: &LazySet, horizon: u64) -> Result<OscillationPermutation> {
    to_oscillation_permutation_with(a, horizon, &OscillationConfig::default())
}

/// Packs members of `A` until the running density exceeds `hi`, then non-members until
/// it drops below `lo`, and repeats.
pub fn to_oscillation_permutation_with(
    a: &LazySet,
    horizon: u64,
    cfg: &OscillationConfig,
) -> Result<OscillationPermutation> {
    if !(cfg.lo.is_positive() && cfg.lo < cfg.hi && cfg.hi < rat_u(1, 1)) {
        return Err(DensityError::Precondition(
            "oscillation thresholds need 0 < lo < hi < 1".into(),
        ));
    }
    a.audit_infinite_coinfinite(horizon)?;
    let runs = oscillation_runs(cfg)?;
    let a_runs: Vec<Run> = runs.iter().copied().filter(|r| r.to_a).collect();
    let c_runs: Vec<Run> = runs.iter().copied().filter(|r| !r.to_a).collect();
    let runs = Arc::new(runs);
    let oracle = Oscillating {
        a: a.clone(),
        comp: a.complement(),
        runs: Arc::clone(&runs),
        a_runs,
        c_runs,
    };
    Ok(OscillationPermutation {
        permutation: LazyPermutation::from_oracle(
            format!("oscillate({},{}..{})", a.label(), cfg.lo, cfg.hi),
            Arc::new(oracle),
        ),
        runs,
    })
}

/// Parameters of a (j,k)-set on a superincreasing partition.
#[derive(Clone, Debug)]
pub struct JKSetSpec {
    pub j: u64,
    pub k: u64,
    pub partition: IntervalPartition,
    /// Initial intervals exempt from the ratio condition.
    pub exceptions: usize,
}

impl JKSetSpec {
    pub fn new(j: u64, k: u64, partition: IntervalPartition, exceptions: usize) -> Result<Self> {
        if !(0 < j && j + 1 < k) {
            return Err(DensityError::Precondition(format!(
                "need 0 < j < k − 1, got j = {j}, k = {k}"
            )));
        }
        Ok(JKSetSpec {
            j,
            k,
            partition,
            exceptions,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JkVerdict {
    Pass { intervals: usize },
    Fail { interval: usize, count: u64, size: u64 },
}

impl JkVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, JkVerdict::Pass { .. })
    }
}

fn interval_count_of(a: &LazySet, lo: u64, hi: u64) -> Result<u64> {
    Ok(a.rank(hi)? - a.rank(lo)?)
}

/// Checks `|A ∩ I_n| / |I_n| ∈ [j/k, (j+1)/k]` for `exceptions ≤ n < realized_intervals`.
pub fn jk_set_check(a: &LazySet, spec: &JKSetSpec, realized_intervals: usize) -> Result<JkVerdict> {
    if realized_intervals < spec.exceptions + 1 {
        return Err(DensityError::Precondition(
            "realized_intervals must exceed the exceptions".into(),
        ));
    }
    if realized_intervals > spec.partition.len() {
        return Err(DensityError::horizon(
            realized_intervals as u64,
            spec.partition.len() as u64,
        ));
    }
    for n in spec.exceptions..realized_intervals {
        let (lo, hi) = spec.partition.interval(n)?;
        let size = hi - lo;
        let count = interval_count_of(a, lo, hi)?;
        let (c, s) = (count as u128, size as u128);
        let (j, k) = (spec.j as u128, spec.k as u128);
        if c * k < j * s || c * k > (j + 1) * s {
            return Ok(JkVerdict::Fail {
                interval: n,
                count,
                size,
            });
        }
    }
    Ok(JkVerdict::Pass {
        intervals: realized_intervals - spec.exceptions,
    })
}

/// Which end of `[j/k, (j+1)/k]` a generated (j,k)-set sits at.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JkLevel {
    /// `⌈j·|I_n|/k⌉` members per interval.
    Lower,
    /// `⌊(j+1)·|I_n|/k⌋` members per interval.
    Upper,
}

/// A (j,k)-set whose members are spread evenly inside each realized interval.
pub fn jk_set(partition: &IntervalPartition, j: u64, k: u64, level: JkLevel) -> LazySet {
    let p = partition.clone();
    let end = p.end();
    LazySet::from_fallible_predicate(format!("jk({j},{k},{level:?})"), move |x| {
        let n = p.index_of(x)?;
        let (lo, hi) = p.interval(n)?;
        let s = (hi - lo) as u128;
        let m = match level {
            JkLevel::Lower => (j as u128 * s).div_ceil(k as u128),
            JkLevel::Upper => (j as u128 + 1) * s / k as u128,
        };
        let o = (x - lo) as u128;
        Ok((o + 1) * m / s > o * m / s)
    })
    .with_limit(end)
}

struct Disruptor {
    a: LazySet,
    comp: LazySet,
    partition: IntervalPartition,
    designated: Arc<dyn Fn(usize) -> bool + Send + Sync>,
}

impl Disruptor {
    fn block(&self, x: u64) -> Result<Option<(u64, u64, u64)>> {
        let n = self.partition.index_of(x)?;
        if !(self.designated)(n) {
            return Ok(None);
        }
        let (lo, hi) = self.partition.interval(n)?;
        let before = self.a.rank(lo)?;
        let count = self.a.rank(hi)? - before;
        Ok(Some((lo, before, count)))
    }
}

impl PermOracle for Disruptor {
    fn forward(&self, x: u64) -> Result<u64> {
        let Some((lo, before, count)) = self.block(x)? else {
            return Ok(x);
        };
        let r = self.a.rank(x)? - before;
        if self.a.contains(x)? {
            Ok(lo + r)
        } else {
            Ok(lo + count + (x - lo - r))
        }
    }

    fn inverse(&self, y: u64) -> Result<u64> {
        let Some((lo, before, count)) = self.block(y)? else {
            return Ok(y);
        };
        let off = y - lo;
        if off < count {
            self.a.nth(before + off)
        } else {
            let comp_before = lo - before;
            self.comp.nth(comp_before + (off - count))
        }
    }
}

/// Moves `A ∩ I_n` onto the initial segment of `I_n` on every designated interval,
/// preserving order on both parts; identity on the other intervals.
pub fn disrupting_permutation<D>(
    a: &LazySet,
    spec: &JKSetSpec,
    designated: D,
    horizon: u64,
) -> Result<LazyPermutation>
where
    D: Fn(usize) -> bool + Send + Sync + 'static,
{
    let realized = spec
        .partition
        .cuts()
        .iter()
        .take_while(|&&c| c <= horizon.max(spec.partition.cuts()[1]))
        .count()
        - 1;
    let realized = realized.max(spec.exceptions + 1).min(spec.partition.len());
    if let JkVerdict::Fail {
        interval,
        count,
        size,
    } = jk_set_check(a, spec, realized)?
    {
        return Err(DensityError::Precondition(format!(
            "not a ({},{})-set: interval {interval} has {count} of {size}",
            spec.j, spec.k
        )));
    }
    Ok(LazyPermutation::from_oracle(
        format!("disrupt({})", a.label()),
        Arc::new(Disruptor {
            a: a.clone(),
            comp: a.complement(),
            partition: spec.partition.clone(),
            designated: Arc::new(designated),
        }),
    ))
}

/// Profile of a disrupted image at the end of a designated block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DisruptionCheckpoint {
    pub interval: usize,
    /// `max π[A ∩ I_n] + 1`.
    pub checkpoint: u64,
    pub count: u64,
    /// `j·n / (k + j·n)`, the lower bound for this checkpoint.
    pub bound_numerator: u64,
    pub bound_denominator: u64,
}

impl DisruptionCheckpoint {
    pub fn ratio(&self) -> BigRational {
        rat_u(self.count, self.checkpoint)
    }

    pub fn bound(&self) -> BigRational {
        rat_u(self.bound_numerator, self.bound_denominator)
    }
}

/// Sweeps `π[A]` at `max π[A ∩ I_n] + 1` for each designated `n` in the realized range.
pub fn disruption_checkpoints(
    a: &LazySet,
    pi: &LazyPermutation,
    spec: &JKSetSpec,
    designated: &dyn Fn(usize) -> bool,
) -> Result<Vec<DisruptionCheckpoint>> {
    let end = spec.partition.end();
    let image = image_set(pi, a, end);
    let mut out = Vec::new();
    for n in spec.exceptions.max(1)..spec.partition.len() {
        if !designated(n) {
            continue;
        }
        let (lo, hi) = spec.partition.interval(n)?;
        let count_in = interval_count_of(a, lo, hi)?;
        if count_in == 0 {
            continue;
        }
        let checkpoint = lo + count_in;
        let count = image.rank(checkpoint)?;
        out.push(DisruptionCheckpoint {
            interval: n,
            checkpoint,
            count,
            bound_numerator: spec.j * n as u64,
            bound_denominator: spec.k + spec.j * n as u64,
        });
    }
    Ok(out)
}

/// `Σ_{b' < b} 4^{b'}`.
pub fn block_start(b: u32) -> u64 {
    ((1u128 << (2 * b)) / 3) as u64
}

/// `binomial(n, k)`, or `None` if it overflows `u128`.
pub fn binomial(n: u64, k: u64) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
    }
    Some(acc)
}

/// The `v`-th `size`-subset of `{0, …, universe−1}` in lexicographic order.
pub fn unrank_subset(universe: u64, size: u64, mut v: u128) -> Result<Vec<u64>> {
    let total = binomial(universe, size)
        .ok_or_else(|| DensityError::Resource("binomial overflows".into()))?;
    if v >= total {
        return Err(DensityError::Precondition(format!(
            "v = {v} is not below binomial({universe}, {size}) = {total}"
        )));
    }
    let mut out = Vec::with_capacity(size as usize);
    let mut next = 0u64;
    for slot in 0..size {
        loop {
            let rest = binomial(universe - next - 1, size - slot - 1)
                .ok_or_else(|| DensityError::Resource("binomial overflows".into()))?;
            if v < rest {
                out.push(next);
                next += 1;
                break;
            }
            v -= rest;
            next += 1;
        }
    }
    Ok(out)
}

/// `E^c_v`: empty below `j_c`; on each `I^a_b` (`b ≥ c`) it is the union of the pieces
/// `L^{a,c}_{b,d}` of length `2^{b−c}` for `d` in the `v`-th `ℓ_c`-subset of `2^c`.
pub fn block_set<L>(c: u32, v: u128, ell: L, horizon: u64) -> Result<LazySet>
where
    L: Fn(u32) -> u64,
{
    if c > 20 {
        return Err(DensityError::Resource(format!("c = {c} is too large")));
    }
    let l = ell(c);
    if l > 1u64 << c {
        return Err(DensityError::Precondition(format!(
            "ℓ_{c} = {l} exceeds 2^{c}"
        )));
    }
    let chosen = unrank_subset(1u64 << c, l, v)?;
    let mut mask = vec![false; 1usize << c];
    for d in chosen {
        mask[d as usize] = true;
    }
    let set = LazySet::from_predicate(format!("E^{c}_{v}"), move |x| {
        let b = block_index(x);
        if b < c {
            return false;
        }
        let off = x - block_start(b);
        let within = off & ((1u64 << b) - 1);
        let d = within >> (b - c);
        mask[d as usize]
    });
    Ok(set.with_limit(horizon))
}

/// `b` with `j_b ≤ x < j_{b+1}`.
pub fn block_index(x: u64) -> u32 {
    let mut b = 0u32;
    while block_start(b + 1) <= x {
        b += 1;
    }
    b
}

/// `σ_π`: alternately agrees with the identity and with `π` on growing initial segments.
#[derive(Clone, Debug)]
pub struct SigmaMixer {
    pub permutation: LazyPermutation,
    /// `n` with `σ[n] = n` as sets.
    pub identity_witnesses: Vec<u64>,
    /// `n` with `σ[n] = π[n]` as sets.
    pub pi_witnesses: Vec<u64>,
    /// Fewer than three witnesses of some kind fit below the horizon.
    pub incomplete: bool,
}

const MIXER_GROWTH: u64 = 8;

/// Builds `σ_π` below `horizon` as a table; queries past the last identity witness fail.
pub fn sigma_mixer(pi: &LazyPermutation, horizon: u64) -> Result<SigmaMixer> {
    pi.audit_bijective(horizon.min(1 << 16))?;
    // inv[m] = σ⁻¹(m) for m below the current identity witness
    let mut fwd: Vec<u64> = Vec::new();
    let mut identity_witnesses = vec![];
    let mut pi_witnesses = vec![];
    let mut w = 0u64;
    loop {
        let n = (w + 1)
            .max(if w == 0 { 0 } else { closure_bound(pi, w)? })
            .max(MIXER_GROWTH * w);
        if n > horizon {
            break;
        }
        // on [w, n) follow π, routing points with π(x) < w onto the targets left free
        let mut bad = Vec::new();
        let mut used_high = std::collections::HashSet::new();
        for x in w..n {
            let y = pi.forward(x)?;
            if y >= w {
                fwd.push(y);
                used_high.insert(y);
            } else {
                fwd.push(u64::MAX);
                bad.push(x);
            }
        }
        let mut free: Vec<u64> = Vec::new();
        for x in 0..w {
            let y = pi.forward(x)?;
            if y >= w {
                free.push(y);
            }
        }
        free.sort_unstable();
        if free.len() != bad.len() {
            return Err(DensityError::Integrity(
                "π does not map the witness prefix onto a set of the right size".into(),
            ));
        }
        for (x, y) in bad.iter().zip(&free) {
            fwd[*x as usize] = *y;
        }
        pi_witnesses.push(n);
        let top = forward_closure_bound(pi, n)?;
        let w2 = (n + 1).max(top).max(MIXER_GROWTH * n);
        if w2 > horizon {
            // close the table at this π-witness is impossible without an identity witness
            fwd.truncate(w as usize);
            pi_witnesses.pop();
            break;
        }
        // on [n, w2) follow the identity, routing points already hit by σ[n]
        let image: std::collections::HashSet<u64> = fwd.iter().copied().collect();
        let mut bad = Vec::new();
        for x in n..w2 {
            if image.contains(&x) {
                fwd.push(u64::MAX);
                bad.push(x);
            } else {
                fwd.push(x);
            }
        }
        let free: Vec<u64> = (0..n).filter(|m| !image.contains(m)).collect();
        if free.len() != bad.len() {
            return Err(DensityError::Integrity(
                "identity block could not be completed".into(),
            ));
        }
        for (x, y) in bad.iter().zip(&free) {
            fwd[*x as usize] = *y;
        }
        identity_witnesses.push(w2);
        w = w2;
    }
    let mut inv = vec![0u64; fwd.len()];
    for (x, &y) in fwd.iter().enumerate() {
        inv[y as usize] = x as u64;
    }
    let incomplete = identity_witnesses.len() < 3 || pi_witnesses.len() < 3;
    let permutation = LazyPermutation::from_inverse_table(
        format!("sigma({})", pi.label()),
        inv,
        Tail::Horizon(w),
    )?;
    Ok(SigmaMixer {
        permutation,
        identity_witnesses,
        pi_witnesses,
        incomplete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{checkpoint_schedule, density_profile, estimate_density, rat};
    use crate::partition::IntervalPartition;

    #[test]
    fn canonical_sparse_prefix() {
        let s = canonical_sparse_set();
        let firsts: Vec<u64> = (0..6).map(|i| s.nth(i).unwrap()).collect();
        assert_eq!(firsts, vec![0, 2, 5, 10, 19, 36]);
        let p = density_profile(&s, &[19]).unwrap();
        assert_eq!(p.value(0), rat(4, 19));
    }

    #[test]
    fn sparse_gap_rule_is_checked() {
        let err = sparse_set(|n| if n == 3 { 8 } else { (1 << n) + 1 }).unwrap_err();
        assert!(err.to_string().contains("gap(3)"));
    }

    #[test]
    fn diagonal_with_identity_is_sparse() {
        let w = diagonal_set(&[LazyPermutation::identity()], 1 << 12).unwrap();
        assert!(w.complete);
        w.audit().unwrap();
        assert_eq!(&w.schedule[..4], &[1, 2, 4, 8]);
    }

    #[test]
    fn steering_slots() {
        let half = SlotRule::Ratio { p: 1, q: 2 };
        assert!(!half.is_a(0) && half.is_a(1) && !half.is_a(2) && half.is_a(3));
        assert_eq!(half.a_slot(0).unwrap(), 1);
        assert_eq!(half.c_slot(0).unwrap(), 0);
        assert_eq!(half.c_slot(3).unwrap(), 6);
        let third = SlotRule::Ratio { p: 1, q: 3 };
        for i in 0..50 {
            assert!(third.is_a(third.a_slot(i).unwrap()));
            assert!(!third.is_a(third.c_slot(i).unwrap()));
        }
        let dense: Vec<u64> = (0..6).map(dense_slot).collect();
        assert_eq!(dense, vec![1, 2, 4, 5, 6, 7]);
        assert_eq!(square_slot(2).unwrap(), 8);
    }

    #[test]
    fn steering_is_bijective_and_matches_image() {
        for r in [rat(0, 1), rat(1, 3), rat(1, 2), rat(9, 10), rat(1, 1)] {
            let s = to_density_permutation(&LazySet::evens(), &r, 1 << 12).unwrap();
            s.permutation.audit_bijective(4096).unwrap();
            let via_pi = image_set(&s.permutation, &LazySet::evens(), 4096)
                .bits_below(4096)
                .unwrap();
            assert_eq!(via_pi, s.image().bits_below(4096).unwrap());
            assert!(tracking_deviation(&via_pi, &r) <= s.tracking_bound(4096));
        }
    }

    #[test]
    fn steering_rejects_finite_sets() {
        let finite = LazySet::from_predicate("small", |n| n < 3);
        assert!(to_density_permutation(&finite, &rat(1, 2), 4096).is_err());
    }

    #[test]
    fn oscillation_runs_alternate() {
        let o = to_oscillation_permutation(&LazySet::evens(), 1 << 14).unwrap();
        o.permutation.audit_bijective(1 << 12).unwrap();
        assert!(o.runs.windows(2).all(|w| w[0].to_a != w[1].to_a));
        let e = estimate_density(&o.image(), 1 << 14, rat(1, 100), rat(1, 4)).unwrap();
        assert!(e.is_osc(), "{e:?}");
    }

    #[test]
    fn jk_checks() {
        let p = IntervalPartition::superincreasing(70_000);
        let spec = JKSetSpec::new(1, 5, p.clone(), 0).unwrap();
        assert_eq!(
            jk_set_check(&LazySet::evens(), &spec, p.len()).unwrap(),
            JkVerdict::Fail {
                interval: 0,
                count: 1,
                size: 1
            }
        );
        let spec = JKSetSpec::new(1, 3, p.clone(), 1).unwrap();
        for level in [JkLevel::Lower, JkLevel::Upper] {
            let a = jk_set(&p, 1, 3, level);
            assert!(jk_set_check(&a, &spec, p.len()).unwrap().passed(), "{level:?}");
        }
        assert!(JKSetSpec::new(1, 2, p, 0).is_err());
    }

    #[test]
    fn disruption_without_designation_is_identity() {
        let p = IntervalPartition::superincreasing(10_000);
        let spec = JKSetSpec::new(1, 3, p.clone(), 1).unwrap();
        let a = jk_set(&p, 1, 3, JkLevel::Upper);
        let pi = disrupting_permutation(&a, &spec, |_| false, p.end()).unwrap();
        for x in 0..p.end() {
            assert_eq!(pi.forward(x).unwrap(), x);
        }
    }

    #[test]
    fn disruption_fixes_intervals_and_front_loads() {
        let p = IntervalPartition::superincreasing(10_000);
        let spec = JKSetSpec::new(1, 3, p.clone(), 1).unwrap();
        let a = jk_set(&p, 1, 3, JkLevel::Upper);
        let pi = disrupting_permutation(&a, &spec, |_| true, p.end()).unwrap();
        pi.audit_bijective(p.end()).unwrap();
        for n in 0..p.len() {
            let (lo, hi) = p.interval(n).unwrap();
            for x in lo..hi {
                let y = pi.forward(x).unwrap();
                assert!(lo <= y && y < hi);
            }
        }
        let image = image_set(&pi, &a, p.end());
        assert!(jk_set_check(&image, &spec, p.len()).unwrap().passed());
        let (lo, hi) = p.interval(4).unwrap();
        let count = a.rank(hi).unwrap() - a.rank(lo).unwrap();
        for x in lo..hi {
            assert_eq!(image.contains(x).unwrap(), x < lo + count);
        }
    }

    #[test]
    fn block_set_examples() {
        assert_eq!(block_start(0), 0);
        assert_eq!(block_start(1), 1);
        assert_eq!(block_start(2), 5);
        assert_eq!(block_start(3), 21);
        let e = block_set(2, 0, |_| 2, 1 << 12).unwrap();
        // J_2 = [5, 21), I^a_2 has length 4, first two quarters are [5,6] etc.
        let members: Vec<u64> = e.members_below(21).unwrap();
        assert_eq!(members, vec![5, 6, 9, 10, 13, 14, 17, 18]);
        let p = density_profile(&e, &checkpoint_schedule(1 << 12)).unwrap();
        assert!(p.values().iter().all(|v| *v <= rat(1, 2) + rat(1, 4)));
        assert!(block_set(2, 6, |_| 2, 100).is_err());
        assert_eq!(unrank_subset(4, 2, 0).unwrap(), vec![0, 1]);
        assert_eq!(unrank_subset(4, 2, 5).unwrap(), vec![2, 3]);
    }

    #[test]
    fn sigma_mixer_witnesses() {
        let pi = LazyPermutation::dyadic_reversal();
        let m = sigma_mixer(&pi, 1 << 16).unwrap();
        assert!(!m.incomplete, "{m:?}");
        let sigma = &m.permutation;
        for &w in &m.identity_witnesses {
            let mut img = sigma.image_of_prefix(w).unwrap();
            img.sort_unstable();
            assert_eq!(img, (0..w).collect::<Vec<_>>());
        }
        for &n in &m.pi_witnesses {
            let mut a = sigma.image_of_prefix(n).unwrap();
            let mut b = pi.image_of_prefix(n).unwrap();
            a.sort_unstable();
            b.sort_unstable();
            assert_eq!(a, b);
        }
        let id = sigma_mixer(&LazyPermutation::identity(), 1 << 12).unwrap();
        for x in 0..*id.identity_witnesses.last().unwrap() {
            assert_eq!(id.permutation.forward(x).unwrap(), x);
        }
    }
}
