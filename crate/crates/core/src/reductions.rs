//! Executable reduction maps and a seeded harness that checks each map's implication
//! on sampled instances.

use std::collections::BTreeSet;
use std::sync::Arc;

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constructions::{block_start, canonical_sparse_set};
use crate::density::{
    closure_bound, estimate_density, image_set, rat, rat_u, DensityEstimate,
};
use crate::error::{DensityError, Result};
use crate::perms::{LazyPermutation, PermOracle};
use crate::sets::{BernoulliBits, LazySet, SetOracle};
use crate::slalom::Slalom;

/// Outcome of one implication check at a finite horizon.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ReductionVerdict {
    Confirmed { detail: String },
    Refuted { witness: u64, detail: String },
    Inconclusive { reason: String },
}

impl ReductionVerdict {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, ReductionVerdict::Confirmed { .. })
    }

    pub fn is_refuted(&self) -> bool {
        matches!(self, ReductionVerdict::Refuted { .. })
    }

    fn inconclusive(reason: impl Into<String>) -> Self {
        ReductionVerdict::Inconclusive {
            reason: reason.into(),
        }
    }
}

fn pow2(n: u64) -> Option<u64> {
    if n < 64 {
        Some(1u64 << n)
    } else {
        None
    }
}

/// `2^n ∪ {π⁻¹(k) : k ≤ n}`.
pub fn slalom_phi_plus(pi: &LazyPermutation, n: u64) -> Result<BTreeSet<u64>> {
    if n > 24 {
        return Err(DensityError::Resource(format!(
            "slot set at {n} has more than 2^24 elements"
        )));
    }
    let mut s: BTreeSet<u64> = (0..1u64 << n).collect();
    for k in 0..=n {
        s.insert(pi.inverse(k)?);
    }
    Ok(s)
}

/// `g(n) ∈ 2^n ∪ {π⁻¹(k) : k ≤ n}` without materializing the set.
pub fn slalom_phi_plus_contains(pi: &LazyPermutation, n: u64, x: u64) -> Result<bool> {
    if pow2(n).is_none_or(|p| x < p) {
        return Ok(true);
    }
    Ok(pi.forward(x)? <= n)
}

/// `slalom_phi_plus` as a slalom of width `2^n + n + 1`.
pub fn slalom_phi_plus_slalom(pi: &LazyPermutation) -> Slalom {
    let pi = pi.clone();
    Slalom::new(
        format!("phi+({})", pi.label()),
        |n| pow2(n).map_or(u64::MAX, |p| p + n + 1),
        move |n| slalom_phi_plus(&pi, n),
    )
}

/// Least `n₀` such that `g(n) ≥ bound(n)` for every audited `n ≥ n₀` (`n < 64`).
fn dominating_from<G, B>(g: &G, bound: B) -> Option<u64>
where
    G: Fn(u64) -> Option<u64>,
    B: Fn(u64) -> Option<u64>,
{
    let mut n0 = 0;
    for n in 0..64 {
        let ok = match (g(n), bound(n)) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some(v), Some(b)) => v >= b,
        };
        if !ok {
            n0 = n + 1;
        }
    }
    (n0 < 64).then_some(n0)
}

/// Realized `a_0 = 0`, `a_{n+1} = step(a_n)` for `n < n₀`, `g(a_n)` after, until `None`.
fn realize<G, S>(g: &G, n0: u64, step: S, stop: u64) -> Vec<u64>
where
    G: Fn(u64) -> Option<u64>,
    S: Fn(u64) -> Option<u64>,
{
    let mut out = vec![0u64];
    let mut n = 0u64;
    loop {
        let a = *out.last().expect("nonempty");
        if a >= stop {
            break;
        }
        let next = if n < n0 { step(a) } else { g(a) };
        match next {
            Some(b) if b > a => out.push(b),
            _ => break,
        }
        n += 1;
    }
    out
}

/// The tower set `a_0 = 0`, `a_{n+1} = 2^{a_n}` (`n < n₀`) else `g(a_n)`.
///
/// `g` returns `None` for values that do not fit in `u64`; the recursion stops there and
/// the set is exact on all of `u64`, since every later element is at least `2^64`.
pub fn slalom_phi_minus<G>(g: &G) -> Result<LazySet>
where
    G: Fn(u64) -> Option<u64>,
{
    let n0 = dominating_from(g, pow2).ok_or_else(|| {
        DensityError::Precondition("g does not dominate 2^n on the audited prefix".into())
    })?;
    let elems = realize(g, n0, pow2, u64::MAX);
    LazySet::from_sorted("tower", elems, u64::MAX)
}

fn config_value_zero(est: &DensityEstimate) -> bool {
    est.value().is_some_and(|r| r.is_zero())
}

/// If `g` evades `slalom_phi_plus(π)` from `n₀` on, the tower set of `g` satisfies
/// `π(a_{n+1}) > a_n` and its image has density 0.
pub fn check_slalom_reduction<G>(
    pi: &LazyPermutation,
    g: &G,
    n0: u64,
    horizon: u64,
) -> Result<ReductionVerdict>
where
    G: Fn(u64) -> Option<u64>,
{
    for n in n0..63 {
        if let Some(v) = g(n) {
            if slalom_phi_plus_contains(pi, n, v)? {
                return Ok(ReductionVerdict::inconclusive(format!(
                    "evasion hypothesis fails at n = {n}: g(n) = {v} is captured"
                )));
            }
        }
    }
    let tower_n0 = dominating_from(g, pow2).ok_or_else(|| {
        DensityError::Precondition("g does not dominate 2^n on the audited prefix".into())
    })?;
    let a = slalom_phi_minus(g)?;
    let elems = a.members_below(u64::MAX)?;
    let mut checked = 0;
    for m in 0..elems.len().saturating_sub(1) {
        if (m as u64) < tower_n0 || elems[m] < n0 {
            continue;
        }
        checked += 1;
        if pi.forward(elems[m + 1])? <= elems[m] {
            return Ok(ReductionVerdict::Refuted {
                witness: m as u64,
                detail: format!("π(a_{}) ≤ a_{m}", m + 1),
            });
        }
    }
    let est = estimate_density(&image_set(pi, &a, horizon), horizon, rat(1, 100), rat(1, 4))?;
    if !config_value_zero(&est) {
        return Ok(ReductionVerdict::inconclusive(format!(
            "image estimate at {horizon} is not Value(0): {:?}",
            est.verdict
        )));
    }
    Ok(ReductionVerdict::Confirmed {
        detail: format!(
            "{checked} tail steps satisfy π(a_(n+1)) > a_n; image Value(0) at {horizon}"
        ),
    })
}

/// `(n+1) ∪ {π⁻¹(k), π(k) : k ≤ n}`.
pub fn banakh_phi_plus(pi: &LazyPermutation, n: u64) -> Result<BTreeSet<u64>> {
    let mut s: BTreeSet<u64> = (0..=n).collect();
    for k in 0..=n {
        s.insert(pi.inverse(k)?);
        s.insert(pi.forward(k)?);
    }
    Ok(s)
}

pub fn banakh_phi_plus_contains(pi: &LazyPermutation, n: u64, x: u64) -> Result<bool> {
    Ok(x <= n || pi.forward(x)? <= n || pi.inverse(x)? <= n)
}

/// `a_0 = 0`, `a_{n+1} = a_n + 1` (`n < n₀`) else `g(a_n)`, realized up to `stop`.
pub fn banakh_phi_minus<G>(g: &G, stop: u64) -> Result<LazySet>
where
    G: Fn(u64) -> Option<u64>,
{
    let n0 = dominating_from(g, |n| n.checked_add(1)).ok_or_else(|| {
        DensityError::Precondition("g does not dominate n + 1 on the audited prefix".into())
    })?;
    let elems = realize(g, n0, |a| a.checked_add(1), stop);
    let limit = elems.last().map_or(1, |&l| l + 1);
    LazySet::from_sorted("banakh", elems, limit)
}

/// `{x ∈ A : x ≠ π(x) ∈ A}` on the realized part of `A`.
pub fn s_relation_points(pi: &LazyPermutation, a: &LazySet) -> Result<Vec<u64>> {
    let limit = a.limit().unwrap_or(u64::MAX);
    let mut out = Vec::new();
    for x in a.members_below(limit)? {
        let y = pi.forward(x)?;
        if y != x && y < limit && a.contains(y)? {
            out.push(x);
        }
    }
    Ok(out)
}

/// If `g` evades `banakh_phi_plus(π)` from `n₀` on, `{x ∈ A : x ≠ π(x) ∈ A}` is finite:
/// it is empty beyond the first element after the hypothesis kicks in.
pub fn check_banakh_reduction<G>(
    pi: &LazyPermutation,
    g: &G,
    n0: u64,
    horizon: u64,
) -> Result<ReductionVerdict>
where
    G: Fn(u64) -> Option<u64>,
{
    let stop = horizon.saturating_mul(2);
    let a = banakh_phi_minus(g, stop)?;
    let elems = a.members_below(a.limit().unwrap_or(u64::MAX))?;
    for &x in &elems {
        if x < n0 {
            continue;
        }
        if let Some(v) = g(x) {
            if banakh_phi_plus_contains(pi, x, v)? {
                return Ok(ReductionVerdict::inconclusive(format!(
                    "evasion hypothesis fails at n = {x}: g(n) = {v} is captured"
                )));
            }
        }
    }
    let lin_n0 = dominating_from(g, |n| n.checked_add(1)).unwrap_or(0);
    let limit = a.limit().unwrap_or(u64::MAX);
    let mut tail = 0u64;
    for m in 1..elems.len() {
        if ((m - 1) as u64) < lin_n0 || elems[m - 1] < n0 {
            continue;
        }
        let x = elems[m];
        if x >= horizon {
            break;
        }
        let y = pi.forward(x)?;
        if y == x {
            continue;
        }
        if y >= limit {
            return Ok(ReductionVerdict::inconclusive(format!(
                "π({x}) = {y} lies beyond the realized prefix"
            )));
        }
        tail += 1;
        if a.contains(y)? {
            return Ok(ReductionVerdict::Refuted {
                witness: x,
                detail: format!("{x} ≠ π({x}) = {y} and both lie in the set"),
            });
        }
    }
    Ok(ReductionVerdict::Confirmed {
        detail: format!("S-relation empty on a tail of {tail} moved points"),
    })
}

/// `max{π(k), π⁻¹(k) : k ≤ n} + 2^n`, or `None` past `u64`.
pub fn unbounding_phi_plus(pi: &LazyPermutation, n: u64) -> Result<Option<u64>> {
    let Some(p) = pow2(n) else {
        return Ok(None);
    };
    let mut m = 0u64;
    for k in 0..=n {
        m = m.max(pi.forward(k)?).max(pi.inverse(k)?);
    }
    Ok(m.checked_add(p))
}

/// Realized boundaries and audit of the union-of-blocks witness.
#[derive(Clone, Debug, Serialize)]
pub struct UnboundingReport {
    /// Realized `i^g_n`; the next value does not fit in `u64`.
    pub boundaries: Vec<u64>,
    /// `(n, |π[φ₋(g)] ∩ i_n|, |φ₋(g) ∩ i_n|)` for audited boundaries `n ≡ 1, 3 (mod 4)`.
    pub count_audit: Vec<(usize, u64, u64)>,
    pub image_verdict: String,
    pub lo: Option<String>,
    pub hi: Option<String>,
    pub verdict: ReductionVerdict,
}

/// `⋃_n [i_{4n}, i_{4n+2})` over the realized boundaries.
pub fn unbounding_phi_minus<G>(g: &G) -> Result<(LazySet, Vec<u64>)>
where
    G: Fn(u64) -> Option<u64>,
{
    let n0 = dominating_from(g, pow2).ok_or_else(|| {
        DensityError::Precondition("g does not dominate 2^n on the audited prefix".into())
    })?;
    let bounds = realize(g, n0, pow2, u64::MAX);
    let b = bounds.clone();
    let set = LazySet::from_predicate("unbounding-blocks", move |x| {
        let k = b.partition_point(|&i| i <= x) - 1;
        k % 4 < 2
    });
    Ok((set, bounds))
}

/// For `g ≥ unbounding_phi_plus(π)` and `g(n) ≥ 2^n`, the block set keeps its counts at the
/// boundaries under `π` and its image oscillates between 0 and 1.
pub fn unbounding_osc_witness<G>(
    pi: &LazyPermutation,
    g: &G,
    horizon: u64,
) -> Result<UnboundingReport>
where
    G: Fn(u64) -> Option<u64>,
{
    let bail = |reason: String| UnboundingReport {
        boundaries: vec![],
        count_audit: vec![],
        image_verdict: "not computed".into(),
        lo: None,
        hi: None,
        verdict: ReductionVerdict::inconclusive(reason),
    };
    let n0 = match dominating_from(g, pow2) {
        Some(n0) => n0,
        None => return Ok(bail("g does not dominate 2^n".into())),
    };
    for n in n0..64 {
        if let (Some(v), Some(b)) = (g(n), unbounding_phi_plus(pi, n)?) {
            if v < b {
                return Ok(bail(format!("g({n}) = {v} is below φ₊(π)({n}) = {b}")));
            }
        }
    }
    let (set, boundaries) = unbounding_phi_minus(g)?;
    let mut count_audit = Vec::new();
    for (n, &i) in boundaries.iter().enumerate() {
        if n % 2 == 1 && i <= horizon {
            let direct = set.rank(i)?;
            let image = image_set(pi, &set, horizon.max(i));
            let moved = image.rank(i)?;
            count_audit.push((n, moved, direct));
        }
    }
    let est = estimate_density(&image_set(pi, &set, horizon), horizon, rat(1, 100), rat(1, 4))?;
    let (lo, hi) = (est.tail_min.clone(), est.tail_max.clone());
    let verdict = if let Some((n, moved, direct)) =
        count_audit.iter().find(|(n, m, d)| n % 4 == 1 && m != d)
    {
        ReductionVerdict::Refuted {
            witness: *n as u64,
            detail: format!("count {moved} ≠ {direct} at boundary {n}"),
        }
    } else if est.is_osc() && lo <= rat(1, 10) && hi >= rat(9, 10) {
        ReductionVerdict::Confirmed {
            detail: format!("OscEvidence({lo}, {hi}) at {horizon}"),
        }
    } else {
        ReductionVerdict::inconclusive(format!(
            "realized boundaries {boundaries:?}: the next boundary is beyond u64, so the \
             image below {horizon} is not oscillating ({:?})",
            est.verdict
        ))
    };
    Ok(UnboundingReport {
        boundaries,
        count_audit,
        image_verdict: format!("{:?}", est.verdict),
        lo: Some(lo.to_string()),
        hi: Some(hi.to_string()),
        verdict,
    })
}

/// Direction of the extension-game target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    AtLeast,
    AtMost,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct GameStep {
    pub j: u64,
    /// 1: both of `π(2j), π(2j+1)` below `2n`; 2: neither; 3: only `π(2j)`; 4: only `π(2j+1)`.
    pub case: u8,
    pub bit: bool,
    pub c: u64,
    pub d: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GameOutcome {
    pub direction: Direction,
    pub t: Vec<bool>,
    pub n0: u64,
    pub n: u64,
    pub m: u64,
    pub steps: Vec<GameStep>,
    /// `|π[φ₋(t)] ∩ 2n|`, counted directly.
    pub count: u64,
    /// True if every logged step satisfies `2c ≥ d` (resp. `≤`).
    pub invariant_holds: bool,
    /// `d_m = 2n` and `c_m = count`.
    pub identity_holds: bool,
}

impl GameOutcome {
    pub fn ratio(&self) -> BigRational {
        rat_u(self.count, 2 * self.n)
    }
}

/// `φ₋(t)(2j) = t(j)`, `φ₋(t)(2j+1) = 1 − t(j)`.
pub fn doubled_bit(t: &[bool], i: u64) -> bool {
    let b = t[(i / 2) as usize];
    if i % 2 == 0 {
        b
    } else {
        !b
    }
}

/// Extends `s` to `t` with `|π[φ₋(t)] ∩ 2n| / 2n ≥ 1/2` (or `≤`), logging every step.
pub fn covmeager_extension_game(
    pi: &LazyPermutation,
    s: &[bool],
    n0: u64,
    horizon: u64,
    direction: Direction,
) -> Result<GameOutcome> {
    let n0 = n0.max(s.len() as u64).max(1);
    let mut t = s.to_vec();
    t.resize(n0 as usize, false);
    let top = crate::density::forward_closure_bound(pi, 2 * n0)?;
    let n = n0.max(top.div_ceil(2));
    let m = n.max(closure_bound(pi, 2 * n)?.div_ceil(2));
    if 2 * m > horizon {
        return Err(DensityError::horizon(2 * m, horizon));
    }
    let (mut c, mut d) = (n0, 2 * n0);
    let mut steps = Vec::with_capacity((m - n0) as usize);
    let mut invariant_holds = true;
    for j in n0..m {
        let p0 = pi.forward(2 * j)? < 2 * n;
        let p1 = pi.forward(2 * j + 1)? < 2 * n;
        let case = match (p0, p1) {
            (true, true) => 1,
            (false, false) => 2,
            (true, false) => 3,
            (false, true) => 4,
        };
        let bit = match (case, direction) {
            (3, Direction::AtLeast) | (4, Direction::AtMost) => true,
            _ => false,
        };
        t.push(bit);
        d += p0 as u64 + p1 as u64;
        c += (p0 && bit) as u64 + (p1 && !bit) as u64;
        let ok = match direction {
            Direction::AtLeast => 2 * c >= d,
            Direction::AtMost => 2 * c <= d,
        };
        invariant_holds &= ok;
        steps.push(GameStep { j, case, bit, c, d });
    }
    let mut count = 0u64;
    for i in 0..2 * m {
        if doubled_bit(&t, i) && pi.forward(i)? < 2 * n {
            count += 1;
        }
    }
    let identity_holds = d == 2 * n && c == count;
    Ok(GameOutcome {
        direction,
        t,
        n0,
        n,
        m,
        steps,
        count,
        invariant_holds,
        identity_holds,
    })
}

/// Outcome of the general-ratio extension game on the `J_b`/`I^a_b` scheme.
#[derive(Clone, Debug, Serialize)]
pub struct GeneralGameOutcome {
    pub direction: Direction,
    pub b0: u32,
    pub b1: u32,
    pub b2: u32,
    /// Chosen subsets, as offsets inside each `I^a_b`, for `i_{b0} ≤ k < i_{b2}`.
    pub choices: Vec<Vec<u64>>,
    pub min_ratio: String,
    pub max_ratio: String,
    pub count: u64,
    pub invariant_holds: bool,
    pub identity_holds: bool,
}

/// `ℓ_b = ⌊r·2^b⌋` for `r = ell/2^c`.
fn ell_of(ell: u64, c: u32, b: u32) -> u64 {
    if b >= c {
        ell << (b - c)
    } else {
        ell >> (c - b)
    }
}

/// The general-ratio game for dyadic `r = ell/2^c` with `c ≤ 4`: extends the default
/// prefix (first `ℓ_b` points of every `I^a_b` with `b < b0`) through `b2` so that
/// `|π[φ₋(t)] ∩ j_{b1}| / j_{b1} ≥ r − eps` (or `≤ r + eps`).
pub fn covmeager_general_game(
    pi: &LazyPermutation,
    ell: u64,
    c: u32,
    b0: u32,
    eps: &BigRational,
    horizon: u64,
    direction: Direction,
) -> Result<GeneralGameOutcome> {
    if c > 4 {
        return Err(DensityError::Precondition(format!(
            "general-ratio game is configured for c ≤ 4, got c = {c}"
        )));
    }
    if ell == 0 || ell >= 1 << c {
        return Err(DensityError::Precondition(format!(
            "need 0 < ell < 2^{c}, got {ell}"
        )));
    }
    if !eps.is_positive() {
        return Err(DensityError::Precondition("eps must be positive".into()));
    }
    let r = rat_u(ell, 1 << c);
    let target = match direction {
        Direction::AtLeast => &r - eps,
        Direction::AtMost => &r + eps,
    };
    let meets = |cnt: u64, den: u64| -> bool {
        let q = rat_u(cnt, den);
        match direction {
            Direction::AtLeast => q >= target,
            Direction::AtMost => q <= target,
        }
    };
    let prefix_count = |b0: u32| -> u64 { (0..b0).map(|b| (1u64 << b) * ell_of(ell, c, b)).sum() };
    let mut b0 = b0.max(c).max(1);
    while !meets(prefix_count(b0), block_start(b0)) {
        b0 += 1;
        if block_start(b0) > horizon {
            return Err(DensityError::horizon(block_start(b0), horizon));
        }
    }
    let mut b1 = b0;
    while block_start(b1) < crate::density::forward_closure_bound(pi, block_start(b0))? {
        b1 += 1;
    }
    let mut b2 = b1;
    while block_start(b2) < closure_bound(pi, block_start(b1))? {
        b2 += 1;
    }
    if block_start(b2) > horizon {
        return Err(DensityError::horizon(block_start(b2), horizon));
    }
    let jb1 = block_start(b1);
    let (mut cnt, mut den) = (prefix_count(b0), block_start(b0));
    let mut min_ratio = rat_u(cnt, den);
    let mut max_ratio = min_ratio.clone();
    let mut invariant_holds = meets(cnt, den);
    let mut choices = Vec::new();
    let mut members: Vec<u64> = Vec::new();
    for b in 0..b0 {
        let l = ell_of(ell, c, b);
        for a in 0..1u64 << b {
            let base = block_start(b) + a * (1u64 << b);
            members.extend(base..base + l);
        }
    }
    for b in b0..b2 {
        let l = ell_of(ell, c, b);
        let size = 1u64 << b;
        for a in 0..size {
            let base = block_start(b) + a * size;
            let mut inside = Vec::new();
            let mut outside = Vec::new();
            for off in 0..size {
                if pi.forward(base + off)? < jb1 {
                    inside.push(off);
                } else {
                    outside.push(off);
                }
            }
            let (first, second) = match direction {
                Direction::AtLeast => (&inside, &outside),
                Direction::AtMost => (&outside, &inside),
            };
            let mut y: Vec<u64> = first.iter().copied().take(l as usize).collect();
            let missing = l as usize - y.len();
            y.extend(second.iter().copied().take(missing));
            y.sort_unstable();
            let hits = y.iter().filter(|off| inside.binary_search(off).is_ok()).count() as u64;
            cnt += hits;
            den += inside.len() as u64;
            if den > 0 {
                let q = rat_u(cnt, den);
                invariant_holds &= meets(cnt, den);
                min_ratio = min_ratio.min(q.clone());
                max_ratio = max_ratio.max(q);
            }
            members.extend(y.iter().map(|off| base + off));
            choices.push(y);
        }
    }
    let mut count = 0u64;
    for &x in &members {
        if pi.forward(x)? < jb1 {
            count += 1;
        }
    }
    let identity_holds = den == jb1 && cnt == count;
    Ok(GeneralGameOutcome {
        direction,
        b0,
        b1,
        b2,
        choices,
        min_ratio: min_ratio.to_string(),
        max_ratio: max_ratio.to_string(),
        count,
        invariant_holds,
        identity_holds,
    })
}

fn bit_length(x: u64) -> u32 {
    64 - x.leading_zeros()
}

/// Indices `j` of `y` kept in `y'`: multiples of `2^(3 + bit_length(bit_length(j)))`.
fn kept_stride(len_bits: u32) -> u64 {
    1u64 << (3 + bit_length(len_bits as u64))
}

/// `[lo, hi)` of the indices with `bit_length = len_bits`.
fn bit_range(len_bits: u32) -> (u64, u64) {
    match len_bits {
        0 => (0, 1),
        64 => (1u64 << 63, u64::MAX),
        b => (1u64 << (b - 1), 1u64 << b),
    }
}

fn multiples_in(lo: u64, hi: u64, s: u64) -> u64 {
    hi.div_ceil(s) - lo.div_ceil(s)
}

/// Number of kept indices below `j`.
fn kept_rank(j: u64) -> u64 {
    let mut total = 0;
    for len_bits in 0..=64u32 {
        let (lo, hi) = bit_range(len_bits);
        if lo >= j {
            break;
        }
        total += multiples_in(lo, hi.min(j), kept_stride(len_bits));
    }
    total
}

/// The `i`-th kept index.
fn kept_index(mut i: u64) -> Result<u64> {
    for len_bits in 0..=64u32 {
        let (lo, hi) = bit_range(len_bits);
        let s = kept_stride(len_bits);
        let here = multiples_in(lo, hi, s);
        if i < here {
            return Ok(lo.div_ceil(s) * s + i * s);
        }
        i -= here;
    }
    Err(DensityError::Resource("kept index beyond u64".into()))
}

fn is_kept(j: u64) -> bool {
    j % kept_stride(bit_length(j)) == 0
}

/// `y' ⊆ y`: members of `y` whose index is kept.
struct Thinned {
    y: LazySet,
}

impl SetOracle for Thinned {
    fn contains(&self, x: u64) -> Result<bool> {
        Ok(self.y.contains(x)? && is_kept(self.y.rank(x)?))
    }

    fn nth(&self, i: u64) -> Result<u64> {
        self.y.nth(kept_index(i)?)
    }

    fn rank(&self, x: u64) -> Result<u64> {
        Ok(kept_rank(self.y.rank(x)?))
    }
}

struct Reaping {
    yp: LazySet,
    yp_comp: LazySet,
    z: LazySet,
    z_comp: LazySet,
}

impl PermOracle for Reaping {
    fn forward(&self, x: u64) -> Result<u64> {
        let r = self.yp.rank(x)?;
        if self.yp.contains(x)? {
            self.z.nth(r)
        } else {
            self.z_comp.nth(x - r)
        }
    }

    fn inverse(&self, m: u64) -> Result<u64> {
        let r = self.z.rank(m)?;
        if self.z.contains(m)? {
            self.yp.nth(r)
        } else {
            self.yp_comp.nth(m - r)
        }
    }
}

/// The reaping permutation: `y' → z` and complement → complement, both order-preserving.
#[derive(Clone, Debug)]
pub struct ReapingMap {
    pub permutation: LazyPermutation,
    pub y_prime: LazySet,
    pub z: LazySet,
    /// Horizon estimate of `d(z)`.
    pub r: BigRational,
}

impl ReapingMap {
    /// Checks that `π` increases on `y' ∩ end` and on `end \ y'`.
    pub fn audit_order_preserving(&self, end: u64) -> Result<()> {
        let mut last_in: Option<u64> = None;
        let mut last_out: Option<u64> = None;
        for x in 0..end {
            let y = self.permutation.forward(x)?;
            let slot = if self.y_prime.contains(x)? {
                &mut last_in
            } else {
                &mut last_out
            };
            if slot.is_some_and(|prev| prev >= y) {
                return Err(DensityError::Integrity(format!(
                    "reaping map is not order-preserving at {x}"
                )));
            }
            *slot = Some(y);
        }
        Ok(())
    }
}

/// Builds the reaping permutation after checking that `z` has a stable positive density.
pub fn reaping_phi_plus(y: &LazySet, z: &LazySet, horizon: u64) -> Result<ReapingMap> {
    let est = estimate_density(z, horizon, rat(1, 100), rat(1, 4))?;
    let r = match est.value() {
        Some(r) if r.is_positive() => r.clone(),
        _ => {
            return Err(DensityError::Inconclusive(format!(
                "density of z is not a positive Value at {horizon}: {:?}",
                est.verdict
            )))
        }
    };
    let yp = LazySet::from_oracle(
        format!("thin({})", y.label()),
        Arc::new(Thinned { y: y.clone() }),
    );
    let oracle = Reaping {
        yp_comp: yp.complement(),
        yp: yp.clone(),
        z_comp: z.complement(),
        z: z.clone(),
    };
    Ok(ReapingMap {
        permutation: LazyPermutation::from_oracle(
            format!("reap({},{})", y.label(), z.label()),
            Arc::new(oracle),
        ),
        y_prime: yp,
        z: z.clone(),
        r,
    })
}

/// Monte-Carlo statistics of Bernoulli(r) sets at a horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BernoulliStats {
    pub trials: u64,
    pub horizon: u64,
    pub tol: String,
    pub within: u64,
    pub within_permuted: u64,
}

impl BernoulliStats {
    pub fn fraction(&self) -> f64 {
        self.within as f64 / self.trials as f64
    }

    pub fn fraction_permuted(&self) -> f64 {
        self.within_permuted as f64 / self.trials as f64
    }
}

/// Seed of the `t`-th trial derived from the master seed.
pub fn trial_seed(seed: u64, t: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    rng.gen()
}

/// Fraction of `trials` Bernoulli(r) sets whose profile at `horizon` is within `tol` of `r`,
/// before and after applying `pi`.
pub fn bernoulli_density_sample(
    r: &BigRational,
    trials: u64,
    horizon: u64,
    seed: u64,
    tol: &BigRational,
    pi: &LazyPermutation,
) -> Result<BernoulliStats> {
    if !(r.is_positive() && *r < BigRational::one()) {
        return Err(DensityError::Precondition("need 0 < r < 1".into()));
    }
    if trials == 0 {
        return Err(DensityError::Precondition("need at least one trial".into()));
    }
    let (p, q) = (
        r.numer().to_u64().ok_or_else(|| DensityError::Resource("r too large".into()))?,
        r.denom().to_u64().ok_or_else(|| DensityError::Resource("r too large".into()))?,
    );
    let pre: Vec<u64> = (0..horizon).map(|m| pi.inverse(m)).collect::<Result<_>>()?;
    let reach = pre.iter().copied().max().unwrap_or(0) + 1;
    let within_tol = |count: u64| (rat_u(count, horizon) - r).abs() <= *tol;
    let (mut within, mut within_permuted) = (0, 0);
    for t in 0..trials {
        let bits = BernoulliBits::new(p, q, trial_seed(seed, t));
        let count_plain;
        let count_perm;
        if reach <= horizon.saturating_mul(4) {
            let prefix = bits.prefix(reach.max(horizon) as usize);
            count_plain = prefix[..horizon as usize].iter().filter(|&&b| b).count() as u64;
            count_perm = pre.iter().filter(|&&x| prefix[x as usize]).count() as u64;
        } else {
            count_plain = (0..horizon).filter(|&n| bits.bit(n)).count() as u64;
            count_perm = pre.iter().filter(|&&x| bits.bit(x)).count() as u64;
        }
        within += within_tol(count_plain) as u64;
        within_permuted += within_tol(count_perm) as u64;
    }
    Ok(BernoulliStats {
        trials,
        horizon,
        tol: tol.to_string(),
        within,
        within_permuted,
    })
}

/// Branch-coded subsets of a base set with pairwise intersections at most `bound`.
#[derive(Clone, Debug)]
pub struct AlmostDisjointFamily {
    pub sets: Vec<LazySet>,
    /// Declared maximum of `|W_i ∩ W_j|` for `i ≠ j`.
    pub bound: u64,
    /// Tree paths as bit strings read from the most significant bit.
    pub paths: Vec<u64>,
}

/// Witness `w` takes the base elements at the tree nodes on its path: node indices
/// `2^L − 1 + prefix_L(path)`. Paths start with the `⌈log₂ count⌉` bits of `w`, then
/// seeded bits, so two paths share at most `⌈log₂ count⌉` nodes.
pub fn almost_disjoint_witnesses(count: u64, base: &LazySet, seed: u64) -> Result<AlmostDisjointFamily> {
    if count == 0 || count > 1 << 12 {
        return Err(DensityError::Precondition(format!(
            "count must be in 1..=4096, got {count}"
        )));
    }
    let depth = if count <= 1 { 0 } else { 64 - (count - 1).leading_zeros() };
    let mut sets = Vec::with_capacity(count as usize);
    let mut paths = Vec::with_capacity(count as usize);
    for w in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, w));
        let noise: u64 = rng.gen();
        let path = if depth == 0 {
            noise
        } else {
            (w << (64 - depth)) | (noise >> depth)
        };
        paths.push(path);
        let b = base.clone();
        let set = LazySet::from_fallible_predicate(format!("branch({w})"), move |x| {
            if !b.contains(x)? {
                return Ok(false);
            }
            let node = b.rank(x)? + 1;
            let level = 63 - node.leading_zeros();
            let prefix = node - (1u64 << level);
            let on_path = if level == 0 { 0 } else { path >> (64 - level) };
            Ok(prefix == on_path)
        });
        let set = match base.limit() {
            Some(l) => set.with_limit(l),
            None => set,
        };
        sets.push(set.with_horizon_hint(base.horizon_hint()));
    }
    Ok(AlmostDisjointFamily {
        sets,
        bound: (depth as u64).max(1),
        paths,
    })
}

impl AlmostDisjointFamily {
    /// `|W_i ∩ W_j ∩ end|` for all pairs.
    pub fn intersection_matrix(&self, end: u64) -> Result<Vec<Vec<u64>>> {
        let members: Vec<BTreeSet<u64>> = self
            .sets
            .iter()
            .map(|s| s.members_below(end).map(|v| v.into_iter().collect()))
            .collect::<Result<_>>()?;
        Ok(members
            .iter()
            .map(|a| members.iter().map(|b| a.intersection(b).count() as u64).collect())
            .collect())
    }

    /// Largest off-diagonal entry of the intersection matrix.
    pub fn max_intersection(&self, end: u64) -> Result<u64> {
        let m = self.intersection_matrix(end)?;
        let mut worst = 0;
        for (i, row) in m.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if i != j {
                    worst = worst.max(v);
                }
            }
        }
        Ok(worst)
    }
}

/// A growth function evading `slalom_phi_plus(π)` everywhere, with a seeded offset.
pub fn evading_slalom_growth(pi: &LazyPermutation, seed: u64) -> impl Fn(u64) -> Option<u64> {
    let pi = pi.clone();
    let offset = seed % 16;
    move |n| {
        let mut y = pow2(n)?.checked_add(n + 1 + offset)?;
        while pi.forward(y).ok()? <= n {
            y = y.checked_add(1)?;
        }
        Some(y)
    }
}

/// A growth function evading `banakh_phi_plus(π)` everywhere, with a seeded offset.
pub fn evading_banakh_growth(pi: &LazyPermutation, seed: u64) -> impl Fn(u64) -> Option<u64> {
    let pi = pi.clone();
    let offset = seed % 8;
    move |x| {
        let mut y = x.checked_add(1 + offset)?;
        while pi.forward(y).ok()? <= x || pi.inverse(y).ok()? <= x {
            y = y.checked_add(1)?;
        }
        Some(y)
    }
}

type TrialFn = fn(u64, u64) -> Result<ReductionVerdict>;

/// A reduction map pair with a seeded implication check.
#[derive(Clone, Copy)]
pub struct ReductionPair {
    pub name: &'static str,
    pub description: &'static str,
    pub trial: TrialFn,
}

fn slalom_trial(seed: u64, horizon: u64) -> Result<ReductionVerdict> {
    let pi = LazyPermutation::seeded_finitary(seed);
    let g = evading_slalom_growth(&pi, seed);
    check_slalom_reduction(&pi, &g, 0, horizon)
}

fn banakh_trial(seed: u64, horizon: u64) -> Result<ReductionVerdict> {
    let pi = LazyPermutation::seeded_finitary(seed);
    let g = evading_banakh_growth(&pi, seed);
    check_banakh_reduction(&pi, &g, 0, horizon)
}

fn unbounding_trial(seed: u64, horizon: u64) -> Result<ReductionVerdict> {
    let pi = LazyPermutation::seeded_finitary(seed);
    let g = {
        let pi = pi.clone();
        move |n: u64| unbounding_phi_plus(&pi, n).ok().flatten().map(|v| v + 1)
    };
    Ok(unbounding_osc_witness(&pi, &g, horizon)?.verdict)
}

fn seeded_bits(seed: u64, len: usize) -> Vec<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen()).collect()
}

fn covmeager_trial(seed: u64, horizon: u64) -> Result<ReductionVerdict> {
    let pi = LazyPermutation::seeded_finitary(seed);
    let s = seeded_bits(seed, (seed % 8) as usize);
    let n0 = 1 + seed % 16;
    for dir in [Direction::AtLeast, Direction::AtMost] {
        let out = covmeager_extension_game(&pi, &s, n0, horizon, dir)?;
        let ratio_ok = match dir {
            Direction::AtLeast => 2 * out.count >= 2 * out.n,
            Direction::AtMost => 2 * out.count <= 2 * out.n,
        };
        if !(out.invariant_holds && out.identity_holds && ratio_ok) {
            return Ok(ReductionVerdict::Refuted {
                witness: out.n,
                detail: format!("{dir:?}: invariant or count identity failed"),
            });
        }
    }
    Ok(ReductionVerdict::Confirmed {
        detail: "both directions keep 2c ≥ d (resp. ≤) and the count identity".into(),
    })
}

fn covmeager_general_trial(seed: u64, horizon: u64) -> Result<ReductionVerdict> {
    let pi = LazyPermutation::seeded_finitary(seed);
    let c = 1 + (seed % 4) as u32;
    let ell = 1 + seed % ((1u64 << c) - 1);
    for dir in [Direction::AtLeast, Direction::AtMost] {
        let out = covmeager_general_game(&pi, ell, c, c, &rat(1, 20), horizon, dir)?;
        if !(out.invariant_holds && out.identity_holds) {
            return Ok(ReductionVerdict::Refuted {
                witness: out.b1 as u64,
                detail: format!("{dir:?}: invariant or count identity failed"),
            });
        }
    }
    Ok(ReductionVerdict::Confirmed {
        detail: "both directions stay within eps of r and keep the count identity".into(),
    })
}

fn reaping_trial(seed: u64, horizon: u64) -> Result<ReductionVerdict> {
    let a = LazySet::evens();
    let z = LazySet::arithmetic(seed % 2, 2);
    let inside = seed % 2 == 0;
    let y = if inside {
        LazySet::arithmetic(0, 4)
    } else {
        LazySet::arithmetic(1, 4)
    };
    let map = reaping_phi_plus(&y, &z, horizon)?;
    let est = estimate_density(
        &image_set(&map.permutation, &a, horizon),
        horizon,
        rat(1, 50),
        rat(1, 4),
    )?;
    let expected = if inside { rat(3, 4) } else { rat(1, 4) };
    if est.is_value_near(&expected, &rat(1, 50)) {
        Ok(ReductionVerdict::Confirmed {
            detail: format!("image Value near {expected}"),
        })
    } else {
        Ok(ReductionVerdict::inconclusive(format!(
            "image estimate {:?}, expected {expected}",
            est.verdict
        )))
    }
}

fn covnull_trial(seed: u64, horizon: u64) -> Result<ReductionVerdict> {
    let pi = LazyPermutation::seeded_finitary(seed);
    let stats = bernoulli_density_sample(&rat(1, 2), 1, horizon, seed, &rat(1, 50), &pi)?;
    if stats.within == 1 && stats.within_permuted == 1 {
        Ok(ReductionVerdict::Confirmed {
            detail: "sample and its image within 1/50 of 1/2".into(),
        })
    } else {
        Ok(ReductionVerdict::inconclusive("Monte-Carlo sample outside tolerance"))
    }
}

fn continuum_trial(seed: u64, horizon: u64) -> Result<ReductionVerdict> {
    let base = canonical_sparse_set();
    let fam = almost_disjoint_witnesses(2 + seed % 64, &base, seed)?;
    let worst = fam.max_intersection(horizon)?;
    if worst > fam.bound {
        return Ok(ReductionVerdict::Refuted {
            witness: worst,
            detail: format!("intersection {worst} exceeds bound {}", fam.bound),
        });
    }
    for s in &fam.sets {
        let est = estimate_density(s, horizon, rat(1, 100), rat(1, 4))?;
        if !config_value_zero(&est) {
            return Ok(ReductionVerdict::inconclusive(format!(
                "{} is not Value(0) at {horizon}",
                s.label()
            )));
        }
    }
    Ok(ReductionVerdict::Confirmed {
        detail: format!("max intersection {worst} ≤ {}; all Value(0)", fam.bound),
    })
}

/// All reductions known to the harness.
pub fn reduction_pairs() -> Vec<ReductionPair> {
    vec![
        ReductionPair {
            name: "slalom",
            description: "tower set of an evading g keeps density 0 under π",
            trial: slalom_trial,
        },
        ReductionPair {
            name: "banakh",
            description: "recursion set of an evading g meets the S-relation finitely",
            trial: banakh_trial,
        },
        ReductionPair {
            name: "unbounding",
            description: "union of blocks between g-boundaries oscillates under π",
            trial: unbounding_trial,
        },
        ReductionPair {
            name: "covmeager",
            description: "extension game reaches ratio ≥ 1/2 and ≤ 1/2 at a closure point",
            trial: covmeager_trial,
        },
        ReductionPair {
            name: "covmeager-general",
            description: "extension game for dyadic r on the block scheme",
            trial: covmeager_general_trial,
        },
        ReductionPair {
            name: "reaping",
            description: "y' → z map sends d(A) to r + d(A)(1−r) or d(A)(1−r)",
            trial: reaping_trial,
        },
        ReductionPair {
            name: "covnull",
            description: "Bernoulli(1/2) samples keep density 1/2 under a finitary π",
            trial: covnull_trial,
        },
        ReductionPair {
            name: "continuum",
            description: "branch-coded subsets of a sparse set are almost disjoint",
            trial: continuum_trial,
        },
    ]
}

pub fn reduction_by_name(name: &str) -> Option<ReductionPair> {
    reduction_pairs().into_iter().find(|p| p.name == name)
}

#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    #[serde(flatten)]
    pub verdict: ReductionVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct HarnessReport {
    pub reduction: String,
    pub trials: u64,
    pub horizon: u64,
    pub seed: u64,
    pub confirmed: u64,
    pub inconclusive: u64,
    pub refuted: u64,
    pub witnesses: Vec<TrialRecord>,
}

/// Runs `trials` seeded instances of a reduction check.
pub fn run_harness(pair: &ReductionPair, trials: u64, horizon: u64, seed: u64) -> Result<HarnessReport> {
    let mut report = HarnessReport {
        reduction: pair.name.to_string(),
        trials,
        horizon,
        seed,
        confirmed: 0,
        inconclusive: 0,
        refuted: 0,
        witnesses: Vec::with_capacity(trials as usize),
    };
    for t in 0..trials {
        let s = trial_seed(seed, t);
        let verdict = (pair.trial)(s, horizon)?;
        match &verdict {
            ReductionVerdict::Confirmed { .. } => report.confirmed += 1,
            ReductionVerdict::Inconclusive { .. } => report.inconclusive += 1,
            ReductionVerdict::Refuted { .. } => report.refuted += 1,
        }
        report.witnesses.push(TrialRecord {
            trial: t,
            seed: s,
            verdict,
        });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slalom_phi_plus_examples() {
        let id = LazyPermutation::identity();
        assert_eq!(
            slalom_phi_plus(&id, 2).unwrap(),
            [0, 1, 2, 3].into_iter().collect()
        );
        let rev = LazyPermutation::interval_reversal(4, 8);
        let s = slalom_phi_plus(&rev, 4).unwrap();
        assert_eq!(s.len(), 16);
        for seed in 0..100 {
            let pi = LazyPermutation::seeded_finitary(seed);
            let sl = slalom_phi_plus_slalom(&pi);
            for n in 0..=12 {
                sl.slots(n).unwrap();
            }
        }
    }

    #[test]
    fn tower_sets() {
        let g = |n: u64| pow2(n);
        let a = slalom_phi_minus(&g).unwrap();
        assert_eq!(a.members_below(u64::MAX).unwrap(), vec![0, 1, 2, 4, 16, 65536]);
        let g = |n: u64| if n == 0 { Some(0) } else { pow2(n) };
        let a = slalom_phi_minus(&g).unwrap();
        assert_eq!(a.nth(1).unwrap(), 1);
        let shifted = |n: u64| pow2(n).and_then(|p| p.checked_add(n));
        let a = slalom_phi_minus(&shifted).unwrap();
        let e = estimate_density(&a, 1 << 16, rat(1, 100), rat(1, 4)).unwrap();
        assert_eq!(e.value(), Some(&rat(0, 1)));
    }

    #[test]
    fn slalom_reduction_identity_and_collision() {
        let id = LazyPermutation::identity();
        let g = |n: u64| pow2(n).and_then(|p| p.checked_add(n + 2));
        assert!(check_slalom_reduction(&id, &g, 0, 1 << 16).unwrap().is_confirmed());
        let collide = LazyPermutation::transposition(3, (1 << 10) + 10 + 2);
        match check_slalom_reduction(&collide, &g, 0, 1 << 16).unwrap() {
            ReductionVerdict::Inconclusive { reason } => assert!(reason.contains("n = 10")),
            v => panic!("expected inconclusive, got {v:?}"),
        }
    }

    #[test]
    fn banakh_examples() {
        let id = LazyPermutation::identity();
        assert_eq!(banakh_phi_plus(&id, 3).unwrap().len(), 4);
        for seed in 0..20 {
            let pi = LazyPermutation::seeded_finitary(seed);
            for n in 0..=14 {
                assert!(banakh_phi_plus(&pi, n).unwrap().len() as u64 <= 3 * (n + 1));
            }
        }
    }

    #[test]
    fn unbounding_values() {
        let id = LazyPermutation::identity();
        assert_eq!(unbounding_phi_plus(&id, 3).unwrap(), Some(11));
        let rev = LazyPermutation::dyadic_reversal();
        // max over k ≤ 3 of π(k), π⁻¹(k) is π(2) = 3, plus 8
        assert_eq!(unbounding_phi_plus(&rev, 3).unwrap(), Some(11));
        assert_eq!(unbounding_phi_plus(&rev, 4).unwrap(), Some(7 + 16));
    }

    #[test]
    fn unbounding_boundaries_are_a_tower() {
        let id = LazyPermutation::identity();
        let g = |n: u64| pow2(n).and_then(|p| p.checked_add(n + 1));
        let rep = unbounding_osc_witness(&id, &g, 1 << 18).unwrap();
        assert_eq!(rep.boundaries, vec![0, 2, 7, 136]);
        assert!(matches!(rep.verdict, ReductionVerdict::Inconclusive { .. }));
    }

    #[test]
    fn extension_game_identity_is_exact_half() {
        let out = covmeager_extension_game(
            &LazyPermutation::identity(),
            &[],
            4,
            1 << 12,
            Direction::AtLeast,
        )
        .unwrap();
        assert_eq!(out.ratio(), rat(1, 2));
        assert!(out.identity_holds && out.invariant_holds);
    }

    #[test]
    fn extension_game_case_three_forces_one() {
        // π(2) = 0 stays below 2n, π(3) is pushed far out
        let pi = LazyPermutation::from_finite_map("t", &[(0, 2), (2, 0), (3, 40), (40, 3)]).unwrap();
        let out = covmeager_extension_game(&pi, &[false], 1, 1 << 12, Direction::AtLeast).unwrap();
        let step = out.steps.iter().find(|s| s.j == 1).unwrap();
        assert_eq!(step.case, 3);
        assert!(step.bit);
        assert!(out.identity_holds && out.invariant_holds);
    }

    #[test]
    fn general_game_runs() {
        for seed in 0..10 {
            let pi = LazyPermutation::seeded_finitary(seed);
            for dir in [Direction::AtLeast, Direction::AtMost] {
                let out = covmeager_general_game(&pi, 3, 2, 2, &rat(1, 20), 1 << 20, dir).unwrap();
                assert!(out.invariant_holds && out.identity_holds, "{seed} {dir:?}");
            }
        }
        assert!(covmeager_general_game(
            &LazyPermutation::identity(),
            1,
            5,
            5,
            &rat(1, 20),
            1 << 20,
            Direction::AtLeast
        )
        .is_err());
    }

    #[test]
    fn kept_indices_agree() {
        let mut i = 0;
        for j in 0..5000u64 {
            assert_eq!(kept_rank(j), i);
            if is_kept(j) {
                assert_eq!(kept_index(i).unwrap(), j);
                i += 1;
            }
        }
    }

    #[test]
    fn reaping_map_is_order_preserving() {
        let map = reaping_phi_plus(&LazySet::arithmetic(0, 4), &LazySet::evens(), 1 << 14).unwrap();
        map.permutation.audit_bijective(1 << 12).unwrap();
        map.audit_order_preserving(1 << 12).unwrap();
    }

    #[test]
    fn bernoulli_identity_matches_plain() {
        let s = bernoulli_density_sample(
            &rat(1, 2),
            20,
            1 << 12,
            3,
            &rat(1, 20),
            &LazyPermutation::identity(),
        )
        .unwrap();
        assert_eq!(s.within, s.within_permuted);
    }

    #[test]
    fn almost_disjoint_pair() {
        let fam = almost_disjoint_witnesses(2, &LazySet::naturals(), 9).unwrap();
        assert!(fam.max_intersection(1 << 12).unwrap() <= fam.bound);
        let fam = almost_disjoint_witnesses(100, &LazySet::naturals(), 9).unwrap();
        assert!(fam.max_intersection(1 << 12).unwrap() <= fam.bound);
    }

    #[test]
    fn harness_names_are_unique() {
        let names: BTreeSet<&str> = reduction_pairs().iter().map(|p| p.name).collect();
        assert_eq!(names.len(), reduction_pairs().len());
        assert!(reduction_by_name("slalom").is_some());
        assert!(reduction_by_name("nope").is_none());
    }

    #[test]
    fn harness_never_refutes() {
        for pair in reduction_pairs() {
            let rep = run_harness(&pair, 6, 1 << 14, 7).unwrap();
            assert_eq!(rep.refuted, 0, "{}", pair.name);
            if pair.name != "unbounding" {
                assert_eq!(rep.confirmed, 6, "{}", pair.name);
            }
        }
    }
}
