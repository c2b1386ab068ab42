//! Conditions A and B on finite prefixes, interval decompositions of `π⁻¹[m]`, and the
//! block counterexample of a permutation that moves a relative density.

use std::collections::HashSet;
use std::fmt;

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::density::{
    checkpoint_schedule, estimate_from_profile, image_set, rat_u, relative_density_profile,
    EstimateConfig, Verdict,
};
use crate::error::{DensityError, Result};
use crate::perms::{LazyPermutation, Tail};
use crate::sets::LazySet;

/// Maximal half-open intervals whose union is `π⁻¹[m]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalDecomposition {
    pub m: u64,
    pub intervals: Vec<(u64, u64)>,
}

impl IntervalDecomposition {
    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    /// Disjoint, non-adjacent, nonempty, and `m` elements in total.
    pub fn audit(&self) -> Result<()> {
        let mut total = 0u64;
        for (i, &(a, b)) in self.intervals.iter().enumerate() {
            if a >= b {
                return Err(DensityError::Integrity(format!("empty interval [{a},{b})")));
            }
            if i > 0 && self.intervals[i - 1].1 >= a {
                return Err(DensityError::Integrity(format!(
                    "intervals {i} and {} overlap or touch",
                    i - 1
                )));
            }
            total += b - a;
        }
        if total != self.m {
            return Err(DensityError::Integrity(format!(
                "decomposition covers {total} points, expected {}",
                self.m
            )));
        }
        Ok(())
    }
}

pub fn interval_count(pi: &LazyPermutation, m: u64) -> Result<IntervalDecomposition> {
    if m == 0 {
        return Err(DensityError::Precondition("interval count needs m >= 1".into()));
    }
    let mut pre: Vec<u64> = (0..m).map(|k| pi.inverse(k)).collect::<Result<_>>()?;
    pre.sort_unstable();
    let mut intervals: Vec<(u64, u64)> = Vec::new();
    for x in pre {
        match intervals.last_mut() {
            Some(last) if last.1 == x => last.1 = x + 1,
            _ => intervals.push((x, x + 1)),
        }
    }
    Ok(IntervalDecomposition { m, intervals })
}

/// Verdict of a condition check on a prefix. `k` passes when no violation exceeds size `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "lowercase")]
pub enum ConditionVerdict {
    Pass {
        k: u64,
        horizon: u64,
        max_size: u64,
    },
    Violation {
        k: u64,
        horizon: u64,
        size: u64,
        m: Vec<u64>,
        n: Vec<u64>,
    },
}

impl ConditionVerdict {
    pub fn is_pass(&self) -> bool {
        matches!(self, ConditionVerdict::Pass { .. })
    }

    /// Largest violation size found on the prefix.
    pub fn max_size(&self) -> u64 {
        match self {
            ConditionVerdict::Pass { max_size, .. } => *max_size,
            ConditionVerdict::Violation { size, .. } => *size,
        }
    }
}

impl fmt::Display for ConditionVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConditionVerdict::Pass { horizon, max_size, .. } => {
                write!(f, "pass@{horizon} (max size {max_size})")
            }
            ConditionVerdict::Violation { horizon, size, .. } => {
                write!(f, "violation@{horizon} (size {size})")
            }
        }
    }
}

fn check_k(k: u64) -> Result<()> {
    if k == 0 {
        return Err(DensityError::Precondition("k must be at least 1".into()));
    }
    Ok(())
}

/// Largest interval count of `π⁻¹[m]` over `1 ≤ m < horizon`, with the maximizing `m`.
pub fn max_interval_count(pi: &LazyPermutation, horizon: u64) -> Result<(u64, u64)> {
    let mut present = HashSet::new();
    let (mut count, mut best, mut best_m) = (0i64, 0u64, 1u64);
    for m in 1..horizon {
        let x = pi.inverse(m - 1)?;
        let left = x > 0 && present.contains(&(x - 1));
        let right = present.contains(&(x + 1));
        count += 1 - left as i64 - right as i64;
        present.insert(x);
        if count as u64 > best {
            best = count as u64;
            best_m = m;
        }
    }
    Ok((best, best_m))
}

/// Collated `M`, `N` with `π[M] < π[N]`, of size greater than `k`, or a pass on `[0, horizon)`.
///
/// A decomposition of `π⁻¹[m]` into `j` maximal intervals yields collated sets of size `j`
/// (left endpoints against the points just past each interval), and conversely, so the
/// search runs over interval counts.
pub fn condition_a_check(pi: &LazyPermutation, k: u64, horizon: u64) -> Result<ConditionVerdict> {
    check_k(k)?;
    let (best, best_m) = max_interval_count(pi, horizon)?;
    if best <= k {
        return Ok(ConditionVerdict::Pass {
            k,
            horizon,
            max_size: best,
        });
    }
    let dec = interval_count(pi, best_m)?;
    let m = dec.intervals.iter().map(|&(a, _)| a).collect();
    let n = dec.intervals.iter().map(|&(_, b)| b).collect();
    Ok(ConditionVerdict::Violation {
        k,
        horizon,
        size: best,
        m,
        n,
    })
}

/// Fenwick tree over `0..len` counting present ranks.
struct Fenwick {
    tree: Vec<u32>,
    total: u64,
}

impl Fenwick {
    fn new(len: usize) -> Self {
        Fenwick {
            tree: vec![0; len + 1],
            total: 0,
        }
    }

    fn add(&mut self, i: usize, delta: i32) {
        let mut j = i + 1;
        while j < self.tree.len() {
            self.tree[j] = (self.tree[j] as i64 + delta as i64) as u32;
            j += j & j.wrapping_neg();
        }
        self.total = (self.total as i64 + delta as i64) as u64;
    }

    /// Rank index of the `k`-th smallest present element, `k ≥ 1`.
    fn kth(&self, mut k: u64) -> usize {
        let mut pos = 0usize;
        let mut step = (self.tree.len() - 1).next_power_of_two();
        while step > 0 {
            let nxt = pos + step;
            if nxt < self.tree.len() && (self.tree[nxt] as u64) < k {
                pos = nxt;
                k -= self.tree[nxt] as u64;
            }
            step >>= 1;
        }
        pos
    }
}

/// Sets `M < N` with `|M| = |N| > k` and `π[N] < π[M]`, or a pass on `[0, horizon)`.
///
/// For each split `p`, compares the `s` largest `π`-values below `p` with the `s` smallest
/// at or above `p`; a violation of size `s` at that split exists iff the former's minimum
/// exceeds the latter's maximum.
pub fn condition_b_check(pi: &LazyPermutation, k: u64, horizon: u64) -> Result<ConditionVerdict> {
    check_k(k)?;
    let h = horizon as usize;
    let vals: Vec<u64> = (0..horizon).map(|x| pi.forward(x)).collect::<Result<_>>()?;
    let mut sorted = vals.clone();
    sorted.sort_unstable();
    let rank = |v: u64| sorted.binary_search(&v).expect("value present");
    let ranks: Vec<usize> = vals.iter().map(|&v| rank(v)).collect();
    let mut left = Fenwick::new(h);
    let mut right = Fenwick::new(h);
    for &r in &ranks {
        right.add(r, 1);
    }
    let (mut best, mut best_p) = (0u64, 0usize);
    for p in 1..h {
        left.add(ranks[p - 1], 1);
        right.add(ranks[p - 1], -1);
        let cap = left.total.min(right.total);
        if cap <= best {
            continue;
        }
        let violates = |s: u64| left.kth(left.total - s + 1) > right.kth(s);
        if !violates(best + 1) {
            continue;
        }
        let (mut lo, mut hi) = (best + 1, cap);
        while lo < hi {
            let mid = lo + (hi - lo).div_ceil(2);
            if violates(mid) {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        best = lo;
        best_p = p;
    }
    if best <= k {
        return Ok(ConditionVerdict::Pass {
            k,
            horizon,
            max_size: best,
        });
    }
    let mut below: Vec<(usize, u64)> = (0..best_p).map(|x| (ranks[x], x as u64)).collect();
    below.sort_unstable_by(|a, b| b.cmp(a));
    let mut m: Vec<u64> = below.iter().take(best as usize).map(|&(_, x)| x).collect();
    let mut above: Vec<(usize, u64)> = (best_p..h).map(|x| (ranks[x], x as u64)).collect();
    above.sort_unstable();
    let mut n: Vec<u64> = above.iter().take(best as usize).map(|&(_, x)| x).collect();
    m.sort_unstable();
    n.sort_unstable();
    Ok(ConditionVerdict::Violation {
        k,
        horizon,
        size: best,
        m,
        n,
    })
}

/// Block data of the counterexample. Block `i` lives on the even numbers with indices
/// (position among the evens) in `[2ℓ_i, 2ℓ_{i+1})`: `M_i` first, then `N_i`.
#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleBlocks {
    pub realized_depth: usize,
    pub k: Vec<u64>,
    /// `ℓ_i = Σ_{j<i} k_j`.
    pub ell: Vec<u64>,
    pub m_sets: Vec<Vec<u64>>,
    pub n_sets: Vec<Vec<u64>>,
    pub a_sets: Vec<Vec<u64>>,
    pub b_sets: Vec<Vec<u64>>,
}

/// The counterexample permutation together with `A ⊆ B`.
#[derive(Clone, Debug)]
pub struct Counterexample {
    pub blocks: CounterexampleBlocks,
    pub permutation: LazyPermutation,
    pub a: LazySet,
    pub b: LazySet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckpointRow {
    /// `peak` at `max π[A_i] + 1`, `dip` at `min π[M_i]`.
    pub kind: &'static str,
    pub block: usize,
    pub checkpoint: u64,
    pub numerator: u64,
    pub denominator: u64,
}

impl CheckpointRow {
    pub fn ratio(&self) -> BigRational {
        rat_u(self.numerator, self.denominator)
    }
}

pub const MAX_COUNTEREXAMPLE_DEPTH: usize = 6;

fn block_sizes(depth: usize) -> (Vec<u64>, Vec<u64>) {
    let mut k = vec![2u64];
    let mut ell = vec![0u64];
    for i in 1..=depth {
        let l = ell[i - 1] + k[i - 1];
        ell.push(l);
        k.push((1u64 << i) * l);
    }
    (k, ell)
}

/// Image position of the B-index `p` inside the realized blocks.
fn block_image(p: u64, k: &[u64], ell: &[u64]) -> u64 {
    let i = ell.partition_point(|&l| 2 * l <= p) - 1;
    let (base, ki, li) = (2 * ell[i], k[i], ell[i]);
    let off = p - base;
    if off < ki {
        return base + ki + off;
    }
    let u = off - ki;
    if u < 2 * li && u % 2 == 0 {
        base + u / 2
    } else if u < 2 * li {
        base + li + (u - 1) / 2
    } else {
        base + li + (u - li)
    }
}

/// Realizes blocks `0..depth`. `B` is the even numbers and `A` the multiples of 4: inside
/// each `M_i` and `N_i` the members of `A` are the even offsets, which interleaves
/// `A_i` with `B_i` and takes every other `m_{i,j}` and `n_{i,j}`.
pub fn counterexample_blocks(depth: usize) -> Result<Counterexample> {
    if depth == 0 {
        return Err(DensityError::Precondition("depth must be at least 1".into()));
    }
    if depth > MAX_COUNTEREXAMPLE_DEPTH {
        return Err(DensityError::Resource(format!(
            "depth {depth} exceeds {MAX_COUNTEREXAMPLE_DEPTH}"
        )));
    }
    let (k, ell) = block_sizes(depth);
    let span = 2 * ell[depth];
    let mut inv = vec![0u64; 2 * span as usize];
    for x in 0..2 * span {
        let y = if x % 2 == 1 {
            x
        } else {
            2 * block_image(x / 2, &k, &ell)
        };
        inv[y as usize] = x;
    }
    let permutation = LazyPermutation::from_inverse_table(
        format!("counterexample({depth})"),
        inv,
        Tail::Identity,
    )?;
    let mut blocks = CounterexampleBlocks {
        realized_depth: depth,
        k: k[..depth].to_vec(),
        ell: ell[..depth].to_vec(),
        m_sets: vec![],
        n_sets: vec![],
        a_sets: vec![],
        b_sets: vec![],
    };
    for i in 0..depth {
        let base = 2 * ell[i];
        let el = |p: u64| 2 * p;
        blocks.m_sets.push((base..base + k[i]).map(el).collect());
        let n: Vec<u64> = (base + k[i]..base + 2 * k[i]).map(el).collect();
        let li = ell[i] as usize;
        blocks.a_sets.push(n.iter().step_by(2).take(li).copied().collect());
        blocks
            .b_sets
            .push(n.iter().skip(1).step_by(2).take(li).copied().collect());
        blocks.n_sets.push(n);
    }
    Ok(Counterexample {
        blocks,
        permutation,
        a: LazySet::arithmetic(0, 4),
        b: LazySet::evens(),
    })
}

impl Counterexample {
    /// Last element of the realized blocks, plus one.
    pub fn end(&self) -> u64 {
        let d = self.blocks.realized_depth - 1;
        4 * (self.blocks.ell[d] + self.blocks.k[d])
    }

    /// Checks sizes, block order and the order of images.
    pub fn audit(&self) -> Result<()> {
        let bl = &self.blocks;
        let pi = &self.permutation;
        let images = |s: &[u64]| -> Result<Vec<u64>> { s.iter().map(|&x| pi.forward(x)).collect() };
        let fail = |msg: String| Err(DensityError::Integrity(msg));
        for i in 0..bl.realized_depth {
            let (m, n) = (&bl.m_sets[i], &bl.n_sets[i]);
            if m.len() as u64 != bl.k[i] || n.len() as u64 != bl.k[i] {
                return fail(format!("block {i} has wrong size"));
            }
            if bl.a_sets[i].len() as u64 != bl.ell[i] || bl.b_sets[i].len() as u64 != bl.ell[i] {
                return fail(format!("A_{i} or B_{i} has wrong size"));
            }
            if m.last() >= n.first() {
                return fail(format!("M_{i} < N_{i} fails"));
            }
            let (pm, pn) = (images(m)?, images(n)?);
            if pn.iter().max() >= pm.iter().min() {
                return fail(format!("π[N_{i}] < π[M_{i}] fails"));
            }
            if i + 1 < bl.realized_depth {
                if n.last() >= bl.m_sets[i + 1].first() {
                    return fail(format!("N_{i} < M_{} fails", i + 1));
                }
                let pn1 = images(&bl.n_sets[i + 1])?;
                if pm.iter().max() >= pn1.iter().min() {
                    return fail(format!("π[M_{i}] < π[N_{}] fails", i + 1));
                }
            }
            let mut pa = images(&bl.a_sets[i])?;
            pa.sort_unstable();
            let mut sorted_pn = pn.clone();
            sorted_pn.sort_unstable();
            if pa[..] != sorted_pn[..pa.len()] {
                return fail(format!("π[A_{i}] is not an initial segment of π[N_{i}]"));
            }
        }
        Ok(())
    }

    fn image_counts(&self, n: u64) -> Result<(u64, u64)> {
        let mut num = 0;
        for y in (0..n).step_by(2) {
            if self.a.contains(self.permutation.inverse(y)?)? {
                num += 1;
            }
        }
        Ok((num, n.div_ceil(2)))
    }

    /// `|π[A] ∩ c| / |π[B] ∩ c|` at the peaks `max π[A_i] + 1` (`i ≥ 1`) and the dips
    /// `min π[M_i]`.
    pub fn checkpoint_rows(&self) -> Result<Vec<CheckpointRow>> {
        let bl = &self.blocks;
        let mut rows = Vec::new();
        for i in 0..bl.realized_depth {
            if bl.ell[i] > 0 {
                let c = 2 * (3 * bl.ell[i] - 1) + 1;
                let (numerator, denominator) = self.image_counts(c)?;
                rows.push(CheckpointRow {
                    kind: "peak",
                    block: i,
                    checkpoint: c,
                    numerator,
                    denominator,
                });
            }
            let c = 2 * (2 * bl.ell[i] + bl.k[i]);
            let (numerator, denominator) = self.image_counts(c)?;
            rows.push(CheckpointRow {
                kind: "dip",
                block: i,
                checkpoint: c,
                numerator,
                denominator,
            });
        }
        Ok(rows)
    }

    pub fn rows_to_csv(rows: &[CheckpointRow]) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "block", "checkpoint", "numerator", "denominator", "ratio"])
            .expect("in-memory write");
        for r in rows {
            w.write_record([
                r.kind.to_string(),
                r.block.to_string(),
                r.checkpoint.to_string(),
                r.numerator.to_string(),
                r.denominator.to_string(),
                r.ratio().to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }

    /// `|A ∩ n| / |B ∩ n|` on the schedule up to the end of the realized blocks.
    pub fn source_profile(&self) -> Result<crate::density::DensityProfile> {
        relative_density_profile(&self.a, &self.b, &checkpoint_schedule(self.end()))
    }
}

/// `d_B(A)` before and after applying `π`.
#[derive(Clone, Debug, Serialize)]
pub struct PairOutcome {
    pub before: String,
    pub after: String,
    /// `|r_before − r_after|` when both are values.
    pub discrepancy: Option<f64>,
}

fn relative_estimate(
    a: &LazySet,
    b: &LazySet,
    horizon: u64,
    cfg: &EstimateConfig,
) -> Result<Verdict> {
    let first = b.nth(0)?;
    let schedule: Vec<u64> = checkpoint_schedule(horizon)
        .into_iter()
        .filter(|&c| c > first)
        .collect();
    let profile = relative_density_profile(a, b, &schedule)?;
    Ok(estimate_from_profile(&profile, horizon, cfg)?.verdict)
}

pub fn pair_discrepancy(
    pi: &LazyPermutation,
    a: &LazySet,
    b: &LazySet,
    horizon: u64,
    cfg: &EstimateConfig,
) -> Result<PairOutcome> {
    let before = relative_estimate(a, b, horizon, cfg)?;
    let after = relative_estimate(&image_set(pi, a, horizon), &image_set(pi, b, horizon), horizon, cfg)?;
    let discrepancy = match (&before, &after) {
        (Verdict::Value { r: r0, .. }, Verdict::Value { r: r1, .. }) => {
            (r0 - r1).abs().to_f64()
        }
        _ => None,
    };
    Ok(PairOutcome {
        before: format!("{before:?}"),
        after: format!("{after:?}"),
        discrepancy,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct AuditStats {
    pub trials: u64,
    pub compared: u64,
    pub skipped: u64,
    pub max_discrepancy: f64,
    pub tol: String,
}

/// Compares `d_B(A)` with `d_{π[B]}(π[A])` on seeded Bernoulli pairs `A ⊆ B`.
/// Requires `π` to pass condition B at `k` on the horizon.
pub fn preservation_audit(
    pi: &LazyPermutation,
    k: u64,
    trials: u64,
    horizon: u64,
    seed: u64,
    cfg: &EstimateConfig,
) -> Result<AuditStats> {
    if !condition_b_check(pi, k, horizon.min(1 << 16))?.is_pass() {
        return Err(DensityError::Precondition(format!(
            "{} fails condition B at k = {k}",
            pi.label()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = AuditStats {
        trials,
        compared: 0,
        skipped: 0,
        max_discrepancy: 0.0,
        tol: cfg.tol.to_string(),
    };
    for _ in 0..trials {
        let b = LazySet::bernoulli(1, 2, rng.gen());
        let p = rng.gen_range(1..4u64);
        let inner = LazySet::bernoulli(p, 4, rng.gen());
        let bb = b.clone();
        let a = LazySet::from_fallible_predicate("A", move |x| Ok(bb.contains(x)? && inner.contains(x)?));
        match pair_discrepancy(pi, &a, &b, horizon, cfg)?.discrepancy {
            Some(d) => {
                stats.compared += 1;
                stats.max_discrepancy = stats.max_discrepancy.max(d);
            }
            None => stats.skipped += 1,
        }
    }
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::rat;

    #[test]
    fn interval_examples() {
        let id = LazyPermutation::identity();
        assert_eq!(interval_count(&id, 7).unwrap().intervals, vec![(0, 7)]);
        let swap = LazyPermutation::pair_swap();
        let d = interval_count(&swap, 7).unwrap();
        assert_eq!(d.intervals, vec![(0, 6), (7, 8)]);
        d.audit().unwrap();
        // dyadic reversal of [4,8): π⁻¹[6] = {0..3} ∪ {6,7}
        let rev = LazyPermutation::dyadic_reversal();
        let d = interval_count(&rev, 6).unwrap();
        assert_eq!(d.intervals, vec![(0, 4), (6, 8)]);
    }

    #[test]
    fn identity_passes_both() {
        let id = LazyPermutation::identity();
        assert!(condition_a_check(&id, 1, 1 << 10).unwrap().is_pass());
        assert!(condition_b_check(&id, 1, 1 << 10).unwrap().is_pass());
        assert_eq!(condition_b_check(&id, 1, 1 << 10).unwrap().max_size(), 0);
    }

    #[test]
    fn block_swap_violates_b_at_four() {
        let swap = LazyPermutation::from_finite_map(
            "swap4",
            &(0..8).map(|n| (n, (n + 4) % 8)).collect::<Vec<_>>(),
        )
        .unwrap();
        match condition_b_check(&swap, 3, 64).unwrap() {
            ConditionVerdict::Violation { size, m, n, .. } => {
                assert_eq!(size, 4);
                assert_eq!(m, vec![0, 1, 2, 3]);
                assert_eq!(n, vec![4, 5, 6, 7]);
            }
            v => panic!("{v:?}"),
        }
        assert!(condition_b_check(&swap, 4, 64).unwrap().is_pass());
    }

    #[test]
    fn interleaving_split_violates_a() {
        // even-odd split of each block [8b, 8b+8): unbounded interval counts in the limit
        let pi = LazyPermutation::from_fns(
            "split",
            |n| {
                let (b, o) = (n / 8, n % 8);
                Ok(8 * b + if o % 2 == 0 { o / 2 } else { 4 + o / 2 })
            },
            |n| {
                let (b, o) = (n / 8, n % 8);
                Ok(8 * b + if o < 4 { 2 * o } else { 2 * (o - 4) + 1 })
            },
        );
        match condition_a_check(&pi, 3, 64).unwrap() {
            ConditionVerdict::Violation { size, m, n, .. } => {
                assert_eq!(size, 4);
                for i in 0..m.len() {
                    assert!(m[i] < n[i]);
                    if i + 1 < m.len() {
                        assert!(n[i] < m[i + 1]);
                    }
                }
                let top = m.iter().map(|&x| pi.forward(x).unwrap()).max().unwrap();
                let bot = n.iter().map(|&x| pi.forward(x).unwrap()).min().unwrap();
                assert!(top < bot);
            }
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn counterexample_rows_are_exact() {
        let ce = counterexample_blocks(5).unwrap();
        ce.audit().unwrap();
        assert_eq!(ce.blocks.k, vec![2, 4, 24, 240, 4320]);
        assert_eq!(ce.blocks.ell, vec![0, 2, 6, 30, 270]);
        for row in ce.checkpoint_rows().unwrap() {
            let want = if row.kind == "peak" { rat(2, 3) } else { rat(1, 2) };
            assert_eq!(row.ratio(), want, "{row:?}");
        }
        ce.permutation.audit_bijective(ce.end()).unwrap();
    }

    #[test]
    fn counterexample_depth_limits() {
        assert!(matches!(counterexample_blocks(7), Err(DensityError::Resource(_))));
        assert!(counterexample_blocks(0).is_err());
    }

    #[test]
    fn counterexample_fails_b_by_largest_block() {
        let ce = counterexample_blocks(3).unwrap();
        let v = condition_b_check(&ce.permutation, 1, ce.end()).unwrap();
        assert_eq!(v.max_size(), 24);
    }

    #[test]
    fn audit_identity_is_exact() {
        let cfg = EstimateConfig::new(rat(1, 50), rat(1, 4));
        let s = preservation_audit(&LazyPermutation::identity(), 1, 4, 1 << 14, 5, &cfg).unwrap();
        assert_eq!(s.max_discrepancy, 0.0);
    }
}
