//! Real series and sequences: p.c.c. evidence, greedy Riemann rearrangement, padding,
//! shifting by an absolutely convergent series, and Cesàro-mean rearrangement.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{DensityError, Result};
use crate::perms::{LazyPermutation, Tail};
use crate::sets::LazySet;

/// Neumaier-compensated running sum. Exact zeros are skipped so padded series
/// reproduce the original partial sums bit for bit.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        if x == 0.0 {
            return;
        }
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

type TermFn = Arc<dyn Fn(u64) -> Result<f64> + Send + Sync>;

/// A real sequence `n ↦ a_n` read as a series.
#[derive(Clone)]
pub struct SeriesSpec {
    label: String,
    term: TermFn,
    precision: f64,
}

impl fmt::Debug for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SeriesSpec")
            .field("label", &self.label)
            .field("precision", &self.precision)
            .finish()
    }
}

pub const DEFAULT_PRECISION: f64 = 1e-9;

impl SeriesSpec {
    pub fn new<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Result<f64> + Send + Sync + 'static,
    {
        SeriesSpec {
            label: label.into(),
            term: Arc::new(f),
            precision: DEFAULT_PRECISION,
        }
    }

    pub fn from_fn<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> f64 + Send + Sync + 'static,
    {
        Self::new(label, move |n| Ok(f(n)))
    }

    /// `(−1)^n / (n+1)`, summing to `ln 2`.
    pub fn alternating_harmonic() -> Self {
        Self::from_fn("altharm", |n| {
            let v = 1.0 / (n as f64 + 1.0);
            if n % 2 == 0 {
                v
            } else {
                -v
            }
        })
    }

    /// `1 / (n+1)²`.
    pub fn inverse_squares() -> Self {
        Self::from_fn("invsq", |n| {
            let d = n as f64 + 1.0;
            1.0 / (d * d)
        })
    }

    /// `(−1)^n`.
    pub fn alternating_signs() -> Self {
        Self::from_fn("signs", |n| if n % 2 == 0 { 1.0 } else { -1.0 })
    }

    /// `a_n = n`.
    pub fn naturals() -> Self {
        Self::from_fn("naturals", |n| n as f64)
    }

    /// Listed values, then zeros.
    /// A finite term list; queries past its end are horizon errors.
    pub fn from_values(label: impl Into<String>, values: Vec<f64>) -> Self {
        Self::new(label, move |n| {
            values
                .get(n as usize)
                .copied()
                .ok_or_else(|| DensityError::horizon(n, values.len() as u64))
        })
    }

    pub fn with_precision(mut self, precision: f64) -> Self {
        self.precision = precision;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn precision(&self) -> f64 {
        self.precision
    }

    pub fn term(&self, n: u64) -> Result<f64> {
        (self.term)(n)
    }

    /// `s_1, …, s_h` where `s_k = a_0 + … + a_{k−1}`.
    pub fn partial_sums(&self, h: u64) -> Result<Vec<f64>> {
        let mut acc = KahanSum::new();
        let mut out = Vec::with_capacity(h as usize);
        for n in 0..h {
            acc.add(self.term(n)?);
            out.push(acc.value());
        }
        Ok(out)
    }

    pub fn partial_sum(&self, h: u64) -> Result<f64> {
        let mut acc = KahanSum::new();
        for n in 0..h {
            acc.add(self.term(n)?);
        }
        Ok(acc.value())
    }
}

/// One piece of horizon evidence.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Evidence {
    pub holds: bool,
    pub horizon: u64,
    pub bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PccVerdict {
    /// `bound` is `max |a_n|` over `[h/2, h)`.
    pub terms_to_zero: Evidence,
    /// `bound` is the sum of nonnegative terms below `h`.
    pub positive_part_diverges: Evidence,
    /// `bound` is the absolute sum of negative terms below `h`.
    pub negative_part_diverges: Evidence,
}

impl PccVerdict {
    pub fn likely_pcc(&self) -> bool {
        self.terms_to_zero.holds
            && self.positive_part_diverges.holds
            && self.negative_part_diverges.holds
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PccConfig {
    pub divergence_bar: f64,
    pub tail_threshold: f64,
}

impl Default for PccConfig {
    fn default() -> Self {
        PccConfig {
            divergence_bar: 10.0,
            tail_threshold: 0.01,
        }
    }
}

pub fn pcc_classify(s: &SeriesSpec, horizon: u64) -> Result<PccVerdict> {
    pcc_classify_with(s, horizon, &PccConfig::default())
}

pub fn pcc_classify_with(s: &SeriesSpec, horizon: u64, cfg: &PccConfig) -> Result<PccVerdict> {
    if horizon < 1000 {
        return Err(DensityError::Precondition(format!(
            "classification needs horizon >= 1000, got {horizon}"
        )));
    }
    let (mut pos, mut neg) = (KahanSum::new(), KahanSum::new());
    let mut tail_max = 0.0f64;
    for n in 0..horizon {
        let v = s.term(n)?;
        if v >= 0.0 {
            pos.add(v);
        } else {
            neg.add(-v);
        }
        if n >= horizon / 2 {
            tail_max = tail_max.max(v.abs());
        }
    }
    let ev = |holds, bound| Evidence {
        holds,
        horizon,
        bound,
    };
    Ok(PccVerdict {
        terms_to_zero: ev(tail_max < cfg.tail_threshold, tail_max),
        positive_part_diverges: ev(pos.value() > cfg.divergence_bar, pos.value()),
        negative_part_diverges: ev(neg.value() > cfg.divergence_bar, neg.value()),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RearrangementTarget {
    Finite { r: f64 },
    PlusInfinity,
    MinusInfinity,
    Oscillation { lo: f64, hi: f64 },
}

impl FromStr for RearrangementTarget {
    type Err = DensityError;

    /// `value:<r>`, `+inf`, `-inf` or `osc:<lo>,<hi>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || DensityError::Precondition(format!("unrecognized target {s:?}"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        match s {
            "+inf" => Ok(RearrangementTarget::PlusInfinity),
            "-inf" => Ok(RearrangementTarget::MinusInfinity),
            _ => {
                if let Some(r) = s.strip_prefix("value:") {
                    Ok(RearrangementTarget::Finite { r: num(r)? })
                } else if let Some(rest) = s.strip_prefix("osc:") {
                    let (lo, hi) = rest.split_once(',').ok_or_else(bad)?;
                    let (lo, hi) = (num(lo)?, num(hi)?);
                    if lo >= hi {
                        return Err(DensityError::Precondition(format!(
                            "oscillation needs lo < hi, got {lo} and {hi}"
                        )));
                    }
                    Ok(RearrangementTarget::Oscillation { lo, hi })
                } else {
                    Err(bad())
                }
            }
        }
    }
}

/// Position after which the greedy rule switched sides.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhaseBoundary {
    /// Number of terms consumed when the switch happened.
    pub position: u64,
    pub partial_sum: f64,
    pub last_term: f64,
    /// Threshold that was crossed.
    pub goal: f64,
}

impl PhaseBoundary {
    /// Overshoot bound: the crossing term is at least as large as the overshoot.
    pub fn within_overshoot(&self) -> bool {
        (self.partial_sum - self.goal).abs() <= self.last_term.abs() + 1e-12
    }
}

/// A realized rearrangement: position `n` carries term `order[n]`.
#[derive(Clone, Debug)]
pub struct Rearrangement {
    pub permutation: LazyPermutation,
    pub order: Vec<u64>,
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    pub boundaries: Vec<PhaseBoundary>,
    /// Every term index below this has been placed.
    pub complete_below: u64,
}

impl Rearrangement {
    fn build(
        label: String,
        order: Vec<u64>,
        terms: Vec<f64>,
        boundaries: Vec<PhaseBoundary>,
        complete_below: u64,
    ) -> Result<Self> {
        let mut acc = KahanSum::new();
        let partial_sums = terms
            .iter()
            .map(|&t| {
                acc.add(t);
                acc.value()
            })
            .collect();
        let len = order.len() as u64;
        let permutation =
            LazyPermutation::from_inverse_table(label, order.clone(), Tail::Horizon(len))?
                .inverted();
        Ok(Rearrangement {
            permutation,
            order,
            terms,
            partial_sums,
            boundaries,
            complete_below,
        })
    }

    pub fn final_sum(&self) -> f64 {
        self.partial_sums.last().copied().unwrap_or(0.0)
    }

    /// Bijectivity on the realized prefix: positions and the fully placed term indices.
    pub fn audit(&self) -> Result<()> {
        let h = self.complete_below.min(self.order.len() as u64);
        self.permutation.audit_bijective(h)?;
        for (n, &i) in self.order.iter().enumerate() {
            if self.permutation.inverse(i)? != n as u64 {
                return Err(DensityError::Integrity(format!(
                    "term {i} placed twice or lost at position {n}"
                )));
            }
        }
        Ok(())
    }

    /// Sums another series in this order over the realized positions.
    pub fn apply_to(&self, s: &SeriesSpec) -> Result<f64> {
        let mut acc = KahanSum::new();
        for &i in &self.order {
            acc.add(s.term(i)?);
        }
        Ok(acc.value())
    }

    /// CSV with header `position,term,partial_sum`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["position", "term", "partial_sum"])
            .expect("in-memory write");
        for n in 0..self.order.len() {
            w.write_record([
                n.to_string(),
                format!("{:e}", self.terms[n]),
                format!("{:e}", self.partial_sums[n]),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

/// Sequential scanner over the indices whose terms satisfy a predicate.
struct Pool<'a> {
    s: &'a SeriesSpec,
    next: u64,
    cap: u64,
    accept: Box<dyn Fn(f64) -> bool + 'a>,
}

impl<'a> Pool<'a> {
    fn new(s: &'a SeriesSpec, cap: u64, accept: impl Fn(f64) -> bool + 'a) -> Self {
        Pool {
            s,
            next: 0,
            cap,
            accept: Box::new(accept),
        }
    }

    fn take(&mut self) -> Result<(u64, f64)> {
        loop {
            if self.next >= self.cap {
                return Err(DensityError::horizon(self.next, self.cap));
            }
            let i = self.next;
            self.next += 1;
            let v = self.s.term(i)?;
            if (self.accept)(v) {
                return Ok((i, v));
            }
        }
    }

    /// Like `take`, but `None` once the scan limit is reached.
    fn try_take(&mut self) -> Result<Option<(u64, f64)>> {
        match self.take() {
            Ok(x) => Ok(Some(x)),
            Err(DensityError::Horizon { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Term indices scanned per output position before a pool counts as exhausted.
pub const SCAN_FACTOR: u64 = 64;

fn scan_cap(horizon: u64) -> u64 {
    horizon.saturating_mul(SCAN_FACTOR).max(1 << 16)
}

/// Greedy threshold rearrangement of `horizon` terms toward `target`.
pub fn riemann_rearrange(
    s: &SeriesSpec,
    target: RearrangementTarget,
    horizon: u64,
) -> Result<Rearrangement> {
    if let RearrangementTarget::Oscillation { lo, hi } = target {
        if lo >= hi {
            return Err(DensityError::Precondition("oscillation needs lo < hi".into()));
        }
    }
    let cap = scan_cap(horizon);
    let mut pos = Pool::new(s, cap, |v| v >= 0.0);
    let mut neg = Pool::new(s, cap, |v| v < 0.0);
    let mut order = Vec::with_capacity(horizon as usize);
    let mut terms = Vec::with_capacity(horizon as usize);
    let mut boundaries = Vec::new();
    let mut acc = KahanSum::new();
    // `up` is the side currently being taken; `milestone` drives the infinite targets.
    let mut up = true;
    let mut milestone = 1.0f64;
    let mut last = 0.0f64;
    for _ in 0..horizon {
        let sum = acc.value();
        let (take_up, goal) = match target {
            RearrangementTarget::Finite { r } => (sum <= r, r),
            RearrangementTarget::PlusInfinity => {
                if !up {
                    milestone += 1.0;
                }
                (sum <= milestone, milestone)
            }
            RearrangementTarget::MinusInfinity => {
                if up {
                    milestone += 1.0;
                }
                (sum < -milestone, -milestone)
            }
            RearrangementTarget::Oscillation { lo, hi } => {
                if up {
                    (sum <= hi, hi)
                } else {
                    (sum < lo, lo)
                }
            }
        };
        if take_up != up && !order.is_empty() {
            // for infinite targets only the milestone crossing is a boundary
            let crossed = match target {
                RearrangementTarget::PlusInfinity => up.then_some(goal),
                RearrangementTarget::MinusInfinity => (!up).then_some(goal),
                _ => Some(goal),
            };
            if let Some(goal) = crossed {
                boundaries.push(PhaseBoundary {
                    position: order.len() as u64,
                    partial_sum: sum,
                    last_term: last,
                    goal,
                });
            }
        }
        up = take_up;
        let (i, v) = if take_up { pos.take()? } else { neg.take()? };
        acc.add(v);
        last = v;
        order.push(i);
        terms.push(v);
    }
    let complete_below = pos.next.min(neg.next);
    Rearrangement::build(
        format!("riemann({})", s.label()),
        order,
        terms,
        boundaries,
        complete_below,
    )
}

/// `p` nonnegative terms, then `q` negative terms, repeated.
pub fn pattern_rearrange(s: &SeriesSpec, p: u64, q: u64, horizon: u64) -> Result<Rearrangement> {
    if p == 0 || q == 0 {
        return Err(DensityError::Precondition("pattern needs p, q >= 1".into()));
    }
    let cap = scan_cap(horizon);
    let mut pos = Pool::new(s, cap, |v| v >= 0.0);
    let mut neg = Pool::new(s, cap, |v| v < 0.0);
    let mut order = Vec::with_capacity(horizon as usize);
    let mut terms = Vec::with_capacity(horizon as usize);
    for n in 0..horizon {
        let (i, v) = if n % (p + q) < p {
            pos.take()?
        } else {
            neg.take()?
        };
        order.push(i);
        terms.push(v);
    }
    let complete_below = pos.next.min(neg.next);
    Rearrangement::build(
        format!("pattern({p},{q})"),
        order,
        terms,
        vec![],
        complete_below,
    )
}

/// Zeros at the positions of `zeros`, the original terms in order elsewhere.
pub fn pad_with_zeroes(s: &SeriesSpec, zeros: &LazySet) -> SeriesSpec {
    let (s2, z) = (s.clone(), zeros.clone());
    SeriesSpec::new(format!("pad({},{})", s.label(), zeros.label()), move |n| {
        if z.contains(n)? {
            Ok(0.0)
        } else {
            s2.term(n - z.rank(n)?)
        }
    })
    .with_precision(s.precision())
}

/// Index of the original term at padded position `n`, if it is not a zero slot.
pub fn padded_source(zeros: &LazySet, n: u64) -> Result<Option<u64>> {
    Ok(if zeros.contains(n)? {
        None
    } else {
        Some(n - zeros.rank(n)?)
    })
}

/// `c^t_n = (t − a)·2^{−(n+1)}`, summing to `t − a`.
pub fn shift_weight(t: f64, a: f64, n: u64) -> f64 {
    if n >= 1100 {
        return 0.0;
    }
    (t - a) * 0.5f64.powi(n as i32 + 1)
}

/// `a_n + c^t_n`, whose sum is `t` when `s` sums to `a`.
pub fn shift_series(s: &SeriesSpec, a: f64, t: f64) -> SeriesSpec {
    let s2 = s.clone();
    SeriesSpec::new(format!("shift({},{t})", s.label()), move |n| {
        Ok(s2.term(n)? + shift_weight(t, a, n))
    })
    .with_precision(s.precision())
}

/// `√N` clamp: the `(ℓ+1)`-th embedded term may be placed at output count `N` iff
/// `(ℓ+1)·(1 + max_{j≤ℓ} |y_j|) ≤ √N`.
pub fn embed_allows(ell: u64, max_abs: f64, n: u64) -> bool {
    (ell as f64 + 1.0) * (1.0 + max_abs) <= (n as f64).sqrt()
}

/// Source of a merged position.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Slot {
    X,
    Y,
}

/// The merged sequence with the positions of the `x`-terms.
#[derive(Clone, Debug)]
pub struct SparseEmbedding {
    pub values: Vec<f64>,
    pub slots: Vec<Slot>,
    /// Positions carrying `x`-terms.
    pub a: LazySet,
    pub embedded: u64,
}

impl SparseEmbedding {
    pub fn mean(&self) -> f64 {
        cesaro_mean(&self.values)
    }
}

pub fn cesaro_mean(values: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value() / values.len().max(1) as f64
}

/// Merges `x` with sparsely placed `y`-terms under the `√N` clamp.
fn embed_streams(
    mut next_x: impl FnMut() -> Result<Option<(u64, f64)>>,
    mut next_y: impl FnMut() -> Result<Option<(u64, f64)>>,
    horizon: u64,
) -> Result<(Vec<u64>, Vec<f64>, Vec<Slot>, u64)> {
    let mut idx = Vec::with_capacity(horizon as usize);
    let mut values = Vec::with_capacity(horizon as usize);
    let mut slots = Vec::with_capacity(horizon as usize);
    let mut pending_y: Option<(u64, f64)> = next_y()?;
    let mut max_abs = 0.0f64;
    let mut ell = 0u64;
    for n in 1..=horizon {
        let mut placed = false;
        if let Some((i, v)) = pending_y {
            if embed_allows(ell, max_abs.max(v.abs()), n) {
                max_abs = max_abs.max(v.abs());
                idx.push(i);
                values.push(v);
                slots.push(Slot::Y);
                ell += 1;
                pending_y = next_y()?;
                placed = true;
            }
        }
        if !placed {
            match next_x()? {
                Some((i, v)) => {
                    idx.push(i);
                    values.push(v);
                    slots.push(Slot::X);
                }
                None => {
                    return Err(DensityError::horizon(n, horizon));
                }
            }
        }
    }
    Ok((idx, values, slots, ell))
}

fn x_positions(slots: &[Slot], horizon: u64) -> Result<LazySet> {
    let xs = slots
        .iter()
        .enumerate()
        .filter(|(_, s)| **s == Slot::X)
        .map(|(n, _)| n as u64)
        .collect();
    LazySet::from_sorted("x-positions", xs, horizon)
}

/// Embeds `y` into `x` with the clamp; `x` must supply enough terms for `horizon` outputs.
pub fn sparse_embed(x: &[f64], y: &[f64], horizon: u64) -> Result<SparseEmbedding> {
    let (mut ix, mut iy) = (0usize, 0usize);
    let (_, values, slots, embedded) = embed_streams(
        || {
            let r = x.get(ix).map(|&v| (ix as u64, v));
            ix += 1;
            Ok(r)
        },
        || {
            let r = y.get(iy).map(|&v| (iy as u64, v));
            iy += 1;
            Ok(r)
        },
        horizon,
    )?;
    let a = x_positions(&slots, horizon)?;
    Ok(SparseEmbedding {
        values,
        slots,
        a,
        embedded,
    })
}

/// Which part of the bracket `[liminf, limsup]` the target fell in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MeanBranch {
    Interior,
    Lower,
    Upper,
}

#[derive(Clone, Debug)]
pub struct MeanRearrangement {
    pub branch: MeanBranch,
    pub liminf: f64,
    pub limsup: f64,
    pub rearrangement: Rearrangement,
    pub slots: Vec<Slot>,
    pub embedded: u64,
}

impl MeanRearrangement {
    pub fn mean(&self) -> f64 {
        cesaro_mean(&self.rearrangement.terms)
    }

    /// Conservation: every position carries a distinct input index with the input's value.
    pub fn audit(&self, r: &SeriesSpec) -> Result<()> {
        self.rearrangement.audit()?;
        for (n, (&i, &v)) in self
            .rearrangement
            .order
            .iter()
            .zip(&self.rearrangement.terms)
            .enumerate()
        {
            if r.term(i)? != v {
                return Err(DensityError::Integrity(format!(
                    "position {n} carries {v}, but term {i} is {}",
                    r.term(i)?
                )));
            }
        }
        Ok(())
    }
}

/// Extremes of `r` over the window `[h/2, h)`.
pub fn bracket_evidence(r: &SeriesSpec, horizon: u64) -> Result<(f64, f64)> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for n in horizon / 2..horizon {
        let v = r.term(n)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Rearranges the sequence `r` to Cesàro mean `m`.
///
/// Interior targets alternate between terms near the lower and the upper extreme, adding
/// upper terms while the running mean is at most `m`. A target at an extreme takes the
/// terms near that extreme. All remaining terms are embedded sparsely.
pub fn mean_rearrange(r: &SeriesSpec, m: f64, horizon: u64) -> Result<MeanRearrangement> {
    let (lo, hi) = bracket_evidence(r, horizon)?;
    let eps = r.precision();
    if !(lo - eps <= m && m <= hi + eps) {
        return Err(DensityError::Precondition(format!(
            "target {m} outside the bracket [{lo}, {hi}] observed on [{}, {horizon})",
            horizon / 2
        )));
    }
    let branch = if (m - lo).abs() <= eps {
        MeanBranch::Lower
    } else if (hi - m).abs() <= eps {
        MeanBranch::Upper
    } else {
        MeanBranch::Interior
    };
    let band = match branch {
        MeanBranch::Interior => (m - lo).min(hi - m) / 2.0,
        _ => ((hi - lo) / 100.0).max(eps),
    };
    let near_lo = move |v: f64| v <= lo + band;
    let near_hi = move |v: f64| v >= hi - band;
    let cap = scan_cap(horizon);
    let mut u = Pool::new(r, cap, near_lo);
    let mut v = Pool::new(r, cap, near_hi);
    let mut z = Pool::new(r, cap, move |x| match branch {
        MeanBranch::Interior => !near_lo(x) && !near_hi(x),
        MeanBranch::Lower => !near_lo(x),
        MeanBranch::Upper => !near_hi(x),
    });
    let mut acc = KahanSum::new();
    let mut count = 0u64;
    let next_x = || -> Result<Option<(u64, f64)>> {
        let pick = match branch {
            MeanBranch::Interior => {
                let mean = if count == 0 { m } else { acc.value() / count as f64 };
                if mean <= m {
                    v.try_take()?
                } else {
                    u.try_take()?
                }
            }
            MeanBranch::Lower => u.try_take()?,
            MeanBranch::Upper => v.try_take()?,
        };
        if let Some((_, val)) = pick {
            acc.add(val);
            count += 1;
        }
        Ok(pick)
    };
    let (order, values, slots, embedded) = embed_streams(next_x, || z.try_take(), horizon)?;
    let complete_below = u.next.min(v.next).min(z.next);
    let rearrangement = Rearrangement::build(
        format!("mean({},{m})", r.label()),
        order,
        values,
        vec![],
        complete_below,
    )?;
    Ok(MeanRearrangement {
        branch,
        liminf: lo,
        limsup: hi,
        rearrangement,
        slots,
        embedded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_skips_zeros() {
        let mut a = KahanSum::new();
        let mut b = KahanSum::new();
        for n in 0..1000 {
            let v = 1.0 / (n as f64 + 1.0);
            a.add(v);
            b.add(v);
            b.add(0.0);
        }
        assert_eq!(a.value().to_bits(), b.value().to_bits());
    }

    #[test]
    fn classify_examples() {
        let cfg = PccConfig {
            divergence_bar: 3.0,
            ..PccConfig::default()
        };
        let h = 1 << 16;
        assert!(pcc_classify_with(&SeriesSpec::alternating_harmonic(), h, &cfg)
            .unwrap()
            .likely_pcc());
        let v = pcc_classify_with(&SeriesSpec::inverse_squares(), h, &cfg).unwrap();
        assert!(!v.negative_part_diverges.holds);
        let v = pcc_classify_with(&SeriesSpec::alternating_signs(), h, &cfg).unwrap();
        assert!(!v.terms_to_zero.holds);
        assert!(pcc_classify(&SeriesSpec::alternating_harmonic(), 10).is_err());
    }

    #[test]
    fn target_parsing() {
        assert_eq!(
            "value:0.5".parse::<RearrangementTarget>().unwrap(),
            RearrangementTarget::Finite { r: 0.5 }
        );
        assert_eq!(
            "osc:0,1".parse::<RearrangementTarget>().unwrap(),
            RearrangementTarget::Oscillation { lo: 0.0, hi: 1.0 }
        );
        assert!("osc:1,0".parse::<RearrangementTarget>().is_err());
        assert!("nope".parse::<RearrangementTarget>().is_err());
    }

    #[test]
    fn finite_target_boundaries_respect_overshoot() {
        let s = SeriesSpec::alternating_harmonic();
        let r = riemann_rearrange(&s, RearrangementTarget::Finite { r: 2.0 }, 20_000).unwrap();
        r.audit().unwrap();
        assert!(r.boundaries.iter().all(|b| b.within_overshoot()));
        assert!((r.final_sum() - 2.0).abs() < 0.01);
    }

    #[test]
    fn infinite_targets_grow() {
        let s = SeriesSpec::alternating_harmonic();
        let r = riemann_rearrange(&s, RearrangementTarget::PlusInfinity, 200_000).unwrap();
        r.audit().unwrap();
        assert!(r.final_sum() > 3.0);
        let r = riemann_rearrange(&s, RearrangementTarget::MinusInfinity, 200_000).unwrap();
        r.audit().unwrap();
        assert!(r.final_sum() < -3.0);
    }

    #[test]
    fn padding_keeps_partial_sums() {
        let s = SeriesSpec::alternating_harmonic();
        let odds = LazySet::odds();
        let p = pad_with_zeroes(&s, &odds);
        let orig = s.partial_sums(500).unwrap();
        let padded = p.partial_sums(1000).unwrap();
        for k in 1..=500usize {
            assert_eq!(padded[2 * k - 2].to_bits(), orig[k - 1].to_bits());
        }
        assert_eq!(padded_source(&odds, 6).unwrap(), Some(3));
        assert_eq!(padded_source(&odds, 7).unwrap(), None);
    }

    #[test]
    fn shift_by_zero_is_identity() {
        let s = SeriesSpec::alternating_harmonic();
        let t = shift_series(&s, 0.5, 0.5);
        for n in 0..100 {
            assert_eq!(t.term(n).unwrap(), s.term(n).unwrap());
        }
    }

    #[test]
    fn clamp_keeps_embedding_sparse() {
        let e = sparse_embed(
            &(0..20_000).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect::<Vec<_>>(),
            &(0..1000).map(|n| n as f64).collect::<Vec<_>>(),
            10_000,
        )
        .unwrap();
        assert!(e.embedded as f64 / 10_000.0 <= 0.01);
        assert!(e.mean().abs() < 0.02);
        let zeros = sparse_embed(&[1.0; 100], &[0.0; 100], 100).unwrap();
        assert_eq!(zeros.mean(), zeros.values.iter().sum::<f64>() / 100.0);
    }

    #[test]
    fn mean_targets() {
        let r = SeriesSpec::alternating_signs();
        for (m, branch) in [
            (0.5, MeanBranch::Interior),
            (1.0, MeanBranch::Upper),
            (-1.0, MeanBranch::Lower),
        ] {
            let out = mean_rearrange(&r, m, 50_000).unwrap();
            assert_eq!(out.branch, branch);
            assert!((out.mean() - m).abs() < 0.02, "{m}: {}", out.mean());
            out.audit(&r).unwrap();
        }
        assert!(mean_rearrange(&r, 2.0, 1000).is_err());
    }
}
