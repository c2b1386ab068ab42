//! Exact density profiles, horizon verdicts, relative and strong relative density.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{DensityError, Result};
use crate::perms::LazyPermutation;
use crate::sets::LazySet;

/// Exact rational `n/d`.
pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_u(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational from a decimal or `p/q` string.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || DensityError::Precondition(format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = BigRational::new(num, den);
    Ok(if neg { -r } else { r })
}

/// Checkpoints `⌈(5/4)^k⌉`, deduplicated, below `horizon`, followed by `horizon` itself.
pub fn checkpoint_schedule(horizon: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    let five = BigInt::from(5);
    let four = BigInt::from(4);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    loop {
        let q = (&num + &den - BigInt::one()) / &den;
        let c = match q.to_u64() {
            Some(c) => c,
            None => break,
        };
        if c >= horizon {
            break;
        }
        if out.last() != Some(&c) {
            out.push(c);
        }
        num *= &five;
        den *= &four;
    }
    if horizon >= 1 && out.last() != Some(&horizon) {
        out.push(horizon);
    }
    out
}

/// Exact values `numerator/denominator` at increasing checkpoints.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityProfile {
    pub checkpoints: Vec<u64>,
    pub numerators: Vec<u64>,
    pub denominators: Vec<u64>,
}

impl DensityProfile {
    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    pub fn value(&self, i: usize) -> BigRational {
        rat_u(self.numerators[i], self.denominators[i])
    }

    pub fn values(&self) -> Vec<BigRational> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }

    /// Value at checkpoint `n`, if `n` is one of the checkpoints.
    pub fn at(&self, n: u64) -> Option<BigRational> {
        self.checkpoints
            .binary_search(&n)
            .ok()
            .map(|i| self.value(i))
    }

    /// CSV with header `checkpoint,numerator,denominator`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["checkpoint", "numerator", "denominator"])
            .expect("in-memory write");
        for i in 0..self.len() {
            w.write_record([
                self.checkpoints[i].to_string(),
                self.numerators[i].to_string(),
                self.denominators[i].to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii csv")
    }
}

fn validate_checkpoints(checkpoints: &[u64]) -> Result<()> {
    if checkpoints.is_empty() {
        return Err(DensityError::Precondition("no checkpoints given".into()));
    }
    if checkpoints[0] == 0 {
        return Err(DensityError::Precondition("checkpoints must be >= 1".into()));
    }
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(DensityError::Precondition(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Running counts of `A` at each checkpoint, from a single sweep.
fn counts_at(a: &LazySet, checkpoints: &[u64]) -> Result<Vec<u64>> {
    let end = *checkpoints.last().expect("validated nonempty");
    let mut counts = vec![0u64; checkpoints.len()];
    let mut idx = 0usize;
    let mut seen = 0u64;
    a.sweep(end, &mut |x| {
        while idx < checkpoints.len() && checkpoints[idx] <= x {
            counts[idx] = seen;
            idx += 1;
        }
        seen += 1;
    })?;
    while idx < checkpoints.len() {
        counts[idx] = seen;
        idx += 1;
    }
    Ok(counts)
}

/// `d_n(A) = |A ∩ n| / n` at each checkpoint, exactly.
pub fn density_profile(a: &LazySet, checkpoints: &[u64]) -> Result<DensityProfile> {
    validate_checkpoints(checkpoints)?;
    let numerators = counts_at(a, checkpoints)?;
    Ok(DensityProfile {
        checkpoints: checkpoints.to_vec(),
        numerators,
        denominators: checkpoints.to_vec(),
    })
}

/// Profile of a characteristic vector.
pub fn profile_from_bits(bits: &[bool], checkpoints: &[u64]) -> Result<DensityProfile> {
    validate_checkpoints(checkpoints)?;
    let end = *checkpoints.last().expect("validated nonempty");
    if end as usize > bits.len() {
        return Err(DensityError::horizon(end, bits.len() as u64));
    }
    let mut numerators = Vec::with_capacity(checkpoints.len());
    let mut count = 0u64;
    let mut pos = 0usize;
    for &c in checkpoints {
        while pos < c as usize {
            count += bits[pos] as u64;
            pos += 1;
        }
        numerators.push(count);
    }
    Ok(DensityProfile {
        checkpoints: checkpoints.to_vec(),
        numerators,
        denominators: checkpoints.to_vec(),
    })
}

/// Burn-in and thresholds for horizon verdicts.
#[derive(Clone, Debug)]
pub struct EstimateConfig {
    pub tol: BigRational,
    pub gap: BigRational,
    /// Checkpoints below `horizon / burn_in_divisor` are ignored.
    pub burn_in_divisor: u64,
}

impl Default for EstimateConfig {
    fn default() -> Self {
        EstimateConfig {
            tol: rat(1, 100),
            gap: rat(1, 4),
            burn_in_divisor: 4,
        }
    }
}

impl EstimateConfig {
    pub fn new(tol: BigRational, gap: BigRational) -> Self {
        EstimateConfig {
            tol,
            gap,
            ..Default::default()
        }
    }

    pub fn with_burn_in_divisor(mut self, d: u64) -> Self {
        self.burn_in_divisor = d.max(1);
        self
    }

    fn validate(&self, horizon: u64) -> Result<()> {
        if horizon < 64 {
            return Err(DensityError::Precondition(format!(
                "horizon {horizon} is below the minimum of 64"
            )));
        }
        let zero = BigRational::zero();
        let one = BigRational::one();
        if !(self.tol > zero && self.tol < self.gap && self.gap < one) {
            return Err(DensityError::Precondition(
                "need 0 < tol < gap < 1".into(),
            ));
        }
        Ok(())
    }
}

/// Horizon verdict. Never a statement about the true limit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Value { r: BigRational, tol: BigRational },
    OscEvidence { lo: BigRational, hi: BigRational },
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityEstimate {
    pub verdict: Verdict,
    pub horizon: u64,
    /// Number of checkpoints inspected after burn-in.
    pub tail_window: usize,
    pub burn_in: u64,
    pub tol: BigRational,
    pub gap: BigRational,
    /// Smallest and largest tail values.
    pub tail_min: BigRational,
    pub tail_max: BigRational,
}

#[derive(Serialize)]
struct EstimateJson {
    verdict: &'static str,
    value: Option<String>,
    lo: Option<String>,
    hi: Option<String>,
    horizon: u64,
    tol: String,
    gap: String,
    burn_in: u64,
    tail_window: usize,
    finitization: &'static str,
}

pub const FINITIZATION_NOTE: &str =
    "horizon evidence only: burn-in then tail checkpoints; not a claim about the limit";

impl DensityEstimate {
    pub fn is_value(&self) -> bool {
        matches!(self.verdict, Verdict::Value { .. })
    }

    pub fn is_osc(&self) -> bool {
        matches!(self.verdict, Verdict::OscEvidence { .. })
    }

    /// The `r` of a `Value` verdict.
    pub fn value(&self) -> Option<&BigRational> {
        match &self.verdict {
            Verdict::Value { r, .. } => Some(r),
            _ => None,
        }
    }

    /// True if the verdict is `Value(r)` with `|r - target| <= within`.
    pub fn is_value_near(&self, target: &BigRational, within: &BigRational) -> bool {
        match self.value() {
            Some(r) => (r - target).abs() <= *within,
            None => false,
        }
    }

    pub fn to_json(&self) -> String {
        let (verdict, value, lo, hi) = match &self.verdict {
            Verdict::Value { r, .. } => ("value", Some(r.to_string()), None, None),
            Verdict::OscEvidence { lo, hi } => {
                ("osc", None, Some(lo.to_string()), Some(hi.to_string()))
            }
            Verdict::Undetermined => ("undetermined", None, None, None),
        };
        serde_json::to_string_pretty(&EstimateJson {
            verdict,
            value,
            lo,
            hi,
            horizon: self.horizon,
            tol: self.tol.to_string(),
            gap: self.gap.to_string(),
            burn_in: self.burn_in,
            tail_window: self.tail_window,
            finitization: FINITIZATION_NOTE,
        })
        .expect("estimate serializes")
    }
}

/// Simplest rational (least denominator, then least numerator) in `[lo, hi]`, `0 <= lo <= hi`.
pub fn simplest_rational_in(lo: &BigRational, hi: &BigRational) -> BigRational {
    debug_assert!(lo <= hi && !lo.is_negative());
    let fl = lo.floor();
    if &fl == lo {
        return fl;
    }
    let next = &fl + BigRational::one();
    if &next <= hi {
        return next;
    }
    let inner = simplest_rational_in(
        &(BigRational::one() / (hi - &fl)),
        &(BigRational::one() / (lo - &fl)),
    );
    fl + BigRational::one() / inner
}

/// Verdict from an already computed profile on `checkpoint_schedule(horizon)`.
pub fn estimate_from_profile(
    profile: &DensityProfile,
    horizon: u64,
    cfg: &EstimateConfig,
) -> Result<DensityEstimate> {
    cfg.validate(horizon)?;
    let burn_in = horizon / cfg.burn_in_divisor;
    let tail: Vec<BigRational> = (0..profile.len())
        .filter(|&i| profile.checkpoints[i] >= burn_in && profile.checkpoints[i] <= horizon)
        .map(|i| profile.value(i))
        .collect();
    if tail.is_empty() {
        return Err(DensityError::Precondition(
            "no checkpoints after burn-in".into(),
        ));
    }
    let lo = tail.iter().min().expect("nonempty").clone();
    let hi = tail.iter().max().expect("nonempty").clone();
    let spread = &hi - &lo;
    let verdict = if spread >= cfg.gap {
        Verdict::OscEvidence {
            lo: lo.clone(),
            hi: hi.clone(),
        }
    } else if spread <= &cfg.tol + &cfg.tol {
        let band_lo = std::cmp::max(&hi - &cfg.tol, BigRational::zero());
        let band_hi = std::cmp::min(&lo + &cfg.tol, BigRational::one());
        Verdict::Value {
            r: simplest_rational_in(&band_lo, &band_hi),
            tol: cfg.tol.clone(),
        }
    } else {
        Verdict::Undetermined
    };
    Ok(DensityEstimate {
        verdict,
        horizon,
        tail_window: tail.len(),
        burn_in,
        tol: cfg.tol.clone(),
        gap: cfg.gap.clone(),
        tail_min: lo,
        tail_max: hi,
    })
}

/// Horizon verdict for `A` with the default burn-in of `horizon/4`.
pub fn estimate_density(
    a: &LazySet,
    horizon: u64,
    tol: BigRational,
    gap: BigRational,
) -> Result<DensityEstimate> {
    estimate_density_with(a, horizon, &EstimateConfig::new(tol, gap))
}

pub fn estimate_density_with(
    a: &LazySet,
    horizon: u64,
    cfg: &EstimateConfig,
) -> Result<DensityEstimate> {
    cfg.validate(horizon)?;
    let profile = density_profile(a, &checkpoint_schedule(horizon))?;
    estimate_from_profile(&profile, horizon, cfg)
}

pub fn estimate_from_bits(
    bits: &[bool],
    horizon: u64,
    cfg: &EstimateConfig,
) -> Result<DensityEstimate> {
    cfg.validate(horizon)?;
    let profile = profile_from_bits(bits, &checkpoint_schedule(horizon))?;
    estimate_from_profile(&profile, horizon, cfg)
}

/// `π[A]`, valid below `horizon`: `m ∈ π[A] ⇔ π⁻¹(m) ∈ A`.
pub fn image_set(pi: &LazyPermutation, a: &LazySet, horizon: u64) -> LazySet {
    let pi = pi.clone();
    let inner = a.clone();
    LazySet::from_fallible_predicate(format!("{}[{}]", pi.label(), a.label()), move |m| {
        inner.contains(pi.inverse(m)?)
    })
    .with_limit(horizon)
}

/// Least `u` with `π⁻¹[m] ⊆ u`.
pub fn closure_bound(pi: &LazyPermutation, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(DensityError::Precondition("closure bound needs m >= 1".into()));
    }
    let mut best = 0u64;
    for k in 0..m {
        best = best.max(pi.inverse(k)? + 1);
    }
    Ok(best)
}

/// Least `u` with `π[m] ⊆ u`.
pub fn forward_closure_bound(pi: &LazyPermutation, m: u64) -> Result<u64> {
    let mut best = 0u64;
    for k in 0..m {
        best = best.max(pi.forward(k)? + 1);
    }
    Ok(best)
}

/// `|A ∩ n| / |B ∩ n|` at each checkpoint, checking `A ⊆ B` on the swept prefix.
pub fn relative_density_profile(
    a: &LazySet,
    b: &LazySet,
    checkpoints: &[u64],
) -> Result<DensityProfile> {
    validate_checkpoints(checkpoints)?;
    let end = *checkpoints.last().expect("validated nonempty");
    let a_members = a.members_below(end)?;
    let mut witness = None;
    for &x in &a_members {
        if !b.contains(x)? {
            witness = Some(x);
            break;
        }
    }
    if let Some(w) = witness {
        return Err(DensityError::Containment { witness: w });
    }
    let numerators = counts_at(a, checkpoints)?;
    let denominators = counts_at(b, checkpoints)?;
    if let Some(i) = denominators.iter().position(|&d| d == 0) {
        return Err(DensityError::DegenerateCheckpoint {
            checkpoint: checkpoints[i],
        });
    }
    Ok(DensityProfile {
        checkpoints: checkpoints.to_vec(),
        numerators,
        denominators,
    })
}

/// Outcome of a strong relative density check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StrongDensityVerdict {
    /// Every window of more than `N` consecutive members of `B` below the horizon passes.
    Pass { members_of_b: u64 },
    /// Window `{b_start, …, b_{end-1}}` has `count` members of `A`.
    Fail { start: u64, end: u64, count: u64 },
}

/// Checks `| |A ∩ {b_n..b_{m-1}}| / (m-n) - r | < eps` for all windows with `m - n > N`
/// inside the horizon. Returns the violating window with the least end index.
pub fn strong_density_check(
    a: &LazySet,
    b: &LazySet,
    r: &BigRational,
    eps: &BigRational,
    n_min: u64,
    horizon: u64,
) -> Result<StrongDensityVerdict> {
    if !eps.is_positive() {
        return Err(DensityError::Precondition("eps must be positive".into()));
    }
    let bs = b.members_below(horizon)?;
    let k = bs.len() as u64;
    if k < n_min + 1 {
        return Err(DensityError::Inconclusive(format!(
            "only {k} members of B below {horizon}; no window longer than {n_min} fits"
        )));
    }
    // prefix counts along B
    let mut p = Vec::with_capacity(bs.len() + 1);
    p.push(0i128);
    for &x in &bs {
        let inside = a.contains(x)?;
        if inside && !b.contains(x)? {
            return Err(DensityError::Containment { witness: x });
        }
        p.push(p.last().copied().expect("nonempty") + inside as i128);
    }
    // Scale by the common denominator so the test is integer arithmetic:
    // violation above  ⇔ D·(P[m]-P[n]) - U·(m-n) >= 0 with U/D = r + eps,
    // violation below  ⇔ D·(P[m]-P[n]) - L·(m-n) <= 0 with L/D = r - eps.
    let upper = r + eps;
    let lower = r - eps;
    let den = upper.denom() * lower.denom() / num_integer_gcd(upper.denom(), lower.denom());
    let up_num = (upper.numer() * (&den / upper.denom()))
        .to_i128()
        .ok_or_else(|| DensityError::Resource("rational too large".into()))?;
    let lo_num = (lower.numer() * (&den / lower.denom()))
        .to_i128()
        .ok_or_else(|| DensityError::Resource("rational too large".into()))?;
    let d = den
        .to_i128()
        .ok_or_else(|| DensityError::Resource("rational too large".into()))?;
    let q_up = |i: usize| d * p[i] - up_num * i as i128;
    let q_lo = |i: usize| d * p[i] - lo_num * i as i128;
    let gap = (n_min + 1) as usize;
    let (mut min_up, mut min_up_at) = (i128::MAX, 0usize);
    let (mut max_lo, mut max_lo_at) = (i128::MIN, 0usize);
    for m in gap..=bs.len() {
        let n = m - gap;
        if q_up(n) < min_up {
            min_up = q_up(n);
            min_up_at = n;
        }
        if q_lo(n) > max_lo {
            max_lo = q_lo(n);
            max_lo_at = n;
        }
        let start = if q_up(m) >= min_up {
            Some(min_up_at)
        } else if q_lo(m) <= max_lo {
            Some(max_lo_at)
        } else {
            None
        };
        if let Some(s) = start {
            return Ok(StrongDensityVerdict::Fail {
                start: s as u64,
                end: m as u64,
                count: (p[m] - p[s]) as u64,
            });
        }
    }
    Ok(StrongDensityVerdict::Pass { members_of_b: k })
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let (mut a, mut b) = (a.abs(), b.abs());
    while !b.is_zero() {
        let t = &a % &b;
        a = b;
        b = t;
    }
    a
}

/// Number of sign changes of `d_n - 1/2` over `n = 1..=horizon`, ignoring ties.
pub fn half_crossings(bits: &[bool], horizon: u64) -> u64 {
    let mut count = 0i64;
    let mut last_sign = 0i8;
    let mut crossings = 0u64;
    for n in 1..=horizon.min(bits.len() as u64) {
        count += bits[(n - 1) as usize] as i64;
        let diff = 2 * count - n as i64;
        let sign = diff.signum() as i8;
        if sign != 0 {
            if last_sign != 0 && sign != last_sign {
                crossings += 1;
            }
            last_sign = sign;
        }
    }
    crossings
}

/// Smallest and largest `d_n` over every `n` in `[from, to]`.
pub fn dense_extremes(bits: &[bool], from: u64, to: u64) -> (BigRational, BigRational) {
    let mut count = 0u64;
    let mut lo: Option<(u64, u64)> = None;
    let mut hi: Option<(u64, u64)> = None;
    for n in 1..=to {
        count += bits[(n - 1) as usize] as u64;
        if n < from.max(1) {
            continue;
        }
        // compare count/n against stored fractions by cross-multiplication
        if lo.is_none_or(|(c, m)| (count as u128) * (m as u128) < (c as u128) * (n as u128)) {
            lo = Some((count, n));
        }
        if hi.is_none_or(|(c, m)| (count as u128) * (m as u128) > (c as u128) * (n as u128)) {
            hi = Some((count, n));
        }
    }
    let (lc, ln) = lo.expect("nonempty range");
    let (hc, hn) = hi.expect("nonempty range");
    (rat_u(lc, ln), rat_u(hc, hn))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_starts_and_ends_right() {
        let s = checkpoint_schedule(100);
        assert_eq!(&s[..6], &[1, 2, 3, 4, 5, 6]);
        assert_eq!(*s.last().unwrap(), 100);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        // ⌈(5/4)^10⌉ = ⌈9.3132…⌉ = 10
        assert!(s.contains(&10));
    }

    #[test]
    fn evens_profile_is_one_half() {
        let p = density_profile(&LazySet::evens(), &[10, 100]).unwrap();
        assert_eq!(p.values(), vec![rat(1, 2), rat(1, 2)]);
    }

    #[test]
    fn exhausted_enumeration_is_integrity_error() {
        let a = LazySet::from_enumeration("finite", |i| if i < 3 { Some(10 * i) } else { None });
        let err = density_profile(&a, &[100]).unwrap_err();
        assert!(matches!(err, DensityError::Integrity(_)));
    }

    #[test]
    fn non_increasing_enumeration_is_integrity_error() {
        let a = LazySet::from_enumeration("bad", |i| Some(if i == 3 { 1 } else { 2 * i }));
        assert!(matches!(
            density_profile(&a, &[50]).unwrap_err(),
            DensityError::Integrity(_)
        ));
    }

    #[test]
    fn simplest_rational() {
        assert_eq!(simplest_rational_in(&rat(0, 1), &rat(1, 100)), rat(0, 1));
        assert_eq!(simplest_rational_in(&rat(49, 100), &rat(51, 100)), rat(1, 2));
        assert_eq!(simplest_rational_in(&rat(32, 100), &rat(34, 100)), rat(1, 3));
        assert_eq!(simplest_rational_in(&rat(3, 10), &rat(3, 10)), rat(3, 10));
    }

    #[test]
    fn estimate_preconditions() {
        let a = LazySet::evens();
        assert!(estimate_density(&a, 63, rat(1, 100), rat(1, 4)).is_err());
        assert!(estimate_density(&a, 64, rat(1, 4), rat(1, 4)).is_err());
        assert!(estimate_density(&a, 64, rat(0, 1), rat(1, 4)).is_err());
        assert!(estimate_density(&a, 64, rat(1, 100), rat(1, 1)).is_err());
    }

    #[test]
    fn evens_estimate_is_value_half() {
        let e = estimate_density(&LazySet::evens(), 1 << 16, rat(1, 100), rat(1, 4)).unwrap();
        assert_eq!(e.value(), Some(&rat(1, 2)));
    }

    #[test]
    fn image_set_past_horizon_is_error() {
        let img = image_set(&LazyPermutation::pair_swap(), &LazySet::evens(), 100);
        assert!(img.contains(99).unwrap());
        assert!(!img.contains(98).unwrap());
        assert!(matches!(img.contains(100), Err(DensityError::Horizon { .. })));
    }

    #[test]
    fn closure_bounds() {
        assert_eq!(closure_bound(&LazyPermutation::identity(), 10).unwrap(), 10);
        assert_eq!(closure_bound(&LazyPermutation::pair_swap(), 10).unwrap(), 10);
        assert_eq!(closure_bound(&LazyPermutation::pair_swap(), 9).unwrap(), 10);
        assert_eq!(closure_bound(&LazyPermutation::dyadic_reversal(), 5).unwrap(), 8);
    }

    #[test]
    fn relative_profile_errors() {
        let err = relative_density_profile(&LazySet::naturals(), &LazySet::evens(), &[10])
            .unwrap_err();
        assert_eq!(err, DensityError::Containment { witness: 1 });
        let b = LazySet::arithmetic(5, 1);
        let a = LazySet::arithmetic(6, 2);
        let err = relative_density_profile(&a, &b, &[3, 10]).unwrap_err();
        assert_eq!(err, DensityError::DegenerateCheckpoint { checkpoint: 3 });
    }

    #[test]
    fn crossings_of_alternating_blocks() {
        // 1,1,0,0,0,0,1,1,1,1,1,1,1,1 ...
        let bits: Vec<bool> = (0..64).map(|n| (n / 2) % 3 != 1 && n < 2 || (6..14).contains(&n)).collect();
        assert!(half_crossings(&bits, 64) >= 2);
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("1/3").unwrap(), rat(1, 3));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), rat(-3, 2));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }
}
