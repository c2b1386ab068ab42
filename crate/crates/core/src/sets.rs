//! Infinite subsets of ℕ represented by prefix oracles.

use std::fmt;
use std::sync::{Arc, Mutex};

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{DensityError, Result};

/// Scans never go past this many naturals without an explicit horizon.
pub const MAX_SCAN: u64 = 1 << 34;

/// Default cheap range for oracles that do not declare one.
pub const DEFAULT_HORIZON_HINT: u64 = 1 << 24;

/// Backing oracle for a [`LazySet`].
///
/// `rank(n)` is `|A ∩ [0, n)|`; `nth(i)` is the `i`-th member in increasing order.
pub trait SetOracle: Send + Sync {
    fn contains(&self, n: u64) -> Result<bool>;
    fn nth(&self, i: u64) -> Result<u64>;
    fn rank(&self, n: u64) -> Result<u64>;

    /// Visits every member below `end` in increasing order.
    fn sweep(&self, end: u64, visit: &mut dyn FnMut(u64)) -> Result<()> {
        let mut i = 0;
        let mut prev: Option<u64> = None;
        loop {
            let x = self.nth(i)?;
            if let Some(p) = prev {
                if x <= p {
                    return Err(DensityError::Integrity(format!(
                        "enumeration not increasing at index {i}: {p} then {x}"
                    )));
                }
            }
            if x >= end {
                return Ok(());
            }
            visit(x);
            prev = Some(x);
            i += 1;
        }
    }
}

/// An infinite subset of ℕ given by deterministic membership and enumeration oracles.
///
/// Queries at or past `limit` fail with a horizon error instead of guessing.
#[derive(Clone)]
pub struct LazySet {
    oracle: Arc<dyn SetOracle>,
    label: String,
    horizon_hint: u64,
    limit: Option<u64>,
}

impl fmt::Debug for LazySet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazySet")
            .field("label", &self.label)
            .field("horizon_hint", &self.horizon_hint)
            .field("limit", &self.limit)
            .finish()
    }
}

impl LazySet {
    pub fn from_oracle(label: impl Into<String>, oracle: Arc<dyn SetOracle>) -> Self {
        LazySet {
            oracle,
            label: label.into(),
            horizon_hint: DEFAULT_HORIZON_HINT,
            limit: None,
        }
    }

    /// `{start + step·i : i ∈ ℕ}`.
    pub fn arithmetic(start: u64, step: u64) -> Self {
        assert!(step >= 1, "arithmetic progression needs a positive step");
        Self::from_oracle(
            format!("{start}+{step}N"),
            Arc::new(Arithmetic { start, step }),
        )
    }

    pub fn evens() -> Self {
        Self::arithmetic(0, 2).labeled("evens")
    }

    pub fn odds() -> Self {
        Self::arithmetic(1, 2).labeled("odds")
    }

    pub fn naturals() -> Self {
        Self::arithmetic(0, 1).labeled("naturals")
    }

    pub fn from_predicate<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> bool + Send + Sync + 'static,
    {
        Self::from_fallible_predicate(label, move |n| Ok(f(n)))
    }

    pub fn from_fallible_predicate<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Result<bool> + Send + Sync + 'static,
    {
        Self::from_oracle(label, Arc::new(Predicate::new(f)))
    }

    /// A set given by its increasing enumeration. `None` means the enumeration ran out,
    /// which is an integrity error because members of this type are infinite.
    pub fn from_enumeration<F>(label: impl Into<String>, f: F) -> Self
    where
        F: Fn(u64) -> Option<u64> + Send + Sync + 'static,
    {
        Self::from_oracle(label, Arc::new(Enumerated { f: Box::new(f) }))
    }

    /// A realized prefix: `elems` lists every member below `limit`, nothing else is known.
    pub fn from_sorted(label: impl Into<String>, elems: Vec<u64>, limit: u64) -> Result<Self> {
        if elems.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DensityError::Integrity(
                "realized prefix is not strictly increasing".into(),
            ));
        }
        if let Some(&last) = elems.last() {
            if last >= limit {
                return Err(DensityError::Integrity(format!(
                    "realized member {last} is not below the declared limit {limit}"
                )));
            }
        }
        let hint = elems.len() as u64;
        Ok(Self::from_oracle(
            label,
            Arc::new(Sorted {
                elems: Arc::new(elems),
                limit,
            }),
        )
        .with_limit(limit)
        .with_horizon_hint(hint.max(1)))
    }

    /// Seeded Bernoulli(p) set: `n` is a member when the `n`-th ChaCha8 word is below `p·2^32`.
    pub fn bernoulli(p_num: u64, p_den: u64, seed: u64) -> Self {
        let source = BernoulliBits::new(p_num, p_den, seed);
        Self::from_oracle(
            format!("bernoulli({p_num}/{p_den},seed={seed})"),
            Arc::new(Predicate::new(move |n| Ok(source.bit(n)))),
        )
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn with_limit(mut self, limit: u64) -> Self {
        self.limit = Some(match self.limit {
            Some(old) => old.min(limit),
            None => limit,
        });
        self
    }

    pub fn with_horizon_hint(mut self, hint: u64) -> Self {
        self.horizon_hint = hint;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn horizon_hint(&self) -> u64 {
        self.horizon_hint
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }

    fn check_point(&self, n: u64) -> Result<()> {
        match self.limit {
            Some(h) if n >= h => Err(DensityError::horizon(n, h)),
            _ => Ok(()),
        }
    }

    fn check_bound(&self, n: u64) -> Result<()> {
        match self.limit {
            Some(h) if n > h => Err(DensityError::horizon(n, h)),
            _ => Ok(()),
        }
    }

    pub fn contains(&self, n: u64) -> Result<bool> {
        self.check_point(n)?;
        self.oracle.contains(n)
    }

    pub fn nth(&self, i: u64) -> Result<u64> {
        let x = self.oracle.nth(i)?;
        self.check_point(x)?;
        Ok(x)
    }

    /// `|A ∩ [0, n)|`.
    pub fn rank(&self, n: u64) -> Result<u64> {
        self.check_bound(n)?;
        self.oracle.rank(n)
    }

    /// Visits members below `end` in increasing order, in one pass.
    pub fn sweep(&self, end: u64, visit: &mut dyn FnMut(u64)) -> Result<()> {
        self.check_bound(end)?;
        self.oracle.sweep(end, visit)
    }

    /// Members below `end`.
    pub fn members_below(&self, end: u64) -> Result<Vec<u64>> {
        let mut out = Vec::new();
        self.sweep(end, &mut |x| out.push(x))?;
        Ok(out)
    }

    /// Characteristic vector of `[0, end)`.
    pub fn bits_below(&self, end: u64) -> Result<Vec<bool>> {
        let mut bits = vec![false; end as usize];
        self.sweep(end, &mut |x| bits[x as usize] = true)?;
        Ok(bits)
    }

    /// `ℕ ∖ A`, sharing this set's limit.
    pub fn complement(&self) -> LazySet {
        let mut c = LazySet::from_oracle(
            format!("complement({})", self.label),
            Arc::new(Complement {
                inner: self.clone(),
                cache: Mutex::new(ScanCache::default()),
            }),
        )
        .with_horizon_hint(self.horizon_hint);
        c.limit = self.limit;
        c
    }

    /// Finite audit that the set is infinite and coinfinite: below `min(horizon, hint)`
    /// there must be at least `max(1, window/64)` members and as many non-members.
    pub fn audit_infinite_coinfinite(&self, horizon: u64) -> Result<()> {
        let window = horizon.min(self.horizon_hint).max(1);
        let window = match self.limit {
            Some(h) => window.min(h),
            None => window,
        };
        let need = (window / 64).max(1);
        let members = self.rank(window)?;
        let non_members = window - members;
        if members < need {
            return Err(DensityError::Precondition(format!(
                "{} looks finite: {members} members below {window}, need {need}",
                self.label
            )));
        }
        if non_members < need {
            return Err(DensityError::Precondition(format!(
                "{} looks cofinite: {non_members} non-members below {window}, need {need}",
                self.label
            )));
        }
        Ok(())
    }
}

struct Arithmetic {
    start: u64,
    step: u64,
}

impl SetOracle for Arithmetic {
    fn contains(&self, n: u64) -> Result<bool> {
        Ok(n >= self.start && (n - self.start) % self.step == 0)
    }

    fn nth(&self, i: u64) -> Result<u64> {
        i.checked_mul(self.step)
            .and_then(|x| x.checked_add(self.start))
            .ok_or_else(|| DensityError::Resource(format!("element {i} overflows u64")))
    }

    fn rank(&self, n: u64) -> Result<u64> {
        if n <= self.start {
            Ok(0)
        } else {
            Ok((n - self.start - 1) / self.step + 1)
        }
    }

    fn sweep(&self, end: u64, visit: &mut dyn FnMut(u64)) -> Result<()> {
        let mut x = self.start;
        while x < end {
            visit(x);
            x = match x.checked_add(self.step) {
                Some(y) => y,
                None => break,
            };
        }
        Ok(())
    }
}

#[derive(Default)]
struct ScanCache {
    elems: Vec<u64>,
    scanned: u64,
}

type FalliblePredicate = Box<dyn Fn(u64) -> Result<bool> + Send + Sync>;

struct Predicate {
    f: FalliblePredicate,
    cache: Mutex<ScanCache>,
}

impl Predicate {
    fn new<F>(f: F) -> Self
    where
        F: Fn(u64) -> Result<bool> + Send + Sync + 'static,
    {
        Predicate {
            f: Box::new(f),
            cache: Mutex::new(ScanCache::default()),
        }
    }
}

fn extend_scan(
    cache: &mut ScanCache,
    member: &dyn Fn(u64) -> Result<bool>,
    until: impl Fn(&ScanCache) -> bool,
) -> Result<()> {
    while !until(cache) {
        if cache.scanned >= MAX_SCAN {
            return Err(DensityError::Resource(format!(
                "membership scan passed {MAX_SCAN} without settling the query"
            )));
        }
        let n = cache.scanned;
        if member(n)? {
            cache.elems.push(n);
        }
        cache.scanned += 1;
    }
    Ok(())
}

impl SetOracle for Predicate {
    fn contains(&self, n: u64) -> Result<bool> {
        (self.f)(n)
    }

    fn nth(&self, i: u64) -> Result<u64> {
        let mut cache = self.cache.lock().expect("scan cache poisoned");
        extend_scan(&mut cache, &*self.f, |c| c.elems.len() as u64 > i)?;
        Ok(cache.elems[i as usize])
    }

    fn rank(&self, n: u64) -> Result<u64> {
        let mut cache = self.cache.lock().expect("scan cache poisoned");
        extend_scan(&mut cache, &*self.f, |c| c.scanned >= n)?;
        Ok(cache.elems.partition_point(|&x| x < n) as u64)
    }

    fn sweep(&self, end: u64, visit: &mut dyn FnMut(u64)) -> Result<()> {
        for n in 0..end {
            if (self.f)(n)? {
                visit(n);
            }
        }
        Ok(())
    }
}

type Enumeration = Box<dyn Fn(u64) -> Option<u64> + Send + Sync>;

struct Enumerated {
    f: Enumeration,
}

impl Enumerated {
    fn get(&self, i: u64) -> Result<u64> {
        (self.f)(i).ok_or_else(|| {
            DensityError::Integrity(format!(
                "enumeration exhausted at index {i}; an infinite set was expected"
            ))
        })
    }
}

impl SetOracle for Enumerated {
    fn contains(&self, n: u64) -> Result<bool> {
        let i = self.rank(n)?;
        Ok(self.get(i)? == n)
    }

    fn nth(&self, i: u64) -> Result<u64> {
        self.get(i)
    }

    fn rank(&self, n: u64) -> Result<u64> {
        // least i with nth(i) >= n, by galloping then bisection
        if self.get(0)? >= n {
            return Ok(0);
        }
        let mut lo = 0u64;
        let mut hi = 1u64;
        while self.get(hi)? < n {
            lo = hi;
            hi = hi.checked_mul(2).ok_or_else(|| {
                DensityError::Resource("enumeration rank search overflowed".into())
            })?;
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.get(mid)? < n {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    }
}

struct Sorted {
    elems: Arc<Vec<u64>>,
    limit: u64,
}

impl SetOracle for Sorted {
    fn contains(&self, n: u64) -> Result<bool> {
        if n >= self.limit {
            return Err(DensityError::horizon(n, self.limit));
        }
        Ok(self.elems.binary_search(&n).is_ok())
    }

    fn nth(&self, i: u64) -> Result<u64> {
        self.elems
            .get(i as usize)
            .copied()
            .ok_or(DensityError::horizon(self.limit, self.limit))
    }

    fn rank(&self, n: u64) -> Result<u64> {
        if n > self.limit {
            return Err(DensityError::horizon(n, self.limit));
        }
        Ok(self.elems.partition_point(|&x| x < n) as u64)
    }

    fn sweep(&self, end: u64, visit: &mut dyn FnMut(u64)) -> Result<()> {
        if end > self.limit {
            return Err(DensityError::horizon(end, self.limit));
        }
        for &x in self.elems.iter().take_while(|&&x| x < end) {
            visit(x);
        }
        Ok(())
    }
}

struct Complement {
    inner: LazySet,
    cache: Mutex<ScanCache>,
}

impl SetOracle for Complement {
    fn contains(&self, n: u64) -> Result<bool> {
        Ok(!self.inner.contains(n)?)
    }

    fn nth(&self, i: u64) -> Result<u64> {
        let mut cache = self.cache.lock().expect("scan cache poisoned");
        let inner = &self.inner;
        extend_scan(&mut cache, &|n| Ok(!inner.contains(n)?), |c| {
            c.elems.len() as u64 > i
        })?;
        Ok(cache.elems[i as usize])
    }

    fn rank(&self, n: u64) -> Result<u64> {
        Ok(n - self.inner.rank(n)?)
    }

    fn sweep(&self, end: u64, visit: &mut dyn FnMut(u64)) -> Result<()> {
        let mut next = 0u64;
        self.inner.sweep(end, &mut |x| {
            for y in next..x {
                visit(y);
            }
            next = x + 1;
        })?;
        for y in next..end {
            visit(y);
        }
        Ok(())
    }
}

/// Random-access Bernoulli bits from a seeded ChaCha8 stream.
#[derive(Clone)]
pub struct BernoulliBits {
    threshold: u64,
    seed: u64,
}

impl BernoulliBits {
    pub fn new(p_num: u64, p_den: u64, seed: u64) -> Self {
        assert!(p_den > 0 && p_num <= p_den, "probability must lie in [0, 1]");
        let threshold = ((p_num as u128) << 32) / p_den as u128;
        BernoulliBits {
            threshold: threshold as u64,
            seed,
        }
    }

    /// The `n`-th bit.
    pub fn bit(&self, n: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(n as u128);
        (rng.next_u32() as u64) < self.threshold
    }

    /// Bits `0..len`, generated sequentially.
    pub fn prefix(&self, len: usize) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        (0..len)
            .map(|_| (rng.next_u32() as u64) < self.threshold)
            .collect()
    }
}
