//! Bijections of ℕ with forward and inverse prefix oracles.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{DensityError, Result};

pub trait PermOracle: Send + Sync {
    fn forward(&self, n: u64) -> Result<u64>;
    fn inverse(&self, n: u64) -> Result<u64>;
}

/// A permutation π of ℕ, queried through `forward(n) = π(n)` and `inverse(n) = π⁻¹(n)`.
#[derive(Clone)]
pub struct LazyPermutation {
    oracle: Arc<dyn PermOracle>,
    label: String,
}

impl fmt::Debug for LazyPermutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LazyPermutation")
            .field("label", &self.label)
            .finish()
    }
}

type Map = Box<dyn Fn(u64) -> Result<u64> + Send + Sync>;

struct FnPair {
    fwd: Map,
    inv: Map,
}

impl PermOracle for FnPair {
    fn forward(&self, n: u64) -> Result<u64> {
        (self.fwd)(n)
    }
    fn inverse(&self, n: u64) -> Result<u64> {
        (self.inv)(n)
    }
}

struct Inverted(LazyPermutation);

impl PermOracle for Inverted {
    fn forward(&self, n: u64) -> Result<u64> {
        self.0.inverse(n)
    }
    fn inverse(&self, n: u64) -> Result<u64> {
        self.0.forward(n)
    }
}

struct Composed {
    outer: LazyPermutation,
    inner: LazyPermutation,
}

impl PermOracle for Composed {
    fn forward(&self, n: u64) -> Result<u64> {
        self.outer.forward(self.inner.forward(n)?)
    }
    fn inverse(&self, n: u64) -> Result<u64> {
        self.inner.inverse(self.outer.inverse(n)?)
    }
}

/// What a table permutation does outside its realized part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tail {
    /// Identity outside the table; the table must permute its own support.
    Identity,
    /// Queries outside the table fail with a horizon error at this bound.
    Horizon(u64),
}

struct Table {
    inv: Vec<u64>,
    fwd: HashMap<u64, u64>,
    tail: Tail,
}

impl PermOracle for Table {
    fn forward(&self, n: u64) -> Result<u64> {
        match self.fwd.get(&n) {
            Some(&m) => Ok(m),
            None => match self.tail {
                Tail::Identity => Ok(n),
                Tail::Horizon(h) => Err(DensityError::horizon(n, h)),
            },
        }
    }

    fn inverse(&self, n: u64) -> Result<u64> {
        if (n as usize) < self.inv.len() {
            return Ok(self.inv[n as usize]);
        }
        match self.tail {
            Tail::Identity => {
                if self.fwd.contains_key(&n) {
                    Err(DensityError::Integrity(format!(
                        "table maps {n} but has no preimage for it"
                    )))
                } else {
                    Ok(n)
                }
            }
            Tail::Horizon(h) => Err(DensityError::horizon(n, h)),
        }
    }
}

struct FiniteSupport {
    fwd: HashMap<u64, u64>,
    inv: HashMap<u64, u64>,
}

impl PermOracle for FiniteSupport {
    fn forward(&self, n: u64) -> Result<u64> {
        Ok(*self.fwd.get(&n).unwrap_or(&n))
    }
    fn inverse(&self, n: u64) -> Result<u64> {
        Ok(*self.inv.get(&n).unwrap_or(&n))
    }
}

/// Seeded shuffle of consecutive blocks `[offset + b·len, offset + (b+1)·len)`;
/// everything below `offset` is fixed.
struct BlockShuffle {
    seed: u64,
    len: u64,
    offset: u64,
    /// Last block shuffled; sweeps query the same block repeatedly.
    last: Mutex<Option<(u64, Arc<Vec<u64>>)>>,
}

impl BlockShuffle {
    fn block(&self, b: u64) -> Arc<Vec<u64>> {
        let mut last = self.last.lock().expect("cache lock");
        if let Some((cached, p)) = last.as_ref() {
            if *cached == b {
                return Arc::clone(p);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ b.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut p: Vec<u64> = (0..self.len).collect();
        p.shuffle(&mut rng);
        let p = Arc::new(p);
        *last = Some((b, Arc::clone(&p)));
        p
    }
}

impl PermOracle for BlockShuffle {
    fn forward(&self, n: u64) -> Result<u64> {
        if n < self.offset {
            return Ok(n);
        }
        let b = (n - self.offset) / self.len;
        let base = self.offset + b * self.len;
        let p = self.block(b);
        Ok(base + p[(n - base) as usize])
    }

    fn inverse(&self, n: u64) -> Result<u64> {
        if n < self.offset {
            return Ok(n);
        }
        let b = (n - self.offset) / self.len;
        let base = self.offset + b * self.len;
        let p = self.block(b);
        let pos = p
            .iter()
            .position(|&x| x == n - base)
            .expect("block shuffle is a bijection");
        Ok(base + pos as u64)
    }
}

impl LazyPermutation {
    pub fn from_oracle(label: impl Into<String>, oracle: Arc<dyn PermOracle>) -> Self {
        LazyPermutation {
            oracle,
            label: label.into(),
        }
    }

    pub fn from_fns<F, G>(label: impl Into<String>, fwd: F, inv: G) -> Self
    where
        F: Fn(u64) -> Result<u64> + Send + Sync + 'static,
        G: Fn(u64) -> Result<u64> + Send + Sync + 'static,
    {
        Self::from_oracle(
            label,
            Arc::new(FnPair {
                fwd: Box::new(fwd),
                inv: Box::new(inv),
            }),
        )
    }

    pub fn identity() -> Self {
        Self::from_fns("identity", Ok, Ok)
    }

    /// The permutation given by `inverse(m) = inv[m]` for `m < inv.len()`.
    pub fn from_inverse_table(label: impl Into<String>, inv: Vec<u64>, tail: Tail) -> Result<Self> {
        let mut fwd = HashMap::with_capacity(inv.len());
        for (m, &n) in inv.iter().enumerate() {
            if fwd.insert(n, m as u64).is_some() {
                return Err(DensityError::Integrity(format!(
                    "table sends two positions to source {n}"
                )));
            }
        }
        if tail == Tail::Identity {
            let len = inv.len() as u64;
            if let Some(&bad) = inv.iter().find(|&&n| n >= len) {
                return Err(DensityError::Integrity(format!(
                    "identity-tailed table must permute [0, {len}) but uses {bad}"
                )));
            }
        }
        Ok(Self::from_oracle(label, Arc::new(Table { inv, fwd, tail })))
    }

    /// A permutation moving only the listed points; `pairs` are `(n, π(n))`.
    pub fn from_finite_map(label: impl Into<String>, pairs: &[(u64, u64)]) -> Result<Self> {
        let mut fwd = HashMap::new();
        let mut inv = HashMap::new();
        for &(a, b) in pairs {
            if fwd.insert(a, b).is_some() || inv.insert(b, a).is_some() {
                return Err(DensityError::Integrity(format!(
                    "finite map repeats {a} or {b}"
                )));
            }
        }
        let mut dom: Vec<u64> = fwd.keys().copied().collect();
        let mut img: Vec<u64> = inv.keys().copied().collect();
        dom.sort_unstable();
        img.sort_unstable();
        if dom != img {
            return Err(DensityError::Integrity(
                "finite map does not permute its support".into(),
            ));
        }
        Ok(Self::from_oracle(label, Arc::new(FiniteSupport { fwd, inv })))
    }

    pub fn transposition(a: u64, b: u64) -> Self {
        if a == b {
            return Self::identity();
        }
        Self::from_finite_map(format!("({a} {b})"), &[(a, b), (b, a)])
            .expect("a transposition permutes its support")
    }

    /// `2k ↔ 2k+1`.
    pub fn pair_swap() -> Self {
        Self::from_fns("pair-swap", |n| Ok(n ^ 1), |n| Ok(n ^ 1))
    }

    /// Reverses every block `[2^k, 2^{k+1})`; fixes 0.
    pub fn dyadic_reversal() -> Self {
        fn rev(n: u64) -> Result<u64> {
            if n == 0 {
                return Ok(0);
            }
            let k = 63 - n.leading_zeros() as u64;
            let lo = 1u64 << k;
            let hi = lo.wrapping_shl(1).wrapping_sub(1);
            Ok(lo + (hi - n))
        }
        Self::from_fns("dyadic-reversal", rev, rev)
    }

    /// Reverses `[a, b)` and fixes everything else.
    pub fn interval_reversal(a: u64, b: u64) -> Self {
        let f = move |n: u64| -> Result<u64> {
            if n >= a && n < b {
                Ok(a + (b - 1 - n))
            } else {
                Ok(n)
            }
        };
        Self::from_fns(format!("reverse[{a},{b})"), f, f)
    }

    /// Swaps `[0, len)` with `[len, 2len)` as sets, order-preserving on each; identity above.
    pub fn block_swap(len: u64) -> Self {
        let f = move |n: u64| -> Result<u64> {
            if n < 2 * len {
                Ok((n + len) % (2 * len))
            } else {
                Ok(n)
            }
        };
        Self::from_fns(format!("swap[0,{len})<->[{len},{})", 2 * len), f, f)
    }

    /// Seeded shuffle of the blocks `[offset + b·len, offset + (b+1)·len)`.
    pub fn block_shuffle(seed: u64, len: u64, offset: u64) -> Self {
        assert!(len >= 1);
        Self::from_oracle(
            format!("shuffle(seed={seed},len={len},offset={offset})"),
            Arc::new(BlockShuffle {
                seed,
                len,
                offset,
                last: Mutex::new(None),
            }),
        )
    }

    /// Product of two seeded block shuffles on staggered schedules. Every point moves
    /// by less than the sum of the two block lengths, so inverses stay cheap.
    pub fn seeded_finitary(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lens = [4u64, 8, 16];
        let l1 = *lens.choose(&mut rng).expect("nonempty");
        let l2 = *lens.choose(&mut rng).expect("nonempty");
        let first = Self::block_shuffle(seed.wrapping_mul(2).wrapping_add(1), l1, 0);
        let second = Self::block_shuffle(seed.wrapping_mul(2).wrapping_add(2), l2, l2 / 2);
        second
            .compose(&first)
            .labeled(format!("finitary(seed={seed})"))
    }

    /// Maximal displacement of [`LazyPermutation::seeded_finitary`] is below this bound.
    pub const FINITARY_DISPLACEMENT: u64 = 32;

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn forward(&self, n: u64) -> Result<u64> {
        self.oracle.forward(n)
    }

    pub fn inverse(&self, n: u64) -> Result<u64> {
        self.oracle.inverse(n)
    }

    /// `self ∘ inner`: apply `inner` first.
    pub fn compose(&self, inner: &LazyPermutation) -> LazyPermutation {
        LazyPermutation::from_oracle(
            format!("{}∘{}", self.label, inner.label),
            Arc::new(Composed {
                outer: self.clone(),
                inner: inner.clone(),
            }),
        )
    }

    pub fn inverted(&self) -> LazyPermutation {
        LazyPermutation::from_oracle(format!("{}⁻¹", self.label), Arc::new(Inverted(self.clone())))
    }

    /// Checks `π⁻¹(π(n)) = n` and `π(π⁻¹(n)) = n` for all `n < horizon`.
    pub fn audit_bijective(&self, horizon: u64) -> Result<()> {
        for n in 0..horizon {
            let f = self.forward(n)?;
            if self.inverse(f)? != n {
                return Err(DensityError::Integrity(format!(
                    "{}: inverse(forward({n})) != {n}",
                    self.label
                )));
            }
            let i = self.inverse(n)?;
            if self.forward(i)? != n {
                return Err(DensityError::Integrity(format!(
                    "{}: forward(inverse({n})) != {n}",
                    self.label
                )));
            }
        }
        Ok(())
    }

    /// `π[n] = {π(k) : k < n}`, sorted.
    pub fn image_of_prefix(&self, n: u64) -> Result<Vec<u64>> {
        let mut v = (0..n).map(|k| self.forward(k)).collect::<Result<Vec<_>>>()?;
        v.sort_unstable();
        Ok(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_permutations_are_bijective() {
        for p in [
            LazyPermutation::identity(),
            LazyPermutation::pair_swap(),
            LazyPermutation::dyadic_reversal(),
            LazyPermutation::interval_reversal(4, 8),
            LazyPermutation::block_swap(4),
            LazyPermutation::block_shuffle(3, 8, 5),
            LazyPermutation::seeded_finitary(11),
            LazyPermutation::transposition(3, 1036),
        ] {
            p.audit_bijective(2000).unwrap();
        }
    }

    #[test]
    fn dyadic_reversal_values() {
        let p = LazyPermutation::dyadic_reversal();
        let got: Vec<u64> = (0..8).map(|n| p.forward(n).unwrap()).collect();
        assert_eq!(got, vec![0, 1, 3, 2, 7, 6, 5, 4]);
    }

    #[test]
    fn finitary_displacement_is_bounded() {
        for seed in 0..20 {
            let p = LazyPermutation::seeded_finitary(seed);
            for n in 0..3000u64 {
                let m = p.forward(n).unwrap();
                assert!(m.abs_diff(n) < LazyPermutation::FINITARY_DISPLACEMENT);
            }
        }
    }

    #[test]
    fn table_with_horizon_tail_fails_loudly() {
        let p = LazyPermutation::from_inverse_table("t", vec![1, 0, 5], Tail::Horizon(3)).unwrap();
        assert_eq!(p.inverse(2).unwrap(), 5);
        assert_eq!(p.forward(5).unwrap(), 2);
        assert!(matches!(p.forward(2), Err(DensityError::Horizon { .. })));
        assert!(matches!(p.inverse(3), Err(DensityError::Horizon { .. })));
    }

    #[test]
    fn composition_and_inverse() {
        let a = LazyPermutation::seeded_finitary(1);
        let b = LazyPermutation::dyadic_reversal();
        let c = a.compose(&b);
        for n in 0..500 {
            assert_eq!(c.forward(n).unwrap(), a.forward(b.forward(n).unwrap()).unwrap());
            assert_eq!(c.inverted().forward(c.forward(n).unwrap()).unwrap(), n);
        }
    }
}
