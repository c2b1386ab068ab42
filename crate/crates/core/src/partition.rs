//! Interval partitions of ℕ given by realized cut points.

use serde::Serialize;

use crate::error::{DensityError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    /// `|I_n| = 2^n`.
    Geometric,
    /// `|I_{n+1}| ≥ n·Σ_{i≤n} |I_i|` for `n ≥ 1`.
    Superincreasing,
    Custom,
}

/// Intervals `I_n = [cuts[n], cuts[n+1])`. Only the realized cuts are known.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntervalPartition {
    cuts: Vec<u64>,
    regime: Regime,
}

impl IntervalPartition {
    /// Cuts `2^n - 1` up to and including the first cut `>= max_cut`.
    pub fn geometric(max_cut: u64) -> Self {
        let mut cuts = vec![0u64];
        let mut size = 1u64;
        while *cuts.last().expect("nonempty") < max_cut.max(1) {
            let Some(next) = cuts.last().expect("nonempty").checked_add(size) else {
                break;
            };
            cuts.push(next);
            size = size.saturating_mul(2);
        }
        IntervalPartition {
            cuts,
            regime: Regime::Geometric,
        }
    }

    /// `|I_0| = 1`, `|I_{n+1}| = (n+1)·Σ_{i≤n}|I_i| + 1`, up to the first cut `>= max_cut`.
    pub fn superincreasing(max_cut: u64) -> Self {
        let mut cuts = vec![0u64, 1];
        let mut n = 0u64;
        while *cuts.last().expect("nonempty") < max_cut {
            let total = *cuts.last().expect("nonempty");
            let next = (n + 1)
                .checked_mul(total)
                .and_then(|s| s.checked_add(1))
                .and_then(|s| s.checked_add(total));
            match next {
                Some(c) => cuts.push(c),
                None => break,
            }
            n += 1;
        }
        IntervalPartition {
            cuts,
            regime: Regime::Superincreasing,
        }
    }

    pub fn custom(cuts: Vec<u64>) -> Result<Self> {
        Self::with_regime(cuts, Regime::Custom)
    }

    /// Validates the cut list against the declared regime.
    pub fn with_regime(cuts: Vec<u64>, regime: Regime) -> Result<Self> {
        if cuts.len() < 2 || cuts[0] != 0 {
            return Err(DensityError::Precondition(
                "cuts must start at 0 and realize at least one interval".into(),
            ));
        }
        if cuts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(DensityError::Precondition(
                "cuts must be strictly increasing".into(),
            ));
        }
        let p = IntervalPartition { cuts, regime };
        p.audit()?;
        Ok(p)
    }

    /// Checks the growth rule of the regime on every realized interval.
    pub fn audit(&self) -> Result<()> {
        match self.regime {
            Regime::Custom => Ok(()),
            Regime::Geometric => {
                for n in 0..self.len() {
                    if self.size(n)? != 1u64 << n {
                        return Err(DensityError::Integrity(format!(
                            "geometric interval {n} has size {}",
                            self.size(n)?
                        )));
                    }
                }
                Ok(())
            }
            Regime::Superincreasing => {
                for n in 1..self.len().saturating_sub(1) {
                    let need = (n as u128) * (self.cuts[n + 1] as u128);
                    if (self.size(n + 1)? as u128) < need {
                        return Err(DensityError::Integrity(format!(
                            "interval {} is too small for the superincreasing rule",
                            n + 1
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn cuts(&self) -> &[u64] {
        &self.cuts
    }

    /// Number of realized intervals.
    pub fn len(&self) -> usize {
        self.cuts.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// End of the realized part.
    pub fn end(&self) -> u64 {
        *self.cuts.last().expect("nonempty")
    }

    pub fn interval(&self, n: usize) -> Result<(u64, u64)> {
        if n >= self.len() {
            return Err(DensityError::horizon(n as u64, self.len() as u64));
        }
        Ok((self.cuts[n], self.cuts[n + 1]))
    }

    pub fn size(&self, n: usize) -> Result<u64> {
        let (a, b) = self.interval(n)?;
        Ok(b - a)
    }

    /// Index of the interval containing `x`.
    pub fn index_of(&self, x: u64) -> Result<usize> {
        if x >= self.end() {
            return Err(DensityError::horizon(x, self.end()));
        }
        Ok(self.cuts.partition_point(|&c| c <= x) - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn superincreasing_default_cuts() {
        let p = IntervalPartition::superincreasing(600_000);
        assert_eq!(
            p.cuts(),
            &[0, 1, 3, 10, 41, 206, 1237, 8660, 69281, 623530]
        );
        p.audit().unwrap();
    }

    #[test]
    fn geometric_cuts_and_lookup() {
        let p = IntervalPartition::geometric(100);
        assert_eq!(&p.cuts()[..5], &[0, 1, 3, 7, 15]);
        assert_eq!(p.index_of(0).unwrap(), 0);
        assert_eq!(p.index_of(7).unwrap(), 3);
        assert_eq!(p.index_of(14).unwrap(), 3);
        assert!(p.index_of(p.end()).is_err());
        p.audit().unwrap();
    }

    #[test]
    fn custom_validation() {
        assert!(IntervalPartition::custom(vec![1, 2]).is_err());
        assert!(IntervalPartition::custom(vec![0, 2, 2]).is_err());
        assert!(IntervalPartition::with_regime(vec![0, 1, 2, 3], Regime::Superincreasing).is_err());
        assert!(IntervalPartition::custom(vec![0, 5, 9]).is_ok());
    }
}
