//! Slaloms: finite slot sets with a width bound.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::error::{DensityError, Result};

type Width = dyn Fn(u64) -> u64 + Send + Sync;
type Slots = dyn Fn(u64) -> Result<BTreeSet<u64>> + Send + Sync;

/// `φ(n)` with `|φ(n)| ≤ h(n)`, checked on every query.
#[derive(Clone)]
pub struct Slalom {
    label: String,
    width: Arc<Width>,
    slots: Arc<Slots>,
}

impl fmt::Debug for Slalom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Slalom").field("label", &self.label).finish()
    }
}

impl Slalom {
    pub fn new<H, S>(label: impl Into<String>, width: H, slots: S) -> Self
    where
        H: Fn(u64) -> u64 + Send + Sync + 'static,
        S: Fn(u64) -> Result<BTreeSet<u64>> + Send + Sync + 'static,
    {
        Slalom {
            label: label.into(),
            width: Arc::new(width),
            slots: Arc::new(slots),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn width(&self, n: u64) -> u64 {
        (self.width)(n)
    }

    pub fn slots(&self, n: u64) -> Result<BTreeSet<u64>> {
        let s = (self.slots)(n)?;
        let h = self.width(n);
        if s.len() as u64 > h {
            return Err(DensityError::Integrity(format!(
                "slalom {} has {} slots at {n}, width bound is {h}",
                self.label,
                s.len()
            )));
        }
        Ok(s)
    }

    pub fn captures(&self, n: u64, x: u64) -> Result<bool> {
        Ok(self.slots(n)?.contains(&x))
    }

    /// Every `n < end` with `g(n) ∈ φ(n)`. `None` values of `g` are never captured.
    pub fn hits<G>(&self, g: G, end: u64) -> Result<Vec<u64>>
    where
        G: Fn(u64) -> Option<u64>,
    {
        let mut out = Vec::new();
        for n in 0..end {
            if let Some(v) = g(n) {
                if self.captures(n, v)? {
                    out.push(n);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn width_violation_is_integrity_error() {
        let s = Slalom::new("wide", |_| 1, |n| Ok((0..=n).collect()));
        assert!(s.slots(0).is_ok());
        assert!(matches!(s.slots(1), Err(DensityError::Integrity(_))));
    }

    #[test]
    fn hits_are_reported() {
        let s = Slalom::new("diag", |_| 1, |n| Ok([n].into_iter().collect()));
        assert_eq!(s.hits(|n| Some(n * n), 5).unwrap(), vec![0, 1]);
    }
}
