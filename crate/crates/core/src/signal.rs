//! Sparse signals stored as position -> value maps.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// A d-dimensional real signal that stores only its nonzero entries.
///
/// Invariants: every stored position lies in `[0, d)` and no stored value is
/// exactly zero. Iteration order is ascending by position, which fixes the
/// summation order of every norm computed from the signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    dimension: usize,
    entries: BTreeMap<usize, f64>,
}

impl SparseSignal {
    pub fn new(dimension: usize) -> Self {
        SparseSignal {
            dimension,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_entries<I>(dimension: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut signal = SparseSignal::new(dimension);
        for (position, value) in entries {
            if position >= dimension {
                return Err(Error::PositionOutOfRange {
                    position,
                    dimension,
                });
            }
            signal.add_at(position, value);
        }
        Ok(signal)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, position: usize) -> f64 {
        self.entries.get(&position).copied().unwrap_or(0.0)
    }

    /// Sets `position` to exactly `value`, erasing the entry when `value == 0`.
    pub fn set(&mut self, position: usize, value: f64) {
        assert!(position < self.dimension, "position out of range");
        if value == 0.0 {
            self.entries.remove(&position);
        } else {
            self.entries.insert(position, value);
        }
    }

    /// Adds `delta` to the entry at `position`; exact cancellation removes it.
    pub fn add_at(&mut self, position: usize, delta: f64) {
        assert!(position < self.dimension, "position out of range");
        let value = self.get(position) + delta;
        self.set(position, value);
    }

    /// Entries in ascending position order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&p, &v)| (p, v))
    }

    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.keys().copied()
    }

    /// Entrywise sum `self + other`.
    pub fn add(&self, other: &SparseSignal) -> Result<SparseSignal> {
        self.combine(other, 1.0)
    }

    /// Entrywise difference `self - other`.
    pub fn sub(&self, other: &SparseSignal) -> Result<SparseSignal> {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &SparseSignal, sign: f64) -> Result<SparseSignal> {
        if self.dimension != other.dimension {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: other.dimension,
            });
        }
        let mut out = self.clone();
        for (position, value) in other.iter() {
            out.add_at(position, sign * value);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> SparseSignal {
        let mut out = SparseSignal::new(self.dimension);
        for (position, value) in self.iter() {
            out.set(position, factor * value);
        }
        out
    }
}

/// Restriction of `f` to its `m` largest-magnitude positions.
///
/// Ties in magnitude break toward the smaller position index, so the result
/// is deterministic.
pub fn best_m_approx(f: &SparseSignal, m: usize) -> SparseSignal {
    let mut ranked: Vec<(usize, f64)> = f.iter().collect();
    ranked.sort_by(|a, b| {
        b.1.abs()
            .partial_cmp(&a.1.abs())
            .expect("signal values are finite")
            .then(a.0.cmp(&b.0))
    });
    ranked.truncate(m);
    let mut out = SparseSignal::new(f.dimension());
    for (position, value) in ranked {
        out.set(position, value);
    }
    out
}
