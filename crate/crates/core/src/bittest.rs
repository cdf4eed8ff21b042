//! Bit tests: read a position out of a bucket sum, one bit per row.
//!
//! A measurement holds L binary-row sums plus the plain bucket total. Row j
//! accumulates the mass of positions whose bit (L-1-j) is one, so the column
//! for position i, read top to bottom, is the L-bit binary expansion of i
//! with the most significant bit first.

/// One bucket's measurement: `bits[j]` sums the values whose position has
/// bit (L-1-j) set; `total` sums every value in the bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    total: f64,
    bits: Vec<f64>,
}

impl Measurement {
    pub fn empty(bit_rows: usize) -> Self {
        Measurement {
            total: 0.0,
            bits: vec![0.0; bit_rows],
        }
    }

    pub fn bit_rows(&self) -> usize {
        self.bits.len()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn bits(&self) -> &[f64] {
        &self.bits
    }

    pub fn is_zero(&self) -> bool {
        self.total == 0.0 && self.bits.iter().all(|&b| b == 0.0)
    }

    /// Adds `value` at `position`: the total row always receives it, and the
    /// row of every set bit of `position` receives it as well.
    pub fn accumulate(&mut self, position: usize, value: f64) {
        let bit_rows = self.bits.len();
        debug_assert!(bit_rows == usize::BITS as usize || position < (1usize << bit_rows));
        self.total += value;
        for row in 0..bit_rows {
            let bit = bit_rows - 1 - row;
            if position >> bit & 1 == 1 {
                self.bits[row] += value;
            }
        }
    }

    /// Entrywise sum, in place.
    pub fn add_assign(&mut self, other: &Measurement) {
        debug_assert_eq!(self.bits.len(), other.bits.len());
        self.total += other.total;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a += *b;
        }
    }

    /// Entrywise difference, in place.
    pub fn sub_assign(&mut self, other: &Measurement) {
        debug_assert_eq!(self.bits.len(), other.bits.len());
        self.total -= other.total;
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a -= *b;
        }
    }

    pub fn scalars(&self) -> impl Iterator<Item = f64> + '_ {
        std::iter::once(self.total).chain(self.bits.iter().copied())
    }

    /// Adds `delta` to one scalar: offset 0 is the total, offset j >= 1 the
    /// bit row j - 1.
    pub(crate) fn perturb(&mut self, offset: usize, delta: f64) {
        if offset == 0 {
            self.total += delta;
        } else {
            self.bits[offset - 1] += delta;
        }
    }

    pub(crate) fn from_scalars(total: f64, bits: Vec<f64>) -> Self {
        Measurement { total, bits }
    }
}

/// Reads a (position, value) candidate out of a measurement.
///
/// Bit (L-1-j) of the position is one exactly when the bit-one mass dominates
/// strictly: |bits[j]| > |total - bits[j]|. Ties resolve to zero, so the
/// all-zero measurement decodes to (0, 0.0). The value estimate is the bucket
/// total. The decoded position may reach 2^L - 1 and can therefore exceed the
/// signal dimension; callers discard such candidates.
pub fn decode_measurement(meas: &Measurement) -> (usize, f64) {
    let bit_rows = meas.bits.len();
    let mut position = 0usize;
    for (row, &one_mass) in meas.bits.iter().enumerate() {
        let zero_mass = meas.total - one_mass;
        if one_mass.abs() > zero_mass.abs() {
            position |= 1 << (bit_rows - 1 - row);
        }
    }
    (position, meas.total)
}
