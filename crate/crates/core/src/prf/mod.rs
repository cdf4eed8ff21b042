//! Small-space hashing: families of m-wise independent maps from signal
//! positions to buckets, realized by random polynomials over a prime field
//! with rejection folding, and evaluated in batches through multipoint
//! polynomial evaluation.

mod mpe;
mod ntt;
mod poly;
mod prime;

pub use mpe::{mpe, product_tree, ProductTree};
pub use poly::{poly_mod, poly_mul, Polynomial};
pub use prime::{is_prime, next_prime_at_least};

use crate::error::{Error, Result};

/// The prime field and fold used by one hash family.
///
/// `cutoff = r * floor(p / r)` is the largest multiple of r not exceeding p;
/// field elements at or above it are rejected so that the fold below is
/// applied only on a domain it divides evenly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldParams {
    pub p: u64,
    pub r: u64,
    pub cutoff: u64,
}

impl FieldParams {
    /// Folds an accepted field element into [0, r). Restricted to
    /// [0, cutoff) this map is exactly floor(p/r)-to-1, which is what makes
    /// the conditioned outputs exactly uniform over the buckets.
    #[inline]
    pub fn fold(&self, accepted: u64) -> u64 {
        debug_assert!(accepted < self.cutoff);
        accepted / (self.p / self.r)
    }
}

/// Smallest prime p >= max(d, 2r), found by deterministic primality testing
/// upward from the bound.
pub fn find_prime(d: u64, r: u64) -> FieldParams {
    assert!(r >= 1 && r <= d, "range must satisfy 1 <= r <= d");
    let p = next_prime_at_least(d.max(2 * r));
    FieldParams {
        p,
        r,
        cutoff: r * (p / r),
    }
}

/// One hash function: `k_rep` random polynomials of `degree` coefficients
/// each over the field, applied with rejection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashSeed {
    pub field: FieldParams,
    /// Independence parameter: each polynomial has `degree` coefficients,
    /// i.e. polynomial degree `degree - 1`.
    pub degree: usize,
    /// k_rep rows of `degree` coefficients in [0, p).
    pub polys: Vec<Vec<u64>>,
}

impl HashSeed {
    pub fn new(field: FieldParams, degree: usize, polys: Vec<Vec<u64>>) -> Result<Self> {
        if degree == 0 || polys.is_empty() {
            return Err(Error::InvalidParams(
                "hash seed needs degree >= 1 and k_rep >= 1".into(),
            ));
        }
        for row in &polys {
            if row.len() != degree || row.iter().any(|&c| c >= field.p) {
                return Err(Error::InvalidParams(
                    "hash seed coefficients must be `degree` values in [0, p)".into(),
                ));
            }
        }
        Ok(HashSeed {
            field,
            degree,
            polys,
        })
    }

    pub fn k_rep(&self) -> usize {
        self.polys.len()
    }
}

/// Failure of the rejection chain: some position stayed above the cutoff in
/// every repetition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashFailed;

/// Evaluates the hash on a batch of distinct positions.
///
/// Round k evaluates the k-th polynomial on every position still pending,
/// accepts those whose value falls below the cutoff, and folds accepted
/// values into [0, r). A position pending after the last round fails the
/// whole batch. Each round's evaluations run through the product/remainder
/// trees on the pending sub-batch, padded to a power of two.
pub fn hash_batch(seed: &HashSeed, positions: &[u64]) -> std::result::Result<Vec<u64>, HashFailed> {
    let p = seed.field.p;
    let mut out = vec![0u64; positions.len()];
    let mut pending: Vec<usize> = (0..positions.len()).collect();
    for row in &seed.polys {
        if pending.is_empty() {
            break;
        }
        let g = Polynomial::from_coeffs(row.clone());
        let points: Vec<u64> = pending.iter().map(|&i| positions[i] % p).collect();
        let values = mpe(&g, &points, p).expect("product-tree nodes are monic");
        let mut still_pending = Vec::new();
        for (&slot, value) in pending.iter().zip(values) {
            if value < seed.field.cutoff {
                out[slot] = seed.field.fold(value);
            } else {
                still_pending.push(slot);
            }
        }
        pending = still_pending;
    }
    if pending.is_empty() {
        Ok(out)
    } else {
        Err(HashFailed)
    }
}
