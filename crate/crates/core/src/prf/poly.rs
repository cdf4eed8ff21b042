//! Polynomials over Z_p with exact multiplication and remainder.

use crate::error::{Error, Result};

use super::ntt;
use super::prime::mul_mod;

/// Sizes at or below this multiply by direct convolution; larger ones go
/// through the transform path.
const SCHOOLBOOK_CUTOFF: usize = 32;

/// Coefficients over [0, p), low order first. The leading coefficient of a
/// nonzero polynomial is nonzero; the zero polynomial has no coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    coeffs: Vec<u64>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    pub fn constant(c: u64, p: u64) -> Self {
        Polynomial::from_coeffs(vec![c % p])
    }

    /// x - a over Z_p, the leaf of every product tree.
    pub fn linear_root(a: u64, p: u64) -> Self {
        Polynomial::from_coeffs(vec![(p - a % p) % p, 1])
    }

    /// Normalizes by trimming leading zeros; callers must already have
    /// reduced the coefficients modulo p.
    pub fn from_coeffs(mut coeffs: Vec<u64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree of a nonzero polynomial.
    pub fn degree(&self) -> usize {
        debug_assert!(!self.is_zero());
        self.coeffs.len() - 1
    }

    pub fn is_monic(&self) -> bool {
        self.coeffs.last() == Some(&1)
    }

    /// Direct evaluation at one point.
    pub fn eval(&self, x: u64, p: u64) -> u64 {
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = (mul_mod(acc, x, p) + c) % p;
        }
        acc
    }

    fn add(&self, other: &Polynomial, p: u64) -> Polynomial {
        let len = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0u64; len];
        for (i, slot) in out.iter_mut().enumerate() {
            let a = self.coeffs.get(i).copied().unwrap_or(0);
            let b = other.coeffs.get(i).copied().unwrap_or(0);
            *slot = (a + b) % p;
        }
        Polynomial::from_coeffs(out)
    }

    /// self * x^shift
    fn shift(&self, shift: usize) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        let mut coeffs = vec![0u64; shift + self.coeffs.len()];
        coeffs[shift..].copy_from_slice(&self.coeffs);
        Polynomial { coeffs }
    }
}

/// Exact product modulo p. Every coefficient of the result equals the full
/// integer convolution reduced modulo p; no floating-point rounding is
/// involved on either path.
pub fn poly_mul(u: &Polynomial, v: &Polynomial, p: u64) -> Polynomial {
    if u.is_zero() || v.is_zero() {
        return Polynomial::zero();
    }
    let coeffs = if u.coeffs.len().min(v.coeffs.len()) <= SCHOOLBOOK_CUTOFF {
        let mut out = vec![0u64; u.coeffs.len() + v.coeffs.len() - 1];
        for (i, &a) in u.coeffs.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in v.coeffs.iter().enumerate() {
                out[i + j] = (out[i + j] + mul_mod(a, b, p)) % p;
            }
        }
        out
    } else {
        ntt::convolve(&u.coeffs, &v.coeffs, p)
    };
    Polynomial::from_coeffs(coeffs)
}

/// Remainder of `h` modulo a monic divisor `q`, by repeatedly splitting off
/// the high part of `h` and folding it back through a table of the residues
/// x^(n-1+2^k) mod q. Each fold halves the excess degree, so the whole
/// reduction costs a logarithmic number of multiplications.
pub fn poly_mod(h: &Polynomial, q: &Polynomial, p: u64) -> Result<Polynomial> {
    if q.is_zero() || !q.is_monic() {
        return Err(Error::NonMonicDivisor);
    }
    let n = q.degree();
    if n == 0 {
        return Ok(Polynomial::zero());
    }
    if h.is_zero() || h.degree() < n {
        return Ok(h.clone());
    }

    // table[k] = x^(n-1+2^k) mod q, built by pushing the previous entry up
    // by 2^(k-1) and reducing it with the table built so far.
    let mut table: Vec<Polynomial> = Vec::new();
    let base = {
        // x^n mod q = x^n - q, which is the negated low part of q.
        let neg: Vec<u64> = q.coeffs()[..n].iter().map(|&c| (p - c) % p).collect();
        Polynomial::from_coeffs(neg)
    };
    table.push(base);

    let reduce = |h: &Polynomial, table: &[Polynomial]| -> Polynomial {
        let mut current = h.clone();
        while !current.is_zero() && current.degree() >= n {
            let excess = current.degree() - (n - 1);
            if excess == 1 {
                // current = lo + c * x^n
                let c = *current.coeffs().last().expect("nonzero");
                let lo = Polynomial::from_coeffs(current.coeffs()[..n].to_vec());
                let folded = poly_mul(&Polynomial::constant(c, p), &table[0], p);
                current = lo.add(&folded, p);
                continue;
            }
            // Smallest k with 2^k >= excess; split at n-1+2^(k-1).
            let k = usize::BITS as usize - (excess - 1).leading_zeros() as usize;
            let split = n - 1 + (1usize << (k - 1));
            debug_assert!(split < current.coeffs().len());
            let hi = Polynomial::from_coeffs(current.coeffs()[split..].to_vec());
            let lo = Polynomial::from_coeffs(current.coeffs()[..split].to_vec());
            let folded = poly_mul(&hi, &table[k - 1], p);
            current = lo.add(&folded, p);
        }
        current
    };

    // Grow the table far enough to cover deg h.
    let max_excess = h.degree() - (n - 1);
    let mut k = 1usize;
    while 1usize << (k - 1) < max_excess {
        let prev = table[k - 1].clone();
        let lifted = prev.shift(1usize << (k - 1));
        let entry = reduce(&lifted, &table);
        table.push(entry);
        k += 1;
    }

    Ok(reduce(h, &table))
}
