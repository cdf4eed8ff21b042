//! Independent oracles shared by the integration suites. Everything here is
//! deliberately naive (quadratic convolution, long division, per-point
//! Horner, exhaustive subset search) so it cannot share a failure mode with
//! the implementation it checks.

#![allow(dead_code)]

pub fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

/// Quadratic convolution with per-term modular reduction.
pub fn schoolbook_mul(u: &[u64], v: &[u64], p: u64) -> Vec<u64> {
    if u.is_empty() || v.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; u.len() + v.len() - 1];
    for (i, &a) in u.iter().enumerate() {
        for (j, &b) in v.iter().enumerate() {
            out[i + j] = (out[i + j] + mul_mod(a, b, p)) % p;
        }
    }
    trim(out)
}

/// Remainder of h by a monic q via plain long division.
pub fn long_division_rem(h: &[u64], q: &[u64], p: u64) -> Vec<u64> {
    assert_eq!(*q.last().unwrap(), 1, "divisor must be monic");
    let n = q.len() - 1;
    let mut rem: Vec<u64> = h.to_vec();
    while rem.len() > n {
        let lead = *rem.last().unwrap();
        let deg = rem.len() - 1;
        if lead != 0 {
            for (i, &qc) in q.iter().enumerate() {
                let idx = deg - n + i;
                let sub = mul_mod(lead, qc, p);
                rem[idx] = (rem[idx] + p - sub) % p;
            }
        }
        rem.pop();
    }
    trim(rem)
}

/// Single-point evaluation by Horner's rule.
pub fn horner(coeffs: &[u64], x: u64, p: u64) -> u64 {
    let mut acc = 0u64;
    for &c in coeffs.iter().rev() {
        acc = (mul_mod(acc, x, p) + c) % p;
    }
    acc
}

pub fn trim(mut v: Vec<u64>) -> Vec<u64> {
    while v.last() == Some(&0) {
        v.pop();
    }
    v
}

/// Small deterministic generator for oracle-side randomness.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.next() % bound
    }
}
