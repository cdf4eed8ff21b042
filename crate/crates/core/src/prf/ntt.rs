//! Exact convolution of residue sequences via number-theoretic transforms
//! over three fixed word-size primes, recombined with Garner's algorithm.
//!
//! For inputs with entries below 2^61 and length below 2^20, the true
//! integer convolution coefficients stay below the product of the three
//! moduli, so the reduction modulo an arbitrary working prime is exact.

use super::prime::{mul_mod, pow_mod};

/// NTT-friendly primes q = c * 2^40 + 1 (62 bits each) with their smallest
/// primitive roots.
const MODULI: [u64; 3] = [
    2_305_919_975_027_638_273,
    2_305_926_572_097_404_929,
    2_305_940_865_748_566_017,
];
const ROOTS: [u64; 3] = [5, 19, 5];
const MAX_LOG2: u32 = 40;

fn ntt_in_place(values: &mut [u64], modulus: u64, root: u64, invert: bool) {
    let n = values.len();
    debug_assert!(n.is_power_of_two());
    let log_n = n.trailing_zeros();
    debug_assert!(log_n <= MAX_LOG2);

    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            values.swap(i, j);
        }
    }

    let mut omega = pow_mod(root, (modulus - 1) >> log_n, modulus);
    if invert {
        omega = pow_mod(omega, modulus - 2, modulus);
    }
    let mut len = 2usize;
    while len <= n {
        let step = pow_mod(omega, (n / len) as u64, modulus);
        for start in (0..n).step_by(len) {
            let mut w = 1u64;
            for i in start..start + len / 2 {
                let even = values[i];
                let odd = mul_mod(values[i + len / 2], w, modulus);
                values[i] = add_mod(even, odd, modulus);
                values[i + len / 2] = sub_mod(even, odd, modulus);
                w = mul_mod(w, step, modulus);
            }
        }
        len <<= 1;
    }

    if invert {
        let n_inv = pow_mod(n as u64, modulus - 2, modulus);
        for v in values.iter_mut() {
            *v = mul_mod(*v, n_inv, modulus);
        }
    }
}

#[inline]
fn add_mod(a: u64, b: u64, n: u64) -> u64 {
    let s = a + b;
    if s >= n {
        s - n
    } else {
        s
    }
}

#[inline]
fn sub_mod(a: u64, b: u64, n: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + n - b
    }
}

fn convolve_mod(u: &[u64], v: &[u64], modulus: u64, root: u64) -> Vec<u64> {
    let result_len = u.len() + v.len() - 1;
    let n = result_len.next_power_of_two();
    let mut a = vec![0u64; n];
    let mut b = vec![0u64; n];
    for (slot, &x) in a.iter_mut().zip(u) {
        *slot = x % modulus;
    }
    for (slot, &x) in b.iter_mut().zip(v) {
        *slot = x % modulus;
    }
    ntt_in_place(&mut a, modulus, root, false);
    ntt_in_place(&mut b, modulus, root, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x = mul_mod(*x, *y, modulus);
    }
    ntt_in_place(&mut a, modulus, root, true);
    a.truncate(result_len);
    a
}

/// Convolution of `u` and `v` reduced modulo `p`, exact for entries < 2^61
/// and result length < 2^20.
pub fn convolve(u: &[u64], v: &[u64], p: u64) -> Vec<u64> {
    debug_assert!(!u.is_empty() && !v.is_empty());
    debug_assert!(u.len() + v.len() - 1 <= 1 << 20);
    let r0 = convolve_mod(u, v, MODULI[0], ROOTS[0]);
    let r1 = convolve_mod(u, v, MODULI[1], ROOTS[1]);
    let r2 = convolve_mod(u, v, MODULI[2], ROOTS[2]);

    // Garner reconstruction of each coefficient modulo p.
    let (q0, q1, q2) = (MODULI[0], MODULI[1], MODULI[2]);
    let inv_q0_mod_q1 = pow_mod(q0 % q1, q1 - 2, q1);
    let q0q1_mod_q2 = mul_mod(q0 % q2, q1 % q2, q2);
    let inv_q0q1_mod_q2 = pow_mod(q0q1_mod_q2, q2 - 2, q2);
    let q0_mod_p = q0 % p;
    let q0q1_mod_p = mul_mod(q0_mod_p, q1 % p, p);

    r0.iter()
        .zip(&r1)
        .zip(&r2)
        .map(|((&x0, &x1), &x2)| {
            // x = x0 + q0 t1 + q0 q1 t2 with t1 < q1, t2 < q2.
            let t1 = mul_mod(sub_mod(x1 % q1, x0 % q1, q1), inv_q0_mod_q1, q1);
            let x_mod_q2 = add_mod(x0 % q2, mul_mod(q0 % q2, t1 % q2, q2), q2);
            let t2 = mul_mod(sub_mod(x2, x_mod_q2, q2), inv_q0q1_mod_q2, q2);
            let mut out = x0 % p;
            out = add_mod(out, mul_mod(q0_mod_p, t1 % p, p), p);
            out = add_mod(out, mul_mod(q0q1_mod_p, t2 % p, p), p);
            out
        })
        .collect()
}
