//! Test-signal generation: m-sparse spike patterns plus optional noise
//! tails. All draws are deterministic in the seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::signal::SparseSignal;

/// Off-support content added to a generated signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseModel {
    /// Spikes only.
    None,
    /// An l1 budget spread evenly over 10 m random off-support positions.
    L1Budget(f64),
    /// A tail whose i-th largest magnitude is r / i.
    Weak1(f64),
}

fn draw_distinct_positions(
    rng: &mut ChaCha12Rng,
    d: usize,
    count: usize,
    exclude: &[usize],
) -> Vec<usize> {
    debug_assert!(count + exclude.len() <= d);
    if count * 4 >= d {
        // Dense draw: shuffle the complement.
        let excluded: std::collections::HashSet<usize> = exclude.iter().copied().collect();
        let mut pool: Vec<usize> = (0..d).filter(|p| !excluded.contains(p)).collect();
        pool.shuffle(rng);
        pool.truncate(count);
        return pool;
    }
    let mut chosen = std::collections::HashSet::new();
    for &e in exclude {
        chosen.insert(e);
    }
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let candidate = rng.gen_range(0..d);
        if chosen.insert(candidate) {
            out.push(candidate);
        }
    }
    out
}

/// m spikes with magnitudes uniform in [1, 10] and random signs, at distinct
/// uniform positions, plus noise per the model.
pub fn generate_signal(d: usize, m: usize, noise: NoiseModel, seed: u64) -> Result<SparseSignal> {
    if m > d {
        return Err(Error::InvalidParams(format!("m = {m} exceeds d = {d}")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let spike_positions = draw_distinct_positions(&mut rng, d, m, &[]);
    let mut f = SparseSignal::new(d);
    for &position in &spike_positions {
        let magnitude = rng.gen_range(1.0..=10.0);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        f.set(position, sign * magnitude);
    }
    match noise {
        NoiseModel::None => {}
        NoiseModel::L1Budget(budget) => {
            if budget < 0.0 {
                return Err(Error::InvalidParams("l1 noise budget must be >= 0".into()));
            }
            if budget > 0.0 {
                let count = (10 * m).min(d - m).max(1);
                let positions = draw_distinct_positions(&mut rng, d, count, &spike_positions);
                let share = budget / count as f64;
                for position in positions {
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    f.set(position, sign * share);
                }
            }
        }
        NoiseModel::Weak1(r) => {
            if r < 0.0 {
                return Err(Error::InvalidParams(
                    "weak-1 tail scale must be >= 0".into(),
                ));
            }
            if r > 0.0 {
                let count = d - m;
                let positions = draw_distinct_positions(&mut rng, d, count, &spike_positions);
                for (i, position) in positions.into_iter().enumerate() {
                    let magnitude = r / (i + 1) as f64;
                    let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                    f.set(position, sign * magnitude);
                }
            }
        }
    }
    Ok(f)
}

/// m spikes with integer values of magnitude 1..=10; bucket sums of such
/// signals are exactly representable, so recovery can be checked for
/// bit-exact equality.
pub fn generate_integer_signal(d: usize, m: usize, seed: u64) -> Result<SparseSignal> {
    if m > d {
        return Err(Error::InvalidParams(format!("m = {m} exceeds d = {d}")));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let positions = draw_distinct_positions(&mut rng, d, m, &[]);
    let mut f = SparseSignal::new(d);
    for &position in &positions {
        let magnitude = rng.gen_range(1..=10) as f64;
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        f.set(position, sign * magnitude);
    }
    Ok(f)
}
