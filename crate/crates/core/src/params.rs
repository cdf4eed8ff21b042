//! Sketch parameters and the derived pass/trial/bucket schedule.

use crate::error::{Error, Result};

/// Backend used for the isolation matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Every bucket assignment is drawn from a keyed deterministic generator
    /// and stored explicitly.
    Explicit,
    /// Bucket assignments come from polynomial hash seeds; only the seeds are
    /// stored.
    Seeded,
}

/// All tunable constants of the measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchParams {
    /// Signal dimension d >= 2.
    pub d: usize,
    /// Target sparsity, 1 <= m <= d.
    pub m: usize,
    /// Pass base; spike budgets decay as a^-k. Must exceed 2 so bucket decay
    /// (base 2) outruns spike decay.
    pub a: f64,
    /// Trial-count constant: pass k runs ceil(c_trials * (k+1) * log2 d) trials.
    pub c_trials: f64,
    /// Bucket-count constant: pass k uses ceil(c_buckets * m / 2^k) buckets.
    pub c_buckets: f64,
    /// Vote threshold: a position must appear in strictly more than
    /// retention_fraction * T_k trial lists to survive a pass.
    pub retention_fraction: f64,
    pub mode: Mode,
    pub seed: u64,
    /// Rejection repetitions for seeded hashing.
    pub k_rep: usize,
}

impl SketchParams {
    /// Parameters with the default constants (a = 8, c_trials = 4,
    /// c_buckets = 16, retention 0.9, k_rep = ceil(4 log2 d)).
    pub fn new(d: usize, m: usize) -> Self {
        SketchParams {
            d,
            m,
            a: 8.0,
            c_trials: 4.0,
            c_buckets: 16.0,
            retention_fraction: 0.9,
            mode: Mode::Explicit,
            seed: 0,
            k_rep: default_k_rep(d),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 2 {
            return Err(Error::InvalidParams(format!("d = {} must be >= 2", self.d)));
        }
        if self.m < 1 || self.m > self.d {
            return Err(Error::InvalidParams(format!(
                "m = {} must satisfy 1 <= m <= d = {}",
                self.m, self.d
            )));
        }
        if !(self.a > 2.0) {
            return Err(Error::InvalidParams(format!(
                "pass base a = {} must exceed 2",
                self.a
            )));
        }
        if !(self.c_trials > 0.0) || !(self.c_buckets > 0.0) {
            return Err(Error::InvalidParams(
                "trial and bucket constants must be positive".into(),
            ));
        }
        if !(self.retention_fraction > 0.0 && self.retention_fraction <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "retention_fraction = {} must lie in (0, 1]",
                self.retention_fraction
            )));
        }
        if self.k_rep == 0 {
            return Err(Error::InvalidParams("k_rep must be >= 1".into()));
        }
        Ok(())
    }
}

/// Default rejection-repetition count: ceil(4 log2 d), enough to push the
/// per-position rejection probability below d^-4.
pub fn default_k_rep(d: usize) -> usize {
    ((d as f64).log2() * 4.0).ceil() as usize
}

/// Layout of one pass: spike budget, trial count, buckets per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PassLayout {
    /// m_k = ceil(m / a^k)
    pub spike_budget: usize,
    /// T_k = ceil(c_trials * (k+1) * log2 d)
    pub trials: usize,
    /// N_k = ceil(c_buckets * m / 2^k)
    pub buckets: usize,
}

/// The derived pass/trial/bucket layout shared by sketcher and decoder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    passes: Vec<PassLayout>,
    /// L = ceil(log2 d): binary bit-test rows, excluding the all-ones row.
    bit_rows: usize,
}

impl Schedule {
    /// Number of passes K = 1 + ceil(log_a m).
    pub fn num_passes(&self) -> usize {
        self.passes.len()
    }

    pub fn pass(&self, k: usize) -> PassLayout {
        self.passes[k]
    }

    pub fn passes(&self) -> &[PassLayout] {
        &self.passes
    }

    pub fn bit_rows(&self) -> usize {
        self.bit_rows
    }

    /// Total number of measurements: sum over passes of T_k * N_k.
    pub fn total_measurements(&self) -> usize {
        self.passes.iter().map(|p| p.trials * p.buckets).sum()
    }

    /// Total scalars in a sketch: sum of T_k * N_k * (L + 1).
    pub fn scalar_count(&self) -> usize {
        self.total_measurements() * (self.bit_rows + 1)
    }

    pub fn total_trials(&self) -> usize {
        self.passes.iter().map(|p| p.trials).sum()
    }

    pub(crate) fn from_parts(passes: Vec<PassLayout>, bit_rows: usize) -> Self {
        Schedule { passes, bit_rows }
    }
}

/// Derives the pass/trial/bucket layout from the parameters.
///
/// Pure: two calls with equal parameters produce identical schedules. Rejects
/// a <= 2 because the bucket counts decay with base 2 and must stay ahead of
/// the spike budgets decaying with base a.
pub fn derive_schedule(params: &SketchParams) -> Result<Schedule> {
    params.validate()?;
    let log2_d = (params.d as f64).log2();
    let bit_rows = log2_d.ceil() as usize;

    // K = 1 + ceil(log_a m), computed by repeated multiplication so that
    // exact powers (log_8 64 = 2) never round up.
    let mut ceil_log = 0usize;
    let mut power = 1.0f64;
    while power < params.m as f64 {
        power *= params.a;
        ceil_log += 1;
    }
    let num_passes = 1 + ceil_log;

    let mut passes = Vec::with_capacity(num_passes);
    let mut a_pow = 1.0f64;
    for k in 0..num_passes {
        let spike_budget = (params.m as f64 / a_pow).ceil() as usize;
        let trials = (params.c_trials * (k as f64 + 1.0) * log2_d).ceil() as usize;
        let buckets = (params.c_buckets * params.m as f64 / (1u64 << k) as f64).ceil() as usize;
        debug_assert!(spike_budget >= 1 && trials >= 1 && buckets >= 1);
        passes.push(PassLayout {
            spike_budget,
            trials,
            buckets,
        });
        a_pow *= params.a;
    }
    debug_assert!(passes
        .windows(2)
        .all(|w| w[0].spike_budget >= w[1].spike_budget));
    Ok(Schedule { passes, bit_rows })
}
