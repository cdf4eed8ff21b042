//! The isolation matrix: for every (pass, trial) a map from the d signal
//! positions onto that pass's buckets. Two backends sit behind one lookup
//! interface: an explicit table filled from a keyed deterministic generator,
//! and a seeded backend that stores only polynomial hash seeds and
//! regenerates bucket assignments on demand.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::params::{derive_schedule, Mode, Schedule, SketchParams};
use crate::prf::{find_prime, hash_batch, FieldParams, HashSeed};
use crate::wire::{Reader, Writer};

const MATRIX_MAGIC: &[u8; 8] = b"CPISOMAT";
const MATRIX_VERSION: u32 = 1;

/// splitmix64 finalizer; a counter-based generator keyed by hashing the
/// (seed, pass, trial, position) tuple through it.
#[inline]
fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

#[inline]
fn keyed_bucket(seed: u64, pass: usize, trial: usize, position: usize, buckets: u64) -> u32 {
    let mut x = seed ^ 0x9e3779b97f4a7c15;
    x = mix64(x.wrapping_add(pass as u64).wrapping_mul(0xa24baed4963ee407));
    x = mix64(x ^ (trial as u64).wrapping_mul(0x9fb21c651e98df25));
    x = mix64(x ^ position as u64);
    // Multiply-shift reduction; bias is at most buckets / 2^64.
    ((x as u128 * buckets as u128) >> 64) as u32
}

#[derive(Debug, Clone)]
enum Backend {
    /// One bucket index per (pass, trial, position).
    Explicit { tables: Vec<Vec<u32>> },
    /// One hash seed per (pass, trial); assignments are hashed on demand.
    Seeded { seeds: Vec<HashSeed> },
}

/// Bucket assignments for every (pass, trial), immutable after build.
#[derive(Debug, Clone)]
pub struct IsolationMatrix {
    params: SketchParams,
    schedule: Schedule,
    backend: Backend,
    /// Flat index of (pass, trial): trial_offsets[k] + t.
    trial_offsets: Vec<usize>,
}

/// Independence degree used by the seeded backend in pass k: the invariant
/// carried across passes keeps up to 3 m_j + m_k positions active, so the
/// degree is padded to 4 m_k with a floor of 8 for the late passes. Degrees
/// above p buy nothing (p points already determine the polynomial), so the
/// field size caps it.
pub fn seeded_degree(spike_budget: usize, p: u64) -> usize {
    ((4 * spike_budget).max(8) as u64).min(p) as usize
}

fn trial_offsets(schedule: &Schedule) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(schedule.num_passes());
    let mut acc = 0usize;
    for pass in schedule.passes() {
        offsets.push(acc);
        acc += pass.trials;
    }
    offsets
}

impl IsolationMatrix {
    /// Draws a fresh matrix for `params`. Both backends are deterministic in
    /// (params, seed): building twice yields identical assignments.
    pub fn build(params: &SketchParams) -> Result<Self> {
        let schedule = derive_schedule(params)?;
        let backend = match params.mode {
            Mode::Explicit => {
                let mut tables = Vec::with_capacity(schedule.total_trials());
                for (k, pass) in schedule.passes().iter().enumerate() {
                    for t in 0..pass.trials {
                        let mut table = Vec::with_capacity(params.d);
                        for position in 0..params.d {
                            table.push(keyed_bucket(
                                params.seed,
                                k,
                                t,
                                position,
                                pass.buckets as u64,
                            ));
                        }
                        tables.push(table);
                    }
                }
                Backend::Explicit { tables }
            }
            Mode::Seeded => {
                let mut seeds = Vec::with_capacity(schedule.total_trials());
                for (k, pass) in schedule.passes().iter().enumerate() {
                    if pass.buckets > params.d {
                        return Err(Error::InvalidParams(format!(
                            "seeded mode needs buckets <= d, got {} > {} in pass {}",
                            pass.buckets, params.d, k
                        )));
                    }
                    let field = find_prime(params.d as u64, pass.buckets as u64);
                    let degree = seeded_degree(pass.spike_budget, field.p);
                    for t in 0..pass.trials {
                        seeds.push(draw_seed(params.seed, k, t, field, degree, params.k_rep));
                    }
                }
                Backend::Seeded { seeds }
            }
        };
        let trial_offsets = trial_offsets(&schedule);
        Ok(IsolationMatrix {
            params: params.clone(),
            schedule,
            backend,
            trial_offsets,
        })
    }

    /// Assembles a seeded matrix from externally supplied hash seeds, one
    /// per (pass, trial) in pass-major order.
    ///
    /// The file format carries no per-record degree, so only matrices whose
    /// seed degrees follow `seeded_degree` survive a serialization round
    /// trip; `build` always produces such seeds.
    pub fn from_seeds(params: &SketchParams, seeds: Vec<HashSeed>) -> Result<Self> {
        let schedule = derive_schedule(params)?;
        if seeds.len() != schedule.total_trials() {
            return Err(Error::InvalidParams(format!(
                "expected {} hash seeds, got {}",
                schedule.total_trials(),
                seeds.len()
            )));
        }
        let trial_offsets = trial_offsets(&schedule);
        Ok(IsolationMatrix {
            params: params.clone(),
            schedule,
            backend: Backend::Seeded { seeds },
            trial_offsets,
        })
    }

    /// Assembles an explicit matrix from raw bucket tables, one table of d
    /// entries per (pass, trial) in pass-major order.
    pub fn from_tables(params: &SketchParams, tables: Vec<Vec<u32>>) -> Result<Self> {
        let schedule = derive_schedule(params)?;
        if tables.len() != schedule.total_trials() {
            return Err(Error::InvalidParams(format!(
                "expected {} bucket tables, got {}",
                schedule.total_trials(),
                tables.len()
            )));
        }
        for (flat, table) in tables.iter().enumerate() {
            let (k, _) = flat_to_pass(&schedule, flat);
            let buckets = schedule.pass(k).buckets as u32;
            if table.len() != params.d || table.iter().any(|&b| b >= buckets) {
                return Err(Error::InvalidParams(format!(
                    "bucket table {} malformed",
                    flat
                )));
            }
        }
        let trial_offsets = trial_offsets(&schedule);
        Ok(IsolationMatrix {
            params: params.clone(),
            schedule,
            backend: Backend::Explicit { tables },
            trial_offsets,
        })
    }

    pub fn params(&self) -> &SketchParams {
        &self.params
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn dimension(&self) -> usize {
        self.params.d
    }

    fn flat_index(&self, pass: usize, trial: usize) -> Result<usize> {
        if pass >= self.schedule.num_passes() || trial >= self.schedule.pass(pass).trials {
            return Err(Error::IndexOutOfRange { pass, trial });
        }
        Ok(self.trial_offsets[pass] + trial)
    }

    /// Bucket of one position in one (pass, trial) partition.
    pub fn bucket_of(&self, pass: usize, trial: usize, position: usize) -> Result<u32> {
        if position >= self.params.d {
            return Err(Error::PositionOutOfRange {
                position,
                dimension: self.params.d,
            });
        }
        let flat = self.flat_index(pass, trial)?;
        match &self.backend {
            Backend::Explicit { tables } => Ok(tables[flat][position]),
            Backend::Seeded { seeds } => {
                let values = hash_batch(&seeds[flat], &[position as u64])
                    .map_err(|_| Error::HashFail { pass, trial })?;
                Ok(values[0] as u32)
            }
        }
    }

    /// Buckets for a batch of distinct positions, elementwise equal to
    /// `bucket_of`. The seeded backend hashes the whole batch through one
    /// multipoint evaluation.
    pub fn buckets_batch(
        &self,
        pass: usize,
        trial: usize,
        positions: &[usize],
    ) -> Result<Vec<u32>> {
        let flat = self.flat_index(pass, trial)?;
        for &position in positions {
            if position >= self.params.d {
                return Err(Error::PositionOutOfRange {
                    position,
                    dimension: self.params.d,
                });
            }
        }
        match &self.backend {
            Backend::Explicit { tables } => {
                Ok(positions.iter().map(|&p| tables[flat][p]).collect())
            }
            Backend::Seeded { seeds } => {
                if positions.is_empty() {
                    return Ok(Vec::new());
                }
                let points: Vec<u64> = positions.iter().map(|&p| p as u64).collect();
                let values = hash_batch(&seeds[flat], &points)
                    .map_err(|_| Error::HashFail { pass, trial })?;
                Ok(values.into_iter().map(|v| v as u32).collect())
            }
        }
    }

    /// Header bytes: everything needed to rebuild the schedule, and the
    /// identity any dependent sketch file is checked against.
    pub fn header_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.magic(MATRIX_MAGIC);
        w.u32(MATRIX_VERSION);
        w.usize(self.params.d);
        w.usize(self.params.m);
        w.f64(self.params.a);
        w.f64(self.params.c_trials);
        w.f64(self.params.c_buckets);
        w.f64(self.params.retention_fraction);
        w.u8(match self.params.mode {
            Mode::Explicit => 0,
            Mode::Seeded => 1,
        });
        w.u64(self.params.seed);
        w.usize(self.params.k_rep);
        w.usize(self.schedule.num_passes());
        w.usize(self.schedule.bit_rows());
        for pass in self.schedule.passes() {
            w.usize(pass.spike_budget);
            w.usize(pass.trials);
            w.usize(pass.buckets);
        }
        w.into_bytes()
    }

    /// Serializes the matrix. The explicit table is not written; it is
    /// regenerated from the seed on load. Seeded mode appends one record per
    /// (pass, trial): p, r, k_rep, then the k_rep * degree coefficients.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.raw(&self.header_bytes());
        if let Backend::Seeded { seeds } = &self.backend {
            for seed in seeds {
                w.u64(seed.field.p);
                w.u64(seed.field.r);
                w.usize(seed.k_rep());
                for row in &seed.polys {
                    for &c in row {
                        w.u64(c);
                    }
                }
            }
        }
        w.into_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes, "isolation matrix file");
        r.magic(MATRIX_MAGIC)?;
        if r.u32()? != MATRIX_VERSION {
            return Err(Error::format("isolation matrix file", "unknown version"));
        }
        let d = r.usize()?;
        let m = r.usize()?;
        let a = r.f64()?;
        let c_trials = r.f64()?;
        let c_buckets = r.f64()?;
        let retention_fraction = r.f64()?;
        let mode = match r.u8()? {
            0 => Mode::Explicit,
            1 => Mode::Seeded,
            _ => return Err(Error::format("isolation matrix file", "unknown mode")),
        };
        let seed = r.u64()?;
        let k_rep = r.usize()?;
        let params = SketchParams {
            d,
            m,
            a,
            c_trials,
            c_buckets,
            retention_fraction,
            mode,
            seed,
            k_rep,
        };
        let schedule = derive_schedule(&params)?;
        let num_passes = r.usize()?;
        let bit_rows = r.usize()?;
        if num_passes != schedule.num_passes() || bit_rows != schedule.bit_rows() {
            return Err(Error::format(
                "isolation matrix file",
                "schedule does not match parameters",
            ));
        }
        for pass in schedule.passes() {
            if r.usize()? != pass.spike_budget
                || r.usize()? != pass.trials
                || r.usize()? != pass.buckets
            {
                return Err(Error::format(
                    "isolation matrix file",
                    "schedule does not match parameters",
                ));
            }
        }
        match mode {
            Mode::Explicit => {
                r.finish()?;
                IsolationMatrix::build(&params)
            }
            Mode::Seeded => {
                let mut seeds = Vec::with_capacity(schedule.total_trials());
                for pass in schedule.passes() {
                    for _ in 0..pass.trials {
                        let p = r.u64()?;
                        let range = r.u64()?;
                        let rounds = r.usize()?;
                        if range == 0 || p < 2 * range || rounds == 0 || rounds > 1 << 20 {
                            return Err(Error::format(
                                "isolation matrix file",
                                "malformed hash seed record",
                            ));
                        }
                        let degree = seeded_degree(pass.spike_budget, p);
                        let field = FieldParams {
                            p,
                            r: range,
                            cutoff: range * (p / range),
                        };
                        let mut polys = Vec::with_capacity(rounds);
                        for _ in 0..rounds {
                            let mut row = Vec::with_capacity(degree);
                            for _ in 0..degree {
                                row.push(r.u64()?);
                            }
                            polys.push(row);
                        }
                        seeds.push(
                            HashSeed::new(field, degree, polys).map_err(|e| {
                                Error::format("isolation matrix file", e.to_string())
                            })?,
                        );
                    }
                }
                r.finish()?;
                IsolationMatrix::from_seeds(&params, seeds)
            }
        }
    }
}

fn flat_to_pass(schedule: &Schedule, mut flat: usize) -> (usize, usize) {
    for (k, pass) in schedule.passes().iter().enumerate() {
        if flat < pass.trials {
            return (k, flat);
        }
        flat -= pass.trials;
    }
    panic!("flat trial index out of range");
}

/// Coefficient draws for one (pass, trial) hash seed, keyed by the matrix
/// seed and the trial coordinates.
fn draw_seed(
    matrix_seed: u64,
    pass: usize,
    trial: usize,
    field: FieldParams,
    degree: usize,
    k_rep: usize,
) -> HashSeed {
    let stream = mix64(matrix_seed ^ mix64((pass as u64) << 32 | trial as u64));
    let mut rng = ChaCha12Rng::seed_from_u64(stream);
    let polys: Vec<Vec<u64>> = (0..k_rep)
        .map(|_| (0..degree).map(|_| rng.gen_range(0..field.p)).collect())
        .collect();
    HashSeed::new(field, degree, polys).expect("drawn coefficients are in range")
}
