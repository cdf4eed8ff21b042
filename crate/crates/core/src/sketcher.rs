//! The measurement operator: bit tests applied within every (pass, trial)
//! bucket partition. Sketching, streaming updates, spike encoding, and
//! entrywise sketch arithmetic all live here.

use sha2::{Digest, Sha256};

use crate::bittest::Measurement;
use crate::decoder::SpikeList;
use crate::error::{Error, Result};
use crate::isolation::IsolationMatrix;
use crate::params::Schedule;
use crate::signal::SparseSignal;
use crate::wire::{Reader, Writer};

const SKETCH_MAGIC: &[u8; 8] = b"CPSKETCH";
const SKETCH_VERSION: u32 = 1;

/// The linear image of a signal: one measurement per (pass, trial, bucket).
///
/// Canonical layout is pass-major, then trial, then bucket; within a bucket
/// the total comes first, then the bit rows most significant first. All
/// operations are exact on integer-valued inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Sketch {
    schedule: Schedule,
    /// measurements[flat(k, t)][bucket]
    measurements: Vec<Vec<Measurement>>,
}

impl Sketch {
    /// The all-zero sketch for a schedule.
    pub fn zero(schedule: &Schedule) -> Self {
        let bit_rows = schedule.bit_rows();
        let mut measurements = Vec::with_capacity(schedule.total_trials());
        for pass in schedule.passes() {
            for _ in 0..pass.trials {
                measurements.push(vec![Measurement::empty(bit_rows); pass.buckets]);
            }
        }
        Sketch {
            schedule: schedule.clone(),
            measurements,
        }
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    fn flat(&self, pass: usize, trial: usize) -> usize {
        let mut index = trial;
        for k in 0..pass {
            index += self.schedule.pass(k).trials;
        }
        index
    }

    pub fn trial_measurements(&self, pass: usize, trial: usize) -> &[Measurement] {
        &self.measurements[self.flat(pass, trial)]
    }

    /// Entrywise sum, in place.
    pub fn add_assign(&mut self, other: &Sketch) -> Result<()> {
        if self.schedule != other.schedule {
            return Err(Error::ScheduleMismatch);
        }
        for (mine, theirs) in self.measurements.iter_mut().zip(&other.measurements) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                a.add_assign(b);
            }
        }
        Ok(())
    }

    /// Entrywise difference, in place.
    pub fn sub_assign(&mut self, other: &Sketch) -> Result<()> {
        if self.schedule != other.schedule {
            return Err(Error::ScheduleMismatch);
        }
        for (mine, theirs) in self.measurements.iter_mut().zip(&other.measurements) {
            for (a, b) in mine.iter_mut().zip(theirs) {
                a.sub_assign(b);
            }
        }
        Ok(())
    }

    /// Entrywise difference as a new sketch.
    pub fn subtract(&self, other: &Sketch) -> Result<Sketch> {
        let mut out = self.clone();
        out.sub_assign(other)?;
        Ok(out)
    }

    pub fn is_zero(&self) -> bool {
        self.measurements.iter().flatten().all(|m| m.is_zero())
    }

    /// Sum of |entry| over every scalar of the sketch.
    pub fn l1_norm(&self) -> f64 {
        self.measurements
            .iter()
            .flatten()
            .flat_map(|m| m.scalars())
            .fold(0.0, |acc, v| acc + v.abs())
    }

    /// Number of scalars in canonical layout.
    pub fn scalar_count(&self) -> usize {
        self.schedule.scalar_count()
    }

    /// Scalars in canonical layout order.
    pub fn scalars(&self) -> impl Iterator<Item = f64> + '_ {
        self.measurements.iter().flatten().flat_map(|m| m.scalars())
    }

    /// Adds `delta` to the scalar at canonical-layout index `index`.
    pub fn perturb_scalar(&mut self, index: usize, delta: f64) {
        let width = self.schedule.bit_rows() + 1;
        let measurement_index = index / width;
        let offset = index % width;
        let mut seen = 0usize;
        for block in self.measurements.iter_mut() {
            if measurement_index < seen + block.len() {
                block[measurement_index - seen].perturb(offset, delta);
                return;
            }
            seen += block.len();
        }
        panic!("scalar index out of range");
    }

    /// Identity of the matrix this sketch was taken with.
    pub fn matrix_hash(matrix: &IsolationMatrix) -> [u8; 32] {
        let digest = Sha256::digest(matrix.header_bytes());
        digest.into()
    }

    /// Serializes header hash, schedule echo, and the scalar payload as
    /// little-endian doubles in canonical layout.
    pub fn to_bytes(&self, matrix_hash: &[u8; 32]) -> Vec<u8> {
        let mut w = Writer::new();
        w.magic(SKETCH_MAGIC);
        w.u32(SKETCH_VERSION);
        w.raw(matrix_hash);
        w.usize(self.schedule.num_passes());
        w.usize(self.schedule.bit_rows());
        for pass in self.schedule.passes() {
            w.usize(pass.spike_budget);
            w.usize(pass.trials);
            w.usize(pass.buckets);
        }
        for value in self.scalars() {
            w.f64(value);
        }
        w.into_bytes()
    }

    /// Parses a sketch file; `expected_hash`, when given, must match the
    /// stored matrix identity.
    pub fn from_bytes(bytes: &[u8], expected_hash: Option<&[u8; 32]>) -> Result<Sketch> {
        let mut r = Reader::new(bytes, "sketch file");
        r.magic(SKETCH_MAGIC)?;
        if r.u32()? != SKETCH_VERSION {
            return Err(Error::format("sketch file", "unknown version"));
        }
        let stored_hash: [u8; 32] = r.array()?;
        if let Some(expected) = expected_hash {
            if &stored_hash != expected {
                return Err(Error::format(
                    "sketch file",
                    "sketch was not taken with this isolation matrix",
                ));
            }
        }
        let num_passes = r.usize()?;
        let bit_rows = r.usize()?;
        if num_passes == 0 || num_passes > 64 || bit_rows == 0 || bit_rows > 64 {
            return Err(Error::format("sketch file", "implausible schedule"));
        }
        let mut passes = Vec::with_capacity(num_passes);
        for _ in 0..num_passes {
            let spike_budget = r.usize()?;
            let trials = r.usize()?;
            let buckets = r.usize()?;
            if trials == 0 || buckets == 0 || trials * buckets > 1 << 30 {
                return Err(Error::format("sketch file", "implausible schedule"));
            }
            passes.push(crate::params::PassLayout {
                spike_budget,
                trials,
                buckets,
            });
        }
        let schedule = Schedule::from_parts(passes, bit_rows);
        let mut sketch = Sketch::zero(&schedule);
        for block in sketch.measurements.iter_mut() {
            for m in block.iter_mut() {
                let total = r.f64()?;
                let mut bits = Vec::with_capacity(bit_rows);
                for _ in 0..bit_rows {
                    bits.push(r.f64()?);
                }
                *m = Measurement::from_scalars(total, bits);
            }
        }
        r.finish()?;
        Ok(sketch)
    }

    pub fn stored_matrix_hash(bytes: &[u8]) -> Result<[u8; 32]> {
        let mut r = Reader::new(bytes, "sketch file");
        r.magic(SKETCH_MAGIC)?;
        let _version = r.u32()?;
        r.array()
    }
}

/// Sketches a whole signal: every support entry is accumulated into its
/// bucket's measurement in every (pass, trial).
pub fn sketch_signal(f: &SparseSignal, matrix: &IsolationMatrix) -> Result<Sketch> {
    if f.dimension() != matrix.dimension() {
        return Err(Error::DimensionMismatch {
            expected: matrix.dimension(),
            got: f.dimension(),
        });
    }
    let schedule = matrix.schedule().clone();
    let mut sketch = Sketch::zero(&schedule);
    if f.is_zero() {
        return Ok(sketch);
    }
    let positions: Vec<usize> = f.positions().collect();
    let values: Vec<f64> = f.iter().map(|(_, v)| v).collect();
    accumulate_batch(&mut sketch, matrix, &positions, &values)?;
    Ok(sketch)
}

/// Applies `sketch += Phi(sum_i values[i] e_{positions[i]})` using one
/// bucket-batch lookup per (pass, trial).
fn accumulate_batch(
    sketch: &mut Sketch,
    matrix: &IsolationMatrix,
    positions: &[usize],
    values: &[f64],
) -> Result<()> {
    let schedule = matrix.schedule();
    for (k, pass) in schedule.passes().iter().enumerate() {
        for t in 0..pass.trials {
            let buckets = matrix.buckets_batch(k, t, positions)?;
            let flat = sketch.flat(k, t);
            let block = &mut sketch.measurements[flat];
            for ((&position, &value), &bucket) in positions.iter().zip(values).zip(&buckets) {
                block[bucket as usize].accumulate(position, value);
            }
        }
    }
    Ok(())
}

/// Streaming update: after the call the sketch equals the sketch of
/// f + delta * e_position. Exclusive access for the duration is the caller's
/// contract.
pub fn update(
    sketch: &mut Sketch,
    matrix: &IsolationMatrix,
    position: usize,
    delta: f64,
) -> Result<()> {
    if position >= matrix.dimension() {
        return Err(Error::PositionOutOfRange {
            position,
            dimension: matrix.dimension(),
        });
    }
    if sketch.schedule != *matrix.schedule() {
        return Err(Error::ScheduleMismatch);
    }
    accumulate_batch(sketch, matrix, &[position], &[delta])
}

/// Encodes a recovered spike list through the measurement operator. Equals
/// `sketch_signal` of the spike list viewed as a sparse signal; the seeded
/// backend fetches all needed matrix columns per (pass, trial) in one batch.
pub fn encode_spikes(spikes: &SpikeList, matrix: &IsolationMatrix) -> Result<Sketch> {
    let mut positions = Vec::with_capacity(spikes.len());
    let mut values = Vec::with_capacity(spikes.len());
    for &(position, value) in spikes.entries() {
        if position >= matrix.dimension() {
            return Err(Error::PositionOutOfRange {
                position,
                dimension: matrix.dimension(),
            });
        }
        positions.push(position);
        values.push(value);
    }
    let mut sorted = positions.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        let dup = sorted.windows(2).find(|w| w[0] == w[1]).unwrap()[0];
        return Err(Error::DuplicatePosition(dup));
    }
    let mut sketch = Sketch::zero(matrix.schedule());
    accumulate_batch(&mut sketch, matrix, &positions, &values)?;
    Ok(sketch)
}
