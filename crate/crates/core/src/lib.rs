//! Streaming linear sketches of long sparse signals with sublinear-time
//! recovery.
//!
//! A signal of dimension d is measured by a fixed linear operator into a
//! small sketch: for a hierarchy of passes, each of many trials randomly
//! partitions the d positions into buckets, and every bucket is read through
//! bit tests (one mask per bit of the position index plus a plain total).
//! The decoder walks the passes, identifies dominant spikes bucket by
//! bucket, votes across trials, subtracts what it found from the sketch, and
//! finally prunes to the m largest terms. Sketching supports constant-size
//! streaming updates, and the whole pipeline never materializes a d-length
//! vector during decoding.
//!
//! The isolation partitions come in two interchangeable flavors: explicit
//! tables drawn from a keyed deterministic generator, and a small-space
//! variant whose partitions are degree-bounded polynomial hash functions
//! over a prime field, evaluated in batches by product/remainder-tree
//! multipoint evaluation.

pub mod bittest;
pub mod decoder;
mod error;
pub mod gen;
pub mod isolation;
pub mod metrics;
pub mod params;
pub mod prf;
pub mod signal;
pub mod sketcher;
mod wire;

pub use bittest::Measurement;
pub use decoder::{chaining_pursuit_proper, combine_trials, prune, recover, run_trial, SpikeList};
pub use error::{Error, Result};
pub use isolation::IsolationMatrix;
pub use metrics::{
    distortion_sample, l1_norm, recovery_report, weak1_norm, DistortionSample, RecoveryReport,
    Timings,
};
pub use params::{derive_schedule, Mode, PassLayout, Schedule, SketchParams};
pub use signal::{best_m_approx, SparseSignal};
pub use sketcher::{encode_spikes, sketch_signal, update, Sketch};
