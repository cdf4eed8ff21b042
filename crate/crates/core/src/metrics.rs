//! Error and distortion measurement: l1 and weak-1 norms, recovery reports,
//! and empirical embedding distortion over sampled signal pairs.

use crate::error::{Error, Result};
use crate::isolation::IsolationMatrix;
use crate::signal::{best_m_approx, SparseSignal};
use crate::sketcher::sketch_signal;

/// Sum of |value| over the support, accumulated in ascending position order
/// so repeated runs sum in the same order.
pub fn l1_norm(f: &SparseSignal) -> f64 {
    f.iter().fold(0.0, |acc, (_, v)| acc + v.abs())
}

/// weak-1 norm: with magnitudes sorted in decreasing order, the largest
/// value of i * |f|_(i) over 1-indexed ranks i.
pub fn weak1_norm(f: &SparseSignal) -> f64 {
    let mut magnitudes: Vec<f64> = f.iter().map(|(_, v)| v.abs()).collect();
    magnitudes.sort_by(|a, b| b.partial_cmp(a).expect("finite values"));
    magnitudes
        .iter()
        .enumerate()
        .map(|(i, &mag)| (i + 1) as f64 * mag)
        .fold(0.0, f64::max)
}

/// Wall-clock timings and size bookkeeping for one sketch/decode run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Timings {
    pub encode_ms: f64,
    pub decode_ms: f64,
    pub sketch_bytes: usize,
}

/// Per-run quality summary comparing a recovery against the truth.
#[derive(Debug, Clone)]
pub struct RecoveryReport {
    /// ||f - f_hat||_1
    pub l1_error: f64,
    /// ||f - f_m||_1
    pub opt_error: f64,
    /// l1_error / opt_error; infinity when only the numerator is nonzero,
    /// and 1 when both vanish.
    pub ratio: f64,
    /// ||f - f_hat||_weak-1
    pub weak1_error: f64,
    /// Support size of the recovery.
    pub support_out: usize,
    pub timings: Timings,
}

/// Assembles the report fields for a recovery `f_hat` of `f` at sparsity m.
pub fn recovery_report(
    f: &SparseSignal,
    f_hat: &SparseSignal,
    m: usize,
    timings: Timings,
) -> Result<RecoveryReport> {
    let difference = f.sub(f_hat)?;
    let l1_error = l1_norm(&difference);
    let weak1_error = weak1_norm(&difference);
    let fm = best_m_approx(f, m);
    let opt_error = l1_norm(&f.sub(&fm)?);
    let ratio = if opt_error > 0.0 {
        l1_error / opt_error
    } else if l1_error > 0.0 {
        f64::INFINITY
    } else {
        1.0
    };
    Ok(RecoveryReport {
        l1_error,
        opt_error,
        ratio,
        weak1_error,
        support_out: f_hat.support_size(),
        timings,
    })
}

/// Empirical distortion of the operator over sampled pairs.
#[derive(Debug, Clone, Copy)]
pub struct DistortionSample {
    /// Smallest observed ||Phi(f - g)||_1 / ||f - g||_1.
    pub a_emp: f64,
    /// Largest observed ratio.
    pub b_emp: f64,
    /// Analytic ceiling (1 + L) * sum of trials: the image of a basis vector
    /// attains it at a position with all bits set.
    pub basis_image_bound: f64,
}

/// Measures the stretch of `Phi` on each pair of distinct sparse signals.
pub fn distortion_sample(
    matrix: &IsolationMatrix,
    pairs: &[(SparseSignal, SparseSignal)],
) -> Result<DistortionSample> {
    let mut a_emp = f64::INFINITY;
    let mut b_emp: f64 = 0.0;
    for (f, g) in pairs {
        let difference = f.sub(g)?;
        let denominator = l1_norm(&difference);
        if denominator == 0.0 {
            return Err(Error::InvalidParams("distortion pair with f = g".into()));
        }
        let image = sketch_signal(&difference, matrix)?;
        let ratio = image.l1_norm() / denominator;
        a_emp = a_emp.min(ratio);
        b_emp = b_emp.max(ratio);
    }
    let schedule = matrix.schedule();
    let basis_image_bound = (1 + schedule.bit_rows()) as f64 * schedule.total_trials() as f64;
    Ok(DistortionSample {
        a_emp,
        b_emp,
        basis_image_bound,
    })
}

/// Column names of the per-run CSV emitted by experiment sweeps.
pub const CSV_HEADER: &str = "d,m,a,seed,noise_l1,meas_noise_l1,l1_error,opt_error,ratio,\
weak1_error,support_out,sketch_bytes,encode_ms,decode_ms";

/// One CSV row in the schema above.
#[allow(clippy::too_many_arguments)]
pub fn csv_row(
    d: usize,
    m: usize,
    a: f64,
    seed: u64,
    noise_l1: f64,
    meas_noise_l1: f64,
    report: &RecoveryReport,
) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        d,
        m,
        a,
        seed,
        noise_l1,
        meas_noise_l1,
        report.l1_error,
        report.opt_error,
        report.ratio,
        report.weak1_error,
        report.support_out,
        report.timings.sketch_bytes,
        report.timings.encode_ms,
        report.timings.decode_ms
    )
}
