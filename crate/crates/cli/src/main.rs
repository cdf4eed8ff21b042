//! Command-line driver: generate signals, build measurement matrices,
//! sketch, stream updates, decode, and run experiment sweeps.

mod signal_file;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use chainpursuit::gen::{generate_signal, NoiseModel};
use chainpursuit::metrics::{csv_row, CSV_HEADER};
use chainpursuit::{
    l1_norm, recover, recovery_report, sketch_signal, update, Error, IsolationMatrix, Mode, Sketch,
    SketchParams, Timings,
};

/// Exit codes: 0 ok, 2 validation, 3 hash FAIL, 4 format mismatch.
#[derive(Debug)]
pub struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::HashFail { .. } => 3,
            Error::Format { .. } | Error::ScheduleMismatch => 4,
            _ => 2,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

fn read_file(path: &PathBuf) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn read_text(path: &PathBuf) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}

/// Noise specification: `none`, `l1:<budget>`, `l1rel:<fraction>` (budget as
/// a fraction of the spike mass), or `weak1:<r>`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum NoiseSpec {
    None,
    L1(f64),
    L1Rel(f64),
    Weak1(f64),
}

impl NoiseSpec {
    fn parse(text: &str) -> Result<Self, String> {
        if text == "none" {
            return Ok(NoiseSpec::None);
        }
        let (kind, amount) = text.split_once(':').ok_or_else(|| {
            format!("bad noise spec '{text}' (try none, l1:<x>, l1rel:<x>, weak1:<r>)")
        })?;
        let value: f64 = amount
            .parse()
            .map_err(|_| format!("bad noise amount '{amount}'"))?;
        match kind {
            "l1" => Ok(NoiseSpec::L1(value)),
            "l1rel" => Ok(NoiseSpec::L1Rel(value)),
            "weak1" => Ok(NoiseSpec::Weak1(value)),
            _ => Err(format!("unknown noise kind '{kind}'")),
        }
    }

    /// Generates a signal under this spec; `l1rel` budgets are resolved
    /// against the l1 mass of the spikes drawn with the same seed.
    fn generate(&self, d: usize, m: usize, seed: u64) -> Result<chainpursuit::SparseSignal, Error> {
        match *self {
            NoiseSpec::None => generate_signal(d, m, NoiseModel::None, seed),
            NoiseSpec::L1(budget) => generate_signal(d, m, NoiseModel::L1Budget(budget), seed),
            NoiseSpec::L1Rel(fraction) => {
                let spikes = generate_signal(d, m, NoiseModel::None, seed)?;
                generate_signal(
                    d,
                    m,
                    NoiseModel::L1Budget(fraction * l1_norm(&spikes)),
                    seed,
                )
            }
            NoiseSpec::Weak1(r) => generate_signal(d, m, NoiseModel::Weak1(r), seed),
        }
    }

    fn label(&self) -> String {
        match self {
            NoiseSpec::None => "none".into(),
            NoiseSpec::L1(x) => format!("l1:{x}"),
            NoiseSpec::L1Rel(x) => format!("l1rel:{x}"),
            NoiseSpec::Weak1(x) => format!("weak1:{x}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ModeArg {
    Explicit,
    Seeded,
}

impl ModeArg {
    fn parse(text: &str) -> Result<Self, String> {
        match text {
            "explicit" => Ok(ModeArg::Explicit),
            "seeded" => Ok(ModeArg::Seeded),
            _ => Err("mode must be 'explicit' or 'seeded'".into()),
        }
    }

    fn to_mode(self) -> Mode {
        match self {
            ModeArg::Explicit => Mode::Explicit,
            ModeArg::Seeded => Mode::Seeded,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ParamFlags {
    /// Target sparsity m.
    #[arg(long)]
    m: usize,
    /// Pass base a (> 2).
    #[arg(long, default_value_t = 8.0)]
    a: f64,
    /// Trial-count constant.
    #[arg(long = "c-trials", default_value_t = 4.0)]
    c_trials: f64,
    /// Bucket-count constant.
    #[arg(long = "c-buckets", default_value_t = 16.0)]
    c_buckets: f64,
    /// Vote retention fraction in (0, 1].
    #[arg(long, default_value_t = 0.9)]
    retention: f64,
    /// Matrix backend.
    #[arg(long, default_value = "explicit", value_parser = ModeArg::parse)]
    mode: ModeArg,
    /// Master seed for all randomness.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Rejection repetitions for seeded hashing (default: ceil(4 log2 d)).
    #[arg(long = "k-rep")]
    k_rep: Option<usize>,
}

impl ParamFlags {
    fn to_params(&self, d: usize) -> SketchParams {
        let mut params = SketchParams::new(d, self.m);
        params.a = self.a;
        params.c_trials = self.c_trials;
        params.c_buckets = self.c_buckets;
        params.retention_fraction = self.retention;
        params.mode = self.mode.to_mode();
        params.seed = self.seed;
        if let Some(k_rep) = self.k_rep {
            params.k_rep = k_rep;
        }
        params
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "chainpursuit",
    about = "Sketch long sparse signals into small linear summaries and recover them in sublinear time",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a test signal file.
    Gen {
        /// Signal dimension d.
        #[arg(long)]
        d: usize,
        /// Number of spikes.
        #[arg(long)]
        m: usize,
        /// Noise model: none, l1:<budget>, l1rel:<fraction>, weak1:<r>.
        #[arg(long, default_value = "none", value_parser = NoiseSpec::parse)]
        noise: NoiseSpec,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output signal file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a matrix from flags, sketch a signal file, and write both.
    Sketch {
        /// Input signal file.
        #[arg(long)]
        signal: PathBuf,
        /// Signal dimension; must match the signal file header when given.
        #[arg(long)]
        d: Option<usize>,
        #[command(flatten)]
        params: ParamFlags,
        /// Output isolation-matrix file.
        #[arg(long = "matrix-out")]
        matrix_out: PathBuf,
        /// Output sketch file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Apply a streaming update `f[position] += delta` to a sketch file.
    Update {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        position: usize,
        #[arg(long, allow_hyphen_values = true)]
        delta: f64,
        /// Output sketch file; the input is rewritten in place when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover the m largest spikes from a sketch file.
    Decode {
        #[arg(long)]
        sketch: PathBuf,
        #[arg(long)]
        matrix: PathBuf,
        /// Output sparsity; defaults to the matrix's m.
        #[arg(long)]
        m: Option<usize>,
        /// Reference signal file; recovery quality is reported to stderr.
        #[arg(long)]
        truth: Option<PathBuf>,
        /// Output signal file.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a gen -> sketch -> decode sweep and emit one CSV row per run.
    Experiment {
        /// Dimensions to sweep (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        d: Vec<usize>,
        /// Sparsities to sweep (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        m: Vec<usize>,
        /// Noise models to sweep; repeat the flag for several.
        #[arg(long, value_parser = NoiseSpec::parse)]
        noise: Vec<NoiseSpec>,
        /// Sketch perturbation budget as a fraction of ||f||_1.
        #[arg(long = "meas-noise", default_value_t = 0.0)]
        meas_noise: f64,
        /// Runs per sweep cell.
        #[arg(long, default_value_t = 10)]
        runs: usize,
        #[arg(long, default_value_t = 8.0)]
        a: f64,
        #[arg(long = "c-trials", default_value_t = 4.0)]
        c_trials: f64,
        #[arg(long = "c-buckets", default_value_t = 16.0)]
        c_buckets: f64,
        #[arg(long, default_value_t = 0.9)]
        retention: f64,
        #[arg(long, default_value = "explicit", value_parser = ModeArg::parse)]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output CSV path.
        #[arg(long)]
        out: PathBuf,
    },
}

fn mix(a: u64, b: u64, c: u64) -> u64 {
    let mut x = a
        .wrapping_mul(0x9e3779b97f4a7c15)
        .wrapping_add(b)
        .wrapping_mul(0xbf58476d1ce4e5b9)
        .wrapping_add(c);
    x ^= x >> 31;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 29)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen {
            d,
            m,
            noise,
            seed,
            out,
        } => {
            let signal = noise.generate(d, m, seed)?;
            write_file(&out, signal_file::to_string(&signal).as_bytes())
        }
        Command::Sketch {
            signal,
            d,
            params,
            matrix_out,
            out,
        } => {
            let f = signal_file::parse(&read_text(&signal)?, &signal.to_string_lossy())?;
            if let Some(d) = d {
                if d != f.dimension() {
                    return Err(CliError::validation(format!(
                        "--d {} does not match signal dimension {}",
                        d,
                        f.dimension()
                    )));
                }
            }
            let params = params.to_params(f.dimension());
            let matrix = IsolationMatrix::build(&params)?;
            let sketch = sketch_signal(&f, &matrix)?;
            write_file(&matrix_out, &matrix.to_bytes())?;
            write_file(&out, &sketch.to_bytes(&Sketch::matrix_hash(&matrix)))
        }
        Command::Update {
            sketch,
            matrix,
            position,
            delta,
            out,
        } => {
            let matrix_loaded = IsolationMatrix::from_bytes(&read_file(&matrix)?)?;
            let hash = Sketch::matrix_hash(&matrix_loaded);
            let mut sketch_loaded = Sketch::from_bytes(&read_file(&sketch)?, Some(&hash))?;
            update(&mut sketch_loaded, &matrix_loaded, position, delta)?;
            let target = out.unwrap_or(sketch);
            write_file(&target, &sketch_loaded.to_bytes(&hash))
        }
        Command::Decode {
            sketch,
            matrix,
            m,
            truth,
            out,
        } => {
            let matrix_loaded = IsolationMatrix::from_bytes(&read_file(&matrix)?)?;
            let hash = Sketch::matrix_hash(&matrix_loaded);
            let sketch_loaded = Sketch::from_bytes(&read_file(&sketch)?, Some(&hash))?;
            let m = m.unwrap_or(matrix_loaded.params().m);
            let start = Instant::now();
            let recovered = recover(&sketch_loaded, &matrix_loaded, m)?;
            let decode_ms = start.elapsed().as_secs_f64() * 1e3;
            if let Some(truth_path) = truth {
                let f =
                    signal_file::parse(&read_text(&truth_path)?, &truth_path.to_string_lossy())?;
                let timings = Timings {
                    encode_ms: 0.0,
                    decode_ms,
                    sketch_bytes: read_file(&sketch)?.len(),
                };
                let report = recovery_report(&f, &recovered, m, timings)?;
                eprintln!(
                    "l1_error={} opt_error={} ratio={} weak1_error={} support_out={} decode_ms={:.3}",
                    report.l1_error,
                    report.opt_error,
                    report.ratio,
                    report.weak1_error,
                    report.support_out,
                    decode_ms
                );
            }
            write_file(&out, signal_file::to_string(&recovered).as_bytes())
        }
        Command::Experiment {
            d,
            m,
            noise,
            meas_noise,
            runs,
            a,
            c_trials,
            c_buckets,
            retention,
            mode,
            seed,
            out,
        } => {
            let noises = if noise.is_empty() {
                vec![NoiseSpec::None]
            } else {
                noise
            };
            let mut csv = String::from(CSV_HEADER);
            csv.push('\n');
            for &dim in &d {
                for &sparsity in &m {
                    for spec in &noises {
                        for run_index in 0..runs {
                            let cell_seed = mix(
                                seed ^ dim as u64,
                                (sparsity as u64) << 20 | run_index as u64,
                                spec.label().len() as u64,
                            );
                            let mut params = SketchParams::new(dim, sparsity);
                            params.a = a;
                            params.c_trials = c_trials;
                            params.c_buckets = c_buckets;
                            params.retention_fraction = retention;
                            params.mode = mode.to_mode();
                            params.seed = mix(cell_seed, 1, 0);
                            let row =
                                experiment_run(&params, spec, meas_noise, mix(cell_seed, 2, 0))?;
                            csv.push_str(&row);
                            csv.push('\n');
                        }
                    }
                }
            }
            write_file(&out, csv.as_bytes())
        }
    }
}

/// One sweep cell run: gen -> sketch -> (perturb) -> decode -> report row.
fn experiment_run(
    params: &SketchParams,
    noise: &NoiseSpec,
    meas_noise: f64,
    signal_seed: u64,
) -> Result<String, CliError> {
    let f = noise.generate(params.d, params.m, signal_seed)?;
    let matrix = IsolationMatrix::build(params)?;
    let start = Instant::now();
    let mut sketch = sketch_signal(&f, &matrix)?;
    let encode_ms = start.elapsed().as_secs_f64() * 1e3;
    let sketch_bytes = sketch.to_bytes(&Sketch::matrix_hash(&matrix)).len();

    // Sketch-side perturbation: an l1 budget split over m random scalar
    // slots with random signs.
    let mut meas_noise_l1 = 0.0;
    if meas_noise > 0.0 {
        let budget = meas_noise * l1_norm(&f);
        let share = budget / params.m as f64;
        let mut rng = ChaCha12Rng::seed_from_u64(mix(signal_seed, 3, 0));
        let mut slots = std::collections::HashSet::new();
        while slots.len() < params.m.min(sketch.scalar_count()) {
            slots.insert(rng.gen_range(0..sketch.scalar_count()));
        }
        for slot in slots {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            sketch.perturb_scalar(slot, sign * share);
            meas_noise_l1 += share;
        }
    }

    let start = Instant::now();
    let recovered = recover(&sketch, &matrix, params.m)?;
    let decode_ms = start.elapsed().as_secs_f64() * 1e3;

    let spikes = chainpursuit::best_m_approx(&f, params.m);
    let noise_l1 = l1_norm(&f.sub(&spikes)?);
    let timings = Timings {
        encode_ms,
        decode_ms,
        sketch_bytes,
    };
    let report = recovery_report(&f, &recovered, params.m, timings)?;
    Ok(csv_row(
        params.d,
        params.m,
        params.a,
        params.seed,
        noise_l1,
        meas_noise_l1,
        &report,
    ))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
