//! Monte Carlo source-bit error rate simulation.
//!
//! Frame `k` at a given Es/N0 draws all of its randomness from a ChaCha
//! stream keyed by `(sim_seed, Es/N0, k)`, so results do not depend on how
//! many workers run. Frames are simulated in fixed batches and committed in
//! index order; the stopping rule is checked after every committed frame and
//! any frames beyond the stopping point are discarded.

use std::fmt;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codec::{noise_variance, CodecError, LiftedCode};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("cannot resume {path}: {reason}")]
    Resume { path: String, reason: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub code_id: String,
    pub z1: usize,
    pub z2: usize,
    pub lift_seed: u64,
    pub sim_seed: u64,
    pub grid: Vec<f64>,
    pub i_max: usize,
    /// Stop once more than this many frames have been simulated.
    pub max_frames: u64,
    /// Stop once more than this many error frames have been seen...
    pub target_error_frames: u64,
    /// ...provided at least this many frames have been simulated.
    pub min_frames: u64,
    pub batch: usize,
}

impl SimConfig {
    pub fn new(code_id: impl Into<String>, z1: usize, z2: usize, grid: Vec<f64>) -> Self {
        SimConfig {
            code_id: code_id.into(),
            z1,
            z2,
            lift_seed: 1,
            sim_seed: 1,
            grid,
            i_max: 200,
            max_frames: 200_000,
            target_error_frames: 100,
            min_frames: 5000,
            batch: 64,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::Config(m.to_string()));
        if self.grid.is_empty() {
            return bad("Es/N0 grid is empty");
        }
        if self.grid.iter().any(|x| !x.is_finite()) {
            return bad("Es/N0 grid has a non-finite value");
        }
        if self.z1 == 0 || self.z2 == 0 || self.i_max == 0 || self.batch == 0 {
            return bad("z1, z2, i_max and batch must be positive");
        }
        if self.max_frames == 0 || self.min_frames == 0 {
            return bad("frame counts must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    FramesCap,
    ErrorTarget,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::FramesCap => "frames-cap",
            StopReason::ErrorTarget => "error-target",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPoint {
    pub esn0_db: f64,
    pub frames: u64,
    /// Information source bits (fillers excluded).
    pub source_bits: u64,
    pub bit_errors: u64,
    pub error_frames: u64,
    pub sser: f64,
    pub fer: f64,
    pub mean_iters: f64,
    pub stop_reason: StopReason,
}

/// One row of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub code_id: String,
    #[serde(rename = "EsN0_dB")]
    pub esn0_db: f64,
    pub frames: u64,
    pub source_bits: u64,
    pub bit_errors: u64,
    pub error_frames: u64,
    pub sser: f64,
    pub fer: f64,
    pub mean_iters: f64,
    pub stop_reason: StopReason,
    pub lift_seed: u64,
    pub sim_seed: u64,
}

pub const CSV_COLUMNS: [&str; 12] = [
    "code_id",
    "EsN0_dB",
    "frames",
    "source_bits",
    "bit_errors",
    "error_frames",
    "sser",
    "fer",
    "mean_iters",
    "stop_reason",
    "lift_seed",
    "sim_seed",
];

impl SimRow {
    pub fn new(config: &SimConfig, p: &SimPoint) -> Self {
        SimRow {
            code_id: config.code_id.clone(),
            esn0_db: p.esn0_db,
            frames: p.frames,
            source_bits: p.source_bits,
            bit_errors: p.bit_errors,
            error_frames: p.error_frames,
            sser: p.sser,
            fer: p.fer,
            mean_iters: p.mean_iters,
            stop_reason: p.stop_reason,
            lift_seed: config.lift_seed,
            sim_seed: config.sim_seed,
        }
    }

    pub fn point(&self) -> SimPoint {
        SimPoint {
            esn0_db: self.esn0_db,
            frames: self.frames,
            source_bits: self.source_bits,
            bit_errors: self.bit_errors,
            error_frames: self.error_frames,
            sser: self.sser,
            fer: self.fer,
            mean_iters: self.mean_iters,
            stop_reason: self.stop_reason,
        }
    }
}

/// Independent Bernoulli(`p1`) bits.
pub fn gen_source<R: Rng>(p1: f64, n: usize, rng: &mut R) -> Vec<u8> {
    (0..n).map(|_| rng.gen_bool(p1) as u8).collect()
}

/// Random stream for frame `frame` at `esn0_db`.
pub fn frame_rng(sim_seed: u64, esn0_db: f64, frame: u64) -> ChaCha8Rng {
    let key = sim_seed ^ esn0_db.to_bits().rotate_left(17) ^ 0x9e37_79b9_7f4a_7c15;
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(frame);
    rng
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrameTally {
    pub bit_errors: u64,
    pub iterations: u64,
}

/// Encodes, transmits and decodes one frame.
pub fn simulate_frame<T: Real>(
    code: &LiftedCode,
    decoder: &mut crate::codec::BpDecoder<T>,
    esn0_db: f64,
    i_max: usize,
    rng: &mut ChaCha8Rng,
) -> Result<FrameTally, CodecError> {
    let n_s = code.qc().source_len();
    let mut s = gen_source(code.code().p1(), n_s, rng);
    code.conform_source(&mut s);
    let cw = code.encode(&s)?;
    let sigma = noise_variance(esn0_db).sqrt();
    let x: Vec<T> = code.modulate(&cw);
    let y: Vec<T> = x
        .iter()
        .map(|&v| {
            let g: f64 = rng.sample(StandardNormal);
            v + T::of(sigma * g)
        })
        .collect();
    let llr = code.llr(&y, esn0_db);
    let out = decoder.decode(&llr, i_max);
    Ok(FrameTally {
        bit_errors: code.source_errors(&s, &out.bits[..n_s]) as u64,
        iterations: out.iterations as u64,
    })
}

/// Simulates one Es/N0 point until the stopping rule fires.
pub fn run_point<T: Real>(
    code: &LiftedCode,
    config: &SimConfig,
    esn0_db: f64,
) -> Result<SimPoint, SimError> {
    config.validate()?;
    let info = code.info_len() as u64;
    let (mut frames, mut bit_errors, mut error_frames, mut iters) = (0u64, 0u64, 0u64, 0u64);
    let stop = loop {
        let start = frames;
        let tallies: Vec<Result<FrameTally, CodecError>> = (start..start + config.batch as u64)
            .into_par_iter()
            .map_init(
                || code.decoder::<T>(),
                |dec, k| {
                    let mut rng = frame_rng(config.sim_seed, esn0_db, k);
                    simulate_frame(code, dec, esn0_db, config.i_max, &mut rng)
                },
            )
            .collect();
        let mut reason = None;
        for t in tallies {
            let t = t?;
            frames += 1;
            bit_errors += t.bit_errors;
            error_frames += (t.bit_errors > 0) as u64;
            iters += t.iterations;
            if frames > config.max_frames {
                reason = Some(StopReason::FramesCap);
            } else if error_frames > config.target_error_frames && frames >= config.min_frames {
                reason = Some(StopReason::ErrorTarget);
            }
            if reason.is_some() {
                break;
            }
        }
        if let Some(r) = reason {
            break r;
        }
    };
    let source_bits = frames * info;
    Ok(SimPoint {
        esn0_db,
        frames,
        source_bits,
        bit_errors,
        error_frames,
        sser: bit_errors as f64 / source_bits as f64,
        fer: error_frames as f64 / frames as f64,
        mean_iters: iters as f64 / frames as f64,
        stop_reason: stop,
    })
}

fn read_rows(path: &Path) -> Result<Vec<SimRow>, SimError> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    if headers.iter().ne(CSV_COLUMNS.iter().copied()) {
        return Err(SimError::Resume {
            path: path.display().to_string(),
            reason: "unexpected CSV header".into(),
        });
    }
    let rows: Result<Vec<SimRow>, _> = reader.deserialize().collect();
    Ok(rows?)
}

/// Runs every grid point not already present in `csv_path`, appending one
/// row per point as it completes. Rows from a previous run must carry the
/// same code id and seeds.
pub fn run_sweep<T: Real>(
    code: &LiftedCode,
    config: &SimConfig,
    csv_path: &Path,
) -> Result<Vec<SimPoint>, SimError> {
    config.validate()?;
    let mut done: Vec<SimRow> = Vec::new();
    let exists = csv_path.exists() && std::fs::metadata(csv_path)?.len() > 0;
    if exists {
        done = read_rows(csv_path)?;
        for row in &done {
            if row.code_id != config.code_id
                || row.lift_seed != config.lift_seed
                || row.sim_seed != config.sim_seed
            {
                return Err(SimError::Resume {
                    path: csv_path.display().to_string(),
                    reason: format!(
                        "row for {} dB was produced by code {} with seeds ({}, {})",
                        row.esn0_db, row.code_id, row.lift_seed, row.sim_seed
                    ),
                });
            }
        }
    }
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(csv_path)?;
    if !exists {
        writeln!(file, "{}", CSV_COLUMNS.join(","))?;
    }
    let mut out = Vec::with_capacity(config.grid.len());
    for &esn0 in &config.grid {
        if let Some(row) = done.iter().find(|r| r.esn0_db == esn0) {
            out.push(row.point());
            continue;
        }
        let point = run_point::<T>(code, config, esn0)?;
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .from_writer(Vec::new());
        w.serialize(SimRow::new(config, &point))?;
        file.write_all(&w.into_inner().map_err(|e| e.into_error())?)?;
        file.flush()?;
        out.push(point);
    }
    Ok(out)
}
