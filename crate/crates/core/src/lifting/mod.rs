//! Two-stage lifting of a joint protomatrix to a quasi-cyclic parity-check
//! matrix.

use thiserror::Error;

pub mod peg;
pub mod qc;
pub mod sparse;

pub use peg::{lift_peg, lift_peg_proto, BinaryBaseMatrix};
pub use qc::{lift_qc, QcMatrix};
pub use sparse::{Girth, SparseBinary};

use crate::protograph::JointCode;

/// Default number of seeded shift candidates tried by [`lift_qc`].
pub const DEFAULT_ATTEMPTS: usize = 200;

#[derive(Debug, Error)]
pub enum LiftError {
    #[error("invalid lifting structure: {0}")]
    Structure(String),
    #[error("z1 = {z1} cannot hold a protograph entry of {max_entry}")]
    Infeasible { z1: usize, max_entry: usize },
    #[error(
        "no candidate out of {attempts} reached girth 6 (best still had {four_cycles} 4-cycles)"
    )]
    GirthFailure { attempts: usize, four_cycles: usize },
    #[error("QC matrix file, line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Both lifting stages with the same seed.
pub fn lift(
    code: &JointCode,
    z1: usize,
    z2: usize,
    seed: u64,
    attempts: usize,
) -> Result<QcMatrix, LiftError> {
    let base = lift_peg(code, z1, seed)?;
    lift_qc(&base, z2, seed, attempts)
}
