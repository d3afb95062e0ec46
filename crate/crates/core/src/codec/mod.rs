//! Encoding, modulation and joint decoding on a lifted code.
//!
//! Variables of the expanded matrix are ordered `[s | p | u]`: source bits,
//! then channel parity, then compressed bits, each grid column contributing
//! `z2` consecutive positions.

use thiserror::Error;

pub mod channel;
pub mod decoder;
pub mod modem;
pub mod source;

pub use channel::ChannelEncoder;
pub use decoder::{BpDecoder, DecodeResult, DEFAULT_LLR_CLIP};
pub use modem::{channel_llr, modulate, noise_variance, source_prior_llr};
pub use source::{encode_source, encode_source_traditional};

use crate::lifting::{lift, LiftError, QcMatrix, SparseBinary};
use crate::protograph::JointCode;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("{what} vector has length {got}, expected {expected}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error(
        "compressed bits are outside the range of the parity part (rank deficiency {deficiency})"
    )]
    Singular { deficiency: usize },
    #[error("lift with seed {seed} needs {fillers} filler positions, more than the limit {limit}")]
    TooManyFillers {
        seed: u64,
        fillers: usize,
        limit: usize,
    },
    #[error(transparent)]
    Lift(#[from] LiftError),
}

/// `dst[i] ^= src[(i + h) mod z]`: one circulant block applied to `src`.
#[inline]
pub(crate) fn xor_shifted(dst: &mut [u8], src: &[u8], h: usize) {
    let z = dst.len();
    let (lo, hi) = src.split_at(h);
    for (d, s) in dst[..z - h].iter_mut().zip(hi) {
        *d ^= s;
    }
    for (d, s) in dst[z - h..].iter_mut().zip(lo) {
        *d ^= s;
    }
}

/// `dst[(i + h) mod z] ^= src[i]`: the transposed block.
#[inline]
pub(crate) fn xor_shifted_transpose(dst: &mut [u8], src: &[u8], h: usize) {
    let z = dst.len();
    let (lo, hi) = dst.split_at_mut(h);
    for (d, s) in hi.iter_mut().zip(&src[..z - h]) {
        *d ^= s;
    }
    for (d, s) in lo.iter_mut().zip(&src[z - h..]) {
        *d ^= s;
    }
}

/// Default bound on filler positions accepted before re-lifting.
pub const DEFAULT_MAX_FILLERS: usize = 8;

/// A joint code together with one lift and everything needed to encode and
/// decode frames on it.
#[derive(Debug, Clone)]
pub struct LiftedCode {
    code: JointCode,
    qc: QcMatrix,
    h: SparseBinary,
    channel: ChannelEncoder,
    positions: Vec<usize>,
    filler_mask: Vec<bool>,
}

/// One encoded frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword {
    pub s: Vec<u8>,
    pub p: Vec<u8>,
    pub u: Vec<u8>,
}

impl Codeword {
    /// The full variable vector `[s | p | u]`.
    pub fn joint(&self) -> Vec<u8> {
        let mut x = Vec::with_capacity(self.s.len() + self.p.len() + self.u.len());
        x.extend_from_slice(&self.s);
        x.extend_from_slice(&self.p);
        x.extend_from_slice(&self.u);
        x
    }
}

/// Full record of one simulated trial.
#[derive(Debug, Clone)]
pub struct Frame<T: Real> {
    pub codeword: Codeword,
    pub transmitted: Vec<T>,
    pub received: Vec<T>,
    pub s_hat: Vec<u8>,
    pub iterations: usize,
    pub converged: bool,
}

impl LiftedCode {
    pub fn new(code: JointCode, qc: QcMatrix) -> Result<Self, CodecError> {
        let l = code.layout();
        let ql = qc.layout();
        if (l.m_s, l.n_s, l.m_c, l.n_c, l.orientation)
            != (ql.m_s, ql.n_s, ql.m_c, ql.n_c, ql.orientation)
        {
            return Err(CodecError::Structure(
                "lift does not match the code layout".into(),
            ));
        }
        let h = qc.expand();
        let channel = ChannelEncoder::new(&qc);
        let z = qc.z2();
        let z1 = qc.z1();
        let positions = (l.parity_start() * z1..l.cols() * z1)
            .filter(|&c| !code.is_punctured_joint_col(c / z1))
            .flat_map(|c| c * z..(c + 1) * z)
            .collect();
        let mut filler_mask = vec![false; qc.source_len()];
        for &q in channel.fillers() {
            filler_mask[q] = true;
        }
        Ok(LiftedCode {
            code,
            qc,
            h,
            channel,
            positions,
            filler_mask,
        })
    }

    /// Lifts `code` with `seed`, trying up to `retries` further seeds while
    /// the lift needs more than `max_fillers` filler positions.
    pub fn build(
        code: &JointCode,
        z1: usize,
        z2: usize,
        seed: u64,
        attempts: usize,
        max_fillers: usize,
        retries: usize,
    ) -> Result<Self, CodecError> {
        let mut last = None;
        for k in 0..=retries as u64 {
            let s = seed.wrapping_add(k);
            let qc = lift(code, z1, z2, s, attempts)?;
            let lifted = LiftedCode::new(code.clone(), qc)?;
            let fillers = lifted.fillers().len();
            if fillers <= max_fillers {
                return Ok(lifted);
            }
            last = Some(CodecError::TooManyFillers {
                seed: s,
                fillers,
                limit: max_fillers,
            });
        }
        Err(last.expect("at least one lift attempted"))
    }

    pub fn code(&self) -> &JointCode {
        &self.code
    }

    pub fn qc(&self) -> &QcMatrix {
        &self.qc
    }

    pub fn h(&self) -> &SparseBinary {
        &self.h
    }

    pub fn channel_encoder(&self) -> &ChannelEncoder {
        &self.channel
    }

    /// Filler source positions (not free information bits).
    pub fn fillers(&self) -> &[usize] {
        self.channel.fillers()
    }

    pub fn is_filler(&self, i: usize) -> bool {
        self.filler_mask[i]
    }

    /// Information-carrying source bits per frame.
    pub fn info_len(&self) -> usize {
        self.qc.source_len() - self.fillers().len()
    }

    /// Variable indices sent over the channel, in transmission order.
    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn n(&self) -> usize {
        self.h.cols()
    }

    /// Sets filler positions of `s` to the values the encoder requires.
    pub fn conform_source(&self, s: &mut [u8]) {
        self.channel.conform_source(s);
    }

    /// Encodes a conforming source vector.
    pub fn encode(&self, s: &[u8]) -> Result<Codeword, CodecError> {
        let u = encode_source(s, &self.qc)?;
        let p = self.channel.encode(&self.qc, &u)?;
        Ok(Codeword {
            s: s.to_vec(),
            p,
            u,
        })
    }

    pub fn modulate<T: Real>(&self, cw: &Codeword) -> Vec<T> {
        modulate(&cw.joint(), &self.positions)
    }

    pub fn llr<T: Real>(&self, received: &[T], esn0_db: f64) -> Vec<T> {
        channel_llr(
            received,
            esn0_db,
            &self.positions,
            self.n(),
            self.qc.source_len(),
            self.code.p1(),
            self.fillers(),
        )
    }

    pub fn decoder<T: Real>(&self) -> BpDecoder<T> {
        BpDecoder::new(&self.h)
    }

    /// Source-bit errors between `s` and `s_hat`, fillers excluded.
    pub fn source_errors(&self, s: &[u8], s_hat: &[u8]) -> usize {
        s.iter()
            .zip(s_hat)
            .enumerate()
            .filter(|&(i, (a, b))| a != b && !self.filler_mask[i])
            .count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifted_xor_and_transpose_agree_with_definition() {
        let src = [1u8, 0, 0, 1, 1];
        for h in 0..5 {
            let mut d = [0u8; 5];
            xor_shifted(&mut d, &src, h);
            let expect: Vec<u8> = (0..5).map(|i| src[(i + h) % 5]).collect();
            assert_eq!(d.to_vec(), expect);
            let mut t = [0u8; 5];
            xor_shifted_transpose(&mut t, &src, h);
            let mut expect_t = [0u8; 5];
            for i in 0..5 {
                expect_t[(i + h) % 5] ^= src[i];
            }
            assert_eq!(t, expect_t);
        }
    }
}
