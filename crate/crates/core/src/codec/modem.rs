//! Puncturing, BPSK mapping and channel LLRs.

use crate::scalar::Real;

/// Noise variance `N0/2` for unit symbol energy.
pub fn noise_variance(esn0_db: f64) -> f64 {
    1.0 / (2.0 * 10f64.powf(esn0_db / 10.0))
}

/// Prior LLR of a Bernoulli(`p1`) source bit, positive favouring 0.
pub fn source_prior_llr(p1: f64) -> f64 {
    ((1.0 - p1) / p1).ln()
}

/// BPSK: bit 0 maps to +1, bit 1 to -1.
pub fn modulate<T: Real>(x: &[u8], positions: &[usize]) -> Vec<T> {
    positions
        .iter()
        .map(|&v| if x[v] & 1 == 0 { T::one() } else { -T::one() })
        .collect()
}

/// Decoder input: `2y/sigma^2` on transmitted positions, 0 on punctured
/// positions, the source prior on source bits and 0 on filler bits.
pub fn channel_llr<T: Real>(
    received: &[T],
    esn0_db: f64,
    positions: &[usize],
    n: usize,
    source_len: usize,
    p1: f64,
    fillers: &[usize],
) -> Vec<T> {
    assert_eq!(received.len(), positions.len());
    let mut llr = vec![T::zero(); n];
    let prior = T::of(source_prior_llr(p1));
    llr[..source_len].fill(prior);
    for &q in fillers {
        llr[q] = T::zero();
    }
    let scale = T::of(2.0 / noise_variance(esn0_db));
    for (&v, &y) in positions.iter().zip(received) {
        llr[v] = scale * y;
    }
    llr
}
