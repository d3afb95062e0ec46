//! Source compression through the source checks of the lifted code.

use super::{xor_shifted, CodecError};
use crate::lifting::QcMatrix;

fn check_diagonal(qc: &QcMatrix) -> Result<(), CodecError> {
    for j in 0..qc.layout().m_s * qc.z1() {
        if qc.shift(j, qc.link_group_col(j)) != Some(0) {
            return Err(CodecError::Structure(format!(
                "link diagonal block of row group {} is not the identity",
                j + 1
            )));
        }
    }
    Ok(())
}

fn source_part(s: &[u8], qc: &QcMatrix, j: usize, u_j: &mut [u8]) {
    let z = qc.z2();
    let n_src = qc.layout().n_s * qc.z1();
    for (c, h) in qc.row_blocks(j).take_while(|&(c, _)| c < n_src) {
        xor_shifted(u_j, &s[c * z..(c + 1) * z], h);
    }
}

/// Compressed bits with a triangular link: each group `u_j` is the source
/// syndrome of row group `j` plus the contributions of the groups solved
/// before it. Lower links are solved first-to-last, upper links last-to-first.
pub fn encode_source(s: &[u8], qc: &QcMatrix) -> Result<Vec<u8>, CodecError> {
    if s.len() != qc.source_len() {
        return Err(CodecError::Length {
            what: "source",
            expected: qc.source_len(),
            got: s.len(),
        });
    }
    check_diagonal(qc)?;
    let z = qc.z2();
    let link_start = qc.link_group_col(0);
    let mut u = vec![0u8; qc.compressed_len()];
    for j in qc.link_order() {
        let mut u_j = vec![0u8; z];
        source_part(s, qc, j, &mut u_j);
        for (c, h) in qc.row_blocks(j).filter(|&(c, _)| c >= link_start) {
            let k = c - link_start;
            if k != j {
                xor_shifted(&mut u_j, &u[k * z..(k + 1) * z], h);
            }
        }
        u[j * z..(j + 1) * z].copy_from_slice(&u_j);
    }
    Ok(u)
}

/// Compressed bits with an identity link: every group is an independent
/// source syndrome. Link blocks other than the diagonal are ignored.
pub fn encode_source_traditional(s: &[u8], qc: &QcMatrix) -> Result<Vec<u8>, CodecError> {
    if s.len() != qc.source_len() {
        return Err(CodecError::Length {
            what: "source",
            expected: qc.source_len(),
            got: s.len(),
        });
    }
    let z = qc.z2();
    let mut u = vec![0u8; qc.compressed_len()];
    for (j, u_j) in u.chunks_mut(z).enumerate() {
        source_part(s, qc, j, u_j);
    }
    Ok(u)
}
