//! Channel parity encoding and the source constraints it may impose.
//!
//! The parity part `P` of the channel checks is factored once. When `P` is
//! rank deficient, `P p = H_u u` is only solvable for `u` orthogonal to the
//! left null space of `P`. Since `u` is a linear function of the source, each
//! null functional becomes a parity constraint on `s`; after row reduction
//! every constraint owns one pivot source position (a "filler") whose value is
//! computed from the remaining source bits before encoding.

use super::{xor_shifted, xor_shifted_transpose, CodecError};
use crate::gf2::{rref, Bits, Gf2Lu};
use crate::lifting::QcMatrix;

#[derive(Debug, Clone)]
pub struct ChannelEncoder {
    z2: usize,
    /// First grid row of the channel checks.
    row0: usize,
    groups: usize,
    parity_col0: usize,
    link_col0: usize,
    u_groups: usize,
    lu: Gf2Lu,
    /// Row-reduced source constraints and their pivot (filler) positions.
    constraints: Vec<Bits>,
    fillers: Vec<usize>,
}

impl ChannelEncoder {
    pub fn new(qc: &QcMatrix) -> Self {
        let l = qc.layout();
        let z1 = qc.z1();
        let z = qc.z2();
        let row0 = l.m_s * z1;
        let groups = l.m_c * z1;
        let parity_col0 = l.parity_start() * z1;
        let link_col0 = l.link_start() * z1;
        let m_c = groups * z;
        let mut rows = Vec::with_capacity(m_c);
        for a in 0..groups {
            let blocks: Vec<(usize, usize)> = qc
                .row_blocks(row0 + a)
                .filter(|&(c, _)| c >= parity_col0 && c < link_col0)
                .collect();
            for i in 0..z {
                let mut r = Bits::zeros(m_c);
                for &(c, h) in &blocks {
                    r.set((c - parity_col0) * z + (i + h) % z);
                }
                rows.push(r);
            }
        }
        let lu = Gf2Lu::factor(rows, m_c);
        let mut enc = ChannelEncoder {
            z2: z,
            row0,
            groups,
            parity_col0,
            link_col0,
            u_groups: l.m_s * z1,
            lu,
            constraints: Vec::new(),
            fillers: Vec::new(),
        };
        enc.derive_constraints(qc);
        enc
    }

    /// Rank deficiency of the parity part.
    pub fn deficiency(&self) -> usize {
        self.lu.row_deficiency()
    }

    /// Source positions whose values are fixed by the other source bits.
    pub fn fillers(&self) -> &[usize] {
        &self.fillers
    }

    fn derive_constraints(&mut self, qc: &QcMatrix) {
        let z = self.z2;
        let n_src = qc.layout().n_s * qc.z1();
        let mut rows = Vec::new();
        for null in self.lu.left_null_space() {
            // g = H_u^T c
            let mut g = vec![0u8; self.u_groups * z];
            let c_bits = null.to_bits();
            for a in 0..self.groups {
                let c_a = &c_bits[a * z..(a + 1) * z];
                for (c, h) in qc
                    .row_blocks(self.row0 + a)
                    .filter(|&(c, _)| c >= self.link_col0)
                {
                    let k = c - self.link_col0;
                    xor_shifted_transpose(&mut g[k * z..(k + 1) * z], c_a, h);
                }
            }
            // w = T^{-T} g, solved in the opposite order to the encoder
            let mut w = g;
            for j in qc.link_order().into_iter().rev() {
                let w_j = w[j * z..(j + 1) * z].to_vec();
                for (c, h) in qc.row_blocks(j).filter(|&(c, _)| c >= self.link_col0) {
                    let k = c - self.link_col0;
                    if k != j {
                        xor_shifted_transpose(&mut w[k * z..(k + 1) * z], &w_j, h);
                    }
                }
            }
            // f = H_s^T w
            let mut f = vec![0u8; n_src * z];
            for j in 0..self.u_groups {
                let w_j = &w[j * z..(j + 1) * z];
                for (c, h) in qc.row_blocks(j).take_while(|&(c, _)| c < n_src) {
                    xor_shifted_transpose(&mut f[c * z..(c + 1) * z], w_j, h);
                }
            }
            let f = Bits::from_bits(&f);
            if !f.is_zero() {
                rows.push(f);
            }
        }
        self.fillers = rref(&mut rows);
        self.constraints = rows;
    }

    /// Overwrites the filler positions of `s` so that the resulting `u` is
    /// channel encodable.
    pub fn conform_source(&self, s: &mut [u8]) {
        if self.fillers.is_empty() {
            return;
        }
        for &q in &self.fillers {
            s[q] = 0;
        }
        let bits = Bits::from_bits(s);
        for (row, &q) in self.constraints.iter().zip(&self.fillers) {
            s[q] = row.dot(&bits) as u8;
        }
    }

    /// Parity bits `p` with `H_p p + H_u u = 0`.
    pub fn encode(&self, qc: &QcMatrix, u: &[u8]) -> Result<Vec<u8>, CodecError> {
        let z = self.z2;
        if u.len() != self.u_groups * z {
            return Err(CodecError::Length {
                what: "compressed",
                expected: self.u_groups * z,
                got: u.len(),
            });
        }
        let mut b = vec![0u8; self.groups * z];
        for a in 0..self.groups {
            let b_a = &mut b[a * z..(a + 1) * z];
            for (c, h) in qc
                .row_blocks(self.row0 + a)
                .filter(|&(c, _)| c >= self.link_col0)
            {
                let k = c - self.link_col0;
                xor_shifted(b_a, &u[k * z..(k + 1) * z], h);
            }
        }
        let p = self
            .lu
            .solve(&Bits::from_bits(&b))
            .map_err(|_| CodecError::Singular {
                deficiency: self.deficiency(),
            })?;
        debug_assert_eq!(p.len(), (self.link_col0 - self.parity_col0) * z);
        Ok(p.to_bits())
    }
}
