//! First lifting stage: protomatrix to a 0/1 base matrix.
//!
//! A cell with multiplicity `b` becomes a `z1 x z1` block that is the sum of
//! `b` distinct circulant permutations, so every row and column of the block
//! has weight exactly `b`. Offsets are placed PEG-style: cells are visited in
//! order of increasing column degree and each offset is chosen to make the
//! shortest cycle it closes as long as possible. Diagonal cells of the link
//! block are pinned to the identity.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::LiftError;
use crate::protograph::{JointCode, Layout, Protomatrix};

/// 0/1 matrix obtained from the joint protomatrix by the first lift.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryBaseMatrix {
    layout: Layout,
    z1: usize,
    proto: Protomatrix,
    /// Circulant offsets per protograph cell, row-major, sorted.
    offsets: Vec<Vec<usize>>,
}

impl BinaryBaseMatrix {
    /// Assembles a base matrix from explicit per-cell offsets.
    pub fn from_offsets(
        layout: Layout,
        proto: Protomatrix,
        z1: usize,
        mut offsets: Vec<Vec<usize>>,
    ) -> Result<Self, LiftError> {
        if offsets.len() != proto.rows() * proto.cols() {
            return Err(LiftError::Structure("offset table size mismatch".into()));
        }
        for r in 0..proto.rows() {
            for c in 0..proto.cols() {
                let cell = &mut offsets[r * proto.cols() + c];
                cell.sort_unstable();
                cell.dedup();
                if cell.len() != proto.get(r, c) as usize || cell.iter().any(|&o| o >= z1) {
                    return Err(LiftError::Structure(format!(
                        "cell ({}, {}) needs {} distinct offsets below {z1}",
                        r + 1,
                        c + 1,
                        proto.get(r, c)
                    )));
                }
                if layout.is_link_diagonal(r, c) && cell.as_slice() != [0] {
                    return Err(LiftError::Structure(format!(
                        "link diagonal cell ({}, {}) must lift to the identity",
                        r + 1,
                        c + 1
                    )));
                }
            }
        }
        Ok(BinaryBaseMatrix {
            layout,
            z1,
            proto,
            offsets,
        })
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn z1(&self) -> usize {
        self.z1
    }

    pub fn proto(&self) -> &Protomatrix {
        &self.proto
    }

    pub fn rows(&self) -> usize {
        self.proto.rows() * self.z1
    }

    pub fn cols(&self) -> usize {
        self.proto.cols() * self.z1
    }

    /// Offsets of protograph cell `(r, c)`.
    pub fn cell_offsets(&self, r: usize, c: usize) -> &[usize] {
        &self.offsets[r * self.proto.cols() + c]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        let (pr, pc) = (r / self.z1, c / self.z1);
        let shift = (c % self.z1 + self.z1 - r % self.z1) % self.z1;
        self.cell_offsets(pr, pc).contains(&shift)
    }

    /// Positions of the ones, row-major.
    pub fn ones(&self) -> Vec<(usize, usize)> {
        let z = self.z1;
        let mut out = Vec::new();
        for r in 0..self.rows() {
            let pr = r / z;
            for pc in 0..self.proto.cols() {
                for &o in self.cell_offsets(pr, pc) {
                    out.push((r, pc * z + (r % z + o) % z));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// True if the one at `(r, c)` belongs to a link-diagonal identity block.
    pub fn is_link_diagonal_entry(&self, r: usize, c: usize) -> bool {
        self.layout.is_link_diagonal(r / self.z1, c / self.z1)
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut d = vec![vec![0u8; self.cols()]; self.rows()];
        for (r, c) in self.ones() {
            d[r][c] = 1;
        }
        d
    }
}

struct PartialGraph {
    var_adj: Vec<Vec<usize>>,
    chk_adj: Vec<Vec<usize>>,
}

impl PartialGraph {
    /// BFS distance from variable `v` to check `c` (in edges), or None.
    fn distance(&self, v: usize, c: usize) -> Option<usize> {
        let nv = self.var_adj.len();
        let mut dist = vec![usize::MAX; nv + self.chk_adj.len()];
        let mut q = VecDeque::new();
        dist[v] = 0;
        q.push_back(v);
        while let Some(x) = q.pop_front() {
            let next: Box<dyn Iterator<Item = usize> + '_> = if x < nv {
                Box::new(self.var_adj[x].iter().map(|&k| nv + k))
            } else {
                Box::new(self.chk_adj[x - nv].iter().copied())
            };
            for y in next {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    if y == nv + c {
                        return Some(dist[y]);
                    }
                    q.push_back(y);
                }
            }
        }
        None
    }
}

/// First-stage lift of a joint code's protomatrix by `z1`.
pub fn lift_peg(code: &JointCode, z1: usize, seed: u64) -> Result<BinaryBaseMatrix, LiftError> {
    lift_peg_proto(code.layout(), &code.assemble_joint(), z1, seed)
}

/// First-stage lift of an arbitrary joint protomatrix with the given layout.
pub fn lift_peg_proto(
    layout: Layout,
    proto: &Protomatrix,
    z1: usize,
    seed: u64,
) -> Result<BinaryBaseMatrix, LiftError> {
    let max = proto.max_entry() as usize;
    if z1 == 0 || z1 < max {
        return Err(LiftError::Infeasible { z1, max_entry: max });
    }
    let (m, n) = (proto.rows(), proto.cols());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut offsets = vec![Vec::new(); m * n];
    let mut graph = PartialGraph {
        var_adj: vec![Vec::new(); n * z1],
        chk_adj: vec![Vec::new(); m * z1],
    };
    let add_block = |graph: &mut PartialGraph, r: usize, c: usize, o: usize| {
        for i in 0..z1 {
            let (chk, var) = (r * z1 + i, c * z1 + (i + o) % z1);
            graph.var_adj[var].push(chk);
            graph.chk_adj[chk].push(var);
        }
    };

    for r in 0..m {
        for c in 0..n {
            if layout.is_link_diagonal(r, c) {
                offsets[r * n + c].push(0);
                add_block(&mut graph, r, c, 0);
            }
        }
    }

    let mut cols: Vec<usize> = (0..n).collect();
    cols.sort_by_key(|&c| proto.col_weight(c));
    for c in cols {
        for r in 0..m {
            if layout.is_link_diagonal(r, c) {
                continue;
            }
            for _ in 0..proto.get(r, c) {
                let used = &offsets[r * n + c];
                let mut candidates: Vec<usize> = (0..z1).filter(|o| !used.contains(o)).collect();
                candidates.shuffle(&mut rng);
                // the longest cycle closed by any of the block's edges wins;
                // shuffling breaks ties reproducibly
                let score = |o: usize| -> usize {
                    (0..z1)
                        .map(|i| {
                            graph
                                .distance(c * z1 + (i + o) % z1, r * z1 + i)
                                .map_or(usize::MAX, |d| d + 1)
                        })
                        .min()
                        .unwrap_or(usize::MAX)
                };
                let best = candidates
                    .iter()
                    .copied()
                    .map(|o| (score(o), o))
                    .fold(None::<(usize, usize)>, |acc, (s, o)| match acc {
                        Some((bs, _)) if bs >= s => acc,
                        _ => Some((s, o)),
                    })
                    .map(|(_, o)| o)
                    .expect("z1 >= entry guarantees a free offset");
                offsets[r * n + c].push(best);
                add_block(&mut graph, r, c, best);
            }
        }
    }
    BinaryBaseMatrix::from_offsets(layout, proto.clone(), z1, offsets)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codefile::parse_code;

    fn example1() -> JointCode {
        parse_code(include_str!("../../../../fixtures/example1_opt1.json")).unwrap()
    }

    #[test]
    fn block_weights_match_multiplicities() {
        let code = example1();
        let base = lift_peg(&code, 4, 11).unwrap();
        let proto = code.assemble_joint();
        let dense = base.to_dense();
        for pr in 0..proto.rows() {
            for pc in 0..proto.cols() {
                let b = proto.get(pr, pc) as usize;
                for i in 0..4 {
                    let row: usize = (0..4).map(|j| dense[pr * 4 + i][pc * 4 + j] as usize).sum();
                    let col: usize = (0..4).map(|j| dense[pr * 4 + j][pc * 4 + i] as usize).sum();
                    assert_eq!((row, col), (b, b), "cell ({pr}, {pc})");
                }
            }
        }
    }

    #[test]
    fn link_diagonal_is_identity_and_zero_cells_empty() {
        let code = example1();
        let base = lift_peg(&code, 4, 3).unwrap();
        let l = code.layout();
        for r in 0..l.m_s {
            assert_eq!(base.cell_offsets(r, l.link_col(r)), &[0]);
        }
        assert!(base.cell_offsets(2, 0).is_empty());
        let dense = base.to_dense();
        assert!((0..4).all(|i| (0..4).all(|j| dense[8 + i][j] == 0)));
    }

    #[test]
    fn infeasible_when_z1_too_small() {
        assert!(matches!(
            lift_peg(&example1(), 1, 0),
            Err(LiftError::Infeasible { .. })
        ));
    }

    #[test]
    fn deterministic_for_seed() {
        let code = example1();
        assert_eq!(
            lift_peg(&code, 4, 5).unwrap(),
            lift_peg(&code, 4, 5).unwrap()
        );
    }
}
