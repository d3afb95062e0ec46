//! Packed GF(2) vectors and a PLU factorisation for rank-deficient systems.

use thiserror::Error;

/// Fixed-length bit vector packed into `u64` words.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Bits {
    len: usize,
    words: Vec<u64>,
}

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Bits::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i);
            }
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        (self.words[i >> 6] >> (i & 63)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.words[i >> 6] |= 1 << (i & 63);
    }

    #[inline]
    pub fn clear(&mut self, i: usize) {
        self.words[i >> 6] &= !(1 << (i & 63));
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        self.words[i >> 6] ^= 1 << (i & 63);
    }

    pub fn assign(&mut self, i: usize, v: bool) {
        if v {
            self.set(i)
        } else {
            self.clear(i)
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// `self ^= other`, touching only words from `from_word` on.
    #[inline]
    pub fn xor_from(&mut self, other: &Bits, from_word: usize) {
        for (a, b) in self.words[from_word..]
            .iter_mut()
            .zip(&other.words[from_word..])
        {
            *a ^= *b;
        }
    }

    pub fn xor_assign(&mut self, other: &Bits) {
        self.xor_from(other, 0);
    }

    /// Parity of `self & other`.
    #[inline]
    pub fn dot(&self, other: &Bits) -> bool {
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }
}

/// The right-hand side is outside the column space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("GF(2) system is inconsistent for this right-hand side")]
pub struct Inconsistent;

/// `P A = L U` over GF(2) with row pivoting; free columns are allowed.
///
/// `A` is `n_rows x n_cols`. Columns without a pivot are free variables and
/// are set to zero by [`Gf2Lu::solve`]. Rows `rank..n_rows` of `U` are zero and
/// their rows of `L^{-1} P` span the left null space of `A`.
#[derive(Debug, Clone)]
pub struct Gf2Lu {
    n_rows: usize,
    n_cols: usize,
    upper: Vec<Bits>,
    lower: Vec<Bits>,
    /// `perm[i]` is the original row now at position `i`.
    perm: Vec<usize>,
    pivot_cols: Vec<usize>,
}

impl Gf2Lu {
    pub fn factor(rows: Vec<Bits>, n_cols: usize) -> Self {
        let n_rows = rows.len();
        assert!(
            rows.iter().all(|r| r.len() == n_cols),
            "ragged GF(2) matrix"
        );
        let mut upper = rows;
        let mut lower: Vec<Bits> = (0..n_rows).map(|_| Bits::zeros(n_rows)).collect();
        let mut perm: Vec<usize> = (0..n_rows).collect();
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in 0..n_cols {
            if rank == n_rows {
                break;
            }
            let Some(p) = (rank..n_rows).find(|&r| upper[r].get(col)) else {
                continue;
            };
            upper.swap(rank, p);
            lower.swap(rank, p);
            perm.swap(rank, p);
            let word = col >> 6;
            let (head, tail) = upper.split_at_mut(rank + 1);
            let pivot = &head[rank];
            for (offset, row) in tail.iter_mut().enumerate() {
                if row.get(col) {
                    row.xor_from(pivot, word);
                    lower[rank + 1 + offset].set(rank);
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        Gf2Lu {
            n_rows,
            n_cols,
            upper,
            lower,
            perm,
            pivot_cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Dimension of the left null space.
    pub fn row_deficiency(&self) -> usize {
        self.n_rows - self.rank()
    }

    pub fn pivot_cols(&self) -> &[usize] {
        &self.pivot_cols
    }

    fn forward(&self, b: &Bits) -> Bits {
        assert_eq!(b.len(), self.n_rows);
        let mut y = Bits::zeros(self.n_rows);
        for i in 0..self.n_rows {
            let v = b.get(self.perm[i]) ^ self.lower[i].dot(&y);
            y.assign(i, v);
        }
        y
    }

    /// Solves `A x = b`, with free variables set to zero.
    pub fn solve(&self, b: &Bits) -> Result<Bits, Inconsistent> {
        let y = self.forward(b);
        let rank = self.rank();
        if (rank..self.n_rows).any(|i| y.get(i)) {
            return Err(Inconsistent);
        }
        let mut x = Bits::zeros(self.n_cols);
        for k in (0..rank).rev() {
            let v = y.get(k) ^ self.upper[k].dot(&x);
            x.assign(self.pivot_cols[k], v);
        }
        Ok(x)
    }

    /// Basis of `{ c : c^T A = 0 }`; `A x = b` is solvable iff `c . b = 0` for
    /// every returned `c`.
    pub fn left_null_space(&self) -> Vec<Bits> {
        (self.rank()..self.n_rows)
            .map(|i| {
                // solve L^T z = e_i
                let mut z = Bits::zeros(self.n_rows);
                z.set(i);
                for r in (0..self.n_rows).rev() {
                    if z.get(r) {
                        let mut row = self.lower[r].clone();
                        // L has a unit diagonal that is not stored
                        row.clear(r);
                        z.xor_assign(&row);
                        z.set(r);
                    }
                }
                let mut c = Bits::zeros(self.n_rows);
                for k in z.ones() {
                    c.set(self.perm[k]);
                }
                c
            })
            .collect()
    }
}

/// Row-reduces `rows` to reduced echelon form in place; returns pivot columns.
pub fn rref(rows: &mut Vec<Bits>) -> Vec<usize> {
    let Some(n_cols) = rows.first().map(Bits::len) else {
        return Vec::new();
    };
    let mut pivots = Vec::new();
    let mut rank = 0;
    for col in 0..n_cols {
        if rank == rows.len() {
            break;
        }
        let Some(p) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot);
            }
        }
        pivots.push(col);
        rank += 1;
    }
    rows.truncate(rank);
    pivots
}
