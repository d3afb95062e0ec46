//! Sparse binary matrices, Tanner-graph girth and alist export.

use std::collections::VecDeque;
use std::fmt;

/// Length of the shortest cycle of a Tanner graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Girth {
    Finite(usize),
    /// No cycles at all. Orders above every finite girth.
    Acyclic,
}

impl Girth {
    pub fn at_least(self, len: usize) -> bool {
        match self {
            Girth::Finite(g) => g >= len,
            Girth::Acyclic => true,
        }
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Acyclic => f.write_str("acyclic"),
        }
    }
}

/// Binary matrix in compressed row and column form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseBinary {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    col_ptr: Vec<usize>,
    col_idx: Vec<usize>,
}

impl SparseBinary {
    /// Builds from `(row, col)` positions of the ones. Duplicates are an error
    /// in the caller and trip a debug assertion.
    pub fn from_entries(rows: usize, cols: usize, mut entries: Vec<(usize, usize)>) -> Self {
        entries.sort_unstable();
        debug_assert!(entries.windows(2).all(|w| w[0] != w[1]), "duplicate entry");
        let mut row_ptr = vec![0; rows + 1];
        let mut col_ptr = vec![0; cols + 1];
        for &(r, c) in &entries {
            assert!(r < rows && c < cols, "entry ({r}, {c}) out of range");
            row_ptr[r + 1] += 1;
            col_ptr[c + 1] += 1;
        }
        for i in 0..rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        let row_idx: Vec<usize> = entries.iter().map(|&(_, c)| c).collect();
        let mut col_idx = vec![0; entries.len()];
        let mut fill = col_ptr.clone();
        for &(r, c) in &entries {
            col_idx[fill[c]] = r;
            fill[c] += 1;
        }
        SparseBinary {
            rows,
            cols,
            row_ptr,
            row_idx,
            col_ptr,
            col_idx,
        }
    }

    pub fn from_dense(rows: &[Vec<u8>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter()
                    .enumerate()
                    .filter(|(_, &v)| v != 0)
                    .map(move |(c, _)| (r, c))
            })
            .collect();
        SparseBinary::from_entries(rows.len(), cols, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    /// Column indices of the ones in row `r`.
    pub fn row(&self, r: usize) -> &[usize] {
        &self.row_idx[self.row_ptr[r]..self.row_ptr[r + 1]]
    }

    /// Row indices of the ones in column `c`.
    pub fn col(&self, c: usize) -> &[usize] {
        &self.col_idx[self.col_ptr[c]..self.col_ptr[c + 1]]
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.row(r).binary_search(&c).is_ok()
    }

    /// `H x` over GF(2).
    pub fn mul_vec(&self, x: &[u8]) -> Vec<u8> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|r| self.row(r).iter().fold(0u8, |acc, &c| acc ^ (x[c] & 1)))
            .collect()
    }

    /// Exact girth: shortest cycle over breadth-first searches from every
    /// variable node.
    pub fn girth(&self) -> Girth {
        self.girth_from(0..self.cols)
    }

    /// Shortest cycle through any of the given variable nodes. Equals the
    /// girth when the roots cover every orbit of the graph's automorphisms.
    pub fn girth_from(&self, roots: impl IntoIterator<Item = usize>) -> Girth {
        let n = self.cols + self.rows;
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        let mut touched = Vec::new();
        let mut queue = VecDeque::new();
        let mut best = usize::MAX;
        for root in roots {
            for &v in &touched {
                dist[v] = usize::MAX;
                parent[v] = usize::MAX;
            }
            touched.clear();
            queue.clear();
            dist[root] = 0;
            touched.push(root);
            queue.push_back(root);
            'bfs: while let Some(v) = queue.pop_front() {
                if 2 * dist[v] + 1 >= best {
                    break;
                }
                // variable nodes are 0..cols, checks are cols..cols+rows
                let neighbours: &[usize] = if v < self.cols {
                    self.col(v)
                } else {
                    self.row(v - self.cols)
                };
                for &w in neighbours {
                    let w = if v < self.cols { w + self.cols } else { w };
                    if w == parent[v] {
                        continue;
                    }
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        parent[w] = v;
                        touched.push(w);
                        queue.push_back(w);
                    } else {
                        best = best.min(dist[v] + dist[w] + 1);
                        if 2 * dist[v] + 1 >= best {
                            break 'bfs;
                        }
                    }
                }
            }
        }
        if best == usize::MAX {
            Girth::Acyclic
        } else {
            Girth::Finite(best)
        }
    }

    /// MacKay alist text (1-based indices, zero padded).
    pub fn to_alist(&self) -> String {
        let col_w: Vec<usize> = (0..self.cols).map(|c| self.col(c).len()).collect();
        let row_w: Vec<usize> = (0..self.rows).map(|r| self.row(r).len()).collect();
        let max_c = col_w.iter().copied().max().unwrap_or(0);
        let max_r = row_w.iter().copied().max().unwrap_or(0);
        let join = |v: &mut dyn Iterator<Item = usize>| {
            v.map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
        };
        let mut out = format!("{} {}\n{} {}\n", self.cols, self.rows, max_c, max_r);
        out.push_str(&join(&mut col_w.iter().copied()));
        out.push('\n');
        out.push_str(&join(&mut row_w.iter().copied()));
        out.push('\n');
        for c in 0..self.cols {
            let mut idx: Vec<usize> = self.col(c).iter().map(|r| r + 1).collect();
            idx.resize(max_c, 0);
            out.push_str(&join(&mut idx.into_iter()));
            out.push('\n');
        }
        for r in 0..self.rows {
            let mut idx: Vec<usize> = self.row(r).iter().map(|c| c + 1).collect();
            idx.resize(max_r, 0);
            out.push_str(&join(&mut idx.into_iter()));
            out.push('\n');
        }
        out
    }
}
