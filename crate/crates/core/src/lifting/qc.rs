//! Second lifting stage: circulant shifts on the binary base matrix.
//!
//! Every one of the base matrix becomes a `z2 x z2` circulant permutation
//! matrix (the identity cyclically right-shifted by `h` columns) and every zero
//! a zero block, written `-1`. A closed walk of length `2k` in the base graph
//! survives expansion as a `2k`-cycle iff the alternating sum of its shifts is
//! `0 mod z2`; the search below scores candidate shift assignments by the
//! surviving 4- and 6-cycles of the base graph, which decides the girth up to
//! "at least 8". The exact girth of the chosen matrix is then measured on the
//! expanded graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::peg::BinaryBaseMatrix;
use super::sparse::{Girth, SparseBinary};
use super::LiftError;
use crate::protograph::{Layout, Orientation};

const REPAIR_PASSES: usize = 64;

/// Quasi-cyclic parity-check matrix described by its shift grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QcMatrix {
    layout: Layout,
    z1: usize,
    z2: usize,
    seed: u64,
    rows: usize,
    cols: usize,
    shifts: Vec<i32>,
    girth: Girth,
}

/// Base-graph cycle candidates, as edge ids with alternating signs.
#[derive(Debug, Default)]
struct CycleSet {
    four: Vec<[usize; 4]>,
    six: Vec<[usize; 6]>,
}

struct Edges {
    pos: Vec<(usize, usize)>,
    forced: Vec<bool>,
    id: Vec<usize>,
    cols: usize,
}

impl Edges {
    fn new(base: &BinaryBaseMatrix) -> Self {
        let pos = base.ones();
        let cols = base.cols();
        let mut id = vec![usize::MAX; base.rows() * cols];
        for (e, &(r, c)) in pos.iter().enumerate() {
            id[r * cols + c] = e;
        }
        let forced = pos
            .iter()
            .map(|&(r, c)| base.is_link_diagonal_entry(r, c))
            .collect();
        Edges {
            pos,
            forced,
            id,
            cols,
        }
    }

    fn at(&self, r: usize, c: usize) -> Option<usize> {
        let e = self.id[r * self.cols + c];
        (e != usize::MAX).then_some(e)
    }
}

fn enumerate_cycles(base: &BinaryBaseMatrix, edges: &Edges) -> CycleSet {
    let (rows, cols) = (base.rows(), base.cols());
    let mut row_adj = vec![Vec::new(); rows];
    let mut col_adj = vec![Vec::new(); cols];
    for &(r, c) in &edges.pos {
        row_adj[r].push(c);
        col_adj[c].push(r);
    }
    let mut set = CycleSet::default();
    // canonical form: c1 is the smallest column, r1 < (last row)
    for c1 in 0..cols {
        for (i, &r1) in col_adj[c1].iter().enumerate() {
            for &rl in &col_adj[c1][i + 1..] {
                let e1 = edges.at(r1, c1).unwrap();
                let el = edges.at(rl, c1).unwrap();
                for &c2 in &row_adj[r1] {
                    if c2 <= c1 {
                        continue;
                    }
                    let e2 = edges.at(r1, c2).unwrap();
                    if let Some(e3) = edges.at(rl, c2) {
                        // c1 -r1- c2 -rl- c1
                        set.four.push([e1, e2, e3, el]);
                    }
                    for &r2 in &col_adj[c2] {
                        if r2 == r1 || r2 == rl {
                            continue;
                        }
                        let e3 = edges.at(r2, c2).unwrap();
                        for &c3 in &row_adj[r2] {
                            if c3 <= c1 || c3 == c2 {
                                continue;
                            }
                            if let Some(e5) = edges.at(rl, c3) {
                                let e4 = edges.at(r2, c3).unwrap();
                                // c1 -r1- c2 -r2- c3 -rl- c1
                                set.six.push([e1, e2, e3, e4, e5, el]);
                            }
                        }
                    }
                }
            }
        }
    }
    set
}

#[inline]
fn alternating_sum<const N: usize>(cycle: &[usize; N], shifts: &[i64], z2: i64) -> i64 {
    let mut s = 0;
    for (k, &e) in cycle.iter().enumerate() {
        if k % 2 == 0 {
            s += shifts[e];
        } else {
            s -= shifts[e];
        }
    }
    s.rem_euclid(z2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Score {
    /// 4, 6 or 8 (meaning "at least 8").
    girth: usize,
    shortest: usize,
}

impl Score {
    fn better_than(self, other: Score) -> bool {
        self.girth > other.girth || (self.girth == other.girth && self.shortest < other.shortest)
    }
}

fn score(shifts: &[i64], cycles: &CycleSet, z2: i64) -> Score {
    let four = cycles
        .four
        .iter()
        .filter(|c| alternating_sum(c, shifts, z2) == 0)
        .count();
    if four > 0 {
        return Score {
            girth: 4,
            shortest: four,
        };
    }
    let six = cycles
        .six
        .iter()
        .filter(|c| alternating_sum(c, shifts, z2) == 0)
        .count();
    if six > 0 {
        Score {
            girth: 6,
            shortest: six,
        }
    } else {
        Score {
            girth: 8,
            shortest: 0,
        }
    }
}

fn candidate(edges: &Edges, cycles: &CycleSet, z2: usize, seed: u64, index: usize) -> Vec<i64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let z = z2 as i64;
    let mut shifts: Vec<i64> = edges
        .forced
        .iter()
        .map(|&f| if f { 0 } else { rng.gen_range(0..z) })
        .collect();
    for _ in 0..REPAIR_PASSES {
        let mut clean = true;
        for c in &cycles.four {
            if alternating_sum(c, &shifts, z) != 0 {
                continue;
            }
            clean = false;
            let free: Vec<usize> = c.iter().copied().filter(|&e| !edges.forced[e]).collect();
            let e = free[rng.gen_range(0..free.len())];
            shifts[e] = rng.gen_range(0..z);
        }
        if clean {
            break;
        }
    }
    shifts
}

/// Second-stage lift: picks, among `attempts` seeded candidates, the shift
/// assignment with the largest girth (fewest shortest cycles on ties, lowest
/// candidate index after that). Link-diagonal blocks keep shift 0.
pub fn lift_qc(
    base: &BinaryBaseMatrix,
    z2: usize,
    seed: u64,
    attempts: usize,
) -> Result<QcMatrix, LiftError> {
    if z2 < 2 {
        return Err(LiftError::Structure(format!(
            "z2 must be at least 2, got {z2}"
        )));
    }
    let edges = Edges::new(base);
    let cycles = enumerate_cycles(base, &edges);
    let z = z2 as i64;
    let scored: Vec<(usize, Score)> = (0..attempts.max(1))
        .into_par_iter()
        .map(|i| {
            let shifts = candidate(&edges, &cycles, z2, seed, i);
            (i, score(&shifts, &cycles, z))
        })
        .collect();
    let (best_index, best) = scored
        .into_iter()
        .reduce(|a, b| if b.1.better_than(a.1) { b } else { a })
        .expect("at least one attempt");
    if best.girth < 6 {
        return Err(LiftError::GirthFailure {
            attempts: attempts.max(1),
            four_cycles: best.shortest,
        });
    }
    let shifts = candidate(&edges, &cycles, z2, seed, best_index);
    let mut grid = vec![-1i32; base.rows() * base.cols()];
    for (e, &(r, c)) in edges.pos.iter().enumerate() {
        grid[r * base.cols() + c] = shifts[e] as i32;
    }
    let mut qc = QcMatrix {
        layout: base.layout(),
        z1: base.z1(),
        z2,
        seed,
        rows: base.rows(),
        cols: base.cols(),
        shifts: grid,
        girth: Girth::Acyclic,
    };
    qc.girth = qc.measure_girth();
    Ok(qc)
}

impl QcMatrix {
    /// Builds a matrix from an explicit shift grid and validates it.
    pub fn from_shifts(
        layout: Layout,
        z1: usize,
        z2: usize,
        seed: u64,
        shifts: Vec<Vec<i32>>,
    ) -> Result<Self, LiftError> {
        let rows = layout.rows() * z1;
        let cols = layout.cols() * z1;
        if shifts.len() != rows || shifts.iter().any(|r| r.len() != cols) {
            return Err(LiftError::Structure(format!(
                "shift grid must be {rows}x{cols}"
            )));
        }
        let grid: Vec<i32> = shifts.into_iter().flatten().collect();
        if let Some(&bad) = grid.iter().find(|&&h| h < -1 || h >= z2 as i32) {
            return Err(LiftError::Structure(format!(
                "shift {bad} outside -1..{z2}"
            )));
        }
        let mut qc = QcMatrix {
            layout,
            z1,
            z2,
            seed,
            rows,
            cols,
            shifts: grid,
            girth: Girth::Acyclic,
        };
        qc.girth = qc.measure_girth();
        Ok(qc)
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn z1(&self) -> usize {
        self.z1
    }

    pub fn z2(&self) -> usize {
        self.z2
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Rows of the shift grid (`(m_s + m_c) z1`).
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Columns of the shift grid (`(n_s + n_c) z1`).
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn girth(&self) -> Girth {
        self.girth
    }

    /// Shift at grid position `(r, c)`, or `None` for a zero block.
    #[inline]
    pub fn shift(&self, r: usize, c: usize) -> Option<usize> {
        let h = self.shifts[r * self.cols + c];
        (h >= 0).then_some(h as usize)
    }

    /// Non-zero blocks of grid row `r` as `(col, shift)`.
    pub fn row_blocks(&self, r: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.cols).filter_map(move |c| self.shift(r, c).map(|h| (c, h)))
    }

    pub fn shift_rows(&self) -> Vec<Vec<i32>> {
        self.shifts.chunks(self.cols).map(<[i32]>::to_vec).collect()
    }

    /// Number of expanded variable nodes.
    pub fn n(&self) -> usize {
        self.cols * self.z2
    }

    /// Number of expanded check nodes.
    pub fn m(&self) -> usize {
        self.rows * self.z2
    }

    /// Source bits per frame, `n_s z1 z2`.
    pub fn source_len(&self) -> usize {
        self.layout.n_s * self.z1 * self.z2
    }

    /// Compressed bits per frame, `m_s z1 z2`.
    pub fn compressed_len(&self) -> usize {
        self.layout.m_s * self.z1 * self.z2
    }

    /// Channel parity bits per frame, `m_c z1 z2`.
    pub fn parity_len(&self) -> usize {
        self.layout.m_c * self.z1 * self.z2
    }

    /// Grid column of the compressed-bit group for source row group `j`.
    #[inline]
    pub fn link_group_col(&self, j: usize) -> usize {
        self.layout.link_start() * self.z1 + j
    }

    /// Source row groups in the order the triangular back-substitution
    /// visits them.
    pub fn link_order(&self) -> Vec<usize> {
        let groups = self.layout.m_s * self.z1;
        match self.layout.orientation {
            Orientation::Lower => (0..groups).collect(),
            Orientation::Upper => (0..groups).rev().collect(),
        }
    }

    /// Expands to the full binary parity-check matrix.
    pub fn expand(&self) -> SparseBinary {
        let z = self.z2;
        let mut entries = Vec::with_capacity(self.shifts.iter().filter(|&&h| h >= 0).count() * z);
        for r in 0..self.rows {
            for (c, h) in self.row_blocks(r) {
                for i in 0..z {
                    entries.push((r * z + i, c * z + (i + h) % z));
                }
            }
        }
        SparseBinary::from_entries(self.m(), self.n(), entries)
    }

    /// Exact girth of the expansion. Cyclically rotating every block is an
    /// automorphism, so one root per grid column suffices.
    fn measure_girth(&self) -> Girth {
        self.expand()
            .girth_from((0..self.cols).map(|c| c * self.z2))
    }

    /// Text persistence: header lines then one grid row per line.
    pub fn to_text(&self) -> String {
        let l = self.layout;
        let mut out = String::new();
        out.push_str("qc-matrix\n");
        out.push_str(&format!("z1 {}\nz2 {}\n", self.z1, self.z2));
        out.push_str(&format!("dims {} {}\n", self.rows, self.cols));
        out.push_str(&format!(
            "layout {} {} {} {} {}\n",
            l.m_s, l.n_s, l.m_c, l.n_c, l.orientation
        ));
        out.push_str(&format!("girth {}\nseed {}\n", self.girth, self.seed));
        for row in self.shifts.chunks(self.cols) {
            let cells: Vec<String> = row.iter().map(i32::to_string).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, LiftError> {
        let bad = |line: usize, msg: &str| LiftError::Parse {
            line,
            message: msg.to_string(),
        };
        let mut lines = text.lines().enumerate();
        let mut header = |key: &str| -> Result<(usize, Vec<String>), LiftError> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| bad(0, "unexpected end of file"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(bad(i + 1, &format!("expected `{key}`")));
            }
            Ok((i + 1, parts.map(str::to_string).collect()))
        };
        header("qc-matrix")?;
        let num = |(line, v): (usize, Vec<String>), k: usize| -> Result<usize, LiftError> {
            v.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(line, "expected an integer"))
        };
        let z1 = num(header("z1")?, 0)?;
        let z2 = num(header("z2")?, 0)?;
        let dims = header("dims")?;
        let (rows, cols) = (num(dims.clone(), 0)?, num(dims, 1)?);
        let lay = header("layout")?;
        let orientation = match lay.1.get(4).map(String::as_str) {
            Some("lower") => Orientation::Lower,
            Some("upper") => Orientation::Upper,
            _ => return Err(bad(lay.0, "orientation must be lower or upper")),
        };
        let layout = Layout {
            m_s: num(lay.clone(), 0)?,
            n_s: num(lay.clone(), 1)?,
            m_c: num(lay.clone(), 2)?,
            n_c: num(lay, 3)?,
            orientation,
        };
        let girth_line = header("girth")?;
        let seed_line = header("seed")?;
        let seed: u64 = seed_line
            .1
            .first()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad(seed_line.0, "expected an integer"))?;
        let mut grid = Vec::with_capacity(rows);
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let row: Result<Vec<i32>, _> = line.split_whitespace().map(str::parse).collect();
            grid.push(row.map_err(|_| bad(i + 1, "malformed shift"))?);
        }
        if layout.rows() * z1 != rows || layout.cols() * z1 != cols {
            return Err(bad(0, "dims disagree with layout and z1"));
        }
        let qc = QcMatrix::from_shifts(layout, z1, z2, seed, grid)?;
        if girth_line.1.first().map(String::as_str) != Some(&qc.girth.to_string()) {
            return Err(bad(
                girth_line.0,
                "recorded girth does not match the shifts",
            ));
        }
        Ok(qc)
    }
}
