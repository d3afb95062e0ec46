//! Protomatrices and the joint double-protograph code structure.
//!
//! A joint code is assembled from a source protomatrix `B_s` (`m_s x n_s`), a
//! channel protomatrix `B_c` (`m_c x n_c`) and a triangular linking matrix `T`
//! (`m_s x m_s`, unit diagonal). The joint protomatrix is
//!
//! ```text
//!     | B_s   0_{m_s x m_c}  T |
//!     | 0_{m_c x n_s}     B_c  |
//! ```
//!
//! so the compressed source bits occupy the last `m_s` channel columns and the
//! first `m_c` channel columns carry channel parity.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// Default bound on protomatrix entries.
pub const DEFAULT_MAX_ENTRY: u32 = 3;

/// Errors raised while building or parsing codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CodeError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("division by zero: every channel column is punctured")]
    AllPunctured,
}

/// Dense matrix of non-negative edge multiplicities.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Protomatrix {
    rows: usize,
    cols: usize,
    entries: Vec<u32>,
}

impl Protomatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<u32>) -> Result<Self, CodeError> {
        if rows == 0 || cols == 0 {
            return Err(CodeError::DimensionMismatch(format!(
                "protomatrix must be non-empty, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(CodeError::DimensionMismatch(format!(
                "{rows}x{cols} protomatrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        Ok(Protomatrix {
            rows,
            cols,
            entries,
        })
    }

    /// Builds a matrix from row vectors, which must all have the same length.
    pub fn from_rows<R: AsRef<[u32]>>(rows: &[R]) -> Result<Self, CodeError> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some((i, r)) = rows
            .iter()
            .enumerate()
            .find(|(_, r)| r.as_ref().len() != cols)
        {
            return Err(CodeError::DimensionMismatch(format!(
                "row {} has {} entries, expected {cols}",
                i + 1,
                r.as_ref().len()
            )));
        }
        let entries = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Protomatrix::new(rows.len(), cols, entries)
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty protomatrix");
        Protomatrix {
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Protomatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.entries[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<u32>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    /// Sum of multiplicities in row `r` (check-node degree).
    pub fn row_weight(&self, r: usize) -> u32 {
        self.row(r).iter().sum()
    }

    /// Sum of multiplicities in column `c` (variable-node degree).
    pub fn col_weight(&self, c: usize) -> u32 {
        (0..self.rows).map(|r| self.get(r, c)).sum()
    }

    pub fn max_entry(&self) -> u32 {
        self.entries.iter().copied().max().unwrap_or(0)
    }

    pub fn total_edges(&self) -> u32 {
        self.entries.iter().sum()
    }

    /// Checks the entry bound and, for matrices used on their own, that no row
    /// or column is empty.
    pub fn validate_standalone(&self, name: &str, max_entry: u32) -> Result<(), CodeError> {
        self.check_bound(name, max_entry)?;
        if let Some(r) = (0..self.rows).find(|&r| self.row_weight(r) == 0) {
            return Err(CodeError::Constraint(format!(
                "{name}: row {} is all-zero",
                r + 1
            )));
        }
        if let Some(c) = (0..self.cols).find(|&c| self.col_weight(c) == 0) {
            return Err(CodeError::Constraint(format!(
                "{name}: column {} is all-zero",
                c + 1
            )));
        }
        Ok(())
    }

    fn check_bound(&self, name: &str, max_entry: u32) -> Result<(), CodeError> {
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) > max_entry {
                    return Err(CodeError::Constraint(format!(
                        "{name}: entry ({}, {}) = {} exceeds the maximum {max_entry}",
                        r + 1,
                        c + 1,
                        self.get(r, c)
                    )));
                }
            }
        }
        Ok(())
    }

    /// True if the protograph (as a bipartite graph) is connected.
    pub fn is_connected(&self) -> bool {
        let n = self.rows + self.cols;
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            let neighbours: Vec<usize> = if v < self.rows {
                (0..self.cols)
                    .filter(|&c| self.get(v, c) > 0)
                    .map(|c| self.rows + c)
                    .collect()
            } else {
                let c = v - self.rows;
                (0..self.rows).filter(|&r| self.get(r, c) > 0).collect()
            };
            for w in neighbours {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

impl fmt::Display for Protomatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(u32::to_string).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// Which side of the diagonal a triangular link may populate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Lower,
    Upper,
}

impl Orientation {
    /// True if `(i, j)` lies strictly on the side this orientation allows.
    #[inline]
    pub fn allows(self, i: usize, j: usize) -> bool {
        match self {
            Orientation::Lower => j < i,
            Orientation::Upper => j > i,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Orientation::Lower => "lower",
            Orientation::Upper => "upper",
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Unit-diagonal triangular source-check/channel-variable link block.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriangularLink {
    orientation: Orientation,
    matrix: Protomatrix,
}

impl TriangularLink {
    pub fn new(
        orientation: Orientation,
        matrix: Protomatrix,
        max_entry: u32,
    ) -> Result<Self, CodeError> {
        if matrix.rows() != matrix.cols() {
            return Err(CodeError::DimensionMismatch(format!(
                "link matrix must be square, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let n = matrix.rows();
        for i in 0..n {
            for j in 0..n {
                let v = matrix.get(i, j);
                if i == j {
                    if v != 1 {
                        return Err(CodeError::Constraint(format!(
                            "link diagonal entry ({}, {}) must be 1, got {v}",
                            i + 1,
                            j + 1
                        )));
                    }
                } else if !orientation.allows(i, j) {
                    if v != 0 {
                        return Err(CodeError::Constraint(format!(
                            "{orientation}-triangular link has non-zero entry ({}, {}) = {v}",
                            i + 1,
                            j + 1
                        )));
                    }
                } else if v > max_entry {
                    return Err(CodeError::Constraint(format!(
                        "link entry ({}, {}) = {v} exceeds the maximum {max_entry}",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(TriangularLink {
            orientation,
            matrix,
        })
    }

    pub fn identity(size: usize, orientation: Orientation) -> Self {
        TriangularLink {
            orientation,
            matrix: Protomatrix::identity(size),
        }
    }

    pub fn size(&self) -> usize {
        self.matrix.rows()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn matrix(&self) -> &Protomatrix {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.matrix.get(i, j)
    }

    pub fn is_identity(&self) -> bool {
        self.matrix == Protomatrix::identity(self.size())
    }
}

/// Code rates of a joint code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodeRates {
    /// Source compression rate `n_s / m_s`.
    pub source: f64,
    /// Channel code rate `m_s / (n_c - n_p)`.
    pub channel: f64,
    /// Overall rate, source bits per transmitted channel symbol.
    pub overall: f64,
}

/// Block dimensions of a joint protomatrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Layout {
    pub m_s: usize,
    pub n_s: usize,
    pub m_c: usize,
    pub n_c: usize,
    pub orientation: Orientation,
}

impl Layout {
    pub fn rows(&self) -> usize {
        self.m_s + self.m_c
    }

    pub fn cols(&self) -> usize {
        self.n_s + self.n_c
    }

    /// Joint column holding the compressed bits linked to source check `r`.
    #[inline]
    pub fn link_col(&self, r: usize) -> usize {
        self.n_s + self.m_c + r
    }

    /// First joint column of the channel parity block.
    pub fn parity_start(&self) -> usize {
        self.n_s
    }

    /// First joint column of the compressed-bit (link) block.
    pub fn link_start(&self) -> usize {
        self.n_s + self.m_c
    }

    /// True if joint cell `(r, c)` is a diagonal entry of the link block.
    #[inline]
    pub fn is_link_diagonal(&self, r: usize, c: usize) -> bool {
        r < self.m_s && c == self.link_col(r)
    }
}

/// A complete joint source-channel code description.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCode {
    id: Option<String>,
    source: Protomatrix,
    channel: Protomatrix,
    link: TriangularLink,
    /// 1-based channel-column indices.
    punctured: BTreeSet<usize>,
    p1: f64,
    max_entry: u32,
}

impl JointCode {
    pub fn new(
        source: Protomatrix,
        channel: Protomatrix,
        link: TriangularLink,
        punctured: impl IntoIterator<Item = usize>,
        p1: f64,
    ) -> Result<Self, CodeError> {
        Self::with_max_entry(source, channel, link, punctured, p1, DEFAULT_MAX_ENTRY)
    }

    pub fn with_max_entry(
        source: Protomatrix,
        channel: Protomatrix,
        link: TriangularLink,
        punctured: impl IntoIterator<Item = usize>,
        p1: f64,
        max_entry: u32,
    ) -> Result<Self, CodeError> {
        let m_s = source.rows();
        let (m_c, n_c) = (channel.rows(), channel.cols());
        if link.size() != m_s {
            return Err(CodeError::DimensionMismatch(format!(
                "link is {0}x{0} but the source protomatrix has {m_s} rows",
                link.size()
            )));
        }
        if n_c != m_c + m_s {
            return Err(CodeError::DimensionMismatch(format!(
                "channel protomatrix must have n_c = m_c + m_s = {} columns, got {n_c}",
                m_c + m_s
            )));
        }
        source.validate_standalone("B_s", max_entry)?;
        channel.validate_standalone("B_c", max_entry)?;
        // re-check the link bound in case it was built with a looser one
        TriangularLink::new(link.orientation(), link.matrix().clone(), max_entry)?;

        let mut set = BTreeSet::new();
        for idx in punctured {
            if idx == 0 || idx > n_c {
                return Err(CodeError::Constraint(format!(
                    "punctured index {idx} is outside the channel columns 1..={n_c}"
                )));
            }
            if !set.insert(idx) {
                return Err(CodeError::Constraint(format!(
                    "punctured index {idx} listed twice"
                )));
            }
        }
        if set.len() >= n_c {
            return Err(CodeError::AllPunctured);
        }
        if !(p1 > 0.0 && p1 <= 0.5) {
            return Err(CodeError::Constraint(format!(
                "source probability p1 = {p1} must lie in (0, 0.5]"
            )));
        }
        Ok(JointCode {
            id: None,
            source,
            channel,
            link,
            punctured: set,
            p1,
            max_entry,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = Some(id.into());
        self
    }

    pub fn id(&self) -> Option<&str> {
        self.id.as_deref()
    }

    pub fn source(&self) -> &Protomatrix {
        &self.source
    }

    pub fn channel(&self) -> &Protomatrix {
        &self.channel
    }

    pub fn link(&self) -> &TriangularLink {
        &self.link
    }

    /// 1-based punctured channel columns.
    pub fn punctured(&self) -> &BTreeSet<usize> {
        &self.punctured
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn max_entry(&self) -> u32 {
        self.max_entry
    }

    pub fn layout(&self) -> Layout {
        Layout {
            m_s: self.source.rows(),
            n_s: self.source.cols(),
            m_c: self.channel.rows(),
            n_c: self.channel.cols(),
            orientation: self.link.orientation(),
        }
    }

    /// True if 0-based joint column `c` is a punctured channel column.
    pub fn is_punctured_joint_col(&self, c: usize) -> bool {
        let n_s = self.source.cols();
        c >= n_s && self.punctured.contains(&(c - n_s + 1))
    }

    /// Same code with a different link block.
    pub fn with_link(&self, link: TriangularLink) -> Result<Self, CodeError> {
        let mut code = JointCode::with_max_entry(
            self.source.clone(),
            self.channel.clone(),
            link,
            self.punctured.iter().copied(),
            self.p1,
            self.max_entry,
        )?;
        code.id = self.id.clone();
        Ok(code)
    }

    /// Same code with a different channel protomatrix.
    pub fn with_channel(&self, channel: Protomatrix) -> Result<Self, CodeError> {
        let mut code = JointCode::with_max_entry(
            self.source.clone(),
            channel,
            self.link.clone(),
            self.punctured.iter().copied(),
            self.p1,
            self.max_entry,
        )?;
        code.id = self.id.clone();
        Ok(code)
    }

    /// Same code with a different source protomatrix.
    pub fn with_source(&self, source: Protomatrix) -> Result<Self, CodeError> {
        let mut code = JointCode::with_max_entry(
            source,
            self.channel.clone(),
            self.link.clone(),
            self.punctured.iter().copied(),
            self.p1,
            self.max_entry,
        )?;
        code.id = self.id.clone();
        Ok(code)
    }

    pub fn with_punctured(
        &self,
        punctured: impl IntoIterator<Item = usize>,
    ) -> Result<Self, CodeError> {
        let mut code = JointCode::with_max_entry(
            self.source.clone(),
            self.channel.clone(),
            self.link.clone(),
            punctured,
            self.p1,
            self.max_entry,
        )?;
        code.id = self.id.clone();
        Ok(code)
    }

    /// The traditional counterpart: identical except `T = I`.
    pub fn traditional(&self) -> Self {
        let mut code = self.clone();
        code.link = TriangularLink::identity(self.link.size(), self.link.orientation());
        code
    }

    /// The joint protomatrix `[B_s | 0 T ; 0 | B_c]`.
    pub fn assemble_joint(&self) -> Protomatrix {
        let l = self.layout();
        let mut joint = Protomatrix::zeros(l.rows(), l.cols());
        for r in 0..l.m_s {
            for c in 0..l.n_s {
                joint.set(r, c, self.source.get(r, c));
            }
            for k in 0..l.m_s {
                joint.set(r, l.link_start() + k, self.link.get(r, k));
            }
        }
        for r in 0..l.m_c {
            for c in 0..l.n_c {
                joint.set(l.m_s + r, l.n_s + c, self.channel.get(r, c));
            }
        }
        joint
    }

    /// Source, channel and overall rates.
    pub fn rates(&self) -> Result<CodeRates, CodeError> {
        let l = self.layout();
        let transmitted = l.n_c - self.punctured.len();
        if transmitted == 0 {
            return Err(CodeError::AllPunctured);
        }
        let source = l.n_s as f64 / l.m_s as f64;
        let channel = l.m_s as f64 / transmitted as f64;
        Ok(CodeRates {
            source,
            channel,
            overall: source * channel,
        })
    }

    /// Number of transmitted channel columns `n_c - n_p`.
    pub fn transmitted_cols(&self) -> usize {
        self.channel.cols() - self.punctured.len()
    }
}
