//! Encoder and decoder complexity and latency of a linked code relative to
//! its identity-linked counterpart, computed exactly from row weights.

use std::fmt;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::protograph::JointCode;

pub type Rational = Ratio<i64>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("degenerate comparison: {0}")]
    Degenerate(String),
    #[error("codes have different layouts")]
    Layout,
}

/// `ceil(log2 w)` for `w >= 1`.
pub fn ceil_log2(w: u32) -> i64 {
    if w <= 1 {
        0
    } else {
        (32 - (w - 1).leading_zeros()) as i64
    }
}

/// Row weights of `B_s` (one per source row).
pub fn source_row_weights(code: &JointCode) -> Vec<u32> {
    (0..code.source().rows())
        .map(|r| code.source().row_weight(r))
        .collect()
}

/// Row weights of the link block `T`.
pub fn link_row_weights(code: &JointCode) -> Vec<u32> {
    (0..code.link().size())
        .map(|r| code.link().matrix().row_weight(r))
        .collect()
}

/// Row weights of the joint protomatrix.
pub fn joint_row_weights(code: &JointCode) -> Vec<u32> {
    let j = code.assemble_joint();
    (0..j.rows()).map(|r| j.row_weight(r)).collect()
}

/// A percentage held exactly, displayed rounded half-up to one decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Percent(pub Rational);

impl Percent {
    fn from_fraction(f: Rational) -> Self {
        Percent(f * Rational::from_integer(100))
    }

    /// Tenths of a percent, rounded half-up.
    pub fn tenths(self) -> i64 {
        let x = self.0 * Rational::from_integer(10) + Rational::new(1, 2);
        x.floor().to_integer()
    }

    pub fn is_zero(self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(self) -> bool {
        self.0.is_negative()
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.tenths();
        if t == 0 {
            return f.write_str("0");
        }
        let sign = if t < 0 { "-" } else { "" };
        let a = t.abs();
        if a % 10 == 0 {
            write!(f, "{sign}{}%", a / 10)
        } else {
            write!(f, "{sign}{}.{}%", a / 10, a % 10)
        }
    }
}

fn ratio(num: i64, den: i64, what: &str) -> Result<Rational, AnalysisError> {
    if den == 0 {
        return Err(AnalysisError::Degenerate(format!(
            "{what} has a zero denominator"
        )));
    }
    Ok(Rational::new(num, den))
}

fn max_source_row(code: &JointCode) -> i64 {
    source_row_weights(code)
        .iter()
        .zip(link_row_weights(code))
        .map(|(&s, t)| (s + t) as i64)
        .max()
        .unwrap_or(0)
}

/// Relative change in XOR gates for source encoding, which scale with the
/// largest source-row weight minus 2.
pub fn source_encoder_gate_ratio(
    new: &JointCode,
    old: &JointCode,
) -> Result<Percent, AnalysisError> {
    let (a, b) = (max_source_row(new), max_source_row(old));
    if a <= 2 || b <= 2 {
        return Err(AnalysisError::Degenerate(
            "largest source row weight is at most 2".into(),
        ));
    }
    Ok(Percent::from_fraction(
        ratio(a - 2, b - 2, "gate ratio")? - Rational::from_integer(1),
    ))
}

fn source_latency(code: &JointCode) -> i64 {
    source_row_weights(code)
        .iter()
        .zip(link_row_weights(code))
        .map(|(&s, t)| ceil_log2(s + t - 1))
        .sum()
}

/// Relative increase in source-encoding latency (XOR tree depth per row).
pub fn delta_latency_source(new: &JointCode, old: &JointCode) -> Result<Percent, AnalysisError> {
    let (a, b) = (source_latency(new), source_latency(old));
    Ok(Percent::from_fraction(ratio(a - b, b, "source latency")?))
}

/// Relative increase in decoding latency. The denominator subtracts one per
/// row: `sum_j (ceil(log2 w_J0^j) - 1)`.
pub fn delta_latency_dec(new: &JointCode, old: &JointCode) -> Result<Percent, AnalysisError> {
    let wn = joint_row_weights(new);
    let wo = joint_row_weights(old);
    if wn.len() != wo.len() {
        return Err(AnalysisError::Layout);
    }
    let num: i64 = wn
        .iter()
        .zip(&wo)
        .map(|(&a, &b)| ceil_log2(a) - ceil_log2(b))
        .sum();
    let den: i64 = wo.iter().map(|&b| ceil_log2(b) - 1).sum();
    Ok(Percent::from_fraction(ratio(num, den, "decoding latency")?))
}

/// LUTs of the widest check-node processor, `3 (x - 2)`.
pub fn lut_count(code: &JointCode) -> Result<i64, AnalysisError> {
    let x = joint_row_weights(code).into_iter().max().unwrap_or(0) as i64;
    if x <= 2 {
        return Err(AnalysisError::Degenerate(
            "largest joint row weight is at most 2".into(),
        ));
    }
    Ok(3 * (x - 2))
}

pub fn cnp_lut_ratio(new: &JointCode, old: &JointCode) -> Result<Percent, AnalysisError> {
    let (a, b) = (lut_count(new)?, lut_count(old)?);
    Ok(Percent::from_fraction(
        ratio(a, b, "LUT ratio")? - Rational::from_integer(1),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatencyReport {
    pub w_s: Vec<u32>,
    pub w_t: Vec<u32>,
    pub w_j: Vec<u32>,
    pub w_j0: Vec<u32>,
    pub source_complexity: Percent,
    pub latency_source: Percent,
    pub decoding_complexity: Percent,
    pub latency_dec: Percent,
    pub luts_new: i64,
    pub luts_old: i64,
}

impl LatencyReport {
    /// The four headline values in table order.
    pub fn percentages(&self) -> [Percent; 4] {
        [
            self.source_complexity,
            self.latency_source,
            self.decoding_complexity,
            self.latency_dec,
        ]
    }
}

pub fn analyze(new: &JointCode, old: &JointCode) -> Result<LatencyReport, AnalysisError> {
    let (a, b) = (new.layout(), old.layout());
    if (a.m_s, a.n_s, a.m_c, a.n_c) != (b.m_s, b.n_s, b.m_c, b.n_c) {
        return Err(AnalysisError::Layout);
    }
    Ok(LatencyReport {
        w_s: source_row_weights(new),
        w_t: link_row_weights(new),
        w_j: joint_row_weights(new),
        w_j0: joint_row_weights(old),
        source_complexity: source_encoder_gate_ratio(new, old)?,
        latency_source: delta_latency_source(new, old)?,
        decoding_complexity: cnp_lut_ratio(new, old)?,
        latency_dec: delta_latency_dec(new, old)?,
        luts_new: lut_count(new)?,
        luts_old: lut_count(old)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codefile::parse_code;

    #[test]
    fn ceil_log2_small_values() {
        let expect = [
            (1, 0),
            (2, 1),
            (3, 2),
            (4, 2),
            (5, 3),
            (8, 3),
            (9, 4),
            (16, 4),
            (17, 5),
        ];
        for (w, l) in expect {
            assert_eq!(ceil_log2(w), l, "w = {w}");
        }
    }

    #[test]
    fn percent_display_rounds_half_up() {
        assert_eq!(Percent(Rational::new(300, 13)).to_string(), "23.1%");
        assert_eq!(Percent(Rational::new(100, 3)).to_string(), "33.3%");
        assert_eq!(Percent(Rational::new(25, 2)).to_string(), "12.5%");
        assert_eq!(Percent(Rational::new(1, 20)).to_string(), "0.1%");
        assert_eq!(Percent(Rational::from_integer(20)).to_string(), "20%");
        assert_eq!(Percent(Rational::from_integer(0)).to_string(), "0");
    }

    #[test]
    fn self_comparison_is_zero() {
        let code = parse_code(include_str!("../../../fixtures/example2_j4_opt3.json")).unwrap();
        let r = analyze(&code, &code).unwrap();
        assert!(r.percentages().iter().all(|p| p.is_zero()));
    }

    #[test]
    fn row_weights_match_entry_sums() {
        let code = parse_code(include_str!("../../../fixtures/example1_opt1.json")).unwrap();
        assert_eq!(source_row_weights(&code), vec![6, 5]);
        assert_eq!(link_row_weights(&code), vec![2, 1]);
        assert_eq!(joint_row_weights(&code), vec![8, 6, 6, 4, 4]);
    }
}
