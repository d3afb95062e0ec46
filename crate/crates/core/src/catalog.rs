//! The shipped reference codes with their published metadata.

use crate::codefile::parse_code;
use crate::protograph::JointCode;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub text: &'static str,
    /// Published channel threshold, per source symbol (dB).
    pub published_threshold_db: f64,
    /// Published Shannon limit (dB).
    pub published_shannon_db: f64,
    pub default_z2: usize,
    /// Identity-linked counterpart, if this code is a linked design.
    pub baseline: Option<&'static str>,
}

macro_rules! entry {
    ($id:literal, $thr:expr, $shannon:expr, $z2:expr, $base:expr) => {
        CatalogEntry {
            id: $id,
            text: include_str!(concat!("../../../fixtures/", $id, ".json")),
            published_threshold_db: $thr,
            published_shannon_db: $shannon,
            default_z2: $z2,
            baseline: $base,
        }
    };
}

pub const CATALOG: [CatalogEntry; 13] = [
    entry!("example1_orig", -5.127, -7.00, 800, None),
    entry!("example1_opt1", -5.267, -7.00, 800, Some("example1_orig")),
    entry!("example2_j3", -9.324, -12.02, 400, None),
    entry!("example2_j3_opt1", -9.555, -12.02, 400, Some("example2_j3")),
    entry!("example2_j3_opt2", -9.680, -12.02, 400, Some("example2_j3")),
    entry!("example2_j3_opt3", -9.734, -12.02, 400, Some("example2_j3")),
    entry!("example2_j4", -9.390, -12.02, 400, None),
    entry!("example2_j4_opt1", -9.616, -12.02, 400, Some("example2_j4")),
    entry!("example2_j4_opt2", -9.722, -12.02, 400, Some("example2_j4")),
    entry!("example2_j4_opt3", -9.744, -12.02, 400, Some("example2_j4")),
    entry!("example3_org", -0.653, -2.05, 400, None),
    entry!("example3_opt", -0.840, -2.05, 400, Some("example3_org")),
    entry!("example4_opt2", -5.815, -7.00, 800, None),
];

impl CatalogEntry {
    pub fn code(&self) -> JointCode {
        parse_code(self.text).expect("shipped fixtures are valid")
    }
}

pub fn find(id: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.id == id)
}
