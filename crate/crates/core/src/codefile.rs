//! JSON code-description files.
//!
//! ```json
//! {
//!   "id": "example1_opt1",
//!   "m_s": 2, "n_s": 4, "m_c": 3, "n_c": 5,
//!   "B_s": [[2, 2, 1, 1], [1, 1, 2, 1]],
//!   "B_c": [[1, 0, 1, 2, 2], [0, 1, 1, 1, 1], [0, 1, 1, 0, 2]],
//!   "T": [[1, 1], [0, 1]],
//!   "orientation": "upper",
//!   "punctured": [5],
//!   "p1": 0.04
//! }
//! ```
//!
//! `id` and `max_entry` are optional. Punctured indices are 1-based channel
//! columns.

use serde::Deserialize;

use crate::protograph::{
    CodeError, JointCode, Orientation, Protomatrix, TriangularLink, DEFAULT_MAX_ENTRY,
};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CodeFile {
    #[serde(default)]
    id: Option<String>,
    m_s: usize,
    n_s: usize,
    m_c: usize,
    n_c: usize,
    #[serde(rename = "B_s")]
    b_s: Vec<Vec<u32>>,
    #[serde(rename = "B_c")]
    b_c: Vec<Vec<u32>>,
    #[serde(rename = "T")]
    t: Vec<Vec<u32>>,
    orientation: Orientation,
    punctured: Vec<usize>,
    p1: f64,
    #[serde(default)]
    max_entry: Option<u32>,
}

fn matrix(name: &str, rows: &[Vec<u32>], m: usize, n: usize) -> Result<Protomatrix, CodeError> {
    if rows.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(CodeError::DimensionMismatch(format!(
            "{name} must be {m}x{n} as declared"
        )));
    }
    Protomatrix::from_rows(rows)
}

/// Parses a code-description file.
pub fn parse_code(text: &str) -> Result<JointCode, CodeError> {
    let file: CodeFile = serde_json::from_str(text).map_err(|e| CodeError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let max_entry = file.max_entry.unwrap_or(DEFAULT_MAX_ENTRY);
    let source = matrix("B_s", &file.b_s, file.m_s, file.n_s)?;
    let channel = matrix("B_c", &file.b_c, file.m_c, file.n_c)?;
    let t = matrix("T", &file.t, file.m_s, file.m_s)?;
    let link = TriangularLink::new(file.orientation, t, max_entry)?;
    let code =
        JointCode::with_max_entry(source, channel, link, file.punctured, file.p1, max_entry)?;
    Ok(match file.id {
        Some(id) => code.with_id(id),
        None => code,
    })
}

fn write_matrix(out: &mut String, m: &Protomatrix) {
    out.push_str("[\n");
    for r in 0..m.rows() {
        let row: Vec<String> = m.row(r).iter().map(u32::to_string).collect();
        out.push_str("    [");
        out.push_str(&row.join(", "));
        out.push(']');
        if r + 1 < m.rows() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]");
}

/// Serialises a code; `parse_code(&serialize_code(c)) == c`.
pub fn serialize_code(code: &JointCode) -> String {
    let l = code.layout();
    let mut out = String::from("{\n");
    if let Some(id) = code.id() {
        out.push_str(&format!(
            "  \"id\": {},\n",
            serde_json::to_string(id).expect("string serialises")
        ));
    }
    out.push_str(&format!(
        "  \"m_s\": {},\n  \"n_s\": {},\n  \"m_c\": {},\n  \"n_c\": {},\n",
        l.m_s, l.n_s, l.m_c, l.n_c
    ));
    out.push_str("  \"B_s\": ");
    write_matrix(&mut out, code.source());
    out.push_str(",\n  \"B_c\": ");
    write_matrix(&mut out, code.channel());
    out.push_str(",\n  \"T\": ");
    write_matrix(&mut out, code.link().matrix());
    let punctured: Vec<String> = code.punctured().iter().map(usize::to_string).collect();
    out.push_str(&format!(
        ",\n  \"orientation\": \"{}\",\n  \"punctured\": [{}],\n  \"p1\": {:?}",
        code.link().orientation(),
        punctured.join(", "),
        code.p1()
    ));
    if code.max_entry() != DEFAULT_MAX_ENTRY {
        out.push_str(&format!(",\n  \"max_entry\": {}", code.max_entry()));
    }
    out.push_str("\n}\n");
    out
}
