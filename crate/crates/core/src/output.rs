//! CSV/JSON rendering shared by all reports.
//!
//! CSV is UTF-8 with LF line endings and a mandatory header row. Numeric
//! cells use 17 significant digits (`{:.16e}`), which round-trips every
//! `f64`. Booleans render as `true`/`false`; absent values as empty cells.

use serde::Serialize;

/// 17-significant-digit rendering.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// A report that can be flattened into one CSV table.
pub trait Tabular {
    fn header(&self) -> Vec<&'static str>;
    fn rows(&self) -> Vec<Vec<String>>;

    fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for row in self.rows() {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report types serialize infallibly");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

pub fn render<T: Tabular + Serialize>(report: &T, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => report.to_csv(),
        OutputFormat::Json => to_json(report),
    }
}
