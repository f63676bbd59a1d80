//! CSV and JSON result files.
//!
//! The CSV file starts with comment lines giving the schema version, the
//! kind of closed form in the analytic column and the stop rule, followed by
//! the header [`CSV_HEADER`] and one row per point. Absent values are empty
//! fields. A point reached the error target when its `bit_errors` is at
//! least `min_bit_errors`; otherwise it stopped at `max_frames`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BerCurve, StopRule};
use crate::error::{Error, Result};

/// First line of every CSV file.
pub const CSV_VERSION_LINE: &str = "# relaysim ber-curve v1";
/// Column header of every CSV file.
pub const CSV_HEADER: &str = "snr_db,bits,bit_errors,ber_sim,ber_analytic,floor_analytic,seed,config_digest";

/// Output file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    /// Format implied by a file extension (`.json` is JSON, anything else CSV).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => OutputFormat::Json,
            _ => OutputFormat::Csv,
        }
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub ber_sim: Option<f64>,
    pub ber_analytic: Option<f64>,
    pub floor_analytic: Option<f64>,
    pub seed: u64,
    pub config_digest: String,
}

/// Contents of a parsed CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvCurve {
    pub analytic_kind: Option<String>,
    pub stop: Option<StopRule>,
    pub rows: Vec<CsvRow>,
}

/// Renders a curve as CSV text.
pub fn render_csv(curve: &BerCurve) -> Result<String> {
    let mut text = String::new();
    text.push_str(CSV_VERSION_LINE);
    text.push('\n');
    text.push_str(&format!(
        "# analytic: {}\n",
        curve.analytic_kind.as_deref().unwrap_or("none")
    ));
    text.push_str(&format!(
        "# stop: min_bit_errors={} max_frames={}\n",
        curve.stop.min_bit_errors, curve.stop.max_frames
    ));
    text.push_str(CSV_HEADER);
    text.push('\n');
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for p in &curve.points {
        writer
            .serialize(CsvRow {
                snr_db: p.snr_db,
                bits: p.bits,
                bit_errors: p.bit_errors,
                ber_sim: p.ber_sim,
                ber_analytic: p.ber_analytic,
                floor_analytic: p.floor_analytic,
                seed: curve.seed,
                config_digest: curve.config_digest.clone(),
            })
            .map_err(|e| Error::numerical(format!("CSV serialization failed: {e}")))?;
    }
    let body = writer
        .into_inner()
        .map_err(|e| Error::numerical(format!("CSV serialization failed: {e}")))?;
    text.push_str(&String::from_utf8(body).expect("CSV output is UTF-8"));
    Ok(text)
}

/// Renders a curve as pretty-printed JSON.
pub fn render_json(curve: &BerCurve) -> Result<String> {
    serde_json::to_string_pretty(curve).map_err(|e| Error::numerical(format!("JSON serialization failed: {e}")))
}

/// Writes a curve to `path`.
pub fn emit_results(curve: &BerCurve, path: &Path, format: OutputFormat) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => render_csv(curve)?,
        OutputFormat::Json => {
            let mut t = render_json(curve)?;
            t.push('\n');
            t
        }
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses JSON produced by [`render_json`].
pub fn parse_json(text: &str) -> Result<BerCurve> {
    serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))
}

/// Parses CSV produced by [`render_csv`].
pub fn parse_csv(text: &str) -> Result<CsvCurve> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_VERSION_LINE) {
        return Err(Error::Schema(format!("CSV must start with {CSV_VERSION_LINE:?}")));
    }
    let mut analytic_kind = None;
    let mut stop = None;
    for line in text.lines().filter_map(|l| l.strip_prefix("# ")) {
        if let Some(kind) = line.strip_prefix("analytic: ") {
            analytic_kind = (kind != "none").then(|| kind.to_string());
        } else if let Some(rule) = line.strip_prefix("stop: ") {
            stop = Some(parse_stop(rule)?);
        }
    }
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    if body.lines().next() != Some(CSV_HEADER) {
        return Err(Error::Schema(format!("CSV header must be {CSV_HEADER:?}")));
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(body.as_bytes());
    let rows = reader
        .deserialize()
        .collect::<std::result::Result<Vec<CsvRow>, _>>()
        .map_err(|e| Error::Schema(e.to_string()))?;
    Ok(CsvCurve {
        analytic_kind,
        stop,
        rows,
    })
}

fn parse_stop(rule: &str) -> Result<StopRule> {
    let mut out = StopRule::default();
    for field in rule.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Schema(format!("malformed stop field {field:?}")))?;
        let value: u64 = value
            .parse()
            .map_err(|_| Error::Schema(format!("stop value {value:?} is not an integer")))?;
        match key {
            "min_bit_errors" => out.min_bit_errors = value,
            "max_frames" => out.max_frames = value,
            _ => return Err(Error::Schema(format!("unknown stop field {key:?}"))),
        }
    }
    Ok(out)
}

/// Reads a JSON curve file.
pub fn read_curve(path: &Path) -> Result<BerCurve> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_json(&text)
}
