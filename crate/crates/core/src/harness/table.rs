use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use crate::protocol::{OutcomeCounts, QberEstimate};
use crate::{Error, Result};

/// Fixed CSV columns, in order.
pub const CSV_COLUMNS: [&str; 12] = [
    "run_id",
    "mode",
    "pattern",
    "n_plus",
    "n_minus",
    "n_inconclusive",
    "q_z",
    "q_x",
    "stderr_qz",
    "stderr_qx",
    "seed",
    "config_hash",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Jsonl,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub run_id: String,
    /// Input pattern (`HHV`, `DAD`), basis summary or sweep point (`mu=0.1`).
    pub pattern: String,
    pub counts: OutcomeCounts,
    pub q_z: Option<QberEstimate>,
    pub q_x: Option<QberEstimate>,
    /// Additional metrics; only written to JSON-lines.
    pub extra: BTreeMap<String, Option<f64>>,
}

impl ResultRow {
    pub fn new(run_id: impl Into<String>, pattern: impl Into<String>, counts: OutcomeCounts) -> Self {
        ResultRow {
            run_id: run_id.into(),
            pattern: pattern.into(),
            counts,
            q_z: None,
            q_x: None,
            extra: BTreeMap::new(),
        }
    }

    pub fn with_qber(mut self, q_z: Option<QberEstimate>, q_x: Option<QberEstimate>) -> Self {
        self.q_z = q_z;
        self.q_x = q_x;
        self
    }

    pub fn with_extra(mut self, key: &str, value: Option<f64>) -> Self {
        self.extra.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub mode: String,
    pub seed: u64,
    pub config_hash: String,
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new(mode: &str, seed: u64, config_hash: String) -> Self {
        ResultTable {
            mode: mode.to_string(),
            seed,
            config_hash,
            rows: Vec::new(),
        }
    }

    pub fn row(&self, pattern: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.pattern == pattern)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_COLUMNS).expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.run_id.clone(),
                self.mode.clone(),
                r.pattern.clone(),
                r.counts.plus.to_string(),
                r.counts.minus.to_string(),
                r.counts.inconclusive.to_string(),
                opt_number(r.q_z.map(|q| q.value)),
                opt_number(r.q_x.map(|q| q.value)),
                opt_number(r.q_z.map(|q| q.stderr)),
                opt_number(r.q_x.map(|q| q.stderr)),
                self.seed.to_string(),
                self.config_hash.clone(),
            ])
            .expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory flush");
        String::from_utf8(bytes).expect("fields are UTF-8")
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let mut m = Map::new();
            m.insert("run_id".into(), r.run_id.clone().into());
            m.insert("mode".into(), self.mode.clone().into());
            m.insert("pattern".into(), r.pattern.clone().into());
            m.insert("n_plus".into(), r.counts.plus.into());
            m.insert("n_minus".into(), r.counts.minus.into());
            m.insert("n_inconclusive".into(), r.counts.inconclusive.into());
            m.insert("q_z".into(), json_number(r.q_z.map(|q| q.value)));
            m.insert("q_x".into(), json_number(r.q_x.map(|q| q.value)));
            m.insert("stderr_qz".into(), json_number(r.q_z.map(|q| q.stderr)));
            m.insert("stderr_qx".into(), json_number(r.q_x.map(|q| q.stderr)));
            m.insert("seed".into(), self.seed.into());
            m.insert("config_hash".into(), self.config_hash.clone().into());
            for (k, v) in &r.extra {
                m.insert(k.clone(), json_number(*v));
            }
            out.push_str(&Value::Object(m).to_string());
            out.push('\n');
        }
        out
    }

    pub fn render(&self, format: OutputFormat) -> String {
        match format {
            OutputFormat::Csv => self.to_csv(),
            OutputFormat::Jsonl => self.to_jsonl(),
        }
    }
}

/// Twelve significant digits in scientific notation.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0.00000000000e0"
        return format!("{:.11e}", 0.0);
    }
    format!("{x:.11e}")
}

fn opt_number(x: Option<f64>) -> String {
    x.filter(|v| v.is_finite()).map(format_number).unwrap_or_default()
}

fn json_number(x: Option<f64>) -> Value {
    x.filter(|v| v.is_finite())
        .and_then(|v| format_number(v).parse::<f64>().ok())
        .and_then(serde_json::Number::from_f64)
        .map(Value::Number)
        .unwrap_or(Value::Null)
}

/// Writes the table to `path` in the given format.
pub fn emit(table: &ResultTable, format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let io = |source| Error::Io { path: path.to_path_buf(), source };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(table.render(format).as_bytes()).map_err(io)?;
    f.flush().map_err(io)
}
