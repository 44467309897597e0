//! Tables written as CSV or JSON, and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use pursuit_core::sim::EstimateReport;
use pursuit_core::Trace;

use crate::config::{Format, RunConfig};
use crate::error::CliError;

/// 17 significant digits, enough to restore the exact `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Bool(bool),
    Text(String),
    /// A censored time: the event did not happen within the horizon.
    Infinite,
    Missing,
}

impl Cell {
    pub fn float(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Float)
    }

    pub fn censored(t: Option<u64>) -> Self {
        t.map_or(Cell::Infinite, Cell::Int)
    }

    fn to_field(&self) -> String {
        match self {
            Cell::Int(n) => n.to_string(),
            Cell::Float(x) => fmt_float(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Infinite => "inf".into(),
            Cell::Missing => String::new(),
        }
    }

    fn to_json(&self) -> Value {
        match self {
            Cell::Int(n) => Value::from(*n),
            Cell::Float(x) => serde_json::Number::from_f64(*x)
                .map_or_else(|| Value::String(x.to_string()), Value::Number),
            Cell::Bool(b) => Value::Bool(*b),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Infinite => Value::String("inf".into()),
            Cell::Missing => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_field))?;
        }
        w.flush()?;
        Ok(())
    }

    /// An array of objects keyed by the header.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = self
                        .header
                        .iter()
                        .cloned()
                        .zip(row.iter().map(Cell::to_json))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }

    pub fn write<W: Write>(&self, format: Format, mut out: W) -> Result<(), CliError> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Json => {
                serde_json::to_writer_pretty(&mut out, &self.to_json())?;
                writeln!(out)?;
                Ok(())
            }
        }
    }
}

/// `replicate, t, pi1, m, chosen, reward, N1..Nr`, with 1-based actions.
pub fn trace_table(traces: &[Trace], actions: usize) -> Table {
    let mut header: Vec<String> = ["replicate", "t", "pi1", "m", "chosen", "reward"]
        .map(String::from)
        .to_vec();
    header.extend((1..=actions).map(|i| format!("N{i}")));
    let mut table = Table::new(header);
    for trace in traces {
        for r in &trace.records {
            let mut row = vec![
                Cell::Int(trace.replicate),
                Cell::Int(r.t),
                Cell::Float(r.pi1),
                Cell::Int(r.best as u64 + 1),
                Cell::Int(r.chosen as u64 + 1),
                Cell::Int(u64::from(r.reward)),
            ];
            row.extend(r.counts.iter().map(|&n| Cell::Int(n)));
            table.push(row);
        }
    }
    table
}

pub const REPORT_HEADER: [&str; 8] = [
    "t",
    "epsilon",
    "p_hat",
    "stderr",
    "psi_hat",
    "phi_bound",
    "conv_time_p50",
    "conv_time_p95",
];

/// One row per checkpoint and tolerance.
pub fn report_table(report: &EstimateReport) -> Table {
    let mut table = Table::new(REPORT_HEADER);
    for cp in &report.checkpoints {
        for (est, conv) in cp.optimality.iter().zip(&report.convergence) {
            table.push(vec![
                Cell::Int(cp.t),
                Cell::Float(est.epsilon),
                Cell::Float(est.optimality.p_hat),
                Cell::Float(est.optimality.stderr),
                Cell::float(cp.psi.map(|m| m.mean)),
                Cell::float(cp.phi_bound),
                Cell::censored(conv.p50),
                Cell::censored(conv.p95),
            ]);
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    /// SHA-256 of the canonical resolved configuration.
    pub config_hash: String,
    pub master_seed: u64,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    pub outputs: Vec<PathBuf>,
    pub config: Value,
}

pub fn unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl RunManifest {
    pub fn new(config: &RunConfig, started: u64, outputs: Vec<PathBuf>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config_hash: config.hash(),
            master_seed: config.experiment.master_seed,
            started_unix_ms: started,
            finished_unix_ms: unix_ms(),
            outputs,
            config: serde_json::from_str(&config.canonical_json()).expect("valid json"),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        writeln!(file)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn any_finite_float_round_trips(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            prop_assume!(x.is_finite());
            let s = fmt_float(x);
            let back: f64 = s.parse().unwrap();
            prop_assert_eq!(back.to_bits(), x.to_bits());
            prop_assert_eq!(fmt_float(back), s);
        }
    }

    #[test]
    fn floats_keep_seventeen_digits() {
        assert_eq!(fmt_float(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_float(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_float(f64::INFINITY), "inf");
        for x in [0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-300, 5e-324, f64::MAX] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn cells_render() {
        let mut t = Table::new(["a", "b", "c", "d"]);
        t.push(vec![Cell::Int(3), Cell::censored(None), Cell::float(None), Cell::Bool(true)]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b,c,d\n3,inf,,true\n");
        assert_eq!(
            t.to_json(),
            serde_json::json!([{"a": 3, "b": "inf", "c": null, "d": true}])
        );
    }
}
