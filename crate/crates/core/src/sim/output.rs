use std::io::Write;

use serde::Serialize;

use super::metrics::Metrics;
use super::scenario::{Failure, RunResult};
use crate::error::Result;

pub const CSV_COLUMNS: [&str; 18] = [
    "t",
    "omega_ref",
    "omega_true",
    "omega_hat",
    "psi_ra",
    "psi_rb",
    "psi_ra_hat",
    "psi_rb_hat",
    "i_a",
    "i_b",
    "i_a_hat",
    "i_b_hat",
    "v_a_cmd",
    "v_b_cmd",
    "Te",
    "TL",
    "Rr_hat",
    "V_lyap",
];

/// Header plus one row per record. Numbers use Rust's shortest
/// round-trip formatting.
pub fn write_run_csv<W: Write>(result: &RunResult, w: W) -> Result<()> {
    let mut w = std::io::BufWriter::new(w);
    writeln!(w, "{}", CSV_COLUMNS.join(","))?;
    for r in &result.records {
        let mut first = true;
        for v in r.values() {
            if !first {
                w.write_all(b",")?;
            }
            first = false;
            write!(w, "{v}")?;
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct MetricsFile<'a> {
    schema_version: u32,
    verdict: &'static str,
    records: usize,
    #[serde(flatten)]
    metrics: Option<&'a Metrics>,
    failure: Option<&'a Failure>,
}

pub fn write_metrics_json<W: Write>(result: &RunResult, mut w: W) -> Result<()> {
    let file = MetricsFile {
        schema_version: super::config::SCHEMA_VERSION,
        verdict: if result.verdict() { "pass" } else { "fail" },
        records: result.records.len(),
        metrics: result.metrics.as_ref(),
        failure: result.failure.as_ref(),
    };
    serde_json::to_writer_pretty(&mut w, &file)?;
    w.write_all(b"\n")?;
    Ok(())
}
