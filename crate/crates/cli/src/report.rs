//! Report and trace serialization: `report.json` (stable field order, no
//! timestamps, byte-identical for identical runs) and `trace.csv` with
//! shortest round-trip decimal formatting.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use picardo_core::IterationTrace;

use crate::run::ReportBody;

pub fn write_report(path: &Path, body: &ReportBody) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    let json = serde_json::to_string_pretty(body)?;
    out.write_all(json.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Writes one row per iteration step.
///
/// `residual_estimate` is exact for one-point windows (`k = 1`), where the
/// residual of an iterate equals the next step distance; the final row always
/// carries the certified residual of the returned point. For `k > 1` the
/// intermediate estimates are left empty. `mk_value`/`beta_value` are the
/// recorded per-step gauge values, one fewer than the number of steps.
pub fn write_trace_csv(
    path: &Path,
    trace: &IterationTrace,
    k: usize,
    final_residual: f64,
) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "n,step_distance,residual_estimate,mk_value,beta_value")?;
    let steps = &trace.step_distances;
    let empty = String::new();
    for (i, step) in steps.iter().enumerate() {
        let n = i + 1;
        let residual = if n == steps.len() {
            Some(final_residual)
        } else if k == 1 {
            Some(steps[i + 1])
        } else {
            None
        };
        let mk = trace.mk_values.as_ref().and_then(|v| v.get(i));
        let beta = trace.beta_values.as_ref().and_then(|v| v.get(i));
        writeln!(
            out,
            "{n},{},{},{},{}",
            step,
            residual.map(|v| v.to_string()).unwrap_or_else(|| empty.clone()),
            mk.map(|v| v.to_string()).unwrap_or_else(|| empty.clone()),
            beta.map(|v| v.to_string()).unwrap_or_else(|| empty.clone()),
        )?;
    }
    Ok(())
}
