//! Report and dataset serialization shared by the subcommands.

use std::path::Path;

use serde_json::{json, Map, Value};
use slscan::{ChangePointReport, Error, Result, SeriesMatrix};

/// Full detection report: changepoints, the effective configuration, and
/// run diagnostics (plus any preprocessing notes).
pub fn report_to_json(
    report: &ChangePointReport,
    config: Value,
    extra_diagnostics: Map<String, Value>,
) -> Value {
    let changepoints: Vec<Value> = report
        .detections
        .iter()
        .map(|d| json!({ "t": d.position, "scale": d.scale, "score": d.score }))
        .collect();
    let mut diagnostics = Map::new();
    diagnostics.insert("triples_evaluated".into(), json!(report.diagnostics.triples_evaluated));
    diagnostics.insert("guard_floors".into(), json!(report.diagnostics.guard_floors));
    diagnostics.extend(extra_diagnostics);
    json!({
        "changepoints": changepoints,
        "config": config,
        "diagnostics": diagnostics,
    })
}

/// Flat (t, scale, score) table of the detections.
pub fn write_report_csv(path: impl AsRef<Path>, report: &ChangePointReport) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(["t", "scale", "score"])?;
    for d in &report.detections {
        writer.write_record([d.position.to_string(), d.scale.to_string(), d.score.to_string()])?;
    }
    writer.flush()?;
    Ok(())
}

/// Write a panel as CSV with rows as time points and one named column per
/// sequence, the layout `detect` reads back by default. Values print in the
/// shortest form that parses back to the identical float.
pub fn write_dataset_csv(
    path: impl AsRef<Path>,
    names: &[String],
    data: &SeriesMatrix,
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    writer.write_record(names)?;
    for t in 0..data.n_observations() {
        let record: Vec<String> = (0..data.n_sequences())
            .map(|seq| data.row(seq)[t].to_string())
            .collect();
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Read back the `t` column of a detections CSV written by `detect`.
pub fn read_detected_positions(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    let mut reader = csv::Reader::from_path(path)?;
    let t_col = reader
        .headers()?
        .iter()
        .position(|h| h.trim() == "t")
        .ok_or(Error::EmptyInput("no `t` column in detections file"))?;
    let mut positions = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let cell = record.get(t_col).ok_or(Error::CsvData {
            line,
            reason: "short row".into(),
        })?;
        positions.push(cell.trim().parse().map_err(|_| Error::CsvData {
            line,
            reason: format!("bad position {cell:?}"),
        })?);
    }
    Ok(positions)
}
