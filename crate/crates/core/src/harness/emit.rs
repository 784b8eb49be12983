use std::io::Write;
use std::path::Path;

use super::run::RunRecord;
use crate::error::{Error, Result};

/// Leading CSV columns; `y_0..y_N` follow.
pub const CSV_FIXED_COLUMNS: [&str; 8] = [
    "scenario_id",
    "method",
    "sweep_param",
    "sweep_value",
    "cost_J",
    "max_T_total_s",
    "max_E_total_J",
    "T_exe_s",
];

/// 12 significant digits.
fn num(v: f64) -> String {
    format!("{v:.11e}")
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.into())
}

/// Writes one row per record. The number of `y_` columns is the longest
/// allocation among the records; shorter rows leave the rest empty.
pub fn write_csv<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let width = records.iter().map(|r| r.allocation.len()).max().unwrap_or(0);
    let mut out = csv::Writer::from_writer(w);
    let header: Vec<String> = CSV_FIXED_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain((0..width).map(|i| format!("y_{i}")))
        .collect();
    out.write_record(&header).map_err(csv_err)?;
    for r in records {
        let mut row = vec![
            r.scenario_id.clone(),
            r.method.clone(),
            r.sweep_param.clone().unwrap_or_default(),
            r.sweep_value.map(num).unwrap_or_default(),
            num(r.cost_j),
            num(r.max_t_total_s),
            num(r.max_e_total_j),
            num(r.t_exe_s),
        ];
        row.extend((0..width).map(|i| r.allocation.get(i).copied().map(num).unwrap_or_default()));
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_csv(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(f))
}

pub fn emit_json(records: &[RunRecord], path: impl AsRef<Path>) -> Result<()> {
    let mut text = serde_json::to_string_pretty(records)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<Vec<RunRecord>> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
