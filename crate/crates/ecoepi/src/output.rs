//! CSV and JSON writers. Floats in CSV carry 17 significant digits; JSON
//! uses the shortest representation that round-trips.

use std::fs;
use std::path::Path;

use ecoepi_core::simulate::{MonitorRecord, Trajectory};
use ecoepi_core::verify::SweepTable;
use ecoepi_core::{Field, Grid};
use serde::Serialize;

use crate::error::CliError;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Solver(e.to_string()))?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// `x,phi`
pub fn write_phi(path: &Path, g: &Grid, phi: &Field) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "phi"])?;
    for (i, v) in phi.iter().enumerate() {
        w.write_record([num(g.x(i)), num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

/// `x` followed by the named columns that are present.
pub fn write_columns(path: &Path, g: &Grid, columns: &[(&str, Option<&Field>)]) -> Result<(), CliError> {
    let present: Vec<(&str, &Field)> = columns.iter().filter_map(|(n, f)| f.map(|f| (*n, f))).collect();
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["x"];
    header.extend(present.iter().map(|(n, _)| *n));
    w.write_record(&header)?;
    for i in 0..g.nodes() {
        let mut row = vec![num(g.x(i))];
        row.extend(present.iter().map(|(_, f)| num(f[i])));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Long format `t,x,S,I,P`, one row per snapshot and node.
pub fn write_trajectory(path: &Path, g: &Grid, traj: &Trajectory) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "x", "S", "I", "P"])?;
    for (t, st) in traj.times.iter().zip(&traj.snapshots) {
        for i in 0..g.nodes() {
            w.write_record([num(*t), num(g.x(i)), num(st.s[i]), num(st.i[i]), num(st.p[i])])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `t,minS,minI,minP,preySup,massW,V,F`; inapplicable cells are empty.
pub fn write_monitors(path: &Path, monitors: &[MonitorRecord]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "minS", "minI", "minP", "preySup", "massW", "V", "F"])?;
    for m in monitors {
        w.write_record([
            num(m.t),
            num(m.min_s),
            opt(m.min_i),
            num(m.min_p),
            num(m.prey_sup),
            opt(m.mass_w),
            opt(m.v),
            opt(m.f),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `value,predicted,observed,distance,passed,boundary`
pub fn write_sweep(path: &Path, table: &SweepTable) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["value", "predicted", "observed", "distance", "passed", "boundary"])?;
    for r in &table.rows {
        w.write_record([
            num(r.value),
            r.predicted.clone(),
            r.observed.clone().unwrap_or_else(|| "none".into()),
            opt(r.distance),
            r.passed.to_string(),
            r.boundary.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
