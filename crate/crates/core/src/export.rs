//! CSV and JSON-lines writers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::integrator::Trajectory;
use crate::verification::EstimateReport;

pub const TRAJECTORY_HEADER: [&str; 5] = ["t", "sphere_defect", "V_norm_sq", "L2n_norm", "DA_norm_sq"];
pub const ENERGY_HEADER: [&str; 7] = ["n", "K1_mean", "K1_se", "K2_mean", "K2_se", "K3_mean", "K3_se"];
pub const REPORT_HEADER: [&str; 7] = ["key", "n", "label", "value", "se", "ensemble", "verdict"];

fn num(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(TRAJECTORY_HEADER)?;
    for (t, d) in traj.times.iter().zip(&traj.diagnostics) {
        w.write_record([
            num(*t),
            num(d.sphere_defect),
            num(d.v_norm_sq),
            num(d.l2n_norm),
            num(d.da_norm_sq),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per Galerkin size found in the `energy-K1` report; `reports` holds
/// the three energy reports in any order. Missing values are left blank.
pub fn write_energy_csv(path: &Path, reports: &[EstimateReport]) -> Result<()> {
    let find = |k: &str| reports.iter().find(|r| r.key == k);
    let ks = [find("energy-K1"), find("energy-K2"), find("energy-K3")];
    let ns: Vec<usize> = ks[0]
        .map(|r| r.entries.iter().filter(|e| e.label.is_none()).filter_map(|e| e.n).collect())
        .unwrap_or_default();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(ENERGY_HEADER)?;
    for n in ns {
        let mut row = vec![n.to_string()];
        for k in &ks {
            match k.and_then(|r| r.entry_for_n(n)) {
                Some(e) => row.extend([num(e.value), num(e.se)]),
                None => row.extend([String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Flat table of every entry of every report.
pub fn write_reports_csv(path: &Path, reports: &[EstimateReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(REPORT_HEADER)?;
    for r in reports {
        for e in &r.entries {
            w.write_record([
                r.key.clone(),
                e.n.map(|n| n.to_string()).unwrap_or_default(),
                e.label.clone().unwrap_or_default(),
                num(e.value),
                num(e.se),
                e.ensemble.to_string(),
                r.verdict.as_str().to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_reports_jsonl(path: &Path, reports: &[EstimateReport]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for r in reports {
        w.write_all(r.to_json_lines().as_bytes())?;
    }
    w.flush()?;
    Ok(())
}
