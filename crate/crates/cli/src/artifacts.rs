//! Per-run output directory: `series.csv`, `snapshots/`, `summary.json`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use degen_taxis::diagnostics::InvariantContext;
use degen_taxis::stepper::Trajectory;
use degen_taxis::ViolationReport;
use serde_json::{json, Value};

use crate::series::write_series;
use crate::snapshot::write_snapshot;

/// Writes the time series and, if requested, `u`/`v` snapshots at every
/// configured snapshot time and at the final time.
pub fn write_fields(dir: &Path, traj: &Trajectory, ctx: &InvariantContext, snapshots: bool) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let series = dir.join("series.csv");
    fs::write(&series, write_series(&traj.samples, ctx))?;
    let mut paths = vec![series];
    if snapshots {
        let snap_dir = dir.join("snapshots");
        let states = traj.snapshots.iter().chain(std::iter::once(&traj.final_state));
        for (k, s) in states.enumerate() {
            paths.extend(write_snapshot(&snap_dir, &format!("u_{k:04}"), "u", s.t, &s.u)?);
            paths.extend(write_snapshot(&snap_dir, &format!("v_{k:04}"), "v", s.t, &s.v)?);
        }
    }
    Ok(paths)
}

pub fn summary_json(config: Value, traj: &Trajectory, report: &ViolationReport, seconds: f64) -> Value {
    let min_u = traj.samples.iter().map(|s| s.min_u).fold(f64::INFINITY, f64::min);
    let min_v = traj.samples.iter().map(|s| s.min_v).fold(f64::INFINITY, f64::min);
    let last = traj.final_record();
    json!({
        "config": config,
        "pass": report.all_passed(),
        "invariants": report.checks,
        "extrema": {
            "max_sup_u": traj.audit.max_sup_u,
            "min_u": min_u,
            "min_v": min_v,
            "sup_v_initial": traj.samples[0].sup_v,
            "sup_v_final": last.sup_v,
            "mass_u_final": last.mass_u,
            "mass_v_final": last.mass_v,
        },
        "steps": {
            "t_final": traj.final_state.t,
            "accepted": traj.audit.accepted,
            "rejected": traj.audit.rejected,
            "dt_smallest": traj.audit.dt_smallest,
            "dt_largest": traj.audit.dt_largest,
            "stopped_early": traj.stopped_early,
        },
        "timing_seconds": seconds,
    })
}

pub fn write_json(path: &Path, value: &Value) -> io::Result<PathBuf> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, serde_json::to_string_pretty(value).expect("json serializes") + "\n")?;
    Ok(path.to_path_buf())
}
