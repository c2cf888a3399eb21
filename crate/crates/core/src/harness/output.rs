//! Sweep serialization: CSV grids and PGM heatmaps.
//!
//! Both files embed the fully resolved configuration and schema version as
//! `#` comment lines, and both are pure functions of the grid data, so a
//! rerun of the same spec reproduces them byte for byte. Wall-clock
//! measurements are the one exception: the `mean_time_s` column is written
//! as zero unless timing output is explicitly requested, because measured
//! times would break reproducibility.

use crate::harness::SweepGrid;

/// Single-line metadata comment (schema version plus resolved spec JSON).
pub fn meta_line(grid: &SweepGrid) -> String {
    let spec = serde_json::to_string(&grid.spec).unwrap_or_else(|_| "{}".into());
    format!(
        "schema_version={} tau={:e} {}",
        crate::SCHEMA_VERSION,
        grid.spec.resolved_tau(),
        spec
    )
}

/// CSV with a `#` metadata comment, a header row, and one row per cell in
/// axis1-major order.
pub fn sweep_csv(grid: &SweepGrid, include_timing: bool) -> String {
    let mut out = String::new();
    out.push_str(&format!("# {}\n", meta_line(grid).replace('\n', " ")));
    out.push_str("axis1,axis2,trials,successes,success_rate,mean_rel_error,mean_time_s,diverged\n");
    for cell in &grid.cells {
        let time = if include_timing {
            cell.mean_wall_time
        } else {
            0.0
        };
        out.push_str(&format!(
            "{},{},{},{},{:.6},{:.6e},{:.6},{}\n",
            cell.axis1,
            cell.axis2,
            cell.trials,
            cell.successes,
            cell.success_rate(),
            cell.mean_rel_error,
            time,
            cell.diverged
        ));
    }
    out
}

/// Binary PGM (P5) heatmap: one pixel per cell, gray = round(255 *
/// success_rate), rows indexed by axis2 (ascending), columns by axis1.
pub fn sweep_pgm(grid: &SweepGrid) -> Vec<u8> {
    let width = grid.spec.axis1.values.len();
    let height = grid.spec.axis2.values.len();
    let mut out = Vec::new();
    out.extend_from_slice(b"P5\n");
    out.extend_from_slice(format!("# {}\n", meta_line(grid).replace('\n', " ")).as_bytes());
    out.extend_from_slice(format!("{width} {height}\n255\n").as_bytes());
    for i2 in 0..height {
        for i1 in 0..width {
            let rate = grid.cell(i1, i2).success_rate();
            out.push((255.0 * rate).round() as u8);
        }
    }
    out
}
