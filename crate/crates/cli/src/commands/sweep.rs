//! `sweep`: approximation errors across the truncation grid, with per-point
//! CSV series, summary tables at 30 s and 60 s, and one plot per quantity.

use crate::checks::run_error_sweep;
use crate::config::ExperimentConfig;
use crate::plot::{write_log_plot, Series};
use anyhow::Result;
use liftquad::io::write_error_series_csv;
use std::io::Write;
use std::path::Path;

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let mut manifest = super::start_manifest(cfg, out_dir, "sweep")?;
    let (data, points) = run_error_sweep(cfg, cfg.sim.t_final)?;
    println!(
        "reference envelope: max|w| = {:.6}, max|v| = {:.6}",
        data.max_omega, data.max_v
    );

    for point in &points {
        let name = format!("errors_n{}.csv", point.n);
        write_error_series_csv(&out_dir.join(&name), &point.errors)?;
        manifest.record(name);
    }

    // Summary tables in the comparison layout: one row per quantity, one
    // column per grid point.
    for t_table in [30.0, 60.0] {
        if t_table > cfg.sim.t_final + 1e-9 {
            continue;
        }
        let name = format!("summary_t{}.csv", t_table as i64);
        let mut file = std::fs::File::create(out_dir.join(&name))?;
        let header: Vec<String> = std::iter::once("quantity".to_string())
            .chain(points.iter().map(|p| format!("N{}", p.n)))
            .collect();
        writeln!(file, "{}", header.join(","))?;
        for (label, pick) in [
            ("x", 0usize),
            ("v", 1),
            ("angles", 2),
        ] {
            let mut row = vec![label.to_string()];
            for p in &points {
                let (pos, vel, ang) = p.errors.at_time(t_table).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                let value = [pos, vel, ang][pick];
                row.push(format!("{value}"));
            }
            writeln!(file, "{}", row.join(","))?;
        }
        manifest.record(name);
    }

    for (stem, label, select) in [
        ("error_position", "relative position error", 0usize),
        ("error_velocity", "relative velocity error", 1),
        ("error_angles", "relative Euler-angle error", 2),
    ] {
        let series: Vec<Series> = points
            .iter()
            .map(|p| Series {
                label: format!("N1=N2={}", p.n),
                points: p
                    .errors
                    .times
                    .iter()
                    .zip(match select {
                        0 => p.errors.position.iter(),
                        1 => p.errors.velocity.iter(),
                        _ => p.errors.angles.iter(),
                    })
                    .map(|(t, e)| (*t, *e))
                    .collect(),
            })
            .collect();
        let name = format!("{stem}.svg");
        write_log_plot(&out_dir.join(&name), label, "time (s)", label, &series)?;
        manifest.record(name);
    }

    // Console summary at the table times.
    for p in &points {
        let (p30, v30, a30) = p.errors.at_time(30.0).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        println!(
            "N1=N2={:2}: t=30 s errors pos {:.3e}, vel {:.3e}, ang {:.3e} (pose defect {:.3e})",
            p.n, p30, v30, a30, p.max_rotation_defect
        );
    }
    manifest.write(out_dir)?;
    Ok(0)
}
