//! `compare-baseline`: the analytic lifted model at the configured chain
//! lengths against the data-driven 18-observable dictionary, in the
//! three-row comparison-table layout.

use crate::checks::{lifted_sweep_point, reference_run, run_baseline};
use crate::config::ExperimentConfig;
use anyhow::Result;
use liftquad::io::write_matrix_csv;
use std::io::Write;
use std::path::Path;

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let mut manifest = super::start_manifest(cfg, out_dir, "compare-baseline")?;
    let data = reference_run(cfg, cfg.sim.t_final)?;

    let lifted: Vec<_> = cfg
        .baseline
        .compare_ns
        .iter()
        .map(|n| lifted_sweep_point(cfg, &data, *n))
        .collect::<Result<_>>()?;

    let baseline = match run_baseline(cfg, &data) {
        Ok(b) => Some(b),
        Err(e) => {
            eprintln!("baseline fit unavailable: {e:#}");
            None
        }
    };

    if let Some(b) = &baseline {
        write_matrix_csv(&out_dir.join("baseline_a.csv"), &b.fit.a_d)?;
        write_matrix_csv(&out_dir.join("baseline_b.csv"), &b.fit.b_d)?;
        manifest.record("baseline_a.csv");
        manifest.record("baseline_b.csv");
        println!(
            "baseline fit: residual {:.3e}, regressor rank {}, condition {:.3e}",
            b.fit.residual, b.fit.regressor_rank, b.fit.condition
        );
    }

    for t_table in [30.0, 60.0] {
        if t_table > cfg.sim.t_final + 1e-9 {
            continue;
        }
        let name = format!("comparison_t{}.csv", t_table as i64);
        let mut file = std::fs::File::create(out_dir.join(&name))?;
        let header: Vec<String> = std::iter::once("quantity".to_string())
            .chain(cfg.baseline.compare_ns.iter().map(|n| format!("N{n}")))
            .chain(std::iter::once("baseline".to_string()))
            .collect();
        writeln!(file, "{}", header.join(","))?;
        for (label, pick) in [("x", 0usize), ("v", 1), ("angles", 2)] {
            let mut row = vec![label.to_string()];
            for point in &lifted {
                let e = point.errors.at_time(t_table).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                row.push(format!("{}", [e.0, e.1, e.2][pick]));
            }
            match &baseline {
                Some(b) => {
                    let e = b.errors.at_time(t_table).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
                    row.push(format!("{}", [e.0, e.1, e.2][pick]));
                }
                None => row.push("not_fitted".to_string()),
            }
            writeln!(file, "{}", row.join(","))?;
        }
        println!("wrote {}", out_dir.join(&name).display());
        manifest.record(name);
    }

    // Console table at the final horizon.
    let t_table = cfg.sim.t_final.min(60.0);
    println!("errors at t = {t_table} s:");
    for point in &lifted {
        let (p, v, a) = point.errors.at_time(t_table).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        println!("  N1=N2={:2}: x {p:.3e}, v {v:.3e}, angles {a:.3e}", point.n);
    }
    if let Some(b) = &baseline {
        let (p, v, a) = b.errors.at_time(t_table).unwrap_or((f64::NAN, f64::NAN, f64::NAN));
        println!("  baseline: x {p:.3e}, v {v:.3e}, angles {a:.3e}");
    }

    manifest.write(out_dir)?;
    Ok(if baseline.is_some() { 0 } else { 1 })
}
