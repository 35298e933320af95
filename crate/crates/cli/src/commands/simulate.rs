//! `simulate`: one reference trajectory plus lifted propagations for every
//! grid point, written as CSV together with the model matrices.

use crate::checks::{lifted_sweep_point, reference_run};
use crate::config::ExperimentConfig;
use anyhow::Result;
use liftquad::io::{write_lifted_trajectory_csv, write_matrix_csv, write_trajectory_csv};
use liftquad::lift::{assemble_a, b_selector, lift, propagate_lifted};
use liftquad::signal::SampledSignal;
use std::path::Path;

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let mut manifest = super::start_manifest(cfg, out_dir, "simulate")?;
    let data = reference_run(cfg, cfg.sim.t_final)?;

    let reference_path = out_dir.join("trajectory.csv");
    write_trajectory_csv(&reference_path, &data.reference)?;
    manifest.record("trajectory.csv");
    println!(
        "reference: {} samples, envelope max|w| = {:.6}, max|v| = {:.6}",
        data.reference.len(),
        data.max_omega,
        data.max_v
    );

    for &n in &cfg.lift.n_grid {
        let lift_cfg = cfg.lift_config(n, data.max_omega, data.max_v)?;
        let lifted = propagate_lifted(
            &lift(&data.reference.states[0], &lift_cfg),
            &SampledSignal(data.reference.input_vectors()),
            &data.params,
            &lift_cfg,
            cfg.sim.t_final,
            cfg.sim.dt,
        )?;
        let name = format!("lifted_n{n}.csv");
        write_lifted_trajectory_csv(&out_dir.join(&name), &lifted, &lift_cfg)?;
        manifest.record(name);

        let a_name = format!("a_n{n}.csv");
        write_matrix_csv(&out_dir.join(&a_name), &assemble_a(&lift_cfg))?;
        manifest.record(a_name);
        let b_name = format!("b_selector_n{n}.csv");
        write_matrix_csv(&out_dir.join(&b_name), &b_selector(&lift_cfg))?;
        manifest.record(b_name);

        // Quick quality line per grid point.
        let point = lifted_sweep_point(cfg, &data, n)?;
        let last = point.errors.times.len() - 1;
        println!(
            "N1=N2={n}: terminal errors pos {:.3e}, vel {:.3e}, ang {:.3e} (pose defect {:.3e})",
            point.errors.position[last],
            point.errors.velocity[last],
            point.errors.angles[last],
            point.max_rotation_defect
        );
    }

    manifest.write(out_dir)?;
    println!("wrote {}", out_dir.join("manifest.toml").display());
    Ok(0)
}
