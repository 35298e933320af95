//! `audit`: every invariant suite as one machine-readable report; exit
//! code 1 when any check fails.

use crate::checks;
use crate::config::ExperimentConfig;
use anyhow::Result;
use std::io::Write;
use std::path::Path;

pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<i32> {
    let mut manifest = super::start_manifest(cfg, out_dir, "audit")?;
    let seed = cfg.sim.seed;

    let mut outcomes = vec![
        checks::check_dimension_formula(),
        checks::check_observable_bounds(cfg.audit.samples.min(2000), cfg.audit.k_max, seed),
        checks::check_monotone_decay(cfg.audit.samples.min(2000), cfg.audit.k_max, seed ^ 1),
        checks::check_convergence_audit(cfg),
        checks::check_b_equivalence(40, seed ^ 2),
        checks::check_controllability(),
        checks::check_unlift_round_trip(200, seed ^ 3),
        checks::check_recovery_optimality(seed ^ 4),
        checks::check_integrator(),
        checks::check_mutation_sensitivity(),
    ];
    let (run_a, run_b) = checks::check_lift_consistency(cfg.sim.dt);
    outcomes.push(run_a);
    outcomes.push(run_b);

    let mut file = std::fs::File::create(out_dir.join("audit.csv"))?;
    writeln!(file, "check,status,details")?;
    let mut failures = 0usize;
    for outcome in &outcomes {
        let status = if outcome.passed { "pass" } else { "FAIL" };
        println!("audit {:32} {:4}  {}", outcome.name, status, outcome.details);
        writeln!(
            file,
            "{},{},\"{}\"",
            outcome.name,
            status,
            outcome.details.replace('"', "'")
        )?;
        if !outcome.passed {
            failures += 1;
        }
    }
    manifest.record("audit.csv");
    manifest.write(out_dir)?;
    if failures > 0 {
        eprintln!("{failures} audit check(s) failed");
        return Ok(1);
    }
    println!("all {} audit checks passed", outcomes.len());
    Ok(0)
}
