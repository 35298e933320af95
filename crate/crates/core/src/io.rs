//! CSV import/export for trajectories, lifted trajectories, matrices, and
//! error series.
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! written file is bit-reproducible for identical inputs and parses back to
//! identical values.

use crate::analysis::ErrorSeries;
use crate::dynamics::{QuadrotorState, Trajectory, TransformedInput};
use crate::error::CoreError;
use crate::lift::{LiftConfig, LiftedTrajectory};
use crate::se3::Pose;
use crate::{Mat3, MatN, Vec3, Vec4};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

/// Header of the nonlinear-trajectory schema (rotation listed row-major).
pub const TRAJECTORY_HEADER: &str =
    "t,px,py,pz,r11,r12,r13,r21,r22,r23,r31,r32,r33,wx,wy,wz,vx,vy,vz,u1,u2,u3,u4";

fn fmt(value: f64) -> String {
    if value.is_nan() {
        "nan".to_string()
    } else {
        format!("{value}")
    }
}

/// Writes a state trajectory with its held inputs, one row per sample.
pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<(), CoreError> {
    traj.validate()?;
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{TRAJECTORY_HEADER}")?;
    for ((t, s), u) in traj.times.iter().zip(&traj.states).zip(&traj.inputs) {
        let mut row = Vec::with_capacity(23);
        row.push(fmt(*t));
        for i in 0..3 {
            row.push(fmt(s.pose.p[i]));
        }
        for r in 0..3 {
            for c in 0..3 {
                row.push(fmt(s.pose.r[(r, c)]));
            }
        }
        for i in 0..3 {
            row.push(fmt(s.omega[i]));
        }
        for i in 0..3 {
            row.push(fmt(s.velocity[i]));
        }
        for i in 0..4 {
            row.push(fmt(u.0[i]));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

fn parse_f64(field: &str, line: usize) -> Result<f64, CoreError> {
    if field == "nan" {
        return Ok(f64::NAN);
    }
    field
        .parse()
        .map_err(|e| CoreError::Parse(format!("line {line}: bad float {field:?}: {e}")))
}

/// Reads a trajectory written by [`write_trajectory_csv`].
pub fn read_trajectory_csv(path: &Path) -> Result<Trajectory, CoreError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut lines = reader.lines().enumerate();
    let header = lines
        .next()
        .ok_or_else(|| CoreError::Parse("empty file".into()))?
        .1?;
    if header.trim() != TRAJECTORY_HEADER {
        return Err(CoreError::Parse(format!("unexpected header {header:?}")));
    }
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        inputs: Vec::new(),
    };
    for (idx, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 23 {
            return Err(CoreError::Parse(format!(
                "line {idx}: expected 23 fields, got {}",
                fields.len()
            )));
        }
        let v: Vec<f64> = fields
            .iter()
            .map(|f| parse_f64(f, idx))
            .collect::<Result<_, _>>()?;
        traj.times.push(v[0]);
        let mut r = Mat3::zeros();
        for rr in 0..3 {
            for cc in 0..3 {
                r[(rr, cc)] = v[4 + rr * 3 + cc];
            }
        }
        traj.states.push(QuadrotorState {
            pose: Pose {
                r,
                p: Vec3::new(v[1], v[2], v[3]),
            },
            omega: Vec3::new(v[13], v[14], v[15]),
            velocity: Vec3::new(v[16], v[17], v[18]),
        });
        traj.inputs
            .push(TransformedInput(Vec4::new(v[19], v[20], v[21], v[22])));
    }
    traj.validate()?;
    Ok(traj)
}

/// Column names of the lifted-trajectory schema for a configuration:
/// `t`, head entries, `g{k}_{row}{col}` column-major, `f{k}_{i}`, inputs.
pub fn lifted_header(cfg: &LiftConfig) -> String {
    let mut cols = vec![
        "t".to_string(),
        "w1".to_string(),
        "w2".to_string(),
        "w3".to_string(),
        "v3".to_string(),
    ];
    for k in 0..cfg.n1 {
        for c in 0..4 {
            for r in 0..4 {
                cols.push(format!("g{k}_{r}{c}"));
            }
        }
    }
    for k in 0..cfg.n2 {
        for i in 0..3 {
            cols.push(format!("f{k}_{i}"));
        }
    }
    for i in 1..=4 {
        cols.push(format!("u{i}"));
    }
    cols.join(",")
}

/// Writes a lifted trajectory with block-named state columns.
pub fn write_lifted_trajectory_csv(
    path: &Path,
    traj: &LiftedTrajectory,
    cfg: &LiftConfig,
) -> Result<(), CoreError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "{}", lifted_header(cfg))?;
    for ((t, x), u) in traj.times.iter().zip(&traj.states).zip(&traj.inputs) {
        let mut row = Vec::with_capacity(cfg.dim() + 5);
        row.push(fmt(*t));
        for value in x.0.iter() {
            row.push(fmt(*value));
        }
        for i in 0..4 {
            row.push(fmt(u[i]));
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Dense matrix as CSV, one row per line, no header.
pub fn write_matrix_csv(path: &Path, m: &MatN) -> Result<(), CoreError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| fmt(m[(r, c)])).collect();
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a dense CSV matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<MatN, CoreError> {
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|f| parse_f64(f.trim(), idx))
            .collect::<Result<_, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(CoreError::Parse(format!(
                    "line {idx}: ragged row ({} vs {})",
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CoreError::Parse("empty matrix file".into()));
    }
    let (nr, nc) = (rows.len(), rows[0].len());
    Ok(MatN::from_fn(nr, nc, |r, c| rows[r][c]))
}

/// Error series as `t,pos_rel_err,vel_rel_err,ang_rel_err`; undefined
/// samples are written as `nan`.
pub fn write_error_series_csv(path: &Path, es: &ErrorSeries) -> Result<(), CoreError> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "t,pos_rel_err,vel_rel_err,ang_rel_err")?;
    for i in 0..es.times.len() {
        writeln!(
            w,
            "{},{},{},{}",
            fmt(es.times[i]),
            fmt(es.position[i]),
            fmt(es.velocity[i]),
            fmt(es.angles[i])
        )?;
    }
    Ok(())
}
