//! Experiment configuration: a single TOML file with strict schema
//! validation (unknown keys are rejected).

use anyhow::{bail, Context, Result};
use liftquad::dynamics::{QuadrotorParams, QuadrotorState, ReferenceModel};
use liftquad::lift::{BConstruction, InputCoupling, LiftConfig};
use liftquad::se3::{rotation_exp, Pose};
use liftquad::signal::RandomSineSignal;
use liftquad::{Mat3, Vec3};
use serde::{Deserialize, Serialize};
use std::hash::{Hash, Hasher};
use std::path::Path;

/// The configuration shipped with the tool; see `configs/default.toml`.
pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub quadrotor: QuadrotorSection,
    pub initial_state: InitialStateSection,
    pub signal: SignalSection,
    pub sim: SimSection,
    pub lift: LiftSection,
    pub baseline: BaselineSection,
    pub recovery: RecoverySection,
    pub audit: AuditSection,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct QuadrotorSection {
    pub mass: f64,
    /// Inertia: 3 entries for a diagonal matrix or 9 entries row-major.
    pub inertia: Vec<f64>,
    pub thrust_coeff: f64,
    pub moment_coeff: f64,
    pub arm_length: f64,
    pub gravity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSection {
    /// Initial attitude as an axis-angle rotation vector.
    pub attitude: [f64; 3],
    pub position: [f64; 3],
    pub omega: [f64; 3],
    pub velocity: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SignalSection {
    pub amplitude: f64,
    pub gamma_max: f64,
    pub carrier_freq: f64,
    /// Integrator steps per redraw of the random modulation.
    pub hold_steps: usize,
    /// One modulation draw shared by all four channels.
    pub scalar_gamma: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub t_final: f64,
    pub dt: f64,
    pub seed: u64,
    /// `"full"` or `"simplified"`.
    pub reference_model: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LiftSection {
    /// Chain lengths swept by `sweep` (N1 = N2 per point).
    pub n_grid: Vec<usize>,
    pub normalized: bool,
    /// Margins over the strict normalization bounds, applied to the
    /// envelope measured on the reference run.
    pub margin_omega: f64,
    pub margin_v: f64,
    /// Explicit constants override the envelope-derived ones when set.
    pub omega0: Option<f64>,
    pub v0: Option<f64>,
    /// `"columnwise"` or `"closed-form"`.
    pub b_construction: String,
    pub paper_literal_scaling: bool,
    /// `"inertia-inverse"` or `"inertia-literal"`.
    pub input_coupling: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BaselineSection {
    pub trajectories: usize,
    pub t_train: f64,
    pub ridge: f64,
    /// Fit/rollout stride in integrator steps.
    pub stride: usize,
    /// Training runs use independent per-channel modulation.
    pub train_scalar_gamma: bool,
    /// Chain lengths tabulated against the baseline.
    pub compare_ns: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RecoverySection {
    pub n_pair: [usize; 2],
    pub t_run: f64,
    pub samples: usize,
    pub u_star_min: f64,
    pub u_star_max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AuditSection {
    pub samples: usize,
    pub k_max: usize,
    pub omega_bar: f64,
    pub v_bar: f64,
    pub input_bound: f64,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).context("config schema error")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn built_in_default() -> Self {
        Self::from_toml(DEFAULT_CONFIG).expect("built-in config is valid")
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?.validate().map_err(anyhow::Error::from)?;
        if !(self.sim.dt > 0.0 && self.sim.t_final > 0.0) {
            bail!("sim.dt and sim.t_final must be positive");
        }
        self.reference_model()?;
        self.b_construction()?;
        self.input_coupling()?;
        if self.lift.n_grid.is_empty() {
            bail!("lift.n_grid must not be empty");
        }
        if self.lift.n_grid.iter().any(|n| *n < 1) {
            bail!("lift.n_grid entries must be at least 1");
        }
        if self.lift.normalized && (self.lift.margin_omega <= 1.0 || self.lift.margin_v <= 1.0) {
            bail!("normalization margins must exceed 1");
        }
        if self.baseline.stride < 1 {
            bail!("baseline.stride must be at least 1");
        }
        if self.recovery.samples < 1 {
            bail!("recovery.samples must be at least 1");
        }
        Ok(())
    }

    pub fn params(&self) -> Result<QuadrotorParams> {
        let inertia = match self.quadrotor.inertia.len() {
            3 => Mat3::from_diagonal(&Vec3::new(
                self.quadrotor.inertia[0],
                self.quadrotor.inertia[1],
                self.quadrotor.inertia[2],
            )),
            9 => Mat3::from_row_slice(&self.quadrotor.inertia),
            n => bail!("quadrotor.inertia needs 3 (diagonal) or 9 (row-major) entries, got {n}"),
        };
        Ok(QuadrotorParams {
            mass: self.quadrotor.mass,
            inertia,
            thrust_coeff: self.quadrotor.thrust_coeff,
            moment_coeff: self.quadrotor.moment_coeff,
            arm_length: self.quadrotor.arm_length,
            gravity: self.quadrotor.gravity,
        })
    }

    pub fn initial_state(&self) -> QuadrotorState {
        QuadrotorState {
            pose: Pose {
                r: rotation_exp(&Vec3::from(self.initial_state.attitude)),
                p: Vec3::from(self.initial_state.position),
            },
            omega: Vec3::from(self.initial_state.omega),
            velocity: Vec3::from(self.initial_state.velocity),
        }
    }

    pub fn reference_model(&self) -> Result<ReferenceModel> {
        match self.sim.reference_model.as_str() {
            "full" => Ok(ReferenceModel::Full),
            "simplified" => Ok(ReferenceModel::Simplified),
            other => bail!("sim.reference_model must be \"full\" or \"simplified\", got {other:?}"),
        }
    }

    fn b_construction(&self) -> Result<BConstruction> {
        match self.lift.b_construction.as_str() {
            "columnwise" => Ok(BConstruction::Columnwise),
            "closed-form" => Ok(BConstruction::ClosedForm),
            other => bail!(
                "lift.b_construction must be \"columnwise\" or \"closed-form\", got {other:?}"
            ),
        }
    }

    fn input_coupling(&self) -> Result<InputCoupling> {
        match self.lift.input_coupling.as_str() {
            "inertia-inverse" => Ok(InputCoupling::InertiaInverse),
            "inertia-literal" => Ok(InputCoupling::InertiaLiteral),
            other => bail!(
                "lift.input_coupling must be \"inertia-inverse\" or \"inertia-literal\", got {other:?}"
            ),
        }
    }

    /// The modulated-sine signal for a given seed.
    pub fn signal(&self, seed: u64, scalar_gamma: bool) -> RandomSineSignal {
        RandomSineSignal {
            amplitude: self.signal.amplitude,
            gamma_max: self.signal.gamma_max,
            freq: self.signal.carrier_freq,
            hold_steps: self.signal.hold_steps,
            scalar_gamma,
            seed,
        }
    }

    /// Lift configuration for chain length `n`, normalized against the
    /// measured speed envelope when requested.
    pub fn lift_config(&self, n: usize, max_omega: f64, max_v: f64) -> Result<LiftConfig> {
        let mut cfg = if self.lift.normalized {
            let omega0 = self
                .lift
                .omega0
                .unwrap_or(self.lift.margin_omega * 2.0_f64.sqrt() * max_omega);
            let v0 = self.lift.v0.unwrap_or(self.lift.margin_v * max_v);
            LiftConfig::normalized(n, n, omega0, v0)
        } else {
            LiftConfig::raw(n, n)
        };
        cfg.b_construction = self.b_construction()?;
        cfg.input_coupling = self.input_coupling()?;
        cfg.paper_literal_scaling = self.lift.paper_literal_scaling;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Stable hash of the serialized configuration, for the run manifest.
    pub fn stable_hash(&self) -> String {
        let text = toml::to_string(self).expect("config serializes");
        let mut hasher = std::hash::DefaultHasher::new();
        text.hash(&mut hasher);
        format!("{:016x}", hasher.finish())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}
