use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat;
use crate::policy::DEFAULT_DELTA;
use crate::quaternion::UnitQuaternion;
use crate::sim::{DisturbanceEvent, DEFAULT_DT, DEFAULT_EPS_STOP, DEFAULT_OMEGA_STOP};
use crate::stiffness::StiffnessProfile;

const UNIT_TOL: f64 = 1e-6;

/// Nominal motion plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DsConfig {
    /// `ω = A_g Log_{q*}(q)`; `gain` is `A_g` by rows.
    TangentLinear { gain: [[f64; 3]; 3] },
    /// Replay of a recorded orientation trajectory (CSV, path relative to the config file).
    DemoField { path: String, gain: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DampingConfig {
    /// `2 · 0.7 · √(k̄ ī) · I₃`.
    Critical,
    /// Explicit SPD matrix by rows.
    Matrix([[f64; 3]; 3]),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartConfig {
    pub q: [f64; 4],
    #[serde(default)]
    pub omega: [f64; 3],
}

/// Starts at rest drawn at random angles from the goal about uniformly distributed axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStarts {
    pub count: usize,
    pub min_angle: f64,
    pub max_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_true")]
    pub svg: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            svg: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub ds: DsConfig,
    /// `[ν, uₓ, u_y, u_z]`; also the start of the via-point rollout.
    pub q0: [f64; 4],
    pub q_goal: [f64; 4],
    /// Closed-loop starts. When both this and `random_starts` are empty the run starts at
    /// `q0` at rest.
    #[serde(default)]
    pub starts: Vec<StartConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_starts: Option<RandomStarts>,
    #[serde(default = "default_n")]
    pub n_via: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_eps_sample")]
    pub eps_sample: f64,
    #[serde(default = "default_eps_stop")]
    pub eps_stop: f64,
    #[serde(default = "default_omega_stop")]
    pub omega_stop: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_stiffness")]
    pub stiffness: StiffnessProfile,
    #[serde(default = "default_one")]
    pub stiffness_scale: f64,
    #[serde(default = "default_damping")]
    pub damping: DampingConfig,
    /// Body inertia by rows, kg·m².
    #[serde(default = "default_inertia")]
    pub inertia: [[f64; 3]; 3],
    #[serde(default)]
    pub disturbances: Vec<DisturbanceEvent>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output: OutputConfig,
    /// Directory relative paths resolve against; set by [`load_scenario`].
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn default_name() -> String {
    "scenario".into()
}
fn default_out_dir() -> String {
    "out".into()
}
fn default_true() -> bool {
    true
}
fn default_n() -> usize {
    30
}
fn default_dt() -> f64 {
    DEFAULT_DT
}
fn default_eps_sample() -> f64 {
    0.05
}
fn default_eps_stop() -> f64 {
    DEFAULT_EPS_STOP
}
fn default_omega_stop() -> f64 {
    DEFAULT_OMEGA_STOP
}
fn default_delta() -> f64 {
    DEFAULT_DELTA
}
fn default_stiffness() -> StiffnessProfile {
    StiffnessProfile::constant(150.0)
}
fn default_one() -> f64 {
    1.0
}
fn default_damping() -> DampingConfig {
    DampingConfig::Critical
}
fn default_inertia() -> [[f64; 3]; 3] {
    [[0.01, 0.0, 0.0], [0.0, 0.01, 0.0], [0.0, 0.0, 0.01]]
}
fn default_t_max() -> f64 {
    30.0
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<ScenarioConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = ScenarioConfig::from_json_named(&text, &path.display().to_string())?;
    cfg.base_dir = path.parent().map(Path::to_path_buf);
    Ok(cfg)
}

impl ScenarioConfig {
    /// Parses and validates a scenario document.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_json_named(text, "scenario")
    }

    fn from_json_named(text: &str, name: &str) -> Result<Self> {
        let cfg: ScenarioConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            context: format!("{name} (line {}, column {})", e.line(), e.column()),
            message: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Parse {
            context: "scenario".into(),
            message: e.to_string(),
        })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn validate(&self) -> Result<()> {
        check_unit("q0", &self.q0)?;
        check_unit("q_goal", &self.q_goal)?;
        for (k, s) in self.starts.iter().enumerate() {
            check_unit(&format!("starts[{k}].q"), &s.q)?;
            if s.omega.iter().any(|w| !w.is_finite()) {
                return Err(invalid(format!("starts[{k}].omega not finite")));
            }
        }
        if let Some(r) = &self.random_starts {
            if !(0.0 <= r.min_angle
                && r.min_angle <= r.max_angle
                && r.max_angle < std::f64::consts::PI)
            {
                return Err(invalid(
                    "random_starts angles must satisfy 0 <= min_angle <= max_angle < pi",
                ));
            }
        }
        if self.n_via < 2 {
            return Err(invalid(format!("n_via must be >= 2, got {}", self.n_via)));
        }
        positive("dt", self.dt)?;
        positive("eps_sample", self.eps_sample)?;
        positive("t_max", self.t_max)?;
        positive("delta", self.delta)?;
        positive("stiffness_scale", self.stiffness_scale)?;
        non_negative("eps_stop", self.eps_stop)?;
        non_negative("omega_stop", self.omega_stop)?;
        self.stiffness.validate()?;
        match &self.ds {
            DsConfig::TangentLinear { gain } => {
                if gain.iter().flatten().any(|g| !g.is_finite()) {
                    return Err(invalid("ds.gain not finite"));
                }
            }
            DsConfig::DemoField { path, gain } => {
                if path.is_empty() {
                    return Err(invalid("ds.path is empty"));
                }
                positive("ds.gain", *gain)?;
            }
        }
        if let DampingConfig::Matrix(d) = &self.damping {
            if !mat::is_spd(&mat::from_rows(d), 1e-12) {
                return Err(invalid("damping not symmetric positive-definite"));
            }
        }
        if !mat::is_spd(&mat::from_rows(&self.inertia), 1e-12) {
            return Err(invalid("inertia not symmetric positive-definite"));
        }
        for d in &self.disturbances {
            d.validate()?;
        }
        Ok(())
    }

    pub fn q0(&self) -> Result<UnitQuaternion> {
        UnitQuaternion::from_array(self.q0)
    }

    pub fn goal(&self) -> Result<UnitQuaternion> {
        UnitQuaternion::from_array(self.q_goal)
    }

    pub fn resolve(&self, relative: &str) -> PathBuf {
        match &self.base_dir {
            Some(dir) => dir.join(relative),
            None => PathBuf::from(relative),
        }
    }

    /// Explicit starts followed by the seeded random ones; `q0` at rest if there are none.
    pub fn initial_states(&self, seed: u64) -> Result<Vec<(UnitQuaternion, Vector3<f64>)>> {
        let mut out = Vec::new();
        for s in &self.starts {
            out.push((UnitQuaternion::from_array(s.q)?, Vector3::from(s.omega)));
        }
        if let Some(r) = &self.random_starts {
            let goal = self.goal()?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..r.count {
                let z: f64 = rng.random_range(-1.0..=1.0);
                let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                let rho = (1.0 - z * z).sqrt();
                let axis = Vector3::new(rho * phi.cos(), rho * phi.sin(), z);
                let angle = if r.max_angle > r.min_angle {
                    rng.random_range(r.min_angle..=r.max_angle)
                } else {
                    r.min_angle
                };
                let q = UnitQuaternion::from_axis_angle(&axis, angle) * goal;
                out.push((q, Vector3::zeros()));
            }
        }
        if out.is_empty() {
            out.push((self.q0()?, Vector3::zeros()));
        }
        Ok(out)
    }
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::Validation(msg.into())
}

fn check_unit(name: &str, q: &[f64; 4]) -> Result<()> {
    let n = q.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
        return Err(invalid(format!("{name} not unit (norm {n})")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(invalid(format!("{name} must be > 0, got {x}")));
    }
    Ok(())
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("{name} must be >= 0, got {x}")));
    }
    Ok(())
}
