//! Run configuration and sweep specification (JSON). Every field has a
//! default, so `{}` is a valid run configuration.

use std::path::{Path, PathBuf};

use plugsim_core::geometry::MisalignmentAngles;
use plugsim_core::impedance::{
    synthesize_params, CommandLimits, ControllerConfig, DesignSpec, ImpedanceParams, LinearAnchor,
};
use plugsim_core::mission::{run_mission, MissionConfig, MissionResult, MissionTrace};
use plugsim_core::plant::{ChargerState, NoiseModel, SocketModel};
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::params::{ChannelParams, ControllerParamsFile, WiringName};
use crate::{Error, Result};

/// Gains derived from the demonstration cohort, used when a channel is not
/// configured.
pub const DEFAULT_K_W: [f64; 3] = [5.086e-3, 4.285e-3, 0.460];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    #[serde(default = "default_ts")]
    pub ts_s: f64,
    pub k_w: f64,
}

fn default_zeta() -> f64 {
    1.0
}

fn default_ts() -> f64 {
    0.2
}

/// A channel is given either by design targets or by explicit parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ChannelSpec {
    Design(DesignSection),
    Explicit(ChannelParams),
}

impl ChannelSpec {
    pub fn to_params(self) -> Result<ImpedanceParams> {
        match self {
            ChannelSpec::Design(d) => {
                Ok(synthesize_params(&DesignSpec::new(d.zeta, d.ts_s, d.k_w)?)?)
            }
            ChannelSpec::Explicit(p) => p.to_params(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorName {
    PhaseStart,
    #[default]
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitsSection {
    pub omega_max_rad_s: f64,
    pub v_z_max_mm_s: f64,
}

impl Default for LimitsSection {
    fn default() -> Self {
        let l = CommandLimits::default();
        Self {
            omega_max_rad_s: l.omega_max,
            v_z_max_mm_s: l.v_z_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ControllerSection {
    /// Parameter file from `calibrate`; relative paths resolve against the
    /// configuration file's directory.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params_file: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rot_x: Option<ChannelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rot_y: Option<ChannelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lin_z: Option<ChannelSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wiring: Option<WiringName>,
    pub limits: LimitsSection,
    pub linear_anchor: AnchorName,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MissionSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_z_ref_in: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f_z_ref_out: Option<f64>,
    pub dt_s: f64,
    pub depth_target_mm: f64,
    pub depth_tol_mm: f64,
    pub force_slack_n: f64,
    pub disengage_force_n: f64,
    pub disengage_hold_s: f64,
    pub timeout_s: f64,
    pub force_limit_n: f64,
}

impl Default for MissionSection {
    fn default() -> Self {
        let m = MissionConfig::default();
        Self {
            f_z_ref_in: None,
            f_z_ref_out: None,
            dt_s: m.dt,
            depth_target_mm: m.depth_target,
            depth_tol_mm: m.depth_tol,
            force_slack_n: m.force_slack,
            disengage_force_n: m.disengage_force,
            disengage_hold_s: m.disengage_hold,
            timeout_s: m.timeout,
            force_limit_n: m.force_limit,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SocketSection {
    pub depth_mm: f64,
    pub chamfer_angle_deg: f64,
    pub chamfer_length_mm: f64,
    pub k_lateral: f64,
    pub mu_lateral: f64,
    pub k_viscous_z: f64,
    pub f_base_n: f64,
    pub k_depth: f64,
    pub max_tilt_deg: f64,
}

impl Default for SocketSection {
    fn default() -> Self {
        let s = SocketModel::default();
        Self {
            depth_mm: s.depth,
            chamfer_angle_deg: s.chamfer_angle,
            chamfer_length_mm: s.chamfer_length,
            k_lateral: s.k_lateral,
            mu_lateral: s.mu_lateral,
            k_viscous_z: s.k_viscous_z,
            f_base_n: s.f_base,
            k_depth: s.k_depth,
            max_tilt_deg: s.max_tilt,
        }
    }
}

impl SocketSection {
    pub fn model(&self) -> SocketModel {
        SocketModel {
            depth: self.depth_mm,
            chamfer_angle: self.chamfer_angle_deg,
            chamfer_length: self.chamfer_length_mm,
            k_lateral: self.k_lateral,
            mu_lateral: self.mu_lateral,
            k_viscous_z: self.k_viscous_z,
            f_base: self.f_base_n,
            k_depth: self.k_depth,
            max_tilt: self.max_tilt_deg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub sigma_f_n: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        Self {
            sigma_f_n: NoiseModel::default().sigma_f,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlantSection {
    pub socket: SocketSection,
    pub noise: NoiseSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitSection {
    pub theta_x_deg: f64,
    pub theta_y_deg: f64,
    pub z_mm: f64,
}

impl Default for InitSection {
    fn default() -> Self {
        Self {
            theta_x_deg: 0.0,
            theta_y_deg: 0.0,
            z_mm: -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub controller: ControllerSection,
    pub mission: MissionSection,
    pub plant: PlantSection,
    pub init: InitSection,
}

/// Everything one mission needs, with defaults and files applied.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedRun {
    pub socket: SocketModel,
    pub noise: NoiseModel,
    pub controller: ControllerConfig,
    pub mission: MissionConfig,
    pub init: ChargerState,
}

impl ResolvedRun {
    pub fn run(&self) -> Result<(MissionResult, MissionTrace)> {
        Ok(run_mission(
            &self.socket,
            &self.noise,
            &self.controller,
            &self.mission,
            &self.init,
        )?)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        source_name: path.display().to_string(),
        source,
    })
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    /// Applies defaults and referenced files. `base_dir` anchors relative
    /// paths; `seed` seeds the noise stream.
    pub fn resolve(&self, base_dir: &Path, seed: u64) -> Result<ResolvedRun> {
        let c = &self.controller;
        let file = match &c.params_file {
            Some(p) => Some(ControllerParamsFile::load(&base_dir.join(p))?),
            None => None,
        };
        let channel = |spec: Option<ChannelSpec>,
                       from_file: Option<ChannelParams>,
                       k_w: f64|
         -> Result<ImpedanceParams> {
            match (spec, from_file) {
                (Some(s), _) => s.to_params(),
                (None, Some(p)) => p.to_params(),
                (None, None) => ChannelSpec::Design(DesignSection {
                    zeta: 1.0,
                    ts_s: 0.2,
                    k_w,
                })
                .to_params(),
            }
        };
        let mut controller = ControllerConfig::new(
            channel(c.rot_x, file.as_ref().map(|f| f.rot_x), DEFAULT_K_W[0])?,
            channel(c.rot_y, file.as_ref().map(|f| f.rot_y), DEFAULT_K_W[1])?,
            channel(c.lin_z, file.as_ref().map(|f| f.lin_z), DEFAULT_K_W[2])?,
        );
        controller.wiring = c
            .wiring
            .or(file.as_ref().map(|f| f.wiring))
            .unwrap_or_default()
            .into();
        controller.limits = CommandLimits {
            omega_max: c.limits.omega_max_rad_s,
            v_z_max: c.limits.v_z_max_mm_s,
        };
        controller.linear_anchor = match c.linear_anchor {
            AnchorName::PhaseStart => LinearAnchor::PhaseStart,
            AnchorName::Incremental => LinearAnchor::Incremental,
        };
        controller.validate()?;

        let m = &self.mission;
        let defaults = MissionConfig::default();
        let mission = MissionConfig {
            f_z_ref_in: m
                .f_z_ref_in
                .or(file.as_ref().map(|f| f.f_z_ref_in))
                .unwrap_or(defaults.f_z_ref_in),
            f_z_ref_out: m
                .f_z_ref_out
                .or(file.as_ref().map(|f| f.f_z_ref_out))
                .unwrap_or(defaults.f_z_ref_out),
            dt: m.dt_s,
            depth_target: m.depth_target_mm,
            depth_tol: m.depth_tol_mm,
            force_slack: m.force_slack_n,
            disengage_force: m.disengage_force_n,
            disengage_hold: m.disengage_hold_s,
            timeout: m.timeout_s,
            force_limit: m.force_limit_n,
        };
        mission.validate()?;
        let socket = self.plant.socket.model();
        socket.validate()?;
        if mission.depth_target > socket.depth {
            return Err(Error::Invalid(format!(
                "depth target {} mm is deeper than the socket ({} mm)",
                mission.depth_target, socket.depth
            )));
        }
        let noise = NoiseModel {
            sigma_f: self.plant.noise.sigma_f_n,
            seed,
        };
        noise.source()?;
        let init = ChargerState::new(
            MisalignmentAngles::from_degrees(self.init.theta_x_deg, self.init.theta_y_deg),
            self.init.z_mm,
        );
        Ok(ResolvedRun {
            socket,
            noise,
            controller,
            mission,
            init,
        })
    }
}

/// Seed precedence: command-line flag, then the configuration file, then
/// the environment, then zero.
pub fn resolve_seed(flag: Option<u64>, file: Option<u64>, env: Option<&str>) -> Result<u64> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match env {
        Some(raw) => raw.trim().parse().map_err(|_| {
            Error::Invalid(format!(
                "{}={raw:?} is not an unsigned integer",
                crate::SEED_ENV
            ))
        }),
        None => Ok(0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub n_runs: usize,
    #[serde(default = "default_theta_total_max")]
    pub theta_total_max_deg: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub base: RunConfig,
}

fn default_theta_total_max() -> f64 {
    10.0
}

/// Seed and initial angles of one sweep run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRun {
    pub index: usize,
    pub seed: u64,
    pub theta_x_deg: f64,
    pub theta_y_deg: f64,
}

impl SweepSpec {
    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::Invalid("n_runs must be at least 1".into()));
        }
        let max_tilt = self.base.plant.socket.max_tilt_deg;
        if !(self.theta_total_max_deg >= 0.0 && self.theta_total_max_deg <= max_tilt) {
            return Err(Error::Invalid(format!(
                "theta_total_max_deg must be in [0, {max_tilt}], got {}",
                self.theta_total_max_deg
            )));
        }
        Ok(())
    }

    /// Per-run seeds come from independent ChaCha8 streams of the sweep
    /// seed; each run's initial tilt is drawn from its own seed, with the
    /// total uniform in `[0, max]` and the direction uniform on the circle.
    pub fn runs(&self, sweep_seed: u64) -> Vec<SweepRun> {
        (0..self.n_runs)
            .map(|index| {
                let mut stream = ChaCha8Rng::seed_from_u64(sweep_seed);
                stream.set_stream(index as u64);
                let seed = stream.next_u64();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let total = if self.theta_total_max_deg > 0.0 {
                    Uniform::new_inclusive(0.0, self.theta_total_max_deg)
                        .expect("valid range")
                        .sample(&mut rng)
                } else {
                    0.0
                };
                let dir = Uniform::new(0.0, std::f64::consts::TAU)
                    .expect("valid range")
                    .sample(&mut rng);
                SweepRun {
                    index,
                    seed,
                    theta_x_deg: total * dir.cos(),
                    theta_y_deg: total * dir.sin(),
                }
            })
            .collect()
    }

    /// The standalone run configuration that replays `run`.
    pub fn run_config(&self, run: &SweepRun) -> RunConfig {
        let mut cfg = self.base.clone();
        cfg.seed = Some(run.seed);
        cfg.init.theta_x_deg = run.theta_x_deg;
        cfg.init.theta_y_deg = run.theta_y_deg;
        cfg
    }
}
