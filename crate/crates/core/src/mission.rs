//! Plug-in/plug-out state machine and trace capture.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::geometry::{norm, MisalignmentAngles, Vec3};
use crate::impedance::{
    controller_update, ChannelStates, ControllerCommand, ControllerConfig, ImpedanceParams,
    MAX_STEP,
};
use crate::plant::{contact_forces, step_plant, ChargerState, NoiseModel, SocketModel};
use crate::{stats, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    PlugIn,
    PlugOut,
    Done,
    Fault,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::PlugIn => "plug_in",
            Phase::PlugOut => "plug_out",
            Phase::Done => "done",
            Phase::Fault => "fault",
        }
    }

    /// Whether the machine may move from `self` to `next`.
    pub fn can_follow(self, next: Phase) -> bool {
        use Phase::*;
        matches!(
            (self, next),
            (PlugIn, PlugIn | PlugOut) | (PlugOut, PlugOut | Done) | (PlugIn | PlugOut, Fault)
        )
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plug_in" => Ok(Phase::PlugIn),
            "plug_out" => Ok(Phase::PlugOut),
            "done" => Ok(Phase::Done),
            "fault" => Ok(Phase::Fault),
            other => Err(Error::invalid(alloc::format!("unknown phase {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionConfig {
    /// N
    pub f_z_ref_in: f64,
    /// N
    pub f_z_ref_out: f64,
    /// s
    pub dt: f64,
    /// mm
    pub depth_target: f64,
    /// mm
    pub depth_tol: f64,
    /// Slack (N) on the plug-in force condition.
    pub force_slack: f64,
    /// N
    pub disengage_force: f64,
    /// s
    pub disengage_hold: f64,
    /// s
    pub timeout: f64,
    /// N
    pub force_limit: f64,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            f_z_ref_in: -75.6,
            f_z_ref_out: 75.6,
            dt: crate::SAMPLE_PERIOD,
            depth_target: 34.8,
            depth_tol: 0.5,
            force_slack: 15.0,
            disengage_force: 5.0,
            disengage_hold: 0.1,
            timeout: 30.0,
            force_limit: 120.0,
        }
    }
}

impl MissionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.f_z_ref_in < 0.0 && self.f_z_ref_out > 0.0) {
            return Err(Error::invalid(
                "reference forces must satisfy f_z_ref_in < 0 < f_z_ref_out",
            ));
        }
        if !(self.dt > 0.0 && self.dt <= MAX_STEP) {
            return Err(Error::invalid(alloc::format!(
                "dt must be in (0, {MAX_STEP}], got {}",
                self.dt
            )));
        }
        let positive = [
            ("depth_target", self.depth_target),
            ("disengage_force", self.disengage_force),
            ("timeout", self.timeout),
            ("force_limit", self.force_limit),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(alloc::format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        let non_negative = [
            ("depth_tol", self.depth_tol),
            ("force_slack", self.force_slack),
            ("disengage_hold", self.disengage_hold),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(alloc::format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// One logged control period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    /// s
    pub t: f64,
    pub phase: Phase,
    pub theta: MisalignmentAngles,
    /// mm
    pub z: f64,
    /// Measured force (N), noise included.
    pub force: Vec3,
    pub cmd: ControllerCommand,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MissionTrace {
    pub rows: Vec<TraceRow>,
}

impl MissionTrace {
    pub fn phase_rows(&self, phase: Phase) -> impl Iterator<Item = &TraceRow> {
        self.rows.iter().filter(move |r| r.phase == phase)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MissionResult {
    pub success: bool,
    pub final_theta: MisalignmentAngles,
    /// s
    pub plug_in_duration: f64,
    /// s
    pub plug_out_duration: f64,
    /// N
    pub f_z_plateau_mean: f64,
    pub f_z_plateau_frac_within_15pct: f64,
    pub fault_reason: Option<String>,
}

/// Anything that turns a measured force into a velocity command.
pub trait ForceController {
    /// Clears internal state. Called at the plug-in/plug-out switch.
    fn reset(&mut self);

    fn update(&mut self, f_meas: Vec3, f_z_ref: f64, dt: f64) -> ControllerCommand;
}

/// The three-channel impedance controller with its state.
#[derive(Debug, Clone)]
pub struct ImpedanceController {
    cfg: ControllerConfig,
    states: ChannelStates,
}

impl ImpedanceController {
    pub fn new(cfg: ControllerConfig) -> Self {
        Self {
            cfg,
            states: ChannelStates::default(),
        }
    }

    pub fn states(&self) -> ChannelStates {
        self.states
    }
}

impl ForceController for ImpedanceController {
    fn reset(&mut self) {
        self.states = crate::impedance::reset(self.states);
    }

    fn update(&mut self, f_meas: Vec3, f_z_ref: f64, dt: f64) -> ControllerCommand {
        let cfg = self.cfg.with_f_z_ref(f_z_ref);
        let (next, cmd) = controller_update(&cfg, self.states, f_meas, dt);
        self.states = next;
        cmd
    }
}

/// Design settling time `4 / (zeta·omega_n) = 8·m_d / d_d` of a channel.
fn settling_time(p: &ImpedanceParams) -> f64 {
    8.0 * p.inertia() / p.damping()
}

/// Runs one plug-in/plug-out cycle with the impedance controller.
pub fn run_mission(
    socket: &SocketModel,
    noise: &NoiseModel,
    cfg_ctrl: &ControllerConfig,
    cfg_mission: &MissionConfig,
    init: &ChargerState,
) -> Result<(MissionResult, MissionTrace)> {
    cfg_ctrl.validate()?;
    let slowest = [cfg_ctrl.rot_x, cfg_ctrl.rot_y, cfg_ctrl.lin_z]
        .iter()
        .map(settling_time)
        .fold(0.0, f64::max);
    if cfg_mission.timeout <= 10.0 * slowest {
        return Err(Error::invalid(alloc::format!(
            "timeout {} s must exceed ten settling times ({} s)",
            cfg_mission.timeout,
            10.0 * slowest
        )));
    }
    run_mission_with(
        &mut ImpedanceController::new(*cfg_ctrl),
        socket,
        noise,
        cfg_mission,
        init,
    )
}

/// Runs one cycle with any [`ForceController`].
pub fn run_mission_with<C: ForceController>(
    controller: &mut C,
    socket: &SocketModel,
    noise: &NoiseModel,
    cfg: &MissionConfig,
    init: &ChargerState,
) -> Result<(MissionResult, MissionTrace)> {
    socket.validate()?;
    cfg.validate()?;
    if !(init.z.is_finite() && init.z <= 0.0) {
        return Err(Error::invalid(alloc::format!(
            "initial depth must be at or before the entry plane, got {} mm",
            init.z
        )));
    }
    if !(init.theta.theta_x.is_finite() && init.theta.theta_y.is_finite()) {
        return Err(Error::invalid("initial angles must be finite"));
    }
    let mut noise = noise.source()?;
    let dt = cfg.dt;
    let max_steps = libm::ceil(cfg.timeout / dt) as usize;
    let hold_steps = libm::round(cfg.disengage_hold / dt) as usize;

    let mut rows = Vec::new();
    let mut state = *init;
    let mut phase = Phase::PlugIn;
    let mut v_z_cmd = 0.0;
    let mut held = 0usize;
    let mut fault = None;
    controller.reset();

    for n in 0.. {
        let t = n as f64 * dt;
        let measured = contact_forces(socket, &state, v_z_cmd).map(|c| {
            let e = noise.sample();
            [c.force[0] + e[0], c.force[1] + e[1], c.force[2] + e[2]]
        });
        let force = match measured {
            Ok(f) => f,
            Err(err) => {
                fault = Some(err.to_string());
                [0.0; 3]
            }
        };

        if fault.is_none() {
            match phase {
                Phase::PlugIn => {
                    if state.z >= cfg.depth_target - cfg.depth_tol
                        && force[2].abs() >= cfg.f_z_ref_in.abs() - cfg.force_slack
                    {
                        phase = Phase::PlugOut;
                        controller.reset();
                    }
                }
                Phase::PlugOut => {
                    if state.z <= 0.0 && force[2].abs() < cfg.disengage_force {
                        held += 1;
                        if held >= hold_steps {
                            phase = Phase::Done;
                        }
                    } else {
                        held = 0;
                    }
                }
                Phase::Done | Phase::Fault => {}
            }
            let magnitude = norm(force);
            if magnitude > cfg.force_limit {
                fault = Some(alloc::format!(
                    "force limit exceeded: |F| = {magnitude:.1} N > {} N",
                    cfg.force_limit
                ));
            } else if phase != Phase::Done && n >= max_steps {
                fault = Some(alloc::format!("timeout after {} s", cfg.timeout));
            }
        }
        if fault.is_some() {
            phase = Phase::Fault;
        }

        let cmd = match phase {
            Phase::PlugIn => controller.update(force, cfg.f_z_ref_in, dt),
            Phase::PlugOut => controller.update(force, cfg.f_z_ref_out, dt),
            Phase::Done | Phase::Fault => ControllerCommand::default(),
        };
        rows.push(TraceRow {
            t,
            phase,
            theta: state.theta,
            z: state.z,
            force,
            cmd,
        });
        if matches!(phase, Phase::Done | Phase::Fault) {
            break;
        }
        state = step_plant(socket, &state, &cmd, dt);
        v_z_cmd = cmd.v_z;
    }

    let trace = MissionTrace { rows };
    let mut result = evaluate_result(&trace, cfg)?;
    if fault.is_some() {
        result.fault_reason = fault;
    }
    Ok((result, trace))
}

/// Recomputes the summary metrics of a logged trace.
pub fn evaluate_result(trace: &MissionTrace, cfg: &MissionConfig) -> Result<MissionResult> {
    let plug_in: Vec<&TraceRow> = trace.phase_rows(Phase::PlugIn).collect();
    let last_in = *plug_in
        .last()
        .ok_or_else(|| Error::invalid("trace has no plug-in rows"))?;
    let skip = plug_in.len() / 10;
    let plateau: Vec<f64> = plug_in[skip..plug_in.len() - skip]
        .iter()
        .map(|r| r.force[2])
        .collect();
    let band = 0.15 * cfg.f_z_ref_in.abs();
    let within = plateau
        .iter()
        .filter(|f| (**f - cfg.f_z_ref_in).abs() <= band)
        .count();

    let duration = |phase| {
        let mut rows = trace.phase_rows(phase);
        match (rows.next(), rows.last()) {
            (Some(first), Some(last)) => last.t - first.t,
            _ => 0.0,
        }
    };
    let fault = trace.rows.iter().any(|r| r.phase == Phase::Fault);
    Ok(MissionResult {
        success: trace.rows.iter().any(|r| r.phase == Phase::Done),
        final_theta: last_in.theta,
        plug_in_duration: duration(Phase::PlugIn),
        plug_out_duration: duration(Phase::PlugOut),
        f_z_plateau_mean: stats::mean(&plateau),
        f_z_plateau_frac_within_15pct: within as f64 / plateau.len() as f64,
        fault_reason: fault.then(|| "fault".to_string()),
    })
}
