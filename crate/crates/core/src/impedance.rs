//! Second-order impedance channels and the three-channel controller.
//!
//! Each channel obeys `m_d·ẍ + d_d·ẋ + k_d·x = u` with the measured force
//! error as input `u`. Rotational channels work in radians and newtons,
//! the linear channel in millimetres and newtons. The controller commands the
//! channel velocities (force in, velocity out).

use crate::geometry::Vec3;
use crate::{Error, Result};

/// Design target for one channel: damping ratio, settling time (s) and DC
/// gain (rad/N or mm/N).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignSpec {
    pub zeta: f64,
    pub settling_time: f64,
    pub dc_gain: f64,
}

impl DesignSpec {
    pub fn new(zeta: f64, settling_time: f64, dc_gain: f64) -> Result<Self> {
        let spec = Self {
            zeta,
            settling_time,
            dc_gain,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Critically damped with a 0.2 s settling time.
    pub fn critically_damped(dc_gain: f64) -> Result<Self> {
        Self::new(1.0, 0.2, dc_gain)
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("zeta", self.zeta),
            ("settling time", self.settling_time),
            ("dc gain", self.dc_gain),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(alloc::format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Inertia, damping and stiffness of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedanceParams {
    m_d: f64,
    d_d: f64,
    k_d: f64,
}

impl ImpedanceParams {
    pub fn new(inertia: f64, damping: f64, stiffness: f64) -> Result<Self> {
        for (name, v) in [
            ("inertia", inertia),
            ("damping", damping),
            ("stiffness", stiffness),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(alloc::format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(Self {
            m_d: inertia,
            d_d: damping,
            k_d: stiffness,
        })
    }

    pub fn inertia(&self) -> f64 {
        self.m_d
    }

    pub fn damping(&self) -> f64 {
        self.d_d
    }

    pub fn stiffness(&self) -> f64 {
        self.k_d
    }

    pub fn natural_frequency(&self) -> f64 {
        libm::sqrt(self.k_d / self.m_d)
    }

    pub fn damping_ratio(&self) -> f64 {
        self.d_d / (2.0 * libm::sqrt(self.m_d * self.k_d))
    }

    pub fn dc_gain(&self) -> f64 {
        1.0 / self.k_d
    }
}

/// Parameters meeting `spec`, with the settling time tied to the natural
/// frequency by `t_s = 4 / (zeta·omega_n)`.
pub fn synthesize_params(spec: &DesignSpec) -> Result<ImpedanceParams> {
    spec.validate()?;
    let omega_n = 4.0 / (spec.zeta * spec.settling_time);
    let k_d = 1.0 / spec.dc_gain;
    let m_d = k_d / (omega_n * omega_n);
    let d_d = 2.0 * spec.zeta * libm::sqrt(m_d * k_d);
    ImpedanceParams::new(m_d, d_d, k_d)
}

/// Band around `zeta = 1` treated as critically damped by the closed forms.
const CRITICAL_BAND: f64 = 1e-10;

/// Closed-form displacement at time `t` after a force step `f_step` applied
/// to a channel at rest. Zero for `t <= 0`.
pub fn step_response_analytic(params: &ImpedanceParams, f_step: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let final_value = f_step * params.dc_gain();
    let wn = params.natural_frequency();
    let zeta = params.damping_ratio();
    let shape = if (zeta - 1.0).abs() <= CRITICAL_BAND {
        1.0 - libm::exp(-wn * t) * (1.0 + wn * t)
    } else if zeta < 1.0 {
        let wd = wn * libm::sqrt(1.0 - zeta * zeta);
        1.0 - libm::exp(-zeta * wn * t) * (libm::cos(wd * t) + zeta * wn / wd * libm::sin(wd * t))
    } else {
        let root = libm::sqrt(zeta * zeta - 1.0);
        let r1 = -wn * (zeta - root);
        let r2 = -wn * (zeta + root);
        1.0 + (r2 * libm::exp(r1 * t) - r1 * libm::exp(r2 * t)) / (r1 - r2)
    };
    final_value * shape
}

/// Displacement (rad or mm) and velocity (rad/s or mm/s) of one channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelState {
    pub disp: f64,
    pub vel: f64,
}

impl ChannelState {
    pub const REST: ChannelState = ChannelState {
        disp: 0.0,
        vel: 0.0,
    };
}

/// Exact zero-order-hold transition of one channel over a fixed period.
///
/// With `u` held, the deviation from the equilibrium `u / k_d` evolves
/// freely, so `x⁺ = u/k_d + Φ·(x − u/k_d, v)` with `Φ = exp(A·dt)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZohStep {
    phi: [[f64; 2]; 2],
    compliance: f64,
}

impl ZohStep {
    pub fn new(params: &ImpedanceParams, dt: f64) -> Self {
        let (m, d, k) = (params.m_d, params.d_d, params.k_d);
        let a = -d / (2.0 * m);
        let disc = a * a - k / m;
        // exp(A t) = e^{a t} [ (c - a s) I + s A ] with c = cosh(γt), s = sinh(γt)/γ,
        // γ² = disc; the series covers the repeated-eigenvalue neighbourhood.
        let x = disc * dt * dt;
        let (c, s) = if x.abs() < 1e-6 {
            (
                1.0 + x / 2.0 + x * x / 24.0,
                dt * (1.0 + x / 6.0 + x * x / 120.0),
            )
        } else if disc > 0.0 {
            let g = libm::sqrt(disc);
            (libm::cosh(g * dt), libm::sinh(g * dt) / g)
        } else {
            let g = libm::sqrt(-disc);
            (libm::cos(g * dt), libm::sin(g * dt) / g)
        };
        let e = libm::exp(a * dt);
        let diag = c - a * s;
        let phi = [[e * diag, e * s], [-e * s * k / m, e * (diag - s * d / m)]];
        Self {
            phi,
            compliance: 1.0 / k,
        }
    }

    pub fn advance(&self, state: ChannelState, u: f64) -> ChannelState {
        let eq = u * self.compliance;
        let dx = state.disp - eq;
        ChannelState {
            disp: eq + self.phi[0][0] * dx + self.phi[0][1] * state.vel,
            vel: self.phi[1][0] * dx + self.phi[1][1] * state.vel,
        }
    }
}

pub const MAX_STEP: f64 = 0.1;

/// Advances one channel by `dt` seconds with input `u` held constant.
///
/// # Panics
///
/// If `dt` is outside `(0, 0.1]`.
pub fn channel_step(
    params: &ImpedanceParams,
    state: ChannelState,
    u: f64,
    dt: f64,
) -> ChannelState {
    assert!(
        dt > 0.0 && dt <= MAX_STEP,
        "channel step dt must be in (0, {MAX_STEP}], got {dt}"
    );
    ZohStep::new(params, dt).advance(state, u)
}

/// Which lateral force drives which rotational channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Wiring {
    /// `F_y` drives the rotation about x and `F_x` the rotation about y.
    #[default]
    CrossAxis,
    /// `F_x` drives the rotation about x and `F_y` the rotation about y.
    SameAxis,
}

/// Reference point of the linear channel's stiffness term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearAnchor {
    /// Displacement accumulates from the last reset.
    PhaseStart,
    /// Displacement is re-zeroed before every control period, so the
    /// stiffness only acts on motion within one period.
    #[default]
    Incremental,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommandLimits {
    /// rad/s
    pub omega_max: f64,
    /// mm/s
    pub v_z_max: f64,
}

impl Default for CommandLimits {
    fn default() -> Self {
        Self {
            omega_max: 0.5,
            v_z_max: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControllerConfig {
    pub rot_x: ImpedanceParams,
    pub rot_y: ImpedanceParams,
    pub lin_z: ImpedanceParams,
    /// Reference force (N) per axis in the end-effector frame.
    pub f_ref: Vec3,
    pub wiring: Wiring,
    pub limits: CommandLimits,
    pub linear_anchor: LinearAnchor,
}

impl ControllerConfig {
    pub fn new(rot_x: ImpedanceParams, rot_y: ImpedanceParams, lin_z: ImpedanceParams) -> Self {
        Self {
            rot_x,
            rot_y,
            lin_z,
            f_ref: [0.0; 3],
            wiring: Wiring::default(),
            limits: CommandLimits::default(),
            linear_anchor: LinearAnchor::default(),
        }
    }

    pub fn with_f_z_ref(mut self, f_z_ref: f64) -> Self {
        self.f_ref[2] = f_z_ref;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.limits;
        if !(l.omega_max > 0.0 && l.v_z_max > 0.0) {
            return Err(Error::invalid("command limits must be positive"));
        }
        if self.f_ref.iter().any(|f| !f.is_finite()) {
            return Err(Error::invalid("reference force must be finite"));
        }
        Ok(())
    }
}

/// State of the three channels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChannelStates {
    pub rot_x: ChannelState,
    pub rot_y: ChannelState,
    pub lin_z: ChannelState,
}

/// Angular velocities (rad/s) and axial velocity (mm/s) in the end-effector
/// frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ControllerCommand {
    pub omega_x: f64,
    pub omega_y: f64,
    pub v_z: f64,
}

/// Channel inputs `(rot_x, rot_y, lin_z)` for a measured force.
///
/// Under cross-axis wiring the rotational inputs are the moments a tip force
/// exerts about the charger's x and y axes (per unit lever arm): `-F_y` and
/// `+F_x`. A contact force along `+y` therefore drives a negative rotation
/// about x, away from the contact.
pub fn channel_inputs(cfg: &ControllerConfig, f_meas: Vec3) -> (f64, f64, f64) {
    let err = [
        f_meas[0] - cfg.f_ref[0],
        f_meas[1] - cfg.f_ref[1],
        f_meas[2] - cfg.f_ref[2],
    ];
    match cfg.wiring {
        Wiring::CrossAxis => (-err[1], err[0], err[2]),
        Wiring::SameAxis => (err[0], err[1], err[2]),
    }
}

/// One control period of the three-channel controller.
///
/// # Panics
///
/// If `dt` is outside `(0, 0.1]`.
pub fn controller_update(
    cfg: &ControllerConfig,
    states: ChannelStates,
    f_meas: Vec3,
    dt: f64,
) -> (ChannelStates, ControllerCommand) {
    let (u_x, u_y, u_z) = channel_inputs(cfg, f_meas);
    let mut lin = states.lin_z;
    if cfg.linear_anchor == LinearAnchor::Incremental {
        lin.disp = 0.0;
    }
    let next = ChannelStates {
        rot_x: channel_step(&cfg.rot_x, states.rot_x, u_x, dt),
        rot_y: channel_step(&cfg.rot_y, states.rot_y, u_y, dt),
        lin_z: channel_step(&cfg.lin_z, lin, u_z, dt),
    };
    let limits = cfg.limits;
    let cmd = ControllerCommand {
        omega_x: next.rot_x.vel.clamp(-limits.omega_max, limits.omega_max),
        omega_y: next.rot_y.vel.clamp(-limits.omega_max, limits.omega_max),
        v_z: next.lin_z.vel.clamp(-limits.v_z_max, limits.v_z_max),
    };
    (next, cmd)
}

pub fn reset(_states: ChannelStates) -> ChannelStates {
    ChannelStates::default()
}
