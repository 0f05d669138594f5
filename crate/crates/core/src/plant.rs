//! Simulated charger/socket contact.
//!
//! The end effector is an ideal velocity source. Contact forces come from a
//! lumped model: lateral forces proportional to tilt and insertion depth, an
//! axial reaction opposing motion, and a stiffening ramp near the bottom.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::{MisalignmentAngles, Vec3};
use crate::impedance::{ControllerCommand, MAX_STEP};
use crate::{Error, Result};

/// Length (mm) of the stiffening ramp at the bottom of the socket.
pub const RAMP_LENGTH: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SocketModel {
    /// mm
    pub depth: f64,
    /// degrees
    pub chamfer_angle: f64,
    /// mm
    pub chamfer_length: f64,
    /// N/rad per mm of insertion
    pub k_lateral: f64,
    /// Fraction of the lateral contact force that adds axial drag.
    pub mu_lateral: f64,
    /// N per mm/s
    pub k_viscous_z: f64,
    /// N
    pub f_base: f64,
    /// N/mm
    pub k_depth: f64,
    /// degrees
    pub max_tilt: f64,
}

impl Default for SocketModel {
    fn default() -> Self {
        Self {
            depth: 34.8,
            chamfer_angle: 30.0,
            chamfer_length: 3.0,
            k_lateral: 20.0,
            mu_lateral: 0.1,
            k_viscous_z: 0.8,
            f_base: 70.0,
            k_depth: 1.0,
            max_tilt: 12.0,
        }
    }
}

impl SocketModel {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("depth", self.depth),
            ("chamfer_angle", self.chamfer_angle),
            ("chamfer_length", self.chamfer_length),
            ("k_lateral", self.k_lateral),
            ("mu_lateral", self.mu_lateral),
            ("k_viscous_z", self.k_viscous_z),
            ("f_base", self.f_base),
            ("k_depth", self.k_depth),
            ("max_tilt", self.max_tilt),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(alloc::format!(
                    "socket {name} must be positive, got {v}"
                )));
            }
        }
        if self.depth <= self.chamfer_length {
            return Err(Error::invalid(
                "socket depth must exceed the chamfer length",
            ));
        }
        Ok(())
    }

    pub fn max_tilt_rad(&self) -> f64 {
        self.max_tilt.to_radians()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChargerState {
    pub theta: MisalignmentAngles,
    /// Insertion depth in mm; 0 at the entry plane, positive inside.
    pub z: f64,
    /// Lateral offset in mm. Carried but not actuated.
    pub lateral: [f64; 2],
}

impl ChargerState {
    pub fn new(theta: MisalignmentAngles, z: f64) -> Self {
        Self {
            theta,
            z,
            lateral: [0.0; 2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContactForces {
    /// N, end-effector frame
    pub force: Vec3,
    /// N·m, always zero
    pub torque: Vec3,
}

/// Noise-free contact wrench for `state` while the end effector is commanded
/// at `v_z_cmd` mm/s.
///
/// Returns [`Error::Jam`] when the charger is inside the socket with a total
/// tilt beyond `max_tilt`.
pub fn contact_forces(
    socket: &SocketModel,
    state: &ChargerState,
    v_z_cmd: f64,
) -> Result<ContactForces> {
    let z = state.z;
    if z <= 0.0 {
        return Ok(ContactForces::default());
    }
    let MisalignmentAngles { theta_x, theta_y } = state.theta;
    let tilt = state.theta.total();
    if tilt > socket.max_tilt_rad() {
        return Err(Error::Jam {
            tilt_deg: tilt.to_degrees(),
            max_deg: socket.max_tilt,
        });
    }
    let lateral = socket.k_lateral * z;
    let f_x = -lateral * theta_y;
    let f_y = lateral * theta_x;
    let drag = socket.f_base
        + socket.k_viscous_z * v_z_cmd.abs()
        + socket.mu_lateral * lateral * (theta_x.abs() + theta_y.abs());
    let sign = if v_z_cmd > 0.0 {
        1.0
    } else if v_z_cmd < 0.0 {
        -1.0
    } else {
        0.0
    };
    let ramp = if v_z_cmd > 0.0 {
        socket.k_depth * (z - (socket.depth - RAMP_LENGTH)).max(0.0)
    } else {
        0.0
    };
    Ok(ContactForces {
        force: [f_x, f_y, -sign * drag - ramp],
        torque: [0.0; 3],
    })
}

/// Executes `cmd` for `dt` seconds. The socket bottom is a hard stop.
///
/// # Panics
///
/// If `dt` is outside `(0, 0.1]`.
pub fn step_plant(
    socket: &SocketModel,
    state: &ChargerState,
    cmd: &ControllerCommand,
    dt: f64,
) -> ChargerState {
    assert!(
        dt > 0.0 && dt <= MAX_STEP,
        "plant step dt must be in (0, {MAX_STEP}], got {dt}"
    );
    ChargerState {
        theta: MisalignmentAngles::new(
            state.theta.theta_x + cmd.omega_x * dt,
            state.theta.theta_y + cmd.omega_y * dt,
        ),
        z: (state.z + cmd.v_z * dt).min(socket.depth),
        lateral: state.lateral,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// N, per axis
    pub sigma_f: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            sigma_f: 0.5,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn off() -> Self {
        Self {
            sigma_f: 0.0,
            seed: 0,
        }
    }

    pub fn source(&self) -> Result<NoiseSource> {
        NoiseSource::new(self)
    }
}

/// Deterministic Gaussian force-noise stream.
#[derive(Debug, Clone)]
pub struct NoiseSource {
    rng: ChaCha8Rng,
    normal: Option<Normal<f64>>,
}

impl NoiseSource {
    pub fn new(model: &NoiseModel) -> Result<Self> {
        let s = model.sigma_f;
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::invalid(alloc::format!(
                "noise sigma must be non-negative, got {s}"
            )));
        }
        let normal = if s > 0.0 {
            Some(Normal::new(0.0, s).map_err(|_| Error::invalid("bad noise sigma"))?)
        } else {
            None
        };
        Ok(Self {
            rng: ChaCha8Rng::seed_from_u64(model.seed),
            normal,
        })
    }

    pub fn sample(&mut self) -> Vec3 {
        match &self.normal {
            Some(n) => [
                n.sample(&mut self.rng),
                n.sample(&mut self.rng),
                n.sample(&mut self.rng),
            ],
            None => [0.0; 3],
        }
    }
}
