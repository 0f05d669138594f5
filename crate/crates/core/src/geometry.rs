//! Frames, rotations and the charger/socket misalignment angles.
//!
//! A [`Rotation`] maps charger-frame vectors into the socket frame. The
//! misalignment angles are the projections of the charger axis `z_c` onto the
//! socket's `z_s–y_s` and `z_s–x_s` planes, i.e. rotations about `x_s` and
//! `y_s` with right-hand signs: `theta_x > 0` tips `z_c` toward `-y_s`, and
//! `theta_y > 0` tips it toward `+x_s`.

use crate::{Error, Result};

pub type Vec3 = [f64; 3];

const ORTHONORMAL_TOL: f64 = 1e-9;
const UNIT_NORM_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

pub fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(v: Vec3) -> f64 {
    libm::sqrt(dot(v, v))
}

/// A proper rotation (orthonormal, determinant +1), stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation([[f64; 3]; 3]);

impl Default for Rotation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    /// Right-handed rotation by `angle` radians about a coordinate axis.
    pub fn about_axis(axis: Axis, angle: f64) -> Self {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        match axis {
            Axis::X => Rotation([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]]),
            Axis::Y => Rotation([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]),
            Axis::Z => Rotation([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]),
        }
    }

    /// Accepts a row-major matrix if it is orthonormal with determinant +1
    /// to within 1e-9.
    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self> {
        let r = Rotation(m);
        let cols = [r.column(0), r.column(1), r.column(2)];
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                if (dot(cols[i], cols[j]) - expected).abs() > ORTHONORMAL_TOL {
                    return Err(Error::invalid(
                        "rotation matrix columns are not orthonormal",
                    ));
                }
            }
        }
        if (r.determinant() - 1.0).abs() > ORTHONORMAL_TOL {
            return Err(Error::invalid("rotation matrix determinant is not +1"));
        }
        Ok(r)
    }

    /// Rotation from a unit quaternion `(w, x, y, z)`. The norm must be 1
    /// within 1e-6; the quaternion is renormalized before conversion.
    pub fn from_quaternion(q: [f64; 4]) -> Result<Self> {
        let n = libm::sqrt(q.iter().map(|c| c * c).sum::<f64>());
        if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::invalid("quaternion is not unit norm"));
        }
        let [w, x, y, z] = q.map(|c| c / n);
        Ok(Rotation([
            [
                1.0 - 2.0 * (y * y + z * z),
                2.0 * (x * y - w * z),
                2.0 * (x * z + w * y),
            ],
            [
                2.0 * (x * y + w * z),
                1.0 - 2.0 * (x * x + z * z),
                2.0 * (y * z - w * x),
            ],
            [
                2.0 * (x * z - w * y),
                2.0 * (y * z + w * x),
                1.0 - 2.0 * (x * x + y * y),
            ],
        ]))
    }

    /// Unit quaternion `(w, x, y, z)` with `w >= 0`.
    pub fn to_quaternion(&self) -> [f64; 4] {
        let m = &self.0;
        let trace = m[0][0] + m[1][1] + m[2][2];
        let q = if trace > 0.0 {
            let s = 2.0 * libm::sqrt(trace + 1.0);
            [
                0.25 * s,
                (m[2][1] - m[1][2]) / s,
                (m[0][2] - m[2][0]) / s,
                (m[1][0] - m[0][1]) / s,
            ]
        } else if m[0][0] > m[1][1] && m[0][0] > m[2][2] {
            let s = 2.0 * libm::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]);
            [
                (m[2][1] - m[1][2]) / s,
                0.25 * s,
                (m[0][1] + m[1][0]) / s,
                (m[0][2] + m[2][0]) / s,
            ]
        } else if m[1][1] > m[2][2] {
            let s = 2.0 * libm::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]);
            [
                (m[0][2] - m[2][0]) / s,
                (m[0][1] + m[1][0]) / s,
                0.25 * s,
                (m[1][2] + m[2][1]) / s,
            ]
        } else {
            let s = 2.0 * libm::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]);
            [
                (m[1][0] - m[0][1]) / s,
                (m[0][2] + m[2][0]) / s,
                (m[1][2] + m[2][1]) / s,
                0.25 * s,
            ]
        };
        if q[0] < 0.0 {
            q.map(|c| -c)
        } else {
            q
        }
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        self.0
    }

    pub fn column(&self, j: usize) -> Vec3 {
        [self.0[0][j], self.0[1][j], self.0[2][j]]
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        [dot(m[0], v), dot(m[1], v), dot(m[2], v)]
    }

    /// `self · other`: applies `other` first.
    pub fn compose(&self, other: &Rotation) -> Rotation {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * other.0[k][j]).sum();
            }
        }
        Rotation(out)
    }

    pub fn transpose(&self) -> Rotation {
        let m = &self.0;
        Rotation([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    /// The charger axis `z_c` expressed in the socket frame.
    pub fn charger_axis(&self) -> Vec3 {
        self.column(2)
    }
}

pub fn rotation_about_axis(axis: Axis, angle: f64) -> Rotation {
    Rotation::about_axis(axis, angle)
}

pub fn apply(rotation: &Rotation, v: Vec3) -> Vec3 {
    rotation.apply(v)
}

/// Signed misalignment of the charger axis about the socket's x and y axes.
/// Radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MisalignmentAngles {
    pub theta_x: f64,
    pub theta_y: f64,
}

impl MisalignmentAngles {
    pub fn new(theta_x: f64, theta_y: f64) -> Self {
        Self { theta_x, theta_y }
    }

    pub fn from_degrees(theta_x_deg: f64, theta_y_deg: f64) -> Self {
        Self::new(theta_x_deg.to_radians(), theta_y_deg.to_radians())
    }

    pub fn to_degrees(self) -> (f64, f64) {
        (self.theta_x.to_degrees(), self.theta_y.to_degrees())
    }

    /// Combined tilt used for admissibility checks, `hypot(theta_x, theta_y)`.
    pub fn total(self) -> f64 {
        libm::hypot(self.theta_x, self.theta_y)
    }

    pub fn negate(self) -> Self {
        Self::new(-self.theta_x, -self.theta_y)
    }

    /// The rotation `R_y(theta_y) · R_x(theta_x)`.
    pub fn to_rotation(self) -> Rotation {
        Rotation::about_axis(Axis::Y, self.theta_y)
            .compose(&Rotation::about_axis(Axis::X, self.theta_x))
    }
}

/// Projects the charger axis onto the socket's `z_s–y_s` and `z_s–x_s`
/// planes.
///
/// `z_c_in_socket` must be a unit vector (within 1e-6) with a positive z
/// component.
pub fn extract_misalignment(z_c_in_socket: Vec3) -> Result<MisalignmentAngles> {
    let n = norm(z_c_in_socket);
    if !n.is_finite() || (n - 1.0).abs() > UNIT_NORM_TOL {
        return Err(Error::invalid("charger axis is not a unit vector"));
    }
    let [x, y, z] = z_c_in_socket;
    if z <= 0.0 {
        return Err(Error::PoseOutOfRange { z });
    }
    Ok(MisalignmentAngles {
        theta_x: libm::atan2(-y, z),
        theta_y: libm::atan2(x, z),
    })
}

/// Charger pose in the socket frame. Translation in millimetres.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub rotation: Rotation,
    pub translation: Vec3,
}

impl Pose {
    pub fn new(rotation: Rotation, translation: Vec3) -> Result<Self> {
        if translation.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("pose translation is not finite"));
        }
        Ok(Self {
            rotation,
            translation,
        })
    }

    pub fn misalignment(&self) -> Result<MisalignmentAngles> {
        extract_misalignment(self.rotation.charger_axis())
    }
}
