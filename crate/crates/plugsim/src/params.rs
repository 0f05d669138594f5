//! Controller parameter file (JSON), as written by `calibrate`.

use std::path::Path;

use plugsim_core::impedance::{ImpedanceParams, Wiring};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelParams {
    pub kd: f64,
    pub dd: f64,
    pub md: f64,
}

impl ChannelParams {
    pub fn to_params(self) -> Result<ImpedanceParams> {
        Ok(ImpedanceParams::new(self.md, self.dd, self.kd)?)
    }
}

impl From<ImpedanceParams> for ChannelParams {
    fn from(p: ImpedanceParams) -> Self {
        Self {
            kd: p.stiffness(),
            dd: p.damping(),
            md: p.inertia(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WiringName {
    #[default]
    CrossAxis,
    SameAxis,
}

impl From<WiringName> for Wiring {
    fn from(w: WiringName) -> Self {
        match w {
            WiringName::CrossAxis => Wiring::CrossAxis,
            WiringName::SameAxis => Wiring::SameAxis,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerParamsFile {
    pub rot_x: ChannelParams,
    pub rot_y: ChannelParams,
    pub lin_z: ChannelParams,
    pub f_z_ref_in: f64,
    pub f_z_ref_out: f64,
    #[serde(default)]
    pub wiring: WiringName,
    pub ts_s: f64,
    pub zeta: f64,
}

impl ControllerParamsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn from_json(text: &str, source_name: &str) -> Result<Self> {
        let file: Self = serde_json::from_str(text).map_err(|source| Error::Json {
            source_name: source_name.to_owned(),
            source,
        })?;
        for ch in [file.rot_x, file.rot_y, file.lin_z] {
            ch.to_params()?;
        }
        if !(file.f_z_ref_in < 0.0 && file.f_z_ref_out > 0.0) {
            return Err(Error::Invalid(format!(
                "{source_name}: f_z_ref_in must be negative and f_z_ref_out positive"
            )));
        }
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("parameter file serializes")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }
}
