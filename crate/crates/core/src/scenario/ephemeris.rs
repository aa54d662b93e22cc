use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Klobuchar ionosphere coefficients as broadcast in the navigation message.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KlobucharCoeffs {
    /// s, s/semicircle, s/semicircle^2, s/semicircle^3
    pub alpha: [f64; 4],
    /// s, s/semicircle, s/semicircle^2, s/semicircle^3
    pub beta: [f64; 4],
}

/// Broadcast Keplerian orbit and clock parameters for one satellite.
///
/// Angles are in radians and rates in rad/s, as stored in RINEX files.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BroadcastEphemeris {
    pub prn: u8,
    /// GPS week of `toe` (full, not modulo 1024).
    pub week: u32,
    pub toe: f64,
    pub toc: f64,
    pub sqrt_a: f64,
    pub e: f64,
    pub i0: f64,
    pub omega0: f64,
    pub omega: f64,
    pub m0: f64,
    pub delta_n: f64,
    pub idot: f64,
    pub omega_dot: f64,
    pub cuc: f64,
    pub cus: f64,
    pub crc: f64,
    pub crs: f64,
    pub cic: f64,
    pub cis: f64,
    pub af0: f64,
    pub af1: f64,
    pub af2: f64,
    pub tgd: f64,
    pub iode: u16,
    pub iodc: u16,
    pub health: u8,
    pub ura_index: u8,
    pub klobuchar: KlobucharCoeffs,
}

impl BroadcastEphemeris {
    /// Semi-major axis, m.
    pub fn a(&self) -> f64 {
        self.sqrt_a * self.sqrt_a
    }

    /// Checks the physical plausibility bounds of a GPS MEO ephemeris.
    pub fn validate(&self) -> Result<()> {
        if !(1..=32).contains(&self.prn) {
            return Err(Error::InvalidInput(format!("PRN {} out of range", self.prn)));
        }
        if !(self.e > 0.0 && self.e < 0.03) {
            return Err(Error::InvalidInput(format!("PRN {}: eccentricity {} outside (0, 0.03)", self.prn, self.e)));
        }
        let a = self.a();
        if !(2.0e7..=3.0e7).contains(&a) {
            return Err(Error::InvalidInput(format!("PRN {}: semi-major axis {a} m outside [2e7, 3e7]", self.prn)));
        }
        Ok(())
    }
}
