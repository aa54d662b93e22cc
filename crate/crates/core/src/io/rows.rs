use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navigation::PvtSolution;
use crate::Vec3;

/// Flat CSV form of a [`PvtSolution`]; also used for the truth trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvtRow {
    pub t_rx: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub clock_bias: f64,
    pub clock_drift: f64,
    /// Space-separated PRNs.
    pub used_prns: String,
    pub residual_rms: f64,
    pub gdop: f64,
    pub pdop: f64,
    pub hdop: f64,
    pub vdop: f64,
    pub tdop: f64,
    pub iterations: usize,
}

impl From<&PvtSolution> for PvtRow {
    fn from(s: &PvtSolution) -> Self {
        PvtRow {
            t_rx: s.t_rx,
            x: s.position.x,
            y: s.position.y,
            z: s.position.z,
            vx: s.velocity.x,
            vy: s.velocity.y,
            vz: s.velocity.z,
            clock_bias: s.clock_bias,
            clock_drift: s.clock_drift,
            used_prns: s.used_prns.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "),
            residual_rms: s.residual_rms,
            gdop: s.gdop,
            pdop: s.pdop,
            hdop: s.hdop,
            vdop: s.vdop,
            tdop: s.tdop,
            iterations: s.iterations,
        }
    }
}

impl TryFrom<&PvtRow> for PvtSolution {
    type Error = Error;

    fn try_from(r: &PvtRow) -> Result<Self> {
        let used_prns = r
            .used_prns
            .split_whitespace()
            .map(|p| p.parse::<u8>().map_err(|e| Error::InvalidInput(format!("PRN list `{}`: {e}", r.used_prns))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PvtSolution {
            t_rx: r.t_rx,
            position: Vec3::new(r.x, r.y, r.z),
            velocity: Vec3::new(r.vx, r.vy, r.vz),
            clock_bias: r.clock_bias,
            clock_drift: r.clock_drift,
            used_prns,
            residual_rms: r.residual_rms,
            gdop: r.gdop,
            pdop: r.pdop,
            hdop: r.hdop,
            vdop: r.vdop,
            tdop: r.tdop,
            iterations: r.iterations,
        })
    }
}

/// One point of an Allan deviation curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllanRow {
    pub tau: f64,
    pub adev: f64,
}

/// One bin of a power spectral density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsdRow {
    pub frequency: f64,
    pub psd_db: f64,
}

/// Schema names of the CSV files.
pub mod schema {
    pub const TRUTH_OBSERVABLES: &str = "truth_observables";
    pub const OBSERVABLES: &str = "observables";
    pub const PVT: &str = "pvt";
    pub const TELEMETRY: &str = "telemetry";
    pub const ACQUISITION: &str = "acquisition";
    pub const DECODE: &str = "decode";
    pub const POSITION_ERRORS: &str = "position_errors";
    pub const OBSERVABLE_ERRORS: &str = "observable_errors";
    pub const ALLAN: &str = "allan";
    pub const PSD: &str = "psd";
}
