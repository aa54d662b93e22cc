use serde::{Deserialize, Serialize};

use crate::Vec3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableSource {
    Truth,
    Receiver,
}

impl ObservableSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ObservableSource::Truth => "truth",
            ObservableSource::Receiver => "receiver",
        }
    }
}

/// Pseudorange, Doppler and carrier phase of one satellite at one receiver epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    /// Receiver clock reading, seconds of week.
    pub t_rx: f64,
    pub prn: u8,
    /// Satellite-clock-corrected pseudorange, m.
    pub pseudorange: f64,
    /// Hz.
    pub doppler: f64,
    /// Cycles; arbitrary integer offset per satellite.
    pub carrier_phase: f64,
    pub cn0: f64,
    pub source: ObservableSource,
}

/// Position, velocity and time solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PvtSolution {
    /// Receiver clock reading, seconds of week.
    pub t_rx: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    /// Receiver clock bias, s.
    pub clock_bias: f64,
    /// Receiver clock drift, s/s.
    pub clock_drift: f64,
    pub used_prns: Vec<u8>,
    /// Post-fit pseudorange residual RMS, m.
    pub residual_rms: f64,
    pub gdop: f64,
    pub pdop: f64,
    pub hdop: f64,
    pub vdop: f64,
    pub tdop: f64,
    pub iterations: usize,
}
