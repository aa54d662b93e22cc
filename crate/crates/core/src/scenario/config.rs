//! Scenario configuration file (TOML) and its validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::time::GpsTime;

/// One validation problem, tagged with the dotted key path that caused it.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub signal: SignalSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub link: LinkSection,
    #[serde(default)]
    pub clock: ClockSection,
    #[serde(default)]
    pub atmosphere: AtmosphereSection,
    pub trajectory: TrajectoryProfile,
    #[serde(default)]
    pub interference: Vec<InterferenceConfig>,
    #[serde(default)]
    pub multipath: Vec<MultipathConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// GPS week of the first sample (receiver clock).
    pub start_week: u32,
    /// Seconds of week of the first sample (receiver clock).
    pub start_tow: f64,
    /// Length of the generated stream, s.
    pub duration: f64,
    /// RINEX navigation file, relative to the configuration file.
    pub ephemeris: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub prn_allowlist: Option<Vec<u8>>,
    /// Satellites below this elevation at the start are not synthesized, deg.
    #[serde(default = "default_mask")]
    pub elevation_mask_deg: f64,
}

fn default_mask() -> f64 {
    5.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ChipShaping {
    /// Chip value averaged over each sample interval.
    #[default]
    Area,
    /// Chip value at the sample instant.
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SignalSection {
    pub sample_rate: f64,
    pub if_center: f64,
    pub quantization: u8,
    pub full_scale_sigma: f64,
    pub chip_shaping: ChipShaping,
    /// Synthesis block length, s.
    pub block_duration: f64,
}

impl Default for SignalSection {
    fn default() -> Self {
        SignalSection {
            sample_rate: 2.5e6,
            if_center: 0.0,
            quantization: 8,
            full_scale_sigma: 3.0,
            chip_shaping: ChipShaping::Area,
            block_duration: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSection {
    pub enabled: bool,
    /// N0, W/Hz.
    pub noise_density: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        NoiseSection { enabled: true, noise_density: 10f64.powf(-204.0 / 10.0) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkSection {
    /// Satellite transmit power, W.
    pub tx_power: f64,
    /// Two-column (elevation_deg, gain_dBi) table; built-in pattern when absent.
    pub tx_pattern: Option<PathBuf>,
    pub rx_pattern: Option<PathBuf>,
    /// Atmospheric loss factor in (0, 1].
    pub l_atm: f64,
    /// Forces every satellite to this C/N0, dB-Hz.
    pub cn0_override: Option<f64>,
}

impl Default for LinkSection {
    fn default() -> Self {
        LinkSection { tx_power: 26.8, tx_pattern: None, rx_pattern: None, l_atm: 1.0, cn0_override: None }
    }
}

/// Receiver clock model b(t) = bias0 + drift * (t - t0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClockSection {
    pub bias0: f64,
    pub drift: f64,
}

impl Default for ClockSection {
    fn default() -> Self {
        ClockSection { bias0: 1.0e-3, drift: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MagnusVariant {
    /// Exponent denominator T0 + 273.3.
    #[default]
    Printed,
    /// Exponent denominator T0 + 237.3.
    Standard,
}

impl MagnusVariant {
    pub fn denominator_offset(self) -> f64 {
        match self {
            MagnusVariant::Printed => 273.3,
            MagnusVariant::Standard => 237.3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtmosphereSection {
    pub ionosphere: bool,
    pub troposphere: bool,
    /// Apply the ionospheric phase advance to carrier phase truth.
    pub carrier_advance: bool,
    /// Rotate satellite positions by the Earth rotation during signal flight.
    pub sagnac: bool,
    pub pressure_hpa: f64,
    pub temperature_c: f64,
    pub relative_humidity: f64,
    pub magnus: MagnusVariant,
    /// Overrides the coefficients found in the navigation file.
    pub klobuchar_alpha: Option<[f64; 4]>,
    pub klobuchar_beta: Option<[f64; 4]>,
}

impl Default for AtmosphereSection {
    fn default() -> Self {
        AtmosphereSection {
            ionosphere: true,
            troposphere: true,
            carrier_advance: true,
            sagnac: true,
            pressure_hpa: 1013.25,
            temperature_c: 20.0,
            relative_humidity: 0.5,
            magnus: MagnusVariant::Printed,
            klobuchar_alpha: None,
            klobuchar_beta: None,
        }
    }
}

/// User motion profile. Positions are given relative to a geodetic origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TrajectoryProfile {
    Static(StaticProfile),
    Moderate(ModerateProfile),
    HighDynamics(HighDynamicsProfile),
}

impl TrajectoryProfile {
    pub fn origin(&self) -> (f64, f64, f64) {
        match self {
            TrajectoryProfile::Static(p) => (p.lat_deg, p.lon_deg, p.height_m),
            TrajectoryProfile::Moderate(p) => (p.lat_deg, p.lon_deg, p.height_m),
            TrajectoryProfile::HighDynamics(p) => (p.lat_deg, p.lon_deg, p.height_m),
        }
    }

    pub fn rate_hz(&self) -> f64 {
        match self {
            TrajectoryProfile::Static(p) => p.rate_hz,
            TrajectoryProfile::Moderate(p) => p.rate_hz,
            TrajectoryProfile::HighDynamics(p) => p.rate_hz,
        }
    }
}

fn default_rate() -> f64 {
    100.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StaticProfile {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub height_m: f64,
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModerateProfile {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub height_m: f64,
    /// Rows of (t, east, north, up): seconds from scenario start and metres from the origin.
    pub waypoints: Vec<[f64; 4]>,
    /// Half-width of the parabolic corner blend, s.
    #[serde(default = "default_blend")]
    pub corner_blend: f64,
    #[serde(default = "default_max_speed")]
    pub max_speed: f64,
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
}

fn default_blend() -> f64 {
    2.0
}

fn default_max_speed() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HighDynamicsProfile {
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub height_m: f64,
    /// Launch speed, m/s.
    pub launch_speed: f64,
    /// Launch angle above the local horizontal, deg.
    pub launch_elevation_deg: f64,
    /// Launch heading from north, deg.
    #[serde(default)]
    pub launch_azimuth_deg: f64,
    /// m / (Cd A), kg/m^2; no drag when absent.
    #[serde(default)]
    pub ballistic_coefficient: Option<f64>,
    /// Peak acceleration the profile must reach, m/s^2.
    #[serde(default = "default_min_accel")]
    pub min_peak_accel: f64,
    /// Peak line-of-sight Doppler rate the profile must be able to reach, Hz/s.
    #[serde(default = "default_min_doppler_rate")]
    pub min_doppler_rate: f64,
    #[serde(default = "default_rate")]
    pub rate_hz: f64,
}

fn default_min_accel() -> f64 {
    20.0 * crate::constants::G0
}

fn default_min_doppler_rate() -> f64 {
    50.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceKind {
    Chirp,
    Cwi,
    Fmcw,
    Pulse,
}

/// Interference source as written in the configuration file.
///
/// Power is given either as an absolute amplitude (sqrt W) or as a J/S ratio
/// in dB relative to the carrier power of `reference_prn`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceConfig {
    pub kind: InterferenceKind,
    pub amplitude: Option<f64>,
    pub js_db: Option<f64>,
    pub reference_prn: Option<u8>,
    #[serde(default)]
    pub f0: f64,
    #[serde(default)]
    pub sweep_rate: f64,
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub beta: f64,
    #[serde(default)]
    pub f_m: f64,
    #[serde(default)]
    pub pulse_width: f64,
    #[serde(default)]
    pub repetition_interval: f64,
    #[serde(default)]
    pub duty_pattern: Vec<bool>,
    #[serde(default)]
    pub start: f64,
    pub stop: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultipathConfig {
    pub prn: u8,
    #[serde(default)]
    pub paths: Vec<PathConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub alpha: f64,
    /// Excess delay, s.
    pub delay: f64,
    #[serde(default)]
    pub phase: f64,
    /// Excess delay rate, s/s.
    #[serde(default)]
    pub ramp: f64,
}

/// Maximum number of reflected paths per PRN.
pub const MAX_MULTIPATH_PATHS: usize = 8;

/// Parses TOML text into `T`, naming the key path of the first error.
pub fn parse_toml<T: serde::de::DeserializeOwned>(text: &str) -> Result<T> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let key = e.path().to_string();
        let message = e.inner().message().to_string();
        Error::config(if key == "." { String::from("<root>") } else { key }, message)
    })
}

impl ScenarioConfig {
    /// Parses TOML text. Unknown keys and type errors are reported with their key path.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        parse_toml(text)
    }

    /// Reads, parses and validates a configuration file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml_str(&text)?;
        cfg.validate_all()?;
        Ok(cfg)
    }

    pub fn start_epoch(&self) -> GpsTime {
        GpsTime::new(self.scenario.start_week, self.scenario.start_tow)
    }

    /// Noise density used for C/N0 bookkeeping, W/Hz.
    pub fn n0(&self) -> f64 {
        self.noise.noise_density
    }

    /// SHA-256 of the canonical JSON form of the configuration.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("configuration serializes");
        let mut h = Sha256::new();
        h.update(&json);
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Validates all fields and returns every problem found.
    pub fn validate(&self) -> Vec<ConfigIssue> {
        let mut out = Vec::new();
        let mut bad = |key: &str, message: String| out.push(ConfigIssue { key: key.to_string(), message });
        let s = &self.scenario;
        if !(s.duration > 0.0) {
            bad("scenario.duration", format!("must be > 0, got {}", s.duration));
        }
        if !(0.0..604_800.0).contains(&s.start_tow) {
            bad("scenario.start_tow", format!("must lie in [0, 604800), got {}", s.start_tow));
        }
        if s.duration > 0.0 && s.start_tow + s.duration >= 604_800.0 {
            bad("scenario.duration", "scenario must not cross a week boundary".into());
        }
        if let Some(list) = &s.prn_allowlist {
            if list.is_empty() {
                bad("scenario.prn_allowlist", "must not be empty".into());
            }
            for p in list {
                if !(1..=32).contains(p) {
                    bad("scenario.prn_allowlist", format!("PRN {p} outside 1..=32"));
                }
            }
        }
        if !(-10.0..=60.0).contains(&s.elevation_mask_deg) {
            bad("scenario.elevation_mask_deg", "must lie in [-10, 60]".into());
        }
        let g = &self.signal;
        if !(g.sample_rate >= 2.5e6) {
            bad("signal.sample_rate", format!("must be >= 2.5e6, got {}", g.sample_rate));
        }
        if g.if_center.abs() >= g.sample_rate / 2.0 {
            bad("signal.if_center", "must lie inside (-fs/2, fs/2)".into());
        }
        if g.quantization != 8 && g.quantization != 16 {
            bad("signal.quantization", format!("must be 8 or 16, got {}", g.quantization));
        }
        if !(g.full_scale_sigma > 0.0) {
            bad("signal.full_scale_sigma", "must be > 0".into());
        }
        if !(g.block_duration > 0.0 && g.block_duration <= 0.1 + 1e-12) {
            bad("signal.block_duration", "must lie in (0, 0.1] s".into());
        }
        if !(self.noise.noise_density > 0.0) {
            bad("noise.noise_density", "must be > 0".into());
        }
        let l = &self.link;
        if !(l.tx_power > 0.0) {
            bad("link.tx_power", "must be > 0".into());
        }
        if !(l.l_atm > 0.0 && l.l_atm <= 1.0) {
            bad("link.l_atm", "must lie in (0, 1]".into());
        }
        if let Some(c) = l.cn0_override {
            if !(0.0..=80.0).contains(&c) {
                bad("link.cn0_override", "must lie in [0, 80] dB-Hz".into());
            }
        }
        if self.clock.bias0.abs() >= 0.1 {
            bad("clock.bias0", "must satisfy |bias0| < 0.1 s".into());
        }
        if self.clock.drift.abs() >= 1e-4 {
            bad("clock.drift", "must satisfy |drift| < 1e-4".into());
        }
        let a = &self.atmosphere;
        if !(a.pressure_hpa > 300.0 && a.pressure_hpa < 1100.0) {
            bad("atmosphere.pressure_hpa", "must lie in (300, 1100)".into());
        }
        if !(a.temperature_c > -60.0 && a.temperature_c < 60.0) {
            bad("atmosphere.temperature_c", "must lie in (-60, 60)".into());
        }
        if !(0.0..=1.0).contains(&a.relative_humidity) {
            bad("atmosphere.relative_humidity", "must lie in [0, 1]".into());
        }
        if a.klobuchar_alpha.is_some() != a.klobuchar_beta.is_some() {
            bad("atmosphere.klobuchar_beta", "alpha and beta must be given together".into());
        }
        self.validate_trajectory(&mut bad);
        for (i, it) in self.interference.iter().enumerate() {
            let k = |f: &str| format!("interference[{i}].{f}");
            match (it.amplitude, it.js_db) {
                (Some(a), None) if a >= 0.0 => {}
                (Some(_), None) => bad(&k("amplitude"), "must be >= 0".into()),
                (None, Some(_)) => {
                    if it.reference_prn.is_none() {
                        bad(&k("reference_prn"), "required with js_db".into());
                    }
                }
                _ => bad(&k("amplitude"), "exactly one of amplitude or js_db is required".into()),
            }
            if it.start < 0.0 {
                bad(&k("start"), "must be >= 0".into());
            }
            if let Some(stop) = it.stop {
                if stop <= it.start {
                    bad(&k("stop"), "must be > start".into());
                }
            }
            if it.kind == InterferenceKind::Pulse {
                if !(it.pulse_width > 0.0) {
                    bad(&k("pulse_width"), "must be > 0".into());
                }
                if !(it.pulse_width < it.repetition_interval) {
                    bad(&k("repetition_interval"), "must exceed pulse_width".into());
                }
            }
            if it.kind == InterferenceKind::Fmcw && it.f_m < 0.0 {
                bad(&k("f_m"), "must be >= 0".into());
            }
            if it.f0.abs() >= g.sample_rate / 2.0 {
                bad(&k("f0"), "must lie inside (-fs/2, fs/2)".into());
            }
            if it.kind == InterferenceKind::Chirp {
                let end = it.stop.unwrap_or(s.duration);
                let f_end = it.f0 + it.sweep_rate * (end - it.start).max(0.0);
                if f_end.abs() >= g.sample_rate / 2.0 {
                    bad(&k("sweep_rate"), "chirp leaves (-fs/2, fs/2) during its active window".into());
                }
            }
        }
        for (i, m) in self.multipath.iter().enumerate() {
            if !(1..=32).contains(&m.prn) {
                bad(&format!("multipath[{i}].prn"), "must lie in 1..=32".into());
            }
            if m.paths.len() > MAX_MULTIPATH_PATHS {
                bad(&format!("multipath[{i}].paths"), format!("at most {MAX_MULTIPATH_PATHS} paths per PRN"));
            }
            for (j, p) in m.paths.iter().enumerate() {
                if !(0.0..=1.0).contains(&p.alpha) {
                    bad(&format!("multipath[{i}].paths[{j}].alpha"), "must lie in [0, 1]".into());
                }
                if !(p.delay > 0.0) {
                    bad(&format!("multipath[{i}].paths[{j}].delay"), "must be > 0".into());
                }
            }
        }
        out
    }

    fn validate_trajectory(&self, bad: &mut impl FnMut(&str, String)) {
        let (lat, lon, h) = self.trajectory.origin();
        if !(-90.0..=90.0).contains(&lat) {
            bad("trajectory.lat_deg", "must lie in [-90, 90]".into());
        }
        if !(-180.0..=360.0).contains(&lon) {
            bad("trajectory.lon_deg", "must lie in [-180, 360]".into());
        }
        if !(-500.0..=100_000.0).contains(&h) {
            bad("trajectory.height_m", "must lie in [-500, 100000]".into());
        }
        if !(self.trajectory.rate_hz() >= 100.0) {
            bad("trajectory.rate_hz", "must be >= 100".into());
        }
        match &self.trajectory {
            TrajectoryProfile::Static(_) => {}
            TrajectoryProfile::Moderate(m) => {
                if m.waypoints.len() < 2 {
                    bad("trajectory.waypoints", "at least two waypoints are required".into());
                }
                for w in m.waypoints.windows(2) {
                    if !(w[1][0] > w[0][0]) {
                        bad("trajectory.waypoints", "waypoint times must be strictly increasing".into());
                        break;
                    }
                }
                if !(m.corner_blend >= 0.0) {
                    bad("trajectory.corner_blend", "must be >= 0".into());
                }
            }
            TrajectoryProfile::HighDynamics(p) => {
                if !(p.launch_speed > 0.0) {
                    bad("trajectory.launch_speed", "must be > 0".into());
                }
                if let Some(b) = p.ballistic_coefficient {
                    if !(b > 0.0) {
                        bad("trajectory.ballistic_coefficient", "must be > 0".into());
                    }
                }
            }
        }
    }

    /// Returns an error listing every validation problem, if any.
    pub fn validate_all(&self) -> Result<()> {
        let issues = self.validate();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(issues))
        }
    }
}
