//! Scenario configuration, broadcast ephemeris ingestion and user trajectories.

mod config;
mod constellation;
mod ephemeris;
mod rinex;
mod trajectory;

pub use config::{
    parse_toml, AtmosphereSection, ChipShaping, ClockSection, ConfigIssue, HighDynamicsProfile, InterferenceConfig,
    InterferenceKind, LinkSection, MagnusVariant, ModerateProfile, MultipathConfig, NoiseSection, PathConfig,
    ScenarioConfig, ScenarioSection, SignalSection, StaticProfile, TrajectoryProfile, MAX_MULTIPATH_PATHS,
};
pub use constellation::{nominal_constellation, DEFAULT_KLOBUCHAR};
pub use ephemeris::{BroadcastEphemeris, KlobucharCoeffs};
pub use rinex::{
    calendar_from_gps, fortran_d19, load_ephemerides, parse_rinex_nav, select_nearest, write_rinex_nav_v2,
    EphemerisSet, RinexNav,
};
pub use trajectory::{build_trajectory, local_to_ecef, Trajectory, TrajectorySample, TRAJECTORY_PAD};
