//! Physical and GPS interface constants.

/// Speed of light in vacuum, m/s.
pub const C: f64 = 299_792_458.0;
/// L1 carrier frequency, Hz.
pub const F_L1: f64 = 1_575.42e6;
/// L1 carrier wavelength, m.
pub const LAMBDA_L1: f64 = C / F_L1;
/// C/A code chipping rate, chips/s.
pub const F_CA: f64 = 1.023e6;
/// C/A code length, chips.
pub const CA_LEN: usize = 1023;
/// C/A code period, s.
pub const CA_PERIOD: f64 = 1e-3;
/// Navigation data rate, bit/s.
pub const NAV_BIT_RATE: f64 = 50.0;
/// Code periods per navigation bit.
pub const CODES_PER_BIT: u64 = 20;
/// Earth rotation rate (WGS-84), rad/s.
pub const OMEGA_E: f64 = 7.292_115_146_7e-5;
/// Earth gravitational constant (WGS-84, GPS value), m^3/s^2.
pub const MU: f64 = 3.986_005e14;
/// Relativistic clock correction constant, s/m^(1/2).
pub const F_REL: f64 = -4.442_807_633e-10;
/// WGS-84 semi-major axis, m.
pub const WGS84_A: f64 = 6_378_137.0;
/// WGS-84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;
/// Value of pi used by the GPS interface for semicircle conversion.
#[allow(clippy::approx_constant)]
pub const GPS_PI: f64 = 3.141_592_653_589_8;
/// Seconds in a GPS week.
pub const SECONDS_PER_WEEK: f64 = 604_800.0;
/// Standard gravity, m/s^2.
pub const G0: f64 = 9.806_65;
/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380_649e-23;
