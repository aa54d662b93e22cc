//! Shared helpers and independently coded reference models for integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;
use std::path::{Path, PathBuf};

use gnss_twin::pipeline::{build_scenario, Scenario};
use gnss_twin::scenario::{BroadcastEphemeris, ScenarioConfig};

pub fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

pub fn load_config(name: &str) -> ScenarioConfig {
    ScenarioConfig::load(&scenarios_dir().join(name)).expect("shipped scenario parses")
}

pub fn scenario(cfg: &ScenarioConfig) -> Scenario {
    build_scenario(cfg, &scenarios_dir()).expect("scenario builds")
}

/// Prints one result line straight to stdout so it shows even when test output is captured.
pub fn report(criterion: u32, pass: bool, summary: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("acceptance criterion {criterion:>2} {verdict}: {summary}\n");
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "criterion {criterion} failed: {summary}");
}

pub fn rms(v: &[f64]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / v.len().max(1) as f64).sqrt()
}

// ---------------------------------------------------------------------------
// C/A code by G2 output delay rather than phase-selector taps.

/// G2 delay in chips for PRN 1..=32.
pub const G2_DELAY: [usize; 32] = [
    5, 6, 7, 8, 17, 18, 139, 140, 141, 251, 252, 254, 255, 256, 257, 258, 469, 470, 471, 472, 473, 474, 509, 512, 513,
    514, 515, 516, 859, 860, 861, 862,
];

/// First ten chips of each code in octal, leading chip first.
pub const FIRST_TEN_OCTAL: [u32; 32] = [
    0o1440, 0o1620, 0o1710, 0o1744, 0o1133, 0o1455, 0o1131, 0o1454, 0o1626, 0o1504, 0o1642, 0o1750, 0o1764, 0o1772,
    0o1775, 0o1776, 0o1156, 0o1467, 0o1633, 0o1715, 0o1746, 0o1763, 0o1063, 0o1706, 0o1743, 0o1761, 0o1770, 0o1774,
    0o1127, 0o1453, 0o1625, 0o1712,
];

/// Maximal-length sequence of a 10-stage register, all ones at start; `taps` are 1-based stages fed back.
fn m_sequence(taps: &[usize]) -> Vec<u8> {
    let mut reg = 0x3ffu16;
    let mut out = Vec::with_capacity(1023);
    for _ in 0..1023 {
        out.push(((reg >> 9) & 1) as u8);
        let fb = taps.iter().fold(0u16, |acc, &t| acc ^ ((reg >> (t - 1)) & 1));
        reg = ((reg << 1) | fb) & 0x3ff;
    }
    out
}

/// C/A code of `prn` as bits (0/1).
pub fn ca_oracle(prn: u8) -> Vec<u8> {
    let g1 = m_sequence(&[3, 10]);
    let g2 = m_sequence(&[2, 3, 6, 8, 9, 10]);
    let d = G2_DELAY[prn as usize - 1];
    (0..1023).map(|k| g1[k] ^ g2[(k + 1023 - d) % 1023]).collect()
}

// ---------------------------------------------------------------------------
// Broadcast ionosphere, written out step by step in semicircles.

#[allow(clippy::manual_clamp)]
pub fn klobuchar_oracle(alpha: [f64; 4], beta: [f64; 4], lat: f64, lon: f64, el: f64, az: f64, tow: f64) -> f64 {
    let e_sc = el / PI;
    let earth_angle = 0.0137 / (e_sc + 0.11) - 0.022;
    let mut ipp_lat = lat / PI + earth_angle * az.cos();
    if ipp_lat > 0.416 {
        ipp_lat = 0.416;
    }
    if ipp_lat < -0.416 {
        ipp_lat = -0.416;
    }
    let ipp_lon = lon / PI + earth_angle * az.sin() / (ipp_lat * PI).cos();
    let geomag = ipp_lat + 0.064 * ((ipp_lon - 1.617) * PI).cos();
    let mut local = 43_200.0 * ipp_lon + tow;
    while local >= 86_400.0 {
        local -= 86_400.0;
    }
    while local < 0.0 {
        local += 86_400.0;
    }
    let mut amp = 0.0;
    let mut per = 0.0;
    for n in 0..4 {
        amp += alpha[n] * geomag.powi(n as i32);
        per += beta[n] * geomag.powi(n as i32);
    }
    if amp < 0.0 {
        amp = 0.0;
    }
    if per < 72_000.0 {
        per = 72_000.0;
    }
    let phase = 2.0 * PI * (local - 50_400.0) / per;
    let slant = 1.0 + 16.0 * (0.53 - e_sc).powi(3);
    let seconds = if phase.abs() >= 1.57 {
        slant * 5e-9
    } else {
        slant * (5e-9 + amp * (1.0 - phase.powi(2) / 2.0 + phase.powi(4) / 24.0))
    };
    seconds * 299_792_458.0
}

// ---------------------------------------------------------------------------
// Saastamoinen zenith delay with the printed water-vapour constant.

pub fn saastamoinen_oracle(p0: f64, t0: f64, rh: f64, lat: f64, h_km: f64) -> f64 {
    let vapour = rh * 6.11 * 10f64.powf(7.5 * t0 / (t0 + 273.3));
    let numerator = p0 + (0.05 + 1255.0 / (t0 + 273.15)) * vapour;
    let gravity = 1.0 - 0.00266 * (2.0 * lat).cos() - 0.00028 * h_km;
    0.002277 * numerator / gravity
}

// ---------------------------------------------------------------------------
// Broadcast orbit: Kepler solved by fixed-point iteration.

pub fn orbit_oracle(eph: &BroadcastEphemeris, week: u32, tow: f64) -> [f64; 3] {
    const GM: f64 = 3.986005e14;
    const EARTH_RATE: f64 = 7.2921151467e-5;
    let a = eph.sqrt_a.powi(2);
    let tk = (week as f64 - eph.week as f64) * 604_800.0 + tow - eph.toe;
    let mean_motion = (GM / a.powi(3)).sqrt() + eph.delta_n;
    let mk = eph.m0 + mean_motion * tk;
    let mut ek = mk;
    for _ in 0..200 {
        ek = mk + eph.e * ek.sin();
    }
    let nu = ((1.0 - eph.e.powi(2)).sqrt() * ek.sin()).atan2(ek.cos() - eph.e);
    let arg_lat = nu + eph.omega;
    let u = arg_lat + eph.cuc * (2.0 * arg_lat).cos() + eph.cus * (2.0 * arg_lat).sin();
    let r = a * (1.0 - eph.e * ek.cos()) + eph.crc * (2.0 * arg_lat).cos() + eph.crs * (2.0 * arg_lat).sin();
    let inc = eph.i0 + eph.idot * tk + eph.cic * (2.0 * arg_lat).cos() + eph.cis * (2.0 * arg_lat).sin();
    let node = eph.omega0 + (eph.omega_dot - EARTH_RATE) * tk - EARTH_RATE * eph.toe;
    let (xo, yo) = (r * u.cos(), r * u.sin());
    [xo * node.cos() - yo * inc.cos() * node.sin(), xo * node.sin() + yo * inc.cos() * node.cos(), yo * inc.sin()]
}
