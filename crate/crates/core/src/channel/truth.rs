//! Truth model: per-satellite apparent delays, Doppler and power along a trajectory.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::constants::{C, F_L1};
use crate::error::{Error, Result};
use crate::orbits::{ecef_to_geodetic, elevation_azimuth, sat_state_at, SatState};
use crate::scenario::{BroadcastEphemeris, KlobucharCoeffs, MagnusVariant, Trajectory};
use crate::time::GpsTime;
use crate::Vec3;

use super::atmosphere::{klobuchar_delay, saastamoinen_ztd_with, MappingFunction, SimpleObliquity};
use super::geometry::{los_doppler, sagnac_rotate};
use super::link::{carrier_power_for_cn0, received_power, AntennaPattern};

/// Spacing of delay-track knots on the receiver time axis, s.
pub const KNOT_INTERVAL: f64 = 0.01;
/// Step of the central difference used for delay rates, s.
const RATE_STEP: f64 = 1e-3;
const LIGHT_TIME_ITERATIONS: usize = 3;

/// Settings of the truth model shared by all satellites.
#[derive(Debug, Clone)]
pub struct TruthSettings {
    /// Receiver clock reading of sample 0.
    pub t0: GpsTime,
    /// Receiver clock bias at sample 0, s.
    pub clock_bias0: f64,
    /// Receiver clock drift, s/s.
    pub clock_drift: f64,
    pub ionosphere: bool,
    pub troposphere: bool,
    pub carrier_advance: bool,
    pub sagnac: bool,
    pub pressure_hpa: f64,
    pub temperature_c: f64,
    pub relative_humidity: f64,
    pub magnus: MagnusVariant,
    pub klobuchar: KlobucharCoeffs,
    pub tx_power: f64,
    pub l_atm: f64,
    pub n0: f64,
    pub cn0_override: Option<f64>,
    pub tx_pattern: AntennaPattern,
    pub rx_pattern: AntennaPattern,
}

impl Default for TruthSettings {
    fn default() -> Self {
        TruthSettings {
            t0: GpsTime::new(0, 0.0),
            clock_bias0: 0.0,
            clock_drift: 0.0,
            ionosphere: true,
            troposphere: true,
            carrier_advance: true,
            sagnac: true,
            pressure_hpa: 1013.25,
            temperature_c: 20.0,
            relative_humidity: 0.5,
            magnus: MagnusVariant::Printed,
            klobuchar: KlobucharCoeffs::default(),
            tx_power: 26.8,
            l_atm: 1.0,
            n0: 10f64.powf(-20.4),
            cn0_override: None,
            tx_pattern: AntennaPattern::default_satellite(),
            rx_pattern: AntennaPattern::default_receiver(),
        }
    }
}

/// Everything the truth model knows about one satellite at one receiver instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthPoint {
    /// Receiver clock reading, seconds of week.
    pub t_rx: f64,
    /// True GPS time of reception, seconds of week.
    pub t_true: f64,
    /// Receiver clock bias, s.
    pub clock_bias: f64,
    /// Satellite state at emission, rotated into the ECEF frame at reception.
    pub sat: SatState,
    pub r_u: Vec3,
    pub v_u: Vec3,
    pub geometric_range: f64,
    pub iono: f64,
    pub tropo: f64,
    pub elevation: f64,
    pub azimuth: f64,
    /// Apparent code delay b + tau - dt_sv, s.
    pub d_code: f64,
    /// Apparent carrier delay, s.
    pub d_phase: f64,
    pub carrier_power: f64,
    pub cn0: f64,
    /// Geometric Doppler from the line-of-sight velocity projection, Hz.
    pub doppler_los: f64,
}

impl TruthPoint {
    /// Total propagation delay (geometry plus atmosphere), s.
    pub fn tau_total(&self) -> f64 {
        (self.geometric_range + self.iono + self.tropo) / C
    }
}

/// Per-satellite truth series row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruthObservable {
    pub t_rx: f64,
    pub prn: u8,
    pub geometric_range: f64,
    pub tau_total: f64,
    pub iono_delay: f64,
    pub tropo_delay: f64,
    pub doppler: f64,
    pub elevation: f64,
    pub carrier_power: f64,
    pub cn0: f64,
}

/// Apparent delays at one knot with their rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayKnot {
    pub d_code: f64,
    pub rate_code: f64,
    pub d_phase: f64,
    pub rate_phase: f64,
    pub amplitude: f64,
}

/// Apparent delays sampled on a uniform receiver-time grid, interpolated with cubic Hermite polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayTrack {
    pub prn: u8,
    /// Receiver elapsed time of the first knot, s.
    pub e0: f64,
    pub h: f64,
    pub knots: Vec<DelayKnot>,
}

/// Interpolated delay state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayState {
    pub d_code: f64,
    pub d_phase: f64,
    pub rate_code: f64,
    pub rate_phase: f64,
    pub amplitude: f64,
}

impl DelayTrack {
    pub fn e_last(&self) -> f64 {
        self.e0 + self.h * (self.knots.len() - 1) as f64
    }

    pub fn covers(&self, e_first: f64, e_last: f64) -> bool {
        e_first >= self.e0 - 1e-12 && e_last <= self.e_last() + 1e-12
    }

    /// Hermite interpolation at receiver elapsed time `e`.
    #[inline]
    pub fn eval(&self, e: f64) -> Result<DelayState> {
        let x = (e - self.e0) / self.h;
        let n = self.knots.len();
        if !(x >= -1e-9 && x <= (n - 1) as f64 + 1e-9) {
            return Err(Error::TruthGap { prn: self.prn, t: e });
        }
        let k = (x.floor().max(0.0) as usize).min(n - 2);
        let u = x - k as f64;
        let a = &self.knots[k];
        let b = &self.knots[k + 1];
        let h = self.h;
        let (d_code, rate_code) = hermite(u, h, a.d_code, a.rate_code, b.d_code, b.rate_code);
        let (d_phase, rate_phase) = hermite(u, h, a.d_phase, a.rate_phase, b.d_phase, b.rate_phase);
        Ok(DelayState {
            d_code,
            d_phase,
            rate_code,
            rate_phase,
            amplitude: a.amplitude + u * (b.amplitude - a.amplitude),
        })
    }
}

#[inline]
fn hermite(u: f64, h: f64, p0: f64, m0: f64, p1: f64, m1: f64) -> (f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    let p = (2.0 * u3 - 3.0 * u2 + 1.0) * p0
        + (u3 - 2.0 * u2 + u) * h * m0
        + (-2.0 * u3 + 3.0 * u2) * p1
        + (u3 - u2) * h * m1;
    let d = ((6.0 * u2 - 6.0 * u) * p0 + (-6.0 * u2 + 6.0 * u) * p1) / h
        + (3.0 * u2 - 4.0 * u + 1.0) * m0
        + (3.0 * u2 - 2.0 * u) * m1;
    (p, d)
}

/// Truth model bound to one trajectory.
#[derive(Debug, Clone)]
pub struct TruthModel {
    pub settings: TruthSettings,
    pub trajectory: Arc<Trajectory>,
}

impl TruthModel {
    pub fn new(settings: TruthSettings, trajectory: Arc<Trajectory>) -> Self {
        TruthModel { settings, trajectory }
    }

    /// True GPS time (seconds of week) and receiver clock bias at receiver elapsed time `e`.
    ///
    /// The clock follows b(t) = b0 + d (t - t_start) with t_start the true time of sample 0.
    pub fn true_time(&self, e: f64) -> (f64, f64) {
        let s = &self.settings;
        let te = (e - s.clock_bias0) / (1.0 + s.clock_drift);
        let bias = s.clock_bias0 + s.clock_drift * te;
        (s.t0.tow + e - bias, bias)
    }

    /// Receiver clock reading (seconds of week) at elapsed time `e`.
    pub fn t_rx(&self, e: f64) -> f64 {
        self.settings.t0.tow + e
    }

    /// Evaluates the full truth for `eph` at receiver elapsed time `e`.
    pub fn evaluate(&self, eph: &BroadcastEphemeris, e: f64) -> Result<TruthPoint> {
        let s = &self.settings;
        let (t_true, bias) = self.true_time(e);
        let (r_u, v_u, _) = self.trajectory.state_at(t_true)?;
        let week = s.t0.week;

        let mut tau = 0.075;
        let mut sat = sat_state_at(eph, GpsTime::new(week, t_true - tau))?;
        let mut r_s = sat.r_s;
        for _ in 0..LIGHT_TIME_ITERATIONS {
            sat = sat_state_at(eph, GpsTime::new(week, t_true - tau))?;
            r_s = if s.sagnac { sagnac_rotate(&sat.r_s, tau) } else { sat.r_s };
            tau = (r_s - r_u).norm() / C;
        }
        let v_s = if s.sagnac { sagnac_rotate(&sat.v_s, tau) } else { sat.v_s };
        let geometric_range = (r_s - r_u).norm();
        let (elevation, azimuth) = elevation_azimuth(&r_u, &r_s);
        let user = ecef_to_geodetic(&r_u);
        let el_atm = elevation.max(1e-3);
        let iono = if s.ionosphere { klobuchar_delay(&s.klobuchar, &user, el_atm, azimuth, t_true) } else { 0.0 };
        let tropo = if s.troposphere {
            let ztd = saastamoinen_ztd_with(
                s.pressure_hpa,
                s.temperature_c,
                s.relative_humidity,
                user.lat,
                user.h / 1000.0,
                s.magnus,
            )?;
            ztd * SimpleObliquity.factor(el_atm)
        } else {
            0.0
        };
        let dt_sv = sat.clock_offset;
        let d_code = bias + (geometric_range + iono + tropo) / C - dt_sv;
        let iono_phase = if s.carrier_advance { -iono } else { iono };
        let d_phase = bias + (geometric_range + iono_phase + tropo) / C - dt_sv;
        let carrier_power = match s.cn0_override {
            Some(cn0) => carrier_power_for_cn0(cn0, s.n0),
            None => {
                let g_tx = s.tx_pattern.gain_dbi(elevation);
                let g_rx = s.rx_pattern.gain_dbi(elevation);
                received_power(s.tx_power, g_tx, g_rx, geometric_range, F_L1, s.l_atm, s.n0).carrier_power
            }
        };
        let cn0 = 10.0 * (carrier_power / s.n0).log10();
        let doppler_los = los_doppler(&r_s, &v_s, &r_u, &v_u, F_L1);
        Ok(TruthPoint {
            t_rx: self.t_rx(e),
            t_true,
            clock_bias: bias,
            sat: SatState { r_s, v_s, ..sat },
            r_u,
            v_u,
            geometric_range,
            iono,
            tropo,
            elevation,
            azimuth,
            d_code,
            d_phase,
            carrier_power,
            cn0,
            doppler_los,
        })
    }

    /// Delay knot at `e` with central-difference rates.
    pub fn knot(&self, eph: &BroadcastEphemeris, e: f64) -> Result<DelayKnot> {
        let c = self.evaluate(eph, e)?;
        let p = self.evaluate(eph, e + RATE_STEP)?;
        let m = self.evaluate(eph, e - RATE_STEP)?;
        Ok(DelayKnot {
            d_code: c.d_code,
            rate_code: (p.d_code - m.d_code) / (2.0 * RATE_STEP),
            d_phase: c.d_phase,
            rate_phase: (p.d_phase - m.d_phase) / (2.0 * RATE_STEP),
            amplitude: c.carrier_power.sqrt(),
        })
    }

    /// Builds the delay track of `eph` covering receiver elapsed times `[e_first, e_last]`.
    pub fn delay_track(&self, eph: &BroadcastEphemeris, e_first: f64, e_last: f64) -> Result<DelayTrack> {
        let h = KNOT_INTERVAL;
        let j0 = (e_first / h).floor() as i64;
        let j1 = (e_last / h).ceil() as i64;
        let knots = (j0..=j1.max(j0 + 1)).map(|j| self.knot(eph, j as f64 * h)).collect::<Result<Vec<_>>>()?;
        Ok(DelayTrack { prn: eph.prn, e0: j0 as f64 * h, h, knots })
    }

    /// Truth observable row at `e`.
    pub fn observable(&self, eph: &BroadcastEphemeris, e: f64) -> Result<TruthObservable> {
        let p = self.evaluate(eph, e)?;
        Ok(TruthObservable {
            t_rx: p.t_rx,
            prn: eph.prn,
            geometric_range: p.geometric_range,
            tau_total: p.tau_total(),
            iono_delay: p.iono,
            tropo_delay: p.tropo,
            doppler: p.doppler_los,
            elevation: p.elevation,
            carrier_power: p.carrier_power,
            cn0: p.cn0,
        })
    }

    /// Apparent carrier Doppler -f_L1 dD_phase/dt seen by the receiver, Hz.
    pub fn apparent_doppler(&self, eph: &BroadcastEphemeris, e: f64) -> Result<f64> {
        let p = self.evaluate(eph, e + RATE_STEP)?;
        let m = self.evaluate(eph, e - RATE_STEP)?;
        Ok(-F_L1 * (p.d_phase - m.d_phase) / (2.0 * RATE_STEP))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |t: f64| 0.07 + 2e-6 * t - 3e-9 * t * t + 1e-11 * t * t * t;
        let df = |t: f64| 2e-6 - 6e-9 * t + 3e-11 * t * t;
        let (h, t0) = (0.01, 3.0);
        let (p, d) = hermite(0.37, h, f(t0), df(t0), f(t0 + h), df(t0 + h));
        assert!((p - f(t0 + 0.37 * h)).abs() < 1e-16);
        assert!((d - df(t0 + 0.37 * h)).abs() < 1e-13);
    }
}
