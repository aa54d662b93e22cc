use serde::{Deserialize, Serialize};

use crate::constants::{F_REL, MU, OMEGA_E};
use crate::error::{Error, Result};
use crate::scenario::BroadcastEphemeris;
use crate::time::{wrap_week_diff, GpsTime};
use crate::Vec3;

/// Maximum |t - toe| accepted by [`sat_state_at`], s.
pub const FIT_WINDOW_S: f64 = 4.0 * 3600.0;

const KEPLER_MAX_ITER: usize = 30;
const KEPLER_TOL: f64 = 1e-12;

/// Satellite position, velocity and clock at one GPS time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SatState {
    pub prn: u8,
    /// Seconds of week.
    pub t: f64,
    pub r_s: Vec3,
    pub v_s: Vec3,
    /// Satellite clock offset including the relativistic term and minus TGD, s.
    pub clock_offset: f64,
    pub clock_drift: f64,
}

/// Evaluates the broadcast ephemeris at GPS time `t`.
///
/// Position follows the standard user algorithm with harmonic corrections and
/// velocity is its analytic time derivative. The clock offset includes the
/// eccentricity relativistic term and the L1 group delay `tgd`.
pub fn sat_state_at(eph: &BroadcastEphemeris, t: GpsTime) -> Result<SatState> {
    let tk = t.diff(&GpsTime::new(eph.week, eph.toe));
    if tk.abs() > FIT_WINDOW_S + 1.0 {
        return Err(Error::InvalidInput(format!("PRN {}: t is {tk:.1} s from toe, outside the fit window", eph.prn)));
    }
    let a = eph.a();
    let n0 = (MU / (a * a * a)).sqrt();
    let n = n0 + eph.delta_n;
    let m = eph.m0 + n * tk;

    let mut ecc_anom = m;
    let mut converged = false;
    for _ in 0..KEPLER_MAX_ITER {
        let f = ecc_anom - eph.e * ecc_anom.sin() - m;
        let step = f / (1.0 - eph.e * ecc_anom.cos());
        ecc_anom -= step;
        if step.abs() < KEPLER_TOL {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::KeplerDivergence { prn: eph.prn, iterations: KEPLER_MAX_ITER });
    }

    let (sin_e, cos_e) = ecc_anom.sin_cos();
    let one_minus = 1.0 - eph.e * cos_e;
    let sq = (1.0 - eph.e * eph.e).sqrt();
    let nu = (sq * sin_e).atan2(cos_e - eph.e);
    let phi = nu + eph.omega;
    let (s2, c2) = (2.0 * phi).sin_cos();

    let du = eph.cus * s2 + eph.cuc * c2;
    let dr = eph.crs * s2 + eph.crc * c2;
    let di = eph.cis * s2 + eph.cic * c2;
    let u = phi + du;
    let r = a * one_minus + dr;
    let i = eph.i0 + di + eph.idot * tk;
    let (sin_u, cos_u) = u.sin_cos();
    let xp = r * cos_u;
    let yp = r * sin_u;

    let omega_rate = eph.omega_dot - OMEGA_E;
    let big_omega = eph.omega0 + omega_rate * tk - OMEGA_E * eph.toe;
    let (sin_o, cos_o) = big_omega.sin_cos();
    let (sin_i, cos_i) = i.sin_cos();

    let x = xp * cos_o - yp * cos_i * sin_o;
    let y = xp * sin_o + yp * cos_i * cos_o;
    let z = yp * sin_i;

    let e_dot = n / one_minus;
    let nu_dot = e_dot * sq / one_minus;
    let u_dot = nu_dot * (1.0 + 2.0 * (eph.cus * c2 - eph.cuc * s2));
    let r_dot = a * eph.e * sin_e * e_dot + 2.0 * nu_dot * (eph.crs * c2 - eph.crc * s2);
    let i_dot = eph.idot + 2.0 * nu_dot * (eph.cis * c2 - eph.cic * s2);
    let xp_dot = r_dot * cos_u - r * u_dot * sin_u;
    let yp_dot = r_dot * sin_u + r * u_dot * cos_u;

    let vx = xp_dot * cos_o - yp_dot * cos_i * sin_o + yp * sin_i * sin_o * i_dot - omega_rate * y;
    let vy = xp_dot * sin_o + yp_dot * cos_i * cos_o - yp * sin_i * cos_o * i_dot + omega_rate * x;
    let vz = yp_dot * sin_i + yp * cos_i * i_dot;

    let dtc = t.diff(&GpsTime::new(eph.week, eph.toc));
    let dtc = wrap_week_diff(dtc);
    let rel = F_REL * eph.e * eph.sqrt_a * sin_e;
    let rel_dot = F_REL * eph.e * eph.sqrt_a * cos_e * e_dot;
    let clock_offset = eph.af0 + eph.af1 * dtc + eph.af2 * dtc * dtc + rel - eph.tgd;
    let clock_drift = eph.af1 + 2.0 * eph.af2 * dtc + rel_dot;

    Ok(SatState {
        prn: eph.prn,
        t: t.tow,
        r_s: Vec3::new(x, y, z),
        v_s: Vec3::new(vx, vy, vz),
        clock_offset,
        clock_drift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circular() -> BroadcastEphemeris {
        BroadcastEphemeris {
            prn: 5,
            week: 2200,
            toe: 345_600.0,
            toc: 345_600.0,
            sqrt_a: 5153.6,
            i0: 0.96,
            omega0: 1.2,
            m0: 0.3,
            ..Default::default()
        }
    }

    #[test]
    fn circular_orbit_radius_is_semi_major_axis() {
        let eph = circular();
        let s = sat_state_at(&eph, GpsTime::new(2200, eph.toe)).unwrap();
        assert!((s.r_s.norm() - eph.a()).abs() < 1e-6);
    }

    #[test]
    fn clock_polynomial_is_exact() {
        let mut eph = circular();
        eph.af0 = 1.5e-4;
        eph.af1 = -2.0e-11;
        eph.af2 = 1.0e-18;
        for dt in [-7000.0, -1.0, 0.0, 3.25, 9000.0] {
            let s = sat_state_at(&eph, GpsTime::new(2200, eph.toc + dt)).unwrap();
            let expect = eph.af0 + eph.af1 * dt + eph.af2 * dt * dt;
            assert_eq!(s.clock_offset, expect);
        }
    }

    #[test]
    fn outside_fit_window_is_rejected() {
        let eph = circular();
        assert!(sat_state_at(&eph, GpsTime::new(2200, eph.toe + 5.0 * 3600.0)).is_err());
    }
}
