use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::channel::{klobuchar_delay, saastamoinen_ztd, sagnac_rotate, MappingFunction, SimpleObliquity};
use crate::constants::{C, LAMBDA_L1};
use crate::error::{Error, Result};
use crate::navigation::records::{ObservableRecord, PvtSolution};
use crate::orbits::{ecef_to_enu_matrix, ecef_to_geodetic, sat_state_at, SatState};
use crate::scenario::{BroadcastEphemeris, KlobucharCoeffs};
use crate::time::GpsTime;
use crate::Vec3;

/// Position norm above which elevation-dependent terms are evaluated, m.
const SURFACE_RADIUS_GUARD: f64 = 6.0e6;

/// Least-squares solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PvtConfig {
    pub elevation_mask_deg: f64,
    /// Apply the broadcast ionosphere correction when coefficients are available.
    pub ionosphere: bool,
    /// Apply the Saastamoinen correction with the default meteorology below.
    pub troposphere: bool,
    pub sagnac: bool,
    pub pressure_hpa: f64,
    pub temperature_c: f64,
    pub relative_humidity: f64,
    pub max_iterations: usize,
    /// Position update below which the iteration stops, m.
    pub tolerance: f64,
    pub max_gdop: f64,
}

impl Default for PvtConfig {
    fn default() -> Self {
        PvtConfig {
            elevation_mask_deg: 5.0,
            ionosphere: true,
            troposphere: true,
            sagnac: true,
            pressure_hpa: 1013.25,
            temperature_c: 20.0,
            relative_humidity: 0.5,
            max_iterations: 10,
            tolerance: 1e-4,
            max_gdop: 50.0,
        }
    }
}

/// Dilution of precision factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dops {
    pub gdop: f64,
    pub pdop: f64,
    pub hdop: f64,
    pub vdop: f64,
    pub tdop: f64,
}

/// Unit vector from `r_u` towards `r_s`.
pub fn line_of_sight(r_u: &Vec3, r_s: &Vec3) -> Vec3 {
    (r_s - r_u).normalize()
}

/// Pseudorange geometry row `[-u, 1]` of one satellite.
pub fn geometry_row(r_u: &Vec3, r_s: &Vec3) -> Vector4<f64> {
    let u = line_of_sight(r_u, r_s);
    Vector4::new(-u.x, -u.y, -u.z, 1.0)
}

/// DOPs of the satellites at `sats` seen from `r_u`, in the local ENU frame.
pub fn dops(r_u: &Vec3, sats: &[Vec3]) -> Result<Dops> {
    if sats.len() < 4 {
        return Err(Error::Pvt(format!("{} satellites, at least 4 required", sats.len())));
    }
    let g = ecef_to_geodetic(r_u);
    let rot = ecef_to_enu_matrix(g.lat, g.lon);
    let mut n = Matrix4::<f64>::zeros();
    for s in sats {
        let u = rot * line_of_sight(r_u, s);
        let row = Vector4::new(-u.x, -u.y, -u.z, 1.0);
        n += row * row.transpose();
    }
    let q = n.try_inverse().ok_or_else(|| Error::Pvt("singular geometry".into()))?;
    let d = |v: f64| if v >= 0.0 { v.sqrt() } else { f64::INFINITY };
    Ok(Dops {
        gdop: d(q.trace()),
        pdop: d(q[(0, 0)] + q[(1, 1)] + q[(2, 2)]),
        hdop: d(q[(0, 0)] + q[(1, 1)]),
        vdop: d(q[(2, 2)]),
        tdop: d(q[(3, 3)]),
    })
}

struct SatInput<'a> {
    obs: &'a ObservableRecord,
    state: SatState,
}

struct Row {
    r_s: Vec3,
    v_s: Vec3,
    u: Vec3,
    residual: f64,
}

/// Solves position, velocity and receiver clock from one epoch of observables.
///
/// All records must share `t_rx`. Pseudoranges are expected to be corrected
/// for the satellite clock. `prior` seeds the iteration; the Earth centre is
/// used otherwise.
pub fn solve_pvt(
    week: u32,
    observables: &[ObservableRecord],
    ephemerides: &BTreeMap<u8, BroadcastEphemeris>,
    klobuchar: Option<&KlobucharCoeffs>,
    cfg: &PvtConfig,
    prior: Option<Vec3>,
) -> Result<PvtSolution> {
    let t_rx = observables.first().ok_or_else(|| Error::Pvt("no observables".into()))?.t_rx;
    let mut sats = Vec::with_capacity(observables.len());
    for obs in observables {
        if obs.t_rx != t_rx {
            return Err(Error::Pvt("observables span several epochs".into()));
        }
        let Some(eph) = ephemerides.get(&obs.prn) else {
            continue;
        };
        let state = sat_state_at(eph, GpsTime::new(week, t_rx - obs.pseudorange / C))?;
        sats.push(SatInput { obs, state });
    }
    if sats.len() < 4 {
        return Err(Error::Pvt(format!("{} satellites with ephemeris, at least 4 required", sats.len())));
    }

    let mask = cfg.elevation_mask_deg.to_radians();
    let mut x = prior.unwrap_or_else(Vec3::zeros);
    let mut cb = 0.0;
    let mut rows: Vec<Row> = Vec::new();
    let mut used: Vec<usize> = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        iterations += 1;
        rows.clear();
        used.clear();
        let near_surface = x.norm() > SURFACE_RADIUS_GUARD;
        let user = ecef_to_geodetic(&x);
        let rot = ecef_to_enu_matrix(user.lat, user.lon);
        let ztd = if cfg.troposphere && near_surface {
            saastamoinen_ztd(cfg.pressure_hpa, cfg.temperature_c, cfg.relative_humidity, user.lat, user.h / 1000.0)
                .unwrap_or(0.0)
        } else {
            0.0
        };
        for (i, s) in sats.iter().enumerate() {
            let tau = (s.obs.pseudorange - cb) / C;
            let (r_s, v_s) = if cfg.sagnac {
                (sagnac_rotate(&s.state.r_s, tau), sagnac_rotate(&s.state.v_s, tau))
            } else {
                (s.state.r_s, s.state.v_s)
            };
            let range = (r_s - x).norm();
            let u = (r_s - x) / range;
            let mut model = range + cb;
            if near_surface {
                let enu = rot * u;
                let el = enu.z.asin();
                if el < mask {
                    continue;
                }
                let az = enu.x.atan2(enu.y).rem_euclid(std::f64::consts::TAU);
                if cfg.ionosphere {
                    if let Some(k) = klobuchar {
                        model += klobuchar_delay(k, &user, el, az, t_rx - cb / C);
                    }
                }
                model += ztd * SimpleObliquity.factor(el);
            }
            rows.push(Row { r_s, v_s, u, residual: s.obs.pseudorange - model });
            used.push(i);
        }
        if rows.len() < 4 {
            return Err(Error::Pvt(format!("{} satellites above the mask, at least 4 required", rows.len())));
        }
        let h = DMatrix::from_fn(rows.len(), 4, |r, c| if c < 3 { -rows[r].u[c] } else { 1.0 });
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.residual));
        let dx = least_squares(&h, &y)?;
        x += Vec3::new(dx[0], dx[1], dx[2]);
        cb += dx[3];
        if !x.iter().all(|v| v.is_finite()) || !cb.is_finite() {
            return Err(Error::Pvt("solution diverged".into()));
        }
        if Vec3::new(dx[0], dx[1], dx[2]).norm() < cfg.tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Pvt(format!("no convergence after {} iterations", cfg.max_iterations)));
    }

    // Post-fit residuals use the geometry of the last iteration, corrected for its update.
    let h = DMatrix::from_fn(rows.len(), 4, |r, c| if c < 3 { -rows[r].u[c] } else { 1.0 });
    let y = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.residual));
    let dx = least_squares(&h, &y)?;
    let post = &y - &h * &dx;
    let residual_rms = (post.norm_squared() / rows.len() as f64).sqrt();

    let yv = DVector::from_iterator(
        rows.len(),
        rows.iter().zip(&used).map(|(r, &i)| {
            let s = &sats[i];
            -LAMBDA_L1 * s.obs.doppler + C * s.state.clock_drift - r.u.dot(&r.v_s)
        }),
    );
    let dv = least_squares(&h, &yv)?;

    let sat_pos: Vec<Vec3> = rows.iter().map(|r| r.r_s).collect();
    let d = dops(&x, &sat_pos)?;
    if !(d.gdop < cfg.max_gdop) {
        return Err(Error::Pvt(format!("GDOP {:.1} exceeds {}", d.gdop, cfg.max_gdop)));
    }
    Ok(PvtSolution {
        t_rx,
        position: x,
        velocity: Vec3::new(dv[0], dv[1], dv[2]),
        clock_bias: cb / C,
        clock_drift: dv[3] / C,
        used_prns: used.iter().map(|&i| sats[i].obs.prn).collect(),
        residual_rms,
        gdop: d.gdop,
        pdop: d.pdop,
        hdop: d.hdop,
        vdop: d.vdop,
        tdop: d.tdop,
        iterations,
    })
}

fn least_squares(h: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let n = h.transpose() * h;
    let inv = n.try_inverse().ok_or_else(|| Error::Pvt("singular geometry".into()))?;
    Ok(inv * (h.transpose() * y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::{elevation_azimuth, geodetic_to_ecef, Geodetic};

    #[test]
    fn geometry_rows_match_elevation_azimuth() {
        let r_u = geodetic_to_ecef(&Geodetic::from_degrees(26.5, 80.2, 100.0));
        let g = ecef_to_geodetic(&r_u);
        let rot = ecef_to_enu_matrix(g.lat, g.lon);
        for r_s in [Vec3::new(2.0e7, 1.2e7, 9.0e6), Vec3::new(-3.0e6, 2.3e7, 1.1e7), Vec3::new(1.0e6, 1.5e7, 2.1e7)] {
            let row = geometry_row(&r_u, &r_s);
            let u = rot * Vec3::new(-row[0], -row[1], -row[2]);
            let (el, az) = elevation_azimuth(&r_u, &r_s);
            let expect = Vec3::new(el.cos() * az.sin(), el.cos() * az.cos(), el.sin());
            assert!((u - expect).norm() < 1e-9);
        }
    }
}
