use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::constants::{WGS84_A, WGS84_F};
use crate::Vec3;

/// WGS-84 geodetic coordinates (radians, metres above the ellipsoid).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geodetic {
    pub lat: f64,
    pub lon: f64,
    pub h: f64,
}

impl Geodetic {
    pub fn from_degrees(lat_deg: f64, lon_deg: f64, h: f64) -> Self {
        Geodetic { lat: lat_deg.to_radians(), lon: lon_deg.to_radians(), h }
    }
}

const E2: f64 = WGS84_F * (2.0 - WGS84_F);

pub fn geodetic_to_ecef(g: &Geodetic) -> Vec3 {
    let (sl, cl) = g.lat.sin_cos();
    let (so, co) = g.lon.sin_cos();
    let n = WGS84_A / (1.0 - E2 * sl * sl).sqrt();
    Vec3::new((n + g.h) * cl * co, (n + g.h) * cl * so, (n * (1.0 - E2) + g.h) * sl)
}

/// ECEF to geodetic by fixed-point iteration on latitude.
pub fn ecef_to_geodetic(p: &Vec3) -> Geodetic {
    let b = WGS84_A * (1.0 - WGS84_F);
    let rho = p.x.hypot(p.y);
    let lon = if rho > 0.0 { p.y.atan2(p.x) } else { 0.0 };
    if rho < 1e-9 {
        let lat = if p.z >= 0.0 { std::f64::consts::FRAC_PI_2 } else { -std::f64::consts::FRAC_PI_2 };
        return Geodetic { lat, lon, h: p.z.abs() - b };
    }
    let mut lat = p.z.atan2(rho * (1.0 - E2));
    for _ in 0..20 {
        let sl = lat.sin();
        let n = WGS84_A / (1.0 - E2 * sl * sl).sqrt();
        let new_lat = (p.z + E2 * n * sl).atan2(rho);
        let done = (new_lat - lat).abs() < 1e-14;
        lat = new_lat;
        if done {
            break;
        }
    }
    let (sl, cl) = lat.sin_cos();
    let n = WGS84_A / (1.0 - E2 * sl * sl).sqrt();
    let h = if cl.abs() > 1e-3 { rho / cl - n } else { p.z / sl - n * (1.0 - E2) };
    Geodetic { lat, lon, h }
}

/// Rotation taking ECEF difference vectors into local East-North-Up.
pub fn ecef_to_enu_matrix(lat: f64, lon: f64) -> Matrix3<f64> {
    let (sl, cl) = lat.sin_cos();
    let (so, co) = lon.sin_cos();
    Matrix3::new(
        -so,
        co,
        0.0, //
        -sl * co,
        -sl * so,
        cl, //
        cl * co,
        cl * so,
        sl,
    )
}

pub fn enu_to_ecef_matrix(lat: f64, lon: f64) -> Matrix3<f64> {
    ecef_to_enu_matrix(lat, lon).transpose()
}

/// Elevation and azimuth of `r_s` seen from `r_u`, in radians.
///
/// Elevation lies in [-pi/2, pi/2] and azimuth in [0, 2 pi), measured from north towards east.
pub fn elevation_azimuth(r_u: &Vec3, r_s: &Vec3) -> (f64, f64) {
    let g = ecef_to_geodetic(r_u);
    let enu = ecef_to_enu_matrix(g.lat, g.lon) * (r_s - r_u);
    let horiz = enu.x.hypot(enu.y);
    let el = enu.z.atan2(horiz);
    let mut az = enu.x.atan2(enu.y);
    if az < 0.0 {
        az += std::f64::consts::TAU;
    }
    if az >= std::f64::consts::TAU {
        az -= std::f64::consts::TAU;
    }
    (el, az)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equator_prime_meridian() {
        let p = geodetic_to_ecef(&Geodetic::from_degrees(0.0, 0.0, 0.0));
        assert!((p - Vec3::new(6_378_137.0, 0.0, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn north_pole() {
        let g = ecef_to_geodetic(&Vec3::new(0.0, 0.0, 6_356_752.314_2));
        assert!((g.lat.to_degrees() - 90.0).abs() < 1e-12);
        assert!(g.h.abs() < 1e-3);
    }

    #[test]
    fn zenith_and_below_horizon() {
        let r_u = geodetic_to_ecef(&Geodetic::from_degrees(26.5, 80.2, 100.0));
        let up = r_u * 4.0;
        let (el, _) = elevation_azimuth(&r_u, &up);
        // The geocentric radial direction is within 0.2 deg of the geodetic normal.
        assert!(el > 89.7f64.to_radians());
        let g = ecef_to_geodetic(&r_u);
        let normal = enu_to_ecef_matrix(g.lat, g.lon) * Vec3::new(0.0, 0.0, 1.0);
        let (el, _) = elevation_azimuth(&r_u, &(r_u + normal * 2.0e7));
        assert!((el - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
        let (el, _) = elevation_azimuth(&r_u, &(r_u - normal * 1000.0 + Vec3::new(10.0, 0.0, 0.0)));
        assert!(el < 0.0);
    }
}
