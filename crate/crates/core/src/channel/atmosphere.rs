//! Broadcast ionosphere and Saastamoinen troposphere models.

use std::f64::consts::PI;

use crate::constants::C;
use crate::error::{Error, Result};
use crate::orbits::Geodetic;
use crate::scenario::{KlobucharCoeffs, MagnusVariant};

/// Elevation mask for slant troposphere evaluation, deg.
pub const TROPO_MASK_DEG: f64 = 5.0;

/// Klobuchar obliquity factor F = 1 + 16 (0.53 - E)^3 with E in semicircles.
pub fn klobuchar_slant_factor(elevation: f64) -> f64 {
    let e = elevation / PI;
    1.0 + 16.0 * (0.53 - e).powi(3)
}

/// L1 slant ionospheric group delay from the broadcast model, m.
pub fn klobuchar_delay(k: &KlobucharCoeffs, user: &Geodetic, elevation: f64, azimuth: f64, gps_tow: f64) -> f64 {
    let e = elevation / PI;
    let phi_u = user.lat / PI;
    let lam_u = user.lon / PI;
    let psi = 0.0137 / (e + 0.11) - 0.022;
    let phi_i = (phi_u + psi * azimuth.cos()).clamp(-0.416, 0.416);
    let lam_i = lam_u + psi * azimuth.sin() / (phi_i * PI).cos();
    let phi_m = phi_i + 0.064 * ((lam_i - 1.617) * PI).cos();
    let t = (4.32e4 * lam_i + gps_tow).rem_euclid(86_400.0);
    let f = klobuchar_slant_factor(elevation);
    let poly = |c: &[f64; 4]| c[0] + phi_m * (c[1] + phi_m * (c[2] + phi_m * c[3]));
    let amp = poly(&k.alpha).max(0.0);
    let per = poly(&k.beta).max(72_000.0);
    let x = 2.0 * PI * (t - 50_400.0) / per;
    let delay = if x.abs() < 1.57 { f * (5e-9 + amp * (1.0 - x * x / 2.0 + x.powi(4) / 24.0)) } else { f * 5e-9 };
    C * delay
}

/// Partial pressure of water vapour, hPa.
pub fn water_vapour_pressure(t0: f64, rh: f64, magnus: MagnusVariant) -> f64 {
    rh * 6.11 * 10f64.powf(7.5 * t0 / (t0 + magnus.denominator_offset()))
}

/// Saastamoinen zenith total delay, m. `h_km` is the height above the ellipsoid in km.
pub fn saastamoinen_ztd(p0: f64, t0: f64, rh: f64, lat: f64, h_km: f64) -> Result<f64> {
    saastamoinen_ztd_with(p0, t0, rh, lat, h_km, MagnusVariant::Printed)
}

pub fn saastamoinen_ztd_with(p0: f64, t0: f64, rh: f64, lat: f64, h_km: f64, magnus: MagnusVariant) -> Result<f64> {
    if !(300.0 < p0 && p0 < 1100.0) || !(-60.0 < t0 && t0 < 60.0) || !(0.0..=1.0).contains(&rh) {
        return Err(Error::InvalidInput(format!(
            "meteorology outside the model domain: p0 = {p0}, t0 = {t0}, rh = {rh}"
        )));
    }
    let chi = water_vapour_pressure(t0, rh, magnus);
    let den = 1.0 - 0.00266 * (2.0 * lat).cos() - 0.00028 * h_km;
    if den <= 0.0 {
        return Err(Error::InvalidInput("Saastamoinen denominator is not positive".into()));
    }
    Ok(0.002277 * (p0 + (0.05 + 1255.0 / (t0 + 273.15)) * chi) / den)
}

/// Maps a zenith delay onto a slant path.
pub trait MappingFunction: Send + Sync {
    fn factor(&self, elevation: f64) -> f64;
}

/// Global obliquity 1.001 / sqrt(0.002001 + sin^2 el).
#[derive(Debug, Clone, Copy, Default)]
pub struct SimpleObliquity;

impl MappingFunction for SimpleObliquity {
    fn factor(&self, elevation: f64) -> f64 {
        let s = elevation.sin();
        1.001 / (0.002001 + s * s).sqrt()
    }
}

/// Slant tropospheric delay with the default mapping. Rejects elevations below the mask.
pub fn slant_tropo(ztd: f64, elevation: f64) -> Result<f64> {
    if elevation < TROPO_MASK_DEG.to_radians() {
        return Err(Error::BelowMask { elevation_deg: elevation.to_degrees(), mask_deg: TROPO_MASK_DEG });
    }
    Ok(ztd * SimpleObliquity.factor(elevation))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_humidity_kills_wet_term() {
        assert_eq!(water_vapour_pressure(25.0, 0.0, MagnusVariant::Printed), 0.0);
        let a = saastamoinen_ztd(1013.25, 25.0, 0.0, 0.3, 0.0).unwrap();
        let b = saastamoinen_ztd(1013.25, -5.0, 0.0, 0.3, 0.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn magnus_switch_changes_wet_term() {
        let a = saastamoinen_ztd_with(1013.25, 20.0, 0.5, 0.7, 0.0, MagnusVariant::Printed).unwrap();
        let b = saastamoinen_ztd_with(1013.25, 20.0, 0.5, 0.7, 0.0, MagnusVariant::Standard).unwrap();
        assert!(b > a);
    }

    #[test]
    fn rejects_bad_meteorology() {
        assert!(saastamoinen_ztd(200.0, 20.0, 0.5, 0.0, 0.0).is_err());
        assert!(saastamoinen_ztd(1000.0, 20.0, 1.5, 0.0, 0.0).is_err());
    }

    #[test]
    fn slant_mask() {
        assert!(slant_tropo(2.3, 4.0f64.to_radians()).is_err());
        assert!(slant_tropo(2.3, 5.0f64.to_radians()).is_ok());
    }
}
