use crate::constants::{C, OMEGA_E};
use crate::Vec3;

/// Line-of-sight Doppler f_D = -(f_tx / c) (v_s - v_u) . (r_s - r_u) / |r_s - r_u|, Hz.
pub fn los_doppler(r_s: &Vec3, v_s: &Vec3, r_u: &Vec3, v_u: &Vec3, f_tx: f64) -> f64 {
    let los = r_s - r_u;
    -(f_tx / C) * (v_s - v_u).dot(&los) / los.norm()
}

/// Propagation delay |r_s - r_u| / c plus the atmospheric delays (m) over c, s.
pub fn propagation_delay(r_s: &Vec3, r_u: &Vec3, iono: f64, tropo: f64) -> f64 {
    (r_s - r_u).norm() / C + iono / C + tropo / C
}

/// Rotates an ECEF vector about Z by the Earth rotation accumulated during `tau` seconds of flight.
pub fn sagnac_rotate(v: &Vec3, tau: f64) -> Vec3 {
    let (s, c) = (OMEGA_E * tau).sin_cos();
    Vec3::new(c * v.x + s * v.y, -s * v.x + c * v.y, v.z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_relative_velocity() {
        let v = Vec3::new(1000.0, -2000.0, 300.0);
        let d = los_doppler(&Vec3::new(2e7, 1e7, 5e6), &v, &Vec3::new(6.4e6, 0.0, 0.0), &v, 1.57542e9);
        assert_eq!(d, 0.0);
    }

    #[test]
    fn sagnac_rotation_preserves_norm() {
        let v = Vec3::new(2.0e7, 1.3e7, 8.0e6);
        let r = sagnac_rotate(&v, 0.075);
        assert!((r.norm() - v.norm()).abs() < 1e-6);
        assert!((r - v).norm() > 100.0);
    }
}
