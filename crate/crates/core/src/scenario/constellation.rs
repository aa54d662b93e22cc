//! A nominal 6-plane GPS constellation used to produce self-contained navigation files.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::codegen::{quantize_ephemeris, quantize_klobuchar};

use super::{BroadcastEphemeris, KlobucharCoeffs};

/// Representative broadcast ionosphere coefficients (exactly representable in LNAV).
pub const DEFAULT_KLOBUCHAR: KlobucharCoeffs = KlobucharCoeffs {
    alpha: [1.117_587_089_538_574_2e-8, 7.450_580_596_923_828e-9, -5.960_464_477_539_063e-8, -5.960_464_477_539_063e-8],
    beta: [90_112.0, 16_384.0, -196_608.0, -65_536.0],
};

/// Builds a 31-satellite Walker-like constellation with realistic perturbation terms.
///
/// All values are rounded to their LNAV resolution so that encoding the
/// message and decoding it again returns identical numbers.
pub fn nominal_constellation(week: u32, toe: f64, seed: u64) -> Vec<BroadcastEphemeris> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let deg = std::f64::consts::PI / 180.0;
    let mut out = Vec::new();
    let mut prn = 1u8;
    for plane in 0..6 {
        let slots = if plane < 1 { 6 } else { 5 };
        for slot in 0..slots {
            if prn > 32 {
                break;
            }
            let raan = (plane as f64 * 60.0 + 17.0) * deg;
            let arg_lat = (slot as f64 * 360.0 / slots as f64 + plane as f64 * 15.0 + 5.0) * deg;
            let omega: f64 = rng.gen_range(-3.0..3.0);
            let mut m0 = arg_lat - omega;
            while m0 > std::f64::consts::PI {
                m0 -= std::f64::consts::TAU;
            }
            while m0 < -std::f64::consts::PI {
                m0 += std::f64::consts::TAU;
            }
            let iode: u16 = rng.gen_range(1..250);
            let eph = BroadcastEphemeris {
                prn,
                week,
                toe,
                toc: toe,
                sqrt_a: 5153.6 + rng.gen_range(-0.6..0.6),
                e: rng.gen_range(0.002..0.018),
                i0: (55.0 + rng.gen_range(-1.5..1.5)) * deg,
                omega0: raan,
                omega,
                m0,
                delta_n: rng.gen_range(4.0e-9..5.2e-9),
                idot: rng.gen_range(-4.0e-10..4.0e-10),
                omega_dot: rng.gen_range(-8.4e-9..-7.8e-9),
                cuc: rng.gen_range(-6.0e-6..6.0e-6),
                cus: rng.gen_range(-9.0e-6..9.0e-6),
                crc: rng.gen_range(150.0..330.0),
                crs: rng.gen_range(-120.0..120.0),
                cic: rng.gen_range(-1.5e-7..1.5e-7),
                cis: rng.gen_range(-1.5e-7..1.5e-7),
                af0: rng.gen_range(-4.0e-4..4.0e-4),
                af1: rng.gen_range(-6.0e-12..6.0e-12),
                af2: 0.0,
                tgd: rng.gen_range(-1.2e-8..1.2e-8),
                iode,
                iodc: iode,
                health: 0,
                ura_index: 0,
                klobuchar: DEFAULT_KLOBUCHAR,
            };
            out.push(quantize_ephemeris(&eph));
            prn += 1;
        }
    }
    for e in out.iter_mut() {
        e.klobuchar = quantize_klobuchar(&DEFAULT_KLOBUCHAR);
    }
    out
}
