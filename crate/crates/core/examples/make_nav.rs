//! Writes the nominal-constellation navigation file used by the bundled scenarios
//! and lists the satellites visible from a site.
//!
//! cargo run --example make_nav -- scenarios/brdc0690.22n 26.5 80.2 367196

use std::env;

use gnss_twin::channel::{TruthModel, TruthSettings};
use gnss_twin::orbits::{geodetic_to_ecef, Geodetic};
use gnss_twin::scenario::{nominal_constellation, write_rinex_nav_v2, Trajectory, TrajectorySample, DEFAULT_KLOBUCHAR};
use gnss_twin::time::GpsTime;
use gnss_twin::Vec3;

fn main() -> gnss_twin::Result<()> {
    let args: Vec<String> = env::args().collect();
    let out = args.get(1).cloned().unwrap_or_else(|| "scenarios/brdc0690.22n".into());
    let lat: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(26.5);
    let lon: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(80.2);
    let tow: f64 = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(367_196.0);
    let week = 2200;

    let records = nominal_constellation(week, 367_200.0, 2200);
    std::fs::write(&out, write_rinex_nav_v2(&records, Some(&DEFAULT_KLOBUCHAR)))
        .map_err(|e| gnss_twin::Error::Io { path: out.clone().into(), source: e })?;
    println!("wrote {} records to {out}", records.len());

    let r_u = geodetic_to_ecef(&Geodetic::from_degrees(lat, lon, 100.0));
    let samples = (0..3)
        .map(|k| TrajectorySample { t: tow - 2.0 + 2.0 * k as f64, r_u, v_u: Vec3::zeros(), a_u: Vec3::zeros() })
        .collect();
    let traj = Trajectory { samples, dt: 2.0 };
    let truth = TruthModel::new(
        TruthSettings { t0: GpsTime::new(week, tow), ..TruthSettings::default() },
        std::sync::Arc::new(traj),
    );
    for eph in records.iter() {
        let p = truth.evaluate(eph, 0.0)?;
        if p.elevation > 0.0 {
            println!(
                "PRN {:2} el {:5.1} az {:5.1} C/N0 {:4.1} doppler {:8.1}",
                eph.prn,
                p.elevation.to_degrees(),
                p.azimuth.to_degrees(),
                p.cn0,
                p.doppler_los
            );
        }
    }
    Ok(())
}
