use serde::{Deserialize, Serialize};

use crate::navigation::records::PvtSolution;
use crate::orbits::{ecef_to_enu_matrix, ecef_to_geodetic};
use crate::Vec3;

/// Position error of one solution in the local frame of the truth position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnuError {
    pub t_rx: f64,
    pub east: f64,
    pub north: f64,
    pub up: f64,
    pub horizontal: f64,
    pub error_3d: f64,
    /// Clock bias error, s.
    pub clock_bias: f64,
}

/// Summary statistics over all compared epochs.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PositionSummary {
    pub epochs: usize,
    pub horizontal_rms: f64,
    pub horizontal_max: f64,
    pub vertical_rms: f64,
    pub vertical_max: f64,
    pub rms_3d: f64,
    pub max_3d: f64,
}

impl PositionSummary {
    /// Fraction of epochs whose horizontal error is at most `limit`.
    pub fn fraction_within(errors: &[EnuError], limit: f64) -> f64 {
        if errors.is_empty() {
            return 0.0;
        }
        errors.iter().filter(|e| e.horizontal <= limit).count() as f64 / errors.len() as f64
    }
}

/// Truth state at `t`, interpolated linearly between the rows of `truth`
/// when no row lies within `tol` seconds.
fn truth_at(truth: &[PvtSolution], t: f64, tol: f64) -> Option<(Vec3, f64)> {
    let i = truth.partition_point(|s| s.t_rx < t);
    for j in [i.wrapping_sub(1), i] {
        if let Some(s) = truth.get(j) {
            if (s.t_rx - t).abs() <= tol {
                return Some((s.position, s.clock_bias));
            }
        }
    }
    if i == 0 || i >= truth.len() {
        return None;
    }
    let (a, b) = (&truth[i - 1], &truth[i]);
    let w = (t - a.t_rx) / (b.t_rx - a.t_rx);
    Some((a.position + (b.position - a.position) * w, a.clock_bias + (b.clock_bias - a.clock_bias) * w))
}

/// ENU errors of `solutions` against `truth` (sorted by `t_rx`) and summary
/// statistics. Solutions outside the truth span are skipped.
pub fn position_errors(solutions: &[PvtSolution], truth: &[PvtSolution], tol: f64) -> (Vec<EnuError>, PositionSummary) {
    let mut out = Vec::with_capacity(solutions.len());
    for s in solutions {
        let Some((r_true, b_true)) = truth_at(truth, s.t_rx, tol) else {
            continue;
        };
        let g = ecef_to_geodetic(&r_true);
        let enu = ecef_to_enu_matrix(g.lat, g.lon) * (s.position - r_true);
        out.push(EnuError {
            t_rx: s.t_rx,
            east: enu.x,
            north: enu.y,
            up: enu.z,
            horizontal: enu.x.hypot(enu.y),
            error_3d: enu.norm(),
            clock_bias: s.clock_bias - b_true,
        });
    }
    let n = out.len();
    let mut sum = PositionSummary { epochs: n, ..Default::default() };
    if n > 0 {
        let rms = |f: &dyn Fn(&EnuError) -> f64| (out.iter().map(|e| f(e).powi(2)).sum::<f64>() / n as f64).sqrt();
        let max = |f: &dyn Fn(&EnuError) -> f64| out.iter().map(|e| f(e).abs()).fold(0.0, f64::max);
        sum.horizontal_rms = rms(&|e| e.horizontal);
        sum.horizontal_max = max(&|e| e.horizontal);
        sum.vertical_rms = rms(&|e| e.up);
        sum.vertical_max = max(&|e| e.up);
        sum.rms_3d = rms(&|e| e.error_3d);
        sum.max_3d = max(&|e| e.error_3d);
    }
    (out, sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbits::{enu_to_ecef_matrix, geodetic_to_ecef, Geodetic};

    fn sol(t: f64, p: Vec3) -> PvtSolution {
        PvtSolution {
            t_rx: t,
            position: p,
            velocity: Vec3::zeros(),
            clock_bias: 0.0,
            clock_drift: 0.0,
            used_prns: vec![],
            residual_rms: 0.0,
            gdop: 0.0,
            pdop: 0.0,
            hdop: 0.0,
            vdop: 0.0,
            tdop: 0.0,
            iterations: 0,
        }
    }

    #[test]
    fn pure_up_offset_is_vertical() {
        let g = Geodetic::from_degrees(26.5, 80.2, 100.0);
        let r = geodetic_to_ecef(&g);
        let up = enu_to_ecef_matrix(g.lat, g.lon) * Vec3::new(0.0, 0.0, 1.0);
        let truth = vec![sol(0.0, r), sol(1.0, r)];
        let (e, s) = position_errors(&[sol(0.5, r + up)], &truth, 1e-6);
        assert_eq!(e.len(), 1);
        assert!(e[0].horizontal < 1e-9);
        assert!((e[0].up - 1.0).abs() < 1e-9);
        assert!((s.vertical_rms - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identical_series_have_zero_error() {
        let r = geodetic_to_ecef(&Geodetic::from_degrees(-33.0, 151.0, 20.0));
        let truth: Vec<_> = (0..10).map(|k| sol(k as f64 * 0.1, r + Vec3::new(k as f64, 0.0, 0.0))).collect();
        let (e, s) = position_errors(&truth, &truth, 1e-6);
        assert_eq!(e.len(), 10);
        assert_eq!(s.max_3d, 0.0);
    }
}
