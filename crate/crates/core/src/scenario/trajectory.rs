//! Dense user trajectories for the static, moderate and high-dynamics profiles.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::constants::{G0, LAMBDA_L1};
use crate::error::{Error, Result};
use crate::orbits::{enu_to_ecef_matrix, geodetic_to_ecef, Geodetic};
use crate::Vec3;

use super::config::{HighDynamicsProfile, ModerateProfile, TrajectoryProfile};

/// Time covered before the start and after the end of the scenario, s.
pub const TRAJECTORY_PAD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    /// Seconds of week (true GPS time).
    pub t: f64,
    pub r_u: Vec3,
    pub v_u: Vec3,
    pub a_u: Vec3,
}

/// Uniformly sampled trajectory with cubic Hermite interpolation between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub dt: f64,
}

impl Trajectory {
    pub fn t_first(&self) -> f64 {
        self.samples[0].t
    }

    pub fn t_last(&self) -> f64 {
        self.samples[self.samples.len() - 1].t
    }

    /// Position, velocity and acceleration at `t` (seconds of week).
    pub fn state_at(&self, t: f64) -> Result<(Vec3, Vec3, Vec3)> {
        let n = self.samples.len();
        let tol = 1e-9 * self.dt;
        if t < self.t_first() - tol || t > self.t_last() + tol {
            return Err(Error::Trajectory(format!("t = {t} outside [{}, {}]", self.t_first(), self.t_last())));
        }
        let x = (t - self.t_first()) / self.dt;
        let k = (x.floor() as usize).min(n - 2);
        let s0 = &self.samples[k];
        let s1 = &self.samples[k + 1];
        let h = s1.t - s0.t;
        let u = ((t - s0.t) / h).clamp(0.0, 1.0);
        let u2 = u * u;
        let u3 = u2 * u;
        let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
        let h10 = u3 - 2.0 * u2 + u;
        let h01 = -2.0 * u3 + 3.0 * u2;
        let h11 = u3 - u2;
        let r = s0.r_u * h00 + s0.v_u * (h10 * h) + s1.r_u * h01 + s1.v_u * (h11 * h);
        let d00 = (6.0 * u2 - 6.0 * u) / h;
        let d10 = 3.0 * u2 - 4.0 * u + 1.0;
        let d01 = (-6.0 * u2 + 6.0 * u) / h;
        let d11 = 3.0 * u2 - 2.0 * u;
        let v = s0.r_u * d00 + s0.v_u * d10 + s1.r_u * d01 + s1.v_u * d11;
        let a = s0.a_u * (1.0 - u) + s1.a_u * u;
        Ok((r, v, a))
    }

    /// Largest acceleration magnitude among the samples, m/s^2.
    pub fn peak_acceleration(&self) -> f64 {
        self.samples.iter().map(|s| s.a_u.norm()).fold(0.0, f64::max)
    }
}

/// Builds the trajectory for `profile` covering `[t_start - pad, t_start + duration + pad]`.
pub fn build_trajectory(profile: &TrajectoryProfile, t_start: f64, duration: f64) -> Result<Trajectory> {
    if !(duration > 0.0) {
        return Err(Error::Trajectory("duration must be > 0".into()));
    }
    let rate = profile.rate_hz();
    if !(rate >= 100.0) {
        return Err(Error::Trajectory(format!("sampling rate {rate} Hz below 100 Hz")));
    }
    let (lat, lon, h) = profile.origin();
    let origin = Geodetic::from_degrees(lat, lon, h);
    let r0 = geodetic_to_ecef(&origin);
    let rot = enu_to_ecef_matrix(origin.lat, origin.lon);
    let dt = 1.0 / rate;
    let n_pad = (TRAJECTORY_PAD * rate).ceil() as i64;
    let n_body = (duration * rate).ceil() as i64;
    let idx: Vec<i64> = (-n_pad..=n_body + n_pad).collect();

    let local: Vec<(Vec3, Vec3, Vec3)> = match profile {
        TrajectoryProfile::Static(_) => idx.iter().map(|_| (Vec3::zeros(), Vec3::zeros(), Vec3::zeros())).collect(),
        TrajectoryProfile::Moderate(m) => {
            let path = WaypointPath::new(m)?;
            idx.iter().map(|&k| path.eval(k as f64 * dt)).collect()
        }
        TrajectoryProfile::HighDynamics(p) => ballistic(p, &idx, dt)?,
    };

    let samples = idx
        .iter()
        .zip(local)
        .map(|(&k, (p, v, a))| TrajectorySample {
            t: t_start + k as f64 * dt,
            r_u: r0 + rot * p,
            v_u: rot * v,
            a_u: rot * a,
        })
        .collect();
    Ok(Trajectory { samples, dt })
}

/// Constant-velocity legs joined by constant-acceleration corner blends.
struct WaypointPath {
    times: Vec<f64>,
    points: Vec<Vec3>,
    vel: Vec<Vec3>,
    blend: Vec<f64>,
}

impl WaypointPath {
    fn new(m: &ModerateProfile) -> Result<Self> {
        if m.waypoints.len() < 2 {
            return Err(Error::Trajectory("at least two waypoints are required".into()));
        }
        let times: Vec<f64> = m.waypoints.iter().map(|w| w[0]).collect();
        let points: Vec<Vec3> = m.waypoints.iter().map(|w| Vec3::new(w[1], w[2], w[3])).collect();
        for w in times.windows(2) {
            if !(w[1] > w[0]) {
                return Err(Error::Trajectory("waypoint times must be strictly increasing".into()));
            }
        }
        let vel: Vec<Vec3> =
            (0..times.len() - 1).map(|i| (points[i + 1] - points[i]) / (times[i + 1] - times[i])).collect();
        for (i, v) in vel.iter().enumerate() {
            if v.norm() > m.max_speed + 1e-9 {
                return Err(Error::Trajectory(format!(
                    "leg {i} speed {:.3} m/s exceeds {} m/s",
                    v.norm(),
                    m.max_speed
                )));
            }
        }
        let mut blend = vec![0.0; times.len()];
        for i in 1..times.len() - 1 {
            let lim = 0.5 * (times[i] - times[i - 1]).min(times[i + 1] - times[i]);
            blend[i] = m.corner_blend.min(lim);
        }
        Ok(WaypointPath { times, points, vel, blend })
    }

    fn eval(&self, t: f64) -> (Vec3, Vec3, Vec3) {
        let n = self.times.len();
        for i in 1..n - 1 {
            let b = self.blend[i];
            if b > 0.0 && (t - self.times[i]).abs() < b {
                let dv = self.vel[i] - self.vel[i - 1];
                let acc = dv / (2.0 * b);
                let s = t - self.times[i] + b;
                let p = self.points[i] + self.vel[i - 1] * (t - self.times[i]) + acc * (0.5 * s * s);
                let v = self.vel[i - 1] + acc * s;
                return (p, v, acc);
            }
        }
        let leg = match self.times[1..n - 1].iter().position(|&ti| t < ti) {
            Some(k) => k,
            None => n - 2,
        };
        let v = self.vel[leg];
        (self.points[leg] + v * (t - self.times[leg]), v, Vec3::zeros())
    }
}

fn density(h: f64) -> f64 {
    1.225 * (-h / 8500.0).exp()
}

fn ballistic_accel(p: &Vec3, v: &Vec3, beta: Option<f64>) -> Vec3 {
    let mut a = Vec3::new(0.0, 0.0, -G0);
    if let Some(b) = beta {
        let speed = v.norm();
        a -= v * (density(p.z.max(0.0)) * speed / (2.0 * b));
    }
    a
}

fn rk4_step(p: Vec3, v: Vec3, h: f64, beta: Option<f64>) -> (Vec3, Vec3) {
    let k1v = ballistic_accel(&p, &v, beta);
    let k1p = v;
    let k2v = ballistic_accel(&(p + k1p * (h / 2.0)), &(v + k1v * (h / 2.0)), beta);
    let k2p = v + k1v * (h / 2.0);
    let k3v = ballistic_accel(&(p + k2p * (h / 2.0)), &(v + k2v * (h / 2.0)), beta);
    let k3p = v + k2v * (h / 2.0);
    let k4v = ballistic_accel(&(p + k3p * h), &(v + k3v * h), beta);
    let k4p = v + k3v * h;
    (p + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0), v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0))
}

/// Point-mass flight in a flat local frame. The launch state is at local time 0;
/// samples before it are obtained by integrating backwards.
fn ballistic(p: &HighDynamicsProfile, idx: &[i64], dt: f64) -> Result<Vec<(Vec3, Vec3, Vec3)>> {
    let el = p.launch_elevation_deg.to_radians();
    let az = p.launch_azimuth_deg.to_radians();
    let v0 = Vec3::new(el.cos() * az.sin(), el.cos() * az.cos(), el.sin()) * p.launch_speed;
    let beta = p.ballistic_coefficient;

    let mut out = vec![(Vec3::zeros(), Vec3::zeros(), Vec3::zeros()); idx.len()];
    let zero = idx.iter().position(|&k| k == 0).expect("index 0 present");
    let (mut pos, mut vel) = (Vec3::zeros(), v0);
    for slot in &mut out[zero..] {
        *slot = (pos, vel, ballistic_accel(&pos, &vel, beta));
        (pos, vel) = rk4_step(pos, vel, dt, beta);
    }
    let (mut pos, mut vel) = (Vec3::zeros(), v0);
    for j in (0..zero).rev() {
        (pos, vel) = rk4_step(pos, vel, -dt, beta);
        out[j] = (pos, vel, ballistic_accel(&pos, &vel, beta));
    }
    if let Some(j) = out.iter().position(|(q, _, _)| q.z < -1.0) {
        if idx[j] >= 0 {
            return Err(Error::Trajectory(format!(
                "projectile reaches the ground {:.2} s after launch, before the scenario ends",
                idx[j] as f64 * dt
            )));
        }
    }
    let peak = out.iter().map(|(_, _, a)| a.norm()).fold(0.0, f64::max);
    if peak < p.min_peak_accel {
        return Err(Error::Trajectory(format!(
            "peak acceleration {peak:.1} m/s^2 below the requested {:.1} m/s^2",
            p.min_peak_accel
        )));
    }
    if peak / LAMBDA_L1 < p.min_doppler_rate {
        return Err(Error::Trajectory(format!(
            "peak acceleration {peak:.1} m/s^2 cannot produce a {} Hz/s Doppler rate",
            p.min_doppler_rate
        )));
    }
    Ok(out)
}

/// Rotation used to map the local frame of `profile` into ECEF.
pub fn local_to_ecef(profile: &TrajectoryProfile) -> (Vec3, Matrix3<f64>) {
    let (lat, lon, h) = profile.origin();
    let g = Geodetic::from_degrees(lat, lon, h);
    (geodetic_to_ecef(&g), enu_to_ecef_matrix(g.lat, g.lon))
}
