//! Interference waveforms and multipath replicas.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::scenario::{InterferenceKind, MAX_MULTIPATH_PATHS};
use crate::synth::{ChannelSource, IqBlock, PathShift, SampleTiming};
use crate::C64;

/// A resolved interference source. Times are receiver elapsed seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct InterferenceSpec {
    pub kind: InterferenceKind,
    /// Envelope amplitude, sqrt W.
    pub amplitude: f64,
    /// Start frequency (chirp) or tone frequency (cwi, fmcw, pulse), Hz.
    pub f0: f64,
    /// Chirp sweep rate, Hz/s.
    pub sweep_rate: f64,
    /// Initial phase, rad.
    pub phase: f64,
    /// FM modulation index, rad.
    pub beta: f64,
    /// FM modulation frequency, Hz.
    pub f_m: f64,
    pub pulse_width: f64,
    pub repetition_interval: f64,
    /// On/off pattern applied to successive pulses; empty means every pulse is on.
    pub duty_pattern: Vec<bool>,
    pub start: f64,
    pub stop: f64,
}

impl InterferenceSpec {
    pub fn cwi(amplitude: f64, f0: f64, phase: f64) -> Self {
        InterferenceSpec {
            kind: InterferenceKind::Cwi,
            amplitude,
            f0,
            sweep_rate: 0.0,
            phase,
            beta: 0.0,
            f_m: 0.0,
            pulse_width: 0.0,
            repetition_interval: 0.0,
            duty_pattern: Vec::new(),
            start: 0.0,
            stop: f64::INFINITY,
        }
    }

    /// Checks the source against the sample rate.
    pub fn validate(&self, fs: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if !(self.amplitude >= 0.0) {
            return bad(format!("interference amplitude {} must be non-negative", self.amplitude));
        }
        if !(self.stop > self.start) {
            return bad("interference stop must follow start".into());
        }
        let nyq = fs / 2.0;
        match self.kind {
            InterferenceKind::Chirp => {
                if !self.stop.is_finite() {
                    return bad("chirp needs a finite stop time".into());
                }
                let f_end = self.f0 + self.sweep_rate * (self.stop - self.start);
                if self.f0.abs() > nyq || f_end.abs() > nyq {
                    return bad(format!("chirp sweep {}..{f_end} Hz leaves +-fs/2", self.f0));
                }
            }
            InterferenceKind::Pulse => {
                if !(self.pulse_width > 0.0 && self.pulse_width < self.repetition_interval) {
                    return bad("pulse width must be positive and shorter than the repetition interval".into());
                }
            }
            InterferenceKind::Cwi | InterferenceKind::Fmcw => {}
        }
        if self.kind != InterferenceKind::Chirp && self.f0.abs() + self.beta.abs() * self.f_m.abs() > nyq {
            return bad(format!("interference frequency {} Hz leaves +-fs/2", self.f0));
        }
        Ok(())
    }

    /// Complex value at elapsed time `t`.
    #[inline]
    pub fn value(&self, t: f64) -> C64 {
        if t < self.start || t >= self.stop {
            return C64::new(0.0, 0.0);
        }
        let tau = t - self.start;
        let cycles = match self.kind {
            InterferenceKind::Chirp => self.f0 * tau + 0.5 * self.sweep_rate * tau * tau,
            InterferenceKind::Cwi => self.f0 * tau,
            InterferenceKind::Fmcw => self.f0 * tau + self.beta * (TAU * self.f_m * tau).sin() / TAU,
            InterferenceKind::Pulse => {
                let k = (tau / self.repetition_interval).floor();
                let within = tau - k * self.repetition_interval;
                let enabled = self.duty_pattern.is_empty() || self.duty_pattern[(k as usize) % self.duty_pattern.len()];
                if within >= self.pulse_width || !enabled {
                    return C64::new(0.0, 0.0);
                }
                self.f0 * tau
            }
        };
        C64::from_polar(self.amplitude, TAU * cycles.rem_euclid(1.0) + self.phase)
    }

    /// Adds the waveform for absolute samples starting at `n_start`.
    pub fn add_into(&self, timing: &SampleTiming, n_start: u64, out: &mut [C64]) {
        let t_first = timing.elapsed(n_start);
        let t_last = timing.elapsed(n_start + out.len() as u64);
        if t_last < self.start || t_first >= self.stop || self.amplitude == 0.0 {
            return;
        }
        for (k, o) in out.iter_mut().enumerate() {
            *o += self.value(timing.elapsed(n_start + k as u64));
        }
    }
}

/// Interference contribution for `n` samples starting at absolute sample `n_start`.
pub fn gen_interference(spec: &InterferenceSpec, timing: &SampleTiming, n_start: u64, n: usize) -> Result<IqBlock> {
    spec.validate(timing.fs)?;
    let mut samples = vec![C64::new(0.0, 0.0); n];
    spec.add_into(timing, n_start, &mut samples);
    Ok(IqBlock::new(samples, timing.fs, timing.t0, n_start))
}

/// One reflected path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReflectedPath {
    /// Amplitude relative to the direct path.
    pub alpha: f64,
    /// Excess delay, s.
    pub delay: f64,
    /// Carrier phase offset, rad.
    pub phase: f64,
    /// Excess delay rate, s/s.
    pub ramp: f64,
}

/// Reflected paths of one satellite.
#[derive(Debug, Clone, PartialEq)]
pub struct MultipathSpec {
    pub prn: u8,
    pub paths: Vec<ReflectedPath>,
}

impl MultipathSpec {
    pub fn validate(&self) -> Result<()> {
        if self.paths.len() > MAX_MULTIPATH_PATHS {
            return Err(Error::InvalidInput(format!(
                "PRN {}: {} reflected paths exceed the cap of {MAX_MULTIPATH_PATHS}",
                self.prn,
                self.paths.len()
            )));
        }
        for p in &self.paths {
            if !(0.0..=1.0).contains(&p.alpha) || !(p.delay > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "PRN {}: reflected path needs alpha in [0, 1] and positive delay",
                    self.prn
                )));
            }
        }
        Ok(())
    }
}

/// Returns the direct source followed by one delayed, attenuated replica per path.
///
/// Replicas carry the full code and data modulation. Delays shorter than one
/// sample are applied exactly through the code phase.
pub fn apply_multipath(direct: &ChannelSource, spec: &MultipathSpec) -> Result<Vec<ChannelSource>> {
    spec.validate()?;
    if spec.prn != direct.prn {
        return Err(Error::InvalidInput(format!("multipath for PRN {} applied to PRN {}", spec.prn, direct.prn)));
    }
    let mut out = vec![direct.clone()];
    for p in &spec.paths {
        out.push(direct.with_path(PathShift {
            gain: direct.path.gain * p.alpha,
            delay: direct.path.delay + p.delay,
            ramp: direct.path.ramp + p.ramp,
            phase: direct.path.phase + p.phase,
        }));
    }
    Ok(out)
}
