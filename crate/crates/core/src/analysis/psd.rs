use std::f64::consts::PI;

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Welch estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PsdParams {
    /// Segment length, samples.
    pub segment: usize,
    /// Fractional overlap of consecutive segments, in [0, 1).
    pub overlap: f64,
}

impl Default for PsdParams {
    fn default() -> Self {
        PsdParams { segment: 4096, overlap: 0.5 }
    }
}

/// Two-sided power spectral density on an ascending frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Psd {
    /// Absolute frequency (IF plus baseband offset), Hz.
    pub freqs: Vec<f64>,
    /// W/Hz in sample units.
    pub density: Vec<f64>,
    /// Bin width, Hz.
    pub resolution: f64,
    pub segments: usize,
}

impl Psd {
    pub fn db(&self) -> Vec<f64> {
        self.density.iter().map(|p| 10.0 * p.max(1e-300).log10()).collect()
    }

    /// Integral of the density, equal to the mean sample power.
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.resolution
    }
}

fn hann(n: usize) -> Vec<f64> {
    (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()).collect()
}

/// Averaged Hann-windowed periodogram of `samples` taken at `fs` around `f_if`.
pub fn estimate_psd(samples: &[C64], fs: f64, f_if: f64, p: PsdParams) -> Result<Psd> {
    let n = p.segment;
    if n < 2 {
        return Err(Error::Analysis("segment must hold at least 2 samples".into()));
    }
    if !(0.0..1.0).contains(&p.overlap) {
        return Err(Error::Analysis(format!("overlap {} outside [0, 1)", p.overlap)));
    }
    if samples.len() < n {
        return Err(Error::Analysis(format!("segment of {n} samples exceeds the {} available", samples.len())));
    }
    let step = ((n as f64 * (1.0 - p.overlap)).round() as usize).max(1);
    let w = hann(n);
    let u: f64 = w.iter().map(|x| x * x).sum();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut acc = vec![0.0; n];
    let mut buf = vec![C64::new(0.0, 0.0); n];
    let mut segments = 0;
    let mut start = 0;
    while start + n <= samples.len() {
        for (b, (x, wk)) in buf.iter_mut().zip(samples[start..start + n].iter().zip(&w)) {
            *b = x * wk;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
        segments += 1;
        start += step;
    }
    let scale = 1.0 / (fs * u * segments as f64);
    let half = n / 2;
    let mut freqs = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    for i in 0..n {
        let k = (i + n - half) % n;
        freqs.push(f_if + (i as f64 - half as f64) * fs / n as f64);
        density.push(acc[k] * scale);
    }
    Ok(Psd { freqs, density, resolution: fs / n as f64, segments })
}

/// Location and depth of the first spectral nulls of a BPSK signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullReport {
    /// Offsets of the lower and upper nulls from the centre, Hz (lower is negative).
    pub lower: f64,
    pub upper: f64,
    /// Main-lobe peak minus the shallower null, dB.
    pub depth_db: f64,
}

/// Finds the first nulls of a BPSK(`chip_rate`) spectrum centred at `f_center`.
///
/// The density is smoothed over `smooth` bins to suppress the code line
/// structure; the peak is searched within +-10 % of the chip rate and each null
/// within +-25 % of the chip rate around its expected offset.
pub fn bpsk_nulls(psd: &Psd, f_center: f64, chip_rate: f64, smooth: usize) -> Result<NullReport> {
    let n = psd.density.len();
    let h = smooth / 2;
    let sm: Vec<f64> = (0..n)
        .map(|i| {
            let lo = i.saturating_sub(h);
            let hi = (i + h + 1).min(n);
            psd.density[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect();
    let offsets: Vec<f64> = psd.freqs.iter().map(|f| f - f_center).collect();
    let pick = |lo: f64, hi: f64, best_min: bool| -> Option<(usize, f64)> {
        let mut out: Option<(usize, f64)> = None;
        for (i, (d, v)) in offsets.iter().zip(&sm).enumerate() {
            if *d < lo || *d > hi {
                continue;
            }
            let better = match out {
                None => true,
                Some((_, b)) => {
                    if best_min {
                        *v < b
                    } else {
                        *v > b
                    }
                }
            };
            if better {
                out = Some((i, *v));
            }
        }
        out
    };
    let miss = || Error::Analysis("spectrum does not cover the null search band".into());
    let (_, peak) = pick(-0.1 * chip_rate, 0.1 * chip_rate, false).ok_or_else(miss)?;
    let (li, lv) = pick(-1.25 * chip_rate, -0.75 * chip_rate, true).ok_or_else(miss)?;
    let (ui, uv) = pick(0.75 * chip_rate, 1.25 * chip_rate, true).ok_or_else(miss)?;
    Ok(NullReport { lower: offsets[li], upper: offsets[ui], depth_db: 10.0 * (peak / lv.max(uv)).log10() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tone_lands_in_its_bin() {
        let fs = 1e6;
        let f0 = 1e6 / 4096.0 * 100.0;
        let x: Vec<C64> = (0..16384).map(|k| C64::from_polar(2.0, 2.0 * PI * f0 * k as f64 / fs)).collect();
        let p = estimate_psd(&x, fs, 0.0, PsdParams::default()).unwrap();
        let (i, _) = p.density.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
        assert!((p.freqs[i] - f0).abs() < 1e-6);
        assert!((p.total_power() - 4.0).abs() < 0.04);
    }

    #[test]
    fn nulls_of_sinc_squared_with_tilted_floor() {
        let rc = 1.023e6;
        let freqs: Vec<f64> = (0..4096).map(|i| (i as f64 - 2048.0) * 2.5e6 / 4096.0).collect();
        let density: Vec<f64> = freqs
            .iter()
            .map(|f| {
                let x = f / rc;
                let s = if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) };
                s * s + 0.01 + 0.002 * x.abs()
            })
            .collect();
        let psd = Psd { freqs, density, resolution: 2.5e6 / 4096.0, segments: 1 };
        let r = bpsk_nulls(&psd, 0.0, rc, 1).unwrap();
        assert!((r.upper - rc).abs() < 5e3, "{}", r.upper);
        assert!((r.lower + rc).abs() < 5e3, "{}", r.lower);
        assert!((r.depth_db - 10.0 * (1.0f64 / 0.012).log10()).abs() < 0.2);
    }

    #[test]
    fn rejects_short_input() {
        let x = vec![C64::new(1.0, 0.0); 100];
        assert!(estimate_psd(&x, 1e6, 0.0, PsdParams::default()).is_err());
    }
}
