use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::{Complex32, Complex64};
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::codegen::ca_code;
use crate::constants::{CA_LEN, F_CA, F_L1};
use crate::error::{Error, Result};

/// Parallel code-phase search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcquisitionParams {
    /// Half-width of the Doppler search, Hz.
    pub doppler_span: f64,
    pub bin: f64,
    /// Non-coherently summed 1 ms correlations.
    pub noncoherent: usize,
    /// Detection threshold on the peak to second-peak ratio.
    pub threshold: f64,
    /// Coherent window of the fine frequency search, ms.
    pub fine_ms: usize,
    /// Half-width of the fine frequency search, Hz.
    pub fine_span: f64,
    pub fine_step: f64,
}

impl Default for AcquisitionParams {
    fn default() -> Self {
        AcquisitionParams {
            doppler_span: 10_000.0,
            bin: 500.0,
            noncoherent: 8,
            threshold: 2.0,
            fine_ms: 5,
            fine_span: 300.0,
            fine_step: 10.0,
        }
    }
}

impl AcquisitionParams {
    /// Samples needed by [`acquire`] at sample rate `fs`.
    pub fn samples_needed(&self, fs: f64) -> usize {
        let n = samples_per_ms(fs);
        n * (self.noncoherent + self.fine_ms + 2)
    }
}

/// Outcome of a search for one PRN.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionResult {
    pub prn: u8,
    pub detected: bool,
    /// Code phase at the first sample of the searched block, chips.
    pub code_phase: f64,
    pub doppler: f64,
    pub peak_metric: f64,
}

fn samples_per_ms(fs: f64) -> usize {
    (fs * 1e-3).round() as usize
}

/// Local C/A replica sampled at `fs` over one millisecond.
fn sampled_code(prn: u8, fs: f64, n: usize, doppler: f64) -> Result<Vec<f64>> {
    let code = ca_code(prn)?;
    let rate = F_CA * (1.0 + doppler / F_L1) / fs;
    Ok((0..n).map(|k| code.chip((k as f64 * rate).floor() as i64) as f64).collect())
}

fn wipe(samples: &[Complex32], f: f64, fs: f64, t0: usize) -> Vec<Complex64> {
    let w = Complex64::from_polar(1.0, -TAU * f / fs);
    let mut z = Complex64::from_polar(1.0, -TAU * (f * t0 as f64 / fs).rem_euclid(1.0));
    samples
        .iter()
        .map(|s| {
            let v = Complex64::new(s.re as f64, s.im as f64) * z;
            z *= w;
            v
        })
        .collect()
}

/// Searches `samples` for `prn` over code phase and Doppler.
///
/// The coarse stage sums `noncoherent` 1 ms circular correlations per Doppler bin;
/// the fine stage evaluates a `fine_ms` coherent window allowing one data-bit
/// sign change and refines the frequency by parabolic interpolation.
pub fn acquire(samples: &[Complex32], fs: f64, f_if: f64, prn: u8, p: &AcquisitionParams) -> Result<AcquisitionResult> {
    if fs < 2.0 * F_CA {
        return Err(Error::Acquisition(format!("sample rate {fs} below 2.046 Msps")));
    }
    let n = samples_per_ms(fs);
    if samples.len() < p.samples_needed(fs) {
        return Err(Error::Acquisition(format!("{} samples supplied, {} needed", samples.len(), p.samples_needed(fs))));
    }
    let ratio = p.doppler_span / p.bin;
    if !(p.bin > 0.0) || (ratio - ratio.round()).abs() > 1e-9 {
        return Err(Error::Acquisition("Doppler span must be a multiple of the bin width".into()));
    }
    let bins = ratio.round() as i64;
    let mut planner = FftPlanner::<f64>::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(n);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(n);
    let mut code_f: Vec<Complex64> =
        sampled_code(prn, fs, n, 0.0)?.into_iter().map(|c| Complex64::new(c, 0.0)).collect();
    fwd.process(&mut code_f);
    for c in code_f.iter_mut() {
        *c = c.conj();
    }

    let mut best = (0.0f64, 0i64, 0usize);
    let mut grid: Vec<Vec<f64>> = Vec::with_capacity((2 * bins + 1) as usize);
    for b in -bins..=bins {
        let f = f_if + b as f64 * p.bin;
        let mut acc = vec![0.0f64; n];
        for k in 0..p.noncoherent {
            let mut x = wipe(&samples[k * n..(k + 1) * n], f, fs, k * n);
            fwd.process(&mut x);
            for (xi, ci) in x.iter_mut().zip(&code_f) {
                *xi *= ci;
            }
            inv.process(&mut x);
            for (a, v) in acc.iter_mut().zip(&x) {
                *a += v.norm_sqr();
            }
        }
        for (m, &v) in acc.iter().enumerate() {
            if v > best.0 {
                best = (v, b, m);
            }
        }
        grid.push(acc);
    }
    let (peak, b_best, m_best) = best;
    let row = &grid[(b_best + bins) as usize];
    let excl = (fs / F_CA).ceil() as i64 + 1;
    let mut second = 0.0f64;
    for (m, &v) in row.iter().enumerate() {
        let d = (m as i64 - m_best as i64).rem_euclid(n as i64);
        let d = d.min(n as i64 - d);
        if d > excl && v > second {
            second = v;
        }
    }
    let metric = if second > 0.0 { peak / second } else { f64::INFINITY };

    let at = |m: i64| row[m.rem_euclid(n as i64) as usize];
    let (ym, y0, yp) = (at(m_best as i64 - 1), peak, at(m_best as i64 + 1));
    let den = ym - 2.0 * y0 + yp;
    let frac = if den.abs() > 0.0 { (0.5 * (ym - yp) / den).clamp(-0.5, 0.5) } else { 0.0 };
    let lag = m_best as f64 + frac;
    let code_phase = (-lag * F_CA / fs).rem_euclid(CA_LEN as f64);
    let coarse = f_if + b_best as f64 * p.bin;
    let mut result = AcquisitionResult {
        prn,
        detected: metric > p.threshold,
        code_phase,
        doppler: coarse - f_if,
        peak_metric: metric.max(1.0),
    };
    if result.detected && p.fine_ms > 0 {
        result.doppler = fine_search(samples, fs, f_if, prn, code_phase, coarse, p)? - f_if;
    }
    Ok(result)
}

/// Fine frequency search over a coherent window starting at the next code epoch.
fn fine_search(
    samples: &[Complex32],
    fs: f64,
    f_if: f64,
    prn: u8,
    code_phase: f64,
    coarse: f64,
    p: &AcquisitionParams,
) -> Result<f64> {
    let code = ca_code(prn)?;
    let n_ms = samples_per_ms(fs);
    let start = n_ms * p.noncoherent;
    let len = n_ms * p.fine_ms;
    let rate = F_CA * (1.0 + (coarse - f_if) / F_L1) / fs;
    let x0 = code_phase + start as f64 * F_CA / fs;
    // Code wipe-off, split into 1 ms pieces.
    let wiped: Vec<Complex64> = (0..len)
        .map(|k| {
            let s = samples[start + k];
            let c = code.chip((x0 + k as f64 * rate).floor() as i64) as f64;
            Complex64::new(s.re as f64 * c, s.im as f64 * c)
        })
        .collect();
    let steps = (p.fine_span / p.fine_step).round() as i64;
    let mut powers = Vec::with_capacity((2 * steps + 1) as usize);
    for s in -steps..=steps {
        let f = coarse + s as f64 * p.fine_step;
        let w = Complex64::from_polar(1.0, -TAU * f / fs);
        let mut z = Complex64::from_polar(1.0, -TAU * (f * start as f64 / fs).rem_euclid(1.0));
        let mut parts = vec![Complex64::new(0.0, 0.0); p.fine_ms];
        for (k, v) in wiped.iter().enumerate() {
            parts[k / n_ms] += v * z;
            z *= w;
        }
        // Best coherent sum allowing one sign change between pieces.
        let total: Complex64 = parts.iter().sum();
        let mut best = total.norm_sqr();
        let mut head = Complex64::new(0.0, 0.0);
        for j in 1..parts.len() {
            head += parts[j - 1];
            best = best.max((head - (total - head)).norm_sqr());
        }
        powers.push(best);
    }
    let (i_best, _) =
        powers.iter().enumerate().fold((0, f64::MIN), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    let mut f = coarse + (i_best as i64 - steps) as f64 * p.fine_step;
    if i_best > 0 && i_best + 1 < powers.len() {
        let (ym, y0, yp) = (powers[i_best - 1], powers[i_best], powers[i_best + 1]);
        let den = ym - 2.0 * y0 + yp;
        if den < 0.0 {
            f += (0.5 * (ym - yp) / den).clamp(-0.5, 0.5) * p.fine_step;
        }
    }
    Ok(f)
}
