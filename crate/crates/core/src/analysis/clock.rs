use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniformly sampled receiver clock bias series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockSeries {
    /// Sample times, s.
    pub epochs: Vec<f64>,
    /// Clock bias, s.
    pub bias: Vec<f64>,
    /// Sampling interval, s.
    pub tau0: f64,
}

impl ClockSeries {
    /// Checks that the series is uniform to 1e-6 relative and holds at least 3 points.
    pub fn new(epochs: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        if epochs.len() != bias.len() {
            return Err(Error::Analysis("epoch and bias lengths differ".into()));
        }
        if epochs.len() < 3 {
            return Err(Error::Analysis(format!("{} clock samples, at least 3 required", epochs.len())));
        }
        let tau0 = (epochs[epochs.len() - 1] - epochs[0]) / (epochs.len() - 1) as f64;
        if !(tau0 > 0.0) {
            return Err(Error::Analysis("clock epochs are not increasing".into()));
        }
        for w in epochs.windows(2) {
            if ((w[1] - w[0]) - tau0).abs() > 1e-6 * tau0 {
                return Err(Error::Analysis(format!("clock epochs not uniform: step {} against {tau0}", w[1] - w[0])));
            }
        }
        Ok(ClockSeries { epochs, bias, tau0 })
    }

    pub fn len(&self) -> usize {
        self.bias.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bias.is_empty()
    }
}

/// Overlapping Allan deviation of the bias series at each averaging time in `taus`.
///
/// Each tau must be an integer multiple `m` of `tau0` with `N > 2 m`.
pub fn allan_deviation(cs: &ClockSeries, taus: &[f64]) -> Result<Vec<(f64, f64)>> {
    let n = cs.len();
    let x = &cs.bias;
    taus.iter()
        .map(|&tau| {
            let mf = tau / cs.tau0;
            let m = mf.round();
            if m < 1.0 || (mf - m).abs() > 1e-6 * mf.max(1.0) {
                return Err(Error::Analysis(format!("tau {tau} is not a multiple of tau0 {}", cs.tau0)));
            }
            let m = m as usize;
            if n <= 2 * m {
                return Err(Error::Analysis(format!("tau {tau} leaves no complete cluster in {n} samples")));
            }
            let tau = m as f64 * cs.tau0;
            let mut acc = 0.0;
            for i in 0..n - 2 * m {
                let d = x[i + 2 * m] - 2.0 * x[i + m] + x[i];
                acc += d * d;
            }
            Ok((tau, (acc / (2.0 * (n - 2 * m) as f64 * tau * tau)).sqrt()))
        })
        .collect()
}

/// Averaging times `tau0 * m` for `m` = 1, 2, 5, 10, 20, ... up to a third of the span.
pub fn octave_taus(cs: &ClockSeries) -> Vec<f64> {
    let limit = (cs.len() - 1) / 3;
    let mut out = Vec::new();
    let mut dec = 1;
    'outer: loop {
        for k in [1, 2, 5] {
            let m = k * dec;
            if m > limit.max(1) {
                break 'outer;
            }
            out.push(m as f64 * cs.tau0);
        }
        dec *= 10;
    }
    out
}

/// Least-squares line through the bias series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClockFit {
    /// Bias at epoch zero, s.
    pub bias0: f64,
    /// Slope (fractional frequency offset), s/s.
    pub drift: f64,
    /// RMS of the fit residuals, s.
    pub residual_rms: f64,
}

/// Ordinary least-squares fit `bias = bias0 + drift * epoch`.
pub fn fit_clock_drift(cs: &ClockSeries) -> ClockFit {
    let n = cs.len() as f64;
    let tm = cs.epochs.iter().sum::<f64>() / n;
    let bm = cs.bias.iter().sum::<f64>() / n;
    let mut stt = 0.0;
    let mut stb = 0.0;
    for (t, b) in cs.epochs.iter().zip(&cs.bias) {
        stt += (t - tm) * (t - tm);
        stb += (t - tm) * (b - bm);
    }
    let drift = if stt > 0.0 { stb / stt } else { 0.0 };
    let bias0 = bm - drift * tm;
    let rss: f64 = cs.epochs.iter().zip(&cs.bias).map(|(t, b)| (b - bm - drift * (t - tm)).powi(2)).sum();
    ClockFit { bias0, drift, residual_rms: (rss / n).sqrt() }
}
