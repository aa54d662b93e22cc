use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum history length for a jitter report.
pub const MIN_JITTER_SAMPLES: usize = 100;

/// Rule-of-thumb tracking thresholds: one third of each discriminator's pull-in half-range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterThresholds {
    /// Chips.
    pub sigma_dll_th: f64,
    /// Degrees.
    pub sigma_pll_th: f64,
    /// Hz.
    pub sigma_fll_th: f64,
}

impl JitterThresholds {
    /// Thresholds for correlator spacing `d` (chips) and integration time `t` (s).
    pub fn new(d: f64, t: f64) -> Self {
        JitterThresholds { sigma_dll_th: d / 6.0, sigma_pll_th: 15.0, sigma_fll_th: 1.0 / (12.0 * t) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterReport {
    pub sigma_dll: f64,
    pub sigma_pll: f64,
    pub sigma_fll: f64,
    pub thresholds: JitterThresholds,
    pub dll_pass: bool,
    pub pll_pass: bool,
    pub fll_pass: bool,
}

impl JitterReport {
    /// Used fraction of each threshold (DLL, PLL, FLL).
    pub fn utilization(&self) -> (f64, f64, f64) {
        let t = &self.thresholds;
        (self.sigma_dll / t.sigma_dll_th, self.sigma_pll / t.sigma_pll_th, self.sigma_fll / t.sigma_fll_th)
    }

    pub fn pass(&self) -> bool {
        self.dll_pass && self.pll_pass && self.fll_pass
    }
}

/// Sample standard deviation.
pub fn std_dev(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    (x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Jitter of discriminator histories (DLL chips, PLL degrees, FLL Hz) against the thresholds.
pub fn jitter_report(dll: &[f64], pll_deg: &[f64], fll: &[f64], d: f64, t: f64) -> Result<JitterReport> {
    let short = [dll.len(), pll_deg.len(), fll.len()].into_iter().min().unwrap_or(0);
    if short < MIN_JITTER_SAMPLES {
        return Err(Error::InvalidInput(format!(
            "jitter report needs {MIN_JITTER_SAMPLES} samples per history, got {short}"
        )));
    }
    let thresholds = JitterThresholds::new(d, t);
    let (sigma_dll, sigma_pll, sigma_fll) = (std_dev(dll), std_dev(pll_deg), std_dev(fll));
    Ok(JitterReport {
        sigma_dll,
        sigma_pll,
        sigma_fll,
        thresholds,
        dll_pass: sigma_dll < thresholds.sigma_dll_th,
        pll_pass: sigma_pll < thresholds.sigma_pll_th,
        fll_pass: sigma_fll < thresholds.sigma_fll_th,
    })
}
