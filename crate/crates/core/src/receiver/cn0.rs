use crate::error::{Error, Result};
use crate::C64;

/// Minimum number of prompt correlations accepted by [`estimate_cn0`].
pub const MIN_CN0_WINDOW: usize = 40;

/// Narrowband-wideband power ratio of one block of `prompts`.
pub fn power_ratio(prompts: &[C64]) -> f64 {
    let sum: C64 = prompts.iter().sum();
    let wide: f64 = prompts.iter().map(|p| p.norm_sqr()).sum();
    if wide == 0.0 {
        0.0
    } else {
        sum.norm_sqr() / wide
    }
}

/// C/N0 (dB-Hz) from the mean power ratio over blocks of `m` correlations of length `t`.
pub fn cn0_from_ratio(mean_ratio: f64, m: usize, t: f64) -> f64 {
    let m = m as f64;
    let num = (mean_ratio - 1.0).max(1e-12);
    let den = (m - mean_ratio).max(1e-12);
    10.0 * (num / den / t).log10()
}

/// Narrowband-wideband power ratio C/N0 estimator over consecutive blocks of `m` prompts.
pub fn estimate_cn0(prompts: &[C64], m: usize, t: f64) -> Result<f64> {
    if prompts.len() < MIN_CN0_WINDOW || m < 2 || prompts.len() < 2 * m {
        return Err(Error::InvalidInput(format!("C/N0 window of {} correlations is too short", prompts.len())));
    }
    let blocks: Vec<f64> = prompts.chunks_exact(m).map(power_ratio).collect();
    let mean = blocks.iter().sum::<f64>() / blocks.len() as f64;
    Ok(cn0_from_ratio(mean, m, t))
}
