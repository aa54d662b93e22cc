/// Noise bandwidth to natural frequency of a third-order loop.
const PLL3_BN_RATIO: f64 = 0.7845;
const PLL3_A3: f64 = 1.1;
const PLL3_B3: f64 = 2.4;
/// Noise bandwidth to natural frequency of a second-order loop.
const LOOP2_BN_RATIO: f64 = 0.53;
const LOOP2_A2: f64 = 1.414;

/// Third-order PLL with second-order FLL assist, integrating in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CarrierLoop {
    acc_rate: f64,
    acc_freq: f64,
}

impl CarrierLoop {
    pub fn new(freq: f64) -> Self {
        CarrierLoop { acc_rate: 0.0, acc_freq: freq }
    }

    /// Smoothed frequency estimate, Hz.
    pub fn frequency(&self) -> f64 {
        self.acc_freq
    }

    /// Frequency rate estimate, Hz/s.
    pub fn rate(&self) -> f64 {
        self.acc_rate
    }

    /// Updates with phase error `e_p` (cycles) and frequency error `e_f` (Hz).
    /// A zero bandwidth disables that branch. Returns the NCO frequency, Hz.
    pub fn update(&mut self, t: f64, e_p: f64, bn_pll: f64, e_f: f64, bn_fll: f64) -> f64 {
        let wp = bn_pll / PLL3_BN_RATIO;
        let wf = bn_fll / LOOP2_BN_RATIO;
        self.acc_rate += t * (wp * wp * wp * e_p + wf * wf * e_f);
        self.acc_freq += t * (self.acc_rate + PLL3_A3 * wp * wp * e_p + LOOP2_A2 * wf * e_f);
        self.acc_freq + PLL3_B3 * wp * e_p
    }
}

/// Second-order DLL filter producing a code-rate correction, chips/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CodeLoop {
    acc: f64,
}

impl CodeLoop {
    pub fn update(&mut self, t: f64, e: f64, bn: f64) -> f64 {
        let w = bn / LOOP2_BN_RATIO;
        self.acc += t * w * w * e;
        self.acc + LOOP2_A2 * w * e
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pll_removes_constant_frequency_offset() {
        // Simulate a phase ramp and check the loop settles on its frequency.
        let t = 1e-3;
        let mut lp = CarrierLoop::new(0.0);
        let (mut nco_phase, mut nco_f) = (0.0f64, 0.0f64);
        for k in 0..3000 {
            let sig_phase = 5.0 * k as f64 * t;
            let e = sig_phase - nco_phase;
            nco_f = lp.update(t, e, 18.0, 0.0, 0.0);
            nco_phase += nco_f * t;
        }
        assert!((nco_f - 5.0).abs() < 1e-3);
    }
}
