//! Friis link budget and tabulated antenna patterns.

use std::path::Path;

use crate::constants::C;
use crate::error::{Error, Result};

/// Antenna gain tabulated against elevation, interpolated linearly and held flat outside the table.
#[derive(Debug, Clone, PartialEq)]
pub struct AntennaPattern {
    /// (elevation rad, gain dBi), strictly increasing in elevation.
    pub gain_by_elevation: Vec<(f64, f64)>,
}

impl AntennaPattern {
    pub fn new(gain_by_elevation: Vec<(f64, f64)>) -> Result<Self> {
        if gain_by_elevation.len() < 2 {
            return Err(Error::InvalidInput("antenna pattern needs at least two knots".into()));
        }
        for w in gain_by_elevation.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::InvalidInput("antenna pattern elevations must increase".into()));
            }
        }
        if gain_by_elevation.iter().any(|k| !k.0.is_finite() || !k.1.is_finite()) {
            return Err(Error::InvalidInput("antenna pattern values must be finite".into()));
        }
        Ok(AntennaPattern { gain_by_elevation })
    }

    fn from_degrees(rows: &[(f64, f64)]) -> Self {
        AntennaPattern { gain_by_elevation: rows.iter().map(|&(e, g)| (e.to_radians(), g)).collect() }
    }

    /// Parses a two-column text table `elevation_deg gain_dBi`; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if cols.len() != 2 {
                return Err(Error::InvalidInput(format!("antenna table line {}: expected two columns", i + 1)));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("antenna table line {}: bad number `{s}`", i + 1)))
            };
            rows.push((parse(cols[0])?.to_radians(), parse(cols[1])?));
        }
        Self::new(rows)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Satellite transmit pattern seen from the ground, boosted towards the Earth limb.
    pub fn default_satellite() -> Self {
        Self::from_degrees(&[(0.0, 13.2), (10.0, 12.9), (20.0, 12.6), (40.0, 11.8), (60.0, 10.9), (90.0, 10.2)])
    }

    /// Typical right-hand circular patch antenna.
    pub fn default_receiver() -> Self {
        Self::from_degrees(&[
            (0.0, -5.5),
            (5.0, -4.5),
            (10.0, -3.0),
            (20.0, -1.5),
            (30.0, -0.5),
            (45.0, 0.8),
            (60.0, 1.5),
            (90.0, 2.0),
        ])
    }

    pub fn isotropic() -> Self {
        Self::from_degrees(&[(-90.0, 0.0), (90.0, 0.0)])
    }

    pub fn gain_dbi(&self, elevation: f64) -> f64 {
        let k = &self.gain_by_elevation;
        if elevation <= k[0].0 {
            return k[0].1;
        }
        for w in k.windows(2) {
            if elevation <= w[1].0 {
                let u = (elevation - w[0].0) / (w[1].0 - w[0].0);
                return w[0].1 + u * (w[1].1 - w[0].1);
            }
        }
        k[k.len() - 1].1
    }
}

/// Result of a link budget evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    /// Received carrier power, W.
    pub carrier_power: f64,
    /// C/N0, dB-Hz.
    pub cn0: f64,
    /// Signal amplitude sqrt(C), sqrt(W).
    pub amplitude: f64,
}

/// Free-space path loss 20 log10(4 pi R / lambda), dB.
pub fn free_space_loss_db(range: f64, f: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * range * f / C).log10()
}

/// Friis received power and the resulting C/N0 for noise density `n0` (W/Hz).
pub fn received_power(p_tx: f64, g_tx_dbi: f64, g_rx_dbi: f64, range: f64, f: f64, l_atm: f64, n0: f64) -> LinkBudget {
    let lambda = C / f;
    let g_tx = 10f64.powf(g_tx_dbi / 10.0);
    let g_rx = 10f64.powf(g_rx_dbi / 10.0);
    let path = lambda / (4.0 * std::f64::consts::PI * range);
    let carrier_power = p_tx * g_tx * g_rx * path * path * l_atm;
    LinkBudget { carrier_power, cn0: 10.0 * (carrier_power / n0).log10(), amplitude: carrier_power.sqrt() }
}

/// Carrier power giving `cn0` dB-Hz against `n0` W/Hz.
pub fn carrier_power_for_cn0(cn0: f64, n0: f64) -> f64 {
    n0 * 10f64.powf(cn0 / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pattern_interpolates_and_clamps() {
        let p = AntennaPattern::parse("0 -4\n# comment\n90, 2\n").unwrap();
        assert!((p.gain_dbi(45f64.to_radians()) + 1.0).abs() < 1e-12);
        assert_eq!(p.gain_dbi(-0.2), -4.0);
        assert_eq!(p.gain_dbi(2.0), 2.0);
        assert!(AntennaPattern::parse("10 1\n").is_err());
        assert!(AntennaPattern::parse("10 1\n5 2\n").is_err());
    }
}
