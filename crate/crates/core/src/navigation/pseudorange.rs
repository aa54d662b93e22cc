use std::collections::BTreeMap;

use crate::constants::{C, CA_PERIOD, F_CA, LAMBDA_L1, SECONDS_PER_WEEK};
use crate::error::{Error, Result};
use crate::navigation::decode::TowAnchor;
use crate::navigation::records::{ObservableRecord, ObservableSource};
use crate::orbits::sat_state_at;
use crate::receiver::ChannelEpoch;
use crate::scenario::BroadcastEphemeris;
use crate::time::{wrap_week_diff, GpsTime};

/// Largest tolerated deviation of one channel's transit time from the median, s.
pub const MAX_TOW_SPREAD: f64 = 0.08;

/// Satellite clock reading at which the tracked code position of `ch` was transmitted.
pub fn transmit_time(ch: &ChannelEpoch, anchor: &TowAnchor) -> f64 {
    (anchor.tow + (ch.period - anchor.period) as f64 * CA_PERIOD + ch.chips / F_CA).rem_euclid(SECONDS_PER_WEEK)
}

/// Forms satellite-clock-corrected pseudoranges for the channels latched at `t_rx`.
///
/// Channels without an anchor or ephemeris are skipped. Channels whose
/// transit time disagrees with the median by more than [`MAX_TOW_SPREAD`]
/// are dropped; an error is returned when fewer than one channel survives.
pub fn form_pseudoranges(
    t_rx: GpsTime,
    channels: &[ChannelEpoch],
    anchors: &BTreeMap<u8, TowAnchor>,
    ephemerides: &BTreeMap<u8, BroadcastEphemeris>,
) -> Result<Vec<ObservableRecord>> {
    let mut cands = Vec::new();
    for ch in channels {
        let (Some(anchor), Some(eph)) = (anchors.get(&ch.prn), ephemerides.get(&ch.prn)) else {
            continue;
        };
        let t_sv = transmit_time(ch, anchor);
        let transit = wrap_week_diff(t_rx.tow - t_sv);
        cands.push((ch, anchor, eph, t_sv, transit));
    }
    if cands.is_empty() {
        return Ok(Vec::new());
    }
    let mut transits: Vec<f64> = cands.iter().map(|c| c.4).collect();
    transits.sort_by(f64::total_cmp);
    let median = transits[transits.len() / 2];
    let mut out = Vec::with_capacity(cands.len());
    for (ch, anchor, eph, t_sv, transit) in cands {
        if (transit - median).abs() > MAX_TOW_SPREAD {
            continue;
        }
        // Satellite clock offset at GPS transmit time; one refinement suffices.
        let mut dt_sv = sat_state_at(eph, GpsTime::new(t_rx.week, t_sv))?.clock_offset;
        dt_sv = sat_state_at(eph, GpsTime::new(t_rx.week, t_sv - dt_sv))?.clock_offset;
        let half = if anchor.inverted { 0.5 } else { 0.0 };
        out.push(ObservableRecord {
            t_rx: t_rx.tow,
            prn: ch.prn,
            pseudorange: C * (transit + dt_sv),
            doppler: ch.doppler,
            carrier_phase: ch.carrier_phase - half,
            cn0: ch.cn0,
            source: ObservableSource::Receiver,
        });
    }
    if out.is_empty() {
        return Err(Error::Pvt(format!("transit times inconsistent by more than {MAX_TOW_SPREAD} s")));
    }
    Ok(out)
}

/// Carrier-smoothed pseudorange (Hatch filter) for one satellite.
#[derive(Debug, Clone)]
pub struct HatchFilter {
    window: usize,
    reset_threshold: f64,
    count: usize,
    smoothed: f64,
    last_phase_m: f64,
    last_t: f64,
}

impl HatchFilter {
    /// `window` is the maximum averaging length in epochs; a code/carrier jump
    /// larger than `reset_threshold` metres restarts the filter.
    pub fn new(window: usize, reset_threshold: f64) -> Self {
        HatchFilter {
            window: window.max(1),
            reset_threshold,
            count: 0,
            smoothed: 0.0,
            last_phase_m: 0.0,
            last_t: f64::NAN,
        }
    }

    pub fn reset(&mut self) {
        self.count = 0;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Updates with a code pseudorange (m) and carrier phase (cycles) at `t`;
    /// `max_gap` bounds the tolerated spacing between updates, s.
    pub fn update(&mut self, t: f64, pseudorange: f64, carrier_cycles: f64, max_gap: f64) -> f64 {
        let phase_m = LAMBDA_L1 * carrier_cycles;
        if self.count > 0 && (t - self.last_t).abs() <= max_gap {
            let predicted = self.smoothed + (phase_m - self.last_phase_m);
            if (pseudorange - predicted).abs() <= self.reset_threshold {
                self.count = (self.count + 1).min(self.window);
                let n = self.count as f64;
                self.smoothed = pseudorange / n + predicted * (n - 1.0) / n;
            } else {
                self.count = 1;
                self.smoothed = pseudorange;
            }
        } else {
            self.count = 1;
            self.smoothed = pseudorange;
        }
        self.last_phase_m = phase_m;
        self.last_t = t;
        self.smoothed
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hatch_passes_noise_free_code() {
        let mut h = HatchFilter::new(100, 20.0);
        for k in 0..500 {
            let t = k as f64 * 0.1;
            let r = 2.2e7 + 300.0 * t;
            let s = h.update(t, r, r / LAMBDA_L1 + 17.0, 0.15);
            assert!((s - r).abs() < 1e-6);
        }
    }

    #[test]
    fn hatch_resets_on_jump_and_gap() {
        let mut h = HatchFilter::new(100, 20.0);
        for k in 0..10 {
            h.update(k as f64 * 0.1, 2e7, 0.0, 0.15);
        }
        assert_eq!(h.count(), 10);
        h.update(1.0, 2e7 + 50.0, 0.0, 0.15);
        assert_eq!(h.count(), 1);
        h.update(1.1, 2e7 + 50.0, 0.0, 0.15);
        assert_eq!(h.count(), 2);
        h.update(5.0, 2e7 + 50.0, 0.0, 0.15);
        assert_eq!(h.count(), 1);
    }
}
