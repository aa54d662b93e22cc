use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::navigation::decode::{DecodeEvent, NavDecoder, TowAnchor};
use crate::navigation::pseudorange::{form_pseudoranges, HatchFilter};
use crate::navigation::pvt::{solve_pvt, PvtConfig};
use crate::navigation::records::{ObservableRecord, PvtSolution};
use crate::receiver::{EpochSet, ReceiverOutput};
use crate::scenario::{BroadcastEphemeris, KlobucharCoeffs};
use crate::time::GpsTime;
use crate::Vec3;

/// Navigation processing settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NavigationConfig {
    /// Carrier smoothing window, s. Zero disables smoothing.
    pub hatch_window: f64,
    /// Code/carrier disagreement that restarts smoothing, m.
    pub hatch_reset: f64,
    pub pvt: PvtConfig,
}

impl Default for NavigationConfig {
    fn default() -> Self {
        NavigationConfig { hatch_window: 100.0, hatch_reset: 20.0, pvt: PvtConfig::default() }
    }
}

/// Everything produced by one call to [`NavigationEngine::push`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NavigationOutput {
    pub observables: Vec<ObservableRecord>,
    pub solutions: Vec<PvtSolution>,
    pub decode_events: Vec<DecodeEvent>,
    /// Epochs for which no solution was produced, with the reason.
    pub skipped: Vec<(f64, String)>,
}

impl NavigationOutput {
    pub fn append(&mut self, mut other: NavigationOutput) {
        self.observables.append(&mut other.observables);
        self.solutions.append(&mut other.solutions);
        self.decode_events.append(&mut other.decode_events);
        self.skipped.append(&mut other.skipped);
    }
}

/// Streaming decode, pseudorange formation and PVT over receiver output.
#[derive(Debug, Clone)]
pub struct NavigationEngine {
    config: NavigationConfig,
    t0: GpsTime,
    fs: f64,
    latch_interval: f64,
    decoders: BTreeMap<u8, NavDecoder>,
    hatch: BTreeMap<u8, HatchFilter>,
    assist: BTreeMap<u8, BroadcastEphemeris>,
    assist_iono: Option<KlobucharCoeffs>,
    prior: Option<Vec3>,
}

impl NavigationEngine {
    /// `t0` is the receiver clock reading of sample 0 and `latch_interval` the
    /// spacing of receiver epochs in seconds.
    pub fn new(config: NavigationConfig, t0: GpsTime, fs: f64, latch_interval: f64) -> Self {
        NavigationEngine {
            config,
            t0,
            fs,
            latch_interval,
            decoders: BTreeMap::new(),
            hatch: BTreeMap::new(),
            assist: BTreeMap::new(),
            assist_iono: None,
            prior: None,
        }
    }

    /// Supplies ephemerides and ionosphere coefficients used until the
    /// message of a satellite has been decoded.
    pub fn with_assistance(
        mut self,
        ephemerides: BTreeMap<u8, BroadcastEphemeris>,
        iono: Option<KlobucharCoeffs>,
    ) -> Self {
        self.assist = ephemerides;
        self.assist_iono = iono;
        self
    }

    /// Decoded (or assisted) ephemerides currently available.
    pub fn ephemerides(&self) -> BTreeMap<u8, BroadcastEphemeris> {
        let mut m = self.assist.clone();
        for (prn, d) in &self.decoders {
            if let Some(e) = &d.ephemeris {
                m.insert(*prn, *e);
            }
        }
        m
    }

    /// Decoded ionosphere coefficients, falling back to the assisted ones.
    pub fn klobuchar(&self) -> Option<KlobucharCoeffs> {
        self.decoders.values().find_map(|d| d.iono).or(self.assist_iono)
    }

    pub fn anchors(&self) -> BTreeMap<u8, TowAnchor> {
        self.decoders.iter().filter_map(|(p, d)| d.anchor.map(|a| (*p, a))).collect()
    }

    /// Consumes one batch of receiver output.
    pub fn push(&mut self, rx: &ReceiverOutput) -> NavigationOutput {
        let mut out = NavigationOutput::default();
        for bit in &rx.bits {
            let week = self.t0.week;
            let dec = self.decoders.entry(bit.prn).or_insert_with(|| NavDecoder::new(bit.prn, week));
            out.decode_events.extend(dec.push(*bit));
        }
        for set in &rx.epochs {
            self.epoch(set, &mut out);
        }
        out
    }

    fn epoch(&mut self, set: &EpochSet, out: &mut NavigationOutput) {
        let t_rx = self.t0.add_seconds(set.sample as f64 / self.fs);
        let ephs = self.ephemerides();
        let anchors = self.anchors();
        let live: Vec<_> = set.channels.iter().filter(|c| c.bit_synced && !c.loss_of_lock).copied().collect();
        for c in set.channels.iter().filter(|c| c.loss_of_lock) {
            if let Some(h) = self.hatch.get_mut(&c.prn) {
                h.reset();
            }
        }
        let mut records = match form_pseudoranges(t_rx, &live, &anchors, &ephs) {
            Ok(r) => r,
            Err(e) => {
                out.skipped.push((t_rx.tow, e.to_string()));
                return;
            }
        };
        if self.config.hatch_window > 0.0 {
            let window = (self.config.hatch_window / self.latch_interval).round().max(1.0) as usize;
            let gap = 1.5 * self.latch_interval;
            for r in records.iter_mut() {
                let h = self.hatch.entry(r.prn).or_insert_with(|| HatchFilter::new(window, self.config.hatch_reset));
                r.pseudorange = h.update(t_rx.tow, r.pseudorange, r.carrier_phase, gap);
            }
        }
        out.observables.extend_from_slice(&records);
        if records.len() < 4 {
            out.skipped.push((t_rx.tow, format!("{} pseudoranges", records.len())));
            return;
        }
        let iono = self.klobuchar();
        if self.config.pvt.ionosphere && iono.is_none() {
            out.skipped.push((t_rx.tow, "ionosphere coefficients not yet decoded".into()));
            return;
        }
        match solve_pvt(t_rx.week, &records, &ephs, iono.as_ref(), &self.config.pvt, self.prior) {
            Ok(s) => {
                self.prior = Some(s.position);
                out.solutions.push(s);
            }
            Err(e) => {
                self.prior = None;
                out.skipped.push((t_rx.tow, e.to_string()));
            }
        }
    }
}
