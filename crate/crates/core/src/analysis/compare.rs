use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::navigation::ObservableRecord;

/// Tolerance for matching receiver epochs, s.
pub const EPOCH_MATCH_TOL: f64 = 1e-6;

/// Estimate-minus-truth errors of one satellite at one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableError {
    pub t_rx: f64,
    pub prn: u8,
    /// Pseudorange error after removing the per-epoch common mode, m.
    pub pseudorange: f64,
    /// Hz.
    pub doppler: f64,
    /// Carrier phase error after removing the per-satellite integer offset, cycles.
    pub carrier_phase: f64,
}

/// Mean, RMS and largest magnitude of an error series.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Stats {
    pub mean: f64,
    pub rms: f64,
    pub max: f64,
    pub count: usize,
}

impl Stats {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Stats {
        let mut s = Stats::default();
        let mut sq = 0.0;
        for v in values {
            s.count += 1;
            s.mean += v;
            sq += v * v;
            s.max = s.max.max(v.abs());
        }
        if s.count > 0 {
            s.mean /= s.count as f64;
            s.rms = (sq / s.count as f64).sqrt();
        }
        s
    }
}

/// Error summary of one satellite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrnSummary {
    pub prn: u8,
    pub pseudorange: Stats,
    pub doppler: Stats,
    pub carrier_phase: Stats,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ObservableComparison {
    pub errors: Vec<ObservableError>,
    pub per_prn: Vec<PrnSummary>,
}

fn epoch_key(t: f64) -> i64 {
    (t / EPOCH_MATCH_TOL).round() as i64
}

/// Compares estimated observables with truth on their common epochs and satellites.
///
/// The receiver clock is removed from pseudorange errors by subtracting the
/// mean error over the satellites of each epoch; carrier phase errors have the
/// per-satellite mean integer offset removed.
pub fn compare_observables(truth: &[ObservableRecord], est: &[ObservableRecord]) -> Result<ObservableComparison> {
    let index: BTreeMap<(i64, u8), &ObservableRecord> = truth.iter().map(|r| ((epoch_key(r.t_rx), r.prn), r)).collect();
    let mut by_epoch: BTreeMap<i64, Vec<(&ObservableRecord, &ObservableRecord)>> = BTreeMap::new();
    for e in est {
        if let Some(t) = index.get(&(epoch_key(e.t_rx), e.prn)) {
            by_epoch.entry(epoch_key(e.t_rx)).or_default().push((t, e));
        }
    }
    if by_epoch.is_empty() {
        let a: BTreeSet<u8> = truth.iter().map(|r| r.prn).collect();
        let b: BTreeSet<u8> = est.iter().map(|r| r.prn).collect();
        return Err(Error::Analysis(format!(
            "no common satellites and epochs (truth PRNs {a:?}, estimate PRNs {b:?})"
        )));
    }
    let mut errors = Vec::new();
    for pairs in by_epoch.values() {
        let common = pairs.iter().map(|(t, e)| e.pseudorange - t.pseudorange).sum::<f64>() / pairs.len() as f64;
        for (t, e) in pairs {
            errors.push(ObservableError {
                t_rx: e.t_rx,
                prn: e.prn,
                pseudorange: e.pseudorange - t.pseudorange - common,
                doppler: e.doppler - t.doppler,
                carrier_phase: e.carrier_phase - t.carrier_phase,
            });
        }
    }
    let prns: BTreeSet<u8> = errors.iter().map(|e| e.prn).collect();
    let mut per_prn = Vec::with_capacity(prns.len());
    for prn in prns {
        let n = errors.iter().filter(|e| e.prn == prn).count() as f64;
        let mean = errors.iter().filter(|e| e.prn == prn).map(|e| e.carrier_phase).sum::<f64>() / n;
        let offset = mean.round();
        for e in errors.iter_mut().filter(|e| e.prn == prn) {
            e.carrier_phase -= offset;
        }
        let mine: Vec<&ObservableError> = errors.iter().filter(|e| e.prn == prn).collect();
        per_prn.push(PrnSummary {
            prn,
            pseudorange: Stats::of(mine.iter().map(|e| e.pseudorange)),
            doppler: Stats::of(mine.iter().map(|e| e.doppler)),
            carrier_phase: Stats::of(mine.iter().map(|e| e.carrier_phase)),
        });
    }
    Ok(ObservableComparison { errors, per_prn })
}
