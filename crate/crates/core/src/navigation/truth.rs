use std::collections::BTreeMap;

use crate::channel::TruthModel;
use crate::constants::{C, F_L1};
use crate::error::Result;
use crate::exec::{self, Execution};
use crate::navigation::records::{ObservableRecord, ObservableSource, PvtSolution};
use crate::scenario::BroadcastEphemeris;

/// Error-free observables the receiver would report at elapsed times `elapsed`.
///
/// Pseudoranges carry the receiver clock bias and are corrected for the
/// satellite clock, carrier phase is `F_L1 * D_phase` and Doppler the rate of
/// the carrier delay.
pub fn truth_observables(
    model: &TruthModel,
    ephemerides: &BTreeMap<u8, BroadcastEphemeris>,
    elapsed: &[f64],
    exec_mode: Execution,
) -> Result<Vec<ObservableRecord>> {
    let rows = exec::map(exec_mode, elapsed, |&e| -> Result<Vec<ObservableRecord>> {
        let mut v = Vec::with_capacity(ephemerides.len());
        for eph in ephemerides.values() {
            let p = model.evaluate(eph, e)?;
            v.push(ObservableRecord {
                t_rx: p.t_rx,
                prn: eph.prn,
                pseudorange: C * (p.d_code + p.sat.clock_offset),
                doppler: model.apparent_doppler(eph, e)?,
                carrier_phase: F_L1 * p.d_phase,
                cn0: p.cn0,
                source: ObservableSource::Truth,
            });
        }
        Ok(v)
    });
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// True receiver state at elapsed times `elapsed`, in the solution schema.
pub fn truth_solutions(model: &TruthModel, elapsed: &[f64]) -> Result<Vec<PvtSolution>> {
    elapsed
        .iter()
        .map(|&e| {
            let (t_true, bias) = model.true_time(e);
            let (r, v, _) = model.trajectory.state_at(t_true)?;
            Ok(PvtSolution {
                t_rx: model.t_rx(e),
                position: r,
                velocity: v,
                clock_bias: bias,
                clock_drift: model.settings.clock_drift,
                used_prns: Vec::new(),
                residual_rms: 0.0,
                gdop: 0.0,
                pdop: 0.0,
                hdop: 0.0,
                vdop: 0.0,
                tdop: 0.0,
                iterations: 0,
            })
        })
        .collect()
}
