use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::{allan_deviation, compare_observables, fit_clock_drift, octave_taus, ClockSeries};
use crate::error::{Error, Result};
use crate::io::{read_csv, schema, write_atomic, write_csv, AllanRow, PvtRow};
use crate::navigation::{position_errors, ObservableRecord, PositionSummary, PvtSolution};
use crate::pipeline::commands::Artifacts;
use crate::receiver::{jitter_report, JitterThresholds, TelemetryRow, TrackingStage, MIN_JITTER_SAMPLES};

/// Header line of a verdict file.
pub const VERDICT_HEADER: &str = "# gnss-twin verdict v1";

/// Acceptance thresholds applied by [`cmd_validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Worst per-satellite RMS of clock-removed pseudorange error, m.
    pub pseudorange_rms: f64,
    /// Worst per-satellite Doppler error RMS, Hz.
    pub doppler_rms: f64,
    /// Horizontal error bound, m.
    pub horizontal_limit: f64,
    /// Minimum fraction of epochs inside `horizontal_limit`.
    pub horizontal_fraction: f64,
    /// Optional bound on the 3D position RMS, m.
    pub position_rms_3d: Option<f64>,
    /// Correlator spacing used for the DLL threshold, chips.
    pub correlator_spacing: f64,
    /// Integration time used for the FLL threshold, s.
    pub integration_time: f64,
    /// Telemetry before this elapsed time is excluded from jitter statistics, s.
    pub settle_time: f64,
    /// Bound on the difference of fitted clock intercepts, s.
    pub clock_bias: f64,
    /// Bound on the difference of fitted clock drifts, s/s.
    pub clock_drift: f64,
    /// Optional bound on loss-of-lock telemetry rows after settling.
    pub max_loss_of_lock: Option<u64>,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            pseudorange_rms: 5.0,
            doppler_rms: 2.0,
            horizontal_limit: 2.0,
            horizontal_fraction: 0.95,
            position_rms_3d: None,
            correlator_spacing: 0.5,
            integration_time: 1e-3,
            settle_time: 2.0,
            clock_bias: 1e-8,
            clock_drift: 1e-10,
            max_loss_of_lock: None,
        }
    }
}

impl Thresholds {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        crate::scenario::parse_toml(&text)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
    /// Not enough data to evaluate.
    Skip,
    /// Reported without a threshold.
    Info,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Info => "INFO",
        }
    }

    fn check(ok: bool) -> Status {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub threshold: Option<f64>,
    pub status: Status,
}

impl Metric {
    fn new(name: &str, value: f64, threshold: Option<f64>, status: Status) -> Self {
        Metric { name: name.into(), value, threshold, status }
    }

    /// Passes when `value <= threshold`.
    fn at_most(name: &str, value: f64, threshold: f64) -> Self {
        Metric::new(name, value, Some(threshold), Status::check(value <= threshold))
    }

    fn skip(name: &str, threshold: Option<f64>) -> Self {
        Metric::new(name, f64::NAN, threshold, Status::Skip)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub metrics: Vec<Metric>,
}

impl Verdict {
    pub fn pass(&self) -> bool {
        self.metrics.iter().all(|m| m.status != Status::Fail)
    }

    pub fn metric(&self, name: &str) -> Option<&Metric> {
        self.metrics.iter().find(|m| m.name == name)
    }

    /// Fixed-format text form written to the verdict file.
    pub fn render(&self) -> String {
        let num = |v: f64| if v.is_finite() { format!("{v:.6e}") } else { "-".into() };
        let mut s = String::new();
        writeln!(s, "{VERDICT_HEADER}").unwrap();
        writeln!(s, "{:<26} {:>14} {:>14} status", "metric", "value", "threshold").unwrap();
        for m in &self.metrics {
            let th = m.threshold.map_or_else(|| "-".to_string(), num);
            writeln!(s, "{:<26} {:>14} {:>14} {}", m.name, num(m.value), th, m.status.as_str()).unwrap();
        }
        writeln!(s, "overall {}", if self.pass() { "PASS" } else { "FAIL" }).unwrap();
        s
    }
}

/// Files compared by [`cmd_validate`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidateInputs {
    pub truth_observables: PathBuf,
    pub truth_pvt: PathBuf,
    pub observables: PathBuf,
    pub pvt: PathBuf,
    /// Jitter and loss-of-lock metrics are skipped without telemetry.
    pub telemetry: Option<PathBuf>,
}

impl ValidateInputs {
    /// Truth written by generate under `truth`, receiver outputs written by process under `results`.
    pub fn from_artifacts(truth: &Artifacts, results: &Artifacts) -> Self {
        ValidateInputs {
            truth_observables: truth.truth_records(),
            truth_pvt: truth.truth_pvt(),
            observables: results.observables(),
            pvt: results.pvt(),
            telemetry: Some(results.telemetry()),
        }
    }
}

/// In-memory data evaluated by [`evaluate`].
#[derive(Debug, Clone, Default)]
pub struct ValidationData {
    pub truth_observables: Vec<ObservableRecord>,
    pub truth_pvt: Vec<PvtSolution>,
    pub observables: Vec<ObservableRecord>,
    pub pvt: Vec<PvtSolution>,
    pub telemetry: Option<Vec<TelemetryRow>>,
}

/// Detailed products of an evaluation, written beside the verdict.
#[derive(Debug, Clone, Default)]
pub struct ValidationDetail {
    pub observable_errors: Vec<crate::analysis::ObservableError>,
    pub position_errors: Vec<crate::navigation::EnuError>,
    pub position_summary: PositionSummary,
    pub allan: Vec<AllanRow>,
}

fn read_pvt(path: &Path) -> Result<Vec<PvtSolution>> {
    read_csv::<PvtRow>(path, schema::PVT)?.iter().map(PvtSolution::try_from).collect()
}

impl ValidationData {
    pub fn load(inputs: &ValidateInputs) -> Result<Self> {
        Ok(ValidationData {
            truth_observables: read_csv(&inputs.truth_observables, schema::OBSERVABLES)?,
            truth_pvt: read_pvt(&inputs.truth_pvt)?,
            observables: read_csv(&inputs.observables, schema::OBSERVABLES)?,
            pvt: read_pvt(&inputs.pvt)?,
            telemetry: match &inputs.telemetry {
                Some(p) if p.exists() => Some(read_csv(p, schema::TELEMETRY)?),
                _ => None,
            },
        })
    }
}

/// Longest run of solutions with uniform spacing, as a clock series relative to `t_ref`.
fn clock_series(sols: &[PvtSolution], t_ref: f64) -> Option<ClockSeries> {
    if sols.len() < 3 {
        return None;
    }
    let step = |i: usize| sols[i + 1].t_rx - sols[i].t_rx;
    let (mut best, mut start) = ((0, 1), 0);
    for i in 1..sols.len() {
        let contiguous = i >= 2 && (step(i - 1) - step(i - 2)).abs() <= 1e-6;
        if !contiguous && i >= 2 {
            start = i - 1;
        }
        if i + 1 - start > best.1 - best.0 {
            best = (start, i + 1);
        }
    }
    let run = &sols[best.0..best.1];
    ClockSeries::new(run.iter().map(|s| s.t_rx - t_ref).collect(), run.iter().map(|s| s.clock_bias).collect()).ok()
}

/// Computes every metric of the verdict.
pub fn evaluate(data: &ValidationData, th: &Thresholds) -> Result<(Verdict, ValidationDetail)> {
    let mut m = Vec::new();
    let mut detail = ValidationDetail::default();

    match compare_observables(&data.truth_observables, &data.observables) {
        Ok(cmp) => {
            let worst = |f: &dyn Fn(&crate::analysis::PrnSummary) -> f64| cmp.per_prn.iter().map(f).fold(0.0, f64::max);
            m.push(Metric::at_most("pseudorange_rms_m", worst(&|p| p.pseudorange.rms), th.pseudorange_rms));
            m.push(Metric::at_most("doppler_rms_hz", worst(&|p| p.doppler.rms), th.doppler_rms));
            m.push(Metric::new("carrier_phase_rms_cycles", worst(&|p| p.carrier_phase.rms), None, Status::Info));
            detail.observable_errors = cmp.errors;
        }
        // Nothing to compare is a receiver failure, not an input error.
        Err(Error::Analysis(_)) => {
            m.push(Metric::new("pseudorange_rms_m", f64::NAN, Some(th.pseudorange_rms), Status::Fail));
            m.push(Metric::new("doppler_rms_hz", f64::NAN, Some(th.doppler_rms), Status::Fail));
        }
        Err(e) => return Err(e),
    }

    let (errs, summary) = position_errors(&data.pvt, &data.truth_pvt, 1e-3);
    if errs.is_empty() {
        m.push(Metric::new("horizontal_within_fraction", 0.0, Some(th.horizontal_fraction), Status::Fail));
    } else {
        let frac = PositionSummary::fraction_within(&errs, th.horizontal_limit);
        m.push(Metric::new(
            "horizontal_within_fraction",
            frac,
            Some(th.horizontal_fraction),
            Status::check(frac >= th.horizontal_fraction),
        ));
        m.push(Metric::new("horizontal_rms_m", summary.horizontal_rms, None, Status::Info));
        m.push(match th.position_rms_3d {
            Some(t) => Metric::at_most("position_rms_3d_m", summary.rms_3d, t),
            None => Metric::new("position_rms_3d_m", summary.rms_3d, None, Status::Info),
        });
    }
    detail.position_errors = errs;
    detail.position_summary = summary;

    let thresholds = JitterThresholds::new(th.correlator_spacing, th.integration_time);
    let names = ["dll_jitter_chips", "pll_jitter_deg", "fll_jitter_hz"];
    let limits = [thresholds.sigma_dll_th, thresholds.sigma_pll_th, thresholds.sigma_fll_th];
    let mut sigma: Option<[f64; 3]> = None;
    if let Some(tel) = &data.telemetry {
        let mut by_prn: BTreeMap<u8, [Vec<f64>; 3]> = BTreeMap::new();
        for r in tel.iter().filter(|r| r.stage == TrackingStage::Pll && r.t >= th.settle_time) {
            let e = by_prn.entry(r.prn).or_default();
            e[0].push(r.dll);
            e[1].push(r.pll);
            e[2].push(r.fll);
        }
        for v in by_prn.values().filter(|v| v[0].len() >= MIN_JITTER_SAMPLES) {
            let rep = jitter_report(&v[0], &v[1], &v[2], th.correlator_spacing, th.integration_time)?;
            let s = sigma.get_or_insert([0.0; 3]);
            s[0] = s[0].max(rep.sigma_dll);
            s[1] = s[1].max(rep.sigma_pll);
            s[2] = s[2].max(rep.sigma_fll);
        }
        let lost = tel.iter().filter(|r| r.loss_of_lock && r.t >= th.settle_time).count() as f64;
        m.push(match th.max_loss_of_lock {
            Some(t) => Metric::at_most("loss_of_lock_rows", lost, t as f64),
            None => Metric::new("loss_of_lock_rows", lost, None, Status::Info),
        });
    }
    for k in 0..3 {
        m.push(match sigma {
            // Strict: a loop at its threshold is not locked reliably.
            Some(s) => Metric::new(names[k], s[k], Some(limits[k]), Status::check(s[k] < limits[k])),
            None => Metric::skip(names[k], Some(limits[k])),
        });
    }

    let t_ref = data.truth_pvt.first().map_or(0.0, |s| s.t_rx);
    match (clock_series(&data.pvt, t_ref), clock_series(&data.truth_pvt, t_ref)) {
        (Some(est), Some(truth)) => {
            let (fe, ft) = (fit_clock_drift(&est), fit_clock_drift(&truth));
            m.push(Metric::at_most("clock_bias_error_s", (fe.bias0 - ft.bias0).abs(), th.clock_bias));
            m.push(Metric::at_most("clock_drift_error", (fe.drift - ft.drift).abs(), th.clock_drift));
            let taus = octave_taus(&est);
            match allan_deviation(&est, &taus) {
                Ok(adev) if !adev.is_empty() => {
                    m.push(Metric::new("allan_deviation_tau0_s", adev[0].1, None, Status::Pass));
                    detail.allan = adev.into_iter().map(|(tau, adev)| AllanRow { tau, adev }).collect();
                }
                _ => m.push(Metric::skip("allan_deviation_tau0_s", None)),
            }
        }
        _ => {
            m.push(Metric::skip("clock_bias_error_s", Some(th.clock_bias)));
            m.push(Metric::skip("clock_drift_error", Some(th.clock_drift)));
            m.push(Metric::skip("allan_deviation_tau0_s", None));
        }
    }
    Ok((Verdict { metrics: m }, detail))
}

/// Compares receiver outputs with truth, writes the verdict file and the detail CSVs beside it.
pub fn cmd_validate(inputs: &ValidateInputs, thresholds: &Thresholds, verdict_path: &Path) -> Result<Verdict> {
    let data = ValidationData::load(inputs)?;
    let (verdict, detail) = evaluate(&data, thresholds)?;
    let text = verdict.render();
    write_atomic(verdict_path, |w| {
        use std::io::Write;
        w.write_all(text.as_bytes()).map_err(|e| Error::io(verdict_path, e))
    })?;
    let a = Artifacts::from_path(verdict_path);
    write_csv(&a.file("_observable_errors.csv"), schema::OBSERVABLE_ERRORS, &detail.observable_errors)?;
    write_csv(&a.file("_position_errors.csv"), schema::POSITION_ERRORS, &detail.position_errors)?;
    write_csv(&a.file("_allan.csv"), schema::ALLAN, &detail.allan)?;
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navigation::ObservableSource;
    use crate::Vec3;

    fn pvt(t: f64, bias: f64) -> PvtSolution {
        PvtSolution {
            t_rx: t,
            position: Vec3::new(6378137.0, 0.0, 0.0),
            velocity: Vec3::zeros(),
            clock_bias: bias,
            clock_drift: 1e-8,
            used_prns: vec![1, 2, 3, 4],
            residual_rms: 0.0,
            gdop: 2.0,
            pdop: 1.8,
            hdop: 1.0,
            vdop: 1.5,
            tdop: 0.8,
            iterations: 3,
        }
    }

    fn data() -> ValidationData {
        let mut obs = Vec::new();
        let mut sols = Vec::new();
        for k in 0..50 {
            let t = 1000.0 + k as f64 * 0.1;
            for prn in [3u8, 7, 11, 19] {
                obs.push(ObservableRecord {
                    t_rx: t,
                    prn,
                    pseudorange: 2.1e7 + prn as f64 * 1e5 + 40.0 * t,
                    doppler: -200.0 * prn as f64,
                    carrier_phase: 1e6 + 210.0 * t,
                    cn0: 45.0,
                    source: ObservableSource::Truth,
                });
            }
            sols.push(pvt(t, 1e-3 + 1e-8 * (t - 1000.0)));
        }
        ValidationData {
            truth_observables: obs.clone(),
            truth_pvt: sols.clone(),
            observables: obs,
            pvt: sols,
            telemetry: None,
        }
    }

    #[test]
    fn truth_against_truth_passes() {
        let (v, _) = evaluate(&data(), &Thresholds::default()).unwrap();
        assert!(v.pass(), "{}", v.render());
        assert_eq!(v.metric("pseudorange_rms_m").unwrap().value, 0.0);
        assert_eq!(v.metric("horizontal_within_fraction").unwrap().value, 1.0);
        assert_eq!(v.metric("dll_jitter_chips").unwrap().status, Status::Skip);
    }

    #[test]
    fn inflated_dll_jitter_fails() {
        let mut d = data();
        let tel = (0..400)
            .map(|k| TelemetryRow {
                t: 3.0 + k as f64 * 1e-3,
                prn: 3,
                stage: TrackingStage::Pll,
                integration_ms: 1,
                dll: if k % 2 == 0 { 0.2 } else { -0.2 },
                pll: 0.0,
                fll: 0.0,
                doppler: 0.0,
                code_rate: 0.0,
                cn0: 45.0,
                prompt_i: 1.0,
                prompt_q: 0.0,
                lock_indicator: 1.0,
                bit_synced: true,
                loss_of_lock: false,
            })
            .collect();
        d.telemetry = Some(tel);
        let (v, _) = evaluate(&d, &Thresholds::default()).unwrap();
        assert_eq!(v.metric("dll_jitter_chips").unwrap().status, Status::Fail);
        assert_eq!(v.metric("pll_jitter_deg").unwrap().status, Status::Pass);
        assert!(!v.pass());
    }

    #[test]
    fn empty_receiver_output_fails() {
        let mut d = data();
        d.observables.clear();
        d.pvt.clear();
        let (v, _) = evaluate(&d, &Thresholds::default()).unwrap();
        assert_eq!(v.metric("pseudorange_rms_m").unwrap().status, Status::Fail);
        assert_eq!(v.metric("horizontal_within_fraction").unwrap().status, Status::Fail);
        assert_eq!(v.metric("clock_bias_error_s").unwrap().status, Status::Skip);
    }

    #[test]
    fn position_offset_fails_horizontal() {
        let mut d = data();
        for s in &mut d.pvt {
            s.position.y += 3.0;
        }
        let (v, _) = evaluate(&d, &Thresholds::default()).unwrap();
        assert_eq!(v.metric("horizontal_within_fraction").unwrap().status, Status::Fail);
    }

    #[test]
    fn clock_series_takes_longest_uniform_run() {
        let t: Vec<f64> = [0.0, 0.1, 0.2, 0.5, 0.6, 0.7, 0.8, 0.9].to_vec();
        let sols: Vec<_> = t.iter().map(|&t| pvt(t, t)).collect();
        let cs = clock_series(&sols, 0.0).unwrap();
        assert_eq!(cs.len(), 5);
        assert!((cs.epochs[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn render_is_stable() {
        let v = Verdict { metrics: vec![Metric::at_most("x", 1.5, 2.0), Metric::skip("y", None)] };
        let s = v.render();
        assert!(s.starts_with(VERDICT_HEADER));
        assert!(s.contains("1.500000e0"));
        assert!(s.trim_end().ends_with("overall PASS"));
    }
}
