use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::channel::TruthObservable;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::{schema, write_csv, CsvSink, IfMetadata, IfReader, IfWriter, PvtRow, IF_FORMAT, IF_FORMAT_VERSION};
use crate::navigation::{truth_observables, truth_solutions, ObservableRecord, PvtSolution};
use crate::pipeline::process::{ProcessOptions, ProcessResults, Processor};
use crate::pipeline::scenario::{build_scenario, Scenario};
use crate::receiver::TelemetryRow;
use crate::scenario::{BroadcastEphemeris, ScenarioConfig};
use crate::synth::dequantize_bytes;

/// Spacing of truth records, matching the default receiver latch interval, s.
pub const TRUTH_INTERVAL: f64 = 0.1;

/// File names derived from a common prefix.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub prefix: PathBuf,
}

impl Artifacts {
    /// Prefix of `path` with any extension removed.
    pub fn from_path(path: &Path) -> Self {
        Artifacts { prefix: path.with_extension("") }
    }

    pub fn file(&self, suffix: &str) -> PathBuf {
        let mut s = self.prefix.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    }

    pub fn truth_observables(&self) -> PathBuf {
        self.file("_truth_observables.csv")
    }
    pub fn truth_records(&self) -> PathBuf {
        self.file("_truth_records.csv")
    }
    pub fn truth_pvt(&self) -> PathBuf {
        self.file("_truth_pvt.csv")
    }
    pub fn observables(&self) -> PathBuf {
        self.file("_observables.csv")
    }
    pub fn pvt(&self) -> PathBuf {
        self.file("_pvt.csv")
    }
    pub fn telemetry(&self) -> PathBuf {
        self.file("_telemetry.csv")
    }
    pub fn acquisition(&self) -> PathBuf {
        self.file("_acquisition.csv")
    }
    pub fn decode(&self) -> PathBuf {
        self.file("_decode.csv")
    }
}

/// Truth products on the receiver epoch grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TruthProducts {
    pub observables: Vec<TruthObservable>,
    pub records: Vec<ObservableRecord>,
    pub trajectory: Vec<PvtSolution>,
}

impl Scenario {
    /// Ephemerides of the synthesized satellites.
    pub fn visible_ephemerides(&self) -> BTreeMap<u8, BroadcastEphemeris> {
        self.visible.iter().map(|p| (*p, self.ephemerides[p])).collect()
    }

    /// Elapsed times `k * interval` covering the run.
    pub fn epoch_grid(&self, interval: f64) -> Vec<f64> {
        let n = (self.config.scenario.duration / interval + 1e-9).floor() as usize;
        (0..=n).map(|k| k as f64 * interval).collect()
    }

    pub fn truth_products(&self, interval: f64, exec: Execution) -> Result<TruthProducts> {
        let grid = self.epoch_grid(interval);
        let ephs = self.visible_ephemerides();
        let observables = crate::exec::map(exec, &grid, |&e| {
            ephs.values().map(|eph| self.truth.observable(eph, e)).collect::<Result<Vec<_>>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
        Ok(TruthProducts {
            observables,
            records: truth_observables(&self.truth, &ephs, &grid, exec)?,
            trajectory: truth_solutions(&self.truth, &grid)?,
        })
    }

    /// Sidecar metadata of the stream this scenario generates.
    pub fn if_metadata(&self, clipped: u64) -> IfMetadata {
        let c = &self.config;
        IfMetadata {
            format: IF_FORMAT.into(),
            version: IF_FORMAT_VERSION,
            sample_rate: self.timing.fs,
            if_frequency: self.timing.f_if,
            epoch_week: self.timing.t0.week,
            epoch_tow: self.timing.t0.tow,
            bits: c.signal.quantization,
            sample_count: self.total_samples,
            seed: c.scenario.seed,
            config_digest: c.digest(),
            full_scale_sigma: c.signal.full_scale_sigma,
            clipped_components: clipped,
            ionosphere: c.atmosphere.ionosphere,
            troposphere: c.atmosphere.troposphere,
            carrier_advance: c.atmosphere.carrier_advance,
            noise: c.noise.enabled,
            prns: self.visible.clone(),
        }
    }
}

/// Summary of a generate run.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerateSummary {
    pub if_path: PathBuf,
    pub metadata: IfMetadata,
    pub artifacts: Artifacts,
}

/// Loads a configuration file; the ephemeris path is resolved against its directory.
pub fn load_scenario(config_path: &Path) -> Result<Scenario> {
    let cfg = ScenarioConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    build_scenario(&cfg, base)
}

/// Writes the IF file, its sidecar and the truth CSVs of `scenario`.
pub fn generate_to(scenario: &Scenario, output: &Path, exec: Execution) -> Result<GenerateSummary> {
    let mut gen = scenario.generator()?.with_execution(exec);
    let q = scenario.quantizer()?;
    let mut writer = IfWriter::create(output)?;
    let mut clipped = 0;
    while let Some(block) = gen.next_block() {
        let qb = q.quantize(&block?.samples);
        clipped += qb.clipped;
        writer.write_block(&qb)?;
    }
    let truth = scenario.truth_products(TRUTH_INTERVAL, exec)?;
    let artifacts = Artifacts::from_path(output);
    write_csv(&artifacts.truth_observables(), schema::TRUTH_OBSERVABLES, &truth.observables)?;
    write_csv(&artifacts.truth_records(), schema::OBSERVABLES, &truth.records)?;
    let rows: Vec<PvtRow> = truth.trajectory.iter().map(PvtRow::from).collect();
    write_csv(&artifacts.truth_pvt(), schema::PVT, &rows)?;
    let metadata = scenario.if_metadata(clipped);
    metadata.write(&IfMetadata::sidecar_path(output))?;
    writer.finish()?;
    Ok(GenerateSummary { if_path: output.to_path_buf(), metadata, artifacts })
}

/// Generates the scenario described by `config_path` into `output`.
pub fn cmd_generate(config_path: &Path, output: &Path) -> Result<GenerateSummary> {
    let scenario = load_scenario(config_path)?;
    generate_to(&scenario, output, Execution::default())
}

/// Summary of a process run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessSummary {
    pub samples: u64,
    pub truncated: bool,
    pub acquired: Vec<u8>,
    pub observables: usize,
    pub solutions: usize,
    pub telemetry_rows: u64,
    pub artifacts: Artifacts,
}

/// Runs the receiver and navigation over an IF file and writes all receiver CSVs under `prefix`.
pub fn cmd_process(if_path: &Path, prefix: &Path, opts: &ProcessOptions) -> Result<ProcessSummary> {
    let meta = IfMetadata::read(&IfMetadata::sidecar_path(if_path))?;
    let mut reader = IfReader::open(if_path, meta.clone())?;
    let artifacts = Artifacts { prefix: prefix.to_path_buf() };
    let mut proc = Processor::new(opts, meta.sample_rate, meta.if_frequency, meta.epoch(), Execution::default())?;
    let mut telemetry = CsvSink::create(&artifacts.telemetry(), schema::TELEMETRY)?;
    let block = (opts.block_duration * meta.sample_rate).round().max(1.0) as usize;
    let mut buf = Vec::new();
    while reader.read_block(block, &mut buf)? {
        proc.push(&buf, |r: &TelemetryRow| telemetry.write(r))?;
    }
    proc.finish(|r: &TelemetryRow| telemetry.write(r))?;
    let telemetry_rows = telemetry.finish()?;
    let res = &proc.results;
    write_receiver_csvs(&artifacts, res)?;
    let mut acquired: Vec<u8> = res.acquisitions.iter().filter(|a| a.detected).map(|a| a.prn).collect();
    acquired.sort_unstable();
    acquired.dedup();
    if acquired.is_empty() {
        let mut best: BTreeMap<u8, f64> = BTreeMap::new();
        for a in &res.acquisitions {
            let e = best.entry(a.prn).or_insert(0.0);
            *e = e.max(a.peak_metric);
        }
        let searched: Vec<String> = best.iter().map(|(p, m)| format!("{p}:{m:.2}")).collect();
        return Err(Error::Acquisition(format!(
            "no satellite acquired; searched PRN:peak metric {}",
            if searched.is_empty() { "none".into() } else { searched.join(" ") }
        )));
    }
    Ok(ProcessSummary {
        samples: res.samples,
        truncated: reader.truncated,
        acquired,
        observables: res.nav.observables.len(),
        solutions: res.nav.solutions.len(),
        telemetry_rows,
        artifacts,
    })
}

fn write_receiver_csvs(a: &Artifacts, res: &ProcessResults) -> Result<()> {
    write_csv(&a.acquisition(), schema::ACQUISITION, &res.acquisitions)?;
    write_csv(&a.decode(), schema::DECODE, &res.nav.decode_events)?;
    write_csv(&a.observables(), schema::OBSERVABLES, &res.nav.observables)?;
    let rows: Vec<PvtRow> = res.nav.solutions.iter().map(PvtRow::from).collect();
    write_csv(&a.pvt(), schema::PVT, &rows)?;
    Ok(())
}

/// In-memory outputs of [`run_closed_loop`].
#[derive(Debug, Clone)]
pub struct ClosedLoop {
    pub results: ProcessResults,
    pub telemetry: Vec<TelemetryRow>,
    pub truth: TruthProducts,
    pub clipped: u64,
    /// Ephemerides available to navigation at the end of the run.
    pub decoded: BTreeMap<u8, BroadcastEphemeris>,
}

/// Generates, quantizes and processes `scenario` without touching the disk.
pub fn run_closed_loop(scenario: &Scenario, opts: &ProcessOptions, exec: Execution) -> Result<ClosedLoop> {
    let mut gen = scenario.generator()?.with_execution(exec);
    let q = scenario.quantizer()?;
    let mut proc = Processor::new(opts, scenario.timing.fs, scenario.timing.f_if, scenario.timing.t0, exec)?;
    let mut telemetry = Vec::new();
    let mut buf = Vec::new();
    let mut clipped = 0;
    while let Some(block) = gen.next_block() {
        let qb = q.quantize(&block?.samples);
        clipped += qb.clipped;
        dequantize_bytes(&qb.to_bytes(), qb.bits, &mut buf);
        proc.push(&buf, |r: &TelemetryRow| {
            telemetry.push(*r);
            Ok(())
        })?;
    }
    proc.finish(|r: &TelemetryRow| {
        telemetry.push(*r);
        Ok(())
    })?;
    let decoded = proc.navigation().ephemerides();
    Ok(ClosedLoop {
        results: proc.results,
        telemetry,
        truth: scenario.truth_products(TRUTH_INTERVAL, exec)?,
        clipped,
        decoded,
    })
}
