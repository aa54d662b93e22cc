use std::collections::BTreeMap;
use std::path::PathBuf;

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::exec::Execution;
use crate::navigation::{NavigationConfig, NavigationEngine, NavigationOutput};
use crate::receiver::{AcquisitionResult, NavBit, Receiver, ReceiverConfig, ReceiverOutput, TelemetryRow};
use crate::scenario::{load_ephemerides, BroadcastEphemeris, KlobucharCoeffs};
use crate::time::GpsTime;

/// Receiver and navigation settings of a processing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProcessOptions {
    /// Sample rate and IF are taken from the input; everything else applies.
    pub receiver: ReceiverConfig,
    pub navigation: NavigationConfig,
    /// Samples handed to the receiver at a time, s.
    pub block_duration: f64,
    /// Keep every n-th telemetry row per channel (1 keeps all).
    pub telemetry_every: usize,
    /// RINEX navigation file whose ephemerides and ionosphere coefficients are
    /// used until the broadcast message of each satellite has been decoded.
    pub assistance: Option<PathBuf>,
}

impl Default for ProcessOptions {
    fn default() -> Self {
        ProcessOptions {
            receiver: ReceiverConfig::default(),
            navigation: NavigationConfig::default(),
            block_duration: 0.1,
            telemetry_every: 1,
            assistance: None,
        }
    }
}

impl ProcessOptions {
    /// Reads options from a TOML file.
    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| crate::error::Error::io(path, e))?;
        crate::scenario::parse_toml(&text)
    }
}

/// Accumulated results of a processing run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProcessResults {
    pub acquisitions: Vec<AcquisitionResult>,
    pub bits: Vec<NavBit>,
    pub nav: NavigationOutput,
    pub samples: u64,
}

/// Receiver plus navigation engine fed with consecutive sample blocks.
pub struct Processor {
    receiver: Receiver,
    nav: NavigationEngine,
    telemetry_every: usize,
    telemetry_count: BTreeMap<u8, usize>,
    pub results: ProcessResults,
}

impl Processor {
    pub fn new(opts: &ProcessOptions, fs: f64, f_if: f64, t0: GpsTime, exec: Execution) -> Result<Self> {
        let rc = ReceiverConfig { fs, f_if, ..opts.receiver.clone() };
        let latch = rc.latch_interval;
        let mut nav = NavigationEngine::new(opts.navigation.clone(), t0, fs, latch);
        if let Some(path) = &opts.assistance {
            let set = load_ephemerides(path, t0)?;
            nav = nav.with_assistance(set.ephemerides, set.klobuchar);
        }
        Ok(Processor {
            receiver: Receiver::new(rc)?.with_execution(exec),
            nav,
            telemetry_every: opts.telemetry_every.max(1),
            telemetry_count: Default::default(),
            results: ProcessResults::default(),
        })
    }

    /// Seeds navigation with ephemerides known in advance.
    pub fn with_assistance(self, ephemerides: BTreeMap<u8, BroadcastEphemeris>, iono: Option<KlobucharCoeffs>) -> Self {
        Processor { nav: self.nav.with_assistance(ephemerides, iono), ..self }
    }

    pub fn navigation(&self) -> &NavigationEngine {
        &self.nav
    }

    /// Processes one block and passes the kept telemetry rows to `sink`.
    pub fn push<F>(&mut self, samples: &[Complex32], sink: F) -> Result<()>
    where
        F: FnMut(&TelemetryRow) -> Result<()>,
    {
        self.results.samples += samples.len() as u64;
        let out = self.receiver.push(samples)?;
        self.absorb(out, sink)
    }

    /// Flushes measurements held back for slower channels.
    pub fn finish<F>(&mut self, sink: F) -> Result<()>
    where
        F: FnMut(&TelemetryRow) -> Result<()>,
    {
        let out = self.receiver.finish();
        self.absorb(out, sink)
    }

    fn absorb<F>(&mut self, out: ReceiverOutput, mut sink: F) -> Result<()>
    where
        F: FnMut(&TelemetryRow) -> Result<()>,
    {
        let nav = self.nav.push(&out);
        self.results.nav.append(nav);
        for row in &out.telemetry {
            let c = self.telemetry_count.entry(row.prn).or_insert(0);
            if *c % self.telemetry_every == 0 {
                sink(row)?;
            }
            *c += 1;
        }
        let ReceiverOutput { mut acquisitions, mut bits, .. } = out;
        self.results.acquisitions.append(&mut acquisitions);
        self.results.bits.append(&mut bits);
        Ok(())
    }
}
