use std::collections::BTreeMap;

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};

use super::acquisition::{acquire, AcquisitionParams, AcquisitionResult};
use super::tracking::{ChannelEpoch, NavBit, TelemetryRow, TrackingChannel, TrackingParams};

/// Receiver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    pub fs: f64,
    pub f_if: f64,
    /// PRNs searched at start-up.
    pub prns: Vec<u8>,
    pub acquisition: AcquisitionParams,
    pub tracking: TrackingParams,
    /// Spacing of measurement latches on the receiver clock, s.
    pub latch_interval: f64,
    pub max_channels: usize,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            fs: 2.5e6,
            f_if: 0.0,
            prns: (1..=32).collect(),
            acquisition: AcquisitionParams::default(),
            tracking: TrackingParams::default(),
            latch_interval: 0.1,
            max_channels: 12,
        }
    }
}

/// Measurements of all channels at one latch instant.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochSet {
    pub sample: u64,
    pub channels: Vec<ChannelEpoch>,
}

/// Everything produced by one call to [`Receiver::push`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ReceiverOutput {
    pub acquisitions: Vec<AcquisitionResult>,
    pub telemetry: Vec<TelemetryRow>,
    pub bits: Vec<NavBit>,
    pub epochs: Vec<EpochSet>,
}

impl ReceiverOutput {
    pub fn append(&mut self, mut other: ReceiverOutput) {
        self.acquisitions.append(&mut other.acquisitions);
        self.telemetry.append(&mut other.telemetry);
        self.bits.append(&mut other.bits);
        self.epochs.append(&mut other.epochs);
    }
}

/// Streaming software receiver: acquisition on the first samples, then
/// independent tracking channels over a shared sample buffer.
#[derive(Debug)]
pub struct Receiver {
    pub config: ReceiverConfig,
    exec: Execution,
    buffer: Vec<Complex32>,
    buf_start: u64,
    pub channels: Vec<TrackingChannel>,
    acquired: bool,
    pending: BTreeMap<u64, Vec<ChannelEpoch>>,
    latch_samples: u64,
}

impl Receiver {
    pub fn new(config: ReceiverConfig) -> Result<Self> {
        config.tracking.validate()?;
        let latch_samples = (config.latch_interval * config.fs).round() as u64;
        if latch_samples == 0 {
            return Err(Error::InvalidInput("latch interval shorter than one sample".into()));
        }
        Ok(Receiver {
            config,
            exec: Execution::default(),
            buffer: Vec::new(),
            buf_start: 0,
            channels: Vec::new(),
            acquired: false,
            pending: BTreeMap::new(),
            latch_samples,
        })
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Samples between latches.
    pub fn latch_samples(&self) -> u64 {
        self.latch_samples
    }

    /// Number of samples consumed so far.
    pub fn samples_received(&self) -> u64 {
        self.buf_start + self.buffer.len() as u64
    }

    fn acquire_all(&mut self) -> Result<Vec<AcquisitionResult>> {
        let cfg = &self.config;
        let need = cfg.acquisition.samples_needed(cfg.fs);
        let block = &self.buffer[..need];
        let results = exec::map(self.exec, &cfg.prns, |&prn| acquire(block, cfg.fs, cfg.f_if, prn, &cfg.acquisition));
        let results = results.into_iter().collect::<Result<Vec<_>>>()?;
        let mut found: Vec<&AcquisitionResult> = results.iter().filter(|r| r.detected).collect();
        if found.is_empty() {
            let diag = results
                .iter()
                .map(|r| format!("PRN {} metric {:.2}", r.prn, r.peak_metric))
                .collect::<Vec<_>>()
                .join(", ");
            return Err(Error::Acquisition(format!("no satellite acquired ({diag})")));
        }
        found.sort_by(|a, b| b.peak_metric.total_cmp(&a.peak_metric));
        found.truncate(cfg.max_channels);
        found.sort_by_key(|r| r.prn);
        for r in found {
            self.channels.push(TrackingChannel::new(
                r.prn,
                &cfg.tracking,
                cfg.fs,
                cfg.f_if,
                self.buf_start,
                r.code_phase,
                r.doppler,
                self.buf_start,
                self.latch_samples,
            )?);
        }
        self.acquired = true;
        Ok(results)
    }

    /// Feeds consecutive samples.
    pub fn push(&mut self, samples: &[Complex32]) -> Result<ReceiverOutput> {
        self.buffer.extend_from_slice(samples);
        let mut out = ReceiverOutput::default();
        if !self.acquired {
            if self.buffer.len() < self.config.acquisition.samples_needed(self.config.fs) {
                return Ok(out);
            }
            out.acquisitions = self.acquire_all()?;
        }
        let buf_start = self.buf_start;
        let buffer = &self.buffer;
        let buf_end = buf_start + buffer.len() as u64;
        exec::for_each_mut(self.exec, &mut self.channels, |ch| loop {
            let len = ch.next_interval_len();
            if ch.next_sample + len as u64 > buf_end {
                break;
            }
            let s = (ch.next_sample - buf_start) as usize;
            ch.track_step(&buffer[s..s + len]);
        });
        self.collect(&mut out, false);
        let keep_from = self.channels.iter().map(|c| c.next_sample).min().unwrap_or(buf_end);
        let drop = (keep_from - self.buf_start) as usize;
        self.buffer.drain(..drop);
        self.buf_start = keep_from;
        Ok(out)
    }

    /// Releases measurements still waiting for slower channels.
    pub fn finish(&mut self) -> ReceiverOutput {
        let mut out = ReceiverOutput::default();
        self.collect(&mut out, true);
        out
    }

    fn collect(&mut self, out: &mut ReceiverOutput, all: bool) {
        for ch in self.channels.iter_mut() {
            let (t, b, e) = ch.drain();
            out.telemetry.extend(t);
            out.bits.extend(b);
            for ep in e {
                self.pending.entry(ep.sample).or_default().push(ep);
            }
        }
        let complete =
            if all { u64::MAX } else { self.channels.iter().map(|c| c.next_latch()).min().unwrap_or(u64::MAX) };
        let ready: Vec<u64> = self.pending.range(..complete).map(|(k, _)| *k).collect();
        for k in ready {
            let mut channels = self.pending.remove(&k).unwrap_or_default();
            channels.sort_by_key(|c| c.prn);
            out.epochs.push(EpochSet { sample: k, channels });
        }
    }
}
