use std::collections::VecDeque;
use std::f64::consts::TAU;

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::codegen::ca_code;
use crate::constants::{CA_LEN, CODES_PER_BIT, F_CA, F_L1};
use crate::error::{Error, Result};
use crate::C64;

use super::cn0::{cn0_from_ratio, power_ratio};
use super::discriminators::{dll_discriminator, fll_discriminator, pll_discriminator};
use super::jitter::std_dev;
use super::loops::{CarrierLoop, CodeLoop};

const CODE_PAD: usize = 2;
const BITS_PER_PERIOD: i64 = CODES_PER_BIT as i64;
/// Power-ratio blocks averaged by the C/N0 estimator.
const CN0_BLOCKS: usize = 50;
const LOCK_SMOOTHING: f64 = 0.02;

/// Tracking loop settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingParams {
    /// Early-late spacing, chips.
    pub correlator_spacing: f64,
    /// Coherent integration after bit synchronization, ms (1, 2, 4, 10 or 20).
    pub integration_ms: u32,
    pub dll_bandwidth: f64,
    pub pll_bandwidth: f64,
    pub fll_pullin_bandwidth: f64,
    pub fll_assist_bandwidth: f64,
    /// Duration of the FLL-only pull-in, ms.
    pub pullin_ms: u32,
    /// FLL error statistics window for the switch to pure PLL, intervals.
    pub fll_window: usize,
    /// Mean FLL error accepted for the switch to pure PLL, Hz.
    pub fll_mean_limit: f64,
    /// Phase lock indicator below which the channel returns to FLL assistance.
    pub lock_threshold: f64,
    /// C/N0 below which an estimate counts towards loss of lock, dB-Hz.
    pub loss_cn0: f64,
    /// Consecutive low estimates that flag loss of lock.
    pub loss_count: u32,
    /// Transitions needed before the bit-edge histogram is trusted.
    pub bit_sync_transitions: u32,
}

impl Default for TrackingParams {
    fn default() -> Self {
        TrackingParams {
            correlator_spacing: 0.5,
            integration_ms: 1,
            dll_bandwidth: 2.0,
            pll_bandwidth: 18.0,
            fll_pullin_bandwidth: 10.0,
            fll_assist_bandwidth: 2.0,
            pullin_ms: 200,
            fll_window: 100,
            fll_mean_limit: 5.0,
            lock_threshold: 0.5,
            loss_cn0: 26.0,
            loss_count: 5,
            bit_sync_transitions: 12,
        }
    }
}

impl TrackingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.correlator_spacing > 0.0 && self.correlator_spacing <= 1.0) {
            return Err(Error::InvalidInput("correlator spacing must lie in (0, 1] chips".into()));
        }
        if ![1, 2, 4, 10, 20].contains(&self.integration_ms) {
            return Err(Error::InvalidInput("integration time must be 1, 2, 4, 10 or 20 ms".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrackingStage {
    PullIn,
    FllAssisted,
    Pll,
}

impl TrackingStage {
    pub fn as_str(self) -> &'static str {
        match self {
            TrackingStage::PullIn => "pull_in",
            TrackingStage::FllAssisted => "fll_assisted",
            TrackingStage::Pll => "pll",
        }
    }
}

/// One row of per-interval tracking telemetry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelemetryRow {
    /// Receiver elapsed time at the end of the interval, s.
    pub t: f64,
    pub prn: u8,
    pub stage: TrackingStage,
    pub integration_ms: u32,
    /// Chips.
    pub dll: f64,
    /// Degrees.
    pub pll: f64,
    /// Hz.
    pub fll: f64,
    pub doppler: f64,
    pub code_rate: f64,
    pub cn0: f64,
    pub prompt_i: f64,
    pub prompt_q: f64,
    pub lock_indicator: f64,
    pub bit_synced: bool,
    pub loss_of_lock: bool,
}

/// Measurement of one channel at a latch instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelEpoch {
    pub sample: u64,
    pub prn: u8,
    /// Code period index (ms since tracking start) containing the latch.
    pub period: i64,
    /// Chips into that period.
    pub chips: f64,
    /// Accumulated replica carrier phase minus the IF ramp, cycles.
    pub carrier_phase: f64,
    pub doppler: f64,
    pub cn0: f64,
    pub stage: TrackingStage,
    pub bit_synced: bool,
    pub loss_of_lock: bool,
}

/// A demodulated data bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct NavBit {
    pub prn: u8,
    /// Code period at which the bit starts.
    pub period: i64,
    /// 0 or 1 with unresolved polarity.
    pub value: u8,
}

/// Outputs of one integration interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub dll: f64,
    pub pll_deg: f64,
    pub fll: f64,
}

/// State of one code/carrier tracking channel.
#[derive(Debug, Clone)]
pub struct TrackingChannel {
    pub prn: u8,
    params: TrackingParams,
    fs: f64,
    f_if: f64,
    /// Padded chips covering up to 20 code periods.
    table: Vec<f64>,
    /// First sample of the next interval.
    pub next_sample: u64,
    /// Replica code position at `next_sample`, chips (in [0, step)).
    code_phase: f64,
    /// Code period index starting at `next_sample`.
    pub period: i64,
    code_rate: f64,
    /// Replica carrier phase at `next_sample` including the IF, cycles.
    carrier_phase: f64,
    carrier_freq: f64,
    carrier: CarrierLoop,
    code: CodeLoop,
    pub stage: TrackingStage,
    stage_ms: u64,
    prev_prompt: Option<C64>,
    fll_hist: VecDeque<f64>,
    lock_num: f64,
    lock_den: f64,
    /// Histogram of data transitions by period index modulo 20.
    edge_hist: [u32; 20],
    last_ms_sign: Option<(i64, f64)>,
    /// Period index modulo 20 at which bits start.
    pub bit_edge: Option<i64>,
    bit_acc: C64,
    bit_start: Option<i64>,
    cn0_prompts: Vec<C64>,
    cn0_block_start: i64,
    cn0_ratios: VecDeque<f64>,
    cn0_m: usize,
    pub cn0: f64,
    low_cn0: u32,
    /// C/N0 has reached `loss_cn0` since pull-in; loss of lock is only declared after that.
    held_lock: bool,
    pub loss_of_lock: bool,
    pub telemetry: Vec<TelemetryRow>,
    pub bits: Vec<NavBit>,
    pub epochs: Vec<ChannelEpoch>,
    latch_interval: u64,
    next_latch: u64,
}

impl TrackingChannel {
    /// Starts a channel from an acquisition made on a block beginning at
    /// `acq_sample`, with code phase `code_phase` there and Doppler `doppler`.
    /// Tracking begins at the first code epoch at or after `start_not_before`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        prn: u8,
        params: &TrackingParams,
        fs: f64,
        f_if: f64,
        acq_sample: u64,
        code_phase: f64,
        doppler: f64,
        start_not_before: u64,
        latch_interval: u64,
    ) -> Result<Self> {
        params.validate()?;
        let code = ca_code(prn)?;
        let periods = 20;
        let len = CA_LEN * periods + 2 * CODE_PAD;
        let table = (0..len).map(|i| code.chip(i as i64 - CODE_PAD as i64) as f64).collect();
        let code_rate = F_CA * (1.0 + doppler / F_L1);
        let step = code_rate / fs;
        // Samples from acq_sample to the next chip-0 crossing at or after the requested start.
        let x_start = code_phase + (start_not_before - acq_sample) as f64 * step;
        let periods_ahead = (x_start / CA_LEN as f64).ceil();
        let k = ((periods_ahead * CA_LEN as f64 - code_phase) / step).ceil();
        let next_sample = acq_sample + k as u64;
        let cp = code_phase + k * step - periods_ahead * CA_LEN as f64;
        let next_latch = next_sample.div_ceil(latch_interval.max(1)) * latch_interval.max(1);
        Ok(TrackingChannel {
            prn,
            params: params.clone(),
            fs,
            f_if,
            table,
            next_sample,
            code_phase: cp,
            period: 0,
            code_rate,
            carrier_phase: 0.0,
            carrier_freq: f_if + doppler,
            carrier: CarrierLoop::new(doppler),
            code: CodeLoop::default(),
            stage: TrackingStage::PullIn,
            stage_ms: 0,
            prev_prompt: None,
            fll_hist: VecDeque::new(),
            lock_num: 0.0,
            lock_den: 0.0,
            edge_hist: [0; 20],
            last_ms_sign: None,
            bit_edge: None,
            bit_acc: C64::new(0.0, 0.0),
            bit_start: None,
            cn0_prompts: Vec::new(),
            cn0_block_start: 0,
            cn0_ratios: VecDeque::new(),
            cn0_m: 0,
            cn0: f64::NAN,
            low_cn0: 0,
            held_lock: false,
            loss_of_lock: false,
            telemetry: Vec::new(),
            bits: Vec::new(),
            epochs: Vec::new(),
            latch_interval: latch_interval.max(1),
            next_latch,
        })
    }

    pub fn params(&self) -> &TrackingParams {
        &self.params
    }

    fn step(&self) -> f64 {
        self.code_rate / self.fs
    }

    /// Code periods in the next interval.
    fn interval_periods(&self) -> i64 {
        let t = self.params.integration_ms as i64;
        match self.bit_edge {
            Some(edge) if t > 1 && self.stage == TrackingStage::Pll => {
                let pos = (self.period - edge).rem_euclid(BITS_PER_PERIOD);
                if pos % t == 0 {
                    t
                } else {
                    1
                }
            }
            _ => 1,
        }
    }

    /// Samples needed by the next interval.
    pub fn next_interval_len(&self) -> usize {
        let m = self.interval_periods();
        ((m as f64 * CA_LEN as f64 - self.code_phase) / self.step()).ceil().max(1.0) as usize
    }

    /// Correlates early, prompt and late replicas over `samples`.
    pub fn correlate(&self, samples: &[Complex32]) -> (C64, C64, C64) {
        let step = self.step();
        let half = self.params.correlator_spacing / 2.0;
        let pad = CODE_PAD as f64;
        let w = C64::from_polar(1.0, -TAU * self.carrier_freq / self.fs);
        let mut z = C64::from_polar(1.0, -TAU * self.carrier_phase.rem_euclid(1.0));
        let (mut e, mut p, mut l) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        let t = &self.table;
        for (k, s) in samples.iter().enumerate() {
            let x = self.code_phase + k as f64 * step + pad;
            let v = C64::new(s.re as f64, s.im as f64) * z;
            e += v * t[(x + half) as usize];
            p += v * t[x as usize];
            l += v * t[(x - half) as usize];
            z *= w;
        }
        (e, p, l)
    }

    /// Processes one interval. `samples` must hold exactly [`Self::next_interval_len`] samples.
    pub fn track_step(&mut self, samples: &[Complex32]) -> StepOutput {
        let n = samples.len();
        let m = self.interval_periods();
        let t = m as f64 * 1e-3;
        let start = self.next_sample;
        let step = self.step();
        let (e, p, l) = self.correlate(samples);

        // Latch any measurement instants inside this interval.
        while self.next_latch < start + n as u64 {
            if self.next_latch >= start {
                let k = (self.next_latch - start) as f64;
                let x = self.code_phase + k * step;
                let whole = (x / CA_LEN as f64).floor();
                let phi = self.carrier_phase + k * self.carrier_freq / self.fs;
                let e_rx = self.next_latch as f64 / self.fs;
                self.epochs.push(ChannelEpoch {
                    sample: self.next_latch,
                    prn: self.prn,
                    period: self.period + whole as i64,
                    chips: x - whole * CA_LEN as f64,
                    carrier_phase: self.f_if * e_rx - phi,
                    doppler: self.carrier.frequency(),
                    cn0: self.cn0,
                    stage: self.stage,
                    bit_synced: self.bit_edge.is_some(),
                    loss_of_lock: self.loss_of_lock,
                });
            }
            self.next_latch += self.latch_interval;
        }

        let dll = dll_discriminator(e, l, self.params.correlator_spacing);
        let pll = pll_discriminator(p);
        let at_bit_edge = match self.bit_edge {
            Some(edge) => (self.period - edge).rem_euclid(BITS_PER_PERIOD) == 0,
            None => true,
        };
        let fll = match self.prev_prompt {
            Some(prev) => fll_discriminator(prev, p, t, !at_bit_edge),
            None => 0.0,
        };

        // Phase lock indicator.
        let (i2, q2) = (p.re * p.re, p.im * p.im);
        self.lock_num += LOCK_SMOOTHING * ((i2 - q2) - self.lock_num);
        self.lock_den += LOCK_SMOOTHING * ((i2 + q2) - self.lock_den);
        let lock = if self.lock_den > 0.0 { self.lock_num / self.lock_den } else { 0.0 };

        // Loop filters.
        let par = &self.params;
        let doppler = match self.stage {
            TrackingStage::PullIn => self.carrier.update(t, 0.0, 0.0, fll, par.fll_pullin_bandwidth),
            TrackingStage::FllAssisted => self.carrier.update(t, pll, par.pll_bandwidth, fll, par.fll_assist_bandwidth),
            TrackingStage::Pll => self.carrier.update(t, pll, par.pll_bandwidth, 0.0, 0.0),
        };
        let dll_out = self.code.update(t, dll, par.dll_bandwidth);

        // Advance the NCOs to the end of the interval.
        self.carrier_phase += n as f64 * self.carrier_freq / self.fs;
        self.code_phase += n as f64 * step - m as f64 * CA_LEN as f64;
        self.carrier_freq = self.f_if + doppler;
        self.code_rate = F_CA * (1.0 + self.carrier.frequency() / F_L1) + dll_out;
        self.next_sample += n as u64;

        self.stage_transition(fll, lock, m);
        self.data_and_cn0(p, m);

        self.prev_prompt = Some(p);
        self.period += m;
        self.telemetry.push(TelemetryRow {
            t: self.next_sample as f64 / self.fs,
            prn: self.prn,
            stage: self.stage,
            integration_ms: m as u32,
            dll,
            pll: pll * 360.0,
            fll,
            doppler: self.carrier.frequency(),
            code_rate: self.code_rate,
            cn0: self.cn0,
            prompt_i: p.re,
            prompt_q: p.im,
            lock_indicator: lock,
            bit_synced: self.bit_edge.is_some(),
            loss_of_lock: self.loss_of_lock,
        });
        StepOutput { dll, pll_deg: pll * 360.0, fll }
    }

    fn stage_transition(&mut self, fll: f64, lock: f64, m: i64) {
        self.stage_ms += m as u64;
        let par = &self.params;
        match self.stage {
            TrackingStage::PullIn => {
                if self.stage_ms >= par.pullin_ms as u64 {
                    self.stage = TrackingStage::FllAssisted;
                    self.stage_ms = 0;
                    self.fll_hist.clear();
                }
            }
            TrackingStage::FllAssisted => {
                self.fll_hist.push_back(fll);
                if self.fll_hist.len() > par.fll_window {
                    self.fll_hist.pop_front();
                }
                if self.fll_hist.len() == par.fll_window {
                    let v: Vec<f64> = self.fll_hist.iter().copied().collect();
                    let mean = v.iter().sum::<f64>() / v.len() as f64;
                    let th = 1.0 / (12.0 * 1e-3 * m as f64);
                    if mean.abs() < par.fll_mean_limit && std_dev(&v) < th && lock > par.lock_threshold {
                        self.stage = TrackingStage::Pll;
                        self.stage_ms = 0;
                    }
                }
            }
            TrackingStage::Pll => {
                if lock < par.lock_threshold {
                    self.stage = TrackingStage::FllAssisted;
                    self.stage_ms = 0;
                    self.fll_hist.clear();
                }
            }
        }
    }

    fn data_and_cn0(&mut self, p: C64, m: i64) {
        let period = self.period;
        // Bit synchronization from sign changes between 1 ms prompts.
        if self.bit_edge.is_none() && m == 1 && self.stage != TrackingStage::PullIn {
            if let Some((prev_period, prev_sign)) = self.last_ms_sign {
                if prev_period + 1 == period && prev_sign * p.re < 0.0 {
                    self.edge_hist[period.rem_euclid(BITS_PER_PERIOD) as usize] += 1;
                }
            }
            self.last_ms_sign = Some((period, p.re));
            let total: u32 = self.edge_hist.iter().sum();
            if total >= self.params.bit_sync_transitions {
                let (best, &count) = self.edge_hist.iter().enumerate().max_by_key(|(_, c)| **c).unwrap();
                if count as f64 >= 0.8 * total as f64 {
                    self.bit_edge = Some(best as i64);
                    // Earlier blocks straddled bit edges.
                    self.cn0_ratios.clear();
                    self.cn0_prompts.clear();
                } else if total > 5 * self.params.bit_sync_transitions {
                    self.edge_hist = [0; 20];
                }
            }
        }
        // Bit accumulation.
        if let Some(edge) = self.bit_edge {
            let pos = (period - edge).rem_euclid(BITS_PER_PERIOD);
            if pos == 0 {
                self.bit_acc = C64::new(0.0, 0.0);
                self.bit_start = Some(period);
            }
            self.bit_acc += p;
            if pos + m == BITS_PER_PERIOD {
                if let Some(start) = self.bit_start.take() {
                    self.bits.push(NavBit { prn: self.prn, period: start, value: (self.bit_acc.re < 0.0) as u8 });
                }
            }
        }
        // C/N0 over 20 ms blocks, aligned to bits once they are known.
        let block_pos = match self.bit_edge {
            Some(edge) => (period - edge).rem_euclid(BITS_PER_PERIOD),
            None => (period - self.cn0_block_start).rem_euclid(BITS_PER_PERIOD),
        };
        if block_pos == 0 {
            self.cn0_prompts.clear();
        }
        self.cn0_prompts.push(p);
        if block_pos + m == BITS_PER_PERIOD {
            let mm = self.cn0_prompts.len();
            if mm != self.cn0_m {
                self.cn0_ratios.clear();
                self.cn0_m = mm;
            }
            if mm >= 2 && mm as i64 * m == BITS_PER_PERIOD {
                self.cn0_ratios.push_back(power_ratio(&self.cn0_prompts));
                if self.cn0_ratios.len() > CN0_BLOCKS {
                    self.cn0_ratios.pop_front();
                }
                if self.cn0_ratios.len() >= 2 {
                    let mean = self.cn0_ratios.iter().sum::<f64>() / self.cn0_ratios.len() as f64;
                    self.cn0 = cn0_from_ratio(mean, mm, m as f64 * 1e-3);
                    let pulling_in = self.stage == TrackingStage::PullIn;
                    self.held_lock |= !pulling_in && self.cn0 >= self.params.loss_cn0;
                    if pulling_in || !self.held_lock || self.cn0 >= self.params.loss_cn0 {
                        self.low_cn0 = 0;
                    } else {
                        self.low_cn0 += 1;
                    }
                    self.loss_of_lock = self.low_cn0 >= self.params.loss_count;
                }
            }
            self.cn0_prompts.clear();
        }
    }

    /// Moves the buffered telemetry, bits and epochs out of the channel.
    pub fn drain(&mut self) -> (Vec<TelemetryRow>, Vec<NavBit>, Vec<ChannelEpoch>) {
        (std::mem::take(&mut self.telemetry), std::mem::take(&mut self.bits), std::mem::take(&mut self.epochs))
    }

    /// Next latch instant this channel has not reached yet.
    pub fn next_latch(&self) -> u64 {
        self.next_latch
    }
}
