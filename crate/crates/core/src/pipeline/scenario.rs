use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use crate::channel::{AntennaPattern, DelayTrack, TruthModel, TruthSettings};
use crate::codegen::{build_nav_message, ca_code, quantize_ephemeris, quantize_klobuchar, NavMessage};
use crate::error::{Error, Result};
use crate::impairments::{apply_multipath, InterferenceSpec, MultipathSpec, ReflectedPath};
use crate::scenario::{
    build_trajectory, load_ephemerides, BroadcastEphemeris, EphemerisSet, KlobucharCoeffs, ScenarioConfig, Trajectory,
    DEFAULT_KLOBUCHAR,
};
use crate::synth::{ChannelSource, Generator, NoiseSource, Quantizer, SampleTiming};

/// Margin of truth tracks beyond the sample span, s.
const TRACK_MARGIN: f64 = 0.05;

/// A fully resolved scenario: ephemerides, trajectory, truth model and signal sources.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Broadcast (LNAV-quantized) ephemerides of every available satellite.
    pub ephemerides: BTreeMap<u8, BroadcastEphemeris>,
    pub klobuchar: KlobucharCoeffs,
    pub trajectory: Arc<Trajectory>,
    pub truth: TruthModel,
    pub timing: SampleTiming,
    /// Satellites synthesized, ascending PRN.
    pub visible: Vec<u8>,
    pub navs: BTreeMap<u8, Arc<NavMessage>>,
    pub tracks: BTreeMap<u8, Arc<DelayTrack>>,
    pub total_samples: u64,
}

/// Loads the navigation file named by `config` (relative to `base_dir`) and builds the scenario.
pub fn build_scenario(config: &ScenarioConfig, base_dir: &Path) -> Result<Scenario> {
    config.validate_all()?;
    let path = base_dir.join(&config.scenario.ephemeris);
    let set = load_ephemerides(&path, config.start_epoch())?;
    build_scenario_with(config, &set, base_dir)
}

fn load_pattern(p: &Option<std::path::PathBuf>, base_dir: &Path, default: AntennaPattern) -> Result<AntennaPattern> {
    match p {
        Some(p) => AntennaPattern::load(&base_dir.join(p)),
        None => Ok(default),
    }
}

/// Builds the scenario from an already loaded ephemeris set.
pub fn build_scenario_with(config: &ScenarioConfig, set: &EphemerisSet, base_dir: &Path) -> Result<Scenario> {
    config.validate_all()?;
    let t0 = config.start_epoch();
    let sig = &config.signal;
    let atm = &config.atmosphere;
    let duration = config.scenario.duration;

    let mut klob = set.klobuchar.unwrap_or(DEFAULT_KLOBUCHAR);
    if let Some(a) = atm.klobuchar_alpha {
        klob.alpha = a;
    }
    if let Some(b) = atm.klobuchar_beta {
        klob.beta = b;
    }
    let klobuchar = quantize_klobuchar(&klob);
    let ephemerides: BTreeMap<u8, BroadcastEphemeris> = set
        .ephemerides
        .iter()
        .filter(|(prn, _)| (1..=32).contains(*prn))
        .map(|(prn, e)| (*prn, quantize_ephemeris(e)))
        .collect();

    let trajectory = Arc::new(build_trajectory(&config.trajectory, t0.tow - config.clock.bias0, duration)?);
    let settings = TruthSettings {
        t0,
        clock_bias0: config.clock.bias0,
        clock_drift: config.clock.drift,
        ionosphere: atm.ionosphere,
        troposphere: atm.troposphere,
        carrier_advance: atm.carrier_advance,
        sagnac: atm.sagnac,
        pressure_hpa: atm.pressure_hpa,
        temperature_c: atm.temperature_c,
        relative_humidity: atm.relative_humidity,
        magnus: atm.magnus,
        klobuchar,
        tx_power: config.link.tx_power,
        l_atm: config.link.l_atm,
        n0: config.n0(),
        cn0_override: config.link.cn0_override,
        tx_pattern: load_pattern(&config.link.tx_pattern, base_dir, AntennaPattern::default_satellite())?,
        rx_pattern: load_pattern(&config.link.rx_pattern, base_dir, AntennaPattern::default_receiver())?,
    };
    let truth = TruthModel::new(settings, trajectory.clone());
    let timing = SampleTiming::new(sig.sample_rate, sig.if_center, t0);
    let total_samples = (duration * sig.sample_rate).round() as u64;

    let mask = config.scenario.elevation_mask_deg.to_radians();
    let mut visible = Vec::new();
    for (prn, eph) in &ephemerides {
        if let Some(allow) = &config.scenario.prn_allowlist {
            if !allow.contains(prn) {
                continue;
            }
        }
        if eph.health != 0 {
            continue;
        }
        let p = match truth.evaluate(eph, 0.0) {
            Ok(p) => p,
            Err(_) => continue,
        };
        if p.elevation >= mask {
            visible.push(*prn);
        }
    }

    let e_first = -TRACK_MARGIN;
    let e_last = duration + TRACK_MARGIN;
    let tx_first = t0.tow - config.clock.bias0 - 0.2;
    let nav_tow0 = (tx_first / 6.0).floor() * 6.0;
    let mut navs = BTreeMap::new();
    let mut tracks = BTreeMap::new();
    for prn in &visible {
        let eph = &ephemerides[prn];
        navs.insert(*prn, Arc::new(build_nav_message(eph, &klobuchar, nav_tow0, t0.tow + duration + 1.0 - nav_tow0)));
        tracks.insert(*prn, Arc::new(truth.delay_track(eph, e_first, e_last)?));
    }
    Ok(Scenario {
        config: config.clone(),
        ephemerides,
        klobuchar,
        trajectory,
        truth,
        timing,
        visible,
        navs,
        tracks,
        total_samples,
    })
}

impl Scenario {
    pub fn ephemeris(&self, prn: u8) -> Result<&BroadcastEphemeris> {
        self.ephemerides.get(&prn).ok_or_else(|| Error::NoEphemeris(format!("PRN {prn} not in the navigation data")))
    }

    /// Carrier power of `prn` at the first sample, W.
    pub fn carrier_power(&self, prn: u8) -> Result<f64> {
        Ok(self.truth.evaluate(self.ephemeris(prn)?, 0.0)?.carrier_power)
    }

    /// Direct and reflected signal sources in PRN order.
    pub fn sources(&self) -> Result<Vec<ChannelSource>> {
        let mut out = Vec::new();
        for prn in &self.visible {
            let direct = ChannelSource::new(
                self.tracks[prn].clone(),
                Arc::new(ca_code(*prn)?),
                self.navs[prn].clone(),
                self.timing,
                self.config.signal.chip_shaping,
            );
            match self.config.multipath.iter().find(|m| m.prn == *prn) {
                Some(m) => {
                    let spec = MultipathSpec {
                        prn: *prn,
                        paths: m
                            .paths
                            .iter()
                            .map(|p| ReflectedPath { alpha: p.alpha, delay: p.delay, phase: p.phase, ramp: p.ramp })
                            .collect(),
                    };
                    out.extend(apply_multipath(&direct, &spec)?);
                }
                None => out.push(direct),
            }
        }
        Ok(out)
    }

    /// Interference sources with amplitudes resolved.
    pub fn interference(&self) -> Result<Vec<InterferenceSpec>> {
        let mut out = Vec::new();
        for c in &self.config.interference {
            let amplitude = match (c.amplitude, c.js_db) {
                (Some(a), _) => a,
                (None, Some(js)) => {
                    let prn = c
                        .reference_prn
                        .or_else(|| self.visible.first().copied())
                        .ok_or_else(|| Error::InvalidInput("J/S needs a reference satellite".into()))?;
                    (self.carrier_power(prn)? * 10f64.powf(js / 10.0)).sqrt()
                }
                (None, None) => 0.0,
            };
            let spec = InterferenceSpec {
                kind: c.kind,
                amplitude,
                f0: c.f0,
                sweep_rate: c.sweep_rate,
                phase: c.phase,
                beta: c.beta,
                f_m: c.f_m,
                pulse_width: c.pulse_width,
                repetition_interval: c.repetition_interval,
                duty_pattern: c.duty_pattern.clone(),
                start: c.start,
                stop: c.stop.unwrap_or(self.config.scenario.duration),
            };
            spec.validate(self.timing.fs)?;
            out.push(spec);
        }
        Ok(out)
    }

    pub fn noise(&self) -> NoiseSource {
        if self.config.noise.enabled {
            NoiseSource::new(self.config.scenario.seed, self.config.n0(), self.timing.fs)
        } else {
            NoiseSource { seed: self.config.scenario.seed, sigma: 0.0 }
        }
    }

    /// Quantizer with a fixed scale derived from the expected composite power.
    pub fn quantizer(&self) -> Result<Quantizer> {
        let mut power = if self.config.noise.enabled { self.config.n0() * self.timing.fs } else { 0.0 };
        for s in self.sources()? {
            let a = s.track.knots[0].amplitude * s.path.gain;
            power += a * a;
        }
        for i in self.interference()? {
            power += i.amplitude * i.amplitude;
        }
        Quantizer::new(self.config.signal.quantization, self.config.signal.full_scale_sigma, (power / 2.0).sqrt())
    }

    pub fn block_samples(&self) -> usize {
        (self.config.signal.block_duration * self.timing.fs).round().max(1.0) as usize
    }

    pub fn generator(&self) -> Result<Generator> {
        Ok(Generator::new(
            self.timing,
            self.sources()?,
            self.interference()?,
            self.noise(),
            self.total_samples,
            self.block_samples(),
        ))
    }
}
