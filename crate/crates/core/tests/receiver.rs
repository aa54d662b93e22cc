//! Receiver behaviour on generated signals.

mod common;

use common::*;
use gnss_twin::receiver::{Receiver, ReceiverConfig, TelemetryRow};
use num_complex::Complex32;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Tracks PRN 12 for `duration` s; from `drop_at` on, the signal is replaced by noise of equal power.
fn track_with_dropout(duration: f64, drop_at: f64) -> Vec<TelemetryRow> {
    let mut cfg = load_config("static.toml");
    cfg.scenario.duration = duration;
    cfg.scenario.prn_allowlist = Some(vec![12]);
    cfg.link.cn0_override = Some(45.0);
    let sc = scenario(&cfg);
    let mut gen = sc.generator().unwrap();
    let mut rx = Receiver::new(ReceiverConfig {
        fs: sc.timing.fs,
        f_if: sc.timing.f_if,
        prns: vec![12],
        ..ReceiverConfig::default()
    })
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let drop_sample = (drop_at * sc.timing.fs) as u64;
    let mut telemetry = Vec::new();
    while let Some(block) = gen.next_block() {
        let block = block.unwrap();
        let power = block.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / block.samples.len() as f64;
        let noise = Normal::new(0.0, (power / 2.0).sqrt()).unwrap();
        let samples: Vec<Complex32> = block
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                if block.start_index + i as u64 >= drop_sample {
                    Complex32::new(noise.sample(&mut rng) as f32, noise.sample(&mut rng) as f32)
                } else {
                    Complex32::new(s.re as f32, s.im as f32)
                }
            })
            .collect();
        telemetry.extend(rx.push(&samples).unwrap().telemetry);
    }
    telemetry.extend(rx.finish().telemetry);
    telemetry
}

#[test]
fn signal_dropout_raises_loss_of_lock_only_after_it() {
    let tel = track_with_dropout(6.0, 3.0);
    assert!(!tel.is_empty());
    let early = tel.iter().filter(|r| r.t < 3.0 && r.loss_of_lock).count();
    let late = tel.iter().filter(|r| r.t > 5.0 && r.loss_of_lock).count();
    let late_rows = tel.iter().filter(|r| r.t > 5.0).count();
    assert_eq!(early, 0, "lock reported lost while the signal was present");
    assert!(late * 2 > late_rows, "{late} of {late_rows} rows after the dropout flag loss of lock");
}

#[test]
fn steady_signal_reaches_phase_lock_and_bit_sync() {
    let tel = track_with_dropout(3.0, f64::INFINITY);
    let last = tel.last().unwrap();
    assert_eq!(last.stage.as_str(), "pll");
    assert!(last.bit_synced);
    assert!(tel.iter().all(|r| !r.loss_of_lock));
    assert!((last.cn0 - 45.0).abs() < 3.0, "C/N0 {}", last.cn0);
}
