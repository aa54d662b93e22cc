use std::f64::consts::TAU;
use std::sync::Arc;

use crate::channel::DelayTrack;
use crate::codegen::{NavMessage, SpreadingCode};
use crate::constants::{CA_LEN, CODES_PER_BIT, F_CA, F_L1};
use crate::error::{Error, Result};
use crate::scenario::ChipShaping;
use crate::time::GpsTime;
use crate::C64;

use super::IqBlock;

/// Samples between exact phase evaluations. Anchors sit on absolute sample
/// indices that are multiples of this value, so the rendered samples do not
/// depend on how a run is split into blocks.
pub const ANCHOR_SPACING: u64 = 32;

const CHIPS_PER_BIT: i64 = CA_LEN as i64 * CODES_PER_BIT as i64;

/// Mapping between sample indices and the receiver clock.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleTiming {
    pub fs: f64,
    pub f_if: f64,
    /// Receiver clock reading of sample 0.
    pub t0: GpsTime,
    /// Sub-millisecond part of the receiver clock reading of sample 0, s.
    pub r0: f64,
    /// Whole milliseconds of week of the receiver clock reading of sample 0.
    pub n0: i64,
}

impl SampleTiming {
    pub fn new(fs: f64, f_if: f64, t0: GpsTime) -> Self {
        let n0 = (t0.tow * 1000.0 + 1e-6).floor() as i64;
        let r0 = (t0.tow - n0 as f64 * 1e-3).max(0.0);
        SampleTiming { fs, f_if, t0, r0, n0 }
    }

    /// Receiver elapsed time of sample `n`, s.
    #[inline]
    pub fn elapsed(&self, n: u64) -> f64 {
        n as f64 / self.fs
    }

    /// Integer chip count separating the local chip axis from the start of `nav`.
    pub fn chip_offset(&self, nav_tow0: f64) -> i64 {
        (self.n0 - (nav_tow0 * 1000.0).round() as i64) * CA_LEN as i64
    }
}

/// Extra delay, gain and phase applied to a replica of a direct signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathShift {
    pub gain: f64,
    /// Excess delay at sample 0, s.
    pub delay: f64,
    /// Excess delay rate, s/s.
    pub ramp: f64,
    /// Carrier phase offset, rad.
    pub phase: f64,
}

impl Default for PathShift {
    fn default() -> Self {
        PathShift { gain: 1.0, delay: 0.0, ramp: 0.0, phase: 0.0 }
    }
}

/// Snapshot of one satellite signal at a sample instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelState {
    pub prn: u8,
    /// Code phase, chips in [0, 1023).
    pub code_phase: f64,
    /// Carrier phase, cycles in [0, 1).
    pub carrier_phase: f64,
    pub doppler: f64,
    pub doppler_rate: f64,
    pub amplitude: f64,
    /// Apparent code delay, s.
    pub tau: f64,
    pub data_bit_index: i64,
}

/// Everything needed to render one satellite signal (direct or reflected) at any sample.
#[derive(Debug, Clone)]
pub struct ChannelSource {
    pub prn: u8,
    pub track: Arc<DelayTrack>,
    pub code: Arc<SpreadingCode>,
    pub nav: Arc<NavMessage>,
    pub timing: SampleTiming,
    pub shaping: ChipShaping,
    pub path: PathShift,
    offset_chips: i64,
}

#[derive(Clone, Copy)]
struct Anchor {
    x: f64,
    phase: f64,
    amp: f64,
}

impl ChannelSource {
    pub fn new(
        track: Arc<DelayTrack>,
        code: Arc<SpreadingCode>,
        nav: Arc<NavMessage>,
        timing: SampleTiming,
        shaping: ChipShaping,
    ) -> Self {
        let offset_chips = timing.chip_offset(nav.tow0);
        ChannelSource { prn: track.prn, track, code, nav, timing, shaping, path: PathShift::default(), offset_chips }
    }

    /// Copy of this source with a path shift applied.
    pub fn with_path(&self, path: PathShift) -> Self {
        ChannelSource { path, ..self.clone() }
    }

    /// Code position (chips on the local axis) and carrier phase (cycles) at elapsed time `e`.
    #[inline]
    fn anchor_at(&self, e: f64) -> Result<Anchor> {
        let st = self.track.eval(e)?;
        let extra = self.path.delay + self.path.ramp * e;
        let x = (self.timing.r0 + e - st.d_code - extra) * F_CA;
        let phase = self.timing.f_if * e - F_L1 * (st.d_phase + extra) + self.path.phase / TAU;
        Ok(Anchor { x, phase, amp: st.amplitude * self.path.gain })
    }

    #[inline]
    fn anchor(&self, n: u64) -> Result<Anchor> {
        self.anchor_at(self.timing.elapsed(n))
    }

    /// Data-modulated chip value of local chip `c`.
    #[inline]
    fn symbol(&self, c: i64) -> f64 {
        let g = c + self.offset_chips;
        let chip = self.code.chips[g.rem_euclid(CA_LEN as i64) as usize] as f64;
        chip * self.nav.symbol(g.div_euclid(CHIPS_PER_BIT))
    }

    /// Adds this signal to `out`, whose first element is absolute sample `n_start`.
    pub fn render_into(&self, n_start: u64, out: &mut [C64]) -> Result<()> {
        if out.is_empty() {
            return Ok(());
        }
        let n_end = n_start + out.len() as u64;
        let mut a = n_start - n_start % ANCHOR_SPACING;
        let mut pa = self.anchor(a)?;
        let inv = 1.0 / ANCHOR_SPACING as f64;
        let mut cache_c = i64::MIN;
        let mut cache_v = 0.0;
        let mut sym = |c: i64| -> f64 {
            if c != cache_c {
                cache_c = c;
                cache_v = self.symbol(c);
            }
            cache_v
        };
        while a < n_end {
            let b = a + ANCHOR_SPACING;
            let pb = self.anchor(b)?;
            let dx = (pb.x - pa.x) * inv;
            let damp = (pb.amp - pa.amp) * inv;
            let (s, c) = (TAU * pa.phase.rem_euclid(1.0)).sin_cos();
            let mut z = C64::new(c, s);
            let (s, c) = (TAU * (pb.phase - pa.phase) * inv).sin_cos();
            let step = C64::new(c, s);
            let k0 = n_start.saturating_sub(a);
            for _ in 0..k0 {
                z *= step;
            }
            let k1 = (n_end - a).min(ANCHOR_SPACING);
            for k in k0..k1 {
                let x = pa.x + k as f64 * dx;
                let amp = pa.amp + k as f64 * damp;
                let v = match self.shaping {
                    ChipShaping::Point => sym(x.floor() as i64),
                    ChipShaping::Area => {
                        let lo = x - 0.5 * dx;
                        let hi = x + 0.5 * dx;
                        let c_lo = lo.floor();
                        let c_hi = hi.floor();
                        if c_lo == c_hi {
                            sym(c_hi as i64)
                        } else {
                            let f = (hi - c_hi) / dx;
                            let v_lo = sym(c_lo as i64);
                            let v_hi = sym(c_hi as i64);
                            v_lo + f * (v_hi - v_lo)
                        }
                    }
                };
                out[(a + k - n_start) as usize] += z * (amp * v);
                z *= step;
            }
            a = b;
            pa = pb;
        }
        Ok(())
    }

    /// Signal state at absolute sample `n`.
    pub fn state_at(&self, n: u64) -> Result<ChannelState> {
        let e = self.timing.elapsed(n);
        let p = self.anchor_at(e)?;
        let h = 1e-3;
        let st = self.track.eval(e)?;
        let rate = |e: f64| -> Result<f64> { Ok(self.track.eval(e)?.rate_phase + self.path.ramp) };
        let doppler = -F_L1 * (st.rate_phase + self.path.ramp);
        let lo = (e - h).max(self.track.e0);
        let hi = (e + h).min(self.track.e_last());
        let doppler_rate = if hi > lo { -F_L1 * (rate(hi)? - rate(lo)?) / (hi - lo) } else { 0.0 };
        let c = p.x.floor() as i64 + self.offset_chips;
        Ok(ChannelState {
            prn: self.prn,
            code_phase: p.x.rem_euclid(CA_LEN as f64),
            carrier_phase: p.phase.rem_euclid(1.0),
            doppler,
            doppler_rate,
            amplitude: p.amp,
            tau: st.d_code + self.path.delay + self.path.ramp * e,
            data_bit_index: c.div_euclid(CHIPS_PER_BIT),
        })
    }
}

/// Renders `n` samples of one source starting at `state`'s successor sample.
///
/// Returns the contribution block and the state at the first sample after it.
pub fn synthesize_channel_block(src: &ChannelSource, n_start: u64, n: usize) -> Result<(IqBlock, ChannelState)> {
    if n == 0 {
        return Err(Error::InvalidInput("block length must be positive".into()));
    }
    let mut samples = vec![C64::new(0.0, 0.0); n];
    src.render_into(n_start, &mut samples)?;
    let next = src.state_at(n_start + n as u64)?;
    Ok((IqBlock::new(samples, src.timing.fs, src.timing.t0, n_start), next))
}
