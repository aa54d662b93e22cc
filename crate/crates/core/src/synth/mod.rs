//! IF sample synthesis: per-satellite rendering, mixing, noise and quantization.

mod channel;
mod noise;
mod quantize;

pub use channel::{synthesize_channel_block, ChannelSource, ChannelState, PathShift, SampleTiming, ANCHOR_SPACING};
pub use noise::{NoiseSource, NOISE_CHUNK};
pub use quantize::{dequantize_bytes, quantize_iq, QuantizedIq, Quantizer};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::impairments::InterferenceSpec;
use crate::time::GpsTime;
use crate::C64;

/// Samples rendered per parallel work item.
pub const MIX_CHUNK: usize = 16_384;

/// A block of complex samples.
#[derive(Debug, Clone, PartialEq)]
pub struct IqBlock {
    pub samples: Vec<C64>,
    pub fs: f64,
    /// Receiver clock reading of sample 0 of the run.
    pub t0: GpsTime,
    /// Absolute index of the first sample.
    pub start_index: u64,
}

impl IqBlock {
    pub fn new(samples: Vec<C64>, fs: f64, t0: GpsTime, start_index: u64) -> Self {
        IqBlock { samples, fs, t0, start_index }
    }

    /// Receiver clock reading of the first sample.
    pub fn epoch(&self) -> GpsTime {
        self.t0.add_seconds(self.start_index as f64 / self.fs)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Position and size of a block in the sample stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockLayout {
    pub fs: f64,
    pub t0: GpsTime,
    pub start_index: u64,
    pub len: usize,
}

/// Sums `contributions` in order and adds complex white noise of total variance `n0 * fs`.
pub fn mix_and_noise(contributions: &[IqBlock], layout: BlockLayout, n0: f64, seed: u64) -> Result<IqBlock> {
    for c in contributions {
        if c.fs != layout.fs || c.start_index != layout.start_index || c.len() != layout.len || c.t0 != layout.t0 {
            return Err(Error::InvalidInput("contribution metadata does not match the block layout".into()));
        }
    }
    let mut samples = vec![C64::new(0.0, 0.0); layout.len];
    for c in contributions {
        for (o, s) in samples.iter_mut().zip(&c.samples) {
            *o += s;
        }
    }
    NoiseSource::new(seed, n0, layout.fs).add_into(layout.start_index, &mut samples);
    Ok(IqBlock::new(samples, layout.fs, layout.t0, layout.start_index))
}

/// Streaming generator of the composite signal.
#[derive(Debug, Clone)]
pub struct Generator {
    pub timing: SampleTiming,
    pub sources: Vec<ChannelSource>,
    pub interference: Vec<InterferenceSpec>,
    pub noise: NoiseSource,
    pub total_samples: u64,
    pub block_samples: usize,
    pub exec: Execution,
    next: u64,
}

impl Generator {
    pub fn new(
        timing: SampleTiming,
        sources: Vec<ChannelSource>,
        interference: Vec<InterferenceSpec>,
        noise: NoiseSource,
        total_samples: u64,
        block_samples: usize,
    ) -> Self {
        Generator {
            timing,
            sources,
            interference,
            noise,
            total_samples,
            block_samples: block_samples.max(1),
            exec: Execution::default(),
            next: 0,
        }
    }

    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.exec = exec;
        self
    }

    /// Index of the next sample to be produced.
    pub fn position(&self) -> u64 {
        self.next
    }

    /// Renders the composite for any absolute sample range.
    pub fn render(&self, n_start: u64, len: usize) -> Result<Vec<C64>> {
        let chunks: Vec<(u64, usize)> =
            (0..len).step_by(MIX_CHUNK).map(|k| (n_start + k as u64, MIX_CHUNK.min(len - k))).collect();
        let parts = exec::map(self.exec, &chunks, |&(s, n)| -> Result<Vec<C64>> {
            let mut buf = vec![C64::new(0.0, 0.0); n];
            for src in &self.sources {
                src.render_into(s, &mut buf)?;
            }
            for i in &self.interference {
                i.add_into(&self.timing, s, &mut buf);
            }
            self.noise.add_into(s, &mut buf);
            Ok(buf)
        });
        let mut out = Vec::with_capacity(len);
        for p in parts {
            out.extend(p?);
        }
        Ok(out)
    }

    /// Next block of the stream, or `None` at the end.
    pub fn next_block(&mut self) -> Option<Result<IqBlock>> {
        if self.next >= self.total_samples {
            return None;
        }
        let len = (self.total_samples - self.next).min(self.block_samples as u64) as usize;
        let start = self.next;
        self.next += len as u64;
        Some(self.render(start, len).map(|s| IqBlock::new(s, self.timing.fs, self.timing.t0, start)))
    }
}

impl Iterator for Generator {
    type Item = Result<IqBlock>;

    fn next(&mut self) -> Option<Self::Item> {
        self.next_block()
    }
}
