use crate::error::{Error, Result};
use crate::C64;

use super::IqBlock;

/// Signed integer I/Q samples, interleaved I then Q.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizedIq {
    pub bits: u8,
    pub data: Vec<i16>,
    /// Number of components that saturated.
    pub clipped: u64,
    /// Multiplier applied before rounding.
    pub scale: f64,
}

impl QuantizedIq {
    /// Little-endian byte image (one byte per component for 8-bit).
    pub fn to_bytes(&self) -> Vec<u8> {
        match self.bits {
            8 => self.data.iter().map(|&v| v as i8 as u8).collect(),
            _ => self.data.iter().flat_map(|v| v.to_le_bytes()).collect(),
        }
    }
}

/// Fixed-scale quantizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantizer {
    pub bits: u8,
    pub scale: f64,
}

impl Quantizer {
    /// Maps `full_scale_sigma * sigma` (per-component standard deviation) to full scale.
    pub fn new(bits: u8, full_scale_sigma: f64, sigma: f64) -> Result<Self> {
        if bits != 8 && bits != 16 {
            return Err(Error::InvalidInput(format!("unsupported quantization {bits} bits")));
        }
        if !(full_scale_sigma > 0.0) {
            return Err(Error::InvalidInput("full_scale_sigma must be positive".into()));
        }
        let scale = if sigma > 0.0 { full_scale(bits) / (full_scale_sigma * sigma) } else { 1.0 };
        Ok(Quantizer { bits, scale })
    }

    pub fn full_scale(&self) -> f64 {
        full_scale(self.bits)
    }

    pub fn quantize(&self, samples: &[C64]) -> QuantizedIq {
        let fs = full_scale(self.bits);
        let mut clipped = 0u64;
        let mut data = Vec::with_capacity(samples.len() * 2);
        let mut q = |v: f64| {
            let r = (v * self.scale).round();
            if r.abs() > fs {
                clipped += 1;
            }
            r.clamp(-fs, fs) as i16
        };
        for s in samples {
            data.push(q(s.re));
            data.push(q(s.im));
        }
        QuantizedIq { bits: self.bits, data, clipped, scale: self.scale }
    }
}

fn full_scale(bits: u8) -> f64 {
    ((1i32 << (bits - 1)) - 1) as f64
}

/// Quantizes a block using its own measured per-component standard deviation.
pub fn quantize_iq(block: &IqBlock, bits: u8, full_scale_sigma: f64) -> Result<QuantizedIq> {
    let n = block.samples.len().max(1) as f64;
    let power: f64 = block.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / n;
    let sigma = (power / 2.0).sqrt();
    Ok(Quantizer::new(bits, full_scale_sigma, sigma)?.quantize(&block.samples))
}

/// Converts interleaved little-endian integer I/Q bytes to complex samples.
pub fn dequantize_bytes(bytes: &[u8], bits: u8, out: &mut Vec<num_complex::Complex32>) {
    out.clear();
    match bits {
        8 => {
            out.extend(bytes.chunks_exact(2).map(|p| num_complex::Complex32::new(p[0] as i8 as f32, p[1] as i8 as f32)))
        }
        _ => out.extend(bytes.chunks_exact(4).map(|p| {
            num_complex::Complex32::new(
                i16::from_le_bytes([p[0], p[1]]) as f32,
                i16::from_le_bytes([p[2], p[3]]) as f32,
            )
        })),
    }
}
