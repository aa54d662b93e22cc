use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex32;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::table::{temp_beside, write_atomic};
use crate::synth::{dequantize_bytes, QuantizedIq};
use crate::time::GpsTime;

pub const IF_FORMAT: &str = "gnss-twin-if";
pub const IF_FORMAT_VERSION: u32 = 1;

/// Sidecar metadata describing an IF sample file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfMetadata {
    pub format: String,
    pub version: u32,
    /// Samples per second.
    pub sample_rate: f64,
    /// Intermediate frequency, Hz.
    pub if_frequency: f64,
    pub epoch_week: u32,
    /// Receiver clock reading of the first sample, seconds of week.
    pub epoch_tow: f64,
    /// Bits per I or Q component; samples are interleaved I then Q, little-endian.
    pub bits: u8,
    pub sample_count: u64,
    pub seed: u64,
    pub config_digest: String,
    pub full_scale_sigma: f64,
    pub clipped_components: u64,
    pub ionosphere: bool,
    pub troposphere: bool,
    pub carrier_advance: bool,
    pub noise: bool,
    pub prns: Vec<u8>,
}

impl IfMetadata {
    pub fn epoch(&self) -> GpsTime {
        GpsTime::new(self.epoch_week, self.epoch_tow)
    }

    pub fn bytes_per_sample(&self) -> u64 {
        2 * (self.bits as u64).div_ceil(8)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != IF_FORMAT || self.version != IF_FORMAT_VERSION {
            return Err(Error::InvalidInput(format!(
                "metadata format `{} v{}` is not `{IF_FORMAT} v{IF_FORMAT_VERSION}`",
                self.format, self.version
            )));
        }
        if self.bits != 8 && self.bits != 16 {
            return Err(Error::InvalidInput(format!("unsupported sample width {} bits", self.bits)));
        }
        if !(self.sample_rate > 0.0) {
            return Err(Error::InvalidInput("sample rate must be positive".into()));
        }
        Ok(())
    }

    /// Sidecar path of an IF file: the file name with `.json` appended.
    pub fn sidecar_path(if_path: &Path) -> PathBuf {
        let mut s = if_path.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, |w| {
            serde_json::to_writer_pretty(&mut *w, self)?;
            writeln!(w).map_err(|e| Error::io(path, e))
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m: IfMetadata = serde_json::from_str(&text)?;
        m.validate()?;
        Ok(m)
    }
}

/// Streams quantized blocks into a temporary file that becomes `path` on [`IfWriter::finish`].
pub struct IfWriter {
    path: PathBuf,
    tmp: Option<tempfile::NamedTempFile>,
    written: u64,
}

impl IfWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let tmp = temp_beside(path)?;
        Ok(IfWriter { path: path.to_path_buf(), tmp: Some(tmp), written: 0 })
    }

    pub fn write_block(&mut self, q: &QuantizedIq) -> Result<()> {
        let tmp = self.tmp.as_mut().expect("writer already finished");
        let bytes = q.to_bytes();
        let mut w = BufWriter::new(tmp.as_file_mut());
        w.write_all(&bytes).map_err(|e| Error::io(&self.path, e))?;
        w.flush().map_err(|e| Error::io(&self.path, e))?;
        self.written += (q.data.len() / 2) as u64;
        Ok(())
    }

    /// Complex samples written so far.
    pub fn samples_written(&self) -> u64 {
        self.written
    }

    /// Syncs and renames the file into place.
    pub fn finish(mut self) -> Result<u64> {
        let tmp = self.tmp.take().expect("writer already finished");
        tmp.as_file().sync_all().map_err(|e| Error::io(&self.path, e))?;
        tmp.persist(&self.path).map_err(|e| Error::io(&self.path, e.error))?;
        Ok(self.written)
    }
}

/// Sequential reader of an IF file in whole-sample blocks.
pub struct IfReader {
    file: File,
    pub meta: IfMetadata,
    /// Complex samples present in the file.
    pub available: u64,
    /// True when the file holds fewer samples than the metadata declares or ends mid-sample.
    pub truncated: bool,
    position: u64,
    bytes: Vec<u8>,
}

impl IfReader {
    pub fn open(path: &Path, meta: IfMetadata) -> Result<Self> {
        meta.validate()?;
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let len = file.metadata().map_err(|e| Error::io(path, e))?.len();
        let bps = meta.bytes_per_sample();
        let available = (len / bps).min(meta.sample_count);
        let truncated = len % bps != 0 || len / bps < meta.sample_count;
        Ok(IfReader { file, meta, available, truncated, position: 0, bytes: Vec::new() })
    }

    /// Reads up to `n` samples into `out`; returns false at the end of the data.
    pub fn read_block(&mut self, n: usize, out: &mut Vec<Complex32>) -> Result<bool> {
        let n = (n as u64).min(self.available - self.position) as usize;
        if n == 0 {
            out.clear();
            return Ok(false);
        }
        self.bytes.resize(n * self.meta.bytes_per_sample() as usize, 0);
        self.file.read_exact(&mut self.bytes).map_err(|e| Error::io(PathBuf::from("<if file>"), e))?;
        dequantize_bytes(&self.bytes, self.meta.bits, out);
        self.position += n as u64;
        Ok(true)
    }

    pub fn position(&self) -> u64 {
        self.position
    }
}
