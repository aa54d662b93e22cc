use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::C64;

/// Samples per independent noise stream.
pub const NOISE_CHUNK: u64 = 4096;

/// Circular complex white Gaussian noise addressed by absolute sample index.
///
/// Each chunk of [`NOISE_CHUNK`] samples draws from its own ChaCha stream, so
/// any sample range can be produced without generating the ones before it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSource {
    pub seed: u64,
    /// Standard deviation per quadrature component.
    pub sigma: f64,
}

impl NoiseSource {
    /// Noise of total variance `n0 * fs`.
    pub fn new(seed: u64, n0: f64, fs: f64) -> Self {
        NoiseSource { seed, sigma: (n0 * fs / 2.0).sqrt() }
    }

    /// Adds noise for absolute samples `n_start..n_start + out.len()`.
    pub fn add_into(&self, n_start: u64, out: &mut [C64]) {
        if self.sigma == 0.0 || out.is_empty() {
            return;
        }
        let n_end = n_start + out.len() as u64;
        let mut chunk = n_start / NOISE_CHUNK;
        while chunk * NOISE_CHUNK < n_end {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(chunk);
            let first = chunk * NOISE_CHUNK;
            let last = (first + NOISE_CHUNK).min(n_end);
            for n in first..last {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                if n >= n_start {
                    out[(n - n_start) as usize] += C64::new(re * self.sigma, im * self.sigma);
                }
            }
            chunk += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_are_consistent() {
        let src = NoiseSource { seed: 7, sigma: 1.0 };
        let mut whole = vec![C64::new(0.0, 0.0); 10_000];
        src.add_into(1000, &mut whole);
        let mut part = vec![C64::new(0.0, 0.0); 3000];
        src.add_into(5000, &mut part);
        assert_eq!(&whole[4000..7000], &part[..]);
    }
}
