//! Counter-based RNG streams for embarrassingly parallel Monte-Carlo.
//!
//! Every trial owns the stream `(master_seed, trial_index)`. The sampler is
//! ChaCha8: the 256-bit key comes from the standard SplitMix64 expansion of
//! the master seed (`seed_from_u64`) and the 64-bit ChaCha stream counter is
//! set to the trial index. Streams are independent by construction, cheap to
//! create, and replayable at any time from the two integers alone, which is
//! what makes common-random-number comparisons across architectures and
//! worker counts exact.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::NumericsError;

/// Address of one reproducible random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngStream {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl RngStream {
    /// Fresh sampler positioned at the start of the stream.
    pub fn sampler(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_index);
        rng
    }
}

/// Stream for one trial of one experiment.
pub fn derive_stream(master_seed: u64, trial_index: u64) -> RngStream {
    RngStream {
        master_seed,
        stream_index: trial_index,
    }
}

/// `n` i.i.d. draws of CN(0, 1), i.e. unit total variance split evenly
/// between the real and imaginary parts. Replaying the same stream replays
/// the same vector.
pub fn complex_gaussian_vector(
    stream: &RngStream,
    n: usize,
) -> Result<Vec<Complex64>, NumericsError> {
    if n == 0 {
        return Err(NumericsError::Empty {
            what: "complex Gaussian vector length",
        });
    }
    let mut rng = stream.sampler();
    Ok(draw_complex_gaussian(&mut rng, n))
}

/// Draw order is fixed: per entry, real part then imaginary part.
pub(crate) fn draw_complex_gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
        .collect()
}

// ── tests ──────────────────────────────────────────────────────────────────
