//! Benchmark inputs shared by the criterion targets in `benches/`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tqd_core::{Field, LuminanceFrame};

/// Uniform noise in `[0, 1)`.
pub fn noise_field(width: usize, height: usize, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Field::from_fn(width, height, |_, _| rng.gen())
}

pub fn noise_frames(width: usize, height: usize, n: usize, dt: f64) -> Vec<LuminanceFrame> {
    (0..n)
        .map(|k| LuminanceFrame::new(noise_field(width, height, k as u64), k as f64 * dt))
        .collect()
}
