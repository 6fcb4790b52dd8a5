//! Toroidal background textures. Every texture is periodic over the frame
//! size so translated copies wrap seamlessly.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Boundary, Field};
use crate::kernels::gaussian2d;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextureKind {
    /// Dense pixel clutter, lightly smoothed.
    Clutter,
    /// Overlapping rectangles of random luminance.
    Blocks,
    /// Superposed mid-frequency gratings at random orientations.
    Stripes,
}

impl TextureKind {
    pub const ALL: [TextureKind; 3] = [TextureKind::Clutter, TextureKind::Blocks, TextureKind::Stripes];

    pub fn name(self) -> &'static str {
        match self {
            TextureKind::Clutter => "clutter",
            TextureKind::Blocks => "blocks",
            TextureKind::Stripes => "stripes",
        }
    }
}

impl fmt::Display for TextureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TextureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clutter" | "clutter-noise" => Ok(TextureKind::Clutter),
            "blocks" => Ok(TextureKind::Blocks),
            "stripes" => Ok(TextureKind::Stripes),
            other => Err(Error::invalid(
                "texture",
                format!("expected clutter, blocks or stripes, got `{other}`"),
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextureSpec {
    pub kind: TextureKind,
    pub seed: u64,
}

/// Render a `width × height` texture with values spanning `[0, 1]`.
pub fn render(spec: TextureSpec, width: usize, height: usize) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let raw = match spec.kind {
        TextureKind::Clutter => clutter(&mut rng, width, height),
        TextureKind::Blocks => blocks(&mut rng, width, height),
        TextureKind::Stripes => stripes(&mut rng, width, height),
    };
    stretch(raw)
}

fn clutter(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Field {
    let noise = Field::from_fn(width, height, |_, _| rng.gen::<f64>());
    gaussian2d(0.8, 3)
        .expect("fixed kernel parameters are valid")
        .convolve(&noise, Boundary::Toroidal)
}

fn blocks(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Field {
    let mut f = Field::filled(width, height, 0.5);
    let count = (width * height / 60).max(4);
    let max_side = 24.min(width.max(height)).max(2);
    for _ in 0..count {
        let bw = rng.gen_range(2..=max_side.min(width.max(2)));
        let bh = rng.gen_range(2..=max_side.min(height.max(2)));
        let x0 = rng.gen_range(0..width);
        let y0 = rng.gen_range(0..height);
        let v = rng.gen::<f64>();
        for dy in 0..bh {
            for dx in 0..bw {
                f.set((x0 + dx) % width, (y0 + dy) % height, v);
            }
        }
    }
    f
}

fn stripes(rng: &mut ChaCha8Rng, width: usize, height: usize) -> Field {
    use std::f64::consts::TAU;
    // Integer cycle counts keep each grating periodic on the torus.
    let mut gratings = Vec::new();
    let (w, h) = (width as f64, height as f64);
    for _ in 0..10_000 {
        if gratings.len() == 32 {
            break;
        }
        let cx = rng.gen_range(-(width as i64) / 4..=(width as i64) / 4) as f64;
        let cy = rng.gen_range(-(height as i64) / 4..=(height as i64) / 4) as f64;
        let freq = ((cx / w).powi(2) + (cy / h).powi(2)).sqrt();
        // wavelengths between 5 and 24 px
        if !(1.0 / 24.0..=1.0 / 5.0 + 1e-12).contains(&freq) {
            continue;
        }
        let phase = rng.gen::<f64>() * TAU;
        gratings.push((cx, cy, phase, 1.0 / freq));
    }
    if gratings.is_empty() {
        gratings.push((1.0, 0.0, 0.0, 1.0));
    }
    let mut f = Field::from_fn(width, height, |x, y| {
        gratings
            .iter()
            .map(|&(cx, cy, phase, amp)| amp * (TAU * (cx * x as f64 / w + cy * y as f64 / h) + phase).cos())
            .sum()
    });
    // soft saturation sharpens the grating edges
    let mean = f.sum() / f.len().max(1) as f64;
    f.as_mut_slice().iter_mut().for_each(|v| *v = (*v - mean).tanh());
    f
}

fn stretch(mut f: Field) -> Field {
    let (lo, hi) = (f.min(), f.max());
    let span = hi - lo;
    if span > 0.0 && span.is_finite() {
        f.as_mut_slice().iter_mut().for_each(|v| *v = ((*v - lo) / span).clamp(0.0, 1.0));
    } else {
        f.as_mut_slice().iter_mut().for_each(|v| *v = 0.5);
    }
    f
}
