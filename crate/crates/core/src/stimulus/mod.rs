//! Synthetic wide-field stimuli: a textured background translating at a
//! constant velocity along one cardinal direction.

mod io;
mod pgm;
mod texture;

pub use io::{frame_file_name, read_sequence, write_sequence, SequenceManifest, SequenceReader, MANIFEST_FILE};
pub use pgm::{read_pgm, write_pgm};
pub use texture::{render as render_texture, TextureKind, TextureSpec};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::field::{Field, LuminanceFrame};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StimulusSpec {
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    /// Hz.
    pub sample_rate: f64,
    pub direction: Direction,
    /// Pixels per second.
    pub velocity: f64,
    pub texture: TextureSpec,
    pub luminance_range: (f64, f64),
}

impl StimulusSpec {
    pub fn new(
        width: usize,
        height: usize,
        frame_count: usize,
        direction: Direction,
        velocity: f64,
        texture: TextureSpec,
    ) -> Self {
        Self {
            width,
            height,
            frame_count,
            sample_rate: 1000.0,
            direction,
            velocity,
            texture,
            luminance_range: (0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::invalid(
                "size",
                format!("frame must have positive area, got {}x{}", self.width, self.height),
            ));
        }
        if self.frame_count == 0 {
            return Err(Error::invalid("frames", "need at least one frame"));
        }
        if !(self.sample_rate > 0.0) || !self.sample_rate.is_finite() {
            return Err(Error::invalid("sample_rate", format!("must be positive, got {}", self.sample_rate)));
        }
        if !(self.velocity >= 0.0) || !self.velocity.is_finite() {
            return Err(Error::invalid("velocity", format!("must be non-negative, got {}", self.velocity)));
        }
        let (lo, hi) = self.luminance_range;
        if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
            return Err(Error::invalid(
                "luminance_range",
                format!("need 0 <= lo <= hi <= 1, got [{lo}, {hi}]"),
            ));
        }
        Ok(())
    }

    /// Displacement in pixels at frame `k`.
    pub fn displacement(&self, k: usize) -> f64 {
        self.velocity * k as f64 / self.sample_rate
    }
}

/// Deterministic frame source for a [`StimulusSpec`].
///
/// Any frame can be rendered independently with [`Stimulus::frame`]; the
/// iterator yields them in timestamp order.
#[derive(Clone, Debug)]
pub struct Stimulus {
    spec: StimulusSpec,
    texture: Field,
    next: usize,
}

impl Stimulus {
    pub fn spec(&self) -> &StimulusSpec {
        &self.spec
    }

    /// The untranslated background, already mapped into the luminance range.
    pub fn texture(&self) -> &Field {
        &self.texture
    }

    pub fn frame(&self, k: usize) -> LuminanceFrame {
        let s = self.spec.displacement(k);
        let (sx, sy) = match self.spec.direction {
            Direction::Right => (s, 0.0),
            Direction::Left => (-s, 0.0),
            Direction::Up => (0.0, -s),
            Direction::Down => (0.0, s),
        };
        let field = translate(&self.texture, sx, sy, self.spec.luminance_range);
        LuminanceFrame::new(field, k as f64 / self.spec.sample_rate)
    }
}

impl Iterator for Stimulus {
    type Item = LuminanceFrame;

    fn next(&mut self) -> Option<LuminanceFrame> {
        if self.next >= self.spec.frame_count {
            return None;
        }
        let f = self.frame(self.next);
        self.next += 1;
        Some(f)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.spec.frame_count - self.next;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Stimulus {}

pub fn generate(spec: &StimulusSpec) -> Result<Stimulus> {
    spec.validate()?;
    let (lo, hi) = spec.luminance_range;
    let texture = texture::render(spec.texture, spec.width, spec.height).map(|t| lo + (hi - lo) * t);
    Ok(Stimulus {
        spec: spec.clone(),
        texture,
        next: 0,
    })
}

/// `out(x, y) = tex(x - sx, y - sy)` on the torus, bilinear between samples.
fn translate(tex: &Field, sx: f64, sy: f64, (lo, hi): (f64, f64)) -> Field {
    let (w, h) = tex.dims();
    let (ix, fx) = split(sx);
    let (iy, fy) = split(sy);
    let mut out = Field::zeros(w, h);
    out.as_mut_slice()
        .par_chunks_mut(w)
        .enumerate()
        .for_each(|(y, row)| {
            // source position y - sy = (y - iy - 1) + (1 - fy)
            let y0 = (y as i64 - iy).rem_euclid(h as i64) as usize;
            let y1 = (y as i64 - iy - 1).rem_euclid(h as i64) as usize;
            for (x, o) in row.iter_mut().enumerate() {
                let x0 = (x as i64 - ix).rem_euclid(w as i64) as usize;
                let x1 = (x as i64 - ix - 1).rem_euclid(w as i64) as usize;
                let top = if fx == 0.0 {
                    tex.get(x0, y0)
                } else {
                    (1.0 - fx) * tex.get(x0, y0) + fx * tex.get(x1, y0)
                };
                let v = if fy == 0.0 {
                    top
                } else {
                    let bottom = if fx == 0.0 {
                        tex.get(x0, y1)
                    } else {
                        (1.0 - fx) * tex.get(x0, y1) + fx * tex.get(x1, y1)
                    };
                    (1.0 - fy) * top + fy * bottom
                };
                *o = v.clamp(lo, hi);
            }
        });
    out
}

/// Split a shift into whole pixels and a fractional part in `[0, 1)`.
fn split(s: f64) -> (i64, f64) {
    let whole = s.floor();
    (whole as i64, s - whole)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(direction: Direction, velocity: f64) -> StimulusSpec {
        StimulusSpec::new(
            40,
            24,
            50,
            direction,
            velocity,
            TextureSpec {
                kind: TextureKind::Clutter,
                seed: 5,
            },
        )
    }

    fn shifted(f: &Field, dx: isize, dy: isize) -> Field {
        Field::from_fn(f.width(), f.height(), |x, y| {
            f.sample(x as isize - dx, y as isize - dy, crate::field::Boundary::Toroidal)
        })
    }

    #[test]
    fn static_sequence_is_constant() {
        let frames: Vec<_> = generate(&spec(Direction::Right, 0.0)).unwrap().collect();
        assert!(frames.iter().all(|f| f.field == frames[0].field));
    }

    #[test]
    fn frame_840_is_integer_shift() {
        let mut s = spec(Direction::Right, 150.0);
        s.width = 200;
        s.frame_count = 900;
        let stim = generate(&s).unwrap();
        let f0 = stim.frame(0);
        let f840 = stim.frame(840);
        assert_eq!(f840.field, shifted(&f0.field, 126, 0));
        assert!((f840.timestamp - 0.84).abs() < 1e-12);
    }

    #[test]
    fn directions_move_the_right_way() {
        // 1000 px/s at 1000 Hz is one pixel per frame.
        let cases = [
            (Direction::Right, (1, 0)),
            (Direction::Left, (-1, 0)),
            (Direction::Up, (0, -1)),
            (Direction::Down, (0, 1)),
        ];
        for (d, (dx, dy)) in cases {
            let stim = generate(&spec(d, 1000.0)).unwrap();
            assert_eq!(stim.frame(3).field, shifted(&stim.frame(0).field, 3 * dx, 3 * dy), "{d}");
        }
    }

    #[test]
    fn subpixel_shift_stays_in_range() {
        let mut s = spec(Direction::Up, 137.0);
        s.luminance_range = (0.2, 0.7);
        for f in generate(&s).unwrap() {
            assert!(f.field.min() >= 0.2 && f.field.max() <= 0.7);
        }
    }

    #[test]
    fn half_pixel_shift_averages_neighbours() {
        let s = spec(Direction::Right, 500.0);
        let stim = generate(&s).unwrap();
        let t = stim.texture();
        let f1 = stim.frame(1);
        let expect = 0.5 * t.get(4, 7) + 0.5 * t.get(3, 7);
        assert!((f1.field.get(4, 7) - expect).abs() < 1e-15);
    }

    #[test]
    fn rejects_zero_area() {
        let mut s = spec(Direction::Right, 10.0);
        s.width = 0;
        assert!(matches!(generate(&s), Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn evaluation_protocol_shape() {
        let s = StimulusSpec::new(
            500,
            250,
            900,
            Direction::Right,
            150.0,
            TextureSpec {
                kind: TextureKind::Clutter,
                seed: 1,
            },
        );
        let stim = generate(&s).unwrap();
        assert_eq!(stim.len(), 900);
        let f = stim.frame(840);
        assert_eq!(f.field.dims(), (500, 250));
        assert!((f.timestamp - 0.840).abs() < 1e-12);
    }
}
