//! Dense 2D scalar grids and the boundary rules shared by every spatial stage.
//!
//! Storage is row-major with row 0 at the top of the image. "Up" in the
//! direction convention therefore means decreasing row index.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How samples outside the grid are resolved.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// Clamp to the nearest edge sample.
    #[default]
    Replicate,
    /// Wrap around, treating the grid as a torus.
    Toroidal,
}

impl Boundary {
    /// Map a possibly out-of-range coordinate onto `0..n`.
    #[inline]
    pub fn resolve(self, i: isize, n: usize) -> usize {
        debug_assert!(n > 0);
        match self {
            Boundary::Replicate => i.clamp(0, n as isize - 1) as usize,
            Boundary::Toroidal => i.rem_euclid(n as isize) as usize,
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Replicate => "replicate",
            Boundary::Toroidal => "toroidal",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "replicate" => Ok(Boundary::Replicate),
            "toroidal" => Ok(Boundary::Toroidal),
            other => Err(Error::invalid(
                "boundary",
                format!("expected `replicate` or `toroidal`, got `{other}`"),
            )),
        }
    }
}

/// A dense `width × height` grid of reals.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Field {
    pub fn zeros(width: usize, height: usize) -> Self {
        Self::filled(width, height, 0.0)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_vec(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::invalid(
                "data",
                format!(
                    "{} samples cannot fill a {width}x{height} grid",
                    data.len()
                ),
            ));
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        self.data[y * self.width + x] = value;
    }

    /// Sample at a signed coordinate, resolving out-of-range positions with `boundary`.
    #[inline]
    pub fn sample(&self, x: isize, y: isize, boundary: Boundary) -> f64 {
        self.get(
            boundary.resolve(x, self.width),
            boundary.resolve(y, self.height),
        )
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, y: usize) -> &[f64] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.data.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn ensure_dims(&self, expected: (usize, usize)) -> Result<()> {
        if self.dims() != expected {
            return Err(Error::Shape {
                expected,
                got: self.dims(),
            });
        }
        Ok(())
    }

    /// Copy with `pad` extra samples on every side, filled per `boundary`.
    pub fn padded(&self, pad: usize, boundary: Boundary) -> Field {
        let p = pad as isize;
        Field::from_fn(self.width + 2 * pad, self.height + 2 * pad, |x, y| {
            self.sample(x as isize - p, y as isize - p, boundary)
        })
    }
}

/// One time sample of the visual field.
#[derive(Clone, Debug, PartialEq)]
pub struct LuminanceFrame {
    pub field: Field,
    /// Seconds since the start of the sequence.
    pub timestamp: f64,
}

impl LuminanceFrame {
    pub fn new(field: Field, timestamp: f64) -> Self {
        Self { field, timestamp }
    }

    pub fn width(&self) -> usize {
        self.field.width()
    }

    pub fn height(&self) -> usize {
        self.field.height()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_resolution() {
        assert_eq!(Boundary::Replicate.resolve(-3, 5), 0);
        assert_eq!(Boundary::Replicate.resolve(7, 5), 4);
        assert_eq!(Boundary::Toroidal.resolve(-1, 5), 4);
        assert_eq!(Boundary::Toroidal.resolve(5, 5), 0);
        assert_eq!(Boundary::Toroidal.resolve(-11, 5), 4);
    }

    #[test]
    fn from_vec_rejects_wrong_length() {
        assert!(Field::from_vec(3, 2, vec![0.0; 5]).is_err());
        assert!(Field::from_vec(3, 2, vec![0.0; 6]).is_ok());
    }

    #[test]
    fn padding_replicates_edges() {
        let f = Field::from_fn(2, 2, |x, y| (x + 10 * y) as f64);
        let p = f.padded(1, Boundary::Replicate);
        assert_eq!(p.dims(), (4, 4));
        assert_eq!(p.get(0, 0), 0.0);
        assert_eq!(p.get(3, 3), 11.0);
        let t = f.padded(1, Boundary::Toroidal);
        assert_eq!(t.get(0, 0), 11.0);
    }
}
