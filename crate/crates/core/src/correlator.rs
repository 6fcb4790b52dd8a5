//! Delay-and-correlate detectors, LPTC summation and the global direction
//! estimate.
//!
//! For direction `θ` the delayed sample is read one baseline *behind* the
//! current pixel, at `(x, y) - d·step(θ)`: a feature travelling along `θ`
//! passes that neighbour first, so its delayed trace there lines up with
//! its current trace here.

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::field::{Boundary, Field};
use crate::pipeline::ChannelPair;

/// Which model produced a response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Plain two-quadrant detector.
    Classic,
    /// Two-quadrant detector fed by local-maximum sparsified channels.
    Improved,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Classic => "classic",
            Variant::Improved => "improved",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "classic" => Ok(Variant::Classic),
            "improved" => Ok(Variant::Improved),
            other => Err(Error::invalid("model", format!("expected classic or improved, got `{other}`"))),
        }
    }
}

/// Per-pixel responses for each cardinal direction, indexed by [`Direction::index`].
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalField {
    pub values: [Field; 4],
    pub timestamp: f64,
    pub variant: Variant,
}

impl DirectionalField {
    pub fn zeros(width: usize, height: usize, timestamp: f64, variant: Variant) -> Self {
        Self {
            values: std::array::from_fn(|_| Field::zeros(width, height)),
            timestamp,
            variant,
        }
    }

    pub fn get(&self, d: Direction) -> &Field {
        &self.values[d.index()]
    }

    pub fn dims(&self) -> (usize, usize) {
        self.values[0].dims()
    }

    /// Maximum over all pixels and directions.
    pub fn max(&self) -> f64 {
        self.values.iter().map(Field::max).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sums(&self) -> [f64; 4] {
        std::array::from_fn(|i| self.values[i].sum())
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|f| f.scale(c));
        out
    }
}

/// `T4(x) = on(x) · on_D(x')`, `T5(x) = off(x) · off_D(x')` for one direction.
pub fn correlate(
    current: &ChannelPair,
    delayed: &ChannelPair,
    baseline_d: usize,
    theta: Direction,
    boundary: Boundary,
) -> Result<(Field, Field)> {
    let dims = current.dims();
    for f in [&current.off, &delayed.on, &delayed.off] {
        f.ensure_dims(dims)?;
    }
    if current.timestamp != delayed.timestamp {
        return Err(Error::Contract(format!(
            "correlating channels from t={} with delayed channels from t={}",
            current.timestamp, delayed.timestamp
        )));
    }
    let (sx, sy) = theta.step();
    let d = baseline_d as isize;
    let (ox, oy) = (-sx * d, -sy * d);
    let product = |now: &Field, past: &Field| {
        Field::from_fn(dims.0, dims.1, |x, y| {
            let v = now.get(x, y);
            if v == 0.0 {
                0.0
            } else {
                v * past.sample(x as isize + ox, y as isize + oy, boundary)
            }
        })
    };
    Ok((product(&current.on, &delayed.on), product(&current.off, &delayed.off)))
}

/// T4 and T5 responses for all four directions.
pub fn detector_responses(
    current: &ChannelPair,
    delayed: &ChannelPair,
    baseline_d: usize,
    boundary: Boundary,
    variant: Variant,
) -> Result<(DirectionalField, DirectionalField)> {
    let (w, h) = current.dims();
    let mut t4 = DirectionalField::zeros(w, h, current.timestamp, variant);
    let mut t5 = t4.clone();
    for d in Direction::ALL {
        let (on, off) = correlate(current, delayed, baseline_d, d, boundary)?;
        t4.values[d.index()] = on;
        t5.values[d.index()] = off;
    }
    Ok((t4, t5))
}

/// `F = T4 + T5`, pointwise per direction.
pub fn lptc_output(t4: &DirectionalField, t5: &DirectionalField) -> Result<DirectionalField> {
    if t4.variant != t5.variant {
        return Err(Error::Contract(format!(
            "cannot sum {} T4 responses with {} T5 responses",
            t4.variant, t5.variant
        )));
    }
    if t4.timestamp != t5.timestamp {
        return Err(Error::Contract(format!(
            "T4 at t={} and T5 at t={} differ in time",
            t4.timestamp, t5.timestamp
        )));
    }
    let mut out = t4.clone();
    for (acc, add) in out.values.iter_mut().zip(&t5.values) {
        add.ensure_dims(acc.dims())?;
        for (a, b) in acc.as_mut_slice().iter_mut().zip(add.as_slice()) {
            *a += b;
        }
    }
    Ok(out)
}

/// Divide by the global maximum; an all-zero field is returned unchanged.
pub fn normalize(field: &DirectionalField) -> DirectionalField {
    let m = field.max();
    let mut out = field.clone();
    if m > 0.0 && m.is_finite() {
        for f in &mut out.values {
            f.as_mut_slice().iter_mut().for_each(|v| *v /= m);
        }
    }
    out
}

/// Sums closer than this (relative to the best) count as tied.
pub const TIE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct DirectionEstimate {
    /// `None` when there is no motion signal at all.
    pub theta: Option<Direction>,
    pub timestamp: f64,
    /// Whole-field response per direction.
    pub sums: [f64; 4],
    /// Best over second-best sum; infinite when the runner-up is zero,
    /// NaN when there is no motion.
    pub margin: f64,
    /// Another direction matched the winner within [`TIE_TOLERANCE`].
    pub tie: bool,
}

impl DirectionEstimate {
    pub fn is_no_motion(&self) -> bool {
        self.theta.is_none()
    }
}

/// Argmax of the per-direction sums. Ties go to the first of right, up,
/// left, down.
pub fn estimate_direction(field: &DirectionalField) -> DirectionEstimate {
    estimate_direction_with_floor(field, 0.0)
}

/// As [`estimate_direction`], but reports no motion when every sum is at
/// most `floor`.
pub fn estimate_direction_with_floor(field: &DirectionalField, floor: f64) -> DirectionEstimate {
    estimate_from_sums(field.sums(), field.timestamp, floor)
}

pub fn estimate_from_sums(sums: [f64; 4], timestamp: f64, floor: f64) -> DirectionEstimate {
    let best = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(best > floor) {
        return DirectionEstimate {
            theta: None,
            timestamp,
            sums,
            margin: f64::NAN,
            tie: false,
        };
    }
    let near = |s: f64| best - s <= TIE_TOLERANCE * best;
    let winner = Direction::ALL
        .into_iter()
        .find(|d| near(sums[d.index()]))
        .expect("the maximum is within tolerance of itself");
    let tie = Direction::ALL
        .into_iter()
        .filter(|d| near(sums[d.index()]))
        .count()
        > 1;
    let second = Direction::ALL
        .into_iter()
        .filter(|&d| d != winner)
        .map(|d| sums[d.index()])
        .fold(f64::NEG_INFINITY, f64::max);
    let top = sums[winner.index()];
    let margin = if second > 0.0 { top / second } else { f64::INFINITY };
    DirectionEstimate {
        theta: Some(winner),
        timestamp,
        sums,
        margin,
        tie,
    }
}

pub const DIRECTION_CSV_HEADER: &str = "t_ms,theta_rad,sum_0,sum_90,sum_180,sum_270,margin,tie,warmup";

/// One CSV row; no-motion leaves `theta_rad` and `margin` empty.
pub fn direction_csv_row(e: &DirectionEstimate, warmup: bool) -> String {
    let theta = e.theta.map(|d| d.radians().to_string()).unwrap_or_default();
    let margin = if e.margin.is_nan() {
        String::new()
    } else if e.margin.is_infinite() {
        "inf".to_string()
    } else {
        e.margin.to_string()
    };
    format!(
        "{},{},{},{},{},{},{},{},{}",
        fmt_ms(e.timestamp),
        theta,
        e.sums[0],
        e.sums[1],
        e.sums[2],
        e.sums[3],
        margin,
        e.tie as u8,
        warmup as u8
    )
}

fn fmt_ms(t: f64) -> String {
    let ms = t * 1000.0;
    let r = ms.round();
    if (ms - r).abs() < 1e-6 {
        format!("{}", r as i64)
    } else {
        format!("{ms}")
    }
}

/// Streams direction estimates as CSV.
pub struct DirectionCsvWriter<W: Write> {
    out: W,
}

impl<W: Write> DirectionCsvWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{DIRECTION_CSV_HEADER}")?;
        Ok(Self { out })
    }

    pub fn write(&mut self, e: &DirectionEstimate, warmup: bool) -> std::io::Result<()> {
        writeln!(self.out, "{}", direction_csv_row(e, warmup))
    }

    pub fn finish(mut self) -> std::io::Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
