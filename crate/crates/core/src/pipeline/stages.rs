//! Retina, lamina and medulla stages.

use crate::error::{Error, Result};
use crate::field::{Boundary, Field};
use crate::kernels::{SpaceTimeKernel, SpatialFilter, SpatialKernel, TemporalKernel};

use super::temporal::TemporalFilter;

/// ON and OFF half-wave rectified channels at one instant.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelPair {
    pub on: Field,
    pub off: Field,
    pub timestamp: f64,
}

impl ChannelPair {
    pub fn dims(&self) -> (usize, usize) {
        self.on.dims()
    }
}

/// Enforces strictly increasing timestamps spaced by `dt`.
#[derive(Clone, Debug)]
pub struct Clock {
    dt: f64,
    last: Option<f64>,
}

impl Clock {
    pub fn new(dt: f64) -> Self {
        Self { dt, last: None }
    }

    pub fn last(&self) -> Option<f64> {
        self.last
    }

    pub fn tick(&mut self, t: f64) -> Result<()> {
        if let Some(prev) = self.last {
            if !(t > prev) {
                return Err(Error::Sequencing {
                    previous: prev,
                    got: t,
                    reason: "timestamps must strictly increase",
                });
            }
            if ((t - prev) - self.dt).abs() > 1e-3 * self.dt {
                return Err(Error::Sequencing {
                    previous: prev,
                    got: t,
                    reason: "frame interval differs from the model time step",
                });
            }
        }
        self.last = Some(t);
        Ok(())
    }
}

/// Photoreceptor blur.
pub fn retina_stage(frame: &Field, kernel: &SpatialKernel, boundary: Boundary) -> Field {
    kernel.convolve(frame, boundary)
}

/// Temporal high-pass followed by centre-surround lateral inhibition.
#[derive(Clone, Debug)]
pub struct LaminaStage {
    highpass: TemporalFilter,
    inhibition: Vec<(SpatialFilter, TemporalFilter)>,
    boundary: Boundary,
    clock: Clock,
}

/// Lamina outputs at one instant: the high-passed signal and its
/// laterally inhibited version.
#[derive(Clone, Debug)]
pub struct LaminaOutput {
    pub contrast: Field,
    pub inhibited: Field,
}

impl LaminaStage {
    pub fn new(highpass: &TemporalKernel, inhibition: &SpaceTimeKernel, boundary: Boundary) -> Self {
        let terms = inhibition
            .terms
            .iter()
            .map(|(s, t)| (SpatialFilter::Dense(s.clone()), t.clone()))
            .collect();
        Self::with_filters(highpass, terms, boundary)
    }

    /// Like [`LaminaStage::new`], with each spatial factor given as a
    /// (possibly factored) [`SpatialFilter`].
    pub fn with_filters(
        highpass: &TemporalKernel,
        inhibition: Vec<(SpatialFilter, TemporalKernel)>,
        boundary: Boundary,
    ) -> Self {
        Self {
            highpass: TemporalFilter::new(highpass),
            inhibition: inhibition
                .into_iter()
                .map(|(s, t)| (s, TemporalFilter::new(&t)))
                .collect(),
            boundary,
            clock: Clock::new(highpass.dt()),
        }
    }

    pub fn push(&mut self, photoreceptors: &Field, timestamp: f64) -> Result<LaminaOutput> {
        self.clock.tick(timestamp)?;
        let contrast = self.highpass.push(photoreceptors);
        let mut inhibited = Field::zeros(contrast.width(), contrast.height());
        for (spatial, temporal) in &mut self.inhibition {
            let term = temporal.push(&spatial.convolve(&contrast, self.boundary));
            for (acc, v) in inhibited.as_mut_slice().iter_mut().zip(term.as_slice()) {
                *acc += v;
            }
        }
        Ok(LaminaOutput { contrast, inhibited })
    }

    pub fn max_depth(&self) -> usize {
        self.inhibition
            .iter()
            .map(|(_, t)| t.depth())
            .chain(std::iter::once(self.highpass.depth()))
            .max()
            .unwrap_or(0)
    }
}

/// `on = (|x| + x) / 2`, `off = (|x| - x) / 2`.
pub fn medulla_split(inhibited: &Field, timestamp: f64) -> ChannelPair {
    ChannelPair {
        on: inhibited.map(|v| (v.abs() + v) / 2.0),
        off: inhibited.map(|v| (v.abs() - v) / 2.0),
        timestamp,
    }
}

/// Keep only samples equal to the maximum of their `(2r+1)²` neighbourhood.
///
/// Every sample that attains its window maximum survives, so plateaus are
/// kept whole. Errors on negative input.
pub fn max_operation(channel: &Field, omega_half: usize, boundary: Boundary) -> Result<Field> {
    if let Some((i, v)) = channel.as_slice().iter().enumerate().find(|(_, &v)| v < 0.0) {
        return Err(Error::Contract(format!(
            "max operation needs a non-negative field; sample ({}, {}) is {v}",
            i % channel.width().max(1),
            i / channel.width().max(1),
        )));
    }
    let window = window_max(channel, omega_half, boundary);
    let mut out = channel.clone();
    for (o, &m) in out.as_mut_slice().iter_mut().zip(window.as_slice()) {
        if *o != m {
            *o = 0.0;
        }
    }
    Ok(out)
}

/// Sliding square-window maximum, computed as a row pass then a column pass.
pub fn window_max(f: &Field, r: usize, boundary: Boundary) -> Field {
    let (w, h) = f.dims();
    let r = r as isize;
    let rows = Field::from_fn(w, h, |x, y| {
        (-r..=r)
            .map(|dx| f.get(boundary.resolve(x as isize + dx, w), y))
            .fold(f64::NEG_INFINITY, f64::max)
    });
    Field::from_fn(w, h, |x, y| {
        (-r..=r)
            .map(|dy| rows.get(x, boundary.resolve(y as isize + dy, h)))
            .fold(f64::NEG_INFINITY, f64::max)
    })
}

/// Gamma delay applied to both channels.
#[derive(Clone, Debug)]
pub struct DelayStage {
    on: TemporalFilter,
    off: TemporalFilter,
    clock: Clock,
}

impl DelayStage {
    pub fn new(kernel: &TemporalKernel) -> Self {
        Self {
            on: TemporalFilter::new(kernel),
            off: TemporalFilter::new(kernel),
            clock: Clock::new(kernel.dt()),
        }
    }

    pub fn push(&mut self, channels: &ChannelPair) -> Result<ChannelPair> {
        self.clock.tick(channels.timestamp)?;
        Ok(ChannelPair {
            on: self.on.push(&channels.on),
            off: self.off.push(&channels.off),
            timestamp: channels.timestamp,
        })
    }
}
