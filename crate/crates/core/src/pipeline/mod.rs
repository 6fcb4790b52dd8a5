//! Streaming retina → lamina → medulla → lobula pipeline.
//!
//! A [`Pipeline`] is a single-writer stream processor: feed frames in
//! timestamp order, one per model time step, and it returns the LPTC
//! responses of whichever variants it was built for.

mod config;
mod stages;
mod temporal;

pub use config::ModelConfig;
pub use stages::{
    max_operation, medulla_split, retina_stage, window_max, ChannelPair, Clock, DelayStage, LaminaOutput,
    LaminaStage,
};
pub use temporal::TemporalFilter;

use crate::correlator::{
    detector_responses, estimate_direction_with_floor, lptc_output, DirectionEstimate, DirectionalField, Variant,
};
use crate::error::Result;
use crate::field::{Field, LuminanceFrame};
use crate::kernels::{
    exponential_kernel, gamma_horizon, gamma_kernel_with_horizon, gaussian1d, gaussian2d, gaussian_radius,
    SeparableKernel, SpaceTimeKernel, SpatialFilter, SpatialKernel, TemporalKernel,
};

/// LPTC sums at or below `NO_MOTION_FLOOR · pixels · max(I)²` are reported
/// as no motion.
pub const NO_MOTION_FLOOR: f64 = 1e-12;

/// Every kernel the pipeline convolves with, built from a [`ModelConfig`].
#[derive(Clone, Debug)]
pub struct PipelineKernels {
    pub retina: SpatialKernel,
    pub highpass: TemporalKernel,
    pub inhibition: SpaceTimeKernel,
    pub delay: TemporalKernel,
    /// `retina` as a separable filter.
    pub retina_filter: SpatialFilter,
    /// The inhibition spatial factors rewritten with separable Gaussians:
    /// the negative part is `G_σ - G_2σ` minus the (small) positive part.
    pub inhibition_filters: [SpatialFilter; 2],
}

impl PipelineKernels {
    pub fn build(cfg: &ModelConfig) -> Result<Self> {
        cfg.validate()?;
        let horizon = cfg.temporal_horizon();
        let dt = cfg.dt;
        let norm_s = |k: SpatialKernel| if cfg.renormalize_kernels { k.renormalized() } else { k };
        let norm_t = |k: TemporalKernel| if cfg.renormalize_kernels { k.renormalized() } else { k };

        let retina = norm_s(gaussian2d(cfg.sigma1, gaussian_radius(cfg.sigma1))?);
        let separable = |sigma: f64, radius: usize| -> Result<SeparableKernel> {
            let mut g = gaussian1d(sigma, radius)?;
            if cfg.renormalize_kernels {
                let s: f64 = g.iter().sum();
                g.iter_mut().for_each(|v| *v /= s);
            }
            SeparableKernel::new(g.clone(), g)
        };
        let retina_filter = SpatialFilter::Separable(separable(cfg.sigma1, gaussian_radius(cfg.sigma1))?);

        let fast = norm_t(gamma_kernel_with_horizon(cfg.n1, cfg.tau1, dt, horizon)?);
        let slow = norm_t(gamma_kernel_with_horizon(cfg.n2, cfg.tau2, dt, horizon)?);
        let highpass = fast.difference(&slow);

        let surround_sigma = 2.0 * cfg.sigma2;
        let radius = gaussian_radius(surround_sigma);
        let centre = norm_s(gaussian2d(cfg.sigma2, radius)?);
        let surround = norm_s(gaussian2d(surround_sigma, radius)?);
        let dog = centre.difference(&surround);
        let inhibition = SpaceTimeKernel {
            terms: vec![
                (dog.positive_part(), norm_t(exponential_kernel(cfg.alpha1, dt, horizon)?)),
                (dog.negative_part(), norm_t(exponential_kernel(cfg.alpha2, dt, horizon)?)),
            ],
        };

        let positive = dog.positive_part();
        let inhibition_filters = [
            SpatialFilter::Dense(positive.clone()),
            SpatialFilter::Sum(vec![
                (1.0, SpatialFilter::Separable(separable(cfg.sigma2, radius)?)),
                (-1.0, SpatialFilter::Separable(separable(surround_sigma, radius)?)),
                (-1.0, SpatialFilter::Dense(positive)),
            ]),
        ];

        let delay = norm_t(gamma_kernel_with_horizon(
            cfg.n3,
            cfg.tau3,
            dt,
            gamma_horizon(cfg.n3, cfg.tau3),
        )?);
        Ok(Self {
            retina,
            highpass,
            inhibition,
            delay,
            retina_filter,
            inhibition_filters,
        })
    }

    /// Longest temporal kernel, in taps.
    pub fn max_temporal_len(&self) -> usize {
        self.highpass
            .len()
            .max(self.inhibition.temporal_len())
            .max(self.delay.len())
    }
}

/// Which model variants a pipeline computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Variants {
    pub classic: bool,
    pub improved: bool,
}

impl Variants {
    pub const BOTH: Variants = Variants {
        classic: true,
        improved: true,
    };

    pub fn only(v: Variant) -> Self {
        Variants {
            classic: v == Variant::Classic,
            improved: v == Variant::Improved,
        }
    }

    pub fn iter(self) -> impl Iterator<Item = Variant> {
        [(self.classic, Variant::Classic), (self.improved, Variant::Improved)]
            .into_iter()
            .filter_map(|(on, v)| on.then_some(v))
    }
}

/// Responses for one input frame.
#[derive(Clone, Debug)]
pub struct FrameOutput {
    pub index: usize,
    pub timestamp: f64,
    /// The frame precedes the temporal horizon; its responses still carry
    /// start-up transients.
    pub warmup: bool,
    pub classic: Option<DirectionalField>,
    pub improved: Option<DirectionalField>,
    /// Absolute no-motion threshold for this frame's LPTC sums.
    pub motion_floor: f64,
    /// Intermediate signals, when stage capture is enabled.
    pub stages: Vec<(&'static str, Field)>,
}

impl FrameOutput {
    pub fn field(&self, v: Variant) -> Option<&DirectionalField> {
        match v {
            Variant::Classic => self.classic.as_ref(),
            Variant::Improved => self.improved.as_ref(),
        }
    }

    pub fn estimate(&self, v: Variant) -> Option<DirectionEstimate> {
        self.field(v)
            .map(|f| estimate_direction_with_floor(f, self.motion_floor))
    }
}

pub struct Pipeline {
    cfg: ModelConfig,
    kernels: PipelineKernels,
    dims: (usize, usize),
    variants: Variants,
    lamina: LaminaStage,
    classic_delay: Option<DelayStage>,
    improved_delay: Option<DelayStage>,
    clock: Clock,
    next_index: usize,
    warmup_frames: usize,
    capture_stages: bool,
}

impl Pipeline {
    pub fn new(cfg: &ModelConfig, width: usize, height: usize, variants: Variants) -> Result<Self> {
        let kernels = PipelineKernels::build(cfg)?;
        let lamina = LaminaStage::with_filters(
            &kernels.highpass,
            kernels
                .inhibition_filters
                .iter()
                .cloned()
                .zip(kernels.inhibition.terms.iter().map(|(_, t)| t.clone()))
                .collect(),
            cfg.boundary,
        );
        let delay = |on: bool| on.then(|| DelayStage::new(&kernels.delay));
        Ok(Self {
            cfg: cfg.clone(),
            classic_delay: delay(variants.classic),
            improved_delay: delay(variants.improved),
            kernels,
            dims: (width, height),
            variants,
            lamina,
            clock: Clock::new(cfg.dt),
            next_index: 0,
            warmup_frames: cfg.warmup_frames(),
            capture_stages: false,
        })
    }

    pub fn with_stage_capture(mut self, on: bool) -> Self {
        self.capture_stages = on;
        self
    }

    pub fn config(&self) -> &ModelConfig {
        &self.cfg
    }

    pub fn kernels(&self) -> &PipelineKernels {
        &self.kernels
    }

    pub fn variants(&self) -> Variants {
        self.variants
    }

    pub fn warmup_frames(&self) -> usize {
        self.warmup_frames
    }

    pub fn process(&mut self, frame: &LuminanceFrame) -> Result<FrameOutput> {
        frame.field.ensure_dims(self.dims)?;
        self.clock.tick(frame.timestamp)?;
        let t = frame.timestamp;
        let boundary = self.cfg.boundary;
        let d = self.cfg.baseline_d;
        let capture = self.capture_stages;
        let mut stages = Vec::new();

        let photo = self.kernels.retina_filter.convolve(&frame.field, boundary);
        let lamina = self.lamina.push(&photo, t)?;
        let channels = medulla_split(&lamina.inhibited, t);
        if capture {
            stages.push(("retina", photo));
            stages.push(("lamina_contrast", lamina.contrast));
            stages.push(("lamina_inhibited", lamina.inhibited));
        }

        let classic = match &mut self.classic_delay {
            Some(delay) => {
                let delayed = delay.push(&channels)?;
                let (t4, t5) = detector_responses(&channels, &delayed, d, boundary, Variant::Classic)?;
                if capture {
                    stages.push(("on_delayed", delayed.on));
                    stages.push(("off_delayed", delayed.off));
                }
                Some(lptc_output(&t4, &t5)?)
            }
            None => None,
        };

        let improved = match &mut self.improved_delay {
            Some(delay) => {
                let sparse = ChannelPair {
                    on: max_operation(&channels.on, self.cfg.omega_half, boundary)?,
                    off: max_operation(&channels.off, self.cfg.omega_half, boundary)?,
                    timestamp: t,
                };
                let delayed = delay.push(&sparse)?;
                let (t4, t5) = detector_responses(&sparse, &delayed, d, boundary, Variant::Improved)?;
                if capture {
                    stages.push(("on_max", sparse.on));
                    stages.push(("off_max", sparse.off));
                    stages.push(("on_max_delayed", delayed.on));
                    stages.push(("off_max_delayed", delayed.off));
                }
                Some(lptc_output(&t4, &t5)?)
            }
            None => None,
        };

        if capture {
            stages.insert(3, ("on", channels.on));
            stages.insert(4, ("off", channels.off));
        }

        let peak = frame.field.max_abs();
        let index = self.next_index;
        self.next_index += 1;
        Ok(FrameOutput {
            index,
            timestamp: t,
            warmup: index < self.warmup_frames,
            classic,
            improved,
            motion_floor: NO_MOTION_FLOOR * frame.field.len() as f64 * peak * peak,
            stages,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Boundary;

    fn max_diff(a: &SpatialKernel, b: &SpatialKernel) -> f64 {
        let r = a.radius().max(b.radius()) as isize;
        let mut m: f64 = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                m = m.max((a.tap(dx, dy) - b.tap(dx, dy)).abs());
            }
        }
        m
    }

    #[test]
    fn factored_filters_equal_dense_kernels() {
        for renormalize in [false, true] {
            let cfg = ModelConfig {
                renormalize_kernels: renormalize,
                ..ModelConfig::default()
            };
            let k = PipelineKernels::build(&cfg).unwrap();
            assert!(max_diff(&k.retina_filter.to_dense(), &k.retina) < 1e-15);
            for (f, (dense, _)) in k.inhibition_filters.iter().zip(&k.inhibition.terms) {
                assert!(max_diff(&f.to_dense(), dense) < 1e-15);
            }
        }
    }

    #[test]
    fn factored_convolution_matches_dense() {
        let k = PipelineKernels::build(&ModelConfig::default()).unwrap();
        let input = Field::from_fn(23, 17, |x, y| ((x * 13 + y * 7) % 11) as f64 / 11.0 - 0.4);
        for boundary in [Boundary::Replicate, Boundary::Toroidal] {
            let pairs = [
                (&k.retina_filter, &k.retina),
                (&k.inhibition_filters[0], &k.inhibition.terms[0].0),
                (&k.inhibition_filters[1], &k.inhibition.terms[1].0),
            ];
            for (fast, dense) in pairs {
                let a = fast.convolve(&input, boundary);
                let b = dense.convolve(&input, boundary);
                for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                    assert!((x - y).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn delay_kernel_uses_its_own_horizon() {
        let cfg = ModelConfig::default();
        let k = PipelineKernels::build(&cfg).unwrap();
        assert!(k.delay.len() < k.highpass.len());
        assert!((k.delay.sum() - 1.0).abs() < 1e-3);
    }
}
