//! Wide-field background motion direction estimation with two-quadrant
//! detectors (TQD).
//!
//! The classic TQD correlates ON and OFF channels of a band-passed image
//! stream with delayed copies of their neighbours. The improved variant
//! first sparsifies both channels to their local maxima, which removes
//! most of the spurious correlations cluttered backgrounds produce.
//!
//! ```no_run
//! use tqd_core::{generate, ModelConfig, Pipeline, Variants, StimulusSpec, Direction,
//!                TextureKind, TextureSpec, Variant};
//!
//! let spec = StimulusSpec::new(200, 100, 300, Direction::Right, 250.0,
//!                              TextureSpec { kind: TextureKind::Clutter, seed: 7 });
//! let mut pipeline = Pipeline::new(&ModelConfig::default(), 200, 100, Variants::BOTH)?;
//! for frame in generate(&spec)? {
//!     let out = pipeline.process(&frame)?;
//!     if !out.warmup {
//!         println!("{:?}", out.estimate(Variant::Improved).unwrap().theta);
//!     }
//! }
//! # Ok::<(), tqd_core::Error>(())
//! ```

// `!(x > 0.0)` is used deliberately so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod correlator;
pub mod direction;
pub mod error;
pub mod field;
pub mod kernels;
pub mod metrics;
pub mod pipeline;
pub mod stimulus;

pub use correlator::{
    correlate, estimate_direction, estimate_direction_with_floor, lptc_output, normalize, DirectionEstimate,
    DirectionalField, Variant,
};
pub use direction::Direction;
pub use error::{Error, Result};
pub use field::{Boundary, Field, LuminanceFrame};
pub use kernels::{SpaceTimeKernel, SpatialKernel, TemporalKernel};
pub use metrics::{MetricsReport, ThresholdSchedule};
pub use pipeline::{ChannelPair, FrameOutput, ModelConfig, Pipeline, PipelineKernels, Variants};
pub use stimulus::{generate, read_sequence, write_sequence, StimulusSpec, TextureKind, TextureSpec};
