mod common;

use common::{as_frames, batch_run, max_abs_diff, random_sequence};
use tqd_core::kernels::{gamma_density, gaussian_radius};
use tqd_core::pipeline::{DelayStage, Variants};
use tqd_core::{
    Boundary, ChannelPair, Direction, Error, Field, FrameOutput, LuminanceFrame, ModelConfig, Pipeline, StimulusSpec,
    TextureKind, TextureSpec, Variant,
};

fn run(cfg: &ModelConfig, frames: &[LuminanceFrame], capture: bool) -> Vec<FrameOutput> {
    let (w, h) = frames[0].field.dims();
    let mut p = Pipeline::new(cfg, w, h, Variants::BOTH).unwrap().with_stage_capture(capture);
    frames.iter().map(|f| p.process(f).unwrap()).collect()
}

fn stage<'a>(out: &'a FrameOutput, name: &str) -> &'a Field {
    &out.stages.iter().find(|(n, _)| *n == name).unwrap().1
}

#[test]
fn streaming_matches_batch_convolution() {
    for (boundary, size) in [(Boundary::Replicate, 32), (Boundary::Toroidal, 16)] {
        let cfg = ModelConfig {
            boundary,
            ..ModelConfig::default()
        };
        let fields = random_sequence(size, size, 50, 11);
        let batch = batch_run(&cfg, &fields);
        let outs = run(&cfg, &as_frames(&fields, cfg.dt), true);
        let mut worst: f64 = 0.0;
        for (t, out) in outs.iter().enumerate() {
            worst = worst
                .max(max_abs_diff(stage(out, "retina"), &batch.retina[t]))
                .max(max_abs_diff(stage(out, "lamina_contrast"), &batch.contrast[t]))
                .max(max_abs_diff(stage(out, "lamina_inhibited"), &batch.inhibited[t]))
                .max(max_abs_diff(stage(out, "on"), &batch.on[t]))
                .max(max_abs_diff(stage(out, "off"), &batch.off[t]))
                .max(max_abs_diff(stage(out, "on_delayed"), &batch.on_delayed[t]))
                .max(max_abs_diff(stage(out, "on_max"), &batch.on_max[t]))
                .max(max_abs_diff(stage(out, "on_max_delayed"), &batch.on_max_delayed[t]));
            for d in 0..4 {
                worst = worst
                    .max(max_abs_diff(&out.classic.as_ref().unwrap().values[d], &batch.classic[t][d]))
                    .max(max_abs_diff(&out.improved.as_ref().unwrap().values[d], &batch.improved[t][d]));
            }
        }
        assert!(worst <= 1e-9, "{boundary}: worst deviation {worst:e}");
    }
}

#[test]
fn retina_matches_dense_double_sum() {
    // The oracle evaluates the Gaussian density itself rather than reusing
    // the kernel taps.
    let cfg = ModelConfig::default();
    let sigma = cfg.sigma1;
    let r = gaussian_radius(sigma) as isize;
    let fields = random_sequence(32, 32, 1, 3);
    let f = &fields[0];
    let expect = Field::from_fn(32, 32, |x, y| {
        let mut acc = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                let g = (-((dx * dx + dy * dy) as f64) / (2.0 * sigma * sigma)).exp()
                    / (2.0 * std::f64::consts::PI * sigma * sigma);
                acc += g * common::at(f, x as isize - dx, y as isize - dy, Boundary::Replicate);
            }
        }
        acc
    });
    let out = run(&cfg, &as_frames(&fields, cfg.dt), true);
    assert!(max_abs_diff(stage(&out[0], "retina"), &expect) <= 1e-12);
}

#[test]
fn outputs_are_causal() {
    let cfg = ModelConfig::default();
    let a = random_sequence(12, 10, 30, 5);
    let mut b = a.clone();
    let k = 17;
    for f in &mut b[k..] {
        *f = f.map(|v| 1.0 - v);
    }
    let oa = run(&cfg, &as_frames(&a, cfg.dt), false);
    let ob = run(&cfg, &as_frames(&b, cfg.dt), false);
    for t in 0..k {
        assert_eq!(oa[t].classic, ob[t].classic, "frame {t}");
        assert_eq!(oa[t].improved, ob[t].improved, "frame {t}");
    }
    assert_ne!(oa[k].classic, ob[k].classic);
}

#[test]
fn improved_response_never_exceeds_classic() {
    let cfg = ModelConfig::default();
    let spec = StimulusSpec::new(48, 32, 200, Direction::Down, 200.0, TextureSpec {
        kind: TextureKind::Blocks,
        seed: 9,
    });
    let frames: Vec<_> = tqd_core::generate(&spec).unwrap().collect();
    for out in run(&cfg, &frames, false) {
        let (c, i) = (out.classic.unwrap(), out.improved.unwrap());
        for d in 0..4 {
            for (fi, fc) in i.values[d].as_slice().iter().zip(c.values[d].as_slice()) {
                assert!(fi <= fc);
            }
        }
    }
}

/// Texture that equals its own left-right mirror image.
fn mirror_symmetric_frames(w: usize, h: usize, n: usize, velocity: f64, rightward: bool) -> Vec<LuminanceFrame> {
    let base = tqd_core::stimulus::render_texture(TextureSpec { kind: TextureKind::Clutter, seed: 4 }, w, h);
    let tex = Field::from_fn(w, h, |x, y| 0.5 * (base.get(x, y) + base.get(w - 1 - x, y)));
    let sign = if rightward { 1.0 } else { -1.0 };
    (0..n)
        .map(|k| {
            let s = sign * velocity * k as f64 * 1e-3;
            let field = Field::from_fn(w, h, |x, y| {
                let u = x as f64 - s;
                let i = u.floor();
                let f = u - i;
                let i0 = (i as isize).rem_euclid(w as isize) as usize;
                let i1 = (i0 + 1) % w;
                (1.0 - f) * tex.get(i0, y) + f * tex.get(i1, y)
            });
            LuminanceFrame::new(field, k as f64 * 1e-3)
        })
        .collect()
}

#[test]
fn reversing_direction_swaps_right_and_left_sums() {
    let cfg = ModelConfig::default();
    let right = run(&cfg, &mirror_symmetric_frames(40, 24, 200, 200.0, true), false);
    let left = run(&cfg, &mirror_symmetric_frames(40, 24, 200, 200.0, false), false);
    for (r, l) in right.iter().zip(&left).skip(cfg.warmup_frames()) {
        for v in [Variant::Classic, Variant::Improved] {
            let (sr, sl) = (r.field(v).unwrap().sums(), l.field(v).unwrap().sums());
            let scale = sr.iter().chain(&sl).fold(0.0f64, |m, &s| m.max(s));
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * scale;
            assert!(close(sr[0], sl[2]) && close(sr[2], sl[0]), "{v} t={}: {sr:?} vs {sl:?}", r.index);
            assert!(close(sr[1], sl[1]) && close(sr[3], sl[3]));
        }
        assert_eq!(r.estimate(Variant::Improved).unwrap().theta, Some(Direction::Right));
        assert_eq!(l.estimate(Variant::Improved).unwrap().theta, Some(Direction::Left));
    }
}

#[test]
fn static_scene_has_no_contrast_after_warm_up() {
    let cfg = ModelConfig::default();
    let spec = StimulusSpec::new(40, 30, 200, Direction::Right, 0.0, TextureSpec {
        kind: TextureKind::Stripes,
        seed: 2,
    });
    let frames: Vec<_> = tqd_core::generate(&spec).unwrap().collect();
    let peak = frames[0].field.max_abs();
    for out in run(&cfg, &frames, true).iter().skip(cfg.warmup_frames()) {
        assert!(stage(out, "lamina_contrast").max_abs() <= 1e-6 * peak);
        for v in [Variant::Classic, Variant::Improved] {
            assert!(out.estimate(v).unwrap().is_no_motion());
        }
    }
}

#[test]
fn flash_response_follows_the_delay_kernel() {
    let cfg = ModelConfig::default();
    let mut stage = DelayStage::new(&tqd_core::PipelineKernels::build(&cfg).unwrap().delay);
    let dark = Field::zeros(3, 3);
    let flash = Field::filled(3, 3, 1.0);
    let mut response = Vec::new();
    for k in 0..60 {
        let f = if k == 1 { &flash } else { &dark };
        let pair = ChannelPair {
            on: f.clone(),
            off: dark.clone(),
            timestamp: k as f64 * cfg.dt,
        };
        response.push(stage.push(&pair).unwrap().on.get(1, 1));
    }
    assert_eq!(response[0], 0.0);
    // Oracle: the density integrated over each frame interval by the
    // midpoint rule on a fine grid.
    for (k, &r) in response.iter().enumerate().skip(1) {
        let lo = (k - 1) as f64 * cfg.dt;
        let steps = 2000;
        let h = cfg.dt / steps as f64;
        let cell: f64 = (0..steps)
            .map(|i| gamma_density(cfg.n3, cfg.tau3, lo + (i as f64 + 0.5) * h) * h)
            .sum();
        assert!((r - cell).abs() < 1e-6, "frame {k}: {r} vs {cell}");
    }
    let peak = response
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |b, (i, &v)| if v > b.1 { (i, v) } else { b })
        .0;
    let expected = 1 + (cfg.tau3 / cfg.dt).round() as usize;
    assert!(peak.abs_diff(expected) <= 1, "peak at frame {peak}, flash plus tau3 is {expected}");
}

#[test]
fn out_of_order_frames_are_rejected() {
    let cfg = ModelConfig::default();
    let mut p = Pipeline::new(&cfg, 4, 4, Variants::BOTH).unwrap();
    p.process(&LuminanceFrame::new(Field::zeros(4, 4), 0.010)).unwrap();
    let err = p.process(&LuminanceFrame::new(Field::zeros(4, 4), 0.009)).unwrap_err();
    assert!(matches!(err, Error::Sequencing { .. }));
    let err = p.process(&LuminanceFrame::new(Field::zeros(4, 4), 0.013)).unwrap_err();
    assert!(matches!(err, Error::Sequencing { .. }));
    let err = p.process(&LuminanceFrame::new(Field::zeros(5, 4), 0.011)).unwrap_err();
    assert!(matches!(err, Error::Shape { .. }));
}

#[test]
fn warm_up_flags_follow_the_horizon() {
    let cfg = ModelConfig::default();
    let fields = random_sequence(6, 6, cfg.warmup_frames() + 3, 1);
    let outs = run(&cfg, &as_frames(&fields, cfg.dt), false);
    let flagged = outs.iter().filter(|o| o.warmup).count();
    assert_eq!(flagged, cfg.warmup_frames());
    assert!(outs.iter().take(flagged).all(|o| o.warmup));
}
