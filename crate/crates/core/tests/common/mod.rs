//! Reference implementations used as test oracles. Everything here works on
//! whole sequences with plain loops and shares no code with the streaming
//! pipeline beyond the kernel taps themselves.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tqd_core::{Boundary, Field, LuminanceFrame, ModelConfig, PipelineKernels, SpatialKernel};

pub fn resolve(i: isize, n: usize, boundary: Boundary) -> usize {
    let n = n as isize;
    match boundary {
        Boundary::Replicate => i.clamp(0, n - 1) as usize,
        Boundary::Toroidal => i.rem_euclid(n) as usize,
    }
}

pub fn at(f: &Field, x: isize, y: isize, boundary: Boundary) -> f64 {
    f.get(resolve(x, f.width(), boundary), resolve(y, f.height(), boundary))
}

/// `Σ_{dx,dy} k(dx, dy) · f(x - dx, y - dy)`.
pub fn convolve(k: &SpatialKernel, f: &Field, boundary: Boundary) -> Field {
    let r = k.radius() as isize;
    Field::from_fn(f.width(), f.height(), |x, y| {
        let mut acc = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                acc += k.tap(dx, dy) * at(f, x as isize - dx, y as isize - dy, boundary);
            }
        }
        acc
    })
}

/// `out[t] = Σ_k taps[k] · seq[max(t - k, 0)]`: the signal before the first
/// sample is held at the first sample.
pub fn temporal(taps: &[f64], seq: &[Field]) -> Vec<Field> {
    (0..seq.len())
        .map(|t| {
            let mut out = Field::zeros(seq[0].width(), seq[0].height());
            for (k, &tap) in taps.iter().enumerate() {
                let src = &seq[t.saturating_sub(k)];
                for (o, &v) in out.as_mut_slice().iter_mut().zip(src.as_slice()) {
                    *o += tap * v;
                }
            }
            out
        })
        .collect()
}

/// Keep pixels equal to the brute-force maximum of their window.
pub fn max_operation(f: &Field, r: usize, boundary: Boundary) -> Field {
    let r = r as isize;
    Field::from_fn(f.width(), f.height(), |x, y| {
        let mut m = f64::NEG_INFINITY;
        for dy in -r..=r {
            for dx in -r..=r {
                m = m.max(at(f, x as isize + dx, y as isize + dy, boundary));
            }
        }
        let v = f.get(x, y);
        if v == m {
            v
        } else {
            0.0
        }
    })
}

/// Column/row offsets of the four detectors in the order right, up, left, down.
pub const STEPS: [(isize, isize); 4] = [(1, 0), (0, -1), (-1, 0), (0, 1)];

/// `on(x)·on_D(x - d·step) + off(x)·off_D(x - d·step)` per direction.
pub fn correlate(on: &Field, off: &Field, on_d: &Field, off_d: &Field, d: usize, boundary: Boundary) -> [Field; 4] {
    let d = d as isize;
    STEPS.map(|(sx, sy)| {
        Field::from_fn(on.width(), on.height(), |x, y| {
            let (px, py) = (x as isize - d * sx, y as isize - d * sy);
            on.get(x, y) * at(on_d, px, py, boundary) + off.get(x, y) * at(off_d, px, py, boundary)
        })
    })
}

pub struct BatchRun {
    pub retina: Vec<Field>,
    pub contrast: Vec<Field>,
    pub inhibited: Vec<Field>,
    pub on: Vec<Field>,
    pub off: Vec<Field>,
    pub on_delayed: Vec<Field>,
    pub on_max: Vec<Field>,
    pub on_max_delayed: Vec<Field>,
    pub classic: Vec<[Field; 4]>,
    pub improved: Vec<[Field; 4]>,
}

/// The whole model evaluated stage by stage over the complete sequence.
pub fn batch_run(cfg: &ModelConfig, frames: &[Field]) -> BatchRun {
    let k = PipelineKernels::build(cfg).unwrap();
    let b = cfg.boundary;
    let retina: Vec<Field> = frames.iter().map(|f| convolve(&k.retina, f, b)).collect();
    let contrast = temporal(k.highpass.taps(), &retina);
    let mut inhibited: Vec<Field> = contrast.iter().map(|f| Field::zeros(f.width(), f.height())).collect();
    for (spatial, kernel) in &k.inhibition.terms {
        let blurred: Vec<Field> = contrast.iter().map(|f| convolve(spatial, f, b)).collect();
        for (acc, term) in inhibited.iter_mut().zip(temporal(kernel.taps(), &blurred)) {
            for (a, v) in acc.as_mut_slice().iter_mut().zip(term.as_slice()) {
                *a += v;
            }
        }
    }
    let on: Vec<Field> = inhibited.iter().map(|f| f.map(|v| v.max(0.0))).collect();
    let off: Vec<Field> = inhibited.iter().map(|f| f.map(|v| (-v).max(0.0))).collect();
    let on_delayed = temporal(k.delay.taps(), &on);
    let off_delayed = temporal(k.delay.taps(), &off);
    let on_max: Vec<Field> = on.iter().map(|f| max_operation(f, cfg.omega_half, b)).collect();
    let off_max: Vec<Field> = off.iter().map(|f| max_operation(f, cfg.omega_half, b)).collect();
    let on_max_delayed = temporal(k.delay.taps(), &on_max);
    let off_max_delayed = temporal(k.delay.taps(), &off_max);
    let d = cfg.baseline_d;
    let classic = (0..frames.len())
        .map(|t| correlate(&on[t], &off[t], &on_delayed[t], &off_delayed[t], d, b))
        .collect();
    let improved = (0..frames.len())
        .map(|t| correlate(&on_max[t], &off_max[t], &on_max_delayed[t], &off_max_delayed[t], d, b))
        .collect();
    BatchRun {
        retina,
        contrast,
        inhibited,
        on,
        off,
        on_delayed,
        on_max,
        on_max_delayed,
        classic,
        improved,
    }
}

pub fn random_sequence(width: usize, height: usize, frames: usize, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..frames)
        .map(|_| Field::from_fn(width, height, |_, _| rng.gen::<f64>()))
        .collect()
}

pub fn as_frames(fields: &[Field], dt: f64) -> Vec<LuminanceFrame> {
    fields
        .iter()
        .enumerate()
        .map(|(k, f)| LuminanceFrame::new(f.clone(), k as f64 * dt))
        .collect()
}

pub fn max_abs_diff(a: &Field, b: &Field) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
