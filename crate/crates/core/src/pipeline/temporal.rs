use rayon::prelude::*;

use crate::field::Field;
use crate::kernels::TemporalKernel;

const CHUNK: usize = 2048;

/// Streaming causal FIR filter over a sequence of fields.
///
/// Keeps a ring of the last `taps.len()` inputs. Before the first input the
/// signal is taken to have been constant at that input's value, so a stage
/// fed a steady scene starts in its steady state.
///
/// Geometric taps `c·aᵏ` (truncated exponentials) are evaluated with the
/// equivalent recursion `y_t = a·y_{t-1} + c·x_t - c·aᴷ·x_{t-K}`.
#[derive(Clone, Debug)]
pub struct TemporalFilter {
    taps: Vec<f64>,
    geometric: Option<Geometric>,
    ring: Vec<Vec<f64>>,
    head: usize,
    dims: Option<(usize, usize)>,
    last: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
struct Geometric {
    c: f64,
    a: f64,
    tail: f64,
}

impl Geometric {
    fn detect(taps: &[f64]) -> Option<Self> {
        if taps.len() < 3 || taps.iter().any(|&t| !(t > 0.0)) {
            return None;
        }
        let c = taps[0];
        let a = taps[1] / taps[0];
        let mut expect = c;
        for &t in taps {
            if (t - expect).abs() > 1e-12 * t {
                return None;
            }
            expect *= a;
        }
        Some(Self { c, a, tail: expect })
    }
}

impl TemporalFilter {
    pub fn new(kernel: &TemporalKernel) -> Self {
        Self {
            taps: kernel.taps().to_vec(),
            geometric: Geometric::detect(kernel.taps()),
            ring: Vec::new(),
            head: 0,
            dims: None,
            last: Vec::new(),
        }
    }

    /// Number of buffered frames; never exceeds the tap count.
    pub fn depth(&self) -> usize {
        self.ring.len()
    }

    pub fn push(&mut self, input: &Field) -> Field {
        let len = self.taps.len();
        let (w, h) = input.dims();
        let first = self.dims.is_none();
        match self.dims {
            None => {
                self.ring = vec![input.as_slice().to_vec(); len];
                self.head = 0;
                self.dims = Some(input.dims());
            }
            Some(dims) => {
                assert_eq!(dims, input.dims(), "temporal filter fed fields of different shapes");
                self.head = (self.head + 1) % len;
                if self.geometric.is_none() {
                    self.ring[self.head].copy_from_slice(input.as_slice());
                }
            }
        }

        if let Some(g) = self.geometric {
            if first {
                let sum: f64 = self.taps.iter().sum();
                self.last = input.as_slice().iter().map(|&x| sum * x).collect();
            } else {
                // The slot about to be overwritten holds x_{t-K}.
                let oldest = &mut self.ring[self.head];
                self.last
                    .par_chunks_mut(CHUNK)
                    .zip(oldest.par_chunks_mut(CHUNK))
                    .zip(input.as_slice().par_chunks(CHUNK))
                    .for_each(|((y, old), x)| {
                        for ((y, old), &x) in y.iter_mut().zip(old.iter_mut()).zip(x) {
                            *y = g.a * *y + g.c * x - g.tail * *old;
                            *old = x;
                        }
                    });
            }
            return Field::from_vec(w, h, self.last.clone()).expect("dims preserved");
        }

        let mut out = vec![0.0; w * h];
        let ring = &self.ring;
        let taps = &self.taps;
        let head = self.head;
        out.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
            let base = c * CHUNK;
            for (k, &tap) in taps.iter().enumerate() {
                if tap == 0.0 {
                    continue;
                }
                let frame = &ring[(head + len - k) % len][base..base + chunk.len()];
                for (o, &x) in chunk.iter_mut().zip(frame) {
                    *o += tap * x;
                }
            }
        });
        Field::from_vec(w, h, out).expect("dims preserved")
    }
}
