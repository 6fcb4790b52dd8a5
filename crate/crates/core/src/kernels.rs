//! Spatial and temporal kernels: Gaussian blur, gamma low-pass/delay,
//! the gamma-difference high-pass and the centre-surround inhibition kernel.
//!
//! Temporal kernels are causal FIR filters. Tap `k` holds the integral of
//! the continuous kernel over `[k·dt, (k+1)·dt)`, so a tap sum equals the
//! kernel mass captured inside the truncation horizon. Spatial kernels are
//! point-sampled at integer pixel offsets.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Boundary, Field};

/// Square 2D kernel of side `2·radius + 1`, centred on tap `(radius, radius)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpatialKernel {
    radius: usize,
    taps: Vec<f64>,
}

impl SpatialKernel {
    pub fn from_fn(radius: usize, f: impl Fn(isize, isize) -> f64) -> Self {
        let r = radius as isize;
        let mut taps = Vec::with_capacity((2 * radius + 1).pow(2));
        for dy in -r..=r {
            for dx in -r..=r {
                taps.push(f(dx, dy));
            }
        }
        Self { radius, taps }
    }

    #[inline]
    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    /// Row-major taps, row 0 at offset `dy = -radius`.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap at offset `(dx, dy)` from the centre; zero outside the support.
    pub fn tap(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        if dx.abs() > r || dy.abs() > r {
            return 0.0;
        }
        self.taps[((dy + r) as usize) * self.side() + (dx + r) as usize]
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    /// Tapwise `max(·, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map(|v| v.max(0.0))
    }

    /// Tapwise `min(·, 0)`.
    pub fn negative_part(&self) -> Self {
        self.map(|v| v.min(0.0))
    }

    /// Tapwise difference, widening the smaller kernel with zeros.
    pub fn difference(&self, other: &SpatialKernel) -> Self {
        let radius = self.radius.max(other.radius);
        Self::from_fn(radius, |dx, dy| self.tap(dx, dy) - other.tap(dx, dy))
    }

    pub fn renormalized(&self) -> Self {
        let s = self.sum();
        self.map(|v| v / s)
    }

    fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            radius: self.radius,
            taps: self.taps.iter().map(|&v| f(v)).collect(),
        }
    }

    /// `out(x, y) = Σ k(i, j) · in(x - i, y - j)` with out-of-range input
    /// resolved by `boundary`. Zero taps are skipped.
    pub fn convolve(&self, input: &Field, boundary: Boundary) -> Field {
        let (w, h) = input.dims();
        let r = self.radius;
        let side = self.side();
        let padded = input.padded(r, boundary);
        let pw = padded.width();
        let src = padded.as_slice();
        let live: Vec<(usize, usize, f64)> = self
            .taps
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(idx, &v)| (idx % side, idx / side, v))
            .collect();

        let mut out = Field::zeros(w, h);
        out.as_mut_slice()
            .par_chunks_mut(w.max(1))
            .enumerate()
            .for_each(|(y, row)| {
                // tap (i, j) at storage (ti, tj) = (i + r, j + r) reads padded
                // row y - j + r = y + 2r - tj, column x - i + r = x + 2r - ti.
                for &(ti, tj, v) in &live {
                    let py = y + 2 * r - tj;
                    let start = py * pw + 2 * r - ti;
                    let line = &src[start..start + w];
                    for (o, &s) in row.iter_mut().zip(line) {
                        *o += v * s;
                    }
                }
            });
        out
    }
}

/// `(1 / 2πσ²) · exp(-(x² + y²) / 2σ²)` sampled at integer offsets.
pub fn gaussian2d(sigma: f64, radius: usize) -> Result<SpatialKernel> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    if radius < 1 {
        return Err(Error::invalid("radius", "must be at least 1"));
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI * sigma * sigma);
    let denom = 2.0 * sigma * sigma;
    Ok(SpatialKernel::from_fn(radius, |dx, dy| {
        let d2 = (dx * dx + dy * dy) as f64;
        norm * (-d2 / denom).exp()
    }))
}

/// Rank-one kernel `k(dx, dy) = col(dy) · row(dx)`, applied as a row pass
/// followed by a column pass.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableKernel {
    radius: usize,
    row: Vec<f64>,
    col: Vec<f64>,
}

impl SeparableKernel {
    pub fn new(row: Vec<f64>, col: Vec<f64>) -> Result<Self> {
        if row.len() != col.len() || row.len().is_multiple_of(2) {
            return Err(Error::invalid(
                "separable",
                format!("factors must have equal odd lengths, got {} and {}", row.len(), col.len()),
            ));
        }
        Ok(Self {
            radius: row.len() / 2,
            row,
            col,
        })
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn to_dense(&self) -> SpatialKernel {
        let r = self.radius as isize;
        SpatialKernel::from_fn(self.radius, |dx, dy| {
            self.col[(dy + r) as usize] * self.row[(dx + r) as usize]
        })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            radius: self.radius,
            row: self.row.iter().map(|v| v * c).collect(),
            col: self.col.clone(),
        }
    }

    pub fn convolve(&self, input: &Field, boundary: Boundary) -> Field {
        let (w, h) = input.dims();
        let r = self.radius;
        let padded = input.padded(r, boundary);
        let pw = padded.width();
        let src = padded.as_slice();

        // Row pass over every padded row, keeping only the w output columns.
        let mut rows = vec![0.0; w * (h + 2 * r)];
        rows.par_chunks_mut(w.max(1)).enumerate().for_each(|(py, out)| {
            let line = &src[py * pw..(py + 1) * pw];
            for (ti, &v) in self.row.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let seg = &line[2 * r - ti..2 * r - ti + w];
                for (o, &s) in out.iter_mut().zip(seg) {
                    *o += v * s;
                }
            }
        });

        let mut out = Field::zeros(w, h);
        out.as_mut_slice()
            .par_chunks_mut(w.max(1))
            .enumerate()
            .for_each(|(y, out)| {
                for (tj, &v) in self.col.iter().enumerate() {
                    if v == 0.0 {
                        continue;
                    }
                    let py = y + 2 * r - tj;
                    for (o, &s) in out.iter_mut().zip(&rows[py * w..(py + 1) * w]) {
                        *o += v * s;
                    }
                }
            });
        out
    }
}

/// `exp(-x² / 2σ²) / (√(2π) σ)` sampled at integer offsets.
pub fn gaussian1d(sigma: f64, radius: usize) -> Result<Vec<f64>> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::invalid("sigma", format!("must be positive, got {sigma}")));
    }
    let norm = 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * sigma);
    let r = radius as isize;
    Ok((-r..=r)
        .map(|x| norm * (-((x * x) as f64) / (2.0 * sigma * sigma)).exp())
        .collect())
}

/// Separable factorization of [`gaussian2d`].
pub fn gaussian_separable(sigma: f64, radius: usize) -> Result<SeparableKernel> {
    if radius < 1 {
        return Err(Error::invalid("radius", "must be at least 1"));
    }
    let g = gaussian1d(sigma, radius)?;
    SeparableKernel::new(g.clone(), g)
}

/// A spatial linear operator, possibly a weighted sum of simpler ones.
#[derive(Clone, Debug, PartialEq)]
pub enum SpatialFilter {
    Dense(SpatialKernel),
    Separable(SeparableKernel),
    Sum(Vec<(f64, SpatialFilter)>),
}

impl SpatialFilter {
    pub fn radius(&self) -> usize {
        match self {
            Self::Dense(k) => k.radius(),
            Self::Separable(k) => k.radius(),
            Self::Sum(parts) => parts.iter().map(|(_, f)| f.radius()).max().unwrap_or(0),
        }
    }

    /// The equivalent single dense kernel.
    pub fn to_dense(&self) -> SpatialKernel {
        match self {
            Self::Dense(k) => k.clone(),
            Self::Separable(k) => k.to_dense(),
            Self::Sum(parts) => {
                let r = self.radius();
                let dense: Vec<(f64, SpatialKernel)> = parts.iter().map(|(c, f)| (*c, f.to_dense())).collect();
                SpatialKernel::from_fn(r, |dx, dy| dense.iter().map(|(c, k)| c * k.tap(dx, dy)).sum())
            }
        }
    }

    pub fn convolve(&self, input: &Field, boundary: Boundary) -> Field {
        match self {
            Self::Dense(k) => k.convolve(input, boundary),
            Self::Separable(k) => k.convolve(input, boundary),
            Self::Sum(parts) => {
                let mut acc = Field::zeros(input.width(), input.height());
                for (c, f) in parts {
                    let part = f.convolve(input, boundary);
                    for (a, v) in acc.as_mut_slice().iter_mut().zip(part.as_slice()) {
                        *a += c * v;
                    }
                }
                acc
            }
        }
    }
}

/// Truncation radius `ceil(4σ)`.
pub fn gaussian_radius(sigma: f64) -> usize {
    ((4.0 * sigma) - 1e-9).ceil().max(1.0) as usize
}

/// Causal FIR kernel sampled every `dt` seconds; tap 0 covers `[0, dt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TemporalKernel {
    taps: Vec<f64>,
    dt: f64,
}

impl TemporalKernel {
    pub fn new(taps: Vec<f64>, dt: f64) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::invalid("taps", "temporal kernel needs at least one tap"));
        }
        if !(dt > 0.0) {
            return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
        }
        Ok(Self { taps, dt })
    }

    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Time spanned by the taps, `len · dt`.
    pub fn duration(&self) -> f64 {
        self.taps.len() as f64 * self.dt
    }

    pub fn sum(&self) -> f64 {
        self.taps.iter().sum()
    }

    pub fn peak_index(&self) -> usize {
        self.taps
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
            .0
    }

    pub fn renormalized(&self) -> Self {
        let s = self.sum();
        Self {
            taps: self.taps.iter().map(|v| v / s).collect(),
            dt: self.dt,
        }
    }

    /// Tapwise difference, padding the shorter kernel with zeros.
    pub fn difference(&self, other: &TemporalKernel) -> Self {
        let len = self.len().max(other.len());
        let at = |k: &TemporalKernel, i: usize| k.taps.get(i).copied().unwrap_or(0.0);
        Self {
            taps: (0..len).map(|i| at(self, i) - at(other, i)).collect(),
            dt: self.dt,
        }
    }
}

/// Number of whole taps needed to cover `horizon` seconds.
pub fn taps_for_horizon(horizon: f64, dt: f64) -> usize {
    ((horizon / dt) - 1e-9).ceil().max(1.0) as usize
}

/// Default truncation horizon of a gamma kernel: five times its mean `τ(n+1)/n`.
pub fn gamma_horizon(n: u32, tau: f64) -> f64 {
    5.0 * tau * (n as f64 + 1.0) / n as f64
}

/// Default truncation horizon of an exponential kernel, `10α`.
///
/// The exponential is the gamma form's limiting shape with mean `α`; five
/// means would leave `e⁻⁵ ≈ 0.7%` of its mass beyond the last tap.
pub fn exponential_horizon(alpha: f64) -> f64 {
    10.0 * alpha
}

/// `Γ_{n,τ}(t) = (nt)ⁿ · exp(-nt/τ) / ((n-1)! · τⁿ⁺¹)`, zero for `t < 0`.
pub fn gamma_density(n: u32, tau: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    let nf = n as f64;
    let fact: f64 = (1..n).map(|k| k as f64).product();
    (nf * t).powi(n as i32) * (-nf * t / tau).exp() / (fact * tau.powi(n as i32 + 1))
}

/// Mass of `Γ_{n,τ}` beyond `t`: it is a gamma density with shape `n+1`
/// and rate `n/τ`, so the tail is `e⁻ᵘ Σ_{j≤n} uʲ/j!` with `u = nt/τ`.
fn gamma_tail(n: u32, tau: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 1.0;
    }
    let u = n as f64 * t / tau;
    let mut term = 1.0;
    let mut acc = 1.0;
    for j in 1..=n {
        term *= u / j as f64;
        acc += term;
    }
    (-u).exp() * acc
}

fn check_gamma(n: u32, tau: f64, dt: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::invalid("n", "gamma order must be at least 1"));
    }
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::invalid("tau", format!("must be positive, got {tau}")));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    Ok(())
}

/// Gamma kernel truncated at [`gamma_horizon`].
pub fn gamma_kernel(n: u32, tau: f64, dt: f64) -> Result<TemporalKernel> {
    check_gamma(n, tau, dt)?;
    gamma_kernel_with_horizon(n, tau, dt, gamma_horizon(n, tau))
}

pub fn gamma_kernel_with_horizon(n: u32, tau: f64, dt: f64, horizon: f64) -> Result<TemporalKernel> {
    check_gamma(n, tau, dt)?;
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon", format!("must be positive, got {horizon}")));
    }
    let len = taps_for_horizon(horizon, dt);
    let taps = (0..len)
        .map(|k| gamma_tail(n, tau, k as f64 * dt) - gamma_tail(n, tau, (k + 1) as f64 * dt))
        .collect();
    TemporalKernel::new(taps, dt)
}

/// `H = Γ_{n1,τ1} - Γ_{n2,τ2}`, both truncated at the longer default horizon.
pub fn highpass_kernel(n1: u32, tau1: f64, n2: u32, tau2: f64, dt: f64) -> Result<TemporalKernel> {
    check_gamma(n1, tau1, dt)?;
    check_gamma(n2, tau2, dt)?;
    let horizon = gamma_horizon(n1, tau1).max(gamma_horizon(n2, tau2));
    highpass_kernel_with_horizon(n1, tau1, n2, tau2, dt, horizon)
}

pub fn highpass_kernel_with_horizon(
    n1: u32,
    tau1: f64,
    n2: u32,
    tau2: f64,
    dt: f64,
    horizon: f64,
) -> Result<TemporalKernel> {
    if n1 == n2 && tau1 == tau2 {
        return Err(Error::invalid(
            "highpass",
            "identical gamma components give an all-zero kernel",
        ));
    }
    let fast = gamma_kernel_with_horizon(n1, tau1, dt, horizon)?;
    let slow = gamma_kernel_with_horizon(n2, tau2, dt, horizon)?;
    Ok(fast.difference(&slow))
}

/// `exp(-t/α) / α`, cell-integrated: tap `k` is `e^{-k·dt/α} (1 - e^{-dt/α})`.
pub fn exponential_kernel(alpha: f64, dt: f64, horizon: f64) -> Result<TemporalKernel> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(Error::invalid("alpha", format!("must be positive, got {alpha}")));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid("dt", format!("must be positive, got {dt}")));
    }
    let len = taps_for_horizon(horizon, dt);
    let cell = -(-dt / alpha).exp_m1();
    let taps = (0..len)
        .map(|k| (-(k as f64) * dt / alpha).exp() * cell)
        .collect();
    TemporalKernel::new(taps, dt)
}

/// A separable-in-each-term space-time kernel `Σ S_i(x, y) · T_i(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpaceTimeKernel {
    pub terms: Vec<(SpatialKernel, TemporalKernel)>,
}

impl SpaceTimeKernel {
    /// Longest temporal factor, in taps.
    pub fn temporal_len(&self) -> usize {
        self.terms.iter().map(|(_, t)| t.len()).max().unwrap_or(0)
    }
}

/// Lateral inhibition kernel `W₁ = [G_σ − G_2σ]⁺ · E_α1 + [G_σ − G_2σ]⁻ · E_α2`.
///
/// `radius` sizes both Gaussians; `horizon`, when given, truncates both
/// exponential factors, otherwise each uses [`exponential_horizon`].
pub fn inhibition_kernel(
    sigma2: f64,
    alpha1: f64,
    alpha2: f64,
    radius: usize,
    horizon: Option<f64>,
    dt: f64,
) -> Result<SpaceTimeKernel> {
    if !(alpha1 > 0.0) {
        return Err(Error::invalid("alpha1", format!("must be positive, got {alpha1}")));
    }
    if !(alpha2 > alpha1) {
        return Err(Error::invalid(
            "alpha2",
            format!("must exceed alpha1 ({alpha1}), got {alpha2}"),
        ));
    }
    let dog = gaussian2d(sigma2, radius)?.difference(&gaussian2d(2.0 * sigma2, radius)?);
    let fast = exponential_kernel(alpha1, dt, horizon.unwrap_or(exponential_horizon(alpha1)))?;
    let slow = exponential_kernel(alpha2, dt, horizon.unwrap_or(exponential_horizon(alpha2)))?;
    Ok(SpaceTimeKernel {
        terms: vec![(dog.positive_part(), fast), (dog.negative_part(), slow)],
    })
}
