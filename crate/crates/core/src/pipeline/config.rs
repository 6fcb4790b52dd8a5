use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::Boundary;
use crate::kernels::taps_for_horizon;

/// Every free parameter of the model. Times are in seconds, lengths in pixels.
///
/// The defaults are plausible magnitudes for fly-vision models, not values
/// fitted to any data set. The exception is `tau3`: its mean delay of
/// about 10 ms moves a 100 px/s pattern one pixel, which keeps the delayed
/// and undelayed channels correlated at `baseline_d = 1` over the
/// 150–350 px/s range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Photoreceptor blur.
    pub sigma1: f64,
    /// Fast gamma of the high-pass kernel.
    pub n1: u32,
    pub tau1: f64,
    /// Slow gamma of the high-pass kernel.
    pub n2: u32,
    pub tau2: f64,
    /// Centre width of the inhibition DoG; the surround is always `2·sigma2`.
    pub sigma2: f64,
    /// Time constants of the positive and negative inhibition factors.
    pub alpha1: f64,
    pub alpha2: f64,
    /// Medulla delay gamma.
    pub n3: u32,
    pub tau3: f64,
    /// Half-width of the square local-maximum neighbourhood.
    pub omega_half: usize,
    /// Correlator sampling distance.
    pub baseline_d: usize,
    pub dt: f64,
    pub renormalize_kernels: bool,
    pub boundary: Boundary,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            sigma1: 1.0,
            n1: 2,
            tau1: 0.003,
            n2: 2,
            tau2: 0.009,
            sigma2: 1.5,
            alpha1: 0.003,
            alpha2: 0.015,
            n3: 5,
            tau3: 0.008,
            omega_half: 2,
            baseline_d: 1,
            dt: 0.001,
            renormalize_kernels: false,
            boundary: Boundary::Replicate,
        }
    }
}

const KEYS: [&str; 15] = [
    "sigma1",
    "n1",
    "tau1",
    "n2",
    "tau2",
    "sigma2",
    "alpha1",
    "alpha2",
    "n3",
    "tau3",
    "omega_half",
    "baseline_d",
    "dt",
    "renormalize_kernels",
    "boundary",
];

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive, got {v}")))
            }
        };
        positive("sigma1", self.sigma1)?;
        positive("sigma2", self.sigma2)?;
        positive("tau1", self.tau1)?;
        positive("tau2", self.tau2)?;
        positive("tau3", self.tau3)?;
        positive("alpha1", self.alpha1)?;
        positive("alpha2", self.alpha2)?;
        positive("dt", self.dt)?;
        for (name, n) in [("n1", self.n1), ("n2", self.n2), ("n3", self.n3)] {
            if n == 0 {
                return Err(Error::invalid(name, "gamma order must be at least 1"));
            }
        }
        if self.n1 == self.n2 && self.tau1 == self.tau2 {
            return Err(Error::invalid("tau2", "high-pass components must differ"));
        }
        if !(self.alpha2 > self.alpha1) {
            return Err(Error::invalid(
                "alpha2",
                format!("must exceed alpha1 ({}), got {}", self.alpha1, self.alpha2),
            ));
        }
        if self.omega_half < 1 {
            return Err(Error::invalid("omega_half", "must be at least 1"));
        }
        if self.baseline_d < 1 {
            return Err(Error::invalid("baseline_d", "must be at least 1"));
        }
        Ok(())
    }

    /// Truncation horizon of the lamina kernels and length of the start-up
    /// transient: five times the longest time scale among the gamma means `τ(n+1)/n`
    /// and the exponential scales `2α`.
    pub fn temporal_horizon(&self) -> f64 {
        let mean = |n: u32, tau: f64| tau * (n as f64 + 1.0) / n as f64;
        let longest = [
            mean(self.n1, self.tau1),
            mean(self.n2, self.tau2),
            mean(self.n3, self.tau3),
            2.0 * self.alpha1,
            2.0 * self.alpha2,
        ]
        .into_iter()
        .fold(0.0, f64::max);
        5.0 * longest
    }

    /// Frames whose timestamp falls before [`Self::temporal_horizon`].
    pub fn warmup_frames(&self) -> usize {
        taps_for_horizon(self.temporal_horizon(), self.dt)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key}={}", self.value_of(key));
        }
        s
    }

    fn value_of(&self, key: &str) -> String {
        match key {
            "sigma1" => self.sigma1.to_string(),
            "n1" => self.n1.to_string(),
            "tau1" => self.tau1.to_string(),
            "n2" => self.n2.to_string(),
            "tau2" => self.tau2.to_string(),
            "sigma2" => self.sigma2.to_string(),
            "alpha1" => self.alpha1.to_string(),
            "alpha2" => self.alpha2.to_string(),
            "n3" => self.n3.to_string(),
            "tau3" => self.tau3.to_string(),
            "omega_half" => self.omega_half.to_string(),
            "baseline_d" => self.baseline_d.to_string(),
            "dt" => self.dt.to_string(),
            "renormalize_kernels" => self.renormalize_kernels.to_string(),
            "boundary" => self.boundary.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Parse `key=value` lines over the defaults. `#` starts a comment.
    /// Unknown or repeated keys are errors.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = ModelConfig::default();
        let mut seen = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = i + 1;
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {lineno}: expected key=value, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if let Some(prev) = seen.insert(key.to_string(), lineno) {
                return Err(Error::Config(format!(
                    "line {lineno}: key `{key}` already set on line {prev}"
                )));
            }
            cfg.set(key, value)
                .map_err(|reason| Error::Config(format!("line {lineno}: {reason}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn p<T: std::str::FromStr>(key: &str, value: &str) -> std::result::Result<T, String> {
            value
                .parse()
                .map_err(|_| format!("key `{key}`: cannot parse `{value}`"))
        }
        match key {
            "sigma1" => self.sigma1 = p(key, value)?,
            "n1" => self.n1 = p(key, value)?,
            "tau1" => self.tau1 = p(key, value)?,
            "n2" => self.n2 = p(key, value)?,
            "tau2" => self.tau2 = p(key, value)?,
            "sigma2" => self.sigma2 = p(key, value)?,
            "alpha1" => self.alpha1 = p(key, value)?,
            "alpha2" => self.alpha2 = p(key, value)?,
            "n3" => self.n3 = p(key, value)?,
            "tau3" => self.tau3 = p(key, value)?,
            "omega_half" => self.omega_half = p(key, value)?,
            "baseline_d" => self.baseline_d = p(key, value)?,
            "dt" => self.dt = p(key, value)?,
            "renormalize_kernels" => self.renormalize_kernels = p(key, value)?,
            "boundary" => self.boundary = value.parse().map_err(|e: Error| e.to_string())?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }
}
