//! Threshold-projection metrics: detected-point counts `N(γ, θ)`, detection
//! rate `DR(γ)` and normalized detected points `NP(γ)`.

use std::fmt::Write as _;

use serde::Serialize;

use crate::correlator::{normalize, DirectionalField, Variant};
use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::field::LuminanceFrame;
use crate::pipeline::{ModelConfig, Pipeline, Variants};

/// Ascending projection thresholds starting at 0.01.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThresholdSchedule {
    gammas: Vec<f64>,
}

pub const FIRST_GAMMA: f64 = 0.01;

impl ThresholdSchedule {
    pub fn new(gammas: Vec<f64>) -> Result<Self> {
        match gammas.first() {
            None => return Err(Error::invalid("gammas", "schedule is empty")),
            Some(&g) if g != FIRST_GAMMA => {
                return Err(Error::invalid("gammas", format!("must start at 0.01, starts at {g}")))
            }
            _ => {}
        }
        if let Some(w) = gammas.windows(2).find(|w| !(w[1] > w[0])) {
            return Err(Error::invalid(
                "gammas",
                format!("must be strictly increasing ({} then {})", w[0], w[1]),
            ));
        }
        if let Some(&g) = gammas.iter().find(|&&g| !(g > 0.0 && g <= 1.0)) {
            return Err(Error::invalid("gammas", format!("{g} lies outside (0, 1]")));
        }
        Ok(Self { gammas })
    }

    pub fn gammas(&self) -> &[f64] {
        &self.gammas
    }

    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// Comma-separated list, e.g. `0.01,0.05,0.1`.
    pub fn parse(s: &str) -> Result<Self> {
        let gammas = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid("gammas", format!("cannot parse `{}`", t.trim())))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(gammas)
    }
}

impl Default for ThresholdSchedule {
    /// `0.01, 0.05, 0.10, …, 0.50`.
    fn default() -> Self {
        let mut gammas = vec![FIRST_GAMMA];
        gammas.extend((1..=10).map(|k| k as f64 / 20.0));
        Self { gammas }
    }
}

/// Pixels whose normalized response strictly exceeds `gamma`, per direction.
pub fn count_detections(field: &DirectionalField, gamma: f64) -> Result<[usize; 4]> {
    let m = field.max();
    if m > 1.0 + 1e-9 {
        return Err(Error::Contract(format!(
            "detections need a normalized field, maximum is {m}"
        )));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::invalid("gamma", format!("must lie in (0, 1], got {gamma}")));
    }
    Ok(std::array::from_fn(|i| {
        field.values[i].as_slice().iter().filter(|&&v| v > gamma).count()
    }))
}

/// `N(θ₀) / Σ_θ N(θ)`; `None` when nothing was detected.
pub fn detection_rate(counts: &[usize; 4], truth: Direction) -> Option<f64> {
    let total: usize = counts.iter().sum();
    (total > 0).then(|| counts[truth.index()] as f64 / total as f64)
}

/// Each count over the schedule total; all `None` when the total is zero.
pub fn normalized_points(counts_at_truth: &[usize]) -> Vec<Option<f64>> {
    let total: usize = counts_at_truth.iter().sum();
    counts_at_truth
        .iter()
        .map(|&n| (total > 0).then(|| n as f64 / total as f64))
        .collect()
}

/// Metrics of one (variant, velocity, frame) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportCell {
    pub variant: Variant,
    pub velocity: f64,
    pub frame: usize,
    pub gammas: Vec<f64>,
    /// `counts[i][θ]` at `gammas[i]`.
    pub counts: Vec<[usize; 4]>,
    pub dr: Vec<Option<f64>>,
    pub np: Vec<Option<f64>>,
}

impl ReportCell {
    /// Normalizes `field` and evaluates it over `schedule`.
    pub fn evaluate(
        field: &DirectionalField,
        schedule: &ThresholdSchedule,
        truth: Direction,
        velocity: f64,
        frame: usize,
    ) -> Result<Self> {
        let normalized = normalize(field);
        let counts = schedule
            .gammas()
            .iter()
            .map(|&g| count_detections(&normalized, g))
            .collect::<Result<Vec<_>>>()?;
        let dr = counts.iter().map(|c| detection_rate(c, truth)).collect();
        let at_truth: Vec<usize> = counts.iter().map(|c| c[truth.index()]).collect();
        Ok(Self {
            variant: field.variant,
            velocity,
            frame,
            gammas: schedule.gammas().to_vec(),
            counts,
            dr,
            np: normalized_points(&at_truth),
        })
    }

    pub fn dr_at_first(&self) -> Option<f64> {
        self.dr.first().copied().flatten()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport {
    pub truth: Direction,
    pub config: ModelConfig,
    pub cells: Vec<ReportCell>,
}

/// Improved-model detection rate required at every threshold.
pub const DR_IMPROVED_MIN: f64 = 0.9;

pub const REPORT_CSV_HEADER: &str = "variant,velocity,frame,gamma,theta_rad,N,DR,NP";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl MetricsReport {
    /// One row per (cell, γ, θ); DR and NP repeat across the θ rows of a γ.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{REPORT_CSV_HEADER}");
        for c in &self.cells {
            for (i, &g) in c.gammas.iter().enumerate() {
                for d in Direction::ALL {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{},{}",
                        c.variant,
                        c.velocity,
                        c.frame,
                        g,
                        d.radians(),
                        c.counts[i][d.index()],
                        opt(c.dr[i]),
                        opt(c.np[i]),
                    );
                }
            }
        }
        s
    }

    /// Velocities present in the report, in first-seen order.
    fn velocities(&self) -> Vec<f64> {
        let mut v: Vec<f64> = Vec::new();
        for c in &self.cells {
            if !v.contains(&c.velocity) {
                v.push(c.velocity);
            }
        }
        v
    }

    fn cell(&self, variant: Variant, velocity: f64) -> Option<&ReportCell> {
        self.cells
            .iter()
            .find(|c| c.variant == variant && c.velocity == velocity)
    }

    /// Pass/fail of the headline checks per velocity.
    pub fn checks(&self) -> Vec<CellCheck> {
        self.velocities()
            .into_iter()
            .map(|velocity| {
                let improved = self.cell(Variant::Improved, velocity);
                let classic = self.cell(Variant::Classic, velocity);
                let improved_dr_min = improved.map(|c| {
                    c.dr.iter()
                        .map(|d| d.unwrap_or(f64::NAN))
                        .fold(f64::INFINITY, f64::min)
                });
                let dr_improved_ok = improved.map(|c| c.dr.iter().all(|d| matches!(d, Some(x) if *x >= DR_IMPROVED_MIN)));
                let ordering_ok = match (improved.and_then(ReportCell::dr_at_first), classic) {
                    (Some(i), Some(c)) => Some(c.dr_at_first().is_none_or(|c| i >= c)),
                    _ => None,
                };
                let np_monotone = self
                    .cells
                    .iter()
                    .filter(|c| c.velocity == velocity)
                    .all(|c| c.counts.windows(2).all(|w| w[1].iter().zip(&w[0]).all(|(a, b)| a <= b)));
                CellCheck {
                    velocity,
                    improved_dr_at_first: improved.and_then(ReportCell::dr_at_first),
                    classic_dr_at_first: classic.and_then(ReportCell::dr_at_first),
                    improved_dr_min: improved_dr_min.filter(|x| !x.is_nan()),
                    improved_dr_above_min: dr_improved_ok,
                    improved_beats_classic: ordering_ok,
                    np_non_increasing: np_monotone,
                }
            })
            .collect()
    }

    /// Pretty-printed JSON: config, per-cell DR at the first threshold and
    /// the pass/fail checks.
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct CellSummary<'a> {
            variant: Variant,
            velocity: f64,
            frame: usize,
            dr_at_first_gamma: Option<f64>,
            gammas: &'a [f64],
            dr: &'a [Option<f64>],
            np: &'a [Option<f64>],
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            truth: Direction,
            truth_rad: f64,
            config: &'a ModelConfig,
            cells: Vec<CellSummary<'a>>,
            checks: Vec<CellCheck>,
        }
        let summary = Summary {
            truth: self.truth,
            truth_rad: self.truth.radians(),
            config: &self.config,
            cells: self
                .cells
                .iter()
                .map(|c| CellSummary {
                    variant: c.variant,
                    velocity: c.velocity,
                    frame: c.frame,
                    dr_at_first_gamma: c.dr_at_first(),
                    gammas: &c.gammas,
                    dr: &c.dr,
                    np: &c.np,
                })
                .collect(),
            checks: self.checks(),
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellCheck {
    pub velocity: f64,
    pub improved_dr_at_first: Option<f64>,
    pub classic_dr_at_first: Option<f64>,
    pub improved_dr_min: Option<f64>,
    /// Improved DR ≥ [`DR_IMPROVED_MIN`] at every threshold.
    pub improved_dr_above_min: Option<bool>,
    /// Improved DR ≥ classic DR at the first threshold.
    pub improved_beats_classic: Option<bool>,
    pub np_non_increasing: bool,
}

/// Run both variants over `frames` and evaluate them at `frame_index`.
pub fn compare_models<I>(
    frames: I,
    cfg: &ModelConfig,
    schedule: &ThresholdSchedule,
    frame_index: usize,
    truth: Direction,
    velocity: f64,
) -> Result<MetricsReport>
where
    I: IntoIterator<Item = Result<LuminanceFrame>>,
{
    let warmup = cfg.warmup_frames();
    if frame_index < warmup {
        return Err(Error::WarmUp {
            frame: frame_index,
            warmup_frames: warmup,
        });
    }
    let mut pipeline: Option<Pipeline> = None;
    for (k, frame) in frames.into_iter().enumerate() {
        let frame = frame?;
        let p = match &mut pipeline {
            Some(p) => p,
            None => pipeline.insert(Pipeline::new(cfg, frame.width(), frame.height(), Variants::BOTH)?),
        };
        let out = p.process(&frame)?;
        if k == frame_index {
            let cells = [out.classic, out.improved]
                .into_iter()
                .flatten()
                .map(|f| ReportCell::evaluate(&f, schedule, truth, velocity, frame_index))
                .collect::<Result<Vec<_>>>()?;
            return Ok(MetricsReport {
                truth,
                config: cfg.clone(),
                cells,
            });
        }
    }
    Err(Error::invalid(
        "frame",
        format!("sequence ended before frame {frame_index}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Field;

    fn field_from(values: [Vec<f64>; 4], w: usize, h: usize) -> DirectionalField {
        DirectionalField {
            values: values.map(|v| Field::from_vec(w, h, v).unwrap()),
            timestamp: 0.0,
            variant: Variant::Improved,
        }
    }

    #[test]
    fn default_schedule() {
        let s = ThresholdSchedule::default();
        assert_eq!(s.gammas()[0], 0.01);
        assert_eq!(s.gammas()[1], 0.05);
        assert_eq!(s.gammas()[3], 0.15);
        assert_eq!(*s.gammas().last().unwrap(), 0.5);
        assert_eq!(s.len(), 11);
        assert_eq!(ThresholdSchedule::new(s.gammas().to_vec()).unwrap(), s);
    }

    #[test]
    fn schedule_validation() {
        assert!(ThresholdSchedule::new(vec![]).is_err());
        assert!(ThresholdSchedule::new(vec![0.02, 0.05]).is_err());
        assert!(ThresholdSchedule::new(vec![0.01, 0.05, 0.05]).is_err());
        assert!(ThresholdSchedule::new(vec![0.01, 1.5]).is_err());
        assert_eq!(ThresholdSchedule::parse("0.01, 0.05,0.1").unwrap().len(), 3);
        assert!(ThresholdSchedule::parse("0.01,x").is_err());
    }

    #[test]
    fn gamma_one_counts_nothing() {
        let f = field_from([vec![1.0, 0.5], vec![0.2, 0.0], vec![0.0, 1.0], vec![0.9, 0.9]], 2, 1);
        assert_eq!(count_detections(&f, 1.0).unwrap(), [0; 4]);
    }

    #[test]
    fn uniform_half_field() {
        let f = field_from([vec![0.5; 6], vec![0.5; 6], vec![0.5; 6], vec![0.5; 6]], 3, 2);
        assert_eq!(count_detections(&f, 0.4).unwrap(), [6; 4]);
    }

    #[test]
    fn counts_match_enumeration_on_4x4() {
        let vals: [Vec<f64>; 4] = std::array::from_fn(|d| {
            (0..16).map(|i| ((i * 7 + d * 5) % 11) as f64 / 10.0).collect()
        });
        let f = field_from(vals.clone(), 4, 4);
        let f = normalize(&f);
        for &g in &[0.01, 0.1, 0.35, 0.5, 0.9] {
            let counts = count_detections(&f, g).unwrap();
            for d in 0..4 {
                let mut n = 0;
                for y in 0..4 {
                    for x in 0..4 {
                        if f.values[d].get(x, y) > g {
                            n += 1;
                        }
                    }
                }
                assert_eq!(counts[d], n);
            }
        }
    }

    #[test]
    fn unnormalized_field_rejected() {
        let f = field_from([vec![2.0], vec![0.0], vec![0.0], vec![0.0]], 1, 1);
        assert!(matches!(count_detections(&f, 0.1), Err(Error::Contract(_))));
    }

    #[test]
    fn detection_rate_examples() {
        assert_eq!(detection_rate(&[90, 10, 10, 10], Direction::Right), Some(0.75));
        assert_eq!(detection_rate(&[0; 4], Direction::Right), None);
    }

    #[test]
    fn normalized_points_examples() {
        assert_eq!(normalized_points(&[8, 2]), vec![Some(0.8), Some(0.2)]);
        assert_eq!(normalized_points(&[5]), vec![Some(1.0)]);
        assert_eq!(normalized_points(&[0, 0]), vec![None, None]);
    }

    #[test]
    fn csv_shape_and_undefined_cells() {
        let f = field_from([vec![1.0], vec![0.0], vec![0.0], vec![0.0]], 1, 1);
        let schedule = ThresholdSchedule::new(vec![0.01, 1.0]).unwrap();
        let cell = ReportCell::evaluate(&f, &schedule, Direction::Right, 150.0, 840).unwrap();
        let report = MetricsReport {
            truth: Direction::Right,
            config: ModelConfig::default(),
            cells: vec![cell],
        };
        let csv = report.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], REPORT_CSV_HEADER);
        assert_eq!(lines.len(), 1 + 2 * 4);
        assert_eq!(lines[1], "improved,150,840,0.01,0,1,1,1");
        assert_eq!(lines[5], "improved,150,840,1,0,0,,0");
        assert!(report.summary_json().contains("\"checks\""));
    }
}
