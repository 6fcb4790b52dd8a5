use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use tqd_core::correlator::DirectionCsvWriter;
use tqd_core::metrics::{MetricsReport, ReportCell};
use tqd_core::pipeline::Variants;
use tqd_core::stimulus::SequenceManifest;
use tqd_core::{
    generate as render, read_sequence, write_sequence, Direction, Error, ModelConfig, Pipeline, Result, StimulusSpec,
    TextureSpec, ThresholdSchedule, Variant,
};

use crate::fields;
use crate::manifest::RunManifest;
use crate::{CompareArgs, GenerateArgs, MetricsArgs, RunArgs};

pub const DIRECTIONS_CSV: &str = "directions.csv";
pub const REPORT_CSV: &str = "report.csv";
pub const SUMMARY_JSON: &str = "summary.json";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(io_err(path))
}

fn lptc_file(frame: usize) -> String {
    format!("lptc_{frame:06}.f64")
}

fn stages_file(frame: usize) -> String {
    format!("stages_{frame:06}.f64")
}

fn load_config(path: Option<&Path>) -> Result<ModelConfig> {
    match path {
        Some(p) => ModelConfig::load(p),
        None => Ok(ModelConfig::default()),
    }
}

fn check_rate(cfg: &ModelConfig, m: &SequenceManifest, dir: &Path) -> Result<()> {
    if (m.sample_rate_hz * cfg.dt - 1.0).abs() > 1e-9 {
        return Err(Error::Config(format!(
            "{} is sampled at {} Hz but the model steps every {} s",
            dir.display(),
            m.sample_rate_hz,
            cfg.dt
        )));
    }
    Ok(())
}

pub fn generate(a: &GenerateArgs) -> Result<()> {
    let mut spec = StimulusSpec::new(a.size.0, a.size.1, a.frames, a.dir, a.vel, TextureSpec {
        kind: a.texture,
        seed: a.seed,
    });
    spec.sample_rate = a.rate;
    spec.luminance_range = a.luminance;
    let stimulus = render(&spec)?;
    let written = write_sequence(&a.out, &SequenceManifest::from_spec(&spec, a.seed), stimulus)?;
    eprintln!("wrote {} frames to {}", written.frames, a.out.display());
    Ok(())
}

pub fn run(a: &RunArgs) -> Result<()> {
    let start = Instant::now();
    let cfg = load_config(a.config.as_deref())?;
    let variant: Variant = a.model.into();
    let reader = read_sequence(&a.input)?;
    let stimulus = reader.manifest().clone();
    check_rate(&cfg, &stimulus, &a.input)?;
    create_dir(&a.out)?;

    let mut pipeline = Pipeline::new(&cfg, stimulus.width, stimulus.height, Variants::only(variant))?
        .with_stage_capture(a.dump_stages);
    let csv_path = a.out.join(DIRECTIONS_CSV);
    let file = File::create(&csv_path).map_err(io_err(&csv_path))?;
    let mut csv = DirectionCsvWriter::new(BufWriter::new(file)).map_err(io_err(&csv_path))?;
    let mut outputs = vec![DIRECTIONS_CSV.to_string()];
    let mut saved = Vec::new();

    for frame in reader {
        let out = pipeline.process(&frame?)?;
        let estimate = out.estimate(variant).expect("variant was requested");
        csv.write(&estimate, out.warmup).map_err(io_err(&csv_path))?;
        if a.save_fields.contains(&out.index) {
            let field = out.field(variant).expect("variant was requested");
            let name = lptc_file(out.index);
            fields::write(&a.out.join(&name), &fields::from_directional(field, out.index))?;
            outputs.push(name);
            if a.dump_stages {
                let name = stages_file(out.index);
                let raw = fields::RawField {
                    width: stimulus.width,
                    height: stimulus.height,
                    frame: out.index,
                    timestamp: out.timestamp,
                    variant: variant.to_string(),
                    layers: out.stages.iter().map(|(n, f)| (n.to_string(), f.clone())).collect(),
                };
                fields::write(&a.out.join(&name), &raw)?;
                outputs.push(name);
            }
            saved.push(out.index);
        }
    }
    csv.finish().map_err(io_err(&csv_path))?;

    RunManifest {
        command: "run".into(),
        variants: vec![variant],
        input: a.input.clone(),
        output: a.out.clone(),
        outputs,
        saved_frames: saved,
        wall_clock_s: start.elapsed().as_secs_f64(),
        config: cfg,
        stimulus,
    }
    .write(&a.out)
}

fn write_report(out: &Path, report: &MetricsReport) -> Result<()> {
    create_dir(out)?;
    let path = out.join(REPORT_CSV);
    fs::write(&path, report.to_csv()).map_err(io_err(&path))?;
    let path = out.join(SUMMARY_JSON);
    fs::write(&path, report.summary_json() + "\n").map_err(io_err(&path))
}

fn schedule(g: &Option<ThresholdSchedule>) -> ThresholdSchedule {
    g.clone().unwrap_or_default()
}

pub fn metrics(a: &MetricsArgs) -> Result<()> {
    let schedule = schedule(&a.gammas);
    let mut cells = Vec::new();
    let mut truth = a.truth;
    let mut config = None;
    for dir in &a.runs {
        let m = RunManifest::load(dir)?;
        let warmup = m.config.warmup_frames();
        if a.frame < warmup {
            return Err(Error::WarmUp {
                frame: a.frame,
                warmup_frames: warmup,
            });
        }
        let truth = *truth.get_or_insert(m.stimulus.direction);
        let path = dir.join(lptc_file(a.frame));
        if !m.saved_frames.contains(&a.frame) || !path.is_file() {
            return Err(Error::Format {
                path,
                frame: Some(a.frame),
                reason: format!("frame not saved by this run; rerun with --save-fields {}", a.frame),
            });
        }
        let field = fields::to_directional(fields::read(&path)?, &path)?;
        cells.push(ReportCell::evaluate(&field, &schedule, truth, m.stimulus.velocity_px_s, a.frame)?);
        config.get_or_insert(m.config);
    }
    let report = MetricsReport {
        truth: truth.expect("at least one run"),
        config: config.expect("at least one run"),
        cells,
    };
    write_report(&a.out, &report)
}

struct Compared {
    dir_name: String,
    cells: Vec<ReportCell>,
    direction: Direction,
}

fn compare_one(
    input: &Path,
    out: &Path,
    cfg: &ModelConfig,
    frame: usize,
    truth: Option<Direction>,
    schedule: &ThresholdSchedule,
) -> Result<Compared> {
    let start = Instant::now();
    let reader = read_sequence(input)?;
    let stimulus = reader.manifest().clone();
    check_rate(cfg, &stimulus, input)?;
    let truth = truth.unwrap_or(stimulus.direction);
    let dir_name = input
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "sequence".into());
    let run_dir = out.join(&dir_name);
    create_dir(&run_dir)?;

    let mut pipeline = Pipeline::new(cfg, stimulus.width, stimulus.height, Variants::BOTH)?;
    let mut writers = Vec::new();
    for v in [Variant::Classic, Variant::Improved] {
        let path = run_dir.join(format!("directions_{v}.csv"));
        let file = File::create(&path).map_err(io_err(&path))?;
        writers.push((v, DirectionCsvWriter::new(BufWriter::new(file)).map_err(io_err(&path))?, path));
    }
    let mut cells = Vec::new();
    for f in reader {
        let out = pipeline.process(&f?)?;
        for (v, w, path) in &mut writers {
            w.write(&out.estimate(*v).expect("both variants run"), out.warmup)
                .map_err(io_err(path))?;
        }
        if out.index == frame {
            for v in [Variant::Classic, Variant::Improved] {
                let field = out.field(v).expect("both variants run");
                cells.push(ReportCell::evaluate(field, schedule, truth, stimulus.velocity_px_s, frame)?);
                fields::write(&run_dir.join(format!("lptc_{v}_{frame:06}.f64")), &fields::from_directional(field, frame))?;
            }
        }
    }
    let mut outputs = Vec::new();
    for (v, w, path) in writers {
        w.finish().map_err(io_err(&path))?;
        outputs.push(format!("directions_{v}.csv"));
    }
    if cells.is_empty() {
        return Err(Error::Format {
            path: input.to_path_buf(),
            frame: Some(frame),
            reason: format!("sequence has only {} frames", stimulus.frames),
        });
    }
    RunManifest {
        command: "compare".into(),
        variants: vec![Variant::Classic, Variant::Improved],
        input: input.to_path_buf(),
        output: run_dir.clone(),
        outputs,
        saved_frames: vec![frame],
        wall_clock_s: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
        stimulus: stimulus.clone(),
    }
    .write(&run_dir)?;
    Ok(Compared {
        dir_name,
        cells,
        direction: stimulus.direction,
    })
}

pub fn compare(a: &CompareArgs) -> Result<()> {
    let cfg = load_config(a.config.as_deref())?;
    let warmup = cfg.warmup_frames();
    if a.frame < warmup {
        return Err(Error::WarmUp {
            frame: a.frame,
            warmup_frames: warmup,
        });
    }
    let schedule = schedule(&a.gammas);
    let mut names: Vec<PathBuf> = a.inputs.iter().filter_map(|p| p.file_name().map(PathBuf::from)).collect();
    names.sort();
    if names.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::Config("input directories must have distinct names".into()));
    }
    create_dir(&a.out)?;
    let results = a
        .inputs
        .par_iter()
        .map(|input| compare_one(input, &a.out, &cfg, a.frame, a.truth, &schedule))
        .collect::<Result<Vec<_>>>()?;
    let truth = match a.truth {
        Some(t) => t,
        None => {
            let first = results[0].direction;
            if let Some(r) = results.iter().find(|r| r.direction != first) {
                return Err(Error::Config(format!(
                    "{} moves {} but the first input moves {}; pass --truth",
                    r.dir_name, r.direction, first
                )));
            }
            first
        }
    };
    let report = MetricsReport {
        truth,
        config: cfg,
        cells: results.into_iter().flat_map(|r| r.cells).collect(),
    };
    write_report(&a.out, &report)
}
