//! `run_manifest.txt`: everything needed to repeat a run.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use tqd_core::stimulus::SequenceManifest;
use tqd_core::{Error, ModelConfig, Result, Variant};

pub const RUN_MANIFEST: &str = "run_manifest.txt";
pub const CONFIG_FILE: &str = "config.cfg";

#[derive(Debug)]
pub struct RunManifest {
    pub command: String,
    pub variants: Vec<Variant>,
    pub input: PathBuf,
    pub output: PathBuf,
    pub outputs: Vec<String>,
    pub saved_frames: Vec<usize>,
    pub wall_clock_s: f64,
    pub config: ModelConfig,
    pub stimulus: SequenceManifest,
}

impl RunManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tool=tqd {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "command={}", self.command);
        let names: Vec<&str> = self.variants.iter().map(|v| v.name()).collect();
        let _ = writeln!(s, "variants={}", names.join(","));
        let _ = writeln!(s, "input={}", self.input.display());
        let _ = writeln!(s, "output={}", self.output.display());
        let _ = writeln!(s, "outputs={}", self.outputs.join(","));
        let frames: Vec<String> = self.saved_frames.iter().map(|f| f.to_string()).collect();
        let _ = writeln!(s, "saved_frames={}", frames.join(","));
        let _ = writeln!(s, "wall_clock_s={:.3}", self.wall_clock_s);
        for line in self.config.to_text().lines() {
            let _ = writeln!(s, "config.{line}");
        }
        for line in self.stimulus.to_text().lines() {
            let _ = writeln!(s, "stimulus.{line}");
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        let path = dir.join(RUN_MANIFEST);
        fs::write(&path, self.to_text()).map_err(|source| Error::Io { path, source })?;
        let path = dir.join(CONFIG_FILE);
        fs::write(&path, self.config.to_text()).map_err(|source| Error::Io { path, source })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(RUN_MANIFEST);
        let text = fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        let bad = |reason: String| Error::Format {
            path: path.clone(),
            frame: None,
            reason,
        };
        let mut top = BTreeMap::new();
        let (mut config, mut stimulus) = (String::new(), String::new());
        for line in text.lines() {
            if let Some(rest) = line.strip_prefix("config.") {
                config.push_str(rest);
                config.push('\n');
            } else if let Some(rest) = line.strip_prefix("stimulus.") {
                stimulus.push_str(rest);
                stimulus.push('\n');
            } else if let Some((k, v)) = line.split_once('=') {
                top.insert(k.to_string(), v.to_string());
            }
        }
        let get = |k: &str| top.get(k).cloned().ok_or_else(|| bad(format!("missing key `{k}`")));
        let variants = get("variants")?
            .split(',')
            .map(|v| v.parse())
            .collect::<Result<Vec<Variant>>>()?;
        let saved_frames = get("saved_frames")?
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|f| f.parse().map_err(|_| bad(format!("bad saved frame `{f}`"))))
            .collect::<Result<Vec<usize>>>()?;
        Ok(Self {
            command: get("command")?,
            variants,
            input: get("input")?.into(),
            output: get("output")?.into(),
            outputs: get("outputs")?.split(',').map(str::to_string).collect(),
            saved_frames,
            wall_clock_s: get("wall_clock_s")?.parse().unwrap_or(f64::NAN),
            config: ModelConfig::parse(&config)?,
            stimulus: SequenceManifest::parse(&stimulus, &path)?,
        })
    }
}
