//! Sequence directories: `manifest.txt` plus `frame_000000.pgm`, ...

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::direction::Direction;
use crate::error::{Error, Result};
use crate::field::LuminanceFrame;

use super::pgm::{read_pgm, write_pgm};
use super::StimulusSpec;

pub const MANIFEST_FILE: &str = "manifest.txt";

const REQUIRED: [&str; 8] = [
    "width",
    "height",
    "frames",
    "sample_rate_hz",
    "direction_rad",
    "velocity_px_s",
    "texture",
    "seed",
];

/// Describes a stored sequence. Keys beyond the required set are kept in `extra`.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceManifest {
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    pub sample_rate_hz: f64,
    pub direction: Direction,
    pub velocity_px_s: f64,
    pub texture: String,
    pub seed: u64,
    pub extra: BTreeMap<String, String>,
}

impl SequenceManifest {
    pub fn from_spec(spec: &StimulusSpec, seed: u64) -> Self {
        let mut extra = BTreeMap::new();
        extra.insert("luminance_lo".into(), spec.luminance_range.0.to_string());
        extra.insert("luminance_hi".into(), spec.luminance_range.1.to_string());
        Self {
            width: spec.width,
            height: spec.height,
            frames: spec.frame_count,
            sample_rate_hz: spec.sample_rate,
            direction: spec.direction,
            velocity_px_s: spec.velocity,
            texture: spec.texture.kind.to_string(),
            seed,
            extra,
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "width={}", self.width);
        let _ = writeln!(s, "height={}", self.height);
        let _ = writeln!(s, "frames={}", self.frames);
        let _ = writeln!(s, "sample_rate_hz={}", self.sample_rate_hz);
        let _ = writeln!(s, "direction_rad={}", self.direction.radians());
        let _ = writeln!(s, "velocity_px_s={}", self.velocity_px_s);
        let _ = writeln!(s, "texture={}", self.texture);
        let _ = writeln!(s, "seed={}", self.seed);
        for (k, v) in &self.extra {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let bad = |reason: String| Error::format(path, None, reason);
        let mut map = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| bad(format!("line {}: expected key=value", lineno + 1)))?;
            if map.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
                return Err(bad(format!("duplicate key `{}`", k.trim())));
            }
        }
        for key in REQUIRED {
            if !map.contains_key(key) {
                return Err(bad(format!("missing key `{key}`")));
            }
        }
        fn num<T: std::str::FromStr>(map: &mut BTreeMap<String, String>, key: &str, path: &Path) -> Result<T> {
            let raw = map.remove(key).expect("required keys checked");
            raw.parse()
                .map_err(|_| Error::format(path, None, format!("key `{key}`: cannot parse `{raw}`")))
        }
        let width = num(&mut map, "width", path)?;
        let height = num(&mut map, "height", path)?;
        let frames = num(&mut map, "frames", path)?;
        let sample_rate_hz: f64 = num(&mut map, "sample_rate_hz", path)?;
        let direction_rad: f64 = num(&mut map, "direction_rad", path)?;
        let velocity_px_s = num(&mut map, "velocity_px_s", path)?;
        let seed = num(&mut map, "seed", path)?;
        let texture = map.remove("texture").expect("required keys checked");
        let direction = Direction::from_radians(direction_rad).map_err(|e| bad(e.to_string()))?;
        if width == 0 || height == 0 {
            return Err(bad(format!("zero-area frames ({width}x{height})")));
        }
        if !(sample_rate_hz > 0.0) {
            return Err(bad(format!("sample_rate_hz must be positive, got {sample_rate_hz}")));
        }
        Ok(Self {
            width,
            height,
            frames,
            sample_rate_hz,
            direction,
            velocity_px_s,
            texture,
            seed,
            extra: map,
        })
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Self::parse(&text, &path)
    }
}

pub fn frame_file_name(k: usize) -> String {
    format!("frame_{k:06}.pgm")
}

/// Write `frames` into `dir` (created if needed), then the manifest.
///
/// The manifest's frame count is taken from what was actually written.
pub fn write_sequence(
    dir: &Path,
    manifest: &SequenceManifest,
    frames: impl IntoIterator<Item = LuminanceFrame>,
) -> Result<SequenceManifest> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = 0;
    for (k, frame) in frames.into_iter().enumerate() {
        let path = dir.join(frame_file_name(k));
        if frame.field.dims() != (manifest.width, manifest.height) {
            return Err(Error::format(
                &path,
                Some(k),
                format!(
                    "frame is {}x{}, manifest says {}x{}",
                    frame.width(),
                    frame.height(),
                    manifest.width,
                    manifest.height
                ),
            ));
        }
        write_pgm(&path, &frame.field)?;
        written += 1;
    }
    let mut out = manifest.clone();
    out.frames = written;
    let path = dir.join(MANIFEST_FILE);
    fs::write(&path, out.to_text()).map_err(|e| Error::io(&path, e))?;
    Ok(out)
}

/// Open a sequence directory, checking that exactly `frames` frame files exist.
pub fn read_sequence(dir: &Path) -> Result<SequenceReader> {
    let manifest = SequenceManifest::load(dir)?;
    for k in 0..manifest.frames {
        let path = dir.join(frame_file_name(k));
        if !path.is_file() {
            return Err(Error::format(&path, Some(k), "frame file missing"));
        }
    }
    let extra = dir.join(frame_file_name(manifest.frames));
    if extra.exists() {
        return Err(Error::format(
            &extra,
            Some(manifest.frames),
            format!("manifest lists {} frames but more are present", manifest.frames),
        ));
    }
    Ok(SequenceReader {
        dir: dir.to_path_buf(),
        manifest,
        next: 0,
    })
}

/// Streams frames from disk in order.
#[derive(Debug)]
pub struct SequenceReader {
    dir: PathBuf,
    manifest: SequenceManifest,
    next: usize,
}

impl SequenceReader {
    pub fn manifest(&self) -> &SequenceManifest {
        &self.manifest
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn load(&self, k: usize) -> Result<LuminanceFrame> {
        let path = self.dir.join(frame_file_name(k));
        if !path.is_file() {
            return Err(Error::format(&path, Some(k), "frame file missing"));
        }
        let field = read_pgm(&path).map_err(|e| match e {
            Error::Format { path, reason, .. } => Error::Format {
                path,
                frame: Some(k),
                reason,
            },
            other => other,
        })?;
        let m = &self.manifest;
        if field.dims() != (m.width, m.height) {
            return Err(Error::format(
                &path,
                Some(k),
                format!(
                    "frame is {}x{}, manifest says {}x{}",
                    field.width(),
                    field.height(),
                    m.width,
                    m.height
                ),
            ));
        }
        Ok(LuminanceFrame::new(field, k as f64 / m.sample_rate_hz))
    }
}

impl Iterator for SequenceReader {
    type Item = Result<LuminanceFrame>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.next >= self.manifest.frames {
            return None;
        }
        let k = self.next;
        self.next += 1;
        Some(self.load(k))
    }
}
