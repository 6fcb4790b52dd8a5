//! Raw dumps of response fields: a short text header followed by
//! little-endian `f64` samples, one layer after another.

use std::fs;
use std::path::Path;

use tqd_core::{Direction, DirectionalField, Error, Field, Result, Variant};

const MAGIC: &str = "tqd-field v1";

pub struct RawField {
    pub width: usize,
    pub height: usize,
    pub frame: usize,
    pub timestamp: f64,
    pub variant: String,
    pub layers: Vec<(String, Field)>,
}

pub fn write(path: &Path, raw: &RawField) -> Result<()> {
    let names: Vec<&str> = raw.layers.iter().map(|(n, _)| n.as_str()).collect();
    let mut bytes = format!(
        "{MAGIC}\nwidth={}\nheight={}\nframe={}\ntimestamp={}\nvariant={}\nlayers={}\nend\n",
        raw.width,
        raw.height,
        raw.frame,
        raw.timestamp,
        raw.variant,
        names.join(",")
    )
    .into_bytes();
    for (_, f) in &raw.layers {
        for v in f.as_slice() {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    }
    fs::write(path, bytes).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read(path: &Path) -> Result<RawField> {
    let bytes = fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let bad = |reason: String| Error::Format {
        path: path.to_path_buf(),
        frame: None,
        reason,
    };
    let mut pos = 0;
    let mut next_line = || -> Result<String> {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| bad("truncated header".into()))?;
        let line = String::from_utf8_lossy(&bytes[pos..pos + end]).into_owned();
        pos += end + 1;
        Ok(line)
    };
    if next_line()? != MAGIC {
        return Err(bad("not a tqd field dump".into()));
    }
    let mut kv = std::collections::BTreeMap::new();
    loop {
        let line = next_line()?;
        if line == "end" {
            break;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| bad(format!("bad header line `{line}`")))?;
        kv.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| kv.get(k).cloned().ok_or_else(|| bad(format!("header lacks `{k}`")));
    let num = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| bad(format!("bad `{k}`"))) };
    let (width, height, frame) = (num("width")?, num("height")?, num("frame")?);
    let timestamp: f64 = get("timestamp")?.parse().map_err(|_| bad("bad `timestamp`".into()))?;
    let names: Vec<String> = get("layers")?.split(',').map(str::to_string).collect();
    let n = width * height;
    let body = &bytes[pos..];
    if body.len() != names.len() * n * 8 {
        return Err(bad(format!(
            "expected {} bytes of samples, found {}",
            names.len() * n * 8,
            body.len()
        )));
    }
    let layers = names
        .into_iter()
        .enumerate()
        .map(|(i, name)| {
            let data = body[i * n * 8..(i + 1) * n * 8]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
                .collect();
            Ok((name, Field::from_vec(width, height, data)?))
        })
        .collect::<Result<_>>()?;
    Ok(RawField {
        width,
        height,
        frame,
        timestamp,
        variant: get("variant")?,
        layers,
    })
}

pub fn from_directional(f: &DirectionalField, frame: usize) -> RawField {
    let (width, height) = f.dims();
    RawField {
        width,
        height,
        frame,
        timestamp: f.timestamp,
        variant: f.variant.to_string(),
        layers: Direction::ALL
            .iter()
            .map(|&d| (d.name().to_string(), f.get(d).clone()))
            .collect(),
    }
}

pub fn to_directional(raw: RawField, path: &Path) -> Result<DirectionalField> {
    let variant: Variant = raw.variant.parse()?;
    let mut layers = raw.layers.into_iter();
    let mut values = Vec::with_capacity(4);
    for d in Direction::ALL {
        match layers.next() {
            Some((name, field)) if name == d.name() => values.push(field),
            _ => {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    frame: Some(raw.frame),
                    reason: "layers are not the four directions in order".into(),
                })
            }
        }
    }
    Ok(DirectionalField {
        values: values.try_into().expect("four layers"),
        timestamp: raw.timestamp,
        variant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> DirectionalField {
        let mut f = DirectionalField::zeros(5, 3, 0.84, Variant::Improved);
        for (i, d) in Direction::ALL.iter().enumerate() {
            f.values[d.index()] = Field::from_fn(5, 3, |x, y| (i * 100 + y * 5 + x) as f64 / 7.0 - 1e-300);
        }
        f
    }

    #[test]
    fn directional_round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.f64");
        let f = sample();
        write(&path, &from_directional(&f, 840)).unwrap();
        let raw = read(&path).unwrap();
        assert_eq!((raw.width, raw.height, raw.frame, raw.variant.as_str()), (5, 3, 840, "improved"));
        let back = to_directional(raw, &path).unwrap();
        assert_eq!(back.values, f.values);
        assert_eq!(back.timestamp, f.timestamp);
        assert_eq!(back.variant, Variant::Improved);
    }

    #[test]
    fn truncated_payload_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.f64");
        write(&path, &from_directional(&sample(), 1)).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 8);
        fs::write(&path, bytes).unwrap();
        assert!(matches!(read(&path), Err(Error::Format { .. })));
    }

    #[test]
    fn wrong_layer_order_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.f64");
        let mut raw = from_directional(&sample(), 1);
        raw.layers.swap(0, 1);
        write(&path, &raw).unwrap();
        assert!(to_directional(read(&path).unwrap(), &path).is_err());
    }
}
