//! Binary greyscale PGM (P5). Writes 16-bit big-endian samples with
//! maxval 65535; reads any maxval up to 65535.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::Field;

const MAXVAL: f64 = 65535.0;

/// Quantize `field` (expected in `[0, 1]`, clamped otherwise) and write it.
pub fn write_pgm(path: &Path, field: &Field) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut buf = Vec::with_capacity(field.len() * 2 + 32);
    write!(buf, "P5\n{} {}\n65535\n", field.width(), field.height()).expect("vec write");
    for &v in field.as_slice() {
        let q = (v.clamp(0.0, 1.0) * MAXVAL).round() as u16;
        buf.extend_from_slice(&q.to_be_bytes());
    }
    w.write_all(&buf).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Read a P5 file into a field scaled to `[0, 1]`.
pub fn read_pgm(path: &Path) -> Result<Field> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    BufReader::new(file)
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes).map_err(|reason| Error::format(path, None, reason))
}

fn decode(bytes: &[u8]) -> std::result::Result<Field, String> {
    let mut pos = 0;
    let magic = token(bytes, &mut pos).ok_or("empty file")?;
    if magic != b"P5" {
        return Err(format!("not a binary PGM (magic {:?})", String::from_utf8_lossy(magic)));
    }
    let mut number = |what: &str| -> std::result::Result<usize, String> {
        let t = token(bytes, &mut pos).ok_or_else(|| format!("missing {what}"))?;
        std::str::from_utf8(t)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| format!("bad {what}: {:?}", String::from_utf8_lossy(t)))
    };
    let width = number("width")?;
    let height = number("height")?;
    let maxval = number("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(format!("maxval {maxval} out of range"));
    }
    // exactly one whitespace byte separates the header from the raster
    pos += 1;
    let wide = maxval > 255;
    let need = width * height * if wide { 2 } else { 1 };
    let raster = bytes.get(pos..).unwrap_or(&[]);
    if raster.len() < need {
        return Err(format!("raster truncated: {} of {need} bytes", raster.len()));
    }
    let scale = 1.0 / maxval as f64;
    let data = if wide {
        raster[..need]
            .chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
            .collect()
    } else {
        raster[..need].iter().map(|&b| b as f64 * scale).collect()
    };
    Field::from_vec(width, height, data).map_err(|e| e.to_string())
}

/// Next whitespace-delimited header token, skipping `#` comments.
fn token<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b'#' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
            continue;
        }
        break;
    }
    let start = *pos;
    while *pos < bytes.len() && !bytes[*pos].is_ascii_whitespace() {
        *pos += 1;
    }
    (*pos > start).then(|| &bytes[start..*pos])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_with_comment_and_8bit() {
        let mut bytes = b"P5\n# made by hand\n2 1\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 255]);
        let f = decode(&bytes).unwrap();
        assert_eq!(f.as_slice(), &[0.0, 1.0]);
    }

    #[test]
    fn truncated_raster_is_rejected() {
        let mut bytes = b"P5 2 2 65535\n".to_vec();
        bytes.extend_from_slice(&[0, 1, 0, 2]);
        assert!(decode(&bytes).unwrap_err().contains("truncated"));
    }

    #[test]
    fn wrong_magic() {
        assert!(decode(b"P2 1 1 255\n0").is_err());
    }
}
