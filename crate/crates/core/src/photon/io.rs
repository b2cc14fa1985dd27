//! Photon-stream import/export.
//!
//! One channel per file. Two encodings:
//! - binary: consecutive little-endian signed 64-bit timestamps in
//!   picoseconds, no header;
//! - text: one decimal timestamp (ps) per line, `#` comments allowed.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::photon::PhotonStream;

/// Write the little-endian binary timestamp layout.
pub fn write_binary<W: Write>(stream: &PhotonStream, mut writer: W) -> Result<()> {
    for &t in stream.timestamps_ps() {
        writer.write_all(&t.to_le_bytes())?;
    }
    Ok(())
}

/// Read the little-endian binary timestamp layout. `duration_s` may be given
/// explicitly; otherwise the acquisition window is taken to end at the last
/// timestamp (rounded up to the next full millisecond).
pub fn read_binary<R: Read>(
    mut reader: R,
    channel: u32,
    duration_s: Option<f64>,
) -> Result<PhotonStream> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() % 8 != 0 {
        return Err(Error::Parse {
            line: 0,
            message: format!(
                "binary stream length {} is not a multiple of 8 bytes",
                bytes.len()
            ),
        });
    }
    let timestamps: Vec<i64> = bytes
        .chunks_exact(8)
        .map(|c| i64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    finish_import(timestamps, channel, duration_s)
}

/// Write the one-timestamp-per-line text layout.
pub fn write_text<W: Write>(stream: &PhotonStream, mut writer: W) -> Result<()> {
    writeln!(writer, "# vibronix photon stream, picoseconds")?;
    writeln!(writer, "# channel: {}", stream.channel)?;
    writeln!(writer, "# duration_s: {}", stream.duration_s)?;
    for &t in stream.timestamps_ps() {
        writeln!(writer, "{t}")?;
    }
    Ok(())
}

/// Read the text layout; `# duration_s:` comments are honored.
pub fn read_text<R: Read>(reader: R, channel: u32, duration_s: Option<f64>) -> Result<PhotonStream> {
    use std::io::{BufRead, BufReader};
    let mut timestamps = Vec::new();
    let mut duration = duration_s;
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("duration_s:") {
                if duration.is_none() {
                    duration = v.trim().parse::<f64>().ok();
                }
            }
            continue;
        }
        let t: i64 = trimmed.parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("unparsable timestamp '{trimmed}'"),
        })?;
        timestamps.push(t);
    }
    finish_import(timestamps, channel, duration)
}

/// Save in binary layout to a path.
pub fn save_binary(stream: &PhotonStream, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_binary(stream, std::io::BufWriter::new(file))
}

/// Load the binary layout from a path.
pub fn load_binary(path: impl AsRef<Path>, channel: u32, duration_s: Option<f64>) -> Result<PhotonStream> {
    let file = std::fs::File::open(path)?;
    read_binary(std::io::BufReader::new(file), channel, duration_s)
}

/// Save in text layout to a path.
pub fn save_text(stream: &PhotonStream, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_text(stream, std::io::BufWriter::new(file))
}

/// Load the text layout from a path.
pub fn load_text(path: impl AsRef<Path>, channel: u32, duration_s: Option<f64>) -> Result<PhotonStream> {
    let file = std::fs::File::open(path)?;
    read_text(std::io::BufReader::new(file), channel, duration_s)
}

fn finish_import(timestamps: Vec<i64>, channel: u32, duration_s: Option<f64>) -> Result<PhotonStream> {
    let duration = duration_s.unwrap_or_else(|| {
        let last = timestamps.last().copied().unwrap_or(0).max(1) as f64 * 1e-12;
        (last * 1e3).ceil() / 1e3
    });
    PhotonStream::new(timestamps, channel, duration, 0)
}
