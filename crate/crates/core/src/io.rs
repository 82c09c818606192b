//! File formats: WAV, CSV and the binary motion-frame stack.

use std::fs::{self, File};
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dsp::{Gate, MotionFrame};
use crate::error::{Error, Result};
use crate::signal::Waveform;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WavFormat {
    Int16,
    #[default]
    Float32,
}

/// Writes a mono WAV. Integer output clips to full scale.
pub fn write_wav(path: &Path, waveform: &Waveform, format: WavFormat) -> Result<()> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: waveform.sample_rate_hz.round() as u32,
        bits_per_sample: match format {
            WavFormat::Int16 => 16,
            WavFormat::Float32 => 32,
        },
        sample_format: match format {
            WavFormat::Int16 => hound::SampleFormat::Int,
            WavFormat::Float32 => hound::SampleFormat::Float,
        },
    };
    let mut w = hound::WavWriter::create(path, spec).map_err(wav_err)?;
    for &v in &waveform.samples {
        match format {
            WavFormat::Int16 => {
                w.write_sample((v.clamp(-1.0, 1.0) * i16::MAX as f64).round() as i16).map_err(wav_err)?
            }
            WavFormat::Float32 => w.write_sample(v as f32).map_err(wav_err)?,
        }
    }
    w.finalize().map_err(wav_err)
}

/// Reads a mono WAV (first channel of multi-channel files).
pub fn read_wav(path: &Path) -> Result<Waveform> {
    let mut reader = hound::WavReader::open(path).map_err(wav_err)?;
    let spec = reader.spec();
    let channels = spec.channels.max(1) as usize;
    let expected = reader.len() as usize;
    let samples: Vec<f64> = match (spec.sample_format, spec.bits_per_sample) {
        (hound::SampleFormat::Float, 32) => {
            reader.samples::<f32>().map(|s| s.map(f64::from)).collect::<std::result::Result<_, _>>()
        }
        (hound::SampleFormat::Int, bits) if (8..=32).contains(&bits) => {
            let full = (1i64 << (bits - 1)) as f64;
            reader.samples::<i32>().map(|s| s.map(|v| v as f64 / full)).collect::<std::result::Result<_, _>>()
        }
        (fmt, bits) => return Err(Error::MalformedWav(format!("unsupported sample format {fmt:?}/{bits}"))),
    }
    .map_err(|e| Error::MalformedWav(e.to_string()))?;
    if samples.len() != expected {
        return Err(Error::MalformedWav(format!("expected {expected} samples, found {}", samples.len())));
    }
    let mono = samples.into_iter().step_by(channels).collect();
    Waveform::new(mono, spec.sample_rate as f64)
}

fn wav_err(e: hound::Error) -> Error {
    match e {
        hound::Error::IoError(io)
            if !matches!(io.kind(), std::io::ErrorKind::UnexpectedEof | std::io::ErrorKind::Other) =>
        {
            Error::Io(io)
        }
        other => Error::MalformedWav(other.to_string()),
    }
}

/// `time_s,value` rows.
pub fn write_waveform_csv(path: &Path, waveform: &Waveform) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "time_s,value")?;
    for (i, v) in waveform.samples.iter().enumerate() {
        writeln!(w, "{},{}", i as f64 / waveform.sample_rate_hz, v)?;
    }
    w.flush()?;
    Ok(())
}

/// `frame,lag_s,value` rows for every lag of every frame.
pub fn write_frames_csv(path: &Path, frames: &[MotionFrame], sample_rate_hz: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "frame,lag_s,value")?;
    for (f, frame) in frames.iter().enumerate() {
        for (lag, v) in frame.values.iter().enumerate() {
            writeln!(w, "{f},{},{v}", lag as f64 / sample_rate_hz)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One CSV row per feature vector: label first, then the values.
pub fn write_feature_rows<'a>(path: &Path, rows: impl IntoIterator<Item = (&'a str, &'a [f64])>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for (label, values) in rows {
        write!(w, "{label}")?;
        for v in values {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_feature_rows(path: &Path) -> Result<Vec<(String, Vec<f64>)>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let mut cells = line.split(',');
            let label = cells.next().unwrap_or_default().to_string();
            let values = cells
                .map(|c| c.trim().parse::<f64>().map_err(|e| Error::MalformedData(format!("{c}: {e}"))))
                .collect::<Result<_>>()?;
            Ok((label, values))
        })
        .collect()
}

pub const FRAME_STACK_MAGIC: [u8; 2] = *b"MF";
pub const FRAME_STACK_VERSION: u16 = 1;

/// 16-byte little-endian frame-stack header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameStackHeader {
    pub version: u16,
    pub frame_len: u32,
    pub frame_count: u32,
    pub sample_rate: u32,
}

impl FrameStackHeader {
    pub fn to_bytes(&self) -> [u8; 16] {
        let mut b = [0u8; 16];
        b[..2].copy_from_slice(&FRAME_STACK_MAGIC);
        b[2..4].copy_from_slice(&self.version.to_le_bytes());
        b[4..8].copy_from_slice(&self.frame_len.to_le_bytes());
        b[8..12].copy_from_slice(&self.frame_count.to_le_bytes());
        b[12..16].copy_from_slice(&self.sample_rate.to_le_bytes());
        b
    }

    pub fn from_bytes(b: &[u8; 16]) -> Result<Self> {
        if b[..2] != FRAME_STACK_MAGIC {
            return Err(Error::MalformedData("not a frame-stack file".into()));
        }
        let u32_at = |i: usize| u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]]);
        let h = Self {
            version: u16::from_le_bytes([b[2], b[3]]),
            frame_len: u32_at(4),
            frame_count: u32_at(8),
            sample_rate: u32_at(12),
        };
        if h.version != FRAME_STACK_VERSION {
            return Err(Error::MalformedData(format!("unsupported frame-stack version {}", h.version)));
        }
        Ok(h)
    }
}

/// Header followed by `frame_count * frame_len` little-endian `f64` values.
pub fn write_frame_stack(path: &Path, frames: &[MotionFrame], sample_rate_hz: f64) -> Result<()> {
    let frame_len = frames.first().map_or(0, MotionFrame::len);
    if let Some(bad) = frames.iter().find(|f| f.len() != frame_len) {
        return Err(Error::DimensionMismatch { expected: frame_len, actual: bad.len() });
    }
    let header = FrameStackHeader {
        version: FRAME_STACK_VERSION,
        frame_len: frame_len as u32,
        frame_count: frames.len() as u32,
        sample_rate: sample_rate_hz.round() as u32,
    };
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&header.to_bytes())?;
    for f in frames {
        for v in &f.values {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_frame_stack(path: &Path, gate: Gate) -> Result<(FrameStackHeader, Vec<MotionFrame>)> {
    let mut bytes = Vec::new();
    File::open(path)?.read_to_end(&mut bytes)?;
    let head: &[u8; 16] = bytes
        .get(..16)
        .and_then(|h| h.try_into().ok())
        .ok_or_else(|| Error::MalformedData("frame-stack header truncated".into()))?;
    let header = FrameStackHeader::from_bytes(head)?;
    let (len, count) = (header.frame_len as usize, header.frame_count as usize);
    let body = &bytes[16..];
    if body.len() != len * count * 8 {
        return Err(Error::MalformedData(format!(
            "frame-stack payload is {} bytes, expected {}",
            body.len(),
            len * count * 8
        )));
    }
    let values: Vec<f64> =
        body.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk"))).collect();
    let frames = if len == 0 {
        vec![MotionFrame { values: Vec::new(), gate }; count]
    } else {
        values.chunks(len).map(|c| MotionFrame { values: c.to_vec(), gate }).collect()
    };
    Ok((header, frames))
}
