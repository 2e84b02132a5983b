//! Binary waveform files: little-endian header `"NSCM"`, `u16` version,
//! `u16` flags (bit 0: complex), `f64` sample rate, `u64` sample count,
//! then `f32` samples (I/Q interleaved when complex).

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::dsp::{ComplexWaveform, RealWaveform};
use crate::error::{Error, Result};

pub const WAVEFORM_MAGIC: &[u8; 4] = b"NSCM";
pub const WAVEFORM_VERSION: u16 = 1;
const HEADER_LEN: usize = 24;
const FLAG_COMPLEX: u16 = 1;

/// Either kind of waveform.
#[derive(Debug, Clone, PartialEq)]
pub enum Waveform {
    Real(RealWaveform),
    Complex(ComplexWaveform),
}

impl Waveform {
    pub fn sample_rate(&self) -> f64 {
        match self {
            Waveform::Real(w) => w.sample_rate(),
            Waveform::Complex(w) => w.sample_rate(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Waveform::Real(w) => w.len(),
            Waveform::Complex(w) => w.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Serializes `w` into the file layout.
pub fn encode_waveform(w: &Waveform) -> Vec<u8> {
    let (flags, values): (u16, Vec<f64>) = match w {
        Waveform::Real(x) => (0, x.samples().to_vec()),
        Waveform::Complex(x) => (
            FLAG_COMPLEX,
            x.samples().iter().flat_map(|c| [c.re, c.im]).collect(),
        ),
    };
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * values.len());
    out.extend_from_slice(WAVEFORM_MAGIC);
    out.extend_from_slice(&WAVEFORM_VERSION.to_le_bytes());
    out.extend_from_slice(&flags.to_le_bytes());
    out.extend_from_slice(&w.sample_rate().to_le_bytes());
    out.extend_from_slice(&(w.len() as u64).to_le_bytes());
    for v in values {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

fn format_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        offset: offset as u64,
        message: message.into(),
    }
}

/// Parses the file layout.
pub fn decode_waveform(bytes: &[u8]) -> Result<Waveform> {
    let take = |at: usize, n: usize| -> Result<&[u8]> {
        bytes
            .get(at..at + n)
            .ok_or_else(|| format_err(bytes.len(), format!("file ends inside the header field at byte {at}")))
    };
    if take(0, 4)? != WAVEFORM_MAGIC {
        return Err(format_err(0, "bad magic"));
    }
    let version = u16::from_le_bytes(take(4, 2)?.try_into().unwrap());
    if version != WAVEFORM_VERSION {
        return Err(format_err(4, format!("unsupported version {version}")));
    }
    let flags = u16::from_le_bytes(take(6, 2)?.try_into().unwrap());
    if flags & !FLAG_COMPLEX != 0 {
        return Err(format_err(6, format!("unknown flags {flags:#06x}")));
    }
    let rate = f64::from_le_bytes(take(8, 8)?.try_into().unwrap());
    let count = u64::from_le_bytes(take(16, 8)?.try_into().unwrap());
    let complex = flags & FLAG_COMPLEX != 0;
    let per = if complex { 2 } else { 1 };
    let needed = (count as u128) * per as u128 * 4;
    let body = &bytes[HEADER_LEN..];
    if (body.len() as u128) < needed {
        let whole = body.len() / (4 * per);
        return Err(format_err(
            HEADER_LEN + whole * 4 * per,
            format!("truncated: {count} samples declared, {whole} present"),
        ));
    }
    if (body.len() as u128) > needed {
        return Err(format_err(HEADER_LEN + needed as usize, "trailing bytes after the samples"));
    }
    let values: Vec<f64> = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    let wrap = |e: Error| format_err(8, e.to_string());
    Ok(if complex {
        let s = values.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Waveform::Complex(ComplexWaveform::new(s, rate).map_err(wrap)?)
    } else {
        Waveform::Real(RealWaveform::new(values, rate).map_err(wrap)?)
    })
}

pub fn write_waveform(path: &Path, w: &Waveform) -> Result<()> {
    let io = |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut f = std::fs::File::create(path).map_err(io)?;
    f.write_all(&encode_waveform(w)).map_err(io)
}

pub fn read_waveform(path: &Path) -> Result<Waveform> {
    let io = |e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    let mut bytes = Vec::new();
    std::fs::File::open(path).map_err(io)?.read_to_end(&mut bytes).map_err(io)?;
    decode_waveform(&bytes)
}
