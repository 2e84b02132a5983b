//! Frequency conversion, band superposition, PAPR and clipping.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::waveform::{mean_power, ComplexWaveform, Sample};
use crate::error::{Error, Result};

const SHIFT_BLOCK: usize = 1024;

/// Sign of the complex exponential applied by [`frequency_shift`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Multiply by `e^{+j2πft}`.
    Up,
    /// Multiply by `e^{−j2πft}`.
    Down,
}

/// Multiplies `x` by `e^{±j2πf·k/fs}`; the phase is zero at sample 0.
pub fn frequency_shift(x: &ComplexWaveform, f: f64, direction: Direction) -> Result<ComplexWaveform> {
    let fs = x.sample_rate();
    if !f.is_finite() || f.abs() >= fs / 2.0 {
        return Err(Error::param(format!(
            "shift of {f} Hz is not below the Nyquist frequency {} Hz",
            fs / 2.0
        )));
    }
    if f == 0.0 {
        return Ok(x.clone());
    }
    let sign = match direction {
        Direction::Up => 1.0,
        Direction::Down => -1.0,
    };
    let cycles_per_sample = sign * f / fs;
    let phasor = |k: usize| {
        // Reduce to a fractional cycle count before scaling to keep precision
        // for long signals.
        let c = (cycles_per_sample * k as f64).fract();
        Complex64::from_polar(1.0, 2.0 * PI * c)
    };
    let table: Vec<Complex64> = (0..SHIFT_BLOCK.min(x.len())).map(phasor).collect();
    let out = x
        .samples()
        .chunks(SHIFT_BLOCK)
        .enumerate()
        .flat_map(|(b, chunk)| {
            let anchor = phasor(b * SHIFT_BLOCK);
            let table = &table;
            chunk
                .iter()
                .zip(table.iter())
                .map(move |(v, w)| v * (anchor * w))
        })
        .collect();
    Ok(ComplexWaveform::from_parts(out, fs))
}

/// Element-wise sum of equally long, equally sampled waveforms.
pub fn superpose(bands: &[ComplexWaveform]) -> Result<ComplexWaveform> {
    let first = bands
        .first()
        .ok_or_else(|| Error::param("superpose needs at least one waveform"))?;
    let mut acc = first.clone();
    for (i, b) in bands.iter().enumerate().skip(1) {
        accumulate(&mut acc, b).map_err(|e| e.in_band(i))?;
    }
    Ok(acc)
}

/// Adds `x` into `acc` in place, with the same checks as [`superpose`].
pub fn accumulate(acc: &mut ComplexWaveform, x: &ComplexWaveform) -> Result<()> {
    if acc.sample_rate() != x.sample_rate() {
        return Err(Error::param(format!(
            "sample rate mismatch: {} vs {} Hz",
            acc.sample_rate(),
            x.sample_rate()
        )));
    }
    if acc.len() != x.len() {
        return Err(Error::param(format!(
            "length mismatch: {} vs {} samples",
            acc.len(),
            x.len()
        )));
    }
    for (a, v) in acc.samples_mut().iter_mut().zip(x.samples()) {
        *a += v;
    }
    Ok(())
}

/// `10·log10(max|x|² / mean|x|²)`.
pub fn papr_db<S: Sample>(x: &[S]) -> Result<f64> {
    let mean = mean_power(x);
    if !(mean > 0.0) {
        return Err(Error::UndefinedMetric(
            "PAPR of an empty or zero-power signal".into(),
        ));
    }
    let peak = x.iter().map(|s| s.power()).fold(0.0, f64::max);
    Ok(10.0 * (peak / mean).log10())
}

/// Amplitude limiter with clipping ratio `cr_db` (`+∞` disables clipping).
///
/// The clip level `A` satisfies `A = rms(output) · 10^(cr_db/20)`, i.e. the
/// RMS is measured after limiting, so the output PAPR never exceeds `cr_db`
/// and clipping an already clipped signal leaves it unchanged. It is found
/// by fixed-point iteration starting from `rms(input) · 10^(cr_db/20)`.
pub fn clip<S: Sample>(x: &[S], cr_db: f64) -> Vec<S> {
    clip_level(x, cr_db)
        .map(|a| x.iter().map(|s| s.limit(a)).collect())
        .unwrap_or_else(|| x.to_vec())
}

/// Clip level used by [`clip`], or `None` when no sample would be limited.
pub fn clip_level<S: Sample>(x: &[S], cr_db: f64) -> Option<f64> {
    if cr_db == f64::INFINITY || x.is_empty() {
        return None;
    }
    let k2 = 10f64.powf(cr_db / 10.0);
    let powers: Vec<f64> = x.iter().map(|s| s.power()).collect();
    let peak2 = powers.iter().copied().fold(0.0, f64::max);
    let n = powers.len() as f64;
    let mut a2 = k2 * powers.iter().sum::<f64>() / n;
    if peak2 <= a2 * (1.0 + 1e-12) || a2 == 0.0 {
        return None;
    }
    for _ in 0..500 {
        let next = k2 * powers.iter().map(|&p| p.min(a2)).sum::<f64>() / n;
        let done = (a2 - next).abs() <= 1e-15 * a2;
        a2 = next;
        if done {
            break;
        }
    }
    Some(a2.sqrt())
}
