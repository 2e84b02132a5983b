//! Polyphase rational resampling.
//!
//! Timing convention: output sample `m` is aligned with input time
//! `m · down / up` (in input samples). The symmetric prototype's group delay
//! is compensated internally, so resampling adds no net delay.

use super::filter::{kaiser_beta, kaiser_lowpass};
use super::waveform::{ComplexWaveform, RealWaveform};
use crate::error::{Error, Result};

const STOPBAND_DB: f64 = 65.0;

/// A rational `up/down` resampler with a Kaiser windowed-sinc prototype.
#[derive(Debug, Clone)]
pub struct Resampler {
    up: usize,
    down: usize,
    /// `banks[p][j] ∝ h[p + j·up]`, each phase scaled to unit DC gain.
    banks: Vec<Vec<f64>>,
    /// Prototype group delay in high-rate samples.
    advance: usize,
}

impl Resampler {
    /// Default band: passband edge 0.8 and stopband edge 1.0 of the smaller
    /// of the two Nyquist frequencies.
    pub fn new(up: usize, down: usize) -> Result<Self> {
        Self::with_band(up, down, 0.8, 1.0)
    }

    /// Passband and stopband edges as fractions of the smaller Nyquist
    /// frequency. A stopband edge above 1 lets the transition band alias,
    /// which is harmless when the signal has no content there.
    pub fn with_band(up: usize, down: usize, pass: f64, stop: f64) -> Result<Self> {
        if up == 0 || down == 0 {
            return Err(Error::param(format!(
                "resampling factors must be >= 1, got {up}/{down}"
            )));
        }
        if !(pass > 0.0 && stop > pass && stop < 2.0) {
            return Err(Error::param(format!(
                "resampler band edges must satisfy 0 < pass < stop < 2, got {pass}/{stop}"
            )));
        }
        let g = gcd(up, down);
        let (up, down) = (up / g, down / g);
        if up == 1 && down == 1 {
            return Ok(Resampler {
                up,
                down,
                banks: vec![vec![1.0]],
                advance: 0,
            });
        }
        let nyq = 0.5 / up.max(down) as f64;
        let width = (stop - pass) * nyq;
        let cutoff = 0.5 * (pass + stop) * nyq;
        let mut num_taps = ((STOPBAND_DB - 7.95) / (14.36 * width)).ceil() as usize + 1;
        num_taps |= 1;
        let proto = kaiser_lowpass(num_taps, cutoff, kaiser_beta(STOPBAND_DB));
        let banks = (0..up)
            .map(|p| {
                proto
                    .iter()
                    .skip(p)
                    .step_by(up)
                    .copied()
                    .collect::<Vec<f64>>()
            })
            .map(|bank: Vec<f64>| {
                // Unit DC gain per phase, so constant inputs stay exactly constant.
                let dc: f64 = bank.iter().sum();
                bank.iter().map(|h| h / dc).collect()
            })
            .collect();
        Ok(Resampler {
            up,
            down,
            banks,
            advance: (num_taps - 1) / 2,
        })
    }

    /// Reduced `(up, down)` ratio.
    pub fn ratio(&self) -> (usize, usize) {
        (self.up, self.down)
    }

    /// Prototype length in taps.
    pub fn num_taps(&self) -> usize {
        self.banks.iter().map(Vec::len).sum()
    }

    fn output_rate(&self, rate: f64) -> f64 {
        rate * self.up as f64 / self.down as f64
    }

    /// Linear (zero-padded) resampling; output has `ceil(len · up / down)` samples.
    pub fn process(&self, x: &ComplexWaveform) -> ComplexWaveform {
        let n = x.len();
        let out_len = (n * self.up).div_ceil(self.down);
        let y = self.run(x.samples(), out_len, false);
        ComplexWaveform::from_parts(y, self.output_rate(x.sample_rate()))
    }

    /// Resamples one period of a periodic signal. Requires `len · up` to be
    /// divisible by `down` so the output is itself exactly one period.
    pub fn process_cyclic(&self, x: &ComplexWaveform) -> Result<ComplexWaveform> {
        let out_len = self.cyclic_len(x.len())?;
        let y = self.run(x.samples(), out_len, true);
        Ok(ComplexWaveform::from_parts(y, self.output_rate(x.sample_rate())))
    }

    /// Real-valued counterpart of [`Resampler::process_cyclic`].
    pub fn process_cyclic_real(&self, x: &RealWaveform) -> Result<RealWaveform> {
        let out_len = self.cyclic_len(x.len())?;
        let y = self.run(x.samples(), out_len, true);
        Ok(RealWaveform::from_parts(y, self.output_rate(x.sample_rate())))
    }

    fn cyclic_len(&self, n: usize) -> Result<usize> {
        if !(n * self.up).is_multiple_of(self.down) {
            return Err(Error::param(format!(
                "cyclic resampling by {}/{} needs a length divisible by {}, got {n}",
                self.up,
                self.down,
                self.down / gcd(self.down, n.max(1))
            )));
        }
        Ok(n * self.up / self.down)
    }

    fn run<T>(&self, x: &[T], out_len: usize, cyclic: bool) -> Vec<T>
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        let n = x.len();
        if n == 0 {
            return Vec::new();
        }
        if self.up == 1 && self.down == 1 {
            return x.to_vec();
        }
        let (up, down) = (self.up, self.down);
        let bank_len = self.banks[0].len();
        // ext[j] = x[j − pad]; covers every index touched below.
        let pad = bank_len + 1;
        let hi = ((out_len.saturating_sub(1)) * down + self.advance) / up + 1;
        let ext_len = pad + hi.max(n);
        let ext: Vec<T> = (0..ext_len)
            .map(|j| {
                let i = j as isize - pad as isize;
                if cyclic {
                    x[i.rem_euclid(n as isize) as usize]
                } else if i >= 0 && (i as usize) < n {
                    x[i as usize]
                } else {
                    T::default()
                }
            })
            .collect();
        (0..out_len)
            .map(|m| {
                // y[m] = Σ_i x[i] · up·h[m·down + advance − i·up]
                let t = m * down + self.advance;
                let i_max = t / up;
                let bank = &self.banks[t % up];
                let base = i_max + pad;
                bank.iter()
                    .enumerate()
                    .fold(T::default(), |acc, (j, &h)| acc + ext[base - j] * h)
            })
            .collect()
    }
}

/// Resamples by `up/down` with the default band edges (linear, zero-padded).
pub fn resample_rational(x: &ComplexWaveform, up: usize, down: usize) -> Result<ComplexWaveform> {
    Ok(Resampler::new(up, down)?.process(x))
}

/// Integer `(up, down)` with `up/down = to / from`, rates rounded to 1 Hz.
pub fn rate_ratio(from: f64, to: f64) -> Result<(usize, usize)> {
    let (a, b) = (from.round(), to.round());
    if !(a >= 1.0 && b >= 1.0) || a > 1e15 || b > 1e15 {
        return Err(Error::param(format!("cannot form a rate ratio from {from} to {to}")));
    }
    let (a, b) = (a as usize, b as usize);
    let g = gcd(a, b);
    Ok((b / g, a / g))
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
