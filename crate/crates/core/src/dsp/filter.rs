//! FIR design and filtering.
//!
//! Delay convention: every filter here is applied in "same" mode. Output
//! sample `n` is `Σ_k taps[k]·x[n + a − k]` with `a = (taps.len() − 1) / 2`,
//! i.e. the raw convolution advanced by `a` samples so that a symmetric
//! (linear-phase) filter of odd length introduces no delay. The advance is
//! reported alongside the output so callers can align deterministically.

use std::f64::consts::PI;
use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use super::waveform::{ComplexWaveform, RealWaveform};
use crate::error::{Error, Result};

/// Root-raised-cosine pulse parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RrcSpec {
    /// Roll-off factor in `[0, 1]`.
    pub rolloff: f64,
    /// Filter span in symbols (positive, even).
    pub span: usize,
    pub samples_per_symbol: usize,
}

impl RrcSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::param(format!(
                "RRC roll-off must lie in [0, 1], got {}",
                self.rolloff
            )));
        }
        if self.span < 2 || !self.span.is_multiple_of(2) {
            return Err(Error::param(format!(
                "RRC span must be an even number >= 2, got {}",
                self.span
            )));
        }
        if self.samples_per_symbol < 2 {
            return Err(Error::param(format!(
                "RRC needs at least 2 samples per symbol, got {}",
                self.samples_per_symbol
            )));
        }
        Ok(())
    }

    pub fn num_taps(&self) -> usize {
        self.span * self.samples_per_symbol + 1
    }
}

/// Designs a unit-energy root-raised-cosine filter with
/// `span · samples_per_symbol + 1` symmetric taps.
pub fn design_rrc(spec: &RrcSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let rho = spec.rolloff;
    let sps = spec.samples_per_symbol as f64;
    let half = (spec.span * spec.samples_per_symbol / 2) as isize;
    let mut taps: Vec<f64> = (-half..=half)
        .map(|k| rrc_impulse(k as f64 / sps, rho))
        .collect();
    // Force exact symmetry against rounding in the closed form.
    let n = taps.len();
    for k in 0..n / 2 {
        let avg = 0.5 * (taps[k] + taps[n - 1 - k]);
        taps[k] = avg;
        taps[n - 1 - k] = avg;
    }
    let energy: f64 = taps.iter().map(|t| t * t).sum();
    let scale = energy.sqrt().recip();
    taps.iter_mut().for_each(|t| *t *= scale);
    Ok(taps)
}

/// RRC impulse response at `t` symbol periods (unnormalized).
fn rrc_impulse(t: f64, rho: f64) -> f64 {
    if t == 0.0 {
        return 1.0 - rho + 4.0 * rho / PI;
    }
    if rho > 0.0 && ((4.0 * rho * t).abs() - 1.0).abs() < 1e-10 {
        let a = PI / (4.0 * rho);
        return rho / 2f64.sqrt() * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * t * (1.0 - rho)).sin() + 4.0 * rho * t * (PI * t * (1.0 + rho)).cos();
    let den = PI * t * (1.0 - (4.0 * rho * t).powi(2));
    num / den
}

/// Output of a "same"-mode FIR operation.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtered<W> {
    pub output: W,
    /// Samples by which the raw convolution was advanced: `(taps − 1) / 2`.
    pub advance: usize,
}

/// Linear convolution in "same" mode (see module docs). Samples outside the
/// input are zero. Empty input yields empty output.
pub fn fir_filter(x: &ComplexWaveform, taps: &[f64]) -> Result<Filtered<ComplexWaveform>> {
    check_taps(taps)?;
    let out = convolve_same(x.samples(), taps, false);
    Ok(Filtered {
        output: ComplexWaveform::from_parts(out, x.sample_rate()),
        advance: (taps.len() - 1) / 2,
    })
}

/// Circular convolution in "same" mode: `x` is treated as one period of a
/// periodic signal.
pub fn fir_filter_cyclic(x: &ComplexWaveform, taps: &[f64]) -> Result<Filtered<ComplexWaveform>> {
    check_taps(taps)?;
    let out = convolve_same(x.samples(), taps, true);
    Ok(Filtered {
        output: ComplexWaveform::from_parts(out, x.sample_rate()),
        advance: (taps.len() - 1) / 2,
    })
}

/// Real-valued counterpart of [`fir_filter_cyclic`].
pub fn fir_filter_cyclic_real(x: &RealWaveform, taps: &[f64]) -> Result<Filtered<RealWaveform>> {
    check_taps(taps)?;
    let out = convolve_same(x.samples(), taps, true);
    Ok(Filtered {
        output: RealWaveform::from_parts(out, x.sample_rate()),
        advance: (taps.len() - 1) / 2,
    })
}

fn check_taps(taps: &[f64]) -> Result<()> {
    if taps.is_empty() {
        return Err(Error::param("filter needs at least one tap"));
    }
    if taps.iter().any(|t| !t.is_finite()) {
        return Err(Error::param("filter taps must be finite"));
    }
    Ok(())
}

pub(crate) fn convolve_same<T>(x: &[T], taps: &[f64], cyclic: bool) -> Vec<T>
where
    T: Copy + Default + Add<Output = T> + Mul<f64, Output = T>,
{
    let n = x.len();
    let m = taps.len();
    if n == 0 {
        return Vec::new();
    }
    if m == 1 {
        return x.iter().map(|&v| v * taps[0]).collect();
    }
    let a = (m - 1) / 2;
    let lead = m - 1 - a;
    // ext[j] = x[j − lead], wrapped or zero-padded.
    let ext: Vec<T> = (0..n + m - 1)
        .map(|j| {
            let i = j as isize - lead as isize;
            if cyclic {
                x[i.rem_euclid(n as isize) as usize]
            } else if i >= 0 && (i as usize) < n {
                x[i as usize]
            } else {
                T::default()
            }
        })
        .collect();
    let reversed: Vec<f64> = taps.iter().rev().copied().collect();
    ext.windows(m)
        .take(n)
        .map(|w| {
            w.iter()
                .zip(&reversed)
                .fold(T::default(), |acc, (&s, &h)| acc + s * h)
        })
        .collect()
}

/// Magnitude shapes used to model analog front-end bandwidth limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Rolloff {
    /// `|H|² = 10^(−0.3·(f/f3)²)`: exactly 3 dB down at `f3`, Gaussian impulse.
    #[default]
    Gaussian,
    /// `|H|² = 1 / (1 + (f/f3)²)`.
    SinglePole,
    /// `|H|² = 1 / (1 + (f/f3)^(2n))`.
    Butterworth { order: u32 },
}

impl Rolloff {
    /// Linear magnitude at `f` for a 3 dB frequency `f3`. Infinite `f3` is flat.
    pub fn magnitude(&self, f: f64, f3: f64) -> f64 {
        if f3.is_infinite() {
            return 1.0;
        }
        let r = (f / f3).abs();
        match *self {
            Rolloff::Gaussian => 10f64.powf(-0.15 * r * r),
            Rolloff::SinglePole => (1.0 + r * r).sqrt().recip(),
            Rolloff::Butterworth { order } => (1.0 + r.powi(2 * order as i32)).sqrt().recip(),
        }
    }

    fn default_taps(&self, f3: f64, fs: f64) -> usize {
        match self {
            Rolloff::Gaussian => {
                let sigma = 0.1323 * fs / f3;
                (2.0 * (8.0 * sigma).ceil() + 1.0).max(7.0) as usize
            }
            Rolloff::SinglePole | Rolloff::Butterworth { .. } => 127,
        }
    }
}

/// Linear-phase (zero-phase, odd length) FIR approximating `rolloff` with a
/// 3 dB point at `f3` Hz when run at `fs` Hz. Normalized to unit DC gain.
/// Infinite `f3` returns the identity filter `[1.0]`.
pub fn design_lowpass(rolloff: Rolloff, f3: f64, fs: f64) -> Result<Vec<f64>> {
    if f3.is_infinite() {
        return Ok(vec![1.0]);
    }
    if !(f3 > 0.0) || !(fs > 0.0) || !fs.is_finite() {
        return Err(Error::param(format!(
            "low-pass needs positive bandwidth and rate, got f3={f3}, fs={fs}"
        )));
    }
    let num_taps = rolloff.default_taps(f3, fs) | 1;
    let half = (num_taps / 2) as isize;
    let grid = (16 * num_taps).next_power_of_two().max(1024);
    let response: Vec<f64> = (0..grid)
        .map(|k| {
            let f = k.min(grid - k) as f64 * fs / grid as f64;
            rolloff.magnitude(f, f3)
        })
        .collect();
    // The Gaussian impulse is negligible beyond the chosen span; the
    // long-tailed shapes need a taper.
    let window = match rolloff {
        Rolloff::Gaussian => vec![1.0; num_taps],
        _ => kaiser_window(num_taps, 6.0),
    };
    let mut taps: Vec<f64> = (-half..=half)
        .zip(&window)
        .map(|(n, w)| {
            let h: f64 = response
                .iter()
                .enumerate()
                .map(|(k, r)| r * (2.0 * PI * k as f64 * n as f64 / grid as f64).cos())
                .sum::<f64>()
                / grid as f64;
            h * w
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= dc);
    Ok(taps)
}

/// Kaiser window of length `n` with shape parameter `beta`.
pub fn kaiser_window(n: usize, beta: f64) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = bessel_i0(beta);
    let mid = (n - 1) as f64 / 2.0;
    (0..n)
        .map(|i| {
            let r = (i as f64 - mid) / mid;
            bessel_i0(beta * (1.0 - r * r).max(0.0).sqrt()) / denom
        })
        .collect()
}

/// Kaiser β giving `atten_db` of stopband attenuation.
pub fn kaiser_beta(atten_db: f64) -> f64 {
    if atten_db > 50.0 {
        0.1102 * (atten_db - 8.7)
    } else if atten_db >= 21.0 {
        0.5842 * (atten_db - 21.0).powf(0.4) + 0.07886 * (atten_db - 21.0)
    } else {
        0.0
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Windowed-sinc low-pass prototype with `num_taps` taps and cutoff
/// `cutoff` in cycles/sample, unit DC gain.
pub fn kaiser_lowpass(num_taps: usize, cutoff: f64, beta: f64) -> Vec<f64> {
    let window = kaiser_window(num_taps, beta);
    let mid = (num_taps - 1) as f64 / 2.0;
    let mut taps: Vec<f64> = window
        .iter()
        .enumerate()
        .map(|(i, w)| {
            let t = i as f64 - mid;
            let s = if t == 0.0 {
                2.0 * cutoff
            } else {
                (2.0 * PI * cutoff * t).sin() / (PI * t)
            };
            s * w
        })
        .collect();
    let dc: f64 = taps.iter().sum();
    taps.iter_mut().for_each(|t| *t /= dc);
    taps
}
