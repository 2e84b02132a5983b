//! Welch power spectral density estimates (Hann window, 50 % overlap).

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::waveform::{ComplexWaveform, RealWaveform};
use crate::error::{Error, Result};

/// A PSD estimate on a uniform frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Psd {
    /// Bin frequencies in Hz, ascending.
    pub freqs: Vec<f64>,
    /// Linear density in power units per Hz.
    pub density: Vec<f64>,
    /// Bin spacing in Hz.
    pub resolution: f64,
}

impl Psd {
    pub fn density_db(&self) -> Vec<f64> {
        self.density.iter().map(|p| 10.0 * p.max(1e-300).log10()).collect()
    }

    /// Integrated power (rectangle rule over the bins).
    pub fn total_power(&self) -> f64 {
        self.density.iter().sum::<f64>() * self.resolution
    }
}

/// Two-sided PSD of a complex signal, frequencies in `[−fs/2, fs/2)`.
pub fn spectrum(x: &ComplexWaveform, nfft: usize) -> Result<Psd> {
    let fs = x.sample_rate();
    let avg = welch(x.samples(), nfft, fs)?;
    let half = nfft / 2;
    let density: Vec<f64> = avg[half..].iter().chain(&avg[..half]).copied().collect();
    let df = fs / nfft as f64;
    let freqs = (0..nfft).map(|k| (k as f64 - half as f64) * df).collect();
    Ok(Psd {
        freqs,
        density,
        resolution: df,
    })
}

/// One-sided PSD of a real signal, frequencies in `[0, fs/2]`.
pub fn spectrum_real(x: &RealWaveform, nfft: usize) -> Result<Psd> {
    let fs = x.sample_rate();
    let c: Vec<Complex64> = x.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let avg = welch(&c, nfft, fs)?;
    let half = nfft / 2;
    let density = (0..=half)
        .map(|k| if k == 0 || k == half { avg[k] } else { 2.0 * avg[k] })
        .collect();
    let df = fs / nfft as f64;
    Ok(Psd {
        freqs: (0..=half).map(|k| k as f64 * df).collect(),
        density,
        resolution: df,
    })
}

fn welch(x: &[Complex64], nfft: usize, fs: f64) -> Result<Vec<f64>> {
    if nfft < 64 || !nfft.is_power_of_two() {
        return Err(Error::param(format!(
            "nfft must be a power of two >= 64, got {nfft}"
        )));
    }
    if x.len() < nfft {
        return Err(Error::param(format!(
            "signal of {} samples is shorter than nfft = {nfft}",
            x.len()
        )));
    }
    // Periodic Hann so that 50 % overlapped windows sum to a constant.
    let window: Vec<f64> = (0..nfft)
        .map(|k| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * k as f64 / nfft as f64).cos())
        .collect();
    let wpow: f64 = window.iter().map(|w| w * w).sum();
    let fft = FftPlanner::new().plan_fft_forward(nfft);
    let hop = nfft / 2;
    let segments = (x.len() - nfft) / hop + 1;
    let mut acc = vec![0.0; nfft];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    for s in 0..segments {
        let seg = &x[s * hop..s * hop + nfft];
        for ((b, v), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = v * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (segments as f64 * fs * wpow);
    Ok(acc.into_iter().map(|a| a * scale).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};
    use std::f64::consts::PI;

    #[test]
    fn tone_has_single_dominant_bin() {
        let fs = 1e9;
        let f = 125e6;
        let x: Vec<Complex64> = (0..8192)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * f * k as f64 / fs))
            .collect();
        let psd = spectrum(&ComplexWaveform::new(x, fs).unwrap(), 256).unwrap();
        let best = (0..psd.freqs.len())
            .max_by(|&a, &b| psd.density[a].total_cmp(&psd.density[b]))
            .unwrap();
        assert_eq!(psd.freqs[best], f);
        assert!((psd.total_power() - 1.0).abs() < 0.01);
    }

    #[test]
    fn white_noise_is_flat_and_parseval_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 256 * 400;
        let x: Vec<Complex64> = (0..n)
            .map(|_| {
                Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            })
            .collect();
        let w = ComplexWaveform::new(x, 2e9).unwrap();
        let psd = spectrum(&w, 256).unwrap();
        let mean_db = 10.0 * (w.mean_power() / 2e9).log10();
        for d in psd.density_db() {
            assert!((d - mean_db).abs() < 2.0);
        }
        assert!((psd.total_power() / w.mean_power() - 1.0).abs() < 0.01);
    }

    #[test]
    fn real_parseval_and_axis() {
        let fs = 80e9;
        let x: Vec<f64> = (0..16384)
            .map(|k| (2.0 * PI * 10e9 * k as f64 / fs).cos() + 0.5)
            .collect();
        let w = RealWaveform::new(x, fs).unwrap();
        let psd = spectrum_real(&w, 512).unwrap();
        assert_eq!(psd.freqs[0], 0.0);
        assert_eq!(*psd.freqs.last().unwrap(), fs / 2.0);
        assert!((psd.total_power() / w.mean_power() - 1.0).abs() < 0.01);
    }

    #[test]
    fn rejects_bad_sizes() {
        let w = ComplexWaveform::zeros(100, 1.0).unwrap();
        assert!(spectrum(&w, 100).is_err());
        assert!(spectrum(&w, 128).is_err());
    }
}
