use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dsp::ComplexWaveform;
use crate::error::{Error, Result};
use crate::shaping::Constellation;

/// Fractionally spaced LMS equalizer settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EqualizerConfig {
    /// Odd number of taps.
    pub num_taps: usize,
    /// LMS step size μ.
    pub step_size: f64,
    pub samples_per_symbol: usize,
    /// Known symbols at the start of the frame.
    pub training_symbols: usize,
    /// Passes of the training-directed phase over the preamble.
    pub training_passes: usize,
}

impl Default for EqualizerConfig {
    fn default() -> Self {
        EqualizerConfig {
            num_taps: 33,
            step_size: 1e-3,
            samples_per_symbol: 2,
            training_symbols: 1024,
            training_passes: 8,
        }
    }
}

impl EqualizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_taps.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "equalizer tap count must be odd, got {}",
                self.num_taps
            )));
        }
        if !(self.step_size > 0.0 && self.step_size < 0.1) {
            return Err(Error::Config(format!(
                "equalizer step size must lie in (0, 0.1), got {}",
                self.step_size
            )));
        }
        if self.training_symbols < 10 * self.num_taps {
            return Err(Error::Config(format!(
                "need at least {} training symbols for {} taps",
                10 * self.num_taps,
                self.num_taps
            )));
        }
        if self.samples_per_symbol == 0 || self.training_passes == 0 {
            return Err(Error::Config(
                "samples per symbol and training passes must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Equalizer output at one sample per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct FfeOutput {
    /// One output per symbol of the frame, starting with the preamble.
    pub symbols: Vec<Complex64>,
    pub taps: Vec<Complex64>,
    /// Mean-square error over the last training pass.
    pub training_mse: f64,
    /// Mean-square decision-directed error over the payload.
    pub mse: f64,
}

/// T/`sps`-spaced complex LMS equalizer over one periodic frame.
///
/// `x[0]` must be aligned with the first training symbol. The input is
/// first normalized to unit mean power. Taps start as a centered unit
/// impulse, adapt on the known `training` symbols for `training_passes`
/// passes, then continue decision-directed (nearest point of `decide`)
/// over the rest of the frame. Output `k` is
/// `Σ_j w_j · x[(k·sps + c − j) mod N]` with `c = (num_taps − 1)/2`.
///
/// Structural settings are not range-checked here (see
/// [`EqualizerConfig::validate`]), so unstable step sizes surface as
/// [`Error::EqualizerDiverged`].
pub fn ffe_equalize(
    x: &ComplexWaveform,
    training: &[Complex64],
    decide: &Constellation,
    cfg: &EqualizerConfig,
) -> Result<FfeOutput> {
    let sps = cfg.samples_per_symbol;
    let nt = cfg.num_taps;
    if nt == 0 || nt.is_multiple_of(2) || sps == 0 {
        return Err(Error::param("equalizer needs an odd tap count and sps >= 1"));
    }
    if !x.len().is_multiple_of(sps) {
        return Err(Error::param("input length must be a whole number of symbols"));
    }
    let num_symbols = x.len() / sps;
    if training.is_empty() || training.len() > num_symbols {
        return Err(Error::param(format!(
            "training of {} symbols does not fit a frame of {num_symbols}",
            training.len()
        )));
    }
    let power = x.mean_power();
    if !(power > 0.0) {
        return Err(Error::param("equalizer input has no power"));
    }
    let scale = power.sqrt().recip();
    let c = (nt - 1) / 2;
    // ext[i] = x[(i − (nt − 1 − c)) mod N] · scale, so that the window of
    // output k is ext[k·sps .. k·sps + nt] in reversed tap order.
    let n = x.len();
    let lead = nt - 1 - c;
    let ext: Vec<Complex64> = (0..n + nt)
        .map(|i| x.samples()[(i + n - lead % n) % n] * scale)
        .collect();
    let mut w = vec![Complex64::new(0.0, 0.0); nt];
    w[c] = Complex64::new(1.0, 0.0);
    let mu = cfg.step_size;

    let output = |w: &[Complex64], k: usize| -> Complex64 {
        let win = &ext[k * sps..k * sps + nt];
        w.iter().rev().zip(win).map(|(a, b)| a * b).sum()
    };
    let update = |w: &mut [Complex64], k: usize, e: Complex64| {
        let win = &ext[k * sps..k * sps + nt];
        for (a, b) in w.iter_mut().rev().zip(win) {
            *a += mu * e * b.conj();
        }
    };

    let mut training_mse = 0.0;
    for _ in 0..cfg.training_passes.max(1) {
        let mut acc = 0.0;
        for (k, d) in training.iter().enumerate() {
            let e = d - output(&w, k);
            acc += e.norm_sqr();
            update(&mut w, k, e);
        }
        training_mse = acc / training.len() as f64;
        if !training_mse.is_finite() {
            break;
        }
    }
    if !(training_mse.is_finite() && training_mse <= 1.0) {
        return Err(Error::EqualizerDiverged {
            mse: training_mse,
            power: 1.0,
        });
    }

    let mut symbols = Vec::with_capacity(num_symbols);
    for (k, _) in training.iter().enumerate() {
        symbols.push(output(&w, k));
    }
    let mut acc = 0.0;
    let points = decide.points();
    for k in training.len()..num_symbols {
        let y = output(&w, k);
        let d = points[decide.slice(y)];
        let e = d - y;
        acc += e.norm_sqr();
        update(&mut w, k, e);
        symbols.push(y);
    }
    let payload = num_symbols - training.len();
    let mse = if payload > 0 { acc / payload as f64 } else { training_mse };
    if !mse.is_finite() {
        return Err(Error::EqualizerDiverged { mse, power: 1.0 });
    }
    Ok(FfeOutput {
        symbols,
        taps: w,
        training_mse,
        mse,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn qam16(n: usize, seed: u64) -> (Constellation, Vec<Complex64>) {
        let c = Constellation::square_qam(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = (0..n).map(|_| c.points()[rng.gen_range(0..16)]).collect();
        (c, s)
    }

    fn hold(s: &[Complex64], h: &[Complex64]) -> Vec<Complex64> {
        let n = s.len();
        (0..2 * n)
            .map(|i| {
                let k = i / 2;
                h.iter().enumerate().map(|(d, t)| t * s[(k + n - d) % n]).sum()
            })
            .collect()
    }

    #[test]
    fn identity_channel() {
        let (c, s) = qam16(8000, 1);
        let x = ComplexWaveform::new(hold(&s, &[Complex64::new(1.0, 0.0)]), 2.0).unwrap();
        let out = ffe_equalize(&x, &s[..1024], &c, &EqualizerConfig::default()).unwrap();
        assert!(out.mse < 1e-4, "{}", out.mse);
        let peak = out.taps.iter().map(|t| t.norm()).fold(0.0, f64::max);
        assert!((out.taps[16].norm() - peak).abs() < 1e-12);
        for (a, b) in out.symbols.iter().zip(&s) {
            assert!((a - b).norm() < 0.05);
        }
    }

    #[test]
    fn inverts_two_tap_channel() {
        let (c, s) = qam16(20_000, 2);
        let h = [Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)];
        let x = ComplexWaveform::new(hold(&s, &h), 2.0).unwrap();
        let cfg = EqualizerConfig {
            training_passes: 20,
            ..Default::default()
        };
        let out = ffe_equalize(&x, &s[..1024], &c, &cfg).unwrap();
        // Combined response to a single symbol, scaled like the equalizer input.
        let scale = 1.25f64.sqrt().recip();
        let g = |i: isize| -> f64 {
            match i {
                0 | 1 => 1.0,
                2 | 3 => 0.5,
                _ => 0.0,
            }
        };
        let nt = out.taps.len() as isize;
        let cidx = (nt - 1) / 2;
        let resp: Vec<f64> = (-20..20)
            .map(|k: isize| {
                (0..nt)
                    .map(|j| out.taps[j as usize] * g(2 * k + cidx - j) * scale)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .collect();
        let peak = resp.iter().copied().fold(0.0, f64::max);
        let off: f64 = resp.iter().sum::<f64>() - peak;
        assert!(10.0 * (off / peak).log10() < -20.0, "{}", 10.0 * (off / peak).log10());
    }

    #[test]
    fn large_step_diverges() {
        let (c, s) = qam16(4000, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x: Vec<Complex64> = hold(&s, &[Complex64::new(1.0, 0.0)])
            .into_iter()
            .map(|v| v + 0.3 * Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let cfg = EqualizerConfig {
            step_size: 0.5,
            ..Default::default()
        };
        let r = ffe_equalize(&ComplexWaveform::new(x, 2.0).unwrap(), &s[..1024], &c, &cfg);
        assert!(matches!(r, Err(Error::EqualizerDiverged { .. })));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn scale_invariant_decisions() {
        let (c, s) = qam16(6000, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let x: Vec<Complex64> = hold(&s, &[Complex64::new(1.0, 0.0), Complex64::new(0.2, 0.1)])
            .into_iter()
            .map(|v| v + 0.05 * Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let cfg = EqualizerConfig::default();
        let a = ffe_equalize(&ComplexWaveform::new(x.clone(), 2.0).unwrap(), &s[..1024], &c, &cfg).unwrap();
        let scaled: Vec<Complex64> = x.iter().map(|v| v * 37.5).collect();
        let b = ffe_equalize(&ComplexWaveform::new(scaled, 2.0).unwrap(), &s[..1024], &c, &cfg).unwrap();
        let da: Vec<usize> = a.symbols.iter().map(|&v| c.slice(v)).collect();
        let db: Vec<usize> = b.symbols.iter().map(|&v| c.slice(v)).collect();
        assert_eq!(da, db);
    }

    #[test]
    fn config_checks() {
        assert!(EqualizerConfig::default().validate().is_ok());
        let even = EqualizerConfig {
            num_taps: 32,
            ..Default::default()
        };
        assert!(even.validate().is_err());
        let short = EqualizerConfig {
            training_symbols: 100,
            ..Default::default()
        };
        assert!(short.validate().is_err());
    }
}
