//! Small-signal multitone measurement of the end-to-end link response.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{run_link, ConverterConfig, LinkConfig};
use crate::dsp::RealWaveform;
use crate::error::{Error, Result};

/// Probe tone spacing: tones sit on odd multiples of this frequency, so
/// second-order mixing products fall on even multiples and are ignored.
pub const PROBE_SPACING: f64 = 1e6;
/// Peak drive voltage of the probe.
const PROBE_DRIVE: f64 = 0.02;

/// Measured response on the probe's native tone grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeResponse {
    pub freqs: Vec<f64>,
    /// Electrical response relative to a back-to-back link with ideal
    /// front-ends, dB.
    pub response_db: Vec<f64>,
}

impl ProbeResponse {
    /// Linear interpolation (in dB) onto `f_grid`.
    pub fn interpolate(&self, f_grid: &[f64]) -> Result<Vec<f64>> {
        let (lo, hi) = (self.freqs[0], *self.freqs.last().expect("nonempty"));
        f_grid
            .iter()
            .map(|&f| {
                if !(f >= lo && f <= hi) {
                    return Err(Error::param(format!(
                        "{f} Hz outside the probed range [{lo}, {hi}] Hz"
                    )));
                }
                let step = self.freqs[1] - self.freqs[0];
                let pos = ((f - lo) / step).min((self.freqs.len() - 1) as f64);
                let i = (pos.floor() as usize).min(self.freqs.len() - 2);
                let t = pos - i as f64;
                Ok(self.response_db[i] * (1.0 - t) + self.response_db[i + 1] * t)
            })
            .collect()
    }
}

/// Highest probe frequency for a link: inside both converters' bands.
pub fn probe_limit(cfg: &LinkConfig) -> f64 {
    (0.45 * cfg.dac.rate).min(0.475 * cfg.adc.rate)
}

/// Runs a Schroeder-phase multitone through the full chain with noise and
/// quantization disabled and divides by the same measurement on a
/// zero-length link with unlimited bandwidths. Covers odd multiples of
/// 1 MHz up to `f_max` (capped by [`probe_limit`]).
pub fn probe_response_native(cfg: &LinkConfig, f_max: f64) -> Result<ProbeResponse> {
    cfg.validate()?;
    let f_max = f_max.min(probe_limit(cfg));
    let tones: Vec<usize> = (0..)
        .map(|k| 2 * k + 1)
        .take_while(|&m| m as f64 * PROBE_SPACING <= f_max)
        .collect();
    if tones.len() < 2 {
        return Err(Error::param("probe range holds fewer than two tones"));
    }
    let mut dut = cfg.noiseless();
    dut.mzm.drive_scale = PROBE_DRIVE;
    let mut reference = dut.clone();
    reference.length = 0.0;
    reference.mzm.bandwidth_3db = f64::INFINITY;
    reference.pd.bandwidth_3db = f64::INFINITY;
    reference.dac = ConverterConfig {
        bandwidth_3db: f64::INFINITY,
        ..dut.dac.clone()
    };
    reference.adc = ConverterConfig {
        bandwidth_3db: f64::INFINITY,
        ..dut.adc.clone()
    };
    // Reference keeps the same received power as the DUT.
    reference.fiber_loss_db_per_km = 0.0;

    let fs = cfg.dac.rate;
    let n = (fs / PROBE_SPACING).round() as usize;
    let k_total = tones.len() as f64;
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    for (i, &m) in tones.iter().enumerate() {
        let w = Complex64::from_polar(0.5, -PI * (i * i) as f64 / k_total);
        spec[m] = w;
        spec[n - m] = w.conj();
    }
    FftPlanner::new().plan_fft_inverse(n).process(&mut spec);
    let mut x: Vec<f64> = spec.iter().map(|v| v.re).collect();
    let peak = x.iter().fold(0.0f64, |p, v| p.max(v.abs()));
    x.iter_mut().for_each(|v| *v /= peak);
    let x = RealWaveform::new(x, fs)?;

    let measure = |c: &LinkConfig| -> Result<Vec<Complex64>> {
        let y = run_link(&x, c, None::<&mut ChaCha8Rng>)?;
        let mut buf: Vec<Complex64> = y.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let len = buf.len();
        FftPlanner::new().plan_fft_forward(len).process(&mut buf);
        Ok(tones.iter().map(|&m| buf[m]).collect())
    };
    let out = measure(&dut)?;
    let base = measure(&reference)?;
    Ok(ProbeResponse {
        freqs: tones.iter().map(|&m| m as f64 * PROBE_SPACING).collect(),
        response_db: out
            .iter()
            .zip(&base)
            .map(|(a, b)| 20.0 * (a.norm() / b.norm()).max(1e-15).log10())
            .collect(),
    })
}

/// Measured `|H(f)|` in dB on `f_grid` (see [`probe_response_native`]).
pub fn probe_response(cfg: &LinkConfig, f_grid: &[f64]) -> Result<Vec<f64>> {
    let f_max = f_grid.iter().copied().fold(0.0, f64::max) + 2.0 * PROBE_SPACING;
    probe_response_native(cfg, f_max)?.interpolate(f_grid)
}
