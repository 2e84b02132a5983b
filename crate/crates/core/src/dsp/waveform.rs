//! Sampled signals with an explicit sample rate.

use num_complex::Complex64;

use crate::error::{Error, Result};

fn check_rate(sample_rate: f64) -> Result<()> {
    if sample_rate.is_finite() && sample_rate > 0.0 {
        Ok(())
    } else {
        Err(Error::param(format!(
            "sample rate must be positive and finite, got {sample_rate}"
        )))
    }
}

/// Complex baseband (or optical field) samples at `sample_rate` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexWaveform {
    samples: Vec<Complex64>,
    sample_rate: f64,
}

/// Real-valued samples (electrical or intensity domain) at `sample_rate` Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RealWaveform {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl ComplexWaveform {
    /// Builds a waveform, rejecting non-finite samples or a bad rate.
    pub fn new(samples: Vec<Complex64>, sample_rate: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::param(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    /// Skips the per-sample finiteness scan. The rate must still be valid.
    pub(crate) fn from_parts(samples: Vec<Complex64>, sample_rate: f64) -> Self {
        debug_assert!(sample_rate.is_finite() && sample_rate > 0.0);
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn zeros(len: usize, sample_rate: f64) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); len], sample_rate)
    }

    pub fn from_real(x: &RealWaveform) -> Self {
        Self::from_parts(
            x.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            x.sample_rate,
        )
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub(crate) fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of |x|².
    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    /// Real part as a [`RealWaveform`].
    pub fn re(&self) -> RealWaveform {
        RealWaveform::from_parts(self.samples.iter().map(|s| s.re).collect(), self.sample_rate)
    }
}

impl RealWaveform {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        check_rate(sample_rate)?;
        if let Some(i) = samples.iter().position(|s| !s.is_finite()) {
            return Err(Error::param(format!("sample {i} is not finite")));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub(crate) fn from_parts(samples: Vec<f64>, sample_rate: f64) -> Self {
        debug_assert!(sample_rate.is_finite() && sample_rate > 0.0);
        Self {
            samples,
            sample_rate,
        }
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        mean_power(&self.samples)
    }

    pub fn mean(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }
}

/// A sample type whose instantaneous power and amplitude limiting are defined.
pub trait Sample: Copy + Send + Sync {
    fn power(self) -> f64;
    /// Limits the magnitude to `a`, preserving phase (complex) or sign (real).
    fn limit(self, a: f64) -> Self;
}

impl Sample for f64 {
    fn power(self) -> f64 {
        self * self
    }

    fn limit(self, a: f64) -> Self {
        self.clamp(-a, a)
    }
}

impl Sample for Complex64 {
    fn power(self) -> f64 {
        self.norm_sqr()
    }

    fn limit(self, a: f64) -> Self {
        let m = self.norm();
        if m > a {
            self * (a / m)
        } else {
            self
        }
    }
}

pub(crate) fn mean_power<S: Sample>(x: &[S]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.iter().map(|s| s.power()).sum::<f64>() / x.len() as f64
}
