//! DAC and ADC behavioral models. Both treat their input as one period of a
//! periodic signal, so filtering and resampling wrap around the frame.

use super::ConverterConfig;
use crate::dsp::{design_lowpass, fir_filter_cyclic_real, rate_ratio, RealWaveform, Resampler};
use crate::error::{Error, Result};

/// Uniform quantizer with `2^bits` levels spanning `[lo, hi]` (inclusive).
pub fn quantize(x: &mut [f64], bits: u32, lo: f64, hi: f64) {
    if bits == 0 || !(hi > lo) {
        return;
    }
    let steps = ((1u64 << bits) - 1) as f64;
    let step = (hi - lo) / steps;
    for v in x.iter_mut() {
        let k = ((*v - lo) / step).round().clamp(0.0, steps);
        *v = lo + k * step;
    }
}

fn check_rate(x: &RealWaveform, rate: f64, what: &str) -> Result<()> {
    if (x.sample_rate() - rate).abs() > 1e-9 * rate {
        return Err(Error::param(format!(
            "{what} expects {rate} Sa/s input, got {}",
            x.sample_rate()
        )));
    }
    Ok(())
}

/// Quantizes to `bits` over the symmetric range `±max|x|`, then applies the
/// DAC's linear-phase low-pass. Output stays at the DAC rate and in input
/// units.
pub fn dac_model(x: &RealWaveform, dac: &ConverterConfig) -> Result<RealWaveform> {
    check_rate(x, dac.rate, "DAC")?;
    let mut s = x.samples().to_vec();
    let full_scale = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    quantize(&mut s, dac.bits, -full_scale, full_scale);
    let taps = design_lowpass(dac.rolloff, dac.bandwidth_3db, dac.rate)?;
    let q = RealWaveform::from_parts(s, dac.rate);
    Ok(fir_filter_cyclic_real(&q, &taps)?.output)
}

/// Anti-alias low-pass at the input rate, resampling to the ADC rate and
/// quantization over the observed `[min, max]` range (auto-ranging).
pub fn adc_model(x: &RealWaveform, adc: &ConverterConfig) -> Result<RealWaveform> {
    let taps = design_lowpass(adc.rolloff, adc.bandwidth_3db, x.sample_rate())?;
    let filtered = fir_filter_cyclic_real(x, &taps)?.output;
    let (up, down) = rate_ratio(x.sample_rate(), adc.rate)?;
    let resampled = if up == down {
        filtered
    } else {
        Resampler::with_band(up, down, 0.86, 1.0)?.process_cyclic_real(&filtered)?
    };
    let mut s = resampled.into_samples();
    let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    quantize(&mut s, adc.bits, lo, hi);
    Ok(RealWaveform::from_parts(s, adc.rate))
}
