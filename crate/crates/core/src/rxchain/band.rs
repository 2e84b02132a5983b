use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ffe::{ffe_equalize, EqualizerConfig};
use super::mlse::{mlse_viterbi, TrellisSpec};
use super::postfilter::{
    apply_post_filter, estimate_postfilter_alpha, sweep_postfilter_alpha, PostFilter,
};
use super::sync::{frame_sync, SyncResult};
use crate::dsp::{
    design_rrc, fir_filter_cyclic, frequency_shift, rate_ratio, ComplexWaveform, Direction,
    RealWaveform, Resampler, RrcSpec,
};
use crate::error::{Error, Result};
use crate::planner::BandSpec;
use crate::shaping::{demap_llr, Constellation, Demapped};

/// Transition band of the per-band resamplers, relative to the baud rate.
pub const BAND_RESAMPLER_PASS: f64 = 0.56;
pub const BAND_RESAMPLER_STOP: f64 = 1.44;

/// How the post-filter tap is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PostFilterMode {
    /// Lag-1 autocorrelation of the equalizer error.
    #[default]
    Autocorrelation,
    /// Grid search over α ∈ [0, 0.99] in steps of 0.01.
    Sweep,
    /// α = 0: plain symbol-by-symbol detection through the trellis.
    Off,
}

/// Receiver DSP settings shared by all bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReceiverConfig {
    /// Matched-filter span in symbols.
    pub rrc_span: usize,
    pub equalizer: EqualizerConfig,
    /// Include PCS priors in the MLSE and demapper metrics.
    pub use_priors: bool,
    pub postfilter: PostFilterMode,
}

impl Default for ReceiverConfig {
    fn default() -> Self {
        ReceiverConfig {
            rrc_span: 64,
            equalizer: EqualizerConfig::default(),
            use_priors: true,
            postfilter: PostFilterMode::Autocorrelation,
        }
    }
}

impl ReceiverConfig {
    pub fn validate(&self) -> Result<()> {
        self.equalizer.validate()?;
        if self.equalizer.samples_per_symbol != 2 {
            return Err(Error::Config("the band receiver runs the equalizer at 2 samples/symbol".into()));
        }
        if self.rrc_span == 0 || !self.rrc_span.is_multiple_of(2) {
            return Err(Error::Config(format!("RRC span must be even and positive, got {}", self.rrc_span)));
        }
        Ok(())
    }
}

/// Everything recovered from one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandReceived {
    pub sync: SyncResult,
    /// Payload constellation used for detection.
    pub constellation: Constellation,
    /// Equalizer output over the payload, before the post filter.
    pub equalized: Vec<Complex64>,
    /// Post-filter output over the payload.
    pub filtered: Vec<Complex64>,
    /// `filtered` with the decided ISI term removed.
    pub cancelled: Vec<Complex64>,
    /// MLSE point indices over the payload.
    pub decisions: Vec<usize>,
    pub alpha: f64,
    /// Noise variance per real dimension at the MLSE input.
    pub sigma2: f64,
    pub training_mse: f64,
    /// Decision-directed equalizer MSE over the payload.
    pub dd_mse: f64,
    /// Decision-directed SNR of the equalizer output, dB.
    pub snr_db: f64,
}

impl BandReceived {
    /// Label bits of the MLSE decisions.
    pub fn bits(&self) -> Vec<u8> {
        self.constellation.label_bits(&self.decisions)
    }

    /// Bit LLRs of the ISI-cancelled symbols.
    pub fn llrs(&self, use_priors: bool) -> Result<Demapped> {
        demap_llr(&self.cancelled, &self.constellation, self.sigma2, use_priors)
    }
}

/// Complex baseband of one band at 2 samples/symbol, matched-filtered, one
/// frame period long.
pub fn band_baseband(capture: &RealWaveform, band: &BandSpec, rrc_span: usize) -> Result<ComplexWaveform> {
    let fs = capture.sample_rate();
    let (lo, hi) = band.occupied();
    if hi >= fs / 2.0 || lo < 0.0 {
        return Err(Error::param(format!(
            "band [{lo:.4e}, {hi:.4e}] Hz exceeds the capture bandwidth {:.4e} Hz",
            fs / 2.0
        )));
    }
    let x = ComplexWaveform::from_real(capture);
    let shifted = frequency_shift(&x, band.center, Direction::Down)?;
    let (up, down) = rate_ratio(fs, 2.0 * band.baud)?;
    let rs = Resampler::with_band(up, down, BAND_RESAMPLER_PASS, BAND_RESAMPLER_STOP)?;
    let bb = rs.process_cyclic(&shifted)?;
    let taps = design_rrc(&RrcSpec {
        rolloff: band.rolloff,
        span: rrc_span,
        samples_per_symbol: 2,
    })?;
    Ok(fir_filter_cyclic(&bb, &taps)?.output)
}

/// Full per-band receiver: down-conversion, resampling to 2 samples/symbol,
/// matched filter, preamble sync, FFE, post filter, MLSE.
///
/// The capture holds exactly one period of a cyclic frame of
/// `preamble.len() + payload` symbols; `preamble` must be the transmitted
/// training symbols (unit energy).
pub fn band_receive(
    capture: &RealWaveform,
    band: &BandSpec,
    preamble: &[Complex64],
    cfg: &ReceiverConfig,
) -> Result<BandReceived> {
    let constellation = band.modulation.constellation()?;
    let bb = band_baseband(capture, band, cfg.rrc_span)?;
    receive_baseband(&bb, preamble, &constellation, cfg)
}

/// The symbol-domain part of [`band_receive`] on a matched-filtered
/// 2 samples/symbol baseband frame.
pub fn receive_baseband(
    bb: &ComplexWaveform,
    preamble: &[Complex64],
    constellation: &Constellation,
    cfg: &ReceiverConfig,
) -> Result<BandReceived> {
    let sps = cfg.equalizer.samples_per_symbol;
    let sync = frame_sync(bb, preamble, sps)?;
    let n = bb.len();
    let derot = Complex64::from_polar(1.0, -sync.phase);
    let aligned: Vec<Complex64> = (0..n)
        .map(|i| bb.samples()[(i + sync.offset) % n] * derot)
        .collect();
    let aligned = ComplexWaveform::new(aligned, bb.sample_rate())?;

    let ffe = ffe_equalize(&aligned, preamble, constellation, &cfg.equalizer)?;
    let p = preamble.len();
    let equalized = ffe.symbols[p..].to_vec();
    if equalized.is_empty() {
        return Err(Error::param("frame has no payload after the preamble"));
    }
    let points = constellation.points();
    let errors: Vec<Complex64> = preamble
        .iter()
        .zip(&ffe.symbols[..p])
        .map(|(d, y)| d - y)
        .chain(equalized.iter().map(|&y| points[constellation.slice(y)] - y))
        .collect();
    let alpha = match cfg.postfilter {
        PostFilterMode::Autocorrelation => estimate_postfilter_alpha(&errors)?.alpha,
        PostFilterMode::Sweep => {
            let grid: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
            sweep_postfilter_alpha(&errors, &grid)
                .into_iter()
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(a, _)| a)
                .unwrap_or(0.0)
        }
        PostFilterMode::Off => 0.0,
    };
    let pf = PostFilter { alpha };
    let z = apply_post_filter(&ffe.symbols, pf, preamble[0]);

    // Noise variance from the known preamble, per real dimension.
    let sigma2 = (1..p)
        .map(|k| (z[k] - preamble[k] - alpha * preamble[k - 1]).norm_sqr())
        .sum::<f64>()
        / (2.0 * (p - 1) as f64);
    let sigma2 = sigma2.max(1e-12);

    let trellis = TrellisSpec::new(constellation.clone(), alpha)?;
    let filtered = z[p..].to_vec();
    let mlse = mlse_viterbi(&filtered, &trellis, sigma2, cfg.use_priors, Some(preamble[p - 1]))?;
    let mut prev = preamble[p - 1];
    let cancelled = filtered
        .iter()
        .zip(&mlse.indices)
        .map(|(&v, &i)| {
            let r = v - alpha * prev;
            prev = points[i];
            r
        })
        .collect();
    let noise = equalized
        .iter()
        .zip(&mlse.indices)
        .map(|(y, &i)| (y - points[i]).norm_sqr())
        .sum::<f64>()
        / equalized.len() as f64;
    Ok(BandReceived {
        sync,
        constellation: constellation.clone(),
        equalized,
        filtered,
        cancelled,
        decisions: mlse.indices,
        alpha,
        sigma2,
        training_mse: ffe.training_mse,
        dd_mse: ffe.mse,
        snr_db: -10.0 * noise.max(1e-30).log10(),
    })
}
