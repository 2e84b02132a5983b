use serde::{Deserialize, Serialize};

use super::{Modulation, SnrProfile, SubcarrierPlan};
use crate::error::{Error, Result};
use crate::shaping::{Ccdm, Composition};

/// Gap-approximation loading parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoadingRule {
    /// SNR gap Γ in dB: `H = log2(1 + SNR/Γ)`.
    pub gap_db: f64,
    /// Bands whose loaded entropy does not exceed this use BPSK.
    pub bpsk_max_entropy: f64,
    /// Lowest entropy assigned to a PCS-64QAM band.
    pub min_pcs_entropy: f64,
    /// BPSK bands whose predicted NGMI falls below this are excluded.
    pub ngmi_threshold: f64,
}

impl Default for LoadingRule {
    fn default() -> Self {
        LoadingRule {
            gap_db: 1.2,
            bpsk_max_entropy: 1.2,
            min_pcs_entropy: 2.1,
            ngmi_threshold: 0.858,
        }
    }
}

/// Loaded entropy for one SNR (dB) before the BPSK / PCS decision.
pub fn loaded_entropy(snr_db: f64, gap_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    let gap = 10f64.powf(gap_db / 10.0);
    (1.0 + snr / gap).log2().clamp(1.0, 6.0)
}

/// BPSK bit-metric GMI over a complex AWGN channel at `snr_db`
/// (`E|x|² / E|n|²`), by trapezoidal quadrature over the real noise.
pub fn bpsk_gmi(snr_db: f64) -> f64 {
    let snr = 10f64.powf(snr_db / 10.0);
    let sigma2 = 1.0 / (2.0 * snr);
    let sigma = sigma2.sqrt();
    let steps = 4000;
    let span = 12.0 * sigma;
    let h = 2.0 * span / steps as f64;
    let mut acc = 0.0;
    for i in 0..=steps {
        let n = -span + i as f64 * h;
        let pdf = (-(n * n) / (2.0 * sigma2)).exp() / (2.0 * std::f64::consts::PI * sigma2).sqrt();
        let llr = 2.0 * (1.0 + n) / sigma2;
        let loss = if llr > 40.0 { (-llr).exp() / std::f64::consts::LN_2 } else { (-llr).exp().ln_1p() / std::f64::consts::LN_2 };
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        acc += w * pdf * loss;
    }
    1.0 - acc * h
}

/// Assigns per-band modulation and entropy from an SNR profile:
/// `H = clamp(log2(1 + SNR/Γ), 1, 6)`; `H ≤ bpsk_max_entropy` becomes BPSK,
/// other bands get PCS-64QAM with at least `min_pcs_entropy` bits. BPSK
/// bands with a predicted NGMI below the threshold are flagged `excluded`.
pub fn entropy_load(plan: &SubcarrierPlan, snr: &SnrProfile, rule: &LoadingRule) -> Result<SubcarrierPlan> {
    if snr.0.len() != plan.bands.len() {
        return Err(Error::param(format!(
            "SNR profile has {} entries for {} bands",
            snr.0.len(),
            plan.bands.len()
        )));
    }
    let mut out = plan.clone();
    for (band, &s) in out.bands.iter_mut().zip(&snr.0) {
        if !s.is_finite() {
            return Err(Error::param("SNR entries must be finite"));
        }
        let h = loaded_entropy(s, rule.gap_db);
        if h <= rule.bpsk_max_entropy {
            band.modulation = Modulation::Bpsk;
            band.excluded = bpsk_gmi(s) < rule.ngmi_threshold;
        } else {
            band.modulation = Modulation::Pcs64qam {
                entropy: round_entropy(h.max(rule.min_pcs_entropy)),
            };
            band.excluded = false;
        }
    }
    Ok(out)
}

/// Entropies are kept to 1e-3 bit so plans print and serialize stably.
fn round_entropy(h: f64) -> f64 {
    (h * 1000.0).round() / 1000.0
}

/// How shaped bits are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase", deny_unknown_fields)]
pub enum Matcher {
    /// Constant-composition matcher with the given block length.
    Ccdm { block_len: u64 },
    /// I.i.d. symbols drawn from the priors; rate equals the entropy.
    Ideal,
}

impl Default for Matcher {
    fn default() -> Self {
        Matcher::Ccdm { block_len: 1000 }
    }
}

/// Rate bookkeeping for one band, bit/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandRate {
    /// `baud · H`.
    pub gross: f64,
    /// `baud · (matcher input bits per symbol)`.
    pub matched: f64,
    /// `matched / (1 + fec_overhead)`.
    pub net: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRate {
    pub per_band: Vec<BandRate>,
    pub gross: f64,
    pub matched: f64,
    pub net: f64,
    pub fec_overhead: f64,
}

/// Matcher input bits per symbol for a modulation.
pub fn matched_bits_per_symbol(modulation: &Modulation, matcher: Matcher) -> Result<f64> {
    Ok(match (*modulation, matcher) {
        (Modulation::Bpsk, _) => 1.0,
        (Modulation::Pcs64qam { entropy }, _) if entropy >= 6.0 => 6.0,
        (Modulation::Pcs64qam { entropy }, Matcher::Ideal) => entropy,
        (m @ Modulation::Pcs64qam { .. }, Matcher::Ccdm { block_len }) => {
            let c = m.constellation()?;
            Ccdm::new(Composition::from_priors(c.priors(), block_len)?).rate()
        }
    })
}

/// Gross, matched and net rates. Excluded bands contribute zero; the
/// per-band figures sum exactly to the totals. Training overhead is not
/// counted.
pub fn plan_rate(plan: &SubcarrierPlan, fec_overhead: f64, matcher: Matcher) -> Result<PlanRate> {
    if !(fec_overhead >= 0.0) {
        return Err(Error::param("FEC overhead must be >= 0"));
    }
    let per_band = plan
        .bands
        .iter()
        .map(|b| {
            if b.excluded {
                return Ok(BandRate { gross: 0.0, matched: 0.0, net: 0.0 });
            }
            let matched = b.baud * matched_bits_per_symbol(&b.modulation, matcher)?;
            Ok(BandRate {
                gross: b.baud * b.modulation.entropy(),
                matched,
                net: matched / (1.0 + fec_overhead),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PlanRate {
        gross: per_band.iter().map(|r| r.gross).sum(),
        matched: per_band.iter().map(|r| r.matched).sum(),
        net: per_band.iter().map(|r| r.net).sum(),
        per_band,
        fec_overhead,
    })
}
