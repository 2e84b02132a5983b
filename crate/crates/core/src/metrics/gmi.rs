use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::shaping::{demap_llr, Constellation};

/// Minimum symbol pairs for [`gmi_estimate`].
pub const MIN_GMI_SYMBOLS: usize = 10_000;

/// NGMI threshold of a 7 % hard-decision FEC.
pub const NGMI_HD_FEC: f64 = 0.9346;
/// NGMI threshold of a 20 % soft-decision FEC.
pub const NGMI_SD_FEC: f64 = 0.858;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GmiEstimate {
    /// Bits per symbol.
    pub gmi: f64,
    /// Standard error of the Monte-Carlo mean.
    pub std_err: f64,
    /// Fitted noise variance per real dimension, after gain removal.
    pub sigma2: f64,
    /// Fitted complex gain from transmitted to received symbols.
    pub gain: Complex64,
}

/// Bit-metric GMI of `rx` given the transmitted point indices `tx`.
///
/// A complex gain and the noise variance are fitted from the data, then
/// exact bit LLRs (with the constellation priors) give
/// `GMI = H(X) − Σ_j E[log2(1 + e^{∓L_j})]`.
pub fn gmi_estimate(tx: &[usize], rx: &[Complex64], constellation: &Constellation) -> Result<GmiEstimate> {
    if tx.len() != rx.len() {
        return Err(Error::param(format!(
            "symbol streams differ in length: {} vs {}",
            tx.len(),
            rx.len()
        )));
    }
    if tx.len() < MIN_GMI_SYMBOLS {
        return Err(Error::param(format!(
            "GMI needs at least {MIN_GMI_SYMBOLS} symbols, got {}",
            tx.len()
        )));
    }
    let x = constellation.map(tx)?;
    let energy: f64 = x.iter().map(|v| v.norm_sqr()).sum();
    let gain = rx.iter().zip(&x).map(|(r, s)| r * s.conj()).sum::<Complex64>() / energy;
    if !(gain.norm() > 0.0) || !gain.norm().is_finite() {
        return Err(Error::UndefinedMetric("received symbols carry no signal".into()));
    }
    let y: Vec<Complex64> = rx.iter().map(|r| r / gain).collect();
    let sigma2 = (y.iter().zip(&x).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>()
        / (2.0 * y.len() as f64))
        .max(1e-15);
    let m = constellation.bits_per_symbol() as usize;
    let demapped = demap_llr(&y, constellation, sigma2, true)?;
    let h = constellation.entropy();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for (k, &t) in tx.iter().enumerate() {
        let mut loss = 0.0;
        for j in 0..m {
            let l = demapped.llrs[k * m + j];
            let s = if constellation.label_bit(t, j as u32) == 0 { -l } else { l };
            loss += softplus(s) / std::f64::consts::LN_2;
        }
        let v = h - loss;
        sum += v;
        sum_sq += v * v;
    }
    let n = tx.len() as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(GmiEstimate {
        gmi: mean,
        std_err: (var / (n - 1.0)).sqrt(),
        sigma2,
        gain,
    })
}

/// ln(1 + e^x) without overflow.
fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `1 − (H − GMI)/m`.
pub fn ngmi(gmi: f64, entropy: f64, m: u32) -> Result<f64> {
    if !(entropy > 0.0 && entropy <= m as f64 + 1e-12) {
        return Err(Error::param(format!(
            "entropy {entropy} outside (0, {m}]"
        )));
    }
    if gmi > entropy + 1e-9 {
        return Err(Error::Data(format!("GMI {gmi} exceeds the source entropy {entropy}")));
    }
    Ok(1.0 - (entropy - gmi) / m as f64)
}
