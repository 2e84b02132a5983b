use num_complex::Complex64;

use super::Constellation;
use crate::error::{Error, Result};

/// Magnitude cap applied to every LLR.
pub const LLR_CAP: f64 = 50.0;

/// Soft and hard demapper output.
#[derive(Debug, Clone, PartialEq)]
pub struct Demapped {
    /// `m` LLRs per symbol, label MSB first; `LLR = ln P(b=0|r) / P(b=1|r)`.
    pub llrs: Vec<f64>,
    /// Maximum a-posteriori point index per symbol (lowest index on ties).
    pub hard: Vec<usize>,
}

/// Exact log-sum-exp bit LLRs under a circular Gaussian channel.
///
/// `sigma2` is the noise variance per real dimension, so the point metric is
/// `|r − x|² / (2σ²)`; with `use_priors` the log prior of each point is
/// added.
pub fn demap_llr(
    received: &[Complex64],
    constellation: &Constellation,
    sigma2: f64,
    use_priors: bool,
) -> Result<Demapped> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(Error::param(format!("noise variance must be positive, got {sigma2}")));
    }
    let m = constellation.bits_per_symbol();
    let points = constellation.points();
    let log_prior: Vec<f64> = constellation
        .priors()
        .iter()
        .map(|&p| if use_priors { p.ln() } else { 0.0 })
        .collect();
    // bit_of[j][i]: bit j of the label of point i.
    let bit_of: Vec<Vec<u8>> = (0..m)
        .map(|j| (0..points.len()).map(|i| constellation.label_bit(i, j)).collect())
        .collect();
    let inv = 1.0 / (2.0 * sigma2);
    let mut llrs = Vec::with_capacity(received.len() * m as usize);
    let mut hard = Vec::with_capacity(received.len());
    let mut metric = vec![0.0; points.len()];
    let mut weight = vec![0.0; points.len()];
    for r in received {
        let mut best = 0;
        for (i, p) in points.iter().enumerate() {
            metric[i] = log_prior[i] - (r - p).norm_sqr() * inv;
            if metric[i] > metric[best] {
                best = i;
            }
        }
        hard.push(best);
        // Log-sum-exp with the global maximum as shift. A bit whose
        // hypotheses all underflow relative to it has |LLR| > 700 and is
        // capped anyway.
        let top = metric[best];
        for (w, &v) in weight.iter_mut().zip(&metric) {
            *w = (v - top).exp();
        }
        for bits in &bit_of {
            let (mut s0, mut s1) = (0.0, 0.0);
            for (&w, &b) in weight.iter().zip(bits) {
                if b == 0 {
                    s0 += w;
                } else {
                    s1 += w;
                }
            }
            let llr = s0.ln() - s1.ln();
            llrs.push(if llr.is_nan() { 0.0 } else { llr.clamp(-LLR_CAP, LLR_CAP) });
        }
    }
    Ok(Demapped { llrs, hard })
}
