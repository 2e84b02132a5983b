//! Bit and symbol error statistics, bit-metric GMI and reports.

mod gmi;
mod report;

pub use gmi::{gmi_estimate, ngmi, GmiEstimate, MIN_GMI_SYMBOLS, NGMI_HD_FEC, NGMI_SD_FEC};
pub use report::{AggregateMetrics, BandMetrics, MetricsReport};

use crate::error::{Error, Result};
use crate::shaping::Constellation;

/// Minimum stream length accepted by [`ber`].
pub const MIN_BER_BITS: usize = 1000;

/// Bit errors between two equal-length streams.
pub fn bit_errors(tx: &[u8], rx: &[u8]) -> Result<usize> {
    if tx.len() != rx.len() {
        return Err(Error::param(format!(
            "bit streams differ in length: {} vs {}",
            tx.len(),
            rx.len()
        )));
    }
    Ok(tx.iter().zip(rx).filter(|(a, b)| (*a ^ *b) & 1 != 0).count())
}

/// Hamming distance over length.
pub fn ber(tx: &[u8], rx: &[u8]) -> Result<f64> {
    let errors = bit_errors(tx, rx)?;
    if tx.len() < MIN_BER_BITS {
        return Err(Error::param(format!(
            "BER needs at least {MIN_BER_BITS} bits, got {}",
            tx.len()
        )));
    }
    Ok(errors as f64 / tx.len() as f64)
}

/// Empirical probability of each constellation point among `decided`
/// indices. Indices outside the constellation are ignored; an empty input
/// gives all zeros.
pub fn symbol_pdf(decided: &[usize], constellation: &Constellation) -> Vec<f64> {
    let mut counts = vec![0usize; constellation.len()];
    for &i in decided {
        if let Some(c) = counts.get_mut(i) {
            *c += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return vec![0.0; counts.len()];
    }
    counts.iter().map(|&c| c as f64 / total as f64).collect()
}
