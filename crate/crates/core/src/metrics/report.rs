use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metrics of one band in one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMetrics {
    pub band: usize,
    pub center_hz: f64,
    pub baud: f64,
    /// `pcs64qam` or `bpsk`.
    pub modulation: String,
    /// Source entropy H, bits/symbol.
    pub entropy: f64,
    /// Bits per symbol m of the constellation.
    pub bits_per_symbol: u32,
    pub bit_errors: usize,
    pub bits: usize,
    pub ber: f64,
    pub gmi: f64,
    pub gmi_std_err: f64,
    pub ngmi: f64,
    pub snr_db: f64,
    pub alpha: f64,
    pub gross_rate: f64,
    pub matched_rate: f64,
    pub net_rate: f64,
    /// Matcher blocks whose detected composition could not be inverted.
    pub decode_failures: usize,
    pub blocks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateMetrics {
    /// Total bit errors over total bits.
    pub ber: f64,
    /// Unweighted mean of the per-band BERs.
    pub band_mean_ber: f64,
    /// Net-rate-weighted mean NGMI.
    pub ngmi: f64,
    pub gross_rate: f64,
    pub matched_rate: f64,
    pub net_rate: f64,
    pub length_km: f64,
    /// Net rate times distance, bit/s·km.
    pub capacity_reach: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub seed: u64,
    pub bands: Vec<BandMetrics>,
    pub aggregate: AggregateMetrics,
}

impl MetricsReport {
    /// Assembles the aggregate from per-band metrics.
    pub fn new(seed: u64, bands: Vec<BandMetrics>, length_km: f64) -> Result<Self> {
        if bands.is_empty() {
            return Err(Error::UndefinedMetric("report has no bands".into()));
        }
        let bits: usize = bands.iter().map(|b| b.bits).sum();
        let errors: usize = bands.iter().map(|b| b.bit_errors).sum();
        let net: f64 = bands.iter().map(|b| b.net_rate).sum();
        let ngmi = if net > 0.0 {
            bands.iter().map(|b| b.ngmi * b.net_rate).sum::<f64>() / net
        } else {
            bands.iter().map(|b| b.ngmi).sum::<f64>() / bands.len() as f64
        };
        let aggregate = AggregateMetrics {
            ber: if bits > 0 { errors as f64 / bits as f64 } else { 0.0 },
            band_mean_ber: bands.iter().map(|b| b.ber).sum::<f64>() / bands.len() as f64,
            ngmi,
            gross_rate: bands.iter().map(|b| b.gross_rate).sum(),
            matched_rate: bands.iter().map(|b| b.matched_rate).sum(),
            net_rate: net,
            length_km,
            capacity_reach: net * length_km,
        };
        Ok(MetricsReport {
            seed,
            bands,
            aggregate,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Data(e.to_string()))
    }

    /// Column names of [`Self::csv_rows`].
    pub const CSV_COLUMNS: &'static [&'static str] = &[
        "seed", "band", "center_hz", "baud", "modulation", "entropy", "bits_per_symbol",
        "bit_errors", "bits", "ber", "gmi", "gmi_std_err", "ngmi", "snr_db", "alpha",
        "gross_rate", "matched_rate", "net_rate", "decode_failures", "blocks",
    ];

    /// One long-format CSV row per band, without header.
    pub fn csv_rows(&self) -> Vec<String> {
        self.bands
            .iter()
            .map(|b| {
                format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                    self.seed,
                    b.band,
                    b.center_hz,
                    b.baud,
                    b.modulation,
                    b.entropy,
                    b.bits_per_symbol,
                    b.bit_errors,
                    b.bits,
                    b.ber,
                    b.gmi,
                    b.gmi_std_err,
                    b.ngmi,
                    b.snr_db,
                    b.alpha,
                    b.gross_rate,
                    b.matched_rate,
                    b.net_rate,
                    b.decode_failures,
                    b.blocks
                )
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = Self::CSV_COLUMNS.join(",");
        out.push('\n');
        for row in self.csv_rows() {
            out.push_str(&row);
            out.push('\n');
        }
        out
    }
}
