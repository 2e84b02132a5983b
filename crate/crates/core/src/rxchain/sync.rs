use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::dsp::ComplexWaveform;
use crate::error::{Error, Result};

/// Minimum normalized correlation accepted as a preamble detection.
pub const SYNC_THRESHOLD: f64 = 0.5;

/// Result of preamble detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyncResult {
    /// Sample index of the first preamble symbol.
    pub offset: usize,
    /// Phase of the correlation peak, rad (received ≈ preamble · e^{jφ}).
    pub phase: f64,
    /// Normalized correlation magnitude at the peak, in `[0, 1]`.
    pub peak: f64,
}

/// Finds the sample offset `o` maximizing the normalized correlation
/// `|Σ_k x[o + k·sps]·conj(p_k)| / √(Σ_k |x[o + k·sps]|² · Σ_k |p_k|²)`.
/// `x` is treated as periodic, so the preamble may wrap around its end.
pub fn frame_sync(x: &ComplexWaveform, preamble: &[Complex64], sps: usize) -> Result<SyncResult> {
    if preamble.len() < 64 {
        return Err(Error::param(format!(
            "preamble needs at least 64 symbols, got {}",
            preamble.len()
        )));
    }
    if sps == 0 || !x.len().is_multiple_of(sps) || x.len() / sps < preamble.len() {
        return Err(Error::param(format!(
            "signal of {} samples cannot hold a {}-symbol preamble at {sps} samples/symbol",
            x.len(),
            preamble.len()
        )));
    }
    let n = x.len() / sps;
    let p_energy: f64 = preamble.iter().map(|v| v.norm_sqr()).sum();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut pf = vec![Complex64::new(0.0, 0.0); n];
    pf[..preamble.len()].copy_from_slice(preamble);
    fwd.process(&mut pf);

    let mut best = SyncResult {
        offset: 0,
        phase: 0.0,
        peak: 0.0,
    };
    for r in 0..sps {
        let mut y: Vec<Complex64> = (0..n).map(|k| x.samples()[r + k * sps]).collect();
        // Cyclic window energies via prefix sums over a doubled sequence.
        let mut prefix = Vec::with_capacity(2 * n + 1);
        prefix.push(0.0);
        for k in 0..2 * n {
            let last = prefix[k];
            prefix.push(last + y[k % n].norm_sqr());
        }
        fwd.process(&mut y);
        for (a, b) in y.iter_mut().zip(&pf) {
            *a *= b.conj();
        }
        inv.process(&mut y);
        for (m, c) in y.iter().enumerate() {
            let energy = prefix[m + preamble.len()] - prefix[m];
            if energy <= 0.0 {
                continue;
            }
            let c = c / n as f64;
            let peak = c.norm() / (energy * p_energy).sqrt();
            if peak > best.peak {
                best = SyncResult {
                    offset: r + m * sps,
                    phase: c.arg(),
                    peak,
                };
            }
        }
    }
    if best.peak < SYNC_THRESHOLD {
        return Err(Error::SyncFailure { peak: best.peak });
    }
    Ok(best)
}
