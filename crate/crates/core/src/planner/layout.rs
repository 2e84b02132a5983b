use serde::{Deserialize, Serialize};

use super::{BandSpec, Modulation, SubcarrierPlan};
use crate::error::{Error, Result};
use crate::linksim::{LinkConfig, SPEED_OF_LIGHT};

/// Ascending fading-null frequencies `f_n = √((2n+1)·c / (2·D·L·λ²)) ≤ f_max`.
pub fn dispersion_nulls(cfg: &LinkConfig, f_max: f64) -> Vec<f64> {
    let k = 2.0 * cfg.dispersion.abs() * cfg.length * cfg.wavelength.powi(2);
    if !(k > 0.0) || !(f_max > 0.0) {
        return Vec::new();
    }
    (0..)
        .map(|n: u64| ((2 * n + 1) as f64 * SPEED_OF_LIGHT / k).sqrt())
        .take_while(|&f| f <= f_max)
        .collect()
}

/// Band packing parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    /// Lowest usable frequency, Hz.
    pub span_lo: f64,
    /// Highest usable frequency, Hz.
    pub span_hi: f64,
    pub guard: f64,
    pub rolloff: f64,
    pub max_bands: usize,
    /// Gaps that cannot hold at least this symbol rate are left empty.
    pub min_baud: f64,
    /// Centers and symbol rates are multiples of this step, Hz.
    pub grid: f64,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        LayoutConfig {
            span_lo: 0.5e9,
            span_hi: 34e9,
            guard: 0.1e9,
            rolloff: 0.1,
            max_bands: 16,
            min_baud: 0.25e9,
            grid: 10e6,
        }
    }
}

/// Places one band per usable inter-null gap of `[span_lo, span_hi]`,
/// keeping the lowest `max_bands`, then splits gaps wider than twice the
/// median gap evenly (widest piece first) while bands remain. Each piece of
/// width `w` holds a band of baud `(w − 2·guard)/(1+ρ)` centered in it, both
/// snapped down/onto the grid. Nulls outside the span are ignored and the
/// order of `nulls` does not matter.
pub fn plan_bands(nulls: &[f64], layout: &LayoutConfig) -> Result<SubcarrierPlan> {
    let LayoutConfig {
        span_lo: lo,
        span_hi: hi,
        guard,
        rolloff,
        max_bands,
        min_baud,
        grid,
    } = *layout;
    if !(hi > lo) || !(lo >= 0.0) {
        return Err(Error::param(format!("span [{lo}, {hi}] has no positive width")));
    }
    if !(guard >= 0.0) || !(0.0..=1.0).contains(&rolloff) || !(grid > 0.0) || max_bands == 0 {
        return Err(Error::param("invalid guard, roll-off, grid or band count"));
    }
    let mut inside: Vec<f64> = nulls.iter().copied().filter(|&f| f > lo && f < hi).collect();
    inside.sort_by(f64::total_cmp);
    inside.dedup();
    let mut edges = vec![lo];
    edges.extend(inside);
    edges.push(hi);
    let min_width = 2.0 * guard + (1.0 + rolloff) * min_baud;
    let mut gaps: Vec<(f64, f64)> = edges
        .windows(2)
        .map(|w| (w[0], w[1]))
        .filter(|(a, b)| b - a >= min_width)
        .collect();
    gaps.truncate(max_bands);
    if gaps.is_empty() {
        return Err(Error::Range("no inter-null gap can hold a band".into()));
    }
    let mut widths: Vec<f64> = gaps.iter().map(|(a, b)| b - a).collect();
    widths.sort_by(f64::total_cmp);
    let median = if widths.len() % 2 == 1 {
        widths[widths.len() / 2]
    } else {
        0.5 * (widths[widths.len() / 2 - 1] + widths[widths.len() / 2])
    };
    let mut pieces = vec![1usize; gaps.len()];
    while pieces.iter().sum::<usize>() < max_bands {
        let pick = gaps
            .iter()
            .zip(&pieces)
            .enumerate()
            .filter(|(_, ((a, b), _))| b - a > 2.0 * median)
            .map(|(i, ((a, b), &p))| (i, (b - a) / p as f64))
            .filter(|&(_, piece)| piece / 2.0 >= min_width)
            .max_by(|x, y| x.1.total_cmp(&y.1).then(y.0.cmp(&x.0)));
        match pick {
            Some((i, _)) => pieces[i] += 1,
            None => break,
        }
    }
    let mut bands = Vec::new();
    for ((a, b), &p) in gaps.iter().zip(&pieces) {
        let w = (b - a) / p as f64;
        for j in 0..p {
            let (pa, pb) = (a + j as f64 * w, a + (j + 1) as f64 * w);
            if let Some(band) = fit_band(pa, pb, guard, rolloff, grid, min_baud) {
                bands.push(band);
            }
        }
    }
    if bands.is_empty() {
        return Err(Error::Range("no inter-null gap can hold a band".into()));
    }
    Ok(SubcarrierPlan { bands, guard })
}

fn fit_band(a: f64, b: f64, guard: f64, rolloff: f64, grid: f64, min_baud: f64) -> Option<BandSpec> {
    let center = ((a + b) / 2.0 / grid).round() * grid;
    let room = 2.0 * ((center - a).min(b - center) - guard);
    let mut baud = (room / (1.0 + rolloff) / grid).floor() * grid;
    // Guard against rounding at the boundary.
    while baud > 0.0 && center + baud * (1.0 + rolloff) / 2.0 + guard > b {
        baud -= grid;
    }
    (baud >= min_baud).then_some(BandSpec {
        center,
        baud,
        rolloff,
        modulation: Modulation::Pcs64qam { entropy: 6.0 },
        power_scale: 1.0,
        excluded: false,
    })
}
