//! Dispersion-null map, multi-rate band packing between the nulls, entropy
//! loading and rate bookkeeping.

mod layout;
mod loading;
mod types;

pub use layout::{dispersion_nulls, plan_bands, LayoutConfig};
pub use loading::{
    bpsk_gmi, entropy_load, loaded_entropy, matched_bits_per_symbol, plan_rate, BandRate,
    LoadingRule, Matcher, PlanRate,
};
pub use types::{BandSpec, Modulation, SnrProfile, SubcarrierPlan};

use crate::error::Result;

/// Loads `plan` from `snr` and then forces the `bpsk_top` highest-frequency
/// bands to BPSK (the layout used for the 13 PCS + 3 BPSK replica).
pub fn load_with_bpsk_top(
    plan: &SubcarrierPlan,
    snr: &SnrProfile,
    rule: &LoadingRule,
    bpsk_top: usize,
) -> Result<SubcarrierPlan> {
    let mut loaded = entropy_load(plan, snr, rule)?;
    let n = loaded.bands.len();
    for band in loaded.bands.iter_mut().skip(n.saturating_sub(bpsk_top)) {
        band.modulation = Modulation::Bpsk;
    }
    Ok(loaded)
}
