//! Probabilistic constellation shaping: Maxwell-Boltzmann priors, constant
//! composition distribution matching, mapping and soft demapping.

mod ccdm;
mod constellation;
mod demap;
mod mb;

pub use ccdm::{ccdm_decode, ccdm_encode, Ccdm, Composition};
pub use constellation::{map_symbols, Constellation};
pub use demap::{demap_llr, Demapped, LLR_CAP};
pub use mb::{entropy, mb_distribution, mb_fit_entropy, MbShaping, MIN_FIT_ENTROPY};

use crate::error::Result;

/// PCS square QAM with Maxwell-Boltzmann priors of entropy `h` bits; `h`
/// equal to the bit count gives uniform priors.
pub fn pcs_qam(bits: u32, h: f64) -> Result<Constellation> {
    let base = Constellation::square_qam(bits)?;
    let shaping = mb_fit_entropy(base.lattice(), h)?;
    base.with_priors(mb_distribution(base.lattice(), shaping.nu)?)
}
