use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Maxwell-Boltzmann shaping parameter and the entropy it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MbShaping {
    pub nu: f64,
    pub entropy: f64,
}

/// `p_i ∝ exp(−ν|x_i|²)` over unnormalized lattice points.
pub fn mb_distribution(lattice: &[Complex64], nu: f64) -> Result<Vec<f64>> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(Error::param(format!("MB exponent must be finite and >= 0, got {nu}")));
    }
    if lattice.is_empty() {
        return Err(Error::param("MB distribution over an empty lattice"));
    }
    // Shift by the minimum energy so large ν does not underflow to all zeros.
    let e_min = lattice.iter().map(|x| x.norm_sqr()).fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = lattice
        .iter()
        .map(|x| (-nu * (x.norm_sqr() - e_min)).exp())
        .collect();
    let z: f64 = w.iter().sum();
    Ok(w.into_iter().map(|v| v / z).collect())
}

/// Shannon entropy in bits.
pub fn entropy(p: &[f64]) -> f64 {
    -p.iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| v * v.log2())
        .sum::<f64>()
}

/// Lowest entropy accepted by [`mb_fit_entropy`].
pub const MIN_FIT_ENTROPY: f64 = 2.0;

/// Finds `ν` such that the MB distribution on `lattice` has entropy
/// `target` within 1e-6 bits (bisection; entropy decreases in `ν`).
pub fn mb_fit_entropy(lattice: &[Complex64], target: f64) -> Result<MbShaping> {
    let m = (lattice.len() as f64).log2();
    if !(target > MIN_FIT_ENTROPY && target <= m + 1e-12) {
        return Err(Error::Range(format!(
            "target entropy {target} bits outside ({MIN_FIT_ENTROPY}, {m}]"
        )));
    }
    let h = |nu: f64| entropy(&mb_distribution(lattice, nu).expect("nu >= 0"));
    if target >= m - 1e-12 {
        return Ok(MbShaping { nu: 0.0, entropy: h(0.0) });
    }
    let mut hi = 1.0;
    while h(hi) > target {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Range(format!("target entropy {target} not reachable")));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi {
            break;
        }
    }
    let nu = 0.5 * (lo + hi);
    let entropy = h(nu);
    if (entropy - target).abs() > 1e-6 {
        return Err(Error::Range(format!(
            "bisection reached {entropy} bits for target {target}"
        )));
    }
    Ok(MbShaping { nu, entropy })
}
