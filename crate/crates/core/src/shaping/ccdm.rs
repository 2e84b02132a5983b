//! Constant-composition distribution matching by exact enumerative coding.
//!
//! Sequences with a fixed composition are ranked lexicographically (symbol
//! index order). Encoding reads `k` bits as an integer `I < 2^k` (most
//! significant bit first) and emits the sequence of rank `I`; decoding
//! computes the rank. With `r` symbols left and counts `c`, the number of
//! completions starting with symbol `a` is `N·c_a/r`, where `N` is the
//! multinomial of the remaining counts; every such quotient is exact.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symbol occurrence counts of one matcher block.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Composition {
    counts: Vec<u64>,
}

impl Composition {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() || counts.iter().sum::<u64>() == 0 {
            return Err(Error::param("composition needs at least one symbol"));
        }
        Ok(Composition { counts })
    }

    /// Largest-remainder quantization of `priors` to block length `n`
    /// (ties broken toward the lower symbol index).
    pub fn from_priors(priors: &[f64], n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::param("block length must be >= 1"));
        }
        if priors.is_empty() || priors.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::param("priors must be non-negative"));
        }
        let total: f64 = priors.iter().sum();
        let ideal: Vec<f64> = priors.iter().map(|p| p / total * n as f64).collect();
        let mut counts: Vec<u64> = ideal.iter().map(|v| v.floor() as u64).collect();
        let mut order: Vec<usize> = (0..priors.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = ideal[a] - ideal[a].floor();
            let rb = ideal[b] - ideal[b].floor();
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let short = n - counts.iter().sum::<u64>();
        for &i in order.iter().take(short as usize) {
            counts[i] += 1;
        }
        Self::new(counts)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Block length `n`.
    pub fn len(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Empirical distribution `counts / n`.
    pub fn distribution(&self) -> Vec<f64> {
        let n = self.len() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Number of distinct sequences with this composition.
    pub fn multinomial(&self) -> BigUint {
        let mut acc = BigUint::one();
        let mut placed = 0u64;
        // Π_a C(placed + c_a, c_a), built incrementally with exact divisions.
        for &c in &self.counts {
            for j in 1..=c {
                placed += 1;
                acc *= placed;
                acc /= j;
            }
        }
        acc
    }

    /// Input bits per block: `⌊log2 multinomial⌋`.
    pub fn num_bits(&self) -> u64 {
        self.multinomial().bits() - 1
    }
}

/// A matcher bound to one composition, caching the multinomial.
#[derive(Debug, Clone)]
pub struct Ccdm {
    composition: Composition,
    total: BigUint,
    k: u64,
}

impl Ccdm {
    pub fn new(composition: Composition) -> Self {
        let total = composition.multinomial();
        let k = total.bits() - 1;
        Ccdm {
            composition,
            total,
            k,
        }
    }

    pub fn composition(&self) -> &Composition {
        &self.composition
    }

    /// Input bits per block.
    pub fn num_bits(&self) -> usize {
        self.k as usize
    }

    pub fn block_len(&self) -> usize {
        self.composition.len() as usize
    }

    /// Matcher rate `k / n` in bits per symbol.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.composition.len() as f64
    }

    pub fn encode(&self, bits: &[u8]) -> Result<Vec<usize>> {
        if bits.len() as u64 != self.k {
            return Err(Error::param(format!(
                "matcher expects {} bits per block, got {}",
                self.k,
                bits.len()
            )));
        }
        let mut index = BigUint::zero();
        for &b in bits {
            index <<= 1u32;
            if b != 0 {
                index += 1u32;
            }
        }
        let mut counts = self.composition.counts.clone();
        let mut remaining = self.composition.len();
        let mut total = self.total.clone();
        let mut out = Vec::with_capacity(remaining as usize);
        while remaining > 0 {
            // q = ⌊I·r/N⌋ lies in the count interval of the emitted symbol.
            let q = (&index * remaining / &total)
                .to_u64()
                .expect("quotient below block length");
            let mut cum = 0u64;
            let mut a = 0;
            while cum + counts[a] <= q {
                cum += counts[a];
                a += 1;
            }
            index -= &total * cum / remaining;
            total = &total * counts[a] / remaining;
            counts[a] -= 1;
            remaining -= 1;
            out.push(a);
        }
        Ok(out)
    }

    pub fn decode(&self, symbols: &[usize]) -> Result<Vec<u8>> {
        let mut counts = self.composition.counts.clone();
        if symbols.len() as u64 != self.composition.len() {
            return Err(Error::Decode(format!(
                "block has {} symbols, composition needs {}",
                symbols.len(),
                self.composition.len()
            )));
        }
        for &s in symbols {
            match counts.get_mut(s) {
                Some(c) if *c > 0 => *c -= 1,
                _ => {
                    return Err(Error::Decode(
                        "symbol block does not match the composition".into(),
                    ))
                }
            }
        }
        let mut counts = self.composition.counts.clone();
        let mut remaining = self.composition.len();
        let mut total = self.total.clone();
        let mut index = BigUint::zero();
        for &a in symbols {
            let cum: u64 = counts[..a].iter().sum();
            index += &total * cum / remaining;
            total = &total * counts[a] / remaining;
            counts[a] -= 1;
            remaining -= 1;
        }
        if index.bits() > self.k {
            return Err(Error::Decode(format!(
                "sequence rank exceeds the {}-bit input range",
                self.k
            )));
        }
        Ok((0..self.k)
            .rev()
            .map(|j| index.bit(j) as u8)
            .collect())
    }
}

/// One-shot encode with `composition`.
pub fn ccdm_encode(bits: &[u8], composition: &Composition) -> Result<Vec<usize>> {
    Ccdm::new(composition.clone()).encode(bits)
}

/// One-shot decode with `composition`.
pub fn ccdm_decode(symbols: &[usize], composition: &Composition) -> Result<Vec<u8>> {
    Ccdm::new(composition.clone()).decode(symbols)
}
