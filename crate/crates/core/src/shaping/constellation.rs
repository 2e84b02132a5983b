use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points with bit labels and prior probabilities, scaled to unit mean
/// energy under the priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    lattice: Vec<Complex64>,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    priors: Vec<f64>,
    bits: u32,
}

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

impl Constellation {
    /// Builds a constellation from unnormalized `lattice` points, labels and
    /// priors; points are rescaled to unit energy under `priors`.
    pub fn new(lattice: Vec<Complex64>, labels: Vec<u32>, priors: Vec<f64>) -> Result<Self> {
        let size = lattice.len();
        if size < 2 || !size.is_power_of_two() {
            return Err(Error::param(format!(
                "constellation size must be a power of two >= 2, got {size}"
            )));
        }
        let bits = size.trailing_zeros();
        if labels.len() != size || priors.len() != size {
            return Err(Error::param("labels and priors must match the point count"));
        }
        let mut seen = vec![false; size];
        for &l in &labels {
            if l as usize >= size || std::mem::replace(&mut seen[l as usize], true) {
                return Err(Error::param(format!("labels must be distinct {bits}-bit values")));
            }
        }
        if priors.iter().any(|p| !(*p >= 0.0)) || (priors.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::param("priors must be non-negative and sum to 1"));
        }
        let energy: f64 = lattice.iter().zip(&priors).map(|(x, p)| p * x.norm_sqr()).sum();
        if !(energy > 0.0) || !energy.is_finite() {
            return Err(Error::param("constellation has no energy under its priors"));
        }
        let scale = energy.sqrt().recip();
        let points = lattice.iter().map(|x| x * scale).collect();
        Ok(Constellation {
            lattice,
            points,
            labels,
            priors,
            bits,
        })
    }

    /// Square `2^bits`-QAM on the odd-integer lattice with Gray labels,
    /// uniform priors.
    pub fn square_qam(bits: u32) -> Result<Self> {
        if bits < 2 || !bits.is_multiple_of(2) || bits > 16 {
            return Err(Error::param(format!("square QAM needs an even bit count, got {bits}")));
        }
        let side = 1u32 << (bits / 2);
        let mut lattice = Vec::new();
        let mut labels = Vec::new();
        for i in 0..side {
            for q in 0..side {
                lattice.push(Complex64::new(
                    (2 * i) as f64 - (side - 1) as f64,
                    (2 * q) as f64 - (side - 1) as f64,
                ));
                labels.push((gray(i) << (bits / 2)) | gray(q));
            }
        }
        let n = lattice.len();
        Self::new(lattice, labels, vec![1.0 / n as f64; n])
    }

    /// BPSK: index 0 → +1 (label 0), index 1 → −1 (label 1).
    pub fn bpsk() -> Self {
        Self::new(
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
            vec![0, 1],
            vec![0.5, 0.5],
        )
        .expect("valid BPSK")
    }

    /// Gray-labelled QPSK with unit energy.
    pub fn qpsk() -> Self {
        Self::square_qam(2).expect("valid QPSK")
    }

    /// Same points and labels with new priors (energy renormalized).
    pub fn with_priors(&self, priors: Vec<f64>) -> Result<Self> {
        Self::new(self.lattice.clone(), self.labels.clone(), priors)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Bits per symbol `m`.
    pub fn bits_per_symbol(&self) -> u32 {
        self.bits
    }

    /// Energy-normalized points.
    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    /// Unnormalized lattice points.
    pub fn lattice(&self) -> &[Complex64] {
        &self.lattice
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Source entropy of the priors in bits.
    pub fn entropy(&self) -> f64 {
        super::entropy(&self.priors)
    }

    /// Bit `j` (0 = most significant) of the label of point `i`.
    pub fn label_bit(&self, i: usize, j: u32) -> u8 {
        ((self.labels[i] >> (self.bits - 1 - j)) & 1) as u8
    }

    /// Point index carrying `label`.
    pub fn index_of_label(&self, label: u32) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    /// Energy-normalized points for `indices`.
    pub fn map(&self, indices: &[usize]) -> Result<Vec<Complex64>> {
        indices
            .iter()
            .map(|&i| {
                self.points.get(i).copied().ok_or_else(|| {
                    Error::param(format!("symbol index {i} outside a {}-point constellation", self.len()))
                })
            })
            .collect()
    }

    /// Label bits (MSB first) of every index, concatenated.
    pub fn label_bits(&self, indices: &[usize]) -> Vec<u8> {
        indices
            .iter()
            .flat_map(|&i| (0..self.bits).map(move |j| self.label_bit(i, j)))
            .collect()
    }

    /// Index of the nearest point (Euclidean), lowest index on ties.
    pub fn slice(&self, r: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (r - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }
}

/// Maps symbol indices to energy-normalized points.
pub fn map_symbols(indices: &[usize], constellation: &Constellation) -> Result<Vec<Complex64>> {
    constellation.map(indices)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bpsk_mapping() {
        let c = Constellation::bpsk();
        assert_eq!(
            map_symbols(&[0, 1], &c).unwrap(),
            vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]
        );
        assert!(map_symbols(&[2], &c).is_err());
    }

    #[test]
    fn qam64_unit_energy_and_gray() {
        let c = Constellation::square_qam(6).unwrap();
        let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / 64.0;
        assert!((e - 1.0).abs() < 1e-12);
        let dmin = 2.0 / 42f64.sqrt();
        for i in 0..64 {
            for j in 0..64 {
                if ((c.points()[i] - c.points()[j]).norm() - dmin).abs() < 1e-9 {
                    assert_eq!((c.labels()[i] ^ c.labels()[j]).count_ones(), 1);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_priors() {
        let c = Constellation::qpsk();
        assert!(c.with_priors(vec![0.5, 0.5, 0.5, -0.5]).is_err());
        assert!(c.with_priors(vec![0.3, 0.3, 0.3, 0.3]).is_err());
    }
}
