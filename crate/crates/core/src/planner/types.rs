use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::shaping::{pcs_qam, Constellation};

/// Per-band modulation format.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Modulation {
    /// Probabilistically shaped 64-QAM with source entropy `entropy` bits.
    Pcs64qam { entropy: f64 },
    Bpsk,
}

impl Modulation {
    /// Source entropy in bits per symbol.
    pub fn entropy(&self) -> f64 {
        match *self {
            Modulation::Pcs64qam { entropy } => entropy,
            Modulation::Bpsk => 1.0,
        }
    }

    /// Bits per symbol of the underlying constellation.
    pub fn bits_per_symbol(&self) -> u32 {
        match self {
            Modulation::Pcs64qam { .. } => 6,
            Modulation::Bpsk => 1,
        }
    }

    /// The shaped constellation (uniform 64-QAM at 6 bits).
    pub fn constellation(&self) -> Result<Constellation> {
        match *self {
            Modulation::Pcs64qam { entropy } => pcs_qam(6, entropy),
            Modulation::Bpsk => Ok(Constellation::bpsk()),
        }
    }
}

/// One subcarrier band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandSpec {
    /// Center frequency, Hz.
    pub center: f64,
    /// Symbol rate, Bd.
    pub baud: f64,
    pub rolloff: f64,
    pub modulation: Modulation,
    /// Power relative to an equal-PSD allocation (band power ∝ `power_scale · baud`).
    #[serde(default = "one")]
    pub power_scale: f64,
    /// Set by entropy loading when even BPSK is not viable; excluded bands
    /// carry no rate.
    #[serde(default)]
    pub excluded: bool,
}

fn one() -> f64 {
    1.0
}

impl BandSpec {
    /// Occupied width `baud · (1 + ρ)`.
    pub fn occupied_width(&self) -> f64 {
        self.baud * (1.0 + self.rolloff)
    }

    /// Occupied interval `[lo, hi]` in Hz.
    pub fn occupied(&self) -> (f64, f64) {
        let h = self.occupied_width() / 2.0;
        (self.center - h, self.center + h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.baud > 0.0 && self.baud.is_finite()) {
            return Err(Error::Config(format!("band baud must be positive, got {}", self.baud)));
        }
        if !(self.center > 0.0 && self.center.is_finite()) {
            return Err(Error::Config(format!("band center must be positive, got {}", self.center)));
        }
        if !(0.0..=1.0).contains(&self.rolloff) {
            return Err(Error::Config(format!("band roll-off must lie in [0, 1], got {}", self.rolloff)));
        }
        if !(self.power_scale >= 0.0 && self.power_scale.is_finite()) {
            return Err(Error::Config("band power_scale must be >= 0".into()));
        }
        if let Modulation::Pcs64qam { entropy } = self.modulation {
            if !(entropy > 0.0 && entropy <= 6.0) {
                return Err(Error::Config(format!("PCS-64QAM entropy must lie in (0, 6], got {entropy}")));
            }
        }
        Ok(())
    }
}

/// An ordered set of non-overlapping bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcarrierPlan {
    pub bands: Vec<BandSpec>,
    /// Minimum clearance between a band edge and a null or neighbor, Hz.
    pub guard: f64,
}

impl SubcarrierPlan {
    /// `(lowest occupied edge, highest occupied edge)`.
    pub fn occupied_span(&self) -> Option<(f64, f64)> {
        let lo = self.bands.iter().map(|b| b.occupied().0).fold(f64::INFINITY, f64::min);
        let hi = self.bands.iter().map(|b| b.occupied().1).fold(f64::NEG_INFINITY, f64::max);
        (!self.bands.is_empty()).then_some((lo, hi))
    }

    /// Sum of band symbol rates.
    pub fn total_baud(&self) -> f64 {
        self.bands.iter().map(|b| b.baud).sum()
    }

    /// Checks band validity, ordering and pairwise clearance of `guard`.
    pub fn validate(&self) -> Result<()> {
        if self.bands.is_empty() {
            return Err(Error::Config("plan has no bands".into()));
        }
        if !(self.guard >= 0.0) {
            return Err(Error::Config("plan guard must be >= 0".into()));
        }
        for b in &self.bands {
            b.validate()?;
        }
        for (i, w) in self.bands.windows(2).enumerate() {
            let gap = w[1].occupied().0 - w[0].occupied().1;
            if gap < self.guard - 1.0 {
                return Err(Error::Config(format!(
                    "bands {i} and {} overlap or violate the guard ({gap} Hz apart)",
                    i + 1
                )));
            }
        }
        Ok(())
    }

    /// True when no band's guarded interval contains any of `nulls`.
    pub fn avoids(&self, nulls: &[f64]) -> bool {
        self.bands.iter().all(|b| {
            let (lo, hi) = b.occupied();
            nulls
                .iter()
                .all(|&f| f < lo - self.guard || f > hi + self.guard)
        })
    }
}

/// Per-band electrical SNR estimates, dB.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrProfile(pub Vec<f64>);

impl SnrProfile {
    pub fn new(snr_db: Vec<f64>) -> Result<Self> {
        if snr_db.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("SNR entries must be finite"));
        }
        Ok(SnrProfile(snr_db))
    }
}
