use serde::{Deserialize, Serialize};

use crate::dsp::Rolloff;
use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Physical link and front-end parameters. Bandwidths may be `inf`
/// (no band limit); converter `bits = 0` disables quantization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinkConfig {
    /// Carrier wavelength, m.
    pub wavelength: f64,
    /// Dispersion parameter D, s/m².
    pub dispersion: f64,
    /// Fiber length, m.
    pub length: f64,
    /// Fiber attenuation, dB/km.
    pub fiber_loss_db_per_km: f64,
    pub launch_power_dbm: f64,
    pub edfa: EdfaConfig,
    /// Received optical power set by the VOA, dBm.
    pub rop_dbm: f64,
    pub mzm: MzmConfig,
    pub dac: ConverterConfig,
    pub adc: ConverterConfig,
    pub pd: PdConfig,
    /// Common rate of the analog/optical models, Sa/s.
    pub sim_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdfaConfig {
    pub gain_db: f64,
    /// Enables ASE noise when set.
    pub noise_figure_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MzmConfig {
    pub vpi: f64,
    pub bias: f64,
    /// Peak drive voltage corresponding to DAC full scale, V.
    pub drive_scale: f64,
    /// Electro-optic 3 dB bandwidth, Hz.
    pub bandwidth_3db: f64,
    pub rolloff: Rolloff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConverterConfig {
    pub rate: f64,
    /// 3 dB bandwidth (DAC) or anti-alias cutoff (ADC), Hz.
    pub bandwidth_3db: f64,
    /// Resolution; 0 means unquantized.
    pub bits: u32,
    pub rolloff: Rolloff,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdConfig {
    /// A/W.
    pub responsivity: f64,
    pub bandwidth_3db: f64,
    /// One-sided thermal noise current density at the TIA input, A²/Hz.
    pub thermal_noise_psd: f64,
    pub rolloff: Rolloff,
}

impl Default for LinkConfig {
    fn default() -> Self {
        LinkConfig {
            wavelength: 1550.02e-9,
            dispersion: 17e-6,
            length: 100e3,
            fiber_loss_db_per_km: 0.2,
            launch_power_dbm: 6.89,
            edfa: EdfaConfig::default(),
            rop_dbm: -2.0,
            mzm: MzmConfig::default(),
            dac: ConverterConfig::dac(),
            adc: ConverterConfig::adc(),
            pd: PdConfig::default(),
            sim_rate: 180e9,
        }
    }
}

impl Default for EdfaConfig {
    fn default() -> Self {
        // Brings the 100 km fiber output (6.89 − 20 dBm) to 9.9 dBm.
        EdfaConfig {
            gain_db: 23.01,
            noise_figure_db: None,
        }
    }
}

impl Default for MzmConfig {
    fn default() -> Self {
        MzmConfig {
            vpi: 4.9,
            bias: 2.45,
            drive_scale: 0.5,
            bandwidth_3db: 30e9,
            rolloff: Rolloff::Gaussian,
        }
    }
}

impl ConverterConfig {
    pub fn dac() -> Self {
        ConverterConfig {
            rate: 90e9,
            bandwidth_3db: 16e9,
            bits: 8,
            rolloff: Rolloff::Gaussian,
        }
    }

    pub fn adc() -> Self {
        ConverterConfig {
            rate: 80e9,
            bandwidth_3db: 36e9,
            bits: 8,
            rolloff: Rolloff::Gaussian,
        }
    }

    /// Same rate, no band limit, no quantization.
    pub fn ideal(rate: f64) -> Self {
        ConverterConfig {
            rate,
            bandwidth_3db: f64::INFINITY,
            bits: 0,
            rolloff: Rolloff::Gaussian,
        }
    }
}

impl Default for ConverterConfig {
    fn default() -> Self {
        Self::dac()
    }
}

impl Default for PdConfig {
    fn default() -> Self {
        PdConfig {
            responsivity: 0.8,
            bandwidth_3db: 31e9,
            thermal_noise_psd: 1.5e-22,
            rolloff: Rolloff::Gaussian,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && !v.is_nan() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

fn positive_finite(name: &str, v: f64) -> Result<()> {
    positive(name, v)?;
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite, got {v}")))
    }
}

impl LinkConfig {
    pub fn validate(&self) -> Result<()> {
        positive_finite("wavelength", self.wavelength)?;
        finite("dispersion", self.dispersion)?;
        if !(self.length >= 0.0 && self.length.is_finite()) {
            return Err(Error::Config(format!("length must be >= 0, got {}", self.length)));
        }
        if !(self.fiber_loss_db_per_km >= 0.0 && self.fiber_loss_db_per_km.is_finite()) {
            return Err(Error::Config("fiber loss must be >= 0".into()));
        }
        finite("launch_power_dbm", self.launch_power_dbm)?;
        finite("edfa.gain_db", self.edfa.gain_db)?;
        if let Some(nf) = self.edfa.noise_figure_db {
            finite("edfa.noise_figure_db", nf)?;
            if self.edfa.gain_db <= 0.0 {
                return Err(Error::Config("ASE needs a positive EDFA gain".into()));
            }
        }
        finite("rop_dbm", self.rop_dbm)?;
        let ceiling = self.launch_power_dbm - self.fiber_loss_db_per_km * self.length / 1e3
            + self.edfa.gain_db;
        if self.rop_dbm > ceiling + 0.01 {
            return Err(Error::Config(format!(
                "ROP {} dBm exceeds the available {ceiling:.2} dBm after the EDFA",
                self.rop_dbm
            )));
        }
        positive_finite("mzm.vpi", self.mzm.vpi)?;
        finite("mzm.bias", self.mzm.bias)?;
        if !(self.mzm.drive_scale >= 0.0 && self.mzm.drive_scale.is_finite()) {
            return Err(Error::Config("mzm.drive_scale must be >= 0".into()));
        }
        positive("mzm.bandwidth_3db", self.mzm.bandwidth_3db)?;
        for (name, c) in [("dac", &self.dac), ("adc", &self.adc)] {
            positive_finite(&format!("{name}.rate"), c.rate)?;
            positive(&format!("{name}.bandwidth_3db"), c.bandwidth_3db)?;
            if c.bits > 24 {
                return Err(Error::Config(format!("{name}.bits must be <= 24")));
            }
        }
        positive_finite("pd.responsivity", self.pd.responsivity)?;
        positive("pd.bandwidth_3db", self.pd.bandwidth_3db)?;
        if !(self.pd.thermal_noise_psd >= 0.0 && self.pd.thermal_noise_psd.is_finite()) {
            return Err(Error::Config("pd.thermal_noise_psd must be >= 0".into()));
        }
        positive_finite("sim_rate", self.sim_rate)?;
        for (name, rate) in [("dac", self.dac.rate), ("adc", self.adc.rate)] {
            if self.sim_rate < rate {
                return Err(Error::Config(format!(
                    "sim_rate must not be below the {name} rate"
                )));
            }
        }
        Ok(())
    }

    /// Accumulated dispersion phase coefficient `π·λ²·D·L/c` (rad/Hz²).
    pub fn dispersion_phase(&self) -> f64 {
        std::f64::consts::PI * self.wavelength.powi(2) * self.dispersion * self.length
            / SPEED_OF_LIGHT
    }

    /// Optical carrier frequency, Hz.
    pub fn carrier_frequency(&self) -> f64 {
        SPEED_OF_LIGHT / self.wavelength
    }

    /// Field attenuation factor of the fiber span.
    pub fn fiber_field_loss(&self) -> f64 {
        10f64.powf(-self.fiber_loss_db_per_km * self.length / 1e3 / 20.0)
    }

    /// All noise sources and quantizers disabled.
    pub fn noiseless(&self) -> Self {
        let mut c = self.clone();
        c.edfa.noise_figure_db = None;
        c.pd.thermal_noise_psd = 0.0;
        c.dac.bits = 0;
        c.adc.bits = 0;
        c
    }
}

/// dBm → W.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

/// W → dBm.
pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}
