use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linksim::LinkConfig;
use crate::planner::{
    dispersion_nulls, load_with_bpsk_top, plan_bands, BandSpec, LayoutConfig, LoadingRule, Matcher,
    SnrProfile, SubcarrierPlan,
};
use crate::rxchain::ReceiverConfig;

/// Top-level experiment description, read from TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub link: LinkConfig,
    pub plan: PlanConfig,
    pub tx: TxConfig,
    pub rx: ReceiverConfig,
    /// FEC overhead used for the net rate (0.2 for a 20 % SD-FEC).
    pub fec_overhead: f64,
    pub sweep: Option<SweepConfig>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 1,
            link: LinkConfig::default(),
            plan: PlanConfig::default(),
            tx: TxConfig::default(),
            rx: ReceiverConfig::default(),
            fec_overhead: 0.2,
            sweep: None,
        }
    }
}

/// Where the band plan comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlanSource {
    /// `bands` as written.
    #[default]
    Explicit,
    /// Packed between the dispersion nulls and entropy-loaded from `snr_db`.
    Auto,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlanConfig {
    pub source: PlanSource,
    /// Explicit plan.
    pub bands: Vec<BandSpec>,
    pub guard: f64,
    /// Auto plan.
    pub layout: LayoutConfig,
    pub loading: LoadingRule,
    /// Highest-frequency bands forced to BPSK after loading.
    pub bpsk_top: usize,
    /// Per-band SNR for loading, dB. Required for `auto`.
    pub snr_db: Option<Vec<f64>>,
}

impl Default for PlanConfig {
    fn default() -> Self {
        PlanConfig {
            source: PlanSource::Explicit,
            bands: Vec::new(),
            guard: LayoutConfig::default().guard,
            layout: LayoutConfig::default(),
            loading: LoadingRule::default(),
            bpsk_top: 3,
            snr_db: None,
        }
    }
}

impl PlanConfig {
    /// The unloaded layout between the nulls of `link`.
    pub fn layout_plan(&self, link: &LinkConfig) -> Result<SubcarrierPlan> {
        let nulls = dispersion_nulls(link, self.layout.span_hi);
        plan_bands(&nulls, &self.layout)
    }

    /// Resolves the plan to transmit.
    pub fn resolve(&self, link: &LinkConfig) -> Result<SubcarrierPlan> {
        let plan = match self.source {
            PlanSource::Explicit => SubcarrierPlan {
                bands: self.bands.clone(),
                guard: self.guard,
            },
            PlanSource::Auto => {
                let layout = self.layout_plan(link)?;
                let snr = self.snr_db.clone().ok_or_else(|| {
                    Error::Config("auto plans need `plan.snr_db`".into())
                })?;
                let snr = SnrProfile::new(snr).map_err(|e| Error::Config(e.to_string()))?;
                load_with_bpsk_top(&layout, &snr, &self.loading, self.bpsk_top)
                    .map_err(|e| Error::Config(e.to_string()))?
            }
        };
        if plan.bands.is_empty() {
            return Err(Error::Config("the band plan is empty".into()));
        }
        plan.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(plan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TxConfig {
    /// Clipping ratio in dB; `inf` disables clipping.
    pub clipping_db: f64,
    /// Transmit RRC span in symbols.
    pub rrc_span: usize,
    /// Mean symbols per band per frame, preamble included.
    pub symbols_per_band: usize,
    /// Lower bound on the payload of the slowest band.
    pub min_payload: usize,
    pub matcher: Matcher,
}

impl Default for TxConfig {
    fn default() -> Self {
        TxConfig {
            clipping_db: 8.0,
            rrc_span: 64,
            symbols_per_band: 200_000,
            min_payload: 10_000,
            matcher: Matcher::default(),
        }
    }
}

/// Swept parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// `tx.clipping_db`.
    Clipping,
    /// `link.rop_dbm`.
    Rop,
    /// Factor applied to every PCS entropy (capped to the loading limits).
    Rate,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::Clipping => "clipping_db",
            SweepAxis::Rop => "rop_dbm",
            SweepAxis::Rate => "entropy_scale",
        }
    }
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "clipping" => Ok(SweepAxis::Clipping),
            "rop" => Ok(SweepAxis::Rop),
            "rate" => Ok(SweepAxis::Rate),
            _ => Err(Error::Config(format!("unknown sweep axis `{s}` (clipping, rop, rate)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        self.link.validate()?;
        self.rx.validate()?;
        if !(self.fec_overhead >= 0.0) {
            return Err(Error::Config("fec_overhead must be >= 0".into()));
        }
        if !(self.tx.clipping_db > 0.0) {
            return Err(Error::Config(format!(
                "clipping ratio must be positive, got {}",
                self.tx.clipping_db
            )));
        }
        if self.tx.rrc_span == 0 || !self.tx.rrc_span.is_multiple_of(2) {
            return Err(Error::Config("tx.rrc_span must be even and positive".into()));
        }
        if self.tx.symbols_per_band == 0 {
            return Err(Error::Config("tx.symbols_per_band must be positive".into()));
        }
        if let Matcher::Ccdm { block_len } = self.tx.matcher {
            if block_len == 0 {
                return Err(Error::Config("matcher block_len must be positive".into()));
            }
        }
        if let Some(s) = &self.sweep {
            if s.values.len() < 2 {
                return Err(Error::Config("a sweep needs at least two values".into()));
            }
        }
        if self.plan.source == PlanSource::Explicit {
            self.plan.resolve(&self.link)?;
        }
        Ok(())
    }
}
