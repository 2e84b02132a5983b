use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, PlanSource};
use super::run::{measure_snr, run_experiment, RunOptions};
use crate::error::{Error, Result};

/// One loaded-and-run candidate gap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapPoint {
    pub gap_db: f64,
    pub net_rate: f64,
    pub ngmi: f64,
    pub ber: f64,
    /// Run failure, if any; such points never qualify.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapCalibration {
    /// Smallest candidate whose aggregate NGMI reaches the target.
    pub gap_db: f64,
    /// Per-band SNR the plans were loaded from.
    pub snr_db: Vec<f64>,
    pub points: Vec<GapPoint>,
}

/// Loads the auto plan of `cfg` at every gap in `gaps_db`, runs it with
/// `seed` and picks the smallest gap (highest rate) whose aggregate NGMI
/// is at least `ngmi_target`.
pub fn calibrate_gap(cfg: &ExperimentConfig, seed: u64, gaps_db: &[f64], ngmi_target: f64) -> Result<GapCalibration> {
    if gaps_db.is_empty() {
        return Err(Error::Config("gap calibration needs at least one candidate".into()));
    }
    let snr_db = match &cfg.plan.snr_db {
        Some(s) => s.clone(),
        None => measure_snr(cfg, seed)?,
    };
    let points: Vec<GapPoint> = gaps_db
        .par_iter()
        .map(|&g| {
            let mut c = cfg.clone();
            c.plan.source = PlanSource::Auto;
            c.plan.snr_db = Some(snr_db.clone());
            c.plan.loading.gap_db = g;
            c.sweep = None;
            match run_experiment(&c, seed, RunOptions::default()) {
                Ok((r, _)) => GapPoint {
                    gap_db: g,
                    net_rate: r.aggregate.net_rate,
                    ngmi: r.aggregate.ngmi,
                    ber: r.aggregate.ber,
                    error: None,
                },
                Err(e) => GapPoint {
                    gap_db: g,
                    net_rate: 0.0,
                    ngmi: 0.0,
                    ber: 1.0,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let gap_db = points
        .iter()
        .filter(|p| p.error.is_none() && p.ngmi >= ngmi_target)
        .map(|p| p.gap_db)
        .fold(None, |best: Option<f64>, g| Some(best.map_or(g, |b| b.min(g))))
        .ok_or_else(|| Error::Range(format!("no candidate gap reaches NGMI {ngmi_target}")))?;
    Ok(GapCalibration { gap_db, snr_db, points })
}
