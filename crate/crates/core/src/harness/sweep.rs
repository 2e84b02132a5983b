use rayon::prelude::*;

use super::config::{ExperimentConfig, PlanSource, SweepAxis};
use super::run::{resolve_plan, run_experiment, RunOptions};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::planner::{plan_rate, Modulation};

/// One (value, seed) point of a sweep.
#[derive(Debug, Clone)]
pub struct SweepCell {
    pub axis: SweepAxis,
    pub value: f64,
    pub seed: u64,
    /// Planned net rate of the cell, bit/s.
    pub net_rate: f64,
    pub outcome: std::result::Result<MetricsReport, String>,
}

/// Worker count: `NSCM_WORKERS` if set, else the available parallelism.
pub fn workers() -> usize {
    std::env::var("NSCM_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Config of one cell. The plan is resolved once up front so every cell
/// of a rate sweep scales the same loaded entropies.
fn cell_config(base: &ExperimentConfig, axis: SweepAxis, value: f64) -> Result<ExperimentConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::Clipping => cfg.tx.clipping_db = value,
        SweepAxis::Rop => cfg.link.rop_dbm = value,
        SweepAxis::Rate => {
            if !(value > 0.0) {
                return Err(Error::Config(format!("entropy scale must be positive, got {value}")));
            }
            let lo = cfg.plan.loading.min_pcs_entropy;
            for b in &mut cfg.plan.bands {
                if let Modulation::Pcs64qam { entropy } = b.modulation {
                    let h = (entropy * value).clamp(lo, 6.0);
                    b.modulation = Modulation::Pcs64qam {
                        entropy: (h * 1000.0).round() / 1000.0,
                    };
                }
            }
        }
    }
    cfg.sweep = None;
    Ok(cfg)
}

/// Runs every `(value, seed)` cell, in parallel over [`workers`] threads.
/// Failed cells keep their error and do not stop the sweep. Cells come
/// back ordered by value, then seed.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64], seeds: &[u64]) -> Result<Vec<SweepCell>> {
    if values.len() < 2 {
        return Err(Error::Config("a sweep needs at least two values".into()));
    }
    let seeds: Vec<u64> = if seeds.is_empty() { vec![cfg.seed] } else { seeds.to_vec() };
    let mut base = cfg.clone();
    base.plan.bands = resolve_plan(cfg, seeds[0])?.bands;
    base.plan.source = PlanSource::Explicit;
    let cells: Vec<(f64, u64)> = values
        .iter()
        .flat_map(|&v| seeds.iter().map(move |&s| (v, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers())
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let out = pool.install(|| {
        cells
            .par_iter()
            .map(|&(value, seed)| -> Result<SweepCell> {
                let cell = cell_config(&base, axis, value)?;
                let plan = cell.plan.resolve(&cell.link)?;
                let net_rate = plan_rate(&plan, cell.fec_overhead, cell.tx.matcher)?.net;
                let outcome = run_experiment(&cell, seed, RunOptions::default())
                    .map(|(r, _)| r)
                    .map_err(|e| e.to_string());
                Ok(SweepCell {
                    axis,
                    value,
                    seed,
                    net_rate,
                    outcome,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(out)
}

/// Long-format table: one row per band per cell; failed cells get a
/// single row with the error text.
pub fn sweep_csv(cells: &[SweepCell]) -> String {
    let mut out = format!(
        "axis,value,planned_net_rate,{},aggregate_ber,aggregate_ngmi,error\n",
        MetricsReport::CSV_COLUMNS.join(",")
    );
    for c in cells {
        let head = format!("{},{},{}", c.axis.name(), c.value, c.net_rate);
        match &c.outcome {
            Ok(r) => {
                for row in r.csv_rows() {
                    out.push_str(&format!(
                        "{head},{row},{},{},\n",
                        r.aggregate.ber, r.aggregate.ngmi
                    ));
                }
            }
            Err(e) => {
                let blanks = ",".repeat(MetricsReport::CSV_COLUMNS.len() - 1);
                let msg = e.replace(['"', '\n'], " ");
                out.push_str(&format!("{head},{}{blanks},,,\"{msg}\"\n", c.seed));
            }
        }
    }
    out
}
