use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, PlanSource};
use super::tx::{compose_drive, frame_layout, noise_rng, plan_frames, BandFrame, FrameLayout};
use crate::dsp::RealWaveform;
use crate::error::{Error, Result};
use crate::linksim::run_link;
use crate::metrics::{bit_errors, gmi_estimate, ngmi, symbol_pdf, BandMetrics, MetricsReport};
use crate::planner::{plan_rate, BandSpec, Matcher, Modulation, SubcarrierPlan};
use crate::rxchain::{band_receive, BandReceived};

/// Transmit side of one run.
#[derive(Debug, Clone)]
pub struct Transmission {
    pub plan: SubcarrierPlan,
    pub layout: FrameLayout,
    pub frames: Vec<Option<BandFrame>>,
}

/// Everything besides the report that a run produces.
#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub plan: SubcarrierPlan,
    pub layout: FrameLayout,
    /// Unclipped drive PAPR, dB.
    pub papr_db: f64,
    pub clipped_papr_db: f64,
    /// Empirical point probabilities of the MLSE decisions, per band.
    pub symbol_pdfs: Vec<Option<Vec<f64>>>,
    pub drive: Option<RealWaveform>,
    pub capture: Option<RealWaveform>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep the DAC input and ADC capture in the artifacts.
    pub keep_waveforms: bool,
    /// Run the link without noise sources.
    pub noiseless: bool,
}

/// Per-band SNR (dB) measured with uniform 64-QAM on every band of the
/// unloaded layout; input to entropy loading for `auto` plans.
pub fn measure_snr(cfg: &ExperimentConfig, seed: u64) -> Result<Vec<f64>> {
    let layout = cfg.plan.layout_plan(&cfg.link)?;
    let mut probe = cfg.clone();
    probe.plan.source = PlanSource::Explicit;
    probe.plan.guard = layout.guard;
    probe.plan.bands = layout
        .bands
        .into_iter()
        .map(|b| BandSpec {
            modulation: Modulation::Pcs64qam { entropy: 6.0 },
            ..b
        })
        .collect();
    probe.tx.matcher = Matcher::Ideal;
    let (report, _) = run_experiment(&probe, seed, RunOptions::default())?;
    Ok(report.bands.iter().map(|b| b.snr_db).collect())
}

/// The plan to transmit; `auto` plans without an SNR profile are loaded
/// from [`measure_snr`].
pub fn resolve_plan(cfg: &ExperimentConfig, seed: u64) -> Result<SubcarrierPlan> {
    if cfg.plan.source == PlanSource::Auto && cfg.plan.snr_db.is_none() {
        let mut with_snr = cfg.clone();
        with_snr.plan.snr_db = Some(measure_snr(cfg, seed)?);
        return with_snr.plan.resolve(&cfg.link);
    }
    cfg.plan.resolve(&cfg.link)
}

/// Regenerates the transmitted frames for `(cfg, seed)`.
pub fn transmission(cfg: &ExperimentConfig, seed: u64) -> Result<Transmission> {
    let plan = resolve_plan(cfg, seed)?;
    let layout = frame_layout(&plan, &cfg.link, &cfg.tx, cfg.rx.equalizer.training_symbols)?;
    let frames = plan_frames(&plan, &layout, seed, cfg.tx.matcher)?;
    Ok(Transmission { plan, layout, frames })
}

/// Full chain for one seed: frames → drive → link → per-band receiver →
/// metrics.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64, opts: RunOptions) -> Result<(MetricsReport, RunArtifacts)> {
    cfg.validate()?;
    let tx = transmission(cfg, seed)?;
    let drive = compose_drive(&tx.plan, &tx.frames, &tx.layout, cfg.link.dac.rate, &cfg.tx)
        .map_err(|e| e.in_stage("tx"))?;
    let capture = if opts.noiseless {
        run_link::<rand_chacha::ChaCha8Rng>(&drive.waveform, &cfg.link.noiseless(), None)?
    } else {
        let mut rng = noise_rng(seed);
        run_link(&drive.waveform, &cfg.link, Some(&mut rng))?
    };
    let (report, symbol_pdfs) = analyze_capture(&capture, &tx, cfg, seed)?;
    let artifacts = RunArtifacts {
        plan: tx.plan,
        layout: tx.layout,
        papr_db: drive.papr_db,
        clipped_papr_db: drive.clipped_papr_db,
        symbol_pdfs,
        drive: opts.keep_waveforms.then_some(drive.waveform),
        capture: opts.keep_waveforms.then_some(capture),
    };
    Ok((report, artifacts))
}

type PdfList = Vec<Option<Vec<f64>>>;

/// Receives every band of `capture` and scores it against `tx`.
pub fn analyze_capture(
    capture: &RealWaveform,
    tx: &Transmission,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(MetricsReport, PdfList)> {
    let expected = (cfg.link.adc.rate * tx.layout.duration()).round() as usize;
    if capture.len() != expected || capture.sample_rate() != cfg.link.adc.rate {
        return Err(Error::param(format!(
            "capture of {} samples at {} Sa/s does not match a {expected}-sample frame at {} Sa/s",
            capture.len(),
            capture.sample_rate(),
            cfg.link.adc.rate
        )));
    }
    let rates = plan_rate(&tx.plan, cfg.fec_overhead, cfg.tx.matcher)?;
    let results: Vec<Option<(BandMetrics, Vec<f64>)>> = tx
        .plan
        .bands
        .par_iter()
        .enumerate()
        .map(|(i, band)| -> Result<_> {
            let Some(frame) = &tx.frames[i] else {
                return Ok(None);
            };
            let rx = band_receive(capture, band, &frame.preamble, &cfg.rx).map_err(|e| e.in_band(i))?;
            let mut m = score_band(i, band, frame, &rx).map_err(|e| e.in_band(i))?;
            let r = rates.per_band[i];
            m.gross_rate = r.gross;
            m.matched_rate = r.matched;
            m.net_rate = r.net;
            let pdf = symbol_pdf(&rx.decisions, &frame.constellation);
            Ok(Some((m, pdf)))
        })
        .collect::<Result<_>>()?;
    let mut bands = Vec::new();
    let mut pdfs = Vec::new();
    for r in results {
        match r {
            Some((m, p)) => {
                bands.push(m);
                pdfs.push(Some(p));
            }
            None => pdfs.push(None),
        }
    }
    let report = MetricsReport::new(seed, bands, cfg.link.length / 1e3)?;
    Ok((report, pdfs))
}

/// `|g|²·E|x|² / E|y − g·x|²` in dB with the least-squares gain `g`.
pub fn data_aided_snr_db(tx: &[Complex64], y: &[Complex64]) -> f64 {
    let ex: f64 = tx.iter().map(|v| v.norm_sqr()).sum();
    let g = y.iter().zip(tx).map(|(a, b)| a * b.conj()).sum::<Complex64>() / ex;
    let noise: f64 = y.iter().zip(tx).map(|(a, b)| (a - g * b).norm_sqr()).sum();
    10.0 * (g.norm_sqr() * ex / noise.max(1e-300)).log10()
}

fn score_band(index: usize, band: &BandSpec, frame: &BandFrame, rx: &BandReceived) -> Result<BandMetrics> {
    let c = &frame.constellation;
    let tx_bits = frame.label_bits();
    let rx_bits = rx.bits();
    let errors = bit_errors(&tx_bits, &rx_bits)?;
    let gmi = gmi_estimate(&frame.payload, &rx.cancelled, c)?;
    let entropy = c.entropy();
    let m = c.bits_per_symbol();
    let tx_points = c.map(&frame.payload)?;
    let snr_db = data_aided_snr_db(&tx_points, &rx.equalized);
    let mut failures = 0;
    if let Some(ccdm) = frame.ccdm()? {
        let n = frame.block_len;
        let k = ccdm.num_bits();
        for b in 0..frame.blocks {
            match ccdm.decode(&rx.decisions[b * n..(b + 1) * n]) {
                Ok(bits) if bits == frame.data_bits[b * k..(b + 1) * k] => {}
                _ => failures += 1,
            }
        }
    }
    Ok(BandMetrics {
        band: index,
        center_hz: band.center,
        baud: band.baud,
        modulation: match band.modulation {
            Modulation::Pcs64qam { .. } => "pcs64qam".into(),
            Modulation::Bpsk => "bpsk".into(),
        },
        entropy,
        bits_per_symbol: m,
        bit_errors: errors,
        bits: tx_bits.len(),
        ber: errors as f64 / tx_bits.len() as f64,
        gmi: gmi.gmi,
        gmi_std_err: gmi.std_err,
        ngmi: ngmi(gmi.gmi.min(entropy), entropy, m)?,
        snr_db,
        alpha: rx.alpha,
        gross_rate: 0.0,
        matched_rate: 0.0,
        net_rate: 0.0,
        decode_failures: failures,
        blocks: frame.blocks,
    })
}
