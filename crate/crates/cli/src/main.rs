use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use nscm::harness::{
    analyze_capture, read_waveform, resolve_plan, run_experiment, sweep, sweep_csv, transmission,
    write_waveform, ExperimentConfig, RunOptions, SweepAxis, Waveform,
};
use nscm::linksim::{analytic_fading, probe_limit, probe_response_native};
use nscm::metrics::MetricsReport;
use nscm::planner::{dispersion_nulls, plan_rate, Modulation, SubcarrierPlan};
use nscm::Error;

#[derive(Parser)]
#[command(name = "nscm", version, about = "Multi-rate Nyquist-SCM IM/DD link simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Experiment configuration (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; results go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Clipping,
    Rop,
    Rate,
}

impl From<Axis> for SweepAxis {
    fn from(a: Axis) -> Self {
        match a {
            Axis::Clipping => SweepAxis::Clipping,
            Axis::Rop => SweepAxis::Rop,
            Axis::Rate => SweepAxis::Rate,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the band plan and the dispersion-null map.
    Plan {
        #[command(flatten)]
        common: Common,
    },
    /// Run one experiment and write its report.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write the DAC input and ADC capture (needs --out).
        #[arg(long)]
        dump_waveforms: bool,
    },
    /// Sweep clipping ratio, ROP or rate.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated axis values; defaults to the config's sweep.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        /// Comma-separated seeds; defaults to the config's sweep or seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
    },
    /// Run the receivers on a captured waveform file.
    Analyze {
        #[command(flatten)]
        common: Common,
        /// ADC capture written by `simulate --dump-waveforms`.
        #[arg(long)]
        input: PathBuf,
    },
    /// Probed and analytic channel response.
    Response {
        #[command(flatten)]
        common: Common,
        /// Highest frequency, Hz.
        #[arg(long, default_value_t = 36e9)]
        f_max: f64,
        /// Output grid step, Hz.
        #[arg(long, default_value_t = 10e6)]
        step: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}

fn load(common: &Common) -> Result<(ExperimentConfig, u64), Error> {
    let cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let seed = common.seed.unwrap_or(cfg.seed);
    Ok((cfg, seed))
}

fn emit(common: &Common, name: &str, text: &str) -> Result<(), Error> {
    match &common.out {
        Some(dir) => {
            let io = |e| Error::Io {
                path: dir.clone(),
                source: e,
            };
            fs::create_dir_all(dir).map_err(io)?;
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| Error::Io { path, source: e })
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ext(format: Format) -> &'static str {
    match format {
        Format::Csv => "csv",
        Format::Json => "json",
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, Error> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::Data(e.to_string()))
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Plan { common } => plan(&common),
        Command::Simulate {
            common,
            dump_waveforms,
        } => simulate(&common, dump_waveforms),
        Command::Sweep {
            common,
            axis,
            values,
            seeds,
        } => run_sweep(&common, axis.into(), values, seeds),
        Command::Analyze { common, input } => analyze(&common, &input),
        Command::Response { common, f_max, step } => response(&common, f_max, step),
    }
}

#[derive(Serialize)]
struct PlanOutput<'a> {
    nulls_hz: &'a [f64],
    plan: &'a SubcarrierPlan,
    gross_rate: f64,
    matched_rate: f64,
    net_rate: f64,
}

fn plan(common: &Common) -> Result<(), Error> {
    let (cfg, seed) = load(common)?;
    let plan = resolve_plan(&cfg, seed)?;
    let f_max = plan
        .occupied_span()
        .map_or(cfg.plan.layout.span_hi, |(_, hi)| hi.max(cfg.plan.layout.span_hi));
    let nulls = dispersion_nulls(&cfg.link, f_max);
    let rate = plan_rate(&plan, cfg.fec_overhead, cfg.tx.matcher)?;
    let text = match common.format {
        Format::Json => json(&PlanOutput {
            nulls_hz: &nulls,
            plan: &plan,
            gross_rate: rate.gross,
            matched_rate: rate.matched,
            net_rate: rate.net,
        })?,
        Format::Csv => {
            let mut s = String::from("kind,index,center_hz,baud,modulation,entropy,excluded,net_rate\n");
            for (i, f) in nulls.iter().enumerate() {
                s.push_str(&format!("null,{i},{f},,,,,\n"));
            }
            for (i, (b, r)) in plan.bands.iter().zip(&rate.per_band).enumerate() {
                let kind = match b.modulation {
                    Modulation::Pcs64qam { .. } => "pcs64qam",
                    Modulation::Bpsk => "bpsk",
                };
                s.push_str(&format!(
                    "band,{i},{},{},{kind},{},{},{}\n",
                    b.center,
                    b.baud,
                    b.modulation.entropy(),
                    b.excluded,
                    r.net
                ));
            }
            s
        }
    };
    emit(common, &format!("plan.{}", ext(common.format)), &text)
}

fn report_text(report: &MetricsReport, format: Format) -> Result<String, Error> {
    Ok(match format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json()? + "\n",
    })
}

fn simulate(common: &Common, dump: bool) -> Result<(), Error> {
    let (cfg, seed) = load(common)?;
    if dump && common.out.is_none() {
        return Err(Error::Config("--dump-waveforms needs --out".into()));
    }
    let opts = RunOptions {
        keep_waveforms: dump,
        noiseless: false,
    };
    let (report, artifacts) = run_experiment(&cfg, seed, opts)?;
    emit(common, &format!("report.{}", ext(common.format)), &report_text(&report, common.format)?)?;
    if let Some(dir) = &common.out {
        let pdfs: Vec<_> = artifacts.symbol_pdfs.iter().collect();
        emit(common, "symbol_pdf.json", &json(&pdfs)?)?;
        if let (Some(drive), Some(capture)) = (artifacts.drive, artifacts.capture) {
            write_waveform(&dir.join("drive.nscm"), &Waveform::Real(drive))?;
            write_waveform(&dir.join("capture.nscm"), &Waveform::Real(capture))?;
        }
        let a = &report.aggregate;
        eprintln!(
            "BER {:.3e}  NGMI {:.4}  net {:.2} Gb/s  PAPR {:.2} dB",
            a.ber,
            a.ngmi,
            a.net_rate / 1e9,
            artifacts.papr_db
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepRow<'a> {
    axis: &'static str,
    value: f64,
    seed: u64,
    planned_net_rate: f64,
    report: Option<&'a MetricsReport>,
    error: Option<&'a str>,
}

fn run_sweep(common: &Common, axis: SweepAxis, values: Vec<f64>, seeds: Vec<u64>) -> Result<(), Error> {
    let (cfg, seed) = load(common)?;
    let from_cfg = cfg.sweep.as_ref().filter(|s| s.axis == axis);
    let values = if values.is_empty() {
        from_cfg.map(|s| s.values.clone()).unwrap_or_default()
    } else {
        values
    };
    let seeds = if !seeds.is_empty() {
        seeds
    } else if let Some(s) = from_cfg.filter(|s| !s.seeds.is_empty()) {
        s.seeds.clone()
    } else {
        vec![seed]
    };
    let cells = sweep(&cfg, axis, &values, &seeds)?;
    let text = match common.format {
        Format::Csv => sweep_csv(&cells),
        Format::Json => {
            let rows: Vec<SweepRow> = cells
                .iter()
                .map(|c| SweepRow {
                    axis: axis.name(),
                    value: c.value,
                    seed: c.seed,
                    planned_net_rate: c.net_rate,
                    report: c.outcome.as_ref().ok(),
                    error: c.outcome.as_ref().err().map(String::as_str),
                })
                .collect();
            json(&rows)?
        }
    };
    emit(common, &format!("sweep_{}.{}", axis.name(), ext(common.format)), &text)?;
    let failed = cells.iter().filter(|c| c.outcome.is_err()).count();
    if failed > 0 {
        eprintln!("{failed} of {} sweep cells failed", cells.len());
    }
    Ok(())
}

fn analyze(common: &Common, input: &Path) -> Result<(), Error> {
    let (cfg, seed) = load(common)?;
    let capture = match read_waveform(input)? {
        Waveform::Real(w) => w,
        Waveform::Complex(_) => {
            return Err(Error::Data(format!("{} holds a complex waveform; expected a real ADC capture", input.display())))
        }
    };
    let tx = transmission(&cfg, seed)?;
    let (report, _) = analyze_capture(&capture, &tx, &cfg, seed)?;
    emit(common, &format!("report.{}", ext(common.format)), &report_text(&report, common.format)?)
}

#[derive(Serialize)]
struct ResponseOutput {
    freqs_hz: Vec<f64>,
    probed_db: Vec<f64>,
    analytic_fading_db: Vec<f64>,
}

fn response(common: &Common, f_max: f64, step: f64) -> Result<(), Error> {
    let (cfg, _) = load(common)?;
    if !(step > 0.0 && f_max > step) {
        return Err(Error::Config("--step must be positive and below --f-max".into()));
    }
    let f_max = f_max.min(probe_limit(&cfg.link));
    let probe = probe_response_native(&cfg.link, f_max)?;
    let lo = probe.freqs[0];
    let hi = *probe.freqs.last().expect("probe has tones");
    let n = ((hi - lo) / step).floor() as usize + 1;
    let freqs: Vec<f64> = (0..n).map(|i| lo + i as f64 * step).collect();
    let probed = probe.interpolate(&freqs)?;
    let analytic: Vec<f64> = freqs
        .iter()
        .map(|&f| 20.0 * analytic_fading(f, &cfg.link).max(1e-6).log10())
        .collect();
    let text = match common.format {
        Format::Json => json(&ResponseOutput {
            freqs_hz: freqs,
            probed_db: probed,
            analytic_fading_db: analytic,
        })?,
        Format::Csv => {
            let mut s = String::from("freq_hz,probed_db,analytic_fading_db\n");
            for ((f, p), a) in freqs.iter().zip(&probed).zip(&analytic) {
                s.push_str(&format!("{f},{p},{a}\n"));
            }
            s
        }
    };
    emit(common, &format!("response.{}", ext(common.format)), &text)
}
