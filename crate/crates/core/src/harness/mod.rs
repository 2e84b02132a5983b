//! Experiment runner: configuration, transmitter, end-to-end runs, sweeps
//! and file formats.

mod calibrate;
mod config;
mod io;
mod run;
mod sweep;
mod tx;

pub use calibrate::{calibrate_gap, GapCalibration, GapPoint};
pub use config::{ExperimentConfig, PlanConfig, PlanSource, SweepAxis, SweepConfig, TxConfig};
pub use io::{
    decode_waveform, encode_waveform, read_waveform, write_waveform, Waveform, WAVEFORM_MAGIC,
    WAVEFORM_VERSION,
};
pub use run::{
    analyze_capture, data_aided_snr_db, measure_snr, resolve_plan, run_experiment, transmission,
    RunArtifacts, RunOptions, Transmission,
};
pub use sweep::{sweep, sweep_csv, workers, SweepCell};
pub use tx::{
    band_frame, band_rng, band_waveform, compose_drive, frame_layout, noise_rng, plan_frames,
    BandFrame, Drive, FrameLayout,
};
