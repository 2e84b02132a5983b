//! Behavioral models of the analog and optical chain: converters, driver and
//! modulator, dispersive fiber, amplifier/attenuator and photodetector.

mod chain;
mod config;
mod converters;
mod optics;
mod probe;

pub use chain::run_link;
pub use config::{
    dbm_to_watts, watts_to_dbm, ConverterConfig, EdfaConfig, LinkConfig, MzmConfig, PdConfig,
    PLANCK, SPEED_OF_LIGHT,
};
pub use converters::{adc_model, dac_model, quantize};
pub use optics::{
    analytic_fading, analytic_osnr_db, ase_psd, edfa_and_voa, fiber_propagate, mzm_modulate,
    photodetect, set_power, OSNR_REFERENCE_BW,
};
pub use probe::{probe_limit, probe_response, probe_response_native, ProbeResponse, PROBE_SPACING};
