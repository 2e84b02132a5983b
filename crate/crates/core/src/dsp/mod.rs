//! Sampled-signal primitives: pulse shaping, filtering, resampling,
//! frequency conversion, clipping and spectral analysis.

mod filter;
mod ops;
mod resample;
mod spectrum;
mod waveform;

pub use filter::{
    design_lowpass, design_rrc, fir_filter, fir_filter_cyclic, fir_filter_cyclic_real,
    kaiser_beta, kaiser_lowpass, kaiser_window, Filtered, Rolloff, RrcSpec,
};
pub use ops::{accumulate, clip, clip_level, frequency_shift, papr_db, superpose, Direction};
pub use resample::{rate_ratio, resample_rational, Resampler};
pub use spectrum::{spectrum, spectrum_real, Psd};
pub use waveform::{ComplexWaveform, RealWaveform, Sample};

