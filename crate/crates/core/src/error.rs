//! Error type shared by every stage of the simulator.

use std::path::PathBuf;

/// Errors raised by the DSP, shaping, link, receiver and harness layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violates an operation's precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// A metric is undefined for the given input (e.g. PAPR of an all-zero signal).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// A requested target lies outside the attainable range.
    #[error("out of range: {0}")]
    Range(String),

    /// A symbol sequence could not be inverted by the distribution matcher.
    #[error("decode error: {0}")]
    Decode(String),

    /// Frame synchronization did not find the preamble.
    #[error("frame sync failed: correlation peak {peak:.3} below 0.5")]
    SyncFailure { peak: f64 },

    /// The adaptive equalizer did not converge.
    #[error("equalizer diverged: training MSE {mse:.3e} exceeds input power {power:.3e}")]
    EqualizerDiverged { mse: f64, power: f64 },

    /// Measured data is inconsistent with a metric's definition.
    #[error("data error: {0}")]
    Data(String),

    /// Malformed waveform file.
    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    /// Invalid or unreadable experiment configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// An error raised while processing one subcarrier band.
    #[error("band {band}: {source}")]
    Band {
        band: usize,
        #[source]
        source: Box<Error>,
    },

    /// An error raised inside a named pipeline stage.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    /// Wraps `self` with the index of the band that produced it.
    pub fn in_band(self, band: usize) -> Self {
        Error::Band {
            band,
            source: Box::new(self),
        }
    }

    /// Wraps `self` with the pipeline stage that produced it.
    pub fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// True when the root cause is a configuration problem rather than a
    /// runtime/DSP failure.
    pub fn is_config(&self) -> bool {
        match self {
            Error::Config(_) | Error::Parameter(_) | Error::Range(_) => true,
            Error::Band { source, .. } | Error::Stage { source, .. } => source.is_config(),
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
