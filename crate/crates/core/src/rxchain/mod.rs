//! Per-band receiver: frame sync, fractionally spaced FFE, two-tap post
//! filter and memory-1 MLSE.

mod band;
mod ffe;
mod mlse;
mod postfilter;
mod sync;

pub use band::{
    band_baseband, band_receive, receive_baseband, BandReceived, PostFilterMode, ReceiverConfig,
    BAND_RESAMPLER_PASS, BAND_RESAMPLER_STOP,
};
pub use ffe::{ffe_equalize, EqualizerConfig, FfeOutput};
pub use mlse::{mlse_viterbi, MlseOutput, TrellisSpec};
pub use postfilter::{
    apply_post_filter, estimate_postfilter_alpha, sweep_postfilter_alpha, PostFilter, MAX_ALPHA,
    MIN_ALPHA_SAMPLES,
};
pub use sync::{frame_sync, SyncResult, SYNC_THRESHOLD};
