use rand::Rng;

use super::{
    adc_model, dac_model, dbm_to_watts, edfa_and_voa, fiber_propagate, mzm_modulate, photodetect,
    set_power, LinkConfig,
};
use crate::dsp::{rate_ratio, RealWaveform, Resampler};
use crate::error::{Error, Result};

/// Runs one frame through DAC → driver → MZM → fiber → EDFA/VOA → PD → ADC.
///
/// `dac_in` is at the DAC rate and normalized so that full scale is ±1; the
/// driver maps full scale to `±mzm.drive_scale` volts. The frame is treated
/// as periodic throughout. Noise sources draw from `rng` only when given
/// (ASE first, then thermal noise); without it the chain is deterministic.
pub fn run_link<R: Rng + ?Sized>(
    dac_in: &RealWaveform,
    cfg: &LinkConfig,
    mut rng: Option<&mut R>,
) -> Result<RealWaveform> {
    cfg.validate()?;
    let peak = dac_in.samples().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak > 1.0 + 1e-9 {
        return Err(Error::param(format!(
            "DAC input exceeds full scale (peak {peak})"
        ))
        .in_stage("dac"));
    }
    let analog = dac_model(dac_in, &cfg.dac).map_err(|e| e.in_stage("dac"))?;
    let (up, down) = rate_ratio(cfg.dac.rate, cfg.sim_rate).map_err(|e| e.in_stage("dac"))?;
    let analog = if up == down {
        analog
    } else {
        Resampler::new(up, down)
            .and_then(|r| r.process_cyclic_real(&analog))
            .map_err(|e| e.in_stage("dac"))?
    };
    let drive = RealWaveform::from_parts(
        analog.samples().iter().map(|v| v * cfg.mzm.drive_scale).collect(),
        analog.sample_rate(),
    );
    drop(analog);
    let field = mzm_modulate(&drive, &cfg.mzm, 1.0).map_err(|e| e.in_stage("mzm"))?;
    drop(drive);
    let field = set_power(&field, dbm_to_watts(cfg.launch_power_dbm));
    let field = fiber_propagate(&field, cfg);
    let field = edfa_and_voa(&field, cfg, rng.as_deref_mut());
    let current = photodetect(&field, &cfg.pd, rng).map_err(|e| e.in_stage("pd"))?;
    drop(field);
    adc_model(&current, &cfg.adc).map_err(|e| e.in_stage("adc"))
}
