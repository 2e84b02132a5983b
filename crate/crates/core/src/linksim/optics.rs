//! Modulator, fiber, amplifier and photodetector models.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use super::{dbm_to_watts, LinkConfig, MzmConfig, PdConfig, PLANCK};
use crate::dsp::{design_lowpass, fir_filter_cyclic_real, ComplexWaveform, RealWaveform};
use crate::error::Result;

/// Reference bandwidth for OSNR, Hz.
pub const OSNR_REFERENCE_BW: f64 = 12.5e9;

/// Chirp-free push-pull MZM: `E = √P0 · cos(π(v + V_bias) / (2Vπ))`, where
/// `v` is the drive voltage after the modulator's electrical bandwidth
/// limit and `P0` is the optical power at full transmission.
pub fn mzm_modulate(v: &RealWaveform, mzm: &MzmConfig, p0: f64) -> Result<ComplexWaveform> {
    let taps = design_lowpass(mzm.rolloff, mzm.bandwidth_3db, v.sample_rate())?;
    let drive = fir_filter_cyclic_real(v, &taps)?.output;
    let amp = p0.sqrt();
    let k = PI / (2.0 * mzm.vpi);
    let e = drive
        .samples()
        .iter()
        .map(|&u| Complex64::new(amp * (k * (u + mzm.bias)).cos(), 0.0))
        .collect();
    Ok(ComplexWaveform::from_parts(e, v.sample_rate()))
}

/// Scales a field to mean power `watts`.
pub fn set_power(e: &ComplexWaveform, watts: f64) -> ComplexWaveform {
    let p = e.mean_power();
    if p == 0.0 {
        return e.clone();
    }
    let g = (watts / p).sqrt();
    ComplexWaveform::from_parts(e.samples().iter().map(|v| v * g).collect(), e.sample_rate())
}

/// Chromatic dispersion as the all-pass `H(f) = exp(+j·π·λ²·D·L·f²/c)`
/// applied over the whole (periodic) frame, followed by the scalar span
/// loss. With this sign, `β2 = −Dλ²/(2πc)` and higher frequencies arrive
/// earlier for `D > 0`.
pub fn fiber_propagate(e: &ComplexWaveform, cfg: &LinkConfig) -> ComplexWaveform {
    let loss = cfg.fiber_field_loss();
    let n = e.len();
    if n == 0 {
        return e.clone();
    }
    if cfg.length == 0.0 || cfg.dispersion == 0.0 {
        return ComplexWaveform::from_parts(
            e.samples().iter().map(|v| v * loss).collect(),
            e.sample_rate(),
        );
    }
    let fs = e.sample_rate();
    let beta = cfg.dispersion_phase();
    let mut buf = e.samples().to_vec();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    let scale = loss / n as f64;
    for (k, v) in buf.iter_mut().enumerate() {
        let f = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 } * fs / n as f64;
        *v *= Complex64::from_polar(scale, beta * f * f);
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    ComplexWaveform::from_parts(buf, fs)
}

/// Single-polarization ASE density of the EDFA, W/Hz, or `None` when ASE
/// is disabled. Uses `n_sp = (F·G − 1) / (2(G − 1))`.
pub fn ase_psd(cfg: &LinkConfig) -> Option<f64> {
    let nf = cfg.edfa.noise_figure_db?;
    let g = 10f64.powf(cfg.edfa.gain_db / 10.0);
    let f = 10f64.powf(nf / 10.0);
    let nsp = (f * g - 1.0) / (2.0 * (g - 1.0));
    Some(nsp * PLANCK * cfg.carrier_frequency() * (g - 1.0))
}

/// Analytic OSNR (dB, both polarizations in 12.5 GHz) at the EDFA output
/// for an input signal power `p_in` watts.
pub fn analytic_osnr_db(cfg: &LinkConfig, p_in: f64) -> Option<f64> {
    let n = ase_psd(cfg)?;
    let g = 10f64.powf(cfg.edfa.gain_db / 10.0);
    Some(10.0 * (p_in * g / (2.0 * n * OSNR_REFERENCE_BW)).log10())
}

/// EDFA gain with optional ASE, then the VOA scales the total field to the
/// configured ROP. ASE is drawn from `rng` only when a noise figure is set.
pub fn edfa_and_voa<R: Rng + ?Sized>(
    e: &ComplexWaveform,
    cfg: &LinkConfig,
    rng: Option<&mut R>,
) -> ComplexWaveform {
    let rop = dbm_to_watts(cfg.rop_dbm);
    match (ase_psd(cfg), rng) {
        (Some(n), Some(rng)) => {
            let g = 10f64.powf(cfg.edfa.gain_db / 10.0).sqrt();
            let sigma = (n * e.sample_rate() / 2.0).sqrt();
            let amplified: Vec<Complex64> = e
                .samples()
                .iter()
                .map(|v| {
                    let w = Complex64::new(
                        StandardNormal.sample(&mut *rng),
                        StandardNormal.sample(&mut *rng),
                    );
                    v * g + w * sigma
                })
                .collect();
            set_power(&ComplexWaveform::from_parts(amplified, e.sample_rate()), rop)
        }
        _ => set_power(e, rop),
    }
}

/// Square-law detection `i = R·|E|²` plus thermal noise of one-sided
/// density `pd.thermal_noise_psd` (variance `psd · fs / 2`), then the
/// receiver low-pass. Noise is drawn only when `rng` is given.
pub fn photodetect<R: Rng + ?Sized>(
    e: &ComplexWaveform,
    pd: &PdConfig,
    rng: Option<&mut R>,
) -> Result<RealWaveform> {
    let fs = e.sample_rate();
    let mut i: Vec<f64> = e.samples().iter().map(|v| pd.responsivity * v.norm_sqr()).collect();
    if let Some(rng) = rng {
        if pd.thermal_noise_psd > 0.0 {
            let sigma = (pd.thermal_noise_psd * fs / 2.0).sqrt();
            for v in i.iter_mut() {
                let w: f64 = StandardNormal.sample(&mut *rng);
                *v += sigma * w;
            }
        }
    }
    let taps = design_lowpass(pd.rolloff, pd.bandwidth_3db, fs)?;
    Ok(fir_filter_cyclic_real(&RealWaveform::from_parts(i, fs), &taps)?.output)
}

/// Small-signal DSB IM/DD power-fading envelope `|cos(π·λ²·D·L·f²/c)|`.
pub fn analytic_fading(f: f64, cfg: &LinkConfig) -> f64 {
    (cfg.dispersion_phase() * f * f).cos().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linksim::SPEED_OF_LIGHT;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn no_rng() -> Option<&'static mut ChaCha8Rng> {
        None
    }

    #[test]
    fn mzm_closed_forms() {
        let mzm = MzmConfig {
            bandwidth_3db: f64::INFINITY,
            ..MzmConfig::default()
        };
        let v = RealWaveform::new(vec![0.0; 16], 180e9).unwrap();
        let e = mzm_modulate(&v, &mzm, 2.0).unwrap();
        let expect = 2.0 * (PI * mzm.bias / (2.0 * mzm.vpi)).cos().powi(2);
        assert!((e.mean_power() - expect).abs() < 1e-12);
        let null = MzmConfig {
            bias: mzm.vpi,
            ..mzm.clone()
        };
        assert!(mzm_modulate(&v, &null, 1.0).unwrap().mean_power() < 1e-30);
    }

    #[test]
    fn mzm_small_signal_thd() {
        let mzm = MzmConfig {
            bandwidth_3db: f64::INFINITY,
            ..MzmConfig::default()
        };
        let n = 1800;
        let fs = 180e9;
        let f = 1e9;
        let v: Vec<f64> = (0..n).map(|k| 0.1 * (2.0 * PI * f * k as f64 / fs).sin()).collect();
        let e = mzm_modulate(&RealWaveform::new(v, fs).unwrap(), &mzm, 1.0).unwrap();
        let p: Vec<f64> = e.samples().iter().map(|x| x.norm_sqr()).collect();
        let harmonic = |h: f64| {
            let c: Complex64 = p
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -2.0 * PI * h * f * k as f64 / fs))
                .sum();
            c.norm_sqr()
        };
        let fund = harmonic(1.0);
        let dist: f64 = (2..6).map(|h| harmonic(h as f64)).sum();
        assert!(10.0 * (dist / fund).log10() < -30.0);
    }

    #[test]
    fn fiber_all_pass_and_energy() {
        let cfg = LinkConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x: Vec<Complex64> = (0..4096)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect();
        let e = ComplexWaveform::new(x, 180e9).unwrap();
        let y = fiber_propagate(&e, &cfg);
        let l2 = cfg.fiber_field_loss().powi(2);
        assert!((y.mean_power() / (e.mean_power() * l2) - 1.0).abs() < 1e-12);
        let b2b = LinkConfig {
            length: 0.0,
            ..cfg
        };
        assert_eq!(fiber_propagate(&e, &b2b), e);
    }

    #[test]
    fn group_delay_slope() {
        // Two narrow tones: the envelope peak of each Gaussian pulse moves by
        // −D·L·λ²/c · f.
        let cfg = LinkConfig::default();
        let fs = 180e9;
        let n = 1 << 16;
        let pulse = |f: f64| -> ComplexWaveform {
            let t0 = n as f64 / 2.0;
            let w = 400.0;
            let s = (0..n)
                .map(|k| {
                    let t = k as f64 - t0;
                    Complex64::from_polar((-(t * t) / (2.0 * w * w)).exp(), 2.0 * PI * f * k as f64 / fs)
                })
                .collect();
            ComplexWaveform::new(s, fs).unwrap()
        };
        let centroid = |e: &ComplexWaveform| {
            let p: Vec<f64> = e.samples().iter().map(|v| v.norm_sqr()).collect();
            let tot: f64 = p.iter().sum();
            p.iter().enumerate().map(|(k, v)| k as f64 * v).sum::<f64>() / tot / fs
        };
        let (f1, f2) = (2e9, 10e9);
        let d1 = centroid(&fiber_propagate(&pulse(f1), &cfg));
        let d2 = centroid(&fiber_propagate(&pulse(f2), &cfg));
        let slope = (d2 - d1) / (f2 - f1);
        let expect = -cfg.dispersion * cfg.length * cfg.wavelength.powi(2) / SPEED_OF_LIGHT;
        assert!((slope / expect - 1.0).abs() < 1e-3, "{slope} vs {expect}");
    }

    #[test]
    fn voa_sets_rop() {
        let cfg = LinkConfig::default();
        let e = ComplexWaveform::new(vec![Complex64::new(0.3, 0.1); 100], 180e9).unwrap();
        let y = edfa_and_voa(&e, &cfg, no_rng());
        assert!((super::super::watts_to_dbm(y.mean_power()) + 2.0).abs() < 0.01);
        let same = LinkConfig {
            rop_dbm: super::super::watts_to_dbm(e.mean_power()),
            ..cfg
        };
        let y = edfa_and_voa(&e, &same, no_rng());
        for (a, b) in y.samples().iter().zip(e.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn ase_osnr_matches_analytic() {
        let mut cfg = LinkConfig::default();
        cfg.edfa.noise_figure_db = Some(5.0);
        cfg.edfa.gain_db = 20.0;
        let p_in = dbm_to_watts(-13.11);
        let fs = 180e9;
        let n = 1 << 16;
        let e = ComplexWaveform::new(vec![Complex64::new(p_in.sqrt(), 0.0); n], fs).unwrap();
        // Unit ROP scaling keeps the arithmetic simple: compare before/after.
        cfg.rop_dbm = super::super::watts_to_dbm(p_in * 100.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let y = edfa_and_voa(&e, &cfg, Some(&mut rng));
        let mean: Complex64 = y.samples().iter().sum::<Complex64>() / n as f64;
        let noise: f64 = y.samples().iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / n as f64;
        let psd = noise / fs;
        let measured = 10.0 * (mean.norm_sqr() / (2.0 * psd * OSNR_REFERENCE_BW)).log10();
        let analytic = analytic_osnr_db(&cfg, p_in).unwrap();
        assert!((measured - analytic).abs() < 1.0, "{measured} vs {analytic}");
    }

    #[test]
    fn photodetect_square_law() {
        let pd = PdConfig {
            bandwidth_3db: f64::INFINITY,
            thermal_noise_psd: 0.0,
            ..PdConfig::default()
        };
        let e = ComplexWaveform::new(vec![Complex64::new(0.0, 0.5); 8], 1e9).unwrap();
        let i = photodetect(&e, &pd, no_rng()).unwrap();
        assert!(i.samples().iter().all(|&v| (v - 0.8 * 0.25).abs() < 1e-15));
        let g = ComplexWaveform::new(vec![Complex64::new(0.0, 1.5); 8], 1e9).unwrap();
        let ig = photodetect(&g, &pd, no_rng()).unwrap();
        assert!((ig.samples()[0] / i.samples()[0] - 9.0).abs() < 1e-12);
        let rotated = ComplexWaveform::new(vec![Complex64::from_polar(0.5, 1.2); 8], 1e9).unwrap();
        let ir = photodetect(&rotated, &pd, no_rng()).unwrap();
        assert!((ir.samples()[3] - i.samples()[3]).abs() < 1e-15);
    }

    #[test]
    fn two_tone_beat() {
        let pd = PdConfig {
            bandwidth_3db: f64::INFINITY,
            thermal_noise_psd: 0.0,
            ..PdConfig::default()
        };
        let fs = 180e9;
        let n = 1800;
        let e: Vec<Complex64> = (0..n)
            .map(|k| {
                let t = k as f64 / fs;
                Complex64::from_polar(1.0, 2.0 * PI * 5e9 * t) + Complex64::from_polar(0.5, 2.0 * PI * 12e9 * t)
            })
            .collect();
        let i = photodetect(&ComplexWaveform::new(e, fs).unwrap(), &pd, no_rng()).unwrap();
        let line = |f: f64| {
            i.samples()
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -2.0 * PI * f * k as f64 / fs))
                .sum::<Complex64>()
                .norm()
                / n as f64
        };
        assert!((line(7e9) - 0.8 * 0.5).abs() < 1e-9);
        assert!(line(6e9) < 1e-9);
    }

    #[test]
    fn fading_closed_form() {
        let cfg = LinkConfig::default();
        assert_eq!(analytic_fading(0.0, &cfg), 1.0);
        let f0 = (SPEED_OF_LIGHT / (2.0 * cfg.dispersion * cfg.length * cfg.wavelength.powi(2))).sqrt();
        assert!(analytic_fading(f0, &cfg) < 1e-9);
        assert!((f0 - 6.06e9).abs() < 10e6);
    }
}
