use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, WeightedIndex};
use serde::{Deserialize, Serialize};

use super::config::TxConfig;
use crate::dsp::{
    accumulate, clip, design_rrc, fir_filter_cyclic, frequency_shift, papr_db, rate_ratio,
    ComplexWaveform, Direction, RealWaveform, Resampler, RrcSpec,
};
use crate::error::{Error, Result};
use crate::linksim::LinkConfig;
use crate::planner::{BandSpec, Matcher, SubcarrierPlan};
use crate::rxchain::{BAND_RESAMPLER_PASS, BAND_RESAMPLER_STOP};
use crate::shaping::{Ccdm, Composition, Constellation};

/// Longest frame quantum accepted, s.
const MAX_QUANTUM: f64 = 1e-3;

/// Cyclic frame timing shared by all bands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLayout {
    /// Shortest period on which every rate, baud and center completes a
    /// whole number of cycles, s.
    pub quantum: f64,
    /// Number of quanta per frame (5-smooth).
    pub periods: u64,
    /// Symbols per band, preamble included.
    pub symbols: Vec<usize>,
    pub preamble: usize,
}

impl FrameLayout {
    pub fn duration(&self) -> f64 {
        self.quantum * self.periods as f64
    }

    /// Payload symbols of band `i`.
    pub fn payload(&self, i: usize) -> usize {
        self.symbols[i] - self.preamble
    }
}

fn to_hz(v: f64) -> Result<u64> {
    let r = v.round();
    if !(r >= 1.0) || (v - r).abs() > 1e-3 {
        return Err(Error::Config(format!("frequency {v} Hz is not a whole number of hertz")));
    }
    Ok(r as u64)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn next_smooth(mut n: u64) -> u64 {
    loop {
        let mut m = n;
        for p in [2, 3, 5] {
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        if m == 1 {
            return n;
        }
        n += 1;
    }
}

/// Chooses the frame so the mean band holds `tx.symbols_per_band` symbols
/// and the slowest band at least `preamble + tx.min_payload`.
pub fn frame_layout(plan: &SubcarrierPlan, link: &LinkConfig, tx: &TxConfig, preamble: usize) -> Result<FrameLayout> {
    let active: Vec<&BandSpec> = plan.bands.iter().filter(|b| !b.excluded).collect();
    if active.is_empty() {
        return Err(Error::Config("no band left to transmit".into()));
    }
    let mut g = 0;
    for v in [link.dac.rate, link.adc.rate, link.sim_rate] {
        g = gcd(g, to_hz(v)?);
    }
    for b in &plan.bands {
        g = gcd(g, to_hz(b.baud)?);
        g = gcd(g, to_hz(b.center)?);
    }
    let quantum = 1.0 / g as f64;
    if quantum > MAX_QUANTUM {
        return Err(Error::Config(format!(
            "rates and band frequencies share only a {g} Hz grid; use a coarser grid"
        )));
    }
    let total_baud: f64 = active.iter().map(|b| b.baud).sum();
    let min_baud = active.iter().map(|b| b.baud).fold(f64::INFINITY, f64::min);
    let t_mean = tx.symbols_per_band as f64 * active.len() as f64 / total_baud;
    let t_min = (preamble + tx.min_payload) as f64 / min_baud;
    let periods = next_smooth(((t_mean.max(t_min) / quantum) - 1e-9).ceil().max(1.0) as u64);
    let duration = quantum * periods as f64;
    let symbols = plan
        .bands
        .iter()
        .map(|b| (b.baud * duration).round() as usize)
        .collect();
    Ok(FrameLayout {
        quantum,
        periods,
        symbols,
        preamble,
    })
}

/// Transmitted content of one band.
#[derive(Debug, Clone, PartialEq)]
pub struct BandFrame {
    pub constellation: Constellation,
    /// Unit-energy QPSK training symbols.
    pub preamble: Vec<Complex64>,
    /// Constellation point indices after the preamble.
    pub payload: Vec<usize>,
    /// Matcher input bits of the CCDM blocks (empty without a matcher).
    pub data_bits: Vec<u8>,
    /// CCDM blocks at the start of the payload.
    pub blocks: usize,
    pub block_len: usize,
}

impl BandFrame {
    /// Preamble followed by the mapped payload.
    pub fn symbols(&self) -> Vec<Complex64> {
        let pts = self.constellation.points();
        self.preamble
            .iter()
            .copied()
            .chain(self.payload.iter().map(|&i| pts[i]))
            .collect()
    }

    pub fn label_bits(&self) -> Vec<u8> {
        self.constellation.label_bits(&self.payload)
    }

    /// The matcher for this band, if its payload starts with CCDM blocks.
    pub fn ccdm(&self) -> Result<Option<Ccdm>> {
        if self.blocks == 0 {
            return Ok(None);
        }
        Ok(Some(Ccdm::new(Composition::from_priors(
            self.constellation.priors(),
            self.block_len as u64,
        )?)))
    }
}

/// RNG of band `index`: independent of every other band.
pub fn band_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// RNG of the channel noise.
pub fn noise_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    rng
}

fn is_uniform(c: &Constellation) -> bool {
    let p0 = c.priors()[0];
    c.priors().iter().all(|&p| (p - p0).abs() < 1e-12)
}

/// Draws the preamble and payload of band `index`. Uniform constellations
/// carry i.i.d. uniform symbols; shaped ones carry CCDM blocks (or i.i.d.
/// symbols from the priors with [`Matcher::Ideal`]), with any remainder
/// shorter than a block drawn i.i.d. from the priors.
pub fn band_frame(
    band: &BandSpec,
    index: usize,
    seed: u64,
    preamble_len: usize,
    payload_len: usize,
    matcher: Matcher,
) -> Result<BandFrame> {
    let constellation = band.modulation.constellation()?;
    let mut rng = band_rng(seed, index);
    let a = std::f64::consts::FRAC_1_SQRT_2;
    let preamble = (0..preamble_len)
        .map(|_| {
            let i = if rng.gen::<bool>() { a } else { -a };
            let q = if rng.gen::<bool>() { a } else { -a };
            Complex64::new(i, q)
        })
        .collect();
    let mut payload = Vec::with_capacity(payload_len);
    let mut data_bits = Vec::new();
    let mut blocks = 0;
    let mut block_len = 0;
    if is_uniform(&constellation) {
        let m = constellation.len();
        payload.extend((0..payload_len).map(|_| rng.gen_range(0..m)));
    } else {
        if let Matcher::Ccdm { block_len: n } = matcher {
            let ccdm = Ccdm::new(Composition::from_priors(constellation.priors(), n)?);
            block_len = n as usize;
            blocks = payload_len / block_len;
            for _ in 0..blocks {
                let bits: Vec<u8> = (0..ccdm.num_bits()).map(|_| rng.gen_range(0..2)).collect();
                payload.extend(ccdm.encode(&bits)?);
                data_bits.extend(bits);
            }
        }
        let w = WeightedIndex::new(constellation.priors()).map_err(|e| Error::param(e.to_string()))?;
        while payload.len() < payload_len {
            payload.push(w.sample(&mut rng));
        }
    }
    Ok(BandFrame {
        constellation,
        preamble,
        payload,
        data_bits,
        blocks,
        block_len,
    })
}

/// Frames of every band of `plan` (`None` for excluded bands).
pub fn plan_frames(
    plan: &SubcarrierPlan,
    layout: &FrameLayout,
    seed: u64,
    matcher: Matcher,
) -> Result<Vec<Option<BandFrame>>> {
    plan.bands
        .iter()
        .enumerate()
        .map(|(i, b)| {
            if b.excluded {
                return Ok(None);
            }
            band_frame(b, i, seed, layout.preamble, layout.payload(i), matcher)
                .map(Some)
                .map_err(|e| e.in_band(i))
        })
        .collect()
}

/// One band up-converted to `center` at `rate`: RRC pulses at 2 samples per
/// symbol, cyclic resampling, complex frequency shift. Scaled to mean power
/// `power`.
pub fn band_waveform(
    symbols: &[Complex64],
    band: &BandSpec,
    rate: f64,
    rrc_span: usize,
    power: f64,
) -> Result<ComplexWaveform> {
    let mut up = vec![Complex64::new(0.0, 0.0); 2 * symbols.len()];
    for (k, s) in symbols.iter().enumerate() {
        up[2 * k] = *s;
    }
    let taps = design_rrc(&RrcSpec {
        rolloff: band.rolloff,
        span: rrc_span,
        samples_per_symbol: 2,
    })?;
    let shaped = fir_filter_cyclic(&ComplexWaveform::new(up, 2.0 * band.baud)?, &taps)?.output;
    let (u, d) = rate_ratio(2.0 * band.baud, rate)?;
    let resampled = Resampler::with_band(u, d, BAND_RESAMPLER_PASS, BAND_RESAMPLER_STOP)?.process_cyclic(&shaped)?;
    let shifted = frequency_shift(&resampled, band.center, Direction::Up)?;
    let p = shifted.mean_power();
    if !(p > 0.0) {
        return Err(Error::param("band waveform has no power"));
    }
    let g = (power / p).sqrt();
    ComplexWaveform::new(shifted.into_samples().into_iter().map(|v| v * g).collect(), rate)
}

/// Multiplexed DAC input.
#[derive(Debug, Clone, PartialEq)]
pub struct Drive {
    /// Clipped and normalized to peak 1.
    pub waveform: RealWaveform,
    /// PAPR of the unclipped real waveform, dB.
    pub papr_db: f64,
    /// PAPR after clipping, dB.
    pub clipped_papr_db: f64,
}

/// Superposes the bands at the DAC rate with equal PSD (band power
/// `power_scale · baud`), clips at `tx.clipping_db` and scales to peak 1.
pub fn compose_drive(
    plan: &SubcarrierPlan,
    frames: &[Option<BandFrame>],
    layout: &FrameLayout,
    rate: f64,
    tx: &TxConfig,
) -> Result<Drive> {
    let len = (rate * layout.duration()).round() as usize;
    let mut acc = ComplexWaveform::zeros(len, rate)?;
    for (i, (band, frame)) in plan.bands.iter().zip(frames).enumerate() {
        let Some(frame) = frame else { continue };
        if band.power_scale == 0.0 {
            continue;
        }
        let w = band_waveform(&frame.symbols(), band, rate, tx.rrc_span, band.power_scale * band.baud / 1e9)
            .map_err(|e| e.in_band(i))?;
        accumulate(&mut acc, &w).map_err(|e| e.in_band(i))?;
    }
    let real: Vec<f64> = acc.samples().iter().map(|v| v.re).collect();
    drop(acc);
    let papr = papr_db(&real)?;
    let clipped = clip(&real, tx.clipping_db);
    let clipped_papr_db = papr_db(&clipped)?;
    let peak = clipped.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let waveform = RealWaveform::new(clipped.into_iter().map(|v| v / peak).collect(), rate)?;
    Ok(Drive {
        waveform,
        papr_db: papr,
        clipped_papr_db,
    })
}
