use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::shaping::Constellation;

/// Memory-1 trellis with channel taps `[1, α]`; one state per point.
#[derive(Debug, Clone, PartialEq)]
pub struct TrellisSpec {
    pub constellation: Constellation,
    pub alpha: f64,
}

impl TrellisSpec {
    pub fn new(constellation: Constellation, alpha: f64) -> Result<Self> {
        if !(alpha.abs() < 1.0) {
            return Err(Error::param(format!("trellis tap must satisfy |α| < 1, got {alpha}")));
        }
        if constellation.len() > 256 {
            return Err(Error::param("trellis supports at most 256 states"));
        }
        Ok(TrellisSpec {
            constellation,
            alpha,
        })
    }

    pub fn num_states(&self) -> usize {
        self.constellation.len()
    }
}

/// Maximum-likelihood sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct MlseOutput {
    /// Point index per symbol.
    pub indices: Vec<usize>,
    /// Total metric of the surviving path.
    pub cost: f64,
}

/// Viterbi detection of `z_k = x_k + α·x_{k−1} + n_k`.
///
/// The branch metric is `|z_k − x_i − α·x_j|² / (2σ²)`, where `sigma2` is the
/// noise variance per real dimension, minus `ln p_i` when `use_priors` is
/// set. `initial` is the symbol preceding `z_0` if known; with `None` the
/// first symbol sees no ISI. Ties go to the lowest state index.
pub fn mlse_viterbi(
    z: &[Complex64],
    trellis: &TrellisSpec,
    sigma2: f64,
    use_priors: bool,
    initial: Option<Complex64>,
) -> Result<MlseOutput> {
    if !(trellis.alpha.abs() < 1.0) {
        return Err(Error::param(format!(
            "trellis tap must satisfy |α| < 1, got {}",
            trellis.alpha
        )));
    }
    if !(sigma2 > 0.0 && sigma2.is_finite()) {
        return Err(Error::param(format!("noise variance must be positive, got {sigma2}")));
    }
    let c = &trellis.constellation;
    let m = c.len();
    if m > 256 {
        return Err(Error::param("trellis supports at most 256 states"));
    }
    if z.is_empty() {
        return Ok(MlseOutput {
            indices: Vec::new(),
            cost: 0.0,
        });
    }
    let pts = c.points();
    let alpha = trellis.alpha;
    let inv = 1.0 / (2.0 * sigma2);
    let bias: Vec<f64> = (0..m)
        .map(|i| {
            let prior = if use_priors { -c.priors()[i].max(1e-300).ln() } else { 0.0 };
            pts[i].norm_sqr() * inv + prior
        })
        .collect();

    // |z − x_i − αx_j|² = |z − αx_j|² − 2Re((z − αx_j)·conj(x_i)) + |x_i|².
    let mut cost: Vec<f64> = (0..m)
        .map(|i| {
            let u = match initial {
                Some(p) => z[0] - alpha * p,
                None => z[0],
            };
            (u - pts[i]).norm_sqr() * inv
                + if use_priors { -c.priors()[i].max(1e-300).ln() } else { 0.0 }
        })
        .collect();
    let mut offset = 0.0;
    let mut back = vec![0u8; (z.len() - 1) * m];
    let mut next = vec![0.0; m];
    let mut a = vec![0.0; m];
    let mut u = vec![Complex64::new(0.0, 0.0); m];
    for k in 1..z.len() {
        for j in 0..m {
            let uj = z[k] - alpha * pts[j];
            a[j] = cost[j] + uj.norm_sqr() * inv;
            u[j] = uj * (2.0 * inv);
        }
        let row = &mut back[(k - 1) * m..k * m];
        for i in 0..m {
            let xi = pts[i];
            let mut best = f64::INFINITY;
            let mut arg = 0;
            for j in 0..m {
                let v = a[j] - (u[j].re * xi.re + u[j].im * xi.im);
                if v < best {
                    best = v;
                    arg = j;
                }
            }
            next[i] = best + bias[i];
            row[i] = arg as u8;
        }
        let min = next.iter().copied().fold(f64::INFINITY, f64::min);
        offset += min;
        for (c, n) in cost.iter_mut().zip(&next) {
            *c = n - min;
        }
    }
    let mut state = 0;
    for i in 1..m {
        if cost[i] < cost[state] {
            state = i;
        }
    }
    let total = cost[state] + offset;
    let mut indices = vec![0; z.len()];
    indices[z.len() - 1] = state;
    for k in (1..z.len()).rev() {
        state = back[(k - 1) * m + state] as usize;
        indices[k - 1] = state;
    }
    Ok(MlseOutput {
        indices,
        cost: total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn path_cost(
        z: &[Complex64],
        seq: &[usize],
        c: &Constellation,
        alpha: f64,
        sigma2: f64,
        priors: bool,
        init: Option<Complex64>,
    ) -> f64 {
        let pts = c.points();
        let mut prev = init.unwrap_or(Complex64::new(0.0, 0.0));
        let mut total = 0.0;
        for (k, &i) in seq.iter().enumerate() {
            total += (z[k] - pts[i] - alpha * prev).norm_sqr() / (2.0 * sigma2);
            if priors {
                total -= c.priors()[i].ln();
            }
            prev = pts[i];
        }
        total
    }

    fn brute(
        z: &[Complex64],
        c: &Constellation,
        alpha: f64,
        sigma2: f64,
        priors: bool,
        init: Option<Complex64>,
    ) -> f64 {
        let m = c.len();
        let n = z.len();
        let mut best = f64::INFINITY;
        let mut seq = vec![0; n];
        for code in 0..m.pow(n as u32) {
            let mut r = code;
            for s in seq.iter_mut() {
                *s = r % m;
                r /= m;
            }
            best = best.min(path_cost(z, &seq, c, alpha, sigma2, priors, init));
        }
        best
    }

    fn psk8() -> Constellation {
        let pts = (0..8)
            .map(|k| Complex64::from_polar(1.0, k as f64 * std::f64::consts::FRAC_PI_4))
            .collect();
        Constellation::new(pts, (0..8).collect(), vec![0.125; 8]).unwrap()
    }

    #[test]
    fn qpsk_noiseless_recovery() {
        let c = Constellation::qpsk();
        let seq = [2, 0, 3];
        let alpha = 0.6;
        let pts = c.points();
        let z: Vec<Complex64> = (0..3)
            .map(|k| pts[seq[k]] + if k > 0 { alpha * pts[seq[k - 1]] } else { Complex64::new(0.0, 0.0) })
            .collect();
        let t = TrellisSpec::new(c.clone(), alpha).unwrap();
        let out = mlse_viterbi(&z, &t, 0.1, false, None).unwrap();
        assert_eq!(out.indices, seq);
        assert!(out.cost.abs() < 1e-12);
        assert!((brute(&z, &c, alpha, 0.1, false, None) - out.cost).abs() < 1e-12);
    }

    #[test]
    fn memoryless_equals_slicing() {
        let c = Constellation::square_qam(6).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z: Vec<Complex64> = (0..1000)
            .map(|_| Complex64::new(rng.gen_range(-1.3..1.3), rng.gen_range(-1.3..1.3)))
            .collect();
        let t = TrellisSpec::new(c.clone(), 0.0).unwrap();
        let out = mlse_viterbi(&z, &t, 0.05, false, Some(Complex64::new(0.3, 0.3))).unwrap();
        let sliced: Vec<usize> = z.iter().map(|&v| c.slice(v)).collect();
        assert_eq!(out.indices, sliced);
    }

    #[test]
    fn beats_slicing_with_isi() {
        let c = Constellation::square_qam(6).unwrap();
        let pts = c.points().to_vec();
        let alpha = 0.5;
        let snr = 10f64.powf(1.8);
        let sigma2 = 1.0 / snr / 2.0;
        let t = TrellisSpec::new(c.clone(), alpha).unwrap();
        let (mut e_mlse, mut e_slice) = (0usize, 0usize);
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let tx: Vec<usize> = (0..2000).map(|_| rng.gen_range(0..64)).collect();
            let z: Vec<Complex64> = (0..tx.len())
                .map(|k| {
                    let prev = if k > 0 { pts[tx[k - 1]] } else { Complex64::new(0.0, 0.0) };
                    let n = Complex64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
                        * sigma2.sqrt();
                    pts[tx[k]] + alpha * prev + n
                })
                .collect();
            let out = mlse_viterbi(&z, &t, sigma2, false, None).unwrap();
            e_mlse += out.indices.iter().zip(&tx).filter(|(a, b)| a != b).count();
            e_slice += z.iter().zip(&tx).filter(|(v, &b)| c.slice(**v) != b).count();
        }
        assert!(e_mlse < e_slice, "{e_mlse} vs {e_slice}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = Constellation::qpsk();
        assert!(TrellisSpec::new(c.clone(), 1.0).is_err());
        let t = TrellisSpec::new(c, 0.3).unwrap();
        assert!(mlse_viterbi(&[Complex64::new(0.0, 0.0)], &t, 0.0, false, None).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn matches_brute_force(
            len in 1usize..=8,
            bits in 1u32..=3,
            alpha in -0.9f64..0.9,
            priors in any::<bool>(),
            known in any::<bool>(),
            seed in any::<u64>(),
        ) {
            let base = match bits {
                1 => Constellation::bpsk(),
                2 => Constellation::qpsk(),
                _ => psk8(),
            };
            // Keep the exhaustive search small: 2^8, 4^5, 8^4.
            let len = len.min([8, 5, 4][bits as usize - 1]);
            let c = if priors {
                let p: Vec<f64> = (0..base.len()).map(|i| (i + 1) as f64).collect();
                let s: f64 = p.iter().sum();
                base.with_priors(p.iter().map(|v| v / s).collect()).unwrap()
            } else {
                base
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let z: Vec<Complex64> = (0..len)
                .map(|_| Complex64::new(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)))
                .collect();
            let init = known.then(|| c.points()[0]);
            let t = TrellisSpec::new(c.clone(), alpha).unwrap();
            let out = mlse_viterbi(&z, &t, 0.2, priors, init).unwrap();
            let oracle = brute(&z, &c, alpha, 0.2, priors, init);
            prop_assert!((out.cost - oracle).abs() < 1e-9 * (1.0 + oracle.abs()));
            let own = path_cost(&z, &out.indices, &c, alpha, 0.2, priors, init);
            prop_assert!((own - out.cost).abs() < 1e-9 * (1.0 + own.abs()));
        }
    }
}
