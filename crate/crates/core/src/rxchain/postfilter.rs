use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Two-tap post filter `1 + α·z⁻¹`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PostFilter {
    pub alpha: f64,
}

/// Largest α produced by the estimator.
pub const MAX_ALPHA: f64 = 0.99;

/// Minimum error samples for α estimation.
pub const MIN_ALPHA_SAMPLES: usize = 10_000;

/// Noise-whitening α from the equalizer error `e`:
/// `α = clamp(−Re⟨e_k·conj(e_{k−1})⟩ / ⟨|e_k|²⟩, 0, 0.99)`, the minimizer of
/// `E|e_k + α·e_{k−1}|²`. Equalizer-enhanced noise is high-pass (negative
/// lag-1 correlation), which yields a positive α.
pub fn estimate_postfilter_alpha(errors: &[Complex64]) -> Result<PostFilter> {
    if errors.len() < MIN_ALPHA_SAMPLES {
        return Err(Error::param(format!(
            "need at least {MIN_ALPHA_SAMPLES} error samples, got {}",
            errors.len()
        )));
    }
    let r0: f64 = errors.iter().map(|e| e.norm_sqr()).sum();
    let r1: f64 = errors.windows(2).map(|w| (w[1] * w[0].conj()).re).sum();
    let alpha = if r0 > 0.0 { -r1 / r0 } else { 0.0 };
    Ok(PostFilter {
        alpha: alpha.clamp(0.0, MAX_ALPHA),
    })
}

/// Grid search for the α minimizing the filtered error power; validation
/// counterpart of [`estimate_postfilter_alpha`]. Returns `(α, power)` pairs.
pub fn sweep_postfilter_alpha(errors: &[Complex64], grid: &[f64]) -> Vec<(f64, f64)> {
    grid.iter()
        .map(|&a| {
            let p = errors
                .windows(2)
                .map(|w| (w[1] + a * w[0]).norm_sqr())
                .sum::<f64>()
                / (errors.len().max(2) - 1) as f64;
            (a, p)
        })
        .collect()
}

/// `z_k = y_k + α·y_{k−1}` with `y_{−1} = initial`.
pub fn apply_post_filter(y: &[Complex64], pf: PostFilter, initial: Complex64) -> Vec<Complex64> {
    let mut prev = initial;
    y.iter()
        .map(|&v| {
            let z = v + pf.alpha * prev;
            prev = v;
            z
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn white(n: usize, seed: u64) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)))
            .collect()
    }

    #[test]
    fn white_gives_small_alpha() {
        let a = estimate_postfilter_alpha(&white(10_000, 1)).unwrap().alpha;
        assert!(a < 0.05);
        assert!(estimate_postfilter_alpha(&white(100, 1)).is_err());
    }

    #[test]
    fn ma1_high_pass_noise() {
        let w = white(20_000, 2);
        let e: Vec<Complex64> = w.windows(2).map(|p| p[1] - 0.6 * p[0]).collect();
        let a = estimate_postfilter_alpha(&e).unwrap().alpha;
        assert!((a - 0.6 / 1.36).abs() < 0.05, "{a}");
        let grid: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
        let best = sweep_postfilter_alpha(&e, &grid)
            .into_iter()
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .unwrap()
            .0;
        assert!((best - a).abs() <= 0.02);
    }

    #[test]
    fn clamps() {
        let alt: Vec<Complex64> = (0..10_000)
            .map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
            .collect();
        assert_eq!(estimate_postfilter_alpha(&alt).unwrap().alpha, MAX_ALPHA);
        let constant = vec![Complex64::new(0.3, 0.0); 10_000];
        assert_eq!(estimate_postfilter_alpha(&constant).unwrap().alpha, 0.0);
    }

    #[test]
    fn filter_examples() {
        let y = white(50, 3);
        assert_eq!(apply_post_filter(&y, PostFilter { alpha: 0.0 }, y[7]), y);
        let mut imp = vec![Complex64::new(0.0, 0.0); 4];
        imp[0] = Complex64::new(1.0, 0.0);
        let z = apply_post_filter(&imp, PostFilter { alpha: 0.5 }, Complex64::new(0.0, 0.0));
        assert_eq!(z[0].re, 1.0);
        assert_eq!(z[1].re, 0.5);
        assert_eq!(z[2].re, 0.0);
        let init = Complex64::new(0.2, -0.1);
        let z = apply_post_filter(&y, PostFilter { alpha: 0.37 }, init);
        for k in 0..y.len() {
            let prev = if k == 0 { init } else { y[k - 1] };
            assert_eq!(z[k], y[k] + 0.37 * prev);
        }
        // Ideal inverse restores the input.
        let mut back = Vec::new();
        let mut prev = init;
        for &v in &z {
            let r = v - 0.37 * prev;
            back.push(r);
            prev = r;
        }
        for (a, b) in back.iter().zip(&y) {
            assert!((a - b).norm() < 1e-9);
        }
    }
}
