mod common;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use oac_hybrid::quantizer::{lloyd_max_codebook, uniform_codebook, LloydMaxOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use common::*;

fn lmq(bits: u32, variance: f64) -> Vec<f64> {
    lloyd_max_codebook(bits, variance, LloydMaxOptions::default())
        .unwrap()
        .levels()
        .to_vec()
}

#[test]
fn two_bit_levels_match_quadrature_oracle() {
    let oracle = quadrature_lloyd_max(4, 1.0);
    // Frozen from the oracle: ±0.4528, ±1.5104.
    for (o, want) in oracle.iter().zip([-1.5104, -0.4528, 0.4528, 1.5104]) {
        assert!((o - want).abs() < 1e-3, "oracle {o} vs {want}");
    }
    let grad = quadrature_distortion_gradient(&oracle, 1.0);
    assert!(grad.iter().all(|g| g.abs() < 1e-9), "{grad:?}");
    for (got, o) in lmq(2, 1.0).iter().zip(&oracle) {
        assert!((got - o).abs() < 1e-6, "{got} vs {o}");
    }
}

#[test]
fn centroid_condition_against_quadrature() {
    for bits in 1..=4 {
        for alpha in [0.001f64, 0.3, 1.0, 2.5] {
            let levels = lmq(bits, alpha);
            let sigma = alpha.sqrt();
            for i in 0..levels.len() {
                let lo = if i == 0 {
                    f64::NEG_INFINITY
                } else {
                    0.5 * (levels[i - 1] + levels[i])
                };
                let hi = if i + 1 == levels.len() {
                    f64::INFINITY
                } else {
                    0.5 * (levels[i] + levels[i + 1])
                };
                let c = quadrature_centroid(lo, hi, sigma);
                assert!(
                    (levels[i] - c).abs() < 1e-8 * sigma.max(1.0),
                    "N={bits} α={alpha} level {i}: {} vs {c}",
                    levels[i]
                );
            }
        }
    }
}

#[test]
fn levels_symmetric_and_increasing() {
    for bits in 1..=6 {
        let levels = lmq(bits, 0.2);
        let n = levels.len();
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
        for i in 0..n {
            assert!((levels[i] + levels[n - 1 - i]).abs() < 1e-15);
        }
    }
}

#[test]
fn scaling_law() {
    for bits in 1..=4 {
        let unit = lmq(bits, 1.0);
        for alpha in [0.01f64, 0.25, 4.0] {
            let scaled = lmq(bits, alpha);
            for (s, u) in scaled.iter().zip(&unit) {
                assert!(
                    (s - alpha.sqrt() * u).abs() < 1e-9,
                    "N={bits} α={alpha} diff {}",
                    s - alpha.sqrt() * u
                );
            }
        }
    }
}

#[test]
fn lloyd_max_beats_equally_spaced_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for alpha in [0.01f64, 1.0] {
        let sigma: f64 = alpha.sqrt();
        let normal = Normal::new(0.0, sigma).unwrap();
        let xs: Vec<f64> = (0..1_000_000).map(|_| normal.sample(&mut rng)).collect();
        for bits in 1..=3u32 {
            let cb = lloyd_max_codebook(bits, alpha, LloydMaxOptions::default()).unwrap();
            let count = 1usize << bits;
            let grid: Vec<f64> = (0..count)
                .map(|i| -4.0 * sigma + 8.0 * sigma * i as f64 / (count - 1) as f64)
                .collect();
            let nearest = |x: f64| {
                *grid
                    .iter()
                    .min_by(|a, b| (x - **a).abs().partial_cmp(&(x - **b).abs()).unwrap())
                    .unwrap()
            };
            let d_lmq: f64 = xs
                .iter()
                .map(|&x| (x - cb.quantize_linear(x).unwrap()).powi(2))
                .sum::<f64>();
            let d_grid: f64 = xs.iter().map(|&x| (x - nearest(x)).powi(2)).sum::<f64>();
            assert!(d_lmq < d_grid, "N={bits} α={alpha}: {d_lmq} vs {d_grid}");
            // Empirical distortion agrees with the quadrature value.
            let exact = quadrature_distortion(cb.levels(), sigma);
            assert!((d_lmq / xs.len() as f64 - exact).abs() < 0.01 * exact);
        }
    }
}

#[test]
fn uniform_error_mean_phasor_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for bits in 1..=6u32 {
        let cb = uniform_codebook(bits).unwrap();
        let n = 200_000;
        let mut acc = Complex64::new(0.0, 0.0);
        for _ in 0..n {
            let x = rng.random_range(0.0..TAU);
            let q = cb.quantize_circular(x).unwrap();
            acc += Complex64::from_polar(1.0, x - q);
        }
        acc /= n as f64;
        let levels = 2f64.powi(bits as i32);
        let expected = levels / PI * (PI / levels).sin();
        assert!((acc.re - expected).abs() < 5e-3, "N={bits}: {} vs {expected}", acc.re);
        assert!(acc.im.abs() < 5e-3);
    }
}

proptest! {
    #[test]
    fn circular_error_bounded(bits in 1u32..=8, x in -50.0f64..50.0) {
        let cb = uniform_codebook(bits).unwrap();
        let e = cb.circular_error(x).unwrap();
        prop_assert!(e.abs() <= PI / 2f64.powi(bits as i32) + 1e-12);
    }

    #[test]
    fn circular_idempotent(bits in 1u32..=8, x in -50.0f64..50.0) {
        let cb = uniform_codebook(bits).unwrap();
        let q = cb.quantize_circular(x).unwrap();
        prop_assert_eq!(cb.quantize_circular(q).unwrap(), q);
    }

    #[test]
    fn linear_idempotent_and_nearest(bits in 1u32..=5, alpha in 0.001f64..2.0, x in -10.0f64..10.0) {
        let cb = lloyd_max_codebook(bits, alpha, LloydMaxOptions::default()).unwrap();
        let q = cb.quantize_linear(x).unwrap();
        prop_assert_eq!(cb.quantize_linear(q).unwrap(), q);
        let best = cb.levels().iter().map(|l| (x - l).abs()).fold(f64::INFINITY, f64::min);
        prop_assert!(((x - q).abs() - best).abs() < 1e-15);
    }
}
