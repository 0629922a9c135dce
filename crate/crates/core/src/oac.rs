//! Over-the-air sum estimation under phase errors, the MSE objective, and the
//! closed-form Variant A MSE.
//!
//! With channel-inversion precoding `a_k = e^{-jφ̂_k}/|g_k|` and receive
//! coefficient `b = 1`, the AP's estimate of `v = Σ v_k` reduces to
//! `v̂ = Σ v_k e^{jδ_k} + n` with `δ_k = φ_k - φ̂_k`.

use std::f64::consts::PI;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OacError {
    #[error("{values} values but {phase_errors} phase errors")]
    LengthMismatch { values: usize, phase_errors: usize },
    #[error("at least one device is required")]
    NoDevices,
    #[error("the closed form needs at least one feedback bit")]
    ZeroBits,
    #[error("cannot estimate an MSE from an empty sample")]
    EmptySample,
}

/// Result of one over-the-air aggregation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundOutcome {
    pub true_sum: Complex64,
    pub estimate: Complex64,
    pub squared_error: f64,
}

pub fn oac_round(values: &[Complex64], phase_errors: &[f64], noise: Complex64) -> Result<RoundOutcome, OacError> {
    if values.len() != phase_errors.len() {
        return Err(OacError::LengthMismatch {
            values: values.len(),
            phase_errors: phase_errors.len(),
        });
    }
    if values.is_empty() {
        return Err(OacError::NoDevices);
    }
    let mut true_sum = Complex64::new(0.0, 0.0);
    let mut estimate = noise;
    for (&v, &delta) in values.iter().zip(phase_errors) {
        true_sum += v;
        estimate += v * Complex64::from_polar(1.0, delta);
    }
    Ok(RoundOutcome {
        true_sum,
        estimate,
        squared_error: (estimate - true_sum).norm_sqr(),
    })
}

/// `E[e^{jx}]` for `x ~ U(-π/2^N, π/2^N)`: `(2^N/π) sin(π/2^N)`.
pub fn uniform_error_mean_phasor(bits: u32) -> f64 {
    let levels = 2f64.powi(bits as i32);
    levels / PI * (PI / levels).sin()
}

/// Variant A MSE with `N >= 1` feedback bits: `2K(1 - (2^N/π) sin(π/2^N)) + 1`.
pub fn lemma1_mse(device_count: u32, bits: u32) -> Result<f64, OacError> {
    if device_count == 0 {
        return Err(OacError::NoDevices);
    }
    if bits == 0 {
        return Err(OacError::ZeroBits);
    }
    Ok(2.0 * device_count as f64 * (1.0 - uniform_error_mean_phasor(bits)) + 1.0)
}

/// Variant A MSE without phase feedback: `2K + 1`.
pub fn no_feedback_mse(device_count: u32) -> Result<f64, OacError> {
    if device_count == 0 {
        return Err(OacError::NoDevices);
    }
    Ok(2.0 * device_count as f64 + 1.0)
}

/// Closed-form Variant A MSE for any bit count, `N = 0` meaning no feedback.
pub fn variant_a_mse(device_count: u32, bits: u32) -> Result<f64, OacError> {
    if bits == 0 {
        no_feedback_mse(device_count)
    } else {
        lemma1_mse(device_count, bits)
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Mean and standard error of a sample of squared errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MseEstimate {
    pub mean: f64,
    /// Standard error of the mean; NaN for a single observation.
    pub stderr: f64,
    pub count: u64,
}

/// Order-sensitive accumulator of first and second moments. Feeding the same
/// observations in the same order (and merging partial accumulators in the same
/// order) gives bit-identical results.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MseAccumulator {
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    count: u64,
}

impl MseAccumulator {
    pub fn push(&mut self, x: f64) {
        self.sum.add(x);
        self.sum_sq.add(x * x);
        self.count += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn estimate(&self) -> Result<MseEstimate, OacError> {
        if self.count == 0 {
            return Err(OacError::EmptySample);
        }
        let n = self.count as f64;
        let mean = self.sum.value() / n;
        let stderr = if self.count == 1 {
            f64::NAN
        } else {
            let ss = (self.sum_sq.value() - n * mean * mean).max(0.0);
            (ss / (n - 1.0) / n).sqrt()
        };
        Ok(MseEstimate {
            mean,
            stderr,
            count: self.count,
        })
    }
}

pub fn empirical_mse(squared_errors: &[f64]) -> Result<MseEstimate, OacError> {
    let mut acc = MseAccumulator::default();
    for &x in squared_errors {
        acc.push(x);
    }
    acc.estimate()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::complex_normal;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn perfect_phase_and_no_noise() {
        let v = [c(0.3, -1.0), c(2.0, 0.5)];
        let out = oac_round(&v, &[0.0, 0.0], c(0.0, 0.0)).unwrap();
        assert_eq!(out.estimate, out.true_sum);
        assert_eq!(out.squared_error, 0.0);
    }

    #[test]
    fn antipodal_error() {
        let out = oac_round(&[c(1.0, 0.0)], &[PI], c(0.0, 0.0)).unwrap();
        assert!((out.estimate - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((out.squared_error - 4.0).abs() < 1e-15);
    }

    #[test]
    fn opposite_quarter_turns_cancel() {
        let out = oac_round(&[c(1.0, 0.0), c(1.0, 0.0)], &[PI / 2.0, -PI / 2.0], c(0.0, 0.0)).unwrap();
        assert!(out.estimate.norm() < 1e-15);
        assert!((out.squared_error - 4.0).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        assert_eq!(
            oac_round(&[c(1.0, 0.0)], &[0.0, 0.0], c(0.0, 0.0)),
            Err(OacError::LengthMismatch {
                values: 1,
                phase_errors: 2
            })
        );
    }

    #[test]
    fn closed_forms() {
        let two_over_pi = 2.0 / PI;
        assert!((lemma1_mse(10, 1).unwrap() - (20.0 * (1.0 - two_over_pi) + 1.0)).abs() < 1e-12);
        assert!((lemma1_mse(10, 1).unwrap() - 8.2676).abs() < 1e-4);
        let n2 = 20.0 * (1.0 - 2.0 * 2f64.sqrt() / PI) + 1.0;
        assert!((lemma1_mse(10, 2).unwrap() - n2).abs() < 1e-12);
        assert!((lemma1_mse(10, 2).unwrap() - 2.9937).abs() < 1e-4);
        assert!((lemma1_mse(7, 16).unwrap() - 1.0).abs() < 1e-7);
        assert_eq!(no_feedback_mse(10).unwrap(), 21.0);
        assert_eq!(no_feedback_mse(1).unwrap(), 3.0);
        assert_eq!(lemma1_mse(10, 0), Err(OacError::ZeroBits));
        assert_eq!(lemma1_mse(0, 1), Err(OacError::NoDevices));
        assert_eq!(variant_a_mse(10, 0).unwrap(), 21.0);
    }

    #[test]
    fn closed_form_mse_monotone() {
        for k in 1..20 {
            for n in 1..12 {
                let m = lemma1_mse(k, n).unwrap();
                assert!(m < no_feedback_mse(k).unwrap());
                assert!(lemma1_mse(k, n + 1).unwrap() < m);
                assert!(lemma1_mse(k + 1, n).unwrap() > m);
            }
        }
    }

    #[test]
    fn empirical_mse_small_samples() {
        let e = empirical_mse(&[4.0, 4.0, 4.0]).unwrap();
        assert_eq!((e.mean, e.stderr), (4.0, 0.0));
        let e = empirical_mse(&[0.0, 2.0]).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 1.0));
        assert!(empirical_mse(&[1.5]).unwrap().stderr.is_nan());
        assert_eq!(empirical_mse(&[]), Err(OacError::EmptySample));
    }

    #[test]
    fn noise_power_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let xs: Vec<f64> = (0..100_000).map(|_| complex_normal(&mut rng).norm_sqr()).collect();
        let e = empirical_mse(&xs).unwrap();
        assert!((e.mean - 1.0).abs() < 0.02, "{}", e.mean);
    }

    #[test]
    fn merge_matches_sequential_push() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 * 0.37).sin().abs() * 1e3).collect();
        let mut whole = MseAccumulator::default();
        xs.iter().for_each(|&x| whole.push(x));
        let mut parts = MseAccumulator::default();
        for chunk in xs.chunks(64) {
            let mut p = MseAccumulator::default();
            chunk.iter().for_each(|&x| p.push(x));
            parts.merge(&p);
        }
        let (a, b) = (whole.estimate().unwrap(), parts.estimate().unwrap());
        assert!((a.mean - b.mean).abs() < 1e-12 * a.mean);
        assert_eq!(a.count, b.count);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
