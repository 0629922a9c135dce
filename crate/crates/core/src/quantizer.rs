//! Phase-feedback quantizers.
//!
//! Two codebook families are supported:
//!
//! * **Uniform** circular codebooks: `2^N` angles `iπ/2^(N-1)` evenly spread
//!   on the unit circle starting at 0. Nearest-level search uses circular
//!   distance, so the quantization error of any angle lies in
//!   `[-π/2^N, π/2^N]`.
//! * **Lloyd-Max** codebooks for a zero-mean Gaussian of variance `α`, found by
//!   Lloyd's fixed-point iteration with closed-form truncated-Gaussian
//!   centroids. Nearest-level search is on the real line; the codebook does
//!   not treat its input as an angle.
//!
//! Nearest-level ties resolve to the smaller level.

use std::f64::consts::PI;

use thiserror::Error;

use crate::angle::{wrap_to_pi, wrap_to_tau};
use crate::gaussian;

/// Largest supported bit count; `2^16` levels.
pub const MAX_BITS: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuantizerError {
    #[error("a codebook needs at least one bit")]
    ZeroBits,
    #[error("{0} bits exceeds the supported maximum of {MAX_BITS}")]
    TooManyBits(u32),
    #[error("variance must be positive and finite, got {0}")]
    InvalidVariance(f64),
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("max_iterations must be at least 1")]
    ZeroIterations,
    #[error(
        "Lloyd-Max iteration did not converge in {iterations} iterations \
         (last level change {residual:e})"
    )]
    NotConverged {
        iterations: usize,
        residual: f64,
        levels: Vec<f64>,
    },
    #[error("Lloyd-Max cell {cell} has no representable probability mass")]
    EmptyCell { cell: usize, levels: Vec<f64> },
    #[error("{operation} requires a {expected} codebook")]
    WrongFamily {
        operation: &'static str,
        expected: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuantizerFamily {
    Uniform,
    LloydMax { training_variance: f64 },
}

/// Stopping rule for [`lloyd_max_codebook`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LloydMaxOptions {
    /// Stop once no level moves by more than this between iterations.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for LloydMaxOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

/// An immutable, strictly increasing set of `2^bits` quantization levels.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantizerCodebook {
    levels: Vec<f64>,
    bits: u32,
    family: QuantizerFamily,
}

impl QuantizerCodebook {
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn family(&self) -> QuantizerFamily {
        self.family
    }

    pub fn training_variance(&self) -> Option<f64> {
        match self.family {
            QuantizerFamily::Uniform => None,
            QuantizerFamily::LloydMax { training_variance } => Some(training_variance),
        }
    }

    /// Decision thresholds between adjacent levels (midpoints), `2^bits - 1` of them.
    pub fn boundaries(&self) -> Vec<f64> {
        self.levels.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Nearest level to `angle` under circular distance. Uniform codebooks only.
    pub fn quantize_circular(&self, angle: f64) -> Result<f64, QuantizerError> {
        if self.family != QuantizerFamily::Uniform {
            return Err(QuantizerError::WrongFamily {
                operation: "quantize_circular",
                expected: "uniform",
            });
        }
        Ok(self.levels[self.circular_index(angle)])
    }

    /// Signed circular error `angle - Q(angle)` reduced to `(-π, π]`.
    pub fn circular_error(&self, angle: f64) -> Result<f64, QuantizerError> {
        let q = self.quantize_circular(angle)?;
        Ok(wrap_to_pi(angle - q))
    }

    fn circular_index(&self, angle: f64) -> usize {
        let count = self.levels.len();
        let step = 2.0 * PI / count as f64;
        // ceil(u - 1/2) sends exact midpoints to the lower index.
        let idx = (wrap_to_tau(angle) / step - 0.5).ceil() as usize;
        idx % count
    }

    /// Nearest level to `value` on the real line. Lloyd-Max codebooks only.
    pub fn quantize_linear(&self, value: f64) -> Result<f64, QuantizerError> {
        if !matches!(self.family, QuantizerFamily::LloydMax { .. }) {
            return Err(QuantizerError::WrongFamily {
                operation: "quantize_linear",
                expected: "Lloyd-Max",
            });
        }
        Ok(nearest_linear(&self.levels, value))
    }
}

fn nearest_linear(levels: &[f64], value: f64) -> f64 {
    let pos = levels.partition_point(|&q| q < value);
    if pos == 0 {
        return levels[0];
    }
    if pos == levels.len() {
        return levels[pos - 1];
    }
    let (lo, hi) = (levels[pos - 1], levels[pos]);
    if hi - value < value - lo {
        hi
    } else {
        lo
    }
}

fn check_bits(bits: u32) -> Result<usize, QuantizerError> {
    match bits {
        0 => Err(QuantizerError::ZeroBits),
        b if b > MAX_BITS => Err(QuantizerError::TooManyBits(b)),
        b => Ok(1usize << b),
    }
}

/// The uniform circular codebook `{iπ/2^(bits-1) : i = 0..2^bits}`.
pub fn uniform_codebook(bits: u32) -> Result<QuantizerCodebook, QuantizerError> {
    let count = check_bits(bits)?;
    let denom = (1u64 << (bits - 1)) as f64;
    let levels = (0..count).map(|i| i as f64 * PI / denom).collect();
    Ok(QuantizerCodebook {
        levels,
        bits,
        family: QuantizerFamily::Uniform,
    })
}

/// Lloyd-Max codebook for N(0, `variance`) with `2^bits` levels.
///
/// Starts from the centroids of the `2^bits` equiprobable cells and alternates
/// midpoint boundaries with truncated-Gaussian centroids until the largest
/// level change drops below `options.tolerance`. Each iterate is mirrored
/// about zero so the levels stay exactly symmetric.
///
/// Iteration runs on the unit-variance problem and the result is scaled by
/// the standard deviation, so the tolerance is in units of sigma and codebooks
/// for different variances are exact rescalings of each other.
pub fn lloyd_max_codebook(
    bits: u32,
    variance: f64,
    options: LloydMaxOptions,
) -> Result<QuantizerCodebook, QuantizerError> {
    let count = check_bits(bits)?;
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(QuantizerError::InvalidVariance(variance));
    }
    if !(options.tolerance > 0.0 && options.tolerance.is_finite()) {
        return Err(QuantizerError::InvalidTolerance(options.tolerance));
    }
    if options.max_iterations == 0 {
        return Err(QuantizerError::ZeroIterations);
    }
    let sigma = variance.sqrt();

    let mut levels = Vec::with_capacity(count);
    let mut lo = f64::NEG_INFINITY;
    for i in 0..count {
        let hi = if i + 1 == count {
            f64::INFINITY
        } else {
            gaussian::quantile((i + 1) as f64 / count as f64)
        };
        let mean = gaussian::truncated_mean(lo, hi).ok_or_else(|| QuantizerError::EmptyCell {
            cell: i,
            levels: Vec::new(),
        })?;
        levels.push(mean);
        lo = hi;
    }
    symmetrize(&mut levels);

    let mut next = vec![0.0; count];
    let mut residual = f64::INFINITY;
    for _ in 0..options.max_iterations {
        for i in 0..count {
            let lo = if i == 0 {
                f64::NEG_INFINITY
            } else {
                0.5 * (levels[i - 1] + levels[i])
            };
            let hi = if i + 1 == count {
                f64::INFINITY
            } else {
                0.5 * (levels[i] + levels[i + 1])
            };
            next[i] = gaussian::truncated_mean(lo, hi).ok_or_else(|| QuantizerError::EmptyCell {
                cell: i,
                levels: levels.iter().map(|q| sigma * q).collect(),
            })?;
        }
        symmetrize(&mut next);
        residual = levels.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut levels, &mut next);
        if residual < options.tolerance {
            return Ok(QuantizerCodebook {
                levels: levels.iter().map(|q| sigma * q).collect(),
                bits,
                family: QuantizerFamily::LloydMax {
                    training_variance: variance,
                },
            });
        }
    }
    Err(QuantizerError::NotConverged {
        iterations: options.max_iterations,
        residual,
        levels: levels.iter().map(|q| sigma * q).collect(),
    })
}

fn symmetrize(levels: &mut [f64]) {
    let n = levels.len();
    for i in 0..n / 2 {
        let m = 0.5 * (levels[n - 1 - i] - levels[i]);
        levels[i] = -m;
        levels[n - 1 - i] = m;
    }
}
