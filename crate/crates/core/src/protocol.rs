//! Per-round channel-phase estimation protocols.
//!
//! **Variant A** estimates the channel amplitude from a downlink pilot and the
//! phase purely from quantized feedback: the AP measures the uplink phase
//! exactly on a precoded pilot and returns its uniform circular quantization.
//! It keeps no state between rounds.
//!
//! **Variant B** estimates amplitude and phase from a downlink pilot through a
//! reciprocity calibration that goes stale as the device oscillators drift.
//! The AP measures the resulting phase error, removes the part it already
//! knows (the cumulative residual of earlier feedback), and quantizes the fresh
//! single-round increment with a Lloyd-Max codebook trained on that increment's
//! Gaussian law. Unreported residuals accumulate until the next recalibration.
//!
//! Every round returns the per-device phase error `δ_k = φ_k - φ̂_k` that enters
//! the over-the-air sum.
//!
//! Sign convention: composing the oscillator increments literally, a drift
//! step `ε` rotates a stale reciprocity estimate by `-ε`. The protocol's phase
//! increment is therefore `e = -ε`; since `ε` is symmetric this is the same
//! law either way, but it keeps [`variant_b_round`] and
//! [`variant_b_full_fidelity_round`] bit-compatible on a shared random stream.

use std::f64::consts::TAU;
use std::ops::{Deref, DerefMut};

use num_complex::Complex64;
use rand::Rng;
use thiserror::Error;

use crate::angle::wrap_to_pi;
use crate::channel::{
    self, calibrate, downlink_channel, uplink_channel, CalibrationCoefficient, CalibrationKind, ChannelError,
    ChannelRealization, HardwareProfile,
};
use crate::quantizer::{QuantizerCodebook, QuantizerError, QuantizerFamily};

/// Relative tolerance when matching a codebook's training variance to the
/// drift variance.
const VARIANCE_MATCH_RTOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("device count must be at least 1")]
    NoDevices,
    #[error("recalibration period must be at least 1")]
    ZeroPeriod,
    #[error("phase error buffer holds {got} entries, expected {expected}")]
    BufferLength { expected: usize, got: usize },
    #[error("Variant {variant} needs a {expected} feedback codebook")]
    WrongCodebook { variant: char, expected: &'static str },
    #[error("feedback codebook was trained for variance {trained}, but the drift variance is {drift}")]
    VarianceMismatch { trained: f64, drift: f64 },
    #[error("{rounds} rounds since calibration with period {period}; recalibrate first")]
    RecalibrationRequired { rounds: u32, period: u32 },
    #[error("realization has {got} devices, state has {expected}")]
    DeviceCountMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
}

/// Per-device signed phase errors `φ_k - φ̂_k` in radians.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseErrorVector(Vec<f64>);

impl PhaseErrorVector {
    pub fn zeros(device_count: usize) -> Self {
        Self(vec![0.0; device_count])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for PhaseErrorVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

impl Deref for PhaseErrorVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for PhaseErrorVector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

fn check_buffer(expected: usize, out: &[f64]) -> Result<(), ProtocolError> {
    if out.len() != expected {
        return Err(ProtocolError::BufferLength {
            expected,
            got: out.len(),
        });
    }
    Ok(())
}

// ---------------------------------------------------------------- Variant A

fn check_uniform(codebook: Option<&QuantizerCodebook>) -> Result<(), ProtocolError> {
    match codebook {
        Some(cb) if cb.family() != QuantizerFamily::Uniform => Err(ProtocolError::WrongCodebook {
            variant: 'A',
            expected: "uniform",
        }),
        _ => Ok(()),
    }
}

/// Variant A phase error for a device whose true uplink phase is `phase`.
///
/// With feedback the device ends up with `φ̂ = Q(φ)` and the error is the
/// circular quantization error in `[-π/2^N, π/2^N]`. Without feedback the
/// device only knows `|g_k|`, so `φ̂ = 0` and the error is `φ` itself.
pub fn variant_a_phase_error(codebook: Option<&QuantizerCodebook>, phase: f64) -> Result<f64, ProtocolError> {
    check_uniform(codebook)?;
    match codebook {
        Some(cb) => Ok(cb.circular_error(phase)?),
        None => Ok(phase),
    }
}

/// One Variant A estimation round into a caller-owned buffer.
///
/// Draws one uniform channel phase per device, in device order.
pub fn variant_a_round_into<R: Rng + ?Sized>(
    codebook: Option<&QuantizerCodebook>,
    rng: &mut R,
    out: &mut [f64],
) -> Result<(), ProtocolError> {
    check_uniform(codebook)?;
    for slot in out.iter_mut() {
        let phase = rng.random_range(0.0..TAU);
        *slot = match codebook {
            Some(cb) => cb.circular_error(phase)?,
            None => phase,
        };
    }
    Ok(())
}

/// One Variant A estimation round; `codebook = None` means no phase feedback.
pub fn variant_a_round<R: Rng + ?Sized>(
    device_count: usize,
    codebook: Option<&QuantizerCodebook>,
    rng: &mut R,
) -> Result<PhaseErrorVector, ProtocolError> {
    if device_count == 0 {
        return Err(ProtocolError::NoDevices);
    }
    let mut out = PhaseErrorVector::zeros(device_count);
    variant_a_round_into(codebook, rng, &mut out)?;
    Ok(out)
}

// ---------------------------------------------------------------- Variant B

/// What the AP feeds back about the fresh phase increment in Variant B.
#[derive(Debug, Clone, Copy)]
pub enum PhaseFeedback<'a> {
    /// No feedback: pure reciprocity estimation with accumulating drift.
    None,
    /// Lloyd-Max quantized increment.
    Quantized(&'a QuantizerCodebook),
    /// Unquantized increment; the many-bit limit. Also the exact
    /// representation of a zero-variance increment.
    Exact,
}

impl PhaseFeedback<'_> {
    fn check(&self, drift_variance: f64) -> Result<(), ProtocolError> {
        if !(drift_variance >= 0.0 && drift_variance.is_finite()) {
            return Err(ChannelError::InvalidVariance(drift_variance).into());
        }
        if let PhaseFeedback::Quantized(cb) = self {
            let trained = cb.training_variance().ok_or(ProtocolError::WrongCodebook {
                variant: 'B',
                expected: "Lloyd-Max",
            })?;
            if (trained - drift_variance).abs() > VARIANCE_MATCH_RTOL * drift_variance {
                return Err(ProtocolError::VarianceMismatch {
                    trained,
                    drift: drift_variance,
                });
            }
        }
        Ok(())
    }

    /// The fed-back value for an observed increment.
    fn feedback(&self, increment: f64) -> Result<Option<f64>, QuantizerError> {
        match self {
            PhaseFeedback::None => Ok(None),
            PhaseFeedback::Exact => Ok(Some(increment)),
            PhaseFeedback::Quantized(cb) => cb.quantize_linear(increment).map(Some),
        }
    }
}

/// Variant B bookkeeping for one calibration epoch of every device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceEstimationState {
    calibration: Vec<CalibrationCoefficient>,
    /// `E_k^t`, the sum of unreported quantization residuals. Held by the AP.
    residual: Vec<f64>,
    /// Sum of all feedback values applied by each device since calibration.
    correction: Vec<f64>,
    rounds_since_calibration: u32,
    recalibration_period: u32,
}

impl DeviceEstimationState {
    pub fn device_count(&self) -> usize {
        self.residual.len()
    }

    pub fn calibration(&self) -> &[CalibrationCoefficient] {
        &self.calibration
    }

    pub fn cumulative_residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn device_correction(&self) -> &[f64] {
        &self.correction
    }

    pub fn rounds_since_calibration(&self) -> u32 {
        self.rounds_since_calibration
    }

    pub fn recalibration_period(&self) -> u32 {
        self.recalibration_period
    }

    /// True once `T` rounds have run since the last calibration.
    pub fn needs_recalibration(&self) -> bool {
        self.rounds_since_calibration >= self.recalibration_period
    }

    /// Full reciprocity calibration of every device against `hardware`;
    /// clears residuals, corrections and the round counter.
    pub fn recalibrate(&mut self, hardware: &HardwareProfile) -> Result<(), ProtocolError> {
        if hardware.device_count() != self.device_count() {
            return Err(ProtocolError::DeviceCountMismatch {
                expected: self.device_count(),
                got: hardware.device_count(),
            });
        }
        for (k, slot) in self.calibration.iter_mut().enumerate() {
            *slot = calibrate(hardware, k, CalibrationKind::Full)?;
        }
        self.residual.fill(0.0);
        self.correction.fill(0.0);
        self.rounds_since_calibration = 0;
        Ok(())
    }

    fn begin_round(&self, out: &[f64]) -> Result<(), ProtocolError> {
        if self.needs_recalibration() {
            return Err(ProtocolError::RecalibrationRequired {
                rounds: self.rounds_since_calibration,
                period: self.recalibration_period,
            });
        }
        check_buffer(self.device_count(), out)
    }
}

/// Calibrates every device of `hardware` at `t = 0`.
pub fn variant_b_init(
    recalibration_period: u32,
    hardware: &HardwareProfile,
) -> Result<DeviceEstimationState, ProtocolError> {
    if recalibration_period == 0 {
        return Err(ProtocolError::ZeroPeriod);
    }
    let k = hardware.device_count();
    let mut state = DeviceEstimationState {
        calibration: vec![CalibrationCoefficient::Full(Complex64::new(1.0, 0.0)); k],
        residual: vec![0.0; k],
        correction: vec![0.0; k],
        rounds_since_calibration: 0,
        recalibration_period,
    };
    state.recalibrate(hardware)?;
    Ok(state)
}

/// One Variant B round on the residual recursion, into a caller-owned buffer.
///
/// Per device, in device order: draw the oscillator increment (one standard
/// normal from `rng`), let the AP quantize the principal value of the fresh
/// phase increment `e`, and fold the unreported part into the residual:
/// `E^t = E^{t-1} + e - Q(e)`. The phase error is `δ = -E^t`.
pub fn variant_b_round_into<R: Rng + ?Sized>(
    state: &mut DeviceEstimationState,
    feedback: PhaseFeedback<'_>,
    drift_variance: f64,
    rng: &mut R,
    out: &mut [f64],
) -> Result<(), ProtocolError> {
    feedback.check(drift_variance)?;
    state.begin_round(out)?;
    let sd = drift_variance.sqrt();
    for (k, slot) in out.iter_mut().enumerate() {
        let increment = -channel::oscillator_increment(sd, rng);
        match feedback {
            PhaseFeedback::None => state.residual[k] += increment,
            _ => {
                // The AP only ever sees a phase, so it works with the principal value.
                let observed = wrap_to_pi(increment);
                let q = feedback.feedback(observed)?.unwrap_or(0.0);
                state.correction[k] += q;
                state.residual[k] += observed - q;
            }
        }
        *slot = -state.residual[k];
    }
    state.rounds_since_calibration += 1;
    Ok(())
}

/// One Variant B round on the residual recursion.
pub fn variant_b_round<R: Rng + ?Sized>(
    state: &mut DeviceEstimationState,
    feedback: PhaseFeedback<'_>,
    drift_variance: f64,
    rng: &mut R,
) -> Result<PhaseErrorVector, ProtocolError> {
    let mut out = PhaseErrorVector::zeros(state.device_count());
    variant_b_round_into(state, feedback, drift_variance, rng, &mut out)?;
    Ok(out)
}

/// One Variant B round computed from the physical channel model.
///
/// Drifts `hardware` by one step (same draws as [`variant_b_round`]), then per
/// device: measures the downlink of `realization`, maps it to an uplink
/// estimate through the stale calibration and the device's accumulated
/// corrections, lets the AP read the phase error off a precoded uplink pilot,
/// subtract its stored residual and feed back the quantized increment, and
/// finally compares the corrected estimate with the true uplink. Returned
/// errors are principal values in `(-π, π]`.
pub fn variant_b_full_fidelity_round<R: Rng + ?Sized>(
    state: &mut DeviceEstimationState,
    hardware: &mut HardwareProfile,
    realization: &ChannelRealization,
    feedback: PhaseFeedback<'_>,
    drift_variance: f64,
    rng: &mut R,
) -> Result<PhaseErrorVector, ProtocolError> {
    let k_count = state.device_count();
    for got in [hardware.device_count(), realization.device_count()] {
        if got != k_count {
            return Err(ProtocolError::DeviceCountMismatch { expected: k_count, got });
        }
    }
    feedback.check(drift_variance)?;
    let mut out = PhaseErrorVector::zeros(k_count);
    state.begin_round(&out)?;

    hardware.drift(drift_variance, rng)?;
    for k in 0..k_count {
        let truth = uplink_channel(realization, hardware, k);
        let raw = state.calibration[k].reciprocity_estimate(downlink_channel(realization, hardware, k))?;
        let intermediate = raw * Complex64::from_polar(1.0, -state.correction[k]);

        let estimate = match feedback {
            PhaseFeedback::None => intermediate,
            _ => {
                // Precoded pilot: the AP receives g * conj(g̃) / |g̃|^2 and reads its phase.
                let observed = (truth * intermediate.conj()).arg();
                let increment = -wrap_to_pi(observed + state.residual[k]);
                let q = feedback.feedback(increment)?.unwrap_or(0.0);
                state.correction[k] += q;
                state.residual[k] += increment - q;
                intermediate * Complex64::from_polar(1.0, -q)
            }
        };
        let delta = (truth * estimate.conj()).arg();
        if let PhaseFeedback::None = feedback {
            state.residual[k] = -delta;
        }
        out[k] = delta;
    }
    state.rounds_since_calibration += 1;
    Ok(out)
}
