//! Fading channels, non-reciprocal transceiver hardware, reciprocity
//! calibration and Wiener phase drift of device oscillators.
//!
//! The over-the-air channels are built from a reciprocal antenna-to-antenna
//! channel `h_k` and multiplicative hardware coefficients:
//!
//! ```text
//! uplink   g_{k->AP} = t_k  * h_k * r_AP
//! downlink g_{AP->k} = t_AP * h_k * r_k
//! ```
//!
//! A device calibrated with `c_k = (t_k / r_k) * (r_AP / t_AP)` recovers the
//! uplink from any later downlink measurement as `c_k * g_{AP->k}`, as long as
//! its hardware has not drifted. Drift rotates `t_k` by `+ε/2` and `r_k` by
//! `-ε/2` (one oscillator feeds both chains), which leaves the estimate's
//! amplitude exact and rotates its phase by `-ε` relative to the true uplink.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("device count must be at least 1")]
    NoDevices,
    #[error("hardware coefficient {which} is zero or not finite")]
    DegenerateCoefficient { which: String },
    #[error("transmit and receive coefficient lists differ in length ({tx} vs {rx})")]
    LengthMismatch { tx: usize, rx: usize },
    #[error("drift variance must be non-negative and finite, got {0}")]
    InvalidVariance(f64),
    #[error("reciprocity estimation needs a full (complex) calibration coefficient")]
    AmplitudeOnlyCalibration,
}

/// Draws from CN(0, 1): independent N(0, 1/2) real and imaginary parts.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
}

/// A device transceiver coefficient kept in polar form so drift can only
/// ever touch the phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceCoefficient {
    pub amplitude: f64,
    pub phase: f64,
}

impl DeviceCoefficient {
    pub fn new(amplitude: f64, phase: f64) -> Self {
        Self { amplitude, phase }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.amplitude, self.phase)
    }
}

/// Transmit/receive hardware coefficients of every device and of the AP.
#[derive(Debug, Clone, PartialEq)]
pub struct HardwareProfile {
    device_tx: Vec<DeviceCoefficient>,
    device_rx: Vec<DeviceCoefficient>,
    ap_tx: Complex64,
    ap_rx: Complex64,
}

fn usable(z: Complex64) -> bool {
    z.re.is_finite() && z.im.is_finite() && z.norm_sqr() > 0.0
}

impl HardwareProfile {
    pub fn new(
        device_tx: Vec<DeviceCoefficient>,
        device_rx: Vec<DeviceCoefficient>,
        ap_tx: Complex64,
        ap_rx: Complex64,
    ) -> Result<Self, ChannelError> {
        if device_tx.len() != device_rx.len() {
            return Err(ChannelError::LengthMismatch {
                tx: device_tx.len(),
                rx: device_rx.len(),
            });
        }
        if device_tx.is_empty() {
            return Err(ChannelError::NoDevices);
        }
        let degenerate = |c: &DeviceCoefficient| !(c.amplitude.is_finite() && c.amplitude > 0.0 && c.phase.is_finite());
        if let Some(k) = device_tx.iter().position(degenerate) {
            return Err(ChannelError::DegenerateCoefficient {
                which: format!("t_{k}"),
            });
        }
        if let Some(k) = device_rx.iter().position(degenerate) {
            return Err(ChannelError::DegenerateCoefficient {
                which: format!("r_{k}"),
            });
        }
        if !usable(ap_tx) {
            return Err(ChannelError::DegenerateCoefficient { which: "t_AP".into() });
        }
        if !usable(ap_rx) {
            return Err(ChannelError::DegenerateCoefficient { which: "r_AP".into() });
        }
        Ok(Self {
            device_tx,
            device_rx,
            ap_tx,
            ap_rx,
        })
    }

    /// Perfectly reciprocal hardware: every coefficient equals 1.
    pub fn identity(device_count: usize) -> Result<Self, ChannelError> {
        let unit = DeviceCoefficient::new(1.0, 0.0);
        Self::new(
            vec![unit; device_count],
            vec![unit; device_count],
            Complex64::new(1.0, 0.0),
            Complex64::new(1.0, 0.0),
        )
    }

    /// Random hardware: amplitudes log-uniform on [0.5, 2], phases uniform.
    pub fn random<R: Rng + ?Sized>(device_count: usize, rng: &mut R) -> Result<Self, ChannelError> {
        let draw = |rng: &mut R| {
            let log_amp = rng.random_range(-std::f64::consts::LN_2..=std::f64::consts::LN_2);
            DeviceCoefficient::new(log_amp.exp(), rng.random_range(0.0..TAU))
        };
        let device_tx = (0..device_count).map(|_| draw(rng)).collect();
        let device_rx = (0..device_count).map(|_| draw(rng)).collect();
        let ap_tx = draw(rng).to_complex();
        let ap_rx = draw(rng).to_complex();
        Self::new(device_tx, device_rx, ap_tx, ap_rx)
    }

    pub fn device_count(&self) -> usize {
        self.device_tx.len()
    }

    pub fn device_tx(&self, device: usize) -> DeviceCoefficient {
        self.device_tx[device]
    }

    pub fn device_rx(&self, device: usize) -> DeviceCoefficient {
        self.device_rx[device]
    }

    pub fn ap_tx(&self) -> Complex64 {
        self.ap_tx
    }

    pub fn ap_rx(&self) -> Complex64 {
        self.ap_rx
    }

    /// Advances every device oscillator by one Wiener step in place.
    ///
    /// Draws `ε_k ~ N(0, variance)` per device, in device order, and rotates
    /// `t_k` by `+ε_k/2` and `r_k` by `-ε_k/2`.
    pub fn drift<R: Rng + ?Sized>(&mut self, variance: f64, rng: &mut R) -> Result<(), ChannelError> {
        check_variance(variance)?;
        let sd = variance.sqrt();
        for (tx, rx) in self.device_tx.iter_mut().zip(self.device_rx.iter_mut()) {
            let eps = oscillator_increment(sd, rng);
            tx.phase += 0.5 * eps;
            rx.phase -= 0.5 * eps;
        }
        Ok(())
    }
}

fn check_variance(variance: f64) -> Result<(), ChannelError> {
    if variance >= 0.0 && variance.is_finite() {
        Ok(())
    } else {
        Err(ChannelError::InvalidVariance(variance))
    }
}

/// One oscillator phase increment `ε ~ N(0, sd²)`.
///
/// Always consumes exactly one standard normal from `rng`, even when
/// `sd == 0`, so streams stay aligned across drift variances.
pub(crate) fn oscillator_increment<R: Rng + ?Sized>(sd: f64, rng: &mut R) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    sd * z
}

/// Returns a drifted copy of `hardware`; see [`HardwareProfile::drift`].
pub fn apply_phase_drift<R: Rng + ?Sized>(
    hardware: &HardwareProfile,
    variance: f64,
    rng: &mut R,
) -> Result<HardwareProfile, ChannelError> {
    let mut next = hardware.clone();
    next.drift(variance, rng)?;
    Ok(next)
}

/// One block-fading instance: reciprocal antenna channels and AP noise.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub reciprocal: Vec<Complex64>,
    pub noise: Complex64,
}

impl ChannelRealization {
    pub fn device_count(&self) -> usize {
        self.reciprocal.len()
    }
}

/// Draws `h_k` for every device and the AP noise `n`, all i.i.d. CN(0, 1).
pub fn sample_channel<R: Rng + ?Sized>(device_count: usize, rng: &mut R) -> Result<ChannelRealization, ChannelError> {
    if device_count == 0 {
        return Err(ChannelError::NoDevices);
    }
    let reciprocal = (0..device_count).map(|_| complex_normal(rng)).collect();
    let noise = complex_normal(rng);
    Ok(ChannelRealization { reciprocal, noise })
}

/// `t_k * h_k * r_AP`.
pub fn uplink_channel(realization: &ChannelRealization, hardware: &HardwareProfile, device: usize) -> Complex64 {
    hardware.device_tx[device].to_complex() * realization.reciprocal[device] * hardware.ap_rx
}

/// `t_AP * h_k * r_k`.
pub fn downlink_channel(realization: &ChannelRealization, hardware: &HardwareProfile, device: usize) -> Complex64 {
    hardware.ap_tx * realization.reciprocal[device] * hardware.device_rx[device].to_complex()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationKind {
    Full,
    AmplitudeOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CalibrationCoefficient {
    Full(Complex64),
    AmplitudeOnly(f64),
}

impl CalibrationCoefficient {
    /// `c_k * downlink`, the reciprocity-based uplink estimate.
    pub fn reciprocity_estimate(&self, downlink: Complex64) -> Result<Complex64, ChannelError> {
        match *self {
            Self::Full(c) => Ok(c * downlink),
            Self::AmplitudeOnly(_) => Err(ChannelError::AmplitudeOnlyCalibration),
        }
    }

    /// `|c_k| * |downlink|`; available from either kind.
    pub fn amplitude_estimate(&self, downlink: Complex64) -> f64 {
        let amp = match *self {
            Self::Full(c) => c.norm(),
            Self::AmplitudeOnly(a) => a,
        };
        amp * downlink.norm()
    }
}

/// Noiseless calibration of one device.
///
/// The AP measures `g_{k->AP}` from a device pilot and answers with a
/// downlink pilot precoded by its inverse, so the device observes
/// `g_{AP->k} / g_{k->AP} = 1 / c_k`. The ratio does not depend on `h_k`, so it
/// is evaluated from the hardware coefficients directly.
pub fn calibrate(
    hardware: &HardwareProfile,
    device: usize,
    kind: CalibrationKind,
) -> Result<CalibrationCoefficient, ChannelError> {
    let tx = hardware.device_tx[device].to_complex();
    let rx = hardware.device_rx[device].to_complex();
    for (z, which) in [
        (tx, format!("t_{device}")),
        (rx, format!("r_{device}")),
        (hardware.ap_tx, "t_AP".to_string()),
        (hardware.ap_rx, "r_AP".to_string()),
    ] {
        if !usable(z) {
            return Err(ChannelError::DegenerateCoefficient { which });
        }
    }
    let c = (tx / rx) * (hardware.ap_rx / hardware.ap_tx);
    Ok(match kind {
        CalibrationKind::Full => CalibrationCoefficient::Full(c),
        CalibrationKind::AmplitudeOnly => CalibrationCoefficient::AmplitudeOnly(c.norm()),
    })
}
