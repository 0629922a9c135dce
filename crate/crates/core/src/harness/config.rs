use std::fmt;

use crate::quantizer::{LloydMaxOptions, MAX_BITS};

use super::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    A,
    B,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::A => "A",
            Variant::B => "B",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantSelection {
    A,
    B,
    BothForComparison,
}

impl VariantSelection {
    pub fn includes(self, v: Variant) -> bool {
        matches!(
            (self, v),
            (VariantSelection::BothForComparison, _)
                | (VariantSelection::A, Variant::A)
                | (VariantSelection::B, Variant::B)
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub variant: VariantSelection,
    pub device_count: u32,
    /// Feedback bits per grid point; 0 means no phase feedback.
    pub bits: Vec<u32>,
    /// Oscillator drift variance α per round (Variant B).
    pub drift_variances: Vec<f64>,
    /// Rounds between full recalibrations (Variant B).
    pub recalibration_periods: Vec<u32>,
    /// Independent trials per grid point. A Variant B trial is one whole
    /// calibration cycle of `T` rounds.
    pub trials: u32,
    pub seed: u64,
    /// Nominal per-device transmit power. Recorded, never enforced.
    pub nominal_power: f64,
    pub lloyd_max: LloydMaxOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            variant: VariantSelection::BothForComparison,
            device_count: 10,
            bits: (0..=6).collect(),
            drift_variances: vec![0.001, 0.01, 0.1, 0.5],
            recalibration_periods: vec![1, 2, 4, 8, 16, 32],
            trials: 100_000,
            seed: 0,
            nominal_power: 1.0,
            lloyd_max: LloydMaxOptions::default(),
        }
    }
}

fn config_err(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl SweepConfig {
    pub(crate) fn validate(&self, needs_variant_b: bool) -> Result<(), HarnessError> {
        if self.device_count == 0 {
            return Err(config_err("device count must be at least 1"));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1"));
        }
        if self.bits.is_empty() {
            return Err(config_err("bits grid is empty"));
        }
        if let Some(&b) = self.bits.iter().find(|&&b| b > MAX_BITS) {
            return Err(config_err(format!("{b} bits exceeds the maximum of {MAX_BITS}")));
        }
        if !(self.nominal_power > 0.0 && self.nominal_power.is_finite()) {
            return Err(config_err("nominal power must be positive"));
        }
        if needs_variant_b {
            if self.drift_variances.is_empty() {
                return Err(config_err("alpha grid is empty"));
            }
            if let Some(a) = self.drift_variances.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
                return Err(config_err(format!("alpha must be finite and non-negative, got {a}")));
            }
            if self.recalibration_periods.is_empty() {
                return Err(config_err("period grid is empty"));
            }
            if self.recalibration_periods.contains(&0) {
                return Err(config_err("recalibration period must be at least 1"));
            }
        }
        Ok(())
    }
}
