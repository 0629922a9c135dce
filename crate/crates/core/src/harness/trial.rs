use num_complex::Complex64;
use rand::Rng;

use crate::channel::{complex_normal, HardwareProfile};
use crate::oac::{oac_round, RoundOutcome};
use crate::protocol::{
    variant_a_round_into, variant_b_init, variant_b_round_into, DeviceEstimationState, PhaseFeedback,
};
use crate::quantizer::{lloyd_max_codebook, uniform_codebook, LloydMaxOptions, QuantizerCodebook};

use super::{trial_rng, HarnessError};

/// Reusable per-worker buffers.
pub(crate) struct Scratch {
    phase_errors: Vec<f64>,
    values: Vec<Complex64>,
}

impl Scratch {
    pub(crate) fn new(device_count: usize) -> Self {
        Self {
            phase_errors: vec![0.0; device_count],
            values: vec![Complex64::new(0.0, 0.0); device_count],
        }
    }
}

/// Draws fresh values `v_k ~ CN(0,1)` and noise, then aggregates.
fn aggregate<R: Rng + ?Sized>(scratch: &mut Scratch, rng: &mut R) -> Result<RoundOutcome, HarnessError> {
    for v in scratch.values.iter_mut() {
        *v = complex_normal(rng);
    }
    let noise = complex_normal(rng);
    Ok(oac_round(&scratch.values, &scratch.phase_errors, noise)?)
}

/// One Variant A grid point: `K` devices, uniform feedback with `N` bits.
#[derive(Debug, Clone)]
pub struct VariantAPoint {
    device_count: usize,
    codebook: Option<QuantizerCodebook>,
}

impl VariantAPoint {
    pub fn new(device_count: u32, bits: u32) -> Result<Self, HarnessError> {
        let codebook = match bits {
            0 => None,
            b => Some(uniform_codebook(b).map_err(|source| HarnessError::Codebook {
                bits: b,
                variance: f64::NAN,
                source,
            })?),
        };
        Ok(Self {
            device_count: device_count as usize,
            codebook,
        })
    }

    pub fn device_count(&self) -> usize {
        self.device_count
    }

    /// One estimation round followed by one aggregation, on the trial stream.
    pub fn run_trial(&self, seed: u64) -> Result<RoundOutcome, HarnessError> {
        let mut scratch = Scratch::new(self.device_count);
        self.run_trial_with(seed, &mut scratch)
    }

    pub(crate) fn run_trial_with(&self, seed: u64, scratch: &mut Scratch) -> Result<RoundOutcome, HarnessError> {
        let mut rng = trial_rng(seed);
        variant_a_round_into(self.codebook.as_ref(), &mut rng, &mut scratch.phase_errors)?;
        aggregate(scratch, &mut rng)
    }
}

/// One Variant B grid point: `K` devices, `N` feedback bits, drift variance α,
/// recalibration period `T`.
#[derive(Debug, Clone)]
pub struct VariantBPoint {
    device_count: usize,
    bits: u32,
    drift_variance: f64,
    period: u32,
    codebook: Option<QuantizerCodebook>,
    // The residual recursion does not depend on the hardware values.
    hardware: HardwareProfile,
}

impl VariantBPoint {
    /// Trains the Lloyd-Max codebook for N(0, α). A zero-variance increment is
    /// represented exactly by its degenerate codebook, so `α = 0` with `N >= 1`
    /// uses exact feedback.
    pub fn new(
        device_count: u32,
        bits: u32,
        drift_variance: f64,
        period: u32,
        options: LloydMaxOptions,
    ) -> Result<Self, HarnessError> {
        let codebook = if bits == 0 || drift_variance == 0.0 {
            None
        } else {
            Some(
                lloyd_max_codebook(bits, drift_variance, options).map_err(|source| HarnessError::Codebook {
                    bits,
                    variance: drift_variance,
                    source,
                })?,
            )
        };
        Self::with_codebook(device_count, bits, drift_variance, period, codebook)
    }

    pub(crate) fn with_codebook(
        device_count: u32,
        bits: u32,
        drift_variance: f64,
        period: u32,
        codebook: Option<QuantizerCodebook>,
    ) -> Result<Self, HarnessError> {
        if period == 0 {
            return Err(HarnessError::Config("recalibration period must be at least 1".into()));
        }
        let hardware =
            HardwareProfile::identity(device_count as usize).map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(Self {
            device_count: device_count as usize,
            bits,
            drift_variance,
            period,
            codebook,
            hardware,
        })
    }

    pub fn period(&self) -> u32 {
        self.period
    }

    pub fn device_count(&self) -> usize {
        self.device_count
    }

    pub fn feedback(&self) -> PhaseFeedback<'_> {
        match (&self.codebook, self.bits) {
            (_, 0) => PhaseFeedback::None,
            (Some(cb), _) => PhaseFeedback::Quantized(cb),
            (None, _) => PhaseFeedback::Exact,
        }
    }

    pub(crate) fn fresh_state(&self) -> Result<DeviceEstimationState, HarnessError> {
        Ok(variant_b_init(self.period, &self.hardware)?)
    }

    /// One calibration cycle: `T` rounds of estimation plus aggregation.
    pub fn run_trial(&self, seed: u64) -> Result<Vec<RoundOutcome>, HarnessError> {
        let mut scratch = Scratch::new(self.device_count);
        let mut state = self.fresh_state()?;
        let mut out = Vec::with_capacity(self.period as usize);
        self.run_trial_with(seed, &mut state, &mut scratch, |_, o| out.push(*o))?;
        Ok(out)
    }

    pub(crate) fn run_trial_with(
        &self,
        seed: u64,
        state: &mut DeviceEstimationState,
        scratch: &mut Scratch,
        mut sink: impl FnMut(usize, &RoundOutcome),
    ) -> Result<(), HarnessError> {
        let mut rng = trial_rng(seed);
        state.recalibrate(&self.hardware)?;
        let feedback = self.feedback();
        for t in 0..self.period as usize {
            variant_b_round_into(
                state,
                feedback,
                self.drift_variance,
                &mut rng,
                &mut scratch.phase_errors,
            )?;
            let outcome = aggregate(scratch, &mut rng)?;
            sink(t, &outcome);
        }
        Ok(())
    }
}
