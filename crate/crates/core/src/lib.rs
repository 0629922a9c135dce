//! Monte Carlo simulation of coherent over-the-air computation (OAC) with a
//! hybrid reciprocity/feedback channel estimation scheme.
//!
//! `K` devices transmit simultaneously and the AP receives the superposition,
//! which after channel-inversion precoding estimates the sum of the device
//! values. Coherence depends on each device's estimate of its uplink channel
//! phase. Two estimation variants are modelled:
//!
//! * **Variant A**: amplitude by reciprocity, phase by uniformly quantized
//!   feedback from the AP ([`protocol::variant_a_round`]).
//! * **Variant B**: amplitude and phase by calibrated reciprocity, which drifts
//!   with oscillator phase noise, corrected by Lloyd-Max quantized feedback of
//!   each round's fresh drift ([`protocol::variant_b_round`]).
//!
//! The [`harness`] module runs seeded, parallel Monte Carlo sweeps of the MSE
//! against the number of feedback bits and against the recalibration period.

pub mod angle;
pub mod channel;
pub mod gaussian;
pub mod harness;
pub mod oac;
pub mod protocol;
pub mod quantizer;
