use std::collections::HashMap;
use std::path::Path;

use rayon::prelude::*;

use crate::oac::{MseAccumulator, MseEstimate};
use crate::quantizer::{lloyd_max_codebook, QuantizerCodebook};

use super::trial::Scratch;
use super::{derive_trial_seed, HarnessError, SweepConfig, Variant, VariantAPoint, VariantBPoint, VariantSelection};

/// Trials per parallel work item. Fixed so that batch boundaries, and hence
/// the merge order of partial sums, never depend on the worker count.
const BATCH_TRIALS: u32 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variant: Variant,
    pub device_count: u32,
    pub bits: u32,
    /// Drift variance α; `None` for Variant A.
    pub drift_variance: Option<f64>,
    /// Recalibration period `T`; `None` for Variant A.
    pub period: Option<u32>,
    /// Rounds since calibration at the start of the reported round; `None`
    /// for rows averaged over a whole calibration cycle (and for Variant A).
    pub round: Option<u32>,
    pub trials: u32,
    pub mse: f64,
    pub stderr: f64,
    /// Seed of trial 0 of the row's grid point.
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        std::fs::write(path, self.to_csv()).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    /// Rows of one Variant B series in round order.
    pub fn series(&self, bits: u32, drift_variance: f64, period: u32) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| {
                r.variant == Variant::B
                    && r.bits == bits
                    && r.drift_variance == Some(drift_variance)
                    && r.period == Some(period)
                    && r.round.is_some()
            })
            .collect()
    }

    /// Row averaged over whole cycles (Variant B) or the single Variant A row.
    pub fn summary(
        &self,
        variant: Variant,
        bits: u32,
        drift_variance: Option<f64>,
        period: Option<u32>,
    ) -> Option<&SweepRow> {
        self.rows.iter().find(|r| {
            r.variant == variant
                && r.bits == bits
                && r.drift_variance == drift_variance
                && r.period == period
                && r.round.is_none()
        })
    }
}

fn batch_ranges(trials: u32) -> Vec<(u32, u32)> {
    (0..trials.div_ceil(BATCH_TRIALS))
        .map(|b| {
            let start = b * BATCH_TRIALS;
            (start, (start + BATCH_TRIALS).min(trials))
        })
        .collect()
}

fn run_variant_a(point: &VariantAPoint, master: u64, index: u32, trials: u32) -> Result<MseEstimate, HarnessError> {
    let partials = batch_ranges(trials)
        .into_par_iter()
        .map(|(start, end)| {
            let mut scratch = Scratch::new(point.device_count());
            let mut acc = MseAccumulator::default();
            for trial in start..end {
                let outcome = point.run_trial_with(derive_trial_seed(master, index, trial), &mut scratch)?;
                acc.push(outcome.squared_error);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut total = MseAccumulator::default();
    partials.iter().for_each(|p| total.merge(p));
    Ok(total.estimate()?)
}

struct CycleStats {
    per_round: Vec<MseEstimate>,
    cycle_mean: MseEstimate,
}

fn run_variant_b(point: &VariantBPoint, master: u64, index: u32, trials: u32) -> Result<CycleStats, HarnessError> {
    let period = point.period() as usize;
    let partials = batch_ranges(trials)
        .into_par_iter()
        .map(|(start, end)| {
            let mut scratch = Scratch::new(point.device_count());
            let mut state = point.fresh_state()?;
            let mut per_round = vec![MseAccumulator::default(); period];
            let mut cycle = MseAccumulator::default();
            for trial in start..end {
                let mut cycle_sum = 0.0;
                point.run_trial_with(
                    derive_trial_seed(master, index, trial),
                    &mut state,
                    &mut scratch,
                    |t, o| {
                        per_round[t].push(o.squared_error);
                        cycle_sum += o.squared_error;
                    },
                )?;
                cycle.push(cycle_sum / period as f64);
            }
            Ok((per_round, cycle))
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let mut per_round = vec![MseAccumulator::default(); period];
    let mut cycle = MseAccumulator::default();
    for (rounds, c) in &partials {
        for (acc, part) in per_round.iter_mut().zip(rounds) {
            acc.merge(part);
        }
        cycle.merge(c);
    }
    Ok(CycleStats {
        per_round: per_round.iter().map(|a| a.estimate()).collect::<Result<_, _>>()?,
        cycle_mean: cycle.estimate()?,
    })
}

fn train_codebooks(config: &SweepConfig) -> Result<HashMap<(u32, u64), QuantizerCodebook>, HarnessError> {
    let mut books = HashMap::new();
    for &bits in &config.bits {
        for &alpha in &config.drift_variances {
            if bits == 0 || alpha == 0.0 {
                continue;
            }
            let cb = lloyd_max_codebook(bits, alpha, config.lloyd_max).map_err(|source| HarnessError::Codebook {
                bits,
                variance: alpha,
                source,
            })?;
            books.insert((bits, alpha.to_bits()), cb);
        }
    }
    Ok(books)
}

fn b_point(
    config: &SweepConfig,
    books: &HashMap<(u32, u64), QuantizerCodebook>,
    bits: u32,
    alpha: f64,
    period: u32,
) -> Result<VariantBPoint, HarnessError> {
    let codebook = books.get(&(bits, alpha.to_bits())).cloned();
    VariantBPoint::with_codebook(config.device_count, bits, alpha, period, codebook)
}

fn b_rows(
    config: &SweepConfig,
    bits: u32,
    alpha: f64,
    period: u32,
    index: u32,
    stats: &CycleStats,
    include_summary: bool,
) -> Vec<SweepRow> {
    let seed = derive_trial_seed(config.seed, index, 0);
    let row = |round: Option<u32>, est: &MseEstimate| SweepRow {
        variant: Variant::B,
        device_count: config.device_count,
        bits,
        drift_variance: Some(alpha),
        period: Some(period),
        round,
        trials: config.trials,
        mse: est.mean,
        stderr: est.stderr,
        seed,
    };
    let mut rows = Vec::with_capacity(stats.per_round.len() + 1);
    if include_summary {
        rows.push(row(None, &stats.cycle_mean));
    }
    for (t, est) in stats.per_round.iter().enumerate() {
        rows.push(row(Some(t as u32), est));
    }
    rows
}

fn point_index(i: usize) -> Result<u32, HarnessError> {
    u32::try_from(i).map_err(|_| HarnessError::Config("too many grid points".into()))
}

/// MSE against the number of feedback bits.
///
/// Variant A points (indexed by position in the bits grid) report one round
/// per trial. Variant B points, for every (N, α, T), run whole calibration
/// cycles and report the MSE averaged uniformly over the cycle's rounds (row
/// with empty `t`) together with the MSE of every round `t < T`.
pub fn sweep_bits(config: &SweepConfig) -> Result<SweepResult, HarnessError> {
    let with_b = config.variant.includes(Variant::B);
    config.validate(with_b)?;
    let mut rows = Vec::new();
    let n_bits = config.bits.len();

    if config.variant.includes(Variant::A) {
        for (i, &bits) in config.bits.iter().enumerate() {
            let index = point_index(i)?;
            let point = VariantAPoint::new(config.device_count, bits)?;
            let est = run_variant_a(&point, config.seed, index, config.trials)?;
            rows.push(SweepRow {
                variant: Variant::A,
                device_count: config.device_count,
                bits,
                drift_variance: None,
                period: None,
                round: None,
                trials: config.trials,
                mse: est.mean,
                stderr: est.stderr,
                seed: derive_trial_seed(config.seed, index, 0),
            });
        }
    }

    if with_b {
        let books = train_codebooks(config)?;
        let (n_alpha, n_period) = (config.drift_variances.len(), config.recalibration_periods.len());
        for (i_n, &bits) in config.bits.iter().enumerate() {
            for (i_a, &alpha) in config.drift_variances.iter().enumerate() {
                for (i_t, &period) in config.recalibration_periods.iter().enumerate() {
                    let index = point_index(n_bits + (i_n * n_alpha + i_a) * n_period + i_t)?;
                    let point = b_point(config, &books, bits, alpha, period)?;
                    let stats = run_variant_b(&point, config.seed, index, config.trials)?;
                    rows.extend(b_rows(config, bits, alpha, period, index, &stats, true));
                }
            }
        }
    }
    Ok(SweepResult { rows })
}

/// Variant B MSE against the recalibration period.
///
/// For every (α, N, T) reports the MSE of each round `t < T` of the cycle; the
/// row with `t = T - 1` is the last round before recalibration.
pub fn sweep_period(config: &SweepConfig) -> Result<SweepResult, HarnessError> {
    if config.variant == VariantSelection::A {
        return Err(HarnessError::Config(
            "the period sweep applies to Variant B only".into(),
        ));
    }
    config.validate(true)?;
    let books = train_codebooks(config)?;
    let (n_bits, n_period) = (config.bits.len(), config.recalibration_periods.len());
    let mut rows = Vec::new();
    for (i_a, &alpha) in config.drift_variances.iter().enumerate() {
        for (i_n, &bits) in config.bits.iter().enumerate() {
            for (i_t, &period) in config.recalibration_periods.iter().enumerate() {
                let index = point_index((i_a * n_bits + i_n) * n_period + i_t)?;
                let point = b_point(config, &books, bits, alpha, period)?;
                let stats = run_variant_b(&point, config.seed, index, config.trials)?;
                rows.extend(b_rows(config, bits, alpha, period, index, &stats, false));
            }
        }
    }
    Ok(SweepResult { rows })
}
