use std::fmt::Write;

use super::{SweepResult, SweepRow};

pub const CSV_HEADER: &str = "variant,K,N,alpha,T,t,trials,mse,stderr,seed";

/// Scientific notation with 17 significant digits; round-trips every `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_row(out: &mut String, row: &SweepRow) {
    let opt = |v: Option<String>| v.unwrap_or_default();
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        row.variant,
        row.device_count,
        row.bits,
        opt(row.drift_variance.map(format_float)),
        opt(row.period.map(|t| t.to_string())),
        opt(row.round.map(|t| t.to_string())),
        row.trials,
        format_float(row.mse),
        format_float(row.stderr),
        row.seed,
    );
}

impl SweepResult {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            write_row(&mut out, row);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Variant;

    #[test]
    fn variant_a_row_leaves_b_fields_empty() {
        let r = SweepResult {
            rows: vec![SweepRow {
                variant: Variant::A,
                device_count: 10,
                bits: 2,
                drift_variance: None,
                period: None,
                round: None,
                trials: 4,
                mse: 3.0,
                stderr: 0.25,
                seed: 17,
            }],
        };
        assert_eq!(
            r.to_csv(),
            "variant,K,N,alpha,T,t,trials,mse,stderr,seed\n\
             A,10,2,,,,4,3.0000000000000000e0,2.5000000000000000e-1,17\n"
        );
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 8.267_619_772_367_581, 1e-300, f64::MAX] {
            assert_eq!(format_float(x).parse::<f64>().unwrap(), x);
        }
    }
}
