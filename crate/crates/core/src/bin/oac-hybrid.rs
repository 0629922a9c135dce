use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use oac_hybrid::harness::{
    format_float, sweep_bits, sweep_period, HarnessError, SweepConfig, SweepResult, VariantSelection,
};
use oac_hybrid::oac::variant_a_mse;
use oac_hybrid::quantizer::{lloyd_max_codebook, uniform_codebook, LloydMaxOptions};

#[derive(Parser)]
#[command(
    name = "oac-hybrid",
    version,
    about = "Over-the-air computation MSE under hybrid channel estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// MSE against the number of feedback bits N.
    SweepBits(SweepArgs),
    /// Variant B MSE against the recalibration period T.
    SweepPeriod(SweepArgs),
    /// Closed-form Variant A MSE.
    Lemma1 {
        #[arg(long, default_value_t = 10)]
        devices: u32,
        #[arg(long, value_delimiter = ',', default_values_t = vec![0, 1, 2, 3, 4, 5, 6])]
        bits: Vec<u32>,
    },
    /// Print quantizer levels, one per line.
    Codebook {
        #[arg(long, value_enum, default_value_t = Family::Uniform)]
        family: Family,
        #[arg(long)]
        bits: u32,
        /// Training variance of the Lloyd-Max codebook.
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[command(flatten)]
        lloyd_max: LloydMaxArgs,
    },
}

#[derive(Args)]
struct LloydMaxArgs {
    /// Lloyd-Max stopping threshold on the largest level change, in units of sigma.
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
    #[arg(long, default_value_t = 10_000)]
    max_iterations: usize,
}

impl LloydMaxArgs {
    fn options(&self) -> LloydMaxOptions {
        LloydMaxOptions {
            tolerance: self.tolerance,
            max_iterations: self.max_iterations,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Uniform,
    LloydMax,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    A,
    B,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value_t = VariantArg::Both)]
    variant: VariantArg,
    #[arg(long, default_value_t = 10)]
    devices: u32,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0, 1, 2, 3, 4, 5, 6])]
    bits: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![0.001, 0.01, 0.1, 0.5])]
    alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 4, 8, 16, 32])]
    period: Vec<u32>,
    #[arg(long, default_value_t = 100_000)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Nominal transmit power; recorded only.
    #[arg(long, default_value_t = 1.0)]
    power: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    lloyd_max: LloydMaxArgs,
}

impl SweepArgs {
    fn config(&self) -> SweepConfig {
        SweepConfig {
            variant: match self.variant {
                VariantArg::A => VariantSelection::A,
                VariantArg::B => VariantSelection::B,
                VariantArg::Both => VariantSelection::BothForComparison,
            },
            device_count: self.devices,
            bits: self.bits.clone(),
            drift_variances: self.alpha.clone(),
            recalibration_periods: self.period.clone(),
            trials: self.trials,
            seed: self.seed,
            nominal_power: self.power,
            lloyd_max: self.lloyd_max.options(),
        }
    }
}

fn run_sweep(
    args: &SweepArgs,
    sweep: fn(&SweepConfig) -> Result<SweepResult, HarnessError>,
) -> Result<(), HarnessError> {
    let Format::Csv = args.format;
    let config = args.config();
    let result = match args.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Config(e.to_string()))?
            .install(|| sweep(&config))?,
        None => sweep(&config)?,
    };
    match &args.out {
        Some(path) => result.write_csv(path),
        None => std::io::stdout()
            .write_all(result.to_csv().as_bytes())
            .map_err(|source| HarnessError::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::SweepBits(args) => run_sweep(args, sweep_bits),
        Command::SweepPeriod(args) => run_sweep(args, sweep_period),
        Command::Lemma1 { devices, bits } => {
            println!("K,N,mse");
            bits.iter().try_for_each(|&n| {
                let mse = variant_a_mse(*devices, n).map_err(|e| HarnessError::Config(e.to_string()))?;
                println!("{devices},{n},{}", format_float(mse));
                Ok(())
            })
        }
        Command::Codebook {
            family,
            bits,
            alpha,
            lloyd_max,
        } => {
            let cb = match family {
                Family::Uniform => uniform_codebook(*bits),
                Family::LloydMax => lloyd_max_codebook(*bits, *alpha, lloyd_max.options()),
            };
            match cb {
                Ok(cb) => {
                    cb.levels().iter().for_each(|q| println!("{}", format_float(*q)));
                    Ok(())
                }
                Err(source) => Err(HarnessError::Codebook {
                    bits: *bits,
                    variance: *alpha,
                    source,
                }),
            }
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
