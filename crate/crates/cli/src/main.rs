mod eval;
mod input;
mod out;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eval::{Metric, Params, SweepKey};
use me_kit::metrics::ThetaConvention;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn usage(m: impl Into<String>) -> Self {
        CliError { code: 2, message: m.into() }
    }
}

impl From<me_kit::Error> for CliError {
    fn from(e: me_kit::Error) -> Self {
        CliError::usage(e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(name = "me-kit", version, about = "Matrix-exponential channel laws and link metrics")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Build and validate a channel, print its summary.
    Channel {
        #[arg(long)]
        spec: PathBuf,
        /// Override the mean SNR of the spec.
        #[arg(long = "S")]
        s: Option<f64>,
    },
    /// Evaluate a metric at one point or along a sweep.
    Metric {
        #[command(flatten)]
        common: Common,
        /// `key=start:end:n`, n points including both ends.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        out: OutFormat,
    },
    /// Compare the closed form with Monte Carlo.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1_000_000)]
        n: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Throughput-optimal rate along a sweep of the normalized threshold.
    Optimize {
        #[arg(long, value_enum)]
        metric: OptMetric,
        #[arg(long)]
        spec: PathBuf,
        /// `start:end:n`.
        #[arg(long = "theta-sweep")]
        theta_sweep: String,
        #[arg(long, value_enum, default_value_t = OutFormat::Json)]
        out: OutFormat,
    },
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, value_enum)]
    pub metric: Metric,
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub params: Params,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum OptMetric {
    Arq,
    HarqPersistent,
    ArqInterference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Convention {
    #[default]
    Absolute,
    PerUnitMean,
}

impl From<Convention> for ThetaConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Absolute => ThetaConvention::Absolute,
            Convention::PerUnitMean => ThetaConvention::PerUnitMean,
        }
    }
}

/// Parses `start:end:n` into n evenly spaced points.
pub fn parse_range(s: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::usage(format!("range `{s}` is not start:end:n"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: f64 = parts[0].trim().parse().map_err(|_| bad())?;
    let b: f64 = parts[1].trim().parse().map_err(|_| bad())?;
    let n: usize = parts[2].trim().parse().map_err(|_| bad())?;
    if n == 0 || !a.is_finite() || !b.is_finite() {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    Ok((0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            a * (1.0 - f) + b * f
        })
        .collect())
}

fn parse_sweep(s: &str) -> Result<(SweepKey, Vec<f64>), CliError> {
    let (k, r) = s
        .split_once('=')
        .ok_or_else(|| CliError::usage(format!("sweep `{s}` is not key=start:end:n")))?;
    let key = SweepKey::from_str(k.trim(), true).map_err(|_| CliError::usage(format!("unknown sweep key `{k}`")))?;
    Ok((key, parse_range(r)?))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.cmd {
        Cmd::Channel { spec, s } => {
            let sc = input::load(Some(&spec))?;
            let (value, ok) = eval::channel_summary(sc.channel()?, s);
            println!("{}", out::json_string(&value));
            if ok {
                Ok(())
            } else {
                Err(CliError { code: 2, message: String::new() })
            }
        }
        Cmd::Metric { common, sweep, out } => {
            let sc = input::load(common.spec.as_deref())?;
            let sweep = sweep.as_deref().map(parse_sweep).transpose()?;
            let rows = eval::metric_rows(common.metric, &sc, &common.params, sweep)?;
            match out {
                OutFormat::Json => println!("{}", out::json_string(&out::rows_json(&rows))),
                OutFormat::Csv => print!("{}", out::rows_csv(&rows)?),
            }
            Ok(())
        }
        Cmd::Verify { common, n, seed } => {
            let sc = input::load(common.spec.as_deref())?;
            let v = eval::verify(common.metric, &sc, &common.params, n, seed)?;
            println!("{}", out::json_string(&v.to_json()));
            if v.pass {
                Ok(())
            } else {
                Err(CliError { code: 1, message: String::new() })
            }
        }
        Cmd::Optimize { metric, spec, theta_sweep, out } => {
            let sc = input::load(Some(&spec))?;
            let thetas = parse_range(&theta_sweep)?;
            let pts = eval::optimize(metric, &sc, &thetas)?;
            match out {
                OutFormat::Json => println!("{}", out::json_string(&out::optimize_json(&pts))),
                OutFormat::Csv => print!("{}", out::optimize_csv(&pts)?),
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if !e.message.is_empty() {
                eprintln!("error: {}", e.message);
            }
            ExitCode::from(e.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:3").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("2:5:1").unwrap(), vec![2.0]);
        assert!(parse_range("0:1").is_err());
        assert!(parse_range("0:1:0").is_err());
        let (k, v) = parse_sweep("S=0.1:10:20").unwrap();
        assert_eq!(k, SweepKey::S);
        assert_eq!(v.len(), 20);
        assert!((v[19] - 10.0).abs() < 1e-15);
    }

    #[test]
    fn clap_definition() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
