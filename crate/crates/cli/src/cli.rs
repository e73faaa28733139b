use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "edss",
    version,
    about = "Entanglement distribution with a separable carrier for Bell-diagonal resources",
    after_help = "Exit status: 0 when every check passes, 1 on a verified failure, 2 on a usage error.\n\
                  EDSS_THREADS caps the number of worker threads."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every invariant suite and print a pass/fail table.
    Verify(VerifyArgs),
    /// Run the protocol on one resource and print the outcome as JSON.
    Protocol(ProtocolArgs),
    /// Run the protocol on every canonical grid state.
    Sweep(SweepArgs),
    /// Noise thresholds for the protocol, direct transmission and the heralded pair.
    Noise(NoiseArgs),
    /// Search general interactions for an improvement over the controlled-phase gate.
    Optimize(OptimizeArgs),
    /// Explicit separable decomposition of the carrier cut.
    Decompose(DecomposeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Output format; defaults to csv for sweep and noise, json otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn coefficient(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
        return Err(format!("{v} is outside [-1, 1]"));
    }
    Ok(v)
}

fn unit_interval(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !v.is_finite() || !(0.0..=1.0).contains(&v) {
        return Err(format!("{v} is outside [0, 1]"));
    }
    Ok(v)
}

fn grid_step(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    let n = (1.0 / v).round();
    if !v.is_finite() || v <= 0.0 || v > 1.0 || (n * v - 1.0).abs() > 1e-9 {
        return Err(format!("step {v} must be 1/n for a positive integer n"));
    }
    Ok(v)
}

#[derive(Debug, Args)]
pub struct StateArgs {
    /// Coefficient of Z_A X_B.
    #[arg(long, allow_negative_numbers = true, value_parser = coefficient)]
    pub s01: f64,
    /// Coefficient of X_A Z_B.
    #[arg(long, allow_negative_numbers = true, value_parser = coefficient)]
    pub s10: f64,
    /// Coefficient of Y_A Y_B.
    #[arg(long, allow_negative_numbers = true, value_parser = coefficient)]
    pub s11: f64,
    /// Bring a non-canonical state to canonical form instead of rejecting it.
    #[arg(long)]
    pub canonicalize: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Coefficient grid spacing.
    #[arg(long, default_value_t = 0.05, value_parser = grid_step)]
    pub step: f64,
    /// Spacing of the ancilla parameter grid.
    #[arg(long, default_value_t = 0.1, value_parser = grid_step)]
    pub s_step: f64,
    /// Random (s01, s10, 0) samples for the zero-s11 suite.
    #[arg(long, default_value_t = 1000)]
    pub theorem1_samples: usize,
    /// Random (state, interaction, s) samples for the gap-bound suite.
    #[arg(long, default_value_t = 10_000)]
    pub gap_samples: usize,
    #[arg(long, default_value_t = 0x5EED)]
    pub seed: u64,
    /// Write the full JSON report here.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[command(flatten)]
    pub state: StateArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Coefficient grid spacing.
    #[arg(long, default_value_t = 0.05, value_parser = grid_step)]
    pub step: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChannelArg {
    Depolarizing,
    PhaseFlip,
    Both,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    /// Coefficient of Z_A X_B; without a state the half-weight family is scanned.
    #[arg(long, allow_negative_numbers = true, value_parser = coefficient, requires_all = ["s10", "s11"])]
    pub s01: Option<f64>,
    #[arg(long, allow_negative_numbers = true, value_parser = coefficient, requires_all = ["s01", "s11"])]
    pub s10: Option<f64>,
    #[arg(long, allow_negative_numbers = true, value_parser = coefficient, requires_all = ["s01", "s10"])]
    pub s11: Option<f64>,
    /// Ancilla values for the lambda_1 = 1/2 family scanned when no state is given.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "0.1,0.25,0.5,0.9",
        conflicts_with = "s01"
    )]
    pub family: Vec<f64>,
    #[arg(long, value_enum, default_value_t = ChannelArg::Both)]
    pub channel: ChannelArg,
    #[arg(long)]
    pub canonicalize: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Independent simplex searches; restart 0 starts at the controlled-phase gate.
    #[arg(long, default_value_t = 32)]
    pub restarts: usize,
    /// Objective evaluations per restart.
    #[arg(long, default_value_t = 5000)]
    pub budget: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CutArg {
    C,
    A,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub state: StateArgs,
    /// Ancilla parameter; defaults to the protocol's choice.
    #[arg(long, value_parser = unit_interval)]
    pub s: Option<f64>,
    /// Cut to decompose; defaults to the carrier cut of the protocol's branch.
    #[arg(long, value_enum)]
    pub cut: Option<CutArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn protocol_flags_parse() {
        let cli = Cli::try_parse_from([
            "edss", "protocol", "--s01", "0.5", "--s10", "0.25", "--s11", "-0.25",
        ])
        .unwrap();
        match cli.command {
            Command::Protocol(a) => {
                assert_eq!((a.state.s01, a.state.s10, a.state.s11), (0.5, 0.25, -0.25))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_flags_parse() {
        let cli =
            Cli::try_parse_from(["edss", "sweep", "--step", "0.05", "--out", "grid.csv"]).unwrap();
        match cli.command {
            Command::Sweep(a) => {
                assert_eq!(a.step, 0.05);
                assert_eq!(a.output.out.unwrap(), PathBuf::from("grid.csv"));
                assert_eq!(a.output.format, None);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_range_coefficient_is_rejected() {
        let err = Cli::try_parse_from([
            "edss", "protocol", "--s01", "2.0", "--s10", "0", "--s11", "0",
        ])
        .unwrap_err();
        assert!(err.to_string().contains("outside [-1, 1]"));
        assert!(Cli::try_parse_from(["edss", "sweep", "--step", "0.3"]).is_err());
        assert!(Cli::try_parse_from([
            "edss", "protocol", "--s01", "x", "--s10", "0", "--s11", "0"
        ])
        .is_err());
    }

    #[test]
    fn noise_state_flags_come_together() {
        assert!(Cli::try_parse_from(["edss", "noise", "--s01", "0.5"]).is_err());
        let cli = Cli::try_parse_from(["edss", "noise", "--family", "0.2,0.4"]).unwrap();
        match cli.command {
            Command::Noise(a) => assert_eq!(a.family, vec![0.2, 0.4]),
            other => panic!("{other:?}"),
        }
    }
}
