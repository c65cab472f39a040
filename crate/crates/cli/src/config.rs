//! Run configuration: defaults, optional JSON file, command-line overrides.

use std::fs;
use std::path::PathBuf;

use clap::Args;
use serde::Deserialize;

use pingpong_core::attack::{AttackKind, AttackVariant};
use pingpong_core::protocol::{ChannelConfig, ProtocolConfig};

/// Attack variant names accepted on the command line and in config files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    /// No eavesdropper.
    None,
    /// The original 50%-loss attack.
    Wojcik,
    /// The lossless attack.
    Improved,
}

impl From<VariantArg> for AttackKind {
    fn from(arg: VariantArg) -> Self {
        match arg {
            VariantArg::None => AttackKind::None,
            VariantArg::Wojcik => AttackKind::Wojcik,
            VariantArg::Improved => AttackKind::Improved,
        }
    }
}

/// Flags shared by every subcommand. Any flag given here overrides the same
/// field in the JSON configuration file.
#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration file (fields mirror these flags in snake_case).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Attack variant [default: none].
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    /// Apply the probabilistic symmetrization step on the return leg.
    #[arg(long)]
    pub symmetrize: bool,
    /// Channel transmission efficiency in [0, 1] [default: 1.0].
    #[arg(long)]
    pub eta: Option<f64>,
    /// Rounds per simulated session [default: 100000].
    #[arg(long)]
    pub rounds: Option<u64>,
    /// Session seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Probability that a round runs in control mode [default: 0.5].
    #[arg(long)]
    pub control_probability: Option<f64>,
    /// Fraction of rounds the eavesdropper attacks [default: 1.0].
    #[arg(long)]
    pub attack_fraction: Option<f64>,
    /// Draw the control basis uniformly from {z, x} instead of z only.
    #[arg(long)]
    pub two_basis: bool,
    /// First efficiency of the sweep grid [default: 0.0].
    #[arg(long)]
    pub eta_start: Option<f64>,
    /// Last efficiency of the sweep grid [default: 1.0].
    #[arg(long)]
    pub eta_stop: Option<f64>,
    /// Number of grid points [default: 101].
    #[arg(long)]
    pub eta_steps: Option<usize>,
    /// Write the report (JSON) or sweep table (CSV) to this file.
    #[arg(long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

/// The JSON configuration file's schema.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    variant: Option<VariantArg>,
    symmetrize: Option<bool>,
    eta: Option<f64>,
    rounds: Option<u64>,
    seed: Option<u64>,
    control_probability: Option<f64>,
    attack_fraction: Option<f64>,
    two_basis: Option<bool>,
    eta_start: Option<f64>,
    eta_stop: Option<f64>,
    eta_steps: Option<usize>,
    output: Option<PathBuf>,
}

/// A fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub variant: AttackKind,
    pub symmetrize: bool,
    pub eta: f64,
    pub rounds: u64,
    pub seed: u64,
    pub control_probability: f64,
    pub attack_fraction: f64,
    pub two_basis: bool,
    pub eta_start: f64,
    pub eta_stop: f64,
    pub eta_steps: usize,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Merges defaults, the optional config file, and command-line flags
    /// (highest precedence), then range-checks everything.
    pub fn resolve(args: &CommonArgs) -> Result<RunConfig, String> {
        let file = match &args.config {
            None => FileConfig::default(),
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|err| format!("cannot read config file {}: {err}", path.display()))?;
                serde_json::from_str(&text)
                    .map_err(|err| format!("cannot parse config file {}: {err}", path.display()))?
            }
        };
        let config = RunConfig {
            variant: args
                .variant
                .or(file.variant)
                .map(AttackKind::from)
                .unwrap_or(AttackKind::None),
            symmetrize: args.symmetrize || file.symmetrize.unwrap_or(false),
            eta: args.eta.or(file.eta).unwrap_or(1.0),
            rounds: args.rounds.or(file.rounds).unwrap_or(100_000),
            seed: args.seed.or(file.seed).unwrap_or(0),
            control_probability: args
                .control_probability
                .or(file.control_probability)
                .unwrap_or(0.5),
            attack_fraction: args.attack_fraction.or(file.attack_fraction).unwrap_or(1.0),
            two_basis: args.two_basis || file.two_basis.unwrap_or(false),
            eta_start: args.eta_start.or(file.eta_start).unwrap_or(0.0),
            eta_stop: args.eta_stop.or(file.eta_stop).unwrap_or(1.0),
            eta_steps: args.eta_steps.or(file.eta_steps).unwrap_or(101),
            output: args.output.clone().or(file.output),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), String> {
        let unit = |name: &str, value: f64| -> Result<(), String> {
            if (0.0..=1.0).contains(&value) {
                Ok(())
            } else {
                Err(format!("{name} must lie in [0, 1], got {value}"))
            }
        };
        unit("eta", self.eta)?;
        unit("control_probability", self.control_probability)?;
        unit("attack_fraction", self.attack_fraction)?;
        unit("eta_start", self.eta_start)?;
        unit("eta_stop", self.eta_stop)?;
        if self.rounds == 0 {
            return Err("rounds must be at least 1".into());
        }
        if self.eta_steps == 0 {
            return Err("eta_steps must be at least 1".into());
        }
        if self.eta_start > self.eta_stop {
            return Err("eta_start must not exceed eta_stop".into());
        }
        Ok(())
    }

    /// The attack variant this configuration selects.
    pub fn attack(&self) -> AttackVariant {
        AttackVariant::new(self.variant, self.symmetrize)
    }

    /// The protocol parameters this configuration selects.
    pub fn protocol(&self) -> ProtocolConfig {
        ProtocolConfig {
            control_probability: self.control_probability,
            attack: self.attack(),
            attack_fraction: self.attack_fraction,
            two_basis_control: self.two_basis,
            rounds: self.rounds,
            seed: self.seed,
        }
    }

    /// The channel parameters this configuration selects.
    pub fn channel(&self) -> ChannelConfig {
        ChannelConfig::with_eta(self.eta)
    }

    /// The efficiency grid for sweeps, inclusive of both endpoints.
    pub fn eta_grid(&self) -> Vec<f64> {
        if self.eta_steps == 1 {
            return vec![self.eta_start];
        }
        (0..self.eta_steps)
            .map(|i| {
                self.eta_start
                    + (self.eta_stop - self.eta_start) * (i as f64 / (self.eta_steps - 1) as f64)
            })
            .collect()
    }
}
