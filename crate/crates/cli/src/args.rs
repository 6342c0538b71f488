use std::path::PathBuf;

use autobid_core::instances::ValueLaw;
use clap::{Args, Parser, Subcommand};

use crate::commands::SweepFamily;
use crate::config::{Format, MechanismKind, MechanismSpec};

#[derive(Debug, Parser)]
#[command(name = "autobid", version, about = "Auto-bidding auction simulator and bound checker")]
pub struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct MechanismArgs {
    #[arg(long, value_enum, default_value = "second-price")]
    pub mechanism: MechanismKind,
    /// Ratio parameter of the randomized rules.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Probability parameter of the randomized rules.
    #[arg(long)]
    pub p: Option<f64>,
    /// Reserve price for second price.
    #[arg(long)]
    pub reserve: Option<f64>,
}

impl MechanismArgs {
    pub fn spec(&self) -> MechanismSpec {
        MechanismSpec { kind: self.mechanism, alpha: self.alpha, p: self.p, reserve: self.reserve }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the four-class LP and check the closed-form dual certificate.
    Lp {
        /// Defaults to the largest certified alpha at p = 2/5, (1 + sqrt 85) / 6.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.4)]
        p: f64,
    },
    /// Build the two-bidder tight example and verify its equilibrium.
    Tight {
        /// Defaults to (1 + sqrt 85) / 6.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0.4)]
        p: f64,
        #[arg(long, default_value_t = 1e-4)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-9)]
        delta: f64,
        #[arg(long, default_value_t = 1e-9)]
        gamma: f64,
    },
    /// Build the 2k-bidder lower-bound instance and check it under a rule.
    Impossibility {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        a: f64,
        #[arg(long = "v")]
        v: f64,
        #[arg(long, default_value_t = 1e-6)]
        epsilon: f64,
        /// Tie-break increment; defaults to V * 1e-9.
        #[arg(long)]
        rho: Option<f64>,
        /// Defaults to the rule's probed max probability.
        #[arg(long)]
        pi_star: Option<f64>,
        /// Defaults to the rule's probed max threshold.
        #[arg(long)]
        m_star: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        delta: f64,
        #[arg(long, default_value_t = 0.01)]
        gamma: f64,
        /// Only simulate welfare; skips best responses, which are costly for
        /// large k.
        #[arg(long)]
        welfare_only: bool,
        #[command(flatten)]
        mechanism: MechanismArgs,
    },
    /// Run dynamics on random instances over an (alpha, p) grid; emits CSV.
    Sweep {
        #[arg(long, value_enum, default_value = "rand")]
        family: SweepFamily,
        #[arg(long, default_value_t = 1.0)]
        alpha_min: f64,
        /// Defaults to alpha-min.
        #[arg(long)]
        alpha_max: Option<f64>,
        #[arg(long, default_value_t = 1)]
        alpha_steps: usize,
        #[arg(long, value_delimiter = ',', default_value = "0.4")]
        p: Vec<f64>,
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 2)]
        bidders: usize,
        #[arg(long, default_value_t = 4)]
        queries: usize,
        #[arg(long, default_value = "uniform")]
        law: ValueLaw,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        #[arg(long, default_value_t = 1e-6)]
        gamma: f64,
        #[arg(long, default_value_t = 200)]
        max_rounds: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Verify a profile on an instance file, or search for one by dynamics.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[command(flatten)]
        mechanism: MechanismArgs,
        /// Comma-separated multipliers; omitted means run dynamics.
        #[arg(long, value_delimiter = ',')]
        profile: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1e-6)]
        delta: f64,
        #[arg(long, default_value_t = 1e-6)]
        gamma: f64,
        #[arg(long, default_value_t = 200)]
        max_rounds: usize,
    },
    /// Write a seeded random instance file.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        bidders: usize,
        #[arg(long)]
        queries: usize,
        #[arg(long, default_value = "uniform")]
        law: ValueLaw,
    },
}
