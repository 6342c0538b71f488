//! Command-line front end for `autobid-core`: instance files, experiment
//! drivers and JSON/CSV output.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod output;

use autobid_core::lpbound::alpha_star;
use autobid_core::BidProfile;

use crate::args::{Cli, Command};
use crate::commands::{ImpossibilityParams, SweepParams};
use crate::config::{builder, ExperimentConfig, Format, InstanceSource};
use crate::error::{CliError, Result};

pub use error::CliError as Error;

/// What a command produced.
#[derive(Debug, Clone)]
pub struct Report {
    pub text: String,
    /// False when the checked claim failed; maps to exit code 1.
    pub claim_ok: bool,
    /// Human-readable remarks for stderr.
    pub notes: Vec<String>,
}

fn json_only(config: &ExperimentConfig) -> Result<()> {
    match config.format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Usage(format!("{} has no CSV form", config.command))),
    }
}

pub fn run(cli: Cli) -> Result<Report> {
    let output = cli.output.as_ref().map(|p| p.display().to_string());
    let cfg = |name: &str| ExperimentConfig::new(name, cli.format, output.clone());
    match cli.command {
        Command::Lp { alpha, p } => {
            let alpha = alpha.unwrap_or_else(alpha_star);
            let config = cfg("lp");
            let out = commands::cmd_lp(alpha, p)?;
            let text = match cli.format {
                Format::Json => output::json(&config, &out)?,
                Format::Csv => output::lp_csv(&out)?,
            };
            let notes = if out.certified { vec![] } else { vec!["dual certificate infeasible".into()] };
            Ok(Report { text, claim_ok: out.certified, notes })
        }
        Command::Tight { alpha, p, epsilon, delta, gamma } => {
            let alpha = alpha.unwrap_or_else(alpha_star);
            let mut config = cfg("tight");
            config.source = builder("tight-example", &[("alpha", alpha), ("p", p), ("epsilon", epsilon)]);
            config.delta = Some(delta);
            config.gamma = Some(gamma);
            config.validate()?;
            json_only(&config)?;
            let out = commands::cmd_tight(alpha, p, epsilon, delta, gamma)?;
            Ok(Report { text: output::json(&config, &out)?, claim_ok: out.claim_ok(), notes: vec![] })
        }
        Command::Impossibility { k, a, v, epsilon, rho, pi_star, m_star, delta, gamma, welfare_only, mechanism } => {
            let mut config = cfg("impossibility");
            let mut params = vec![("k", k as f64), ("a", a), ("v", v), ("epsilon", epsilon)];
            params.extend(rho.map(|r| ("rho", r)));
            params.extend(pi_star.map(|r| ("pi_star", r)));
            params.extend(m_star.map(|r| ("m_star", r)));
            config.source = builder("impossibility", &params);
            config.mechanism = Some(mechanism.spec());
            config.delta = Some(delta);
            config.gamma = Some(gamma);
            config.validate()?;
            json_only(&config)?;
            let rule = mechanism.spec().build()?;
            let p = ImpossibilityParams { k, a, v, epsilon, rho, pi_star, m_star, delta, gamma, welfare_only };
            let out = commands::cmd_impossibility(&p, &rule)?;
            let notes = out.warnings.iter().map(|w| format!("warning: {w}")).collect();
            Ok(Report { text: output::json(&config, &out)?, claim_ok: out.claim_ok(), notes })
        }
        Command::Sweep {
            family,
            alpha_min,
            alpha_max,
            alpha_steps,
            p,
            instances,
            bidders,
            queries,
            law,
            seed,
            delta,
            gamma,
            max_rounds,
            tol,
        } => {
            let mut config = cfg("sweep");
            config.seed = Some(seed);
            config.delta = Some(delta);
            config.gamma = Some(gamma);
            config.validate()?;
            let params = SweepParams {
                family,
                alphas: commands::linspace(alpha_min, alpha_max.unwrap_or(alpha_min), alpha_steps),
                ps: p,
                instances,
                bidders,
                queries,
                law,
                seed,
                delta,
                gamma,
                max_rounds,
                tol,
            };
            let out = commands::cmd_sweep(&params)?;
            let text = match cli.format {
                Format::Csv => output::sweep_csv(&out.rows)?,
                Format::Json => output::json(&config, &out)?,
            };
            Ok(Report { text, claim_ok: out.claim_ok(), notes: vec![out.summary()] })
        }
        Command::Verify { instance, mechanism, profile, delta, gamma, max_rounds } => {
            let mut config = cfg("verify");
            config.source = InstanceSource::File { path: instance.display().to_string() };
            config.mechanism = Some(mechanism.spec());
            config.delta = Some(delta);
            config.gamma = Some(gamma);
            config.validate()?;
            json_only(&config)?;
            let inst = io::read_instance(&instance)?;
            let rule = mechanism.spec().build()?;
            let profile = profile.map(BidProfile::new).transpose()?;
            let out = commands::cmd_verify(&inst, &rule, profile, delta, gamma, max_rounds)?;
            Ok(Report { text: output::json(&config, &out)?, claim_ok: out.claim_ok(), notes: vec![] })
        }
        Command::Gen { seed, bidders, queries, law } => {
            let config = cfg("gen");
            json_only(&config)?;
            let inst = commands::cmd_gen(seed, bidders, queries, law)?;
            Ok(Report { text: io::instance_to_string(&inst)?, claim_ok: true, notes: vec![] })
        }
    }
}
