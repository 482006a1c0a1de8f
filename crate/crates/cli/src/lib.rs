//! Library half of the `tsk` command: argument parsing, configuration,
//! CSV ingestion and the four subcommands.

pub mod commands;
pub mod config;
pub mod data;

use std::io::Write;
use std::path::PathBuf;

use anyhow::Result;
use clap::{Parser, Subcommand};

use config::{RunConfig, Settings};

#[derive(Parser, Debug)]
#[command(name = "tsk", version, about = "Fit and apply TSK fuzzy models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Command {
    /// Fit a model and write it to --model
    Fit {
        /// Flat TOML file of settings; flags take precedence
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Write one prediction per input row
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output CSV (stdout when absent)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Column to ignore, defaults to the model's target name
        #[arg(long)]
        target: Option<String>,
    },
    /// Print accuracy, or RMSE and R^2
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        target: Option<String>,
    },
    /// Compare analytic gradients with finite differences on random models
    Gradcheck {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Runs one command; `Ok(false)` means it completed but failed its check.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<bool> {
    match cli.command {
        Command::Fit { config, settings } => {
            let file = match config {
                Some(path) => Settings::from_toml_file(&path)?,
                None => Settings::default(),
            };
            let cfg = RunConfig::resolve(settings.over(file))?;
            commands::cmd_fit(&cfg, out)?;
        }
        Command::Predict {
            model,
            data,
            out: path,
            target,
        } => match path {
            Some(p) => {
                let mut buf = Vec::new();
                commands::cmd_predict(&model, &data, target.as_deref(), &mut buf)?;
                std::fs::write(&p, buf).map_err(|e| anyhow::anyhow!("writing {}: {e}", p.display()))?;
            }
            None => commands::cmd_predict(&model, &data, target.as_deref(), out)?,
        },
        Command::Eval { model, data, target } => commands::cmd_eval(&model, &data, target.as_deref(), out)?,
        Command::Gradcheck { seed } => return commands::cmd_gradcheck(seed, out),
    }
    Ok(true)
}
