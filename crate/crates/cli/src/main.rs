//! Command-line driver: runs the verification pipeline section by section
//! and emits deterministic JSON or markdown reports.
//!
//! Exit codes: 0 when no claim failed, 1 when any claim failed, 2 for
//! configuration or parse errors.

mod dsl;
mod report;
mod sections;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use report::{Report, RunConfig, Section};
use sections::Pipeline;

#[derive(Parser)]
#[command(name = "klein", version, about = "Exact verification workbench for the equivariant birational geometry of the simple group of order 168")]
struct Cli {
    /// Emit JSON instead of markdown.
    #[arg(long, global = true)]
    json: bool,

    /// Write the report to a file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Seed for every sampling step.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Sample count for point-mode certification.
    #[arg(long, global = true, default_value_t = 50)]
    samples: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the group and report its structure.
    Group,
    /// Invariant theory: fixed quartic, Molien counts, Hessian.
    Invariants,
    /// The 28 certified bitangents and their orbit data.
    Bitangents,
    /// The rank-8 lattice module and its verification.
    Picard,
    /// First cohomology collections and the stable-conjugacy verdict.
    Cohomology,
    /// Fibration models for given base data.
    Fibration {
        /// Degree of the base forms.
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Inline factored form for alpha, e.g. "(u)(u-v)".
        #[arg(long)]
        alpha: Option<String>,
        /// Inline factored form for beta.
        #[arg(long)]
        beta: Option<String>,
        /// Definition file holding `alpha = ...; beta = ...;`.
        #[arg(long, value_name = "FILE")]
        def: Option<PathBuf>,
        /// Which model to emphasize: prime or toric.
        #[arg(long, default_value = "toric")]
        model: String,
    },
    /// Build and certify the birational chain to the product of the plane
    /// and the line.
    Chain {
        /// Run the equivariance and round-trip certificates.
        #[arg(long, default_value_t = true)]
        certify: bool,
    },
    /// Run the whole pipeline.
    Report {
        /// Run every section (the default).
        #[arg(long, default_value_t = true)]
        all: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn parse_factor_input(
    n: usize,
    alpha: Option<String>,
    beta: Option<String>,
    def: Option<PathBuf>,
) -> Result<dsl::FactorLists> {
    if let Some(path) = def {
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        return dsl::parse_dsl(&text).map_err(|e| anyhow!("parse error {e}"));
    }
    match (alpha, beta) {
        (Some(a), Some(b)) => {
            let text = format!("alpha = {a}; beta = {b};");
            dsl::parse_dsl(&text).map_err(|e| anyhow!("parse error {e}"))
        }
        (None, None) => {
            let (alpha, beta) = sections::default_factors(n);
            Ok(dsl::FactorLists { n, alpha, beta })
        }
        _ => Err(anyhow!("--alpha and --beta must be given together")),
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let command_name = match &cli.command {
        Command::Group => "group",
        Command::Invariants => "invariants",
        Command::Bitangents => "bitangents",
        Command::Picard => "picard",
        Command::Cohomology => "cohomology",
        Command::Fibration { .. } => "fibration",
        Command::Chain { .. } => "chain",
        Command::Report { .. } => "report",
    };

    let mut config = RunConfig {
        command: command_name.into(),
        n: 1,
        samples: cli.samples,
        seed: cli.seed,
        model: String::new(),
        alpha: String::new(),
        beta: String::new(),
        format: if cli.json { "json" } else { "markdown" }.into(),
    };

    let pipeline = Pipeline::build().map_err(|e| anyhow!("group construction failed: {e}"))?;
    let mut sections: Vec<Section> = Vec::new();

    match cli.command {
        Command::Group => sections.push(pipeline.group_section()),
        Command::Invariants => sections.push(pipeline.invariants_section()),
        Command::Bitangents => sections.push(pipeline.bitangents_section()?),
        Command::Picard => {
            let (section, _) = pipeline.picard_section()?;
            sections.push(section);
        }
        Command::Cohomology => {
            let (picard_section, dp) = pipeline.picard_section()?;
            sections.push(picard_section);
            sections.push(pipeline.cohomology_section(&dp)?);
        }
        Command::Fibration {
            n,
            alpha,
            beta,
            def,
            model,
        } => {
            let factors = parse_factor_input(n, alpha, beta, def)?;
            if factors.n != n && n != 1 {
                return Err(anyhow!(
                    "--n {} disagrees with the parsed degree {}",
                    n,
                    factors.n
                ));
            }
            let kind = sections::model_kind(&model)?;
            config.n = factors.n;
            config.model = model;
            config.alpha = sections::factors_to_string(&factors.alpha);
            config.beta = sections::factors_to_string(&factors.beta);
            sections.push(pipeline.fibration_section(
                factors.n,
                factors.alpha,
                factors.beta,
                kind,
            )?);
        }
        Command::Chain { certify: _ } => {
            sections.push(pipeline.chain_section(cli.samples, cli.seed)?);
        }
        Command::Report { all: _ } => {
            config.model = "toric".into();
            let (alpha, beta) = sections::default_factors(1);
            config.alpha = sections::factors_to_string(&alpha);
            config.beta = sections::factors_to_string(&beta);
            sections.push(pipeline.group_section());
            sections.push(pipeline.invariants_section());
            sections.push(pipeline.bitangents_section()?);
            let (picard_section, dp) = pipeline.picard_section()?;
            sections.push(picard_section);
            sections.push(pipeline.cohomology_section(&dp)?);
            sections.push(pipeline.fibration_section(
                1,
                alpha,
                beta,
                klein_core::fibration::ModelKind::Toric,
            )?);
            sections.push(pipeline.chain_section(cli.samples, cli.seed)?);
        }
    }

    let report = Report {
        tool: "klein",
        version: env!("CARGO_PKG_VERSION"),
        schema: 1,
        config,
        sections,
    };

    let rendered = if cli.json {
        report.to_json()
    } else {
        report.to_markdown()
    };
    match &cli.out {
        Some(path) => std::fs::write(path, rendered)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{rendered}"),
    }
    Ok(ExitCode::from(report.exit_code() as u8))
}
