//! Command-line front end for `hyperfill`: every check as a subcommand with
//! deterministic JSON or CSV output.
//!
//! Exit codes: 0 every tolerance held, 1 a tolerance failed, 2 malformed
//! input, 3 input rejected by a mathematical precondition.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod grid_csv;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::*;
use config::{Format, RunConfig};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

/// Report schemas, by subcommand name.
pub const SCHEMAS: [(&str, &str); 6] = [
    ("curve-check", include_str!("../schemas/curve-check.schema.json")),
    ("surface-check", include_str!("../schemas/surface-check.schema.json")),
    ("tube", include_str!("../schemas/tube.schema.json")),
    ("surgery", include_str!("../schemas/surgery.schema.json")),
    ("genus", include_str!("../schemas/genus.schema.json")),
    ("triangle", include_str!("../schemas/triangle.schema.json")),
];

#[derive(Debug, Parser)]
#[command(
    name = "hyperfill",
    version,
    about = "Curvature and surgery checks in hyperbolic space"
)]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature, quasi-geodesic and displacement checks on a sampled curve.
    CurveCheck(CurveArgs),
    /// Principal curvatures, Gauss equation and curvature certificate of a surface.
    SurfaceCheck(SurfaceArgs),
    /// Pinching of the solid-torus warped-product metric.
    Tube(TubeArgs),
    /// Run a twist-move script and print the resulting filling.
    Surgery(SurgeryArgs),
    /// Genus of a fully branched cyclic cover.
    Genus(GenusArgs),
    /// Geometry of a triangle orbifold.
    Triangle(TriangleArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CurveCheck(_) => "curve-check",
            Command::SurfaceCheck(_) => "surface-check",
            Command::Tube(_) => "tube",
            Command::Surgery(_) => "surgery",
            Command::Genus(_) => "genus",
            Command::Triangle(_) => "triangle",
        }
    }
}

impl Cli {
    /// Config file (or defaults) with the global flags applied.
    pub fn resolve_config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(f) = self.format {
            cfg.format = f;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.display().to_string());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run_command(cfg: &RunConfig, cmd: &Command) -> anyhow::Result<Outcome> {
    match cmd {
        Command::CurveCheck(a) => curve_check(cfg, a),
        Command::SurfaceCheck(a) => surface_check(cfg, a),
        Command::Tube(a) => tube(cfg, a),
        Command::Surgery(a) => surgery(cfg, a),
        Command::Genus(a) => genus(cfg, a),
        Command::Triangle(a) => triangle(cfg, a),
    }
}

pub fn render(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => output::render_json(&outcome.report),
        Format::Csv => outcome.table.render(),
    }
}

/// 3 when any error in the chain is a domain error, 2 otherwise.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    let domain = err
        .chain()
        .filter_map(|e| e.downcast_ref::<hyperfill::Error>())
        .any(hyperfill::Error::is_domain);
    if domain {
        EXIT_DOMAIN
    } else {
        EXIT_INPUT
    }
}

/// Runs a parsed command line, writes its output, and returns the exit code.
pub fn execute(cli: &Cli) -> anyhow::Result<i32> {
    let cfg = cli.resolve_config()?;
    let outcome = run_command(&cfg, &cli.command)?;
    if let Command::Tube(TubeArgs { curve_csv: Some(p), .. }) = &cli.command {
        std::fs::write(p, outcome.table.render())?;
    }
    let text = render(&outcome, cfg.format);
    match &cfg.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(if outcome.passed { EXIT_PASS } else { EXIT_TOLERANCE })
}
