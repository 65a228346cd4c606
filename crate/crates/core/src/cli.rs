//! The `dirtrend` command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::families::{FamilySpec, SmootherFamily};
use crate::geometry::rows_to_polar;
use crate::io::{
    ingest_csv, times_or_index, write_directions_csv, write_json, AngleFormat, ReportDocument, SOFTWARE, VERSION,
};
use crate::model::DirectionData;
use crate::plot::{render_lambert_svg, PlotSeries, PlotSpec};
use crate::select::{naive_fit, risk_table, RiskReport, SelectionConfig, NAIVE_LABEL};
use crate::synth::{
    builtin_trend, generate_dataset, load_trend_file, resultant_oracle, SimulationConfig, TrendSpec, ORACLE_DRAWS,
};

#[derive(Debug, Parser)]
#[command(name = "dirtrend", version, about = "Directional trend estimation on the sphere")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select and fit smoothers; write report.json, fitted.csv and plot.svg
    Fit(FitArgs),
    /// Write the risk table only (report.json)
    Risks(FitArgs),
    /// Generate artificial data; write data.csv, truth.csv and simulation.json
    Simulate(SimulateArgs),
    /// Draw one or more series on a Lambert disk (plot.svg)
    Plot(PlotArgs),
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV: time,theta,phi (radians) or time,lat,lon with --degrees
    #[arg(long)]
    pub input: PathBuf,
    /// Candidate family; repeat for several. Default: pls:d=2, pls:d=1, run3
    #[arg(long = "family", value_parser = parse_family)]
    pub families: Vec<FamilySpec>,
    /// Grid points per parameter axis
    #[arg(long, default_value_t = 201)]
    pub grid: usize,
    /// Skip golden-section refinement of the grid minimum
    #[arg(long)]
    pub no_refine: bool,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Built-in trend: wobble, bat or jumps
    #[arg(long, conflicts_with = "trend_file", required_unless_present = "trend_file")]
    pub trend: Option<String>,
    /// CSV of knots t,theta,phi (radians), interpolated linearly
    #[arg(long)]
    pub trend_file: Option<PathBuf>,
    #[arg(long, default_value_t = 150)]
    pub p: usize,
    #[arg(long, default_value_t = 200.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub degrees: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Further series drawn over the input, e.g. fitted.csv or truth.csv
    #[arg(long)]
    pub overlay: Vec<PathBuf>,
    #[arg(long)]
    pub degrees: bool,
    /// Do not join time-adjacent points
    #[arg(long)]
    pub no_lines: bool,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

fn parse_family(s: &str) -> std::result::Result<FamilySpec, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn format_of(degrees: bool) -> AngleFormat {
    if degrees {
        AngleFormat::Degrees
    } else {
        AngleFormat::Radians
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(&args),
        Command::Risks(args) => cmd_risks(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Plot(args) => cmd_plot(&args),
    }
}

fn selection(args: &FitArgs) -> SelectionConfig {
    SelectionConfig {
        grid_points_per_axis: args.grid,
        refine: !args.no_refine,
        ..Default::default()
    }
}

fn table(args: &FitArgs) -> Result<(DirectionData, RiskReport)> {
    let cfg = selection(args);
    cfg.validate()?;
    let data = ingest_csv(&args.input, format_of(args.degrees))?;
    let specs = if args.families.is_empty() {
        FamilySpec::defaults()
    } else {
        args.families.clone()
    };
    let families = specs
        .iter()
        .map(|s| s.build(data.p()))
        .collect::<Result<Vec<Box<dyn SmootherFamily>>>>()?;
    let refs: Vec<&dyn SmootherFamily> = families.iter().map(|f| f.as_ref()).collect();
    let report = risk_table(&refs, &data, &cfg)?;
    for label in &report.ranking {
        log::info!(
            "{label}: estimated risk {:.6}",
            report.risk_of(label).unwrap_or(f64::NAN)
        );
    }
    Ok((data, report))
}

fn print_ranking(report: &RiskReport) {
    println!("gamma2_hat = {}", report.gamma2_hat);
    for label in &report.ranking {
        let t = report
            .entries
            .iter()
            .find(|e| &e.label == label)
            .filter(|e| !e.t_hat.is_empty())
            .map(|e| format!("  t = {:?}", e.t_hat))
            .unwrap_or_default();
        println!("{:<20} {:.6}{t}", label, report.risk_of(label).unwrap_or(f64::NAN));
    }
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn cmd_risks(args: &FitArgs) -> Result<()> {
    let (data, report) = table(args)?;
    create_out(&args.out)?;
    write_json(
        &args.out.join("report.json"),
        &ReportDocument::new("risks", &data, &report, selection(args)),
    )?;
    print_ranking(&report);
    Ok(())
}

pub fn cmd_fit(args: &FitArgs) -> Result<()> {
    let (data, report) = table(args)?;
    let format = format_of(args.degrees);
    let (label, fit) = match report.winner() {
        Some(entry) => (entry.label.clone(), entry.fit.clone()),
        None => (NAIVE_LABEL.to_string(), naive_fit(&data)),
    };
    create_out(&args.out)?;
    write_json(
        &args.out.join("report.json"),
        &ReportDocument::new("fit", &data, &report, selection(args)),
    )?;
    let times = times_or_index(&data);
    write_directions_csv(&args.out.join("fitted.csv"), &times, &fit.d_hat, format)?;
    let spec = PlotSpec {
        series: vec![
            PlotSeries {
                label: "data".into(),
                points: rows_to_polar(data.y())?,
            },
            PlotSeries {
                label: format!("fit ({label})"),
                points: rows_to_polar(&fit.d_hat)?,
            },
        ],
        ..Default::default()
    };
    fs::write(args.out.join("plot.svg"), render_lambert_svg(&spec)?)?;
    print_ranking(&report);
    Ok(())
}

#[derive(Debug, Serialize)]
struct SimulationMetadata<'a> {
    software: &'static str,
    version: &'static str,
    trend: &'a str,
    p: usize,
    kappa: f64,
    seed: u64,
    rng: &'static str,
    lambda: f64,
    gamma2: f64,
    oracle_draws: usize,
    time: &'static str,
    range_policy: Vec<String>,
}

fn trend_of(args: &SimulateArgs) -> Result<TrendSpec> {
    match (&args.trend, &args.trend_file) {
        (Some(name), _) => builtin_trend(name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown trend '{name}'; expected wobble, bat or jumps"))),
        (None, Some(path)) => load_trend_file(path),
        (None, None) => Err(Error::InvalidArgument("give --trend or --trend-file".into())),
    }
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let trend = trend_of(args)?;
    let cfg = SimulationConfig {
        p: args.p,
        kappa: args.kappa,
        seed: args.seed,
    };
    let (data, truth) = generate_dataset(&trend, &cfg)?;
    let format = format_of(args.degrees);
    create_out(&args.out)?;
    let times = times_or_index(&data);
    write_directions_csv(&args.out.join("data.csv"), &times, data.y(), format)?;
    write_directions_csv(&args.out.join("truth.csv"), &times, truth.mu(), format)?;
    let oracle = resultant_oracle(cfg.kappa);
    let meta = SimulationMetadata {
        software: SOFTWARE,
        version: VERSION,
        trend: trend.label(),
        p: cfg.p,
        kappa: cfg.kappa,
        seed: cfg.seed,
        rng: "ChaCha8 (rand_chacha), seed_from_u64(seed), stream 0",
        lambda: oracle.lambda,
        gamma2: oracle.gamma2(),
        oracle_draws: ORACLE_DRAWS,
        time: "t_i = i/(p+1), i = 1..p",
        range_policy: trend.range_notes(),
    };
    write_json(&args.out.join("simulation.json"), &meta)?;
    println!(
        "wrote {} observations of '{}' to {}",
        cfg.p,
        trend.label(),
        args.out.display()
    );
    Ok(())
}

pub fn cmd_plot(args: &PlotArgs) -> Result<()> {
    let format = format_of(args.degrees);
    let mut series = Vec::new();
    for path in std::iter::once(&args.input).chain(&args.overlay) {
        let data = ingest_csv(path, format)?;
        series.push(PlotSeries {
            label: path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
            points: rows_to_polar(data.y())?,
        });
    }
    let spec = PlotSpec {
        connect: !args.no_lines,
        series,
        ..Default::default()
    };
    create_out(&args.out)?;
    fs::write(args.out.join("plot.svg"), render_lambert_svg(&spec)?)?;
    Ok(())
}
