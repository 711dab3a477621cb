//! `fasthit`: walks on randomly glued trees from the command line.
//!
//! Six subcommands cover the pipeline: `graph` builds instances, `sweep`
//! tabulates exit-probability curves, `scaling` locates first peaks
//! across tree shapes and fits their trends, `design` turns a coupling
//! calibration into a waveguide layout, and `frame`/`alpha` reduce
//! measured camera frames and coincidence counts.
//!
//! Every command is deterministic: a fixed command line, config file,
//! and seed reproduce output files byte for byte. Exit codes: 0 on
//! success, 2 for usage or parameter errors, 3 for numerical failures,
//! 4 for I/O and malformed input files.

mod config;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use fasthit_core::analysis::{
    fit_linear, fit_power_law, monotonicity_warnings, scaling_sweep, write_scaling_csv,
    FitResult, ScalingRecord,
};
use fasthit_core::graphs::{build_glued_tree, GluedTreeParams};
use fasthit_core::photonics::{
    alpha, design_layout, fit_coupling_model, frame_probabilities, CalibrationSample,
    CoincidenceCounts, Frame, Spot,
};
use fasthit_core::walks::{sweep_curve, TimeUnits, WalkKind};
use fasthit_core::{Error, Result};

use crate::config::{build_grid, resolve_output_dir, IntRange, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "fasthit", version, about = "Walks on randomly glued trees")]
struct Cli {
    /// Flat key = value configuration file; command-line flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Directory for generated files (default: $FASTHIT_OUTPUT_DIR or ".").
    #[arg(long, global = true, value_name = "DIR")]
    output_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one randomly glued tree and write it as JSON.
    Graph(GraphArgs),
    /// Tabulate a walk's exit probability on a uniform time grid.
    Sweep(SweepArgs),
    /// Find first peaks across tree shapes and fit the scaling trends.
    Scaling(ScalingArgs),
    /// Fit a coupling model and lay out a waveguide array.
    Design(DesignArgs),
    /// Reduce a camera frame to per-spot probabilities.
    Frame(FrameArgs),
    /// Estimate the heralded second-order correlation from counts.
    Alpha(AlphaArgs),
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Branching factor of both trees.
    #[arg(long = "B", value_name = "B")]
    branching: u32,

    /// Depth of each tree.
    #[arg(long = "n", value_name = "N")]
    depth: u32,

    /// Seed for the random leaf-to-leaf gluing.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Output file; relative names land in the output directory.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Walk kind: qw-chain, qw-full, crw-full, or crw-lumped.
    #[arg(long, value_parser = parse_walk_kind, value_name = "KIND")]
    kind: WalkKind,

    /// Branching factor of both trees.
    #[arg(long = "B", value_name = "B")]
    branching: u32,

    /// Depth of each tree.
    #[arg(long = "n", value_name = "N")]
    depth: u32,

    /// End of the dimensionless time grid.
    #[arg(long, value_name = "TAU")]
    tau_max: Option<f64>,

    /// Grid spacing (default 0.01).
    #[arg(long, value_name = "TAU")]
    step: Option<f64>,

    /// Hopping rate of the walk.
    #[arg(long, value_name = "RATE")]
    gamma: Option<f64>,

    /// Gluing seed, used by the full-graph kinds.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Output file; relative names land in the output directory.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,

    /// Also render the curve as a static SVG line chart.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScalingArgs {
    /// Branching factors, one value `B` or an inclusive range `A..B`.
    #[arg(long = "B", value_name = "RANGE")]
    branchings: Option<IntRange>,

    /// Depths, one value `n` or an inclusive range `A..B`.
    #[arg(long = "n", value_name = "RANGE")]
    depths: Option<IntRange>,

    /// Hopping rate of both walks.
    #[arg(long, value_name = "RATE")]
    gamma: Option<f64>,

    /// Peak-search grid step (give with --tau-max and --refine-tol).
    #[arg(long, value_name = "TAU")]
    coarse_step: Option<f64>,

    /// Peak-search ceiling (give with --coarse-step and --refine-tol).
    #[arg(long, value_name = "TAU")]
    tau_max: Option<f64>,

    /// Peak-refinement tolerance (give with --coarse-step and --tau-max).
    #[arg(long, value_name = "TAU")]
    refine_tol: Option<f64>,

    /// Also write the log-scale quantum-vs-classical comparison table.
    #[arg(long)]
    compare_crw: bool,
}

#[derive(Debug, Args)]
struct DesignArgs {
    /// Branching factor of both trees.
    #[arg(long = "B", value_name = "B")]
    branching: u32,

    /// Depth of each tree.
    #[arg(long = "n", value_name = "N")]
    depth: u32,

    /// Calibration table: spacing_mm,coupling_per_mm CSV.
    #[arg(long, value_name = "FILE")]
    calib: PathBuf,

    /// Hopping rate per millimeter realized by the side gaps.
    #[arg(long, value_name = "RATE")]
    gamma_phys: Option<f64>,

    /// Propagation length of the device in millimeters.
    #[arg(long, value_name = "MM")]
    z: f64,

    /// Output file; relative names land in the output directory.
    #[arg(long, value_name = "FILE")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FrameArgs {
    /// Intensity image: ASCII grid or PGM (P2/P5).
    #[arg(long, value_name = "FILE")]
    frame: PathBuf,

    /// JSON array of {"x", "y", "radius"} integration discs.
    #[arg(long, value_name = "FILE")]
    spots: PathBuf,

    /// Spot index reported as the exit share.
    #[arg(long, value_name = "K")]
    exit_index: usize,
}

#[derive(Debug, Args)]
struct AlphaArgs {
    /// Coincidence table: N3,N13,N23,N123 CSV.
    #[arg(long, value_name = "FILE")]
    counts: PathBuf,
}

fn parse_walk_kind(text: &str) -> std::result::Result<WalkKind, String> {
    text.parse().map_err(|error: Error| error.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            eprintln!("error: {error}");
            ExitCode::from(match error {
                Error::Parameter(_) => 2u8,
                Error::Numerical(_) | Error::Generation(_) => 3,
                Error::Format(_) | Error::Io(_) => 4,
            })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let env_dir = std::env::var("FASTHIT_OUTPUT_DIR").ok();
    let output_dir = resolve_output_dir(cli.output_dir.as_deref(), &config, env_dir.as_deref());
    match &cli.command {
        Command::Graph(args) => cmd_graph(args, &config, &output_dir),
        Command::Sweep(args) => cmd_sweep(args, &config, &output_dir),
        Command::Scaling(args) => cmd_scaling(args, &config, &output_dir),
        Command::Design(args) => cmd_design(args, &config, &output_dir),
        Command::Frame(args) => cmd_frame(args),
        Command::Alpha(args) => cmd_alpha(args),
    }
}

fn cmd_graph(args: &GraphArgs, config: &RunConfig, output_dir: &Path) -> Result<()> {
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let graph = build_glued_tree(&GluedTreeParams {
        branching: args.branching,
        depth: args.depth,
        seed,
    })?;
    let default_name = format!("graph-B{}-n{}-seed{}.json", args.branching, args.depth, seed);
    let path = output_path(output_dir, args.output.as_ref(), &default_name);
    let mut json = graph.to_json_string()?;
    json.push('\n');
    write_bytes(&path, json.as_bytes())?;
    println!("{} nodes, {} edges", graph.node_count(), graph.edges().len());
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_sweep(args: &SweepArgs, config: &RunConfig, output_dir: &Path) -> Result<()> {
    let tau_max = args.tau_max.or(config.tau_max).ok_or_else(|| {
        Error::Parameter("sweep needs --tau-max (or tau_max in the config)".into())
    })?;
    let step = args.step.or(config.coarse_step).unwrap_or(0.01);
    let gamma = args.gamma.or(config.gamma).unwrap_or(1.0);
    let seed = args.seed.or(config.seed).unwrap_or(0);
    let units = config.resolve_units()?;

    let taus = build_grid(tau_max, step)?;
    let curve = sweep_curve(args.kind, args.branching, args.depth, gamma, &taus, seed)?;

    let default_name = format!(
        "sweep-{}-B{}-n{}-seed{}.csv",
        args.kind, args.branching, args.depth, seed
    );
    let path = output_path(output_dir, args.output.as_ref(), &default_name);
    let mut csv = Vec::new();
    curve.write_csv(&mut csv, &units)?;
    write_bytes(&path, &csv)?;

    let mut best = 0;
    for (index, value) in curve.values.iter().enumerate() {
        if *value > curve.values[best] {
            best = index;
        }
    }
    println!(
        "{} points, max {:.11e} at tau {:.11e}",
        curve.taus.len(),
        curve.values[best],
        curve.taus[best]
    );
    println!("wrote {}", path.display());

    if let Some(svg_file) = &args.svg {
        let (scale, label) = match units {
            TimeUnits::Dimensionless => (1.0, "tau"),
            TimeUnits::PhysicalMm { gamma_phys } => (1.0 / gamma_phys, "z_mm"),
        };
        let axis: Vec<f64> = curve.taus.iter().map(|t| t * scale).collect();
        let chart = svg::line_chart(&axis, &curve.values, label, "exit probability");
        let svg_path = output_dir.join(svg_file);
        write_bytes(&svg_path, chart.as_bytes())?;
        println!("wrote {}", svg_path.display());
    }
    Ok(())
}

/// Per-branching fit summaries emitted as `fits.json`.
#[derive(Debug, Serialize)]
struct ShapeFits {
    #[serde(rename = "B")]
    branching: u32,
    points: usize,
    /// Power law of the quantum peak height against depth.
    peak_vs_depth: FitResult,
    /// Straight line through the peak time against depth.
    tau_star_vs_depth: FitResult,
}

fn cmd_scaling(args: &ScalingArgs, config: &RunConfig, output_dir: &Path) -> Result<()> {
    let branchings = args.branchings.or(config.branchings).ok_or_else(|| {
        Error::Parameter("scaling needs --B (or B_set in the config)".into())
    })?;
    let depths = args.depths.or(config.depths).ok_or_else(|| {
        Error::Parameter("scaling needs --n (or n_set in the config)".into())
    })?;
    let gamma = args.gamma.or(config.gamma).unwrap_or(1.0);

    let mut merged = config.clone();
    merged.coarse_step = args.coarse_step.or(merged.coarse_step);
    merged.tau_max = args.tau_max.or(merged.tau_max);
    merged.refine_tol = args.refine_tol.or(merged.refine_tol);
    let peak_search = merged.resolve_peak_search()?;

    let records = scaling_sweep(
        &branchings.values(),
        &depths.values(),
        gamma,
        peak_search.as_ref(),
    )?;
    for warning in monotonicity_warnings(&records) {
        eprintln!("warning: {warning}");
    }

    let csv_path = output_dir.join("scaling.csv");
    let mut csv = Vec::new();
    write_scaling_csv(&records, &mut csv)?;
    write_bytes(&csv_path, &csv)?;

    let mut fits = Vec::new();
    for branching in branchings.values() {
        let rows: Vec<&ScalingRecord> =
            records.iter().filter(|r| r.branching == branching).collect();
        if rows.len() < 3 {
            eprintln!(
                "warning: B={branching}: only {} depth point{}, skipping fits",
                rows.len(),
                if rows.len() == 1 { "" } else { "s" }
            );
            continue;
        }
        let ns: Vec<f64> = rows.iter().map(|r| r.depth as f64).collect();
        let peaks: Vec<f64> = rows.iter().map(|r| r.p_star_qw).collect();
        let times: Vec<f64> = rows.iter().map(|r| r.tau_star).collect();
        fits.push(ShapeFits {
            branching,
            points: rows.len(),
            peak_vs_depth: fit_power_law(&ns, &peaks)?,
            tau_star_vs_depth: fit_linear(&ns, &times)?,
        });
    }
    let fits_path = output_dir.join("fits.json");
    let mut fits_json = serde_json::to_string_pretty(&fits)
        .map_err(|error| Error::Format(format!("fit summary: {error}")))?;
    fits_json.push('\n');
    write_bytes(&fits_path, fits_json.as_bytes())?;

    println!(
        "{} records ({} branching factors x {} depths)",
        records.len(),
        branchings.values().len(),
        depths.values().len()
    );
    println!("wrote {}", csv_path.display());
    println!("wrote {}", fits_path.display());

    if args.compare_crw {
        let mut table = String::from("B,n,p_star_qw,p_crw_stationary,log10_p_qw,log10_p_crw\n");
        for r in &records {
            table.push_str(&format!(
                "{},{},{:.11e},{:.11e},{:.11e},{:.11e}\n",
                r.branching,
                r.depth,
                r.p_star_qw,
                r.p_crw_stationary,
                r.p_star_qw.log10(),
                r.p_crw_stationary.log10()
            ));
        }
        let compare_path = output_dir.join("compare-crw.csv");
        write_bytes(&compare_path, table.as_bytes())?;
        println!("wrote {}", compare_path.display());
    }
    Ok(())
}

fn cmd_design(args: &DesignArgs, config: &RunConfig, output_dir: &Path) -> Result<()> {
    let gamma_phys = args.gamma_phys.or(config.gamma_phys).ok_or_else(|| {
        Error::Parameter("design needs --gamma-phys (or gamma_phys in the config)".into())
    })?;
    let samples = CalibrationSample::parse_csv(&std::fs::read_to_string(&args.calib)?)?;
    let fit = fit_coupling_model(&samples)?;
    let layout = design_layout(args.branching, args.depth, gamma_phys, &fit.model, args.z)?;

    let default_name = format!("layout-B{}-n{}.json", args.branching, args.depth);
    let path = output_path(output_dir, args.output.as_ref(), &default_name);
    let mut json = layout.to_json_string()?;
    json.push('\n');
    write_bytes(&path, json.as_bytes())?;

    println!(
        "coupling fit: c0 {:.11e} /mm, d0 {:.11e} mm, rms log residual {:.2e}",
        fit.model.c0, fit.model.d0, fit.rms_log_residual
    );
    println!(
        "{} waveguides over {:.11e} mm",
        layout.positions_mm.len(),
        layout.z_mm
    );
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_frame(args: &FrameArgs) -> Result<()> {
    let frame = Frame::load(&args.frame)?;
    let spots = Spot::load_json(&args.spots)?;
    if args.exit_index >= spots.len() {
        return Err(Error::Parameter(format!(
            "exit index {} out of range for {} spots",
            args.exit_index,
            spots.len()
        )));
    }
    let result = frame_probabilities(&frame, &spots)?;
    for (a, b) in &result.overlaps {
        eprintln!("warning: spots {a} and {b} overlap; shared pixels went to the nearer center");
    }
    for (index, value) in result.values.iter().enumerate() {
        println!("spot {index}: {value:.11e}");
    }
    println!("exit share: {:.11e}", result.values[args.exit_index]);
    Ok(())
}

fn cmd_alpha(args: &AlphaArgs) -> Result<()> {
    let counts = CoincidenceCounts::from_csv_str(&std::fs::read_to_string(&args.counts)?)?;
    let estimate = alpha(&counts)?;
    println!("alpha = {:.3} +- {:.3}", estimate.value, estimate.std_error);
    Ok(())
}

/// Explicit output files override the default name; relative paths land
/// in the output directory, absolute paths are used as given.
fn output_path(output_dir: &Path, explicit: Option<&PathBuf>, default_name: &str) -> PathBuf {
    match explicit {
        Some(file) => output_dir.join(file),
        None => output_dir.join(default_name),
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, bytes)?;
    Ok(())
}
