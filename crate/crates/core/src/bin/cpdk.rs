use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use cpdk::experiment::{
    ellipse_nodes_csv, render, run_ellipse_experiment, run_grid_experiment, to_text, EllipseConfig, GridConfig,
    OutputFormat, TableRow,
};
use cpdk::geometry::Radius;
use cpdk::Tolerances;

type CliResult<T> = Result<T, Box<dyn std::error::Error>>;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Experiment {
    Grid,
    Ellipse,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Markdown,
}

/// Polyharmonic kernel experiments: Laplacian stencils on lattice balls and
/// interpolation on an ellipse.
#[derive(Debug, Parser)]
#[command(name = "cpdk", version)]
struct Cli {
    #[arg(long, value_enum)]
    experiment: Experiment,

    /// Space dimension(s) for the grid experiment.
    #[arg(long = "d")]
    dims: Vec<usize>,

    /// Ball radii for the grid experiment, e.g. `1`, `sqrt2`, `2`.
    #[arg(long = "r")]
    radii: Vec<Radius>,

    /// Polyharmonic exponent.
    #[arg(long)]
    s: Option<f64>,

    /// Polynomial order (total degree q - 1).
    #[arg(long)]
    q: Option<usize>,

    /// Node counts for the ellipse experiment.
    #[arg(long = "n")]
    sizes: Vec<usize>,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 0.3)]
    jitter: f64,

    /// Error sampling refinement per node spacing.
    #[arg(long, default_value_t = 20)]
    refinement: usize,

    /// Write the table to this file.
    #[arg(long)]
    out: Option<PathBuf>,

    #[arg(long, value_enum)]
    format: Option<Format>,

    /// Write ellipse node coordinates (n,i,t,x,y) to this file.
    #[arg(long)]
    nodes_out: Option<PathBuf>,
}

fn emit<R: TableRow>(rows: &[R], cli: &Cli) -> CliResult<()> {
    let format = match cli.format {
        Some(Format::Markdown) => OutputFormat::Markdown,
        _ => OutputFormat::Csv,
    };
    match (&cli.out, cli.format) {
        (Some(path), _) => {
            fs::write(path, render(rows, format)?)?;
            print!("{}", to_text(rows));
        }
        (None, Some(_)) => print!("{}", render(rows, format)?),
        (None, None) => print!("{}", to_text(rows)),
    }
    Ok(())
}

fn run(cli: &Cli) -> CliResult<bool> {
    let tol = Tolerances::default();
    match cli.experiment {
        Experiment::Grid => {
            let mut config = GridConfig::default();
            if !cli.dims.is_empty() {
                config.dims = cli.dims.clone();
            }
            if !cli.radii.is_empty() {
                config.radii = cli.radii.clone();
            }
            if let Some(s) = cli.s {
                config.s = s;
            }
            if let Some(q) = cli.q {
                config.q = q;
            }
            let rows = run_grid_experiment(&config, &tol)?;
            emit(&rows, cli)?;
            Ok(rows.iter().all(|r| !r.status.is_error()))
        }
        Experiment::Ellipse => {
            let mut config = EllipseConfig {
                seed: cli.seed,
                jitter: cli.jitter,
                refinement: cli.refinement,
                ..EllipseConfig::default()
            };
            match (cli.s, cli.q) {
                (Some(s), Some(q)) => config.pairs = vec![(s, q)],
                (None, None) => {}
                _ => return Err("--s and --q must be given together for the ellipse experiment".into()),
            }
            if !cli.sizes.is_empty() {
                config.sizes = cli.sizes.clone();
            }
            if let Some(path) = &cli.nodes_out {
                fs::write(path, ellipse_nodes_csv(&config)?)?;
            }
            let rows = run_ellipse_experiment(&config, &tol)?;
            emit(&rows, cli)?;
            Ok(rows.iter().all(|r| !r.status.is_error()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("cpdk: some rows failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("cpdk: {e}");
            ExitCode::from(2)
        }
    }
}
