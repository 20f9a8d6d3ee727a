//! `confdiam`: checks intrinsic diameter bounds on triangle meshes, doubles
//! bordered surfaces, minimizes area and screens boundary curves.
//!
//! Exit codes: 0 success, 1 input or solver error, 2 an inequality was
//! numerically violated.

mod commands;
mod config;
mod manifest;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use commands::{Run, EXIT_INPUT};
use config::{FileConfig, GenerateKind, RunConfig, SetFlags};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "confdiam", version, about = "Intrinsic diameter bounds in conformally flat 3-manifolds")]
struct Cli {
    /// TOML file supplying any of the options below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Ambient chart: e3, h3-ball, h3-half or s3.
    #[arg(long, global = true)]
    ambient: Option<String>,
    /// Exponent α in (0, 1); chosen automatically when omitted.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Require strict inequalities in the gates.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads (default: one per hardware thread).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the main result as JSON instead of a summary line.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Steiner nodes per edge in the distance graph.
    #[arg(long)]
    steiner: Option<usize>,
    /// Gauss–Legendre order for edge lengths.
    #[arg(long)]
    quadrature: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evaluate the diameter inequality on a mesh and write report.json.
    Check {
        /// Input mesh (OFF or OBJ).
        #[arg(long)]
        mesh: Option<PathBuf>,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Double a bordered mesh for each ε and tabulate the convergence.
    Double {
        /// Input mesh (OFF or OBJ).
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Strictly decreasing tube scales, comma separated.
        #[arg(long, value_delimiter = ',')]
        eps: Option<Vec<f64>>,
        /// Teardrop opening parameter in (0, π/4).
        #[arg(long)]
        eta: Option<f64>,
        /// Tube segments around the profile.
        #[arg(long)]
        s_res: Option<usize>,
        #[command(flatten)]
        graph: GraphArgs,
    },
    /// Minimize area spanning the curves in a curves.json file.
    Solve {
        /// Boundary curves (curves.json).
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Rings of the initial spanning mesh.
        #[arg(long)]
        layers: Option<usize>,
        /// Iteration cap of the area minimizer.
        #[arg(long)]
        max_iters: Option<usize>,
    },
    /// Screen boundary curves for connected spanning surfaces.
    Screen {
        /// Boundary curves (curves.json).
        #[arg(long)]
        boundary: Option<PathBuf>,
        /// Area bound on competitors, needed for positive curvature.
        #[arg(long)]
        area_budget: Option<f64>,
    },
    /// Evaluate the Sobolev inequality for a test function.
    Sobolev {
        /// Input mesh (OFF or OBJ).
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// `hat:center`, `bump:center` or `hat:x,y,z,r`.
        #[arg(long)]
        f: Option<String>,
    },
    /// Write a fixture mesh (OFF) or boundary curves (curves.json).
    Generate {
        kind: Option<GenerateKind>,
        /// Outer radius of disks, annuli, caps and circles.
        #[arg(long)]
        radius: Option<f64>,
        /// Inner radius of an annulus.
        #[arg(long)]
        inner: Option<f64>,
        /// Radial rings of disks, annuli and caps.
        #[arg(long)]
        rings: Option<usize>,
        /// Polar angle of a spherical cap.
        #[arg(long)]
        angle: Option<f64>,
        /// Subdivision rounds of the icosphere.
        #[arg(long)]
        subdiv: Option<usize>,
        /// Distance between the catenoid boundary circles.
        #[arg(long)]
        height: Option<f64>,
        /// Distance between the centers of a circle pair.
        #[arg(long)]
        sep: Option<f64>,
        /// Points per generated circle.
        #[arg(long)]
        points: Option<usize>,
        /// Seed of the jitter.
        #[arg(long)]
        seed: Option<u64>,
        /// Tangential jitter of interior vertices, as a fraction of the local edge length.
        #[arg(long)]
        jitter: Option<f64>,
    },
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Check { .. } => "check",
        Command::Double { .. } => "double",
        Command::Solve { .. } => "solve",
        Command::Screen { .. } => "screen",
        Command::Sobolev { .. } => "sobolev",
        Command::Generate { .. } => "generate",
    }
}

fn resolve(cli: &Cli) -> Result<(RunConfig, Option<usize>)> {
    let mut cfg = RunConfig::with_defaults(command_name(&cli.command));
    let mut set = SetFlags::default();
    macro_rules! take {
        ($src:expr => $field:ident) => {
            if let Some(v) = $src.clone() {
                cfg.$field = v.into();
                set.mark(stringify!($field));
            }
        };
    }
    take!(cli.ambient => ambient);
    take!(cli.alpha => alpha);
    take!(cli.out => out);
    if cli.strict {
        cfg.strict = true;
        set.mark("strict");
    }
    match &cli.command {
        Command::Check { mesh, graph } => {
            take!(mesh => mesh);
            take!(graph.steiner => steiner);
            take!(graph.quadrature => quadrature);
        }
        Command::Double { mesh, eps, eta, s_res, graph } => {
            take!(mesh => mesh);
            take!(eps => eps);
            take!(eta => eta);
            take!(s_res => s_res);
            take!(graph.steiner => steiner);
            take!(graph.quadrature => quadrature);
        }
        Command::Solve { boundary, layers, max_iters } => {
            take!(boundary => boundary);
            take!(layers => layers);
            take!(max_iters => max_iters);
        }
        Command::Screen { boundary, area_budget } => {
            take!(boundary => boundary);
            take!(area_budget => area_budget);
        }
        Command::Sobolev { mesh, f } => {
            take!(mesh => mesh);
            take!(f => f);
        }
        Command::Generate { kind, radius, inner, rings, angle, subdiv, height, sep, points, seed, jitter } => {
            take!(kind => kind);
            take!(radius => radius);
            take!(inner => inner);
            take!(rings => rings);
            take!(angle => angle);
            take!(subdiv => subdiv);
            take!(height => height);
            take!(sep => sep);
            take!(points => points);
            take!(seed => seed);
            take!(jitter => jitter);
        }
    }
    let mut threads = cli.threads;
    if let Some(path) = &cli.config {
        let file = FileConfig::read(path)?;
        cfg.layer_file(&file, &set)?;
        threads = threads.or(file.threads);
    }
    cfg.validate()?;
    if threads == Some(0) {
        anyhow::bail!("threads must be positive");
    }
    Ok((cfg, threads))
}

fn run(cli: Cli) -> Result<u8> {
    let (cfg, threads) = resolve(&cli)?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let ctx = Run { cfg: &cfg, json: cli.json };
    match cli.command {
        Command::Check { .. } => commands::check(&ctx),
        Command::Double { .. } => commands::double(&ctx),
        Command::Solve { .. } => commands::solve(&ctx),
        Command::Screen { .. } => commands::screen(&ctx),
        Command::Sobolev { .. } => commands::sobolev(&ctx),
        Command::Generate { .. } => commands::generate(&ctx),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
