//! `circlewalk`: sample triangulations, pack them, walk on the packings and
//! analyse the walks.

mod config;
mod error;
mod stages;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use circlewalk_core::packer::{Geometry, SolverConfig, SweepOrder};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use config::{config_hash, AnalysisSpec, ExperimentConfig, Provenance};
use error::CliError;
use stages::{read, AnalyzeInputs};

#[derive(Parser)]
#[command(name = "circlewalk", version, about = "Circle packings and random walks on planar triangulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a triangulation from the config's generator spec.
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pack a map file.
    Pack(PackArgs),
    /// Simple random walks on a packed map.
    Walk(WalkArgs),
    /// Speed identity and exit statistics from trajectories.
    Analyze(AnalyzeArgs),
    /// Draw a packing as SVG.
    Render(RenderArgs),
    /// Run every stage from one config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Parent directory for the run (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum GeometryArg {
    Plane,
    Disc,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Plane => Geometry::Plane,
            GeometryArg::Disc => Geometry::Disc,
        }
    }
}

#[derive(Args, Serialize)]
struct PackArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, value_enum)]
    geometry: GeometryArg,
    /// Euclidean radius of boundary circles in the plane.
    #[arg(long, default_value_t = 1.0)]
    boundary_radius: f64,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    #[arg(long, default_value_t = 200_000)]
    max_iters: usize,
    #[arg(long, default_value_t = 1.0)]
    damping: f64,
    #[arg(long, default_value_t = 1e-6)]
    layout_tol: f64,
    /// Vertex placed at the origin.
    #[arg(long, default_value_t = 0)]
    root: usize,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct WalkArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    packing: PathBuf,
    #[arg(long)]
    walks: usize,
    #[arg(long)]
    steps: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    collar: usize,
    #[arg(long, default_value_t = 0)]
    root: usize,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct AnalyzeArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    packing: PathBuf,
    #[arg(long)]
    trajectories: PathBuf,
    #[arg(long, default_value_t = 0)]
    root: usize,
    #[arg(long, default_value_t = 0.4)]
    burn_in: f64,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, default_value_t = 6)]
    level: u32,
    #[arg(long, default_value_t = 3.0)]
    max_z: f64,
    /// Exit with code 4 when the speed identity check fails.
    #[arg(long)]
    check: bool,
    /// Seed recorded in the outputs.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct RenderArgs {
    #[arg(long)]
    packing: PathBuf,
    /// Needed for `--edges`.
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    edges: bool,
    #[arg(long, default_value_t = 800.0)]
    size: f64,
    #[arg(long)]
    #[serde(skip)]
    out: PathBuf,
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

#[derive(Serialize)]
struct Hashed<'a, T: Serialize> {
    args: &'a T,
    inputs: Vec<String>,
}

/// Provenance of a subcommand run: hash of its arguments and input contents.
fn arg_provenance<T: Serialize>(args: &T, inputs: &[&str], seed: Option<u64>) -> Provenance {
    let inputs = inputs.iter().map(|t| config::sha256_hex(t.as_bytes())).collect();
    Provenance { config_sha256: config_hash(&Hashed { args, inputs }), seed }
}

fn run_pack(a: &PackArgs) -> Result<(), CliError> {
    let text = read(&a.map)?;
    let solver = SolverConfig { tol: a.tol, max_iters: a.max_iters, damping: a.damping, order: SweepOrder::Ascending, layout_tol: a.layout_tol };
    solver.validate()?;
    let prov = arg_provenance(a, &[&text], None);
    let s = stages::pack_stage(&path_str(&a.map), &text, a.geometry.into(), &solver, a.boundary_radius, a.root, &prov, &a.out)?;
    if let Some(r) = s.report {
        println!("packed: {} sweeps, defect {:e}, tangency residual {:e}", r.iters, r.final_defect, s.tangency_residual.unwrap_or(f64::NAN));
    }
    Ok(())
}

fn run_walk(a: &WalkArgs) -> Result<(), CliError> {
    let (mt, pt) = (read(&a.map)?, read(&a.packing)?);
    let host = stages::load_packed(&path_str(&a.map), &mt, &path_str(&a.packing), &pt, a.root, a.collar)?;
    let prov = arg_provenance(a, &[&mt, &pt], Some(a.seed));
    let s = stages::walk_stage(&host, a.walks, a.steps, a.seed, &prov, &a.out)?;
    println!("{} walks, {} stopped at the collar", s.walks, s.stopped_at_collar);
    Ok(())
}

fn run_analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let (mt, pt, tt) = (read(&a.map)?, read(&a.packing)?, read(&a.trajectories)?);
    let spec = AnalysisSpec { burn_in: a.burn_in, eps: a.eps, level: a.level, max_z: a.max_z };
    let prov = arg_provenance(a, &[&mt, &pt, &tt], a.seed);
    let (mp, pp, tp) = (path_str(&a.map), path_str(&a.packing), path_str(&a.trajectories));
    let inp = AnalyzeInputs { map: (&mp, &mt), packing: (&pp, &pt), trajectories: (&tp, &tt), root: a.root };
    let r = stages::analyze_stage(&inp, &spec, a.check, &prov, &a.out)?;
    println!("{}", r.check_message);
    Ok(())
}

fn run_render(a: &RenderArgs) -> Result<(), CliError> {
    let pt = read(&a.packing)?;
    let mt = a.map.as_ref().map(|p| read(p)).transpose()?;
    let mut inputs = vec![pt.as_str()];
    inputs.extend(mt.as_deref());
    let prov = arg_provenance(a, &inputs, None);
    let mp = a.map.as_ref().map(|p| path_str(p));
    let map = mp.as_deref().zip(mt.as_deref());
    stages::render_stage(map, (&path_str(&a.packing), &pt), a.edges, a.size, &prov, &a.out)?;
    Ok(())
}

fn run_sample(config: &Path, out: &Path) -> Result<(), CliError> {
    let cfg = ExperimentConfig::parse(&read(config)?)?;
    let prov = Provenance::new(&cfg, cfg.generator.seed());
    let s = stages::sample(&cfg.generator, &prov, out)?;
    println!("sampled {} vertices, {} edges", s.vertices, s.edges);
    Ok(())
}

fn run_experiment(config: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let cfg = ExperimentConfig::parse(&read(config)?)?;
    let hash = config_hash(&cfg);
    let parent = out.map(Path::to_path_buf).or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from("runs"));
    let dir = parent.join(format!("run-{}", &hash[..16]));
    let prov = Provenance::new(&cfg, cfg.generator.seed());
    stages::write(&dir, "config.json", &(serde_json::to_string_pretty(&cfg).expect("config serializes") + "\n"))?;
    let sample = stages::sample(&cfg.generator, &prov, &dir)?;
    let map_text = read(&dir.join("map.txt"))?;
    let geometry = cfg.geometry();
    stages::pack_stage("map.txt", &map_text, geometry, &cfg.solver, 1.0, sample.root, &prov, &dir)?;
    let packing_text = read(&dir.join("packing.csv"))?;
    stages::render_stage(Some(("map.txt", &map_text)), ("packing.csv", &packing_text), true, 800.0, &prov, &dir.join("packing.svg"))?;
    if let Some(w) = &cfg.walk {
        let seed = w.seed.expect("validated");
        let walk_prov = Provenance::new(&cfg, Some(seed));
        let host = stages::load_packed("map.txt", &map_text, "packing.csv", &packing_text, sample.root, w.collar)?;
        stages::walk_stage(&host, w.walks, w.steps, seed, &walk_prov, &dir)?;
        let traj_text = read(&dir.join("trajectories.csv"))?;
        let inp = AnalyzeInputs {
            map: ("map.txt", &map_text),
            packing: ("packing.csv", &packing_text),
            trajectories: ("trajectories.csv", &traj_text),
            root: sample.root,
        };
        let r = stages::analyze_stage(&inp, &cfg.analysis, true, &walk_prov, &dir)?;
        println!("{}", r.check_message);
    }
    println!("{}", dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sample { config, out } => run_sample(config, out),
        Command::Pack(a) => run_pack(a),
        Command::Walk(a) => run_walk(a),
        Command::Analyze(a) => run_analyze(a),
        Command::Render(a) => run_render(a),
        Command::Experiment { config, out } => run_experiment(config, out.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
