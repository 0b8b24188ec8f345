//! Pipeline stages shared by the subcommands and `experiment`.

use std::fs;
use std::path::{Path, PathBuf};

use circlewalk_core::analysis::{estimate_speed, exit_histogram, exit_point, ExitHistogram, SpeedEstimate};
use circlewalk_core::io::{
    parse_map, parse_packing_csv, parse_trajectories_csv, write_coords_csv, write_map, write_packing_csv, write_table_csv,
    write_trajectories_csv,
};
use circlewalk_core::map::PlanarMap;
use circlewalk_core::packer::{
    pack, Geometry, PackError, Packing, PackingProblem, Radii, SolverConfig, SolverReport,
};
use circlewalk_core::render::{render_svg, RenderOptions};
use circlewalk_core::samplers::{poisson_delaunay_hyp, regular_triangulation, SampleWindow};
use circlewalk_core::walker::{observed_walks, ObservedWalk, PackedMap, WalkHost};
use serde::Serialize;

use crate::config::{sha256_hex, AnalysisSpec, GeneratorSpec, Provenance};
use crate::error::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::File { path: path.display().to_string(), source })
}

/// Writes `contents` to `dir/name` and returns its SHA-256.
pub fn write(dir: &Path, name: &str, contents: &str) -> Result<String, CliError> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .map_err(|source| CliError::File { path: path.display().to_string(), source })?;
    Ok(sha256_hex(contents.as_bytes()))
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn input<T>(path: &str, r: Result<T, circlewalk_core::io::IoError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Input { path: path.to_string(), source })
}

#[derive(Debug, Serialize)]
pub struct SampleSummary {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub generator: GeneratorSpec,
    pub vertices: usize,
    pub edges: usize,
    pub root: usize,
    pub map_sha256: String,
    pub coords_sha256: Option<String>,
    pub process_points: Option<usize>,
    pub inner_mean_degree: Option<(f64, f64)>,
}

pub fn sample(spec: &GeneratorSpec, prov: &Provenance, dir: &Path) -> Result<SampleSummary, CliError> {
    let header = prov.lines();
    let (map, root, coords_sha256, process_points, inner) = match *spec {
        GeneratorSpec::Regular { d, generations, .. } => (regular_triangulation(d, generations)?, 0, None, None, None),
        GeneratorSpec::PoissonDelaunay { lambda, radius, margin, seed } => {
            let s = poisson_delaunay_hyp(lambda, SampleWindow::new(radius, margin)?, seed.unwrap_or_default())?;
            let h = write(dir, "coords.csv", &write_coords_csv(&s.coords, &header))?;
            let inner = (!s.inner_degrees.is_empty()).then(|| s.mean_inner_degree());
            (s.map.map, s.map.root, Some(h), Some(s.process_points), inner)
        }
    };
    let map_sha256 = write(dir, "map.txt", &write_map(&map, None, &header))?;
    let summary = SampleSummary {
        provenance: prov.clone(),
        generator: spec.clone(),
        vertices: map.vertex_count(),
        edges: map.edge_count(),
        root,
        map_sha256,
        coords_sha256,
        process_points,
        inner_mean_degree: inner,
    };
    write(dir, "sample.json", &json(&summary))?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct PackSummary {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub map_sha256: String,
    pub geometry: Geometry,
    pub solver: SolverConfig,
    pub converged: bool,
    pub error: Option<String>,
    pub report: Option<SolverReport>,
    pub tangency_residual: Option<f64>,
    pub packing_sha256: Option<String>,
}

pub fn problem_for(map: PlanarMap, geometry: Geometry, boundary_radius: f64) -> Result<PackingProblem, CliError> {
    Ok(match geometry {
        Geometry::Plane => PackingProblem::plane(map, boundary_radius)?,
        Geometry::Disc => PackingProblem::disc(map)?,
    })
}

#[allow(clippy::too_many_arguments)]
pub fn pack_stage(
    map_path: &str,
    map_text: &str,
    geometry: Geometry,
    solver: &SolverConfig,
    boundary_radius: f64,
    root: usize,
    prov: &Provenance,
    dir: &Path,
) -> Result<PackSummary, CliError> {
    let map = input(map_path, parse_map(map_text))?.map;
    let problem = problem_for(map, geometry, boundary_radius)?;
    let mut summary = PackSummary {
        provenance: prov.clone(),
        map_sha256: sha256_hex(map_text.as_bytes()),
        geometry,
        solver: *solver,
        converged: false,
        error: None,
        report: None,
        tangency_residual: None,
        packing_sha256: None,
    };
    match pack(&problem, solver, root) {
        Ok(p) => {
            summary.converged = true;
            summary.report = Some(p.report);
            summary.tangency_residual = Some(p.tangency_residual);
            summary.packing_sha256 = Some(write(dir, "packing.csv", &write_packing_csv(&p.circles, &prov.lines()))?);
            write(dir, "pack_report.json", &json(&summary))?;
            Ok(summary)
        }
        Err(e) => {
            if let PackError::NoConvergence { iters, defect, .. } = e {
                summary.report = Some(SolverReport { iters, final_defect: defect, residual: f64::NAN });
            }
            summary.error = Some(e.to_string());
            write(dir, "pack_report.json", &json(&summary))?;
            Err(e.into())
        }
    }
}

/// Rebuilds a walkable packed map from map and packing files.
pub fn load_packed(map_path: &str, map_text: &str, packing_path: &str, packing_text: &str, root: usize, collar: usize) -> Result<PackedMap, CliError> {
    let map = input(map_path, parse_map(map_text))?.map;
    let circles = input(packing_path, parse_packing_csv(packing_text))?;
    if circles.len() != map.vertex_count() {
        return Err(CliError::Config(format!(
            "packing has {} circles but the map has {} vertices",
            circles.len(),
            map.vertex_count()
        )));
    }
    if root >= map.vertex_count() {
        return Err(CliError::Config(format!("root {root} out of range")));
    }
    let geometry = if circles.first().is_some_and(|c| c.hyper.is_some()) { Geometry::Disc } else { Geometry::Plane };
    let values = circles.iter().map(|c| c.hyper.map_or(c.r, |h| h.radius)).collect();
    let problem = problem_for(map, geometry, 1.0)?;
    let mut packing = Packing {
        geometry,
        circles,
        radii: Radii { geometry, values },
        tangency_residual: 0.0,
        normalization: (root, root),
        report: SolverReport { iters: 0, final_defect: f64::NAN, residual: f64::NAN },
    };
    packing.tangency_residual = packing.relative_residual(&problem.map);
    Ok(PackedMap::new(problem, packing, root, collar))
}

#[derive(Debug, Serialize)]
pub struct WalkSummary {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub walks: usize,
    pub steps: usize,
    pub collar: usize,
    pub root: usize,
    pub stopped_at_collar: usize,
    pub trajectories_sha256: String,
}

pub fn walk_stage(host: &PackedMap, walks: usize, steps: usize, seed: u64, prov: &Provenance, dir: &Path) -> Result<WalkSummary, CliError> {
    if host.in_collar(host.root) {
        return Err(CliError::Config(format!("root {} lies in the collar", host.root)));
    }
    let out = observed_walks(host, &host.start(), walks, steps, seed, 0);
    let paths: Vec<Vec<usize>> = out.iter().map(|w| w.states.clone()).collect();
    let trajectories_sha256 = write(dir, "trajectories.csv", &write_trajectories_csv(&paths, &prov.lines()))?;
    let summary = WalkSummary {
        provenance: prov.clone(),
        walks,
        steps,
        collar: host.collar,
        root: host.root,
        stopped_at_collar: out.iter().filter(|w| w.exited).count(),
        trajectories_sha256,
    };
    write(dir, "walk.json", &json(&summary))?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
pub struct Inputs {
    pub map_sha256: String,
    pub packing_sha256: String,
    pub trajectories_sha256: String,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub inputs: Inputs,
    pub spec: AnalysisSpec,
    pub walks_total: usize,
    /// Walks that ran their full length (shorter ones stopped at the collar).
    pub walks_used: usize,
    pub speed: Option<SpeedEstimate>,
    pub discrepancy_z: Option<f64>,
    pub exits_observed: usize,
    pub exit_histogram: Option<ExitHistogram>,
    pub check_passed: bool,
    pub check_message: String,
}

pub struct AnalyzeInputs<'a> {
    pub map: (&'a str, &'a str),
    pub packing: (&'a str, &'a str),
    pub trajectories: (&'a str, &'a str),
    pub root: usize,
}

pub fn analyze_stage(inp: &AnalyzeInputs, spec: &AnalysisSpec, check: bool, prov: &Provenance, dir: &Path) -> Result<AnalysisReport, CliError> {
    let host = load_packed(inp.map.0, inp.map.1, inp.packing.0, inp.packing.1, inp.root, 0)?;
    let paths = input(inp.trajectories.0, parse_trajectories_csv(inp.trajectories.1))?;
    let n = host.map().vertex_count();
    if let Some(v) = paths.iter().flatten().find(|&&v| v >= n) {
        return Err(CliError::Config(format!("trajectory vertex {v} out of range")));
    }
    let full = paths.iter().map(Vec::len).max().unwrap_or(0);
    let walks: Vec<ObservedWalk<usize>> = paths
        .iter()
        .filter(|p| p.len() == full)
        .enumerate()
        .map(|(i, p)| ObservedWalk {
            seed: prov.seed.unwrap_or_default(),
            stream: i as u64,
            states: p.clone(),
            obs: p.iter().map(|v| host.observe(v)).collect(),
            exited: false,
        })
        .collect();
    let speed = if walks.len() >= 2 { Some(estimate_speed(&walks, spec.burn_in)?) } else { None };
    let discrepancy_z = speed.as_ref().and_then(SpeedEstimate::discrepancy_z);
    let angles: Vec<f64> = paths
        .iter()
        .filter_map(|p| {
            let obs: Vec<_> = p.iter().map(|v| host.observe(v)).collect();
            exit_point(&obs, spec.eps).ok().map(|(a, _)| a)
        })
        .collect();
    let exit_histogram = if angles.is_empty() { None } else { Some(exit_histogram(&angles, spec.level)?) };

    let hyperbolic = host.packing.geometry == Geometry::Disc;
    let (check_passed, check_message) = match (&speed, discrepancy_z) {
        (None, _) => (false, format!("{} of {} walks ran their full length; need 2", walks.len(), paths.len())),
        (Some(_), Some(z)) if hyperbolic => (z <= spec.max_z, format!("speed/decay discrepancy {z:.3} SE (limit {})", spec.max_z)),
        (Some(s), _) => (true, format!("plane packing: decay rate {:e}", s.decay_rate)),
    };

    if let Some(first) = walks.first() {
        let start = ((first.obs.len() - 1) as f64 * spec.burn_in).ceil() as usize;
        let mut rows = Vec::new();
        for t in 0..first.obs.len() {
            let m = walks.len() as f64;
            let decay = walks.iter().map(|w| w.obs[t].neg_log_r).sum::<f64>() / m;
            let mut row = vec![t as f64, decay];
            if hyperbolic {
                let dist = walks.iter().map(|w| w.obs[t].hyp.map_or(f64::NAN, |h| h.dist)).sum::<f64>() / m;
                row.push(dist);
            }
            row.push(f64::from(u8::from(t >= start)));
            rows.push(row);
        }
        let cols: &[&str] = if hyperbolic {
            &["step", "mean_neg_log_r", "mean_dist", "in_fit"]
        } else {
            &["step", "mean_neg_log_r", "in_fit"]
        };
        write(dir, "speed.csv", &write_table_csv(cols, &rows, &prov.lines()))?;
    }
    if let Some(h) = &exit_histogram {
        let bins = h.counts.len() as f64;
        let rows: Vec<Vec<f64>> = h
            .counts
            .iter()
            .enumerate()
            .map(|(j, &c)| vec![j as f64, 2.0 * std::f64::consts::PI * j as f64 / bins, c as f64])
            .collect();
        write(dir, "exit_histogram.csv", &write_table_csv(&["arc", "start_angle", "count"], &rows, &prov.lines()))?;
    }
    let report = AnalysisReport {
        provenance: prov.clone(),
        inputs: Inputs {
            map_sha256: sha256_hex(inp.map.1.as_bytes()),
            packing_sha256: sha256_hex(inp.packing.1.as_bytes()),
            trajectories_sha256: sha256_hex(inp.trajectories.1.as_bytes()),
        },
        spec: spec.clone(),
        walks_total: paths.len(),
        walks_used: walks.len(),
        speed,
        discrepancy_z,
        exits_observed: angles.len(),
        exit_histogram,
        check_passed,
        check_message: check_message.clone(),
    };
    write(dir, "report.json", &json(&report))?;
    if check && !check_passed {
        return Err(CliError::Check(check_message));
    }
    Ok(report)
}

pub fn render_stage(map_text: Option<(&str, &str)>, packing: (&str, &str), edges: bool, size: f64, prov: &Provenance, out: &Path) -> Result<String, CliError> {
    let circles = input(packing.0, parse_packing_csv(packing.1))?;
    let map = match map_text {
        Some((p, t)) => Some(input(p, parse_map(t))?.map),
        None => None,
    };
    let geometry = if circles.first().is_some_and(|c| c.hyper.is_some()) { Geometry::Disc } else { Geometry::Plane };
    let opts = RenderOptions { size, edges, header: prov.lines() };
    let svg = render_svg(&circles, geometry, map.as_ref(), &opts);
    let dir = out.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
    let name = out.file_name().and_then(|n| n.to_str()).ok_or_else(|| CliError::Config("render output needs a file name".into()))?;
    write(&dir, name, &svg)
}
