//! Circle packings of triangulated discs in the plane and in the hyperbolic disc.
//!
//! Radii are found by the uniform-neighbour fixed point: each interior radius
//! is replaced by the radius that would give angle sum `2 pi` if all of its
//! neighbours were equal, which reproduces the current angle sum. Disc
//! packings use `s = exp(-h)` as unknowns so boundary horocycles are exactly
//! `s = 0`. Layout then propagates tangencies face by face.

pub mod tiling;

use std::collections::VecDeque;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypgeo::{self, Mobius};
use crate::map::{MapError, PlanarMap, Submap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PackError {
    #[error("no convergence after {iters} sweeps, worst angle-sum defect {defect:e} at vertex {vertex}")]
    NoConvergence { iters: usize, defect: f64, vertex: usize },
    #[error("layout tangency residual {residual:e} exceeds the allowed {limit:e}")]
    LayoutInconsistent { residual: f64, limit: f64 },
    #[error("map has no marked boundary face")]
    MissingBoundary,
    #[error("face {0} is not a triangle")]
    NotATriangulation(usize),
    #[error("boundary walk repeats a vertex")]
    BoundaryNotSimple,
    #[error("normalisation vertex {0} must be interior and adjacent to the second vertex")]
    BadNormalization(usize),
    #[error("invalid solver configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    Plane,
    Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    #[default]
    Ascending,
    Descending,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_iters: usize,
    pub damping: f64,
    pub order: SweepOrder,
    /// Largest accepted relative tangency error after layout.
    pub layout_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { tol: 1e-12, max_iters: 200_000, damping: 1.0, order: SweepOrder::Ascending, layout_tol: 1e-6 }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), PackError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(PackError::BadConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(PackError::BadConfig(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if !(self.layout_tol > 0.0) {
            return Err(PackError::BadConfig(format!("layout_tol must be positive, got {}", self.layout_tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryCondition {
    /// Fixed Euclidean radii for boundary vertices (entries for interior
    /// vertices are initial guesses).
    FixedRadii(Vec<f64>),
    /// Boundary vertices are horocycles.
    Horocycles,
}

/// A triangulated disc together with its geometry and boundary condition.
#[derive(Debug, Clone)]
pub struct PackingProblem {
    pub map: PlanarMap,
    pub geometry: Geometry,
    pub boundary: BoundaryCondition,
    interior: Vec<bool>,
}

impl PackingProblem {
    pub fn new(map: PlanarMap, geometry: Geometry, boundary: BoundaryCondition) -> Result<Self, PackError> {
        let bf = map.boundary_face().ok_or(PackError::MissingBoundary)?;
        for f in 0..map.face_count() {
            if f != bf && map.face_degree(f) != 3 {
                return Err(PackError::NotATriangulation(f));
            }
        }
        let walk = map.face_vertices(bf);
        let mut sorted = walk.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != walk.len() {
            return Err(PackError::BoundaryNotSimple);
        }
        if let BoundaryCondition::FixedRadii(r) = &boundary {
            if r.len() != map.vertex_count() || r.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
                return Err(PackError::BadConfig("fixed radii must be positive, one per vertex".into()));
            }
        }
        let on_boundary = map.boundary_vertices();
        let interior = on_boundary.iter().map(|&b| !b).collect();
        Ok(PackingProblem { map, geometry, boundary, interior })
    }

    /// Plane problem with every boundary radius equal to `radius`.
    pub fn plane(map: PlanarMap, radius: f64) -> Result<Self, PackError> {
        let n = map.vertex_count();
        PackingProblem::new(map, Geometry::Plane, BoundaryCondition::FixedRadii(vec![radius; n]))
    }

    /// Disc problem with horocycle boundary.
    pub fn disc(map: PlanarMap) -> Result<Self, PackError> {
        PackingProblem::new(map, Geometry::Disc, BoundaryCondition::Horocycles)
    }

    pub fn is_interior(&self, v: usize) -> bool {
        self.interior[v]
    }

    pub fn interior(&self) -> &[bool] {
        &self.interior
    }
}

/// Radii of a packing: Euclidean radii in the plane, hyperbolic radii in the
/// disc (`f64::INFINITY` for horocycles).
#[derive(Debug, Clone, PartialEq)]
pub struct Radii {
    pub geometry: Geometry,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub iters: usize,
    pub final_defect: f64,
    pub residual: f64,
}

/// Internal unknowns: Euclidean radii, or `s = exp(-h)` in the disc.
fn corner(geometry: Geometry, x: f64, x1: f64, x2: f64) -> f64 {
    match geometry {
        Geometry::Plane => hypgeo::euclid_angle(x, x1, x2),
        Geometry::Disc => hypgeo::hyper_angle_s(x, x1, x2),
    }
}

fn angle_sum_raw(map: &PlanarMap, geometry: Geometry, bf: Option<usize>, x: &[f64], v: usize) -> f64 {
    let mut sum = 0.0;
    for d in map.darts(v) {
        if Some(map.face_of(d)) == bf {
            continue;
        }
        let u = map.head(d);
        let w = map.head(map.next_in_face(d));
        sum += corner(geometry, x[v], x[u], x[w]);
    }
    sum
}

fn uniform_neighbour_target(geometry: Geometry, x: f64, theta: f64, k: usize) -> f64 {
    let kf = k as f64;
    let beta = (theta / (2.0 * kf)).sin();
    let delta = (PI / kf).sin();
    match geometry {
        Geometry::Plane => {
            let u = x * beta / (1.0 - beta);
            u * (1.0 - delta) / delta
        }
        Geometry::Disc => {
            let u2 = ((x - beta) / (x * (1.0 - beta * x))).max(0.0);
            let a = 1.0 - u2;
            2.0 * delta / (a + (a * a + 4.0 * delta * delta * u2).sqrt())
        }
    }
}

/// Sum of corner angles at `v` over its non-boundary faces.
pub fn angle_sum(map: &PlanarMap, radii: &Radii, v: usize) -> f64 {
    match radii.geometry {
        Geometry::Plane => angle_sum_raw(map, Geometry::Plane, map.boundary_face(), &radii.values, v),
        Geometry::Disc => {
            let s: Vec<f64> = radii.values.iter().map(|h| (-h).exp()).collect();
            angle_sum_raw(map, Geometry::Disc, map.boundary_face(), &s, v)
        }
    }
}

/// Solves for the radii, optionally from a starting guess.
pub fn solve_radii(
    problem: &PackingProblem,
    config: &SolverConfig,
    start: Option<&Radii>,
) -> Result<(Radii, SolverReport), PackError> {
    config.validate()?;
    let map = &problem.map;
    let n = map.vertex_count();
    let geometry = problem.geometry;
    let bf = map.boundary_face();
    let mut x: Vec<f64> = match (&problem.boundary, geometry) {
        (BoundaryCondition::FixedRadii(r), _) => r.clone(),
        (BoundaryCondition::Horocycles, _) => (0..n).map(|v| if problem.interior[v] { 0.5 } else { 0.0 }).collect(),
    };
    if let Some(st) = start {
        for v in 0..n {
            if problem.interior[v] {
                x[v] = match geometry {
                    Geometry::Plane => st.values[v],
                    Geometry::Disc => (-st.values[v]).exp(),
                };
            }
        }
    }
    if matches!(problem.boundary, BoundaryCondition::Horocycles) && geometry == Geometry::Plane {
        return Err(PackError::BadConfig("horocycle boundary needs disc geometry".into()));
    }
    let mut order: Vec<usize> = (0..n).filter(|&v| problem.interior[v]).collect();
    if config.order == SweepOrder::Descending {
        order.reverse();
    }
    let two_pi = 2.0 * PI;
    let worst = |x: &[f64]| {
        let mut w = (0.0, usize::MAX);
        for &v in &order {
            let d = (angle_sum_raw(map, geometry, bf, x, v) - two_pi).abs();
            if d > w.0 || w.1 == usize::MAX {
                w = (d, v);
            }
        }
        w
    };
    let mut iters = 0;
    let mut defect = worst(&x);
    while defect.0 >= config.tol {
        if iters >= config.max_iters {
            return Err(PackError::NoConvergence { iters, defect: defect.0, vertex: defect.1 });
        }
        for &v in &order {
            let theta = angle_sum_raw(map, geometry, bf, &x, v);
            let target = uniform_neighbour_target(geometry, x[v], theta, map.degree(v));
            x[v] += config.damping * (target - x[v]);
        }
        iters += 1;
        defect = worst(&x);
    }
    let values = match geometry {
        Geometry::Plane => x,
        Geometry::Disc => x.iter().map(|&s| if s == 0.0 { f64::INFINITY } else { -s.ln() }).collect(),
    };
    let final_defect = if order.is_empty() { 0.0 } else { defect.0 };
    Ok((Radii { geometry, values }, SolverReport { iters, final_defect, residual: f64::NAN }))
}

/// Hyperbolic description of a circle; infinite radius marks a horocycle,
/// whose centre is then its point of tangency with the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HyperCircle {
    pub centre: Complex64,
    pub radius: f64,
}

impl HyperCircle {
    pub fn is_horocycle(&self) -> bool {
        self.radius.is_infinite()
    }
}

/// One vertex's circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirclePair {
    pub z: Complex64,
    pub r: f64,
    pub hyper: Option<HyperCircle>,
}

#[derive(Debug, Clone)]
pub struct Packing {
    pub geometry: Geometry,
    pub circles: Vec<CirclePair>,
    pub radii: Radii,
    pub tangency_residual: f64,
    pub normalization: (usize, usize),
    pub report: SolverReport,
}

impl Packing {
    /// Largest relative tangency error `| |z_u - z_v| - r_u - r_v | / (r_u + r_v)`.
    pub fn relative_residual(&self, map: &PlanarMap) -> f64 {
        let mut worst: f64 = 0.0;
        for e in 0..map.edge_count() {
            let (u, v) = map.edge_ends(e);
            let (a, b) = (&self.circles[u], &self.circles[v]);
            let s = a.r + b.r;
            worst = worst.max(((a.z - b.z).norm() - s).abs() / s);
        }
        worst
    }
}

fn absolute_residual(map: &PlanarMap, circles: &[CirclePair]) -> f64 {
    let mut worst: f64 = 0.0;
    for e in 0..map.edge_count() {
        let (u, v) = map.edge_ends(e);
        let (a, b) = (&circles[u], &circles[v]);
        worst = worst.max(((a.z - b.z).norm() - (a.r + b.r)).abs());
    }
    worst
}

#[derive(Debug, Clone, Copy)]
enum Placed {
    Plane { z: Complex64, r: f64 },
    Hyper { zh: Complex64, h: f64 },
    Horo { centre: Complex64, rho: f64, xi: Complex64 },
}

fn c1() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// Places the circles with `u` centred at the origin and `v` centred on the
/// positive real axis.
pub fn layout(
    problem: &PackingProblem,
    radii: &Radii,
    report: SolverReport,
    normalization: (usize, usize),
    layout_tol: f64,
) -> Result<Packing, PackError> {
    let map = &problem.map;
    let (u0, v0) = normalization;
    if u0 >= map.vertex_count() || !problem.interior[u0] {
        return Err(PackError::BadNormalization(u0));
    }
    let d0 = map.dart_between(u0, v0).ok_or(PackError::BadNormalization(v0))?;
    let geometry = problem.geometry;
    let rv = &radii.values;
    let s: Vec<f64> = rv.iter().map(|h| (-h).exp()).collect();
    let mut placed: Vec<Option<Placed>> = vec![None; map.vertex_count()];

    match geometry {
        Geometry::Plane => {
            placed[u0] = Some(Placed::Plane { z: Complex64::new(0.0, 0.0), r: rv[u0] });
            placed[v0] = Some(Placed::Plane { z: Complex64::new(rv[u0] + rv[v0], 0.0), r: rv[v0] });
        }
        Geometry::Disc => {
            placed[u0] = Some(Placed::Hyper { zh: Complex64::new(0.0, 0.0), h: rv[u0] });
            placed[v0] = Some(if rv[v0].is_infinite() {
                let rho = (1.0 - (rv[u0] / 2.0).tanh()) / 2.0;
                Placed::Horo { centre: Complex64::new(1.0 - rho, 0.0), rho, xi: c1() }
            } else {
                Placed::Hyper { zh: Complex64::new(((rv[u0] + rv[v0]) / 2.0).tanh(), 0.0), h: rv[v0] }
            });
        }
    }

    let bf = map.boundary_face();
    let mut done = vec![false; map.face_count()];
    let mut queue = VecDeque::from([d0]);
    while let Some(d) = queue.pop_front() {
        let f = map.face_of(d);
        if done[f] || Some(f) == bf {
            continue;
        }
        done[f] = true;
        let e = map.next_in_face(d);
        let (a, b, c) = (map.tail(d), map.head(d), map.head(e));
        if placed[c].is_none() {
            let pa = placed[a].expect("placed");
            let pb = placed[b].expect("placed");
            placed[c] = Some(match geometry {
                Geometry::Plane => place_plane(pa, pb, rv[a], rv[b], rv[c]),
                Geometry::Disc => place_disc(pa, pb, s[a], s[b], s[c], rv[c]),
            });
        }
        for dd in [d, e, map.next_in_face(e)] {
            queue.push_back(map.twin(dd));
        }
    }

    let mut circles = Vec::with_capacity(map.vertex_count());
    for (v, p) in placed.iter().enumerate() {
        let p = p.ok_or(PackError::BadNormalization(v))?;
        circles.push(match p {
            Placed::Plane { z, r } => CirclePair { z, r, hyper: None },
            Placed::Hyper { zh, h } => {
                let (z, r) = hypgeo::hyper_to_euclid(zh, h).map_err(|_| PackError::LayoutInconsistent {
                    residual: f64::INFINITY,
                    limit: layout_tol,
                })?;
                CirclePair { z, r, hyper: Some(HyperCircle { centre: zh, radius: h }) }
            }
            Placed::Horo { centre, rho, xi } => {
                CirclePair { z: centre, r: rho, hyper: Some(HyperCircle { centre: xi, radius: f64::INFINITY }) }
            }
        });
    }
    let mut packing = Packing {
        geometry,
        tangency_residual: absolute_residual(map, &circles),
        circles,
        radii: radii.clone(),
        normalization,
        report,
    };
    packing.report.residual = packing.tangency_residual;
    let rel = packing.relative_residual(map);
    if !(rel <= layout_tol) {
        return Err(PackError::LayoutInconsistent { residual: rel, limit: layout_tol });
    }
    Ok(packing)
}

fn place_plane(pa: Placed, pb: Placed, ra: f64, rb: f64, rc: f64) -> Placed {
    let (Placed::Plane { z: za, .. }, Placed::Plane { z: zb, .. }) = (pa, pb) else {
        unreachable!("plane layout only stores plane circles")
    };
    let alpha = hypgeo::euclid_angle(ra, rb, rc);
    let dir = (zb - za) / (zb - za).norm();
    Placed::Plane { z: za + dir * Complex64::from_polar(ra + rc, alpha), r: rc }
}

/// Position of a circle relative to a finite circle centred at the origin.
fn at_origin(ha: f64, hc: f64, psi: f64) -> Placed {
    let dir = Complex64::from_polar(1.0, psi);
    if hc.is_infinite() {
        let rho = (1.0 - (ha / 2.0).tanh()) / 2.0;
        Placed::Horo { centre: dir * (1.0 - rho), rho, xi: dir }
    } else {
        Placed::Hyper { zh: dir * ((ha + hc) / 2.0).tanh(), h: hc }
    }
}

fn transform(m: &Mobius, p: Placed) -> Placed {
    match p {
        Placed::Hyper { zh, h } => Placed::Hyper { zh: m.apply(zh).expect("disc automorphism"), h },
        Placed::Horo { centre, rho, xi } => {
            let (c, r) = m.map_circle(centre, rho).expect("horocycles avoid the pole");
            let x = m.apply(xi).expect("disc automorphism");
            Placed::Horo { centre: c, rho: r, xi: x / x.norm() }
        }
        Placed::Plane { .. } => p,
    }
}

/// Direction, seen from the origin, of a circle placed after recentring.
fn direction(p: Placed) -> f64 {
    match p {
        Placed::Hyper { zh, .. } => zh.arg(),
        Placed::Horo { xi, .. } => xi.arg(),
        Placed::Plane { z, .. } => z.arg(),
    }
}

fn place_disc(pa: Placed, pb: Placed, sa: f64, sb: f64, sc: f64, hc: f64) -> Placed {
    match (pa, pb) {
        (Placed::Hyper { zh, h }, _) => {
            let t = hypgeo::recentre(zh);
            let phi = direction(transform(&t, pb));
            let alpha = hypgeo::hyper_angle_s(sa, sb, sc);
            transform(&t.inverse(), at_origin(h, hc, phi + alpha))
        }
        (_, Placed::Hyper { zh, h }) => {
            let t = hypgeo::recentre(zh);
            let phi = direction(transform(&t, pa));
            let beta = hypgeo::hyper_angle_s(sb, sc, sa);
            transform(&t.inverse(), at_origin(h, hc, phi - beta))
        }
        (Placed::Horo { centre: ca, rho: ra, xi: xa }, Placed::Horo { centre: cb, .. }) => {
            // frame: tangency point at 0, a touching at 1, b at -1
            let p = ca + (cb - ca) * (ra / (cb - ca).norm());
            let t = hypgeo::recentre(p);
            let ta = t.apply(xa).expect("disc automorphism");
            let rot = ta.conj() / ta.norm();
            let m = Mobius { a: t.a * rot, b: t.b * rot, c: t.c, d: t.d };
            let local = if hc.is_infinite() {
                Placed::Horo {
                    centre: Complex64::new(0.0, -2.0 / 3.0),
                    rho: 1.0 / 3.0,
                    xi: Complex64::new(0.0, -1.0),
                }
            } else {
                let th = hc.tanh();
                let rho = th / (2.0 + th);
                let m_c = (rho * rho + rho).sqrt();
                let (zh, _) = hypgeo::euclid_to_hyper(Complex64::new(0.0, -m_c), rho).expect("inside disc");
                Placed::Hyper { zh, h: hc }
            };
            transform(&m.inverse(), local)
        }
        _ => unreachable!("disc layout only stores disc circles"),
    }
}

/// Solves and lays out in one step, normalised at `(root, first neighbour)`.
pub fn pack(problem: &PackingProblem, config: &SolverConfig, root: usize) -> Result<Packing, PackError> {
    let (radii, report) = solve_radii(problem, config, None)?;
    let v = problem.map.neighbors(root).next().ok_or(PackError::BadNormalization(root))?;
    layout(problem, &radii, report, (root, v), config.layout_tol)
}

/// Radii ratio statistic `max log(r(v) / r(u)) / deg(v)` over directed edges
/// with `v` interior and among `restrict` when given. Euclidean radii are used.
pub fn ring_report(problem: &PackingProblem, packing: &Packing, restrict: Option<&[bool]>) -> f64 {
    let map = &problem.map;
    let mut c_hat = f64::NEG_INFINITY;
    for v in 0..map.vertex_count() {
        if !problem.is_interior(v) || restrict.is_some_and(|r| !r[v]) {
            continue;
        }
        let rv = packing.circles[v].r;
        for u in map.neighbors(v) {
            let ratio = (rv / packing.circles[u].r).ln() / map.degree(v) as f64;
            c_hat = c_hat.max(ratio);
        }
    }
    c_hat
}

/// One level of an exhaustion, packed.
#[derive(Debug, Clone)]
pub struct ExhaustionLevel {
    pub level: usize,
    pub submap: Submap,
    pub problem: PackingProblem,
    pub packing: Packing,
    /// Radii of the root and its host neighbours, in host rotation order.
    pub b1_radii: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct ExhaustionReport {
    pub levels: Vec<ExhaustionLevel>,
    /// Largest change of a `B_1` radius between consecutive levels.
    pub deltas: Vec<f64>,
}

/// Packs the disc exhaustion of `host` around `root` at the given levels.
/// Each level is normalised with the root at the origin and its first host
/// neighbour on the positive real axis.
pub fn pack_exhaustion(
    host: &PlanarMap,
    root: usize,
    levels: &[usize],
    geometry: Geometry,
    config: &SolverConfig,
) -> Result<ExhaustionReport, PackError> {
    let first = host.neighbors(root).next().ok_or(PackError::BadNormalization(root))?;
    let b1: Vec<usize> = std::iter::once(root).chain(host.neighbors(root)).collect();
    let mut out: Vec<ExhaustionLevel> = Vec::new();
    for (sub, &k) in host.disc_exhaustion(root, levels).into_iter().zip(levels) {
        let problem = match geometry {
            Geometry::Plane => PackingProblem::plane(sub.map.clone(), 1.0)?,
            Geometry::Disc => PackingProblem::disc(sub.map.clone())?,
        };
        let (radii, report) = solve_radii(&problem, config, None)?;
        let (lr, lf) = (
            sub.local_id(root).ok_or(PackError::BadNormalization(root))?,
            sub.local_id(first).ok_or(PackError::BadNormalization(first))?,
        );
        let packing = layout(&problem, &radii, report, (lr, lf), config.layout_tol)?;
        let b1_radii = b1
            .iter()
            .map(|&v| sub.local_id(v).map_or(f64::NAN, |l| radii.values[l]))
            .collect();
        out.push(ExhaustionLevel { level: k, submap: sub, problem, packing, b1_radii });
    }
    let deltas = out
        .windows(2)
        .map(|w| {
            w[0].b1_radii
                .iter()
                .zip(&w[1].b1_radii)
                .map(|(a, b)| if a.is_finite() && b.is_finite() { (a - b).abs() } else { f64::INFINITY })
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ExhaustionReport { levels: out, deltas })
}

#[cfg(test)]
mod tests;
