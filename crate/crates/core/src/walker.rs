//! Random walks on weighted maps, induced networks and walk hosts.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::hypgeo;
use crate::map::PlanarMap;
use crate::packer::tiling::{RegularTiling, TileVertex};
use crate::packer::{Packing, PackingProblem};
use crate::rng::stream_rng;

pub use crate::packer::tiling::{CircleObs, HypObs};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WalkError {
    #[error("vertex {0} has no incident edge of positive weight")]
    IsolatedVertex(usize),
    #[error("hitting system is singular")]
    SingularSystem,
    #[error("the subset is empty")]
    EmptySubset,
    #[error("vertex {0} out of range")]
    BadVertex(usize),
    #[error("walk reached the window boundary collar after {0} steps")]
    TrajectoryExitsWindow(usize),
    #[error("edge weights must be finite and nonnegative")]
    BadWeight,
}

/// Weighted adjacency: `adj[x]` lists `(y, w)` entries; loops of a map
/// appear twice, once per dart. The vertex weight is the entry sum.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adj: Vec<Vec<(usize, f64)>>,
    weight: Vec<f64>,
}

impl WeightedGraph {
    pub fn from_adjacency(adj: Vec<Vec<(usize, f64)>>) -> Result<Self, WalkError> {
        let n = adj.len();
        for list in &adj {
            for &(y, w) in list {
                if y >= n {
                    return Err(WalkError::BadVertex(y));
                }
                if !(w >= 0.0 && w.is_finite()) {
                    return Err(WalkError::BadWeight);
                }
            }
        }
        let weight = adj.iter().map(|l| l.iter().map(|e| e.1).sum()).collect();
        Ok(WeightedGraph { adj, weight })
    }

    /// Unit weight on every edge of `map`.
    pub fn from_map(map: &PlanarMap) -> Self {
        let adj = (0..map.vertex_count()).map(|v| map.neighbors(v).map(|u| (u, 1.0)).collect()).collect();
        WeightedGraph::from_adjacency(adj).expect("maps are valid")
    }

    /// Per-edge weights indexed by the map's edge ids.
    pub fn from_map_weights(map: &PlanarMap, weights: &[f64]) -> Result<Self, WalkError> {
        let adj = (0..map.vertex_count())
            .map(|v| map.darts(v).map(|d| (map.head(d), weights[map.edge_of(d)])).collect())
            .collect();
        WeightedGraph::from_adjacency(adj)
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn entries(&self, x: usize) -> &[(usize, f64)] {
        &self.adj[x]
    }

    /// `w(x)`, the sum of the weights at `x`.
    pub fn weight(&self, x: usize) -> f64 {
        self.weight[x]
    }

    /// Total weight from `x` to `y`.
    pub fn edge_weight(&self, x: usize, y: usize) -> f64 {
        self.adj[x].iter().filter(|e| e.0 == y).map(|e| e.1).sum()
    }

    /// `p(x, y) = w(x, y) / w(x)`.
    pub fn transition(&self, x: usize, y: usize) -> f64 {
        self.edge_weight(x, y) / self.weight[x]
    }

    fn sample_step<R: Rng + ?Sized>(&self, x: usize, rng: &mut R) -> Result<usize, WalkError> {
        let w = self.weight[x];
        if !(w > 0.0) {
            return Err(WalkError::IsolatedVertex(x));
        }
        let mut t = rng.random::<f64>() * w;
        for &(y, wy) in &self.adj[x] {
            if t < wy {
                return Ok(y);
            }
            t -= wy;
        }
        // rounding: fall back to the last positive entry
        Ok(self.adj[x].iter().rev().find(|e| e.1 > 0.0).expect("positive weight").0)
    }
}

/// A walk record with the seed and stream that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub start: usize,
    pub vertices: Vec<usize>,
    pub seed: u64,
    pub stream: u64,
}

impl Trajectory {
    pub fn steps(&self) -> usize {
        self.vertices.len() - 1
    }
}

pub fn simple_random_walk(
    view: &WeightedGraph,
    start: usize,
    steps: usize,
    seed: u64,
    stream: u64,
) -> Result<Trajectory, WalkError> {
    if start >= view.vertex_count() {
        return Err(WalkError::BadVertex(start));
    }
    let mut rng = stream_rng(seed, stream);
    let mut vertices = Vec::with_capacity(steps + 1);
    vertices.push(start);
    let mut x = start;
    for _ in 0..steps {
        x = view.sample_step(x, &mut rng)?;
        vertices.push(x);
    }
    Ok(Trajectory { start, vertices, seed, stream })
}

/// Independent past and future walks from `root`, on streams `2 s` and `2 s + 1`.
pub fn two_sided_walk(
    view: &WeightedGraph,
    root: usize,
    steps: usize,
    seed: u64,
    stream: u64,
) -> Result<(Trajectory, Trajectory), WalkError> {
    Ok((
        simple_random_walk(view, root, steps, seed, 2 * stream)?,
        simple_random_walk(view, root, steps, seed, 2 * stream + 1)?,
    ))
}

/// Times at which the trajectory is in `omega`.
pub fn stopping_times_in(traj: &Trajectory, omega: &[bool]) -> Vec<usize> {
    traj.vertices.iter().enumerate().filter(|(_, &v)| omega[v]).map(|(i, _)| i).collect()
}

/// Network induced on `omega`: `w(u, v) = w(u) P_u(X_{N_1} = v)` where
/// `N_1` is the first positive time in `omega`. Vertices of the result are
/// the members of `omega` in increasing order; returning mass is a single
/// self entry.
pub fn induced_network(view: &WeightedGraph, omega: &[bool]) -> Result<(WeightedGraph, Vec<usize>), WalkError> {
    let n = view.vertex_count();
    let members: Vec<usize> = (0..n).filter(|&v| omega[v]).collect();
    if members.is_empty() {
        return Err(WalkError::EmptySubset);
    }
    let outside: Vec<usize> = (0..n).filter(|&v| !omega[v]).collect();
    let mut in_idx = vec![usize::MAX; n];
    let mut out_idx = vec![usize::MAX; n];
    for (i, &v) in members.iter().enumerate() {
        in_idx[v] = i;
    }
    for (i, &v) in outside.iter().enumerate() {
        out_idx[v] = i;
    }
    // hitting distribution H (outside x members): (I - Q) H = R
    let m = outside.len();
    let k = members.len();
    let hit = if m == 0 {
        DMatrix::zeros(0, k)
    } else {
        let mut a = DMatrix::<f64>::identity(m, m);
        let mut r = DMatrix::<f64>::zeros(m, k);
        for (i, &x) in outside.iter().enumerate() {
            let w = view.weight(x);
            if !(w > 0.0) {
                return Err(WalkError::SingularSystem);
            }
            for &(y, wy) in view.entries(x) {
                let p = wy / w;
                if omega[y] {
                    r[(i, in_idx[y])] += p;
                } else {
                    a[(i, out_idx[y])] -= p;
                }
            }
        }
        let lu = a.lu();
        let h = lu.solve(&r).ok_or(WalkError::SingularSystem)?;
        if h.iter().any(|x| !x.is_finite()) {
            return Err(WalkError::SingularSystem);
        }
        h
    };
    let mut adj = vec![Vec::new(); k];
    for (i, &u) in members.iter().enumerate() {
        let mut row = DVector::<f64>::zeros(k);
        for &(y, wy) in view.entries(u) {
            if omega[y] {
                row[in_idx[y]] += wy;
            } else {
                for j in 0..k {
                    row[j] += wy * hit[(out_idx[y], j)];
                }
            }
        }
        for j in 0..k {
            if row[j] > 0.0 {
                adj[i].push((j, row[j]));
            }
        }
    }
    Ok((WeightedGraph::from_adjacency(adj)?, members))
}

/// Something a walk can run on and observe through a circle packing.
pub trait WalkHost: Sync {
    type State: Clone + Send + Sync;
    fn start(&self) -> Self::State;
    /// Next state, or `None` when the walk leaves the usable window.
    fn step<R: Rng + ?Sized>(&self, s: &Self::State, rng: &mut R) -> Option<Self::State>;
    fn observe(&self, s: &Self::State) -> CircleObs;
}

impl WalkHost for RegularTiling {
    type State = TileVertex;

    fn start(&self) -> TileVertex {
        self.root()
    }

    fn step<R: Rng + ?Sized>(&self, s: &TileVertex, rng: &mut R) -> Option<TileVertex> {
        Some(self.neighbor(s, rng.random_range(0..self.degree())))
    }

    fn observe(&self, s: &TileVertex) -> CircleObs {
        RegularTiling::observe(self, s)
    }
}

/// A finite packed map walked by simple random walk, stopped on entering
/// the collar of vertices within `collar` hops of the boundary.
#[derive(Debug, Clone)]
pub struct PackedMap {
    pub problem: PackingProblem,
    pub packing: Packing,
    pub collar: usize,
    pub root: usize,
    blocked: Vec<bool>,
    origin: Option<Complex64>,
}

impl PackedMap {
    pub fn new(problem: PackingProblem, packing: Packing, root: usize, collar: usize) -> Self {
        let blocked = problem.map.distances_to_boundary().iter().map(|&d| d < collar).collect();
        let origin = packing.circles[root].hyper.map(|h| h.centre);
        PackedMap { problem, packing, collar, root, blocked, origin }
    }

    pub fn in_collar(&self, v: usize) -> bool {
        self.blocked[v]
    }

    pub fn map(&self) -> &PlanarMap {
        &self.problem.map
    }
}

impl WalkHost for PackedMap {
    type State = usize;

    fn start(&self) -> usize {
        self.root
    }

    fn step<R: Rng + ?Sized>(&self, s: &usize, rng: &mut R) -> Option<usize> {
        let map = &self.problem.map;
        let deg = map.degree(*s);
        if deg == 0 {
            return None;
        }
        let d = map.darts(*s).start + rng.random_range(0..deg);
        let next = map.head(d);
        (!self.blocked[next]).then_some(next)
    }

    fn observe(&self, s: &usize) -> CircleObs {
        let c = self.packing.circles[*s];
        let hyp = c.hyper.and_then(|h| {
            if h.is_horocycle() {
                return None;
            }
            let dist = match self.origin {
                Some(o) => hypgeo::dist(o, h.centre).ok()?,
                None => hypgeo::dist_from_origin(h.centre).ok()?,
            };
            Some(HypObs { dist, log_gap_h: (1.0 - h.centre.norm()).ln(), log_gap: (1.0 - c.z.norm()).ln() })
        });
        CircleObs { deg: self.problem.map.degree(*s), arg: c.z.arg(), neg_log_r: -c.r.ln(), hyp }
    }
}

/// Observations along one walk.
#[derive(Debug, Clone)]
pub struct ObservedWalk<S> {
    pub seed: u64,
    pub stream: u64,
    pub states: Vec<S>,
    pub obs: Vec<CircleObs>,
    /// Set when the walk stopped early at the window collar.
    pub exited: bool,
}

pub fn observed_walk<H: WalkHost>(host: &H, start: H::State, steps: usize, seed: u64, stream: u64) -> ObservedWalk<H::State> {
    let mut rng = stream_rng(seed, stream);
    let mut states = Vec::with_capacity(steps + 1);
    let mut obs = Vec::with_capacity(steps + 1);
    obs.push(host.observe(&start));
    states.push(start);
    let mut exited = false;
    for _ in 0..steps {
        match host.step(states.last().expect("nonempty"), &mut rng) {
            Some(next) => {
                obs.push(host.observe(&next));
                states.push(next);
            }
            None => {
                exited = true;
                break;
            }
        }
    }
    ObservedWalk { seed, stream, states, obs, exited }
}

/// `count` walks on streams `first_stream..first_stream + count`, in order.
pub fn observed_walks<H: WalkHost>(
    host: &H,
    start: &H::State,
    count: usize,
    steps: usize,
    seed: u64,
    first_stream: u64,
) -> Vec<ObservedWalk<H::State>> {
    (0..count as u64)
        .into_par_iter()
        .map(|i| observed_walk(host, start.clone(), steps, seed, first_stream + i))
        .collect()
}

impl ObservedWalk<usize> {
    pub fn trajectory(&self) -> Trajectory {
        Trajectory { start: self.states[0], vertices: self.states.clone(), seed: self.seed, stream: self.stream }
    }
}
