//! Refinement of a degree-capped site percolation by removing clusters
//! with small edge boundary.

use rand::Rng;
use serde::Serialize;

use crate::map::{Percolation, PlanarMap};
use crate::rng::stream_rng;

/// A marked cluster that was tested in some round and kept.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestedCluster {
    pub round: usize,
    pub vertices: Vec<usize>,
    /// Edges of the current configuration leaving the cluster.
    pub boundary_edges: usize,
}

#[derive(Debug, Clone)]
pub struct BlsReport<'a> {
    pub omega: Percolation<'a>,
    /// Open-vertex sets before each round.
    pub history: Vec<Vec<bool>>,
    pub kept: Vec<TestedCluster>,
    pub removed: usize,
}

impl BlsReport<'_> {
    /// Fraction of the vertices with `select[v]` that are still open.
    pub fn surviving_fraction(&self, select: &[bool]) -> f64 {
        let total = select.iter().filter(|&&s| s).count();
        let open = (0..select.len()).filter(|&v| select[v] && self.omega.open_vertices[v]).count();
        open as f64 / total as f64
    }
}

/// Starting from the vertices of degree at most `m_cap`, each round marks
/// open vertices independently with probability 1/2 and closes every marked
/// cluster that avoids the boundary face and has fewer than `delta |K|`
/// open edges leaving it.
pub fn bls_refinement(map: &PlanarMap, m_cap: usize, delta: f64, rounds: usize, seed: u64, stream: u64) -> BlsReport<'_> {
    let n = map.vertex_count();
    let boundary = map.boundary_vertices();
    let mut rng = stream_rng(seed, stream);
    let mut open: Vec<bool> = (0..n).map(|v| map.degree(v) <= m_cap).collect();
    let mut history = Vec::with_capacity(rounds);
    let mut kept = Vec::new();
    let mut removed = 0;
    for round in 0..rounds {
        history.push(open.clone());
        let marked: Vec<bool> = (0..n).map(|v| open[v] && rng.random::<f64>() < 0.5).collect();
        let mut seen = vec![false; n];
        let mut to_close = Vec::new();
        for s in 0..n {
            if !marked[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut cluster = vec![s];
            let mut i = 0;
            while i < cluster.len() {
                let x = cluster[i];
                i += 1;
                for y in map.neighbors(x) {
                    if marked[y] && !seen[y] {
                        seen[y] = true;
                        cluster.push(y);
                    }
                }
            }
            if cluster.iter().any(|&x| boundary[x]) {
                continue;
            }
            let mut inside = vec![false; 0];
            inside.resize(n, false);
            for &x in &cluster {
                inside[x] = true;
            }
            let boundary_edges = cluster
                .iter()
                .flat_map(|&x| map.neighbors(x))
                .filter(|&y| open[y] && !inside[y])
                .count();
            if (boundary_edges as f64) < delta * cluster.len() as f64 {
                to_close.extend(cluster);
            } else {
                cluster.sort_unstable();
                kept.push(TestedCluster { round, vertices: cluster, boundary_edges });
            }
        }
        removed += to_close.len();
        for x in to_close {
            open[x] = false;
        }
    }
    BlsReport { omega: Percolation::from_sites(map, open), history, kept, removed }
}
