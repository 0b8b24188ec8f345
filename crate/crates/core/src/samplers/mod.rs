//! Deterministic regular triangulations and the hyperbolic Poisson–Delaunay
//! triangulation.

mod delaunay;
mod poisson;

pub use poisson::{poisson_delaunay_hyp, poisson_points, EmbeddedSample, SampleWindow};

use thiserror::Error;

use crate::map::{MapError, PlanarMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SamplerError {
    #[error("degree must be at least 6, got {0}")]
    DegreeTooSmall(usize),
    #[error("at least one generation is required")]
    NoGenerations,
    #[error("only {0} points sampled; a triangle needs three")]
    TooFewPoints(usize),
    #[error("invalid parameter: {0}")]
    BadParameter(String),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// Ball of hop radius `generations` in the `d`-regular triangulation, built
/// layer by layer, with its outer face marked as boundary. Vertex 0 is the
/// centre and vertices are numbered by layer.
pub fn regular_triangulation(d: usize, generations: usize) -> Result<PlanarMap, SamplerError> {
    if d < 6 {
        return Err(SamplerError::DegreeTooSmall(d));
    }
    if generations == 0 {
        return Err(SamplerError::NoGenerations);
    }
    // inner[v]: neighbours in the previous layer, ordered from the next
    // cycle vertex's side to the previous one's
    let mut inner: Vec<Vec<usize>> = vec![Vec::new()];
    let mut rotations: Vec<Vec<usize>> = vec![(1..=d).collect()];
    let mut layer: Vec<usize> = (1..=d).collect();
    inner.extend((0..d).map(|_| vec![0]));
    for gen in 1..=generations {
        let m = layer.len();
        let mut next_layer: Vec<usize> = Vec::new();
        let mut outward: Vec<Vec<usize>> = vec![Vec::new(); m];
        if gen < generations {
            let mut next_id = inner.len();
            let mut fresh = |inner: &mut Vec<Vec<usize>>, list: Vec<usize>| {
                inner.push(list);
                next_id += 1;
                next_id - 1
            };
            // shared[i] is the vertex joined to layer[i] and layer[i + 1]
            let mut shared = Vec::with_capacity(m);
            let mut exclusive: Vec<Vec<usize>> = Vec::with_capacity(m);
            for i in 0..m {
                let b = layer[i];
                let out = d - inner[b].len() - 2;
                let ex = (0..out - 2).map(|_| fresh(&mut inner, vec![b])).collect();
                exclusive.push(ex);
                shared.push(fresh(&mut inner, vec![layer[(i + 1) % m], b]));
            }
            for i in 0..m {
                let prev_shared = shared[(i + m - 1) % m];
                outward[i].push(prev_shared);
                outward[i].extend(&exclusive[i]);
                outward[i].push(shared[i]);
                next_layer.extend(&exclusive[i]);
                next_layer.push(shared[i]);
            }
        }
        for i in 0..m {
            let b = layer[i];
            let mut rot = vec![layer[(i + 1) % m]];
            rot.extend(&inner[b]);
            rot.push(layer[(i + m - 1) % m]);
            rot.extend(&outward[i]);
            rotations.push(rot);
        }
        layer = next_layer;
    }
    // layers are numbered consecutively, so `rotations` is indexed by id
    let mut map = PlanarMap::from_rotations(&rotations)?;
    let f = (0..map.face_count())
        .find(|&f| map.face_degree(f) > 3)
        .expect("the outer face is the only non-triangle");
    map.set_boundary_face(Some(f));
    Ok(map)
}
