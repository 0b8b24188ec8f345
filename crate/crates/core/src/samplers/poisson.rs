//! Poisson–Delaunay triangulation of a hyperbolic ball.

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use super::delaunay::{circumcircle, delaunay};
use super::SamplerError;
use crate::hypgeo;
use crate::map::{PlanarMap, RootMode, RootedMap};
use crate::rng::stream_rng;

/// Hyperbolic ball `B_R` around the origin with an inner window `B_{R - margin}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleWindow {
    #[serde(rename = "R")]
    pub radius: f64,
    pub margin: f64,
}

impl SampleWindow {
    pub fn new(radius: f64, margin: f64) -> Result<Self, SamplerError> {
        if !(margin > 0.0 && margin < radius && radius.is_finite()) {
            return Err(SamplerError::BadParameter(format!("window needs 0 < margin < R, got R={radius}, margin={margin}")));
        }
        Ok(SampleWindow { radius, margin })
    }

    /// Window with inner radius `inner` and a margin whose half-width disc
    /// holds `points` process points on average at intensity `lambda`.
    pub fn scaled(lambda: f64, inner: f64, points: f64) -> Result<Self, SamplerError> {
        if !(lambda > 0.0 && points > 0.0) {
            return Err(SamplerError::BadParameter(format!("lambda={lambda}, points={points}")));
        }
        let margin = 2.0 * (1.0 + points / (2.0 * PI * lambda)).acosh();
        SampleWindow::new(inner + margin, margin)
    }

    /// Hyperbolic area of `B_R`.
    pub fn area(&self) -> f64 {
        2.0 * PI * (self.radius.cosh() - 1.0)
    }

    pub fn inner_radius(&self) -> f64 {
        self.radius - self.margin
    }
}

/// Poisson–Delaunay sample restricted to the inner window.
#[derive(Debug, Clone)]
pub struct EmbeddedSample {
    /// Triangulated disc of reliable faces inside the inner window, rooted at
    /// the origin point.
    pub map: RootedMap,
    /// Disc coordinates of the map's vertices.
    pub coords: Vec<Complex64>,
    pub intensity: f64,
    pub window: SampleWindow,
    /// Number of process points in `B_R`, root excluded.
    pub process_points: usize,
    /// Delaunay degrees of the points of the inner window whose incident
    /// faces are all reliable.
    pub inner_degrees: Vec<usize>,
    /// Inner-window points left out of `inner_degrees`.
    pub inner_excluded: usize,
}

impl EmbeddedSample {
    /// Mean of `inner_degrees` and its standard error.
    pub fn mean_inner_degree(&self) -> (f64, f64) {
        let d: Vec<f64> = self.inner_degrees.iter().map(|&x| x as f64).collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, (var / n).sqrt())
    }
}

/// Points of a Poisson process of intensity `lambda` on `B_R` in disc
/// coordinates (radial CDF `(cosh r - 1) / (cosh R - 1)`, uniform angle).
pub fn poisson_points<R: Rng + ?Sized>(lambda: f64, radius: f64, rng: &mut R) -> Result<Vec<Complex64>, SamplerError> {
    let mean = lambda * 2.0 * PI * (radius.cosh() - 1.0);
    let count = if mean > 0.0 {
        Poisson::new(mean).map_err(|e| SamplerError::BadParameter(e.to_string()))?.sample(rng) as usize
    } else {
        0
    };
    let c = radius.cosh() - 1.0;
    Ok((0..count)
        .map(|_| {
            let u: f64 = rng.random();
            let theta: f64 = rng.random::<f64>() * 2.0 * PI;
            let r = (1.0 + u * c).acosh();
            Complex64::from_polar((r / 2.0).tanh(), theta)
        })
        .collect())
}

/// Hyperbolic Poisson–Delaunay triangulation of `B_R` with a root point at
/// the origin. Faces whose circumdisc leaves `B_R` are unreliable; the map
/// is the disc of reliable faces with all corners in the inner window,
/// grown from the root.
pub fn poisson_delaunay_hyp(lambda: f64, window: SampleWindow, seed: u64) -> Result<EmbeddedSample, SamplerError> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(SamplerError::BadParameter(format!("intensity must be positive, got {lambda}")));
    }
    let window = SampleWindow::new(window.radius, window.margin)?;
    let mut rng = stream_rng(seed, 0);
    let mut points = vec![Complex64::new(0.0, 0.0)];
    points.extend(poisson_points(lambda, window.radius, &mut rng)?);
    if points.len() < 3 {
        return Err(SamplerError::TooFewPoints(points.len()));
    }
    let triangles = delaunay(&points);
    let outer = (window.radius / 2.0).tanh();
    let reliable: Vec<bool> = triangles
        .iter()
        .map(|t| {
            let (c, r) = circumcircle(points[t[0]], points[t[1]], points[t[2]]);
            c.norm() + r < outer
        })
        .collect();
    let n = points.len();
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut unreliable_at = vec![false; n];
    for (t, &ok) in triangles.iter().zip(&reliable) {
        for i in 0..3 {
            let (a, b) = (t[i], t[(i + 1) % 3]);
            nbrs[a].push(b);
            nbrs[b].push(a);
            if !ok {
                unreliable_at[a] = true;
            }
        }
    }
    let mut used = vec![false; n];
    for v in 0..n {
        nbrs[v].sort_unstable();
        nbrs[v].dedup();
        let p = points[v];
        nbrs[v].sort_by(|&a, &b| (points[a] - p).arg().total_cmp(&(points[b] - p).arg()));
        used[v] = !nbrs[v].is_empty();
    }
    // drop points that ended up in no triangle
    let ids: Vec<usize> = (0..n).filter(|&v| used[v]).collect();
    let mut local = vec![usize::MAX; n];
    for (i, &v) in ids.iter().enumerate() {
        local[v] = i;
    }
    if local[0] == usize::MAX {
        return Err(SamplerError::TooFewPoints(n));
    }
    let rotations: Vec<Vec<usize>> = ids.iter().map(|&v| nbrs[v].iter().map(|&w| local[w]).collect()).collect();
    let full = PlanarMap::from_rotations(&rotations)?;

    let inner = window.inner_radius();
    let hyp_r: Vec<f64> = points.iter().map(|&z| hypgeo::dist_from_origin(z).unwrap_or(f64::INFINITY)).collect();
    let good: HashSet<[usize; 3]> = triangles
        .iter()
        .zip(&reliable)
        .filter(|&(t, &ok)| ok && t.iter().all(|&v| hyp_r[v] <= inner))
        .map(|(t, _)| {
            let mut k = t.map(|v| local[v]);
            k.sort_unstable();
            k
        })
        .collect();
    let allowed: Vec<bool> = (0..full.face_count())
        .map(|f| {
            let vs = full.face_vertices(f);
            if vs.len() != 3 {
                return false;
            }
            let mut k = [vs[0], vs[1], vs[2]];
            k.sort_unstable();
            good.contains(&k)
        })
        .collect();
    let region = full.disc_region(local[0], &allowed);
    if region.map.face_count() < 2 {
        return Err(SamplerError::TooFewPoints(region.map.vertex_count()));
    }
    let coords: Vec<Complex64> = region.host_ids.iter().map(|&l| points[ids[l]]).collect();
    let root = region.local_id(local[0]).expect("root star seeds the region");

    let mut inner_degrees = Vec::new();
    let mut inner_excluded = 0;
    for v in 0..n {
        if hyp_r[v] > inner {
            continue;
        }
        if unreliable_at[v] || !used[v] {
            inner_excluded += 1;
        } else {
            inner_degrees.push(nbrs[v].len());
        }
    }
    Ok(EmbeddedSample {
        map: RootedMap { map: region.map, root, root_mode: RootMode::Uniform },
        coords,
        intensity: lambda,
        window,
        process_points: n - 1,
        inner_degrees,
        inner_excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use robust::{incircle, Coord};

    fn c(z: Complex64) -> Coord<f64> {
        Coord { x: z.re, y: z.im }
    }

    #[test]
    fn window_validation() {
        assert!(SampleWindow::new(4.0, 4.0).is_err());
        assert!(SampleWindow::new(4.0, 0.0).is_err());
        assert!((SampleWindow::new(4.0, 2.0).unwrap().area() - 165.3).abs() < 0.05);
    }

    #[test]
    fn sample_is_a_rooted_disc_triangulation() {
        let s = poisson_delaunay_hyp(1.0, SampleWindow::new(4.0, 1.0).unwrap(), 1).unwrap();
        let m = &s.map.map;
        assert!(m.is_triangulation(true));
        assert_eq!(m.euler_characteristic(), 2);
        assert_eq!(s.coords[s.map.root], Complex64::new(0.0, 0.0));
        assert!(m.boundary_face().is_some());
        for &z in &s.coords {
            assert!(hypgeo::dist_from_origin(z).unwrap() <= 3.0);
        }
        // rotations are counterclockwise in the embedding
        for v in 0..m.vertex_count() {
            let args: Vec<f64> = m.neighbors(v).map(|w| (s.coords[w] - s.coords[v]).arg()).collect();
            let descents = (0..args.len()).filter(|&i| args[(i + 1) % args.len()] < args[i]).count();
            assert_eq!(descents, 1);
        }
    }

    #[test]
    fn faces_have_empty_circumdiscs() {
        let w = SampleWindow::new(3.0, 1.0).unwrap();
        let mut rng = stream_rng(9, 0);
        let mut pts = vec![Complex64::new(0.0, 0.0)];
        pts.extend(poisson_points(1.0, w.radius, &mut rng).unwrap());
        assert!(pts.len() <= 200);
        for t in delaunay(&pts) {
            for (j, &p) in pts.iter().enumerate() {
                if !t.contains(&j) {
                    assert!(incircle(c(pts[t[0]]), c(pts[t[1]]), c(pts[t[2]]), c(p)) <= 0.0);
                }
            }
        }
    }

    #[test]
    fn tiny_intensity_has_too_few_points() {
        let r = poisson_delaunay_hyp(1e-6, SampleWindow::new(1.0, 0.5).unwrap(), 3);
        assert!(matches!(r, Err(SamplerError::TooFewPoints(_))));
    }

    #[test]
    fn same_seed_same_sample() {
        let w = SampleWindow::new(4.0, 2.0).unwrap();
        let a = poisson_delaunay_hyp(1.0, w, 5).unwrap();
        let b = poisson_delaunay_hyp(1.0, w, 5).unwrap();
        assert_eq!(a.coords, b.coords);
        assert_eq!(a.inner_degrees, b.inner_degrees);
    }
}
