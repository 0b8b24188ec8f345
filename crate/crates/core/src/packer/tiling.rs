//! Exact packings of regular triangulations, generated lazily.
//!
//! For `d >= 7` every circle of the `{3, d}` packing has the same hyperbolic
//! radius and each vertex is the image of the origin under a disc isometry.
//! A vertex is stored as an SU(1,1) frame `[[a, b], [conj b, conj a]]`,
//! scaled so that `|a| = 1` with the logarithm of the scale kept apart; this
//! keeps positions usable at hyperbolic distances far beyond where
//! `1 - |z|` underflows. For `d = 6` the packing is the unit-radius
//! hexagonal lattice.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;

use super::Geometry;
use crate::hypgeo::regular_radius;

/// Position of a circle as seen by a walk observer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleObs {
    pub deg: usize,
    /// Direction of the centre from the origin.
    pub arg: f64,
    /// `-ln r` for the Euclidean radius `r`.
    pub neg_log_r: f64,
    pub hyp: Option<HypObs>,
}

/// Hyperbolic part of an observation (disc packings only).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypObs {
    /// Hyperbolic distance of the hyperbolic centre from the origin.
    pub dist: f64,
    /// `ln(1 - |z_h|)`.
    pub log_gap_h: f64,
    /// `ln(1 - |z|)` for the Euclidean centre `z`.
    pub log_gap: f64,
}

/// A vertex of a regular tiling together with a reference neighbour.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TileVertex {
    Disc { a: Complex64, b: Complex64, log_scale: f64 },
    Lattice { x: i64, y: i64, dir: u8 },
}

/// The circle packing of the `d`-regular triangulation, normalised with the
/// root at the origin and its reference neighbour on the positive real axis.
#[derive(Debug, Clone)]
pub struct RegularTiling {
    d: usize,
    radius: f64,
    moves: Vec<(Complex64, Complex64)>,
}

fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - LN_2
}

/// `ln(1 - tanh x)`.
fn ln_one_minus_tanh(x: f64) -> f64 {
    if x > 0.0 {
        LN_2 - 2.0 * x - (-2.0 * x).exp().ln_1p()
    } else {
        (1.0 - x.tanh()).ln()
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

impl RegularTiling {
    pub fn new(d: usize) -> Result<Self, super::PackError> {
        if d < 6 {
            return Err(super::PackError::BadConfig(format!("regular tilings need d >= 6, got {d}")));
        }
        let radius = if d == 6 { 1.0 } else { regular_radius(d) };
        // step j: rotate by 2 pi j / d, translate by one edge, turn around
        let (ch, sh) = (radius.cosh(), radius.sinh());
        let moves = (0..d)
            .map(|j| {
                let half = PI * j as f64 / d as f64;
                let rot = Complex64::from_polar(1.0, half);
                let turn = Complex64::i();
                // R(theta) Tr(2h) R(pi), with R(theta) = diag(e^{i theta/2}, e^{-i theta/2})
                (rot * ch * turn, rot * sh * turn.conj())
            })
            .collect();
        Ok(RegularTiling { d, radius, moves })
    }

    pub fn degree(&self) -> usize {
        self.d
    }

    pub fn geometry(&self) -> Geometry {
        if self.d == 6 {
            Geometry::Plane
        } else {
            Geometry::Disc
        }
    }

    /// Hyperbolic radius of every circle (Euclidean radius 1 for the lattice).
    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Supremum over adjacent pairs of `ln(r(v) / r(u)) / d`.
    pub fn ring_constant(&self) -> f64 {
        if self.d == 6 {
            0.0
        } else {
            2.0 * self.radius / self.d as f64
        }
    }

    pub fn root(&self) -> TileVertex {
        if self.d == 6 {
            TileVertex::Lattice { x: 0, y: 0, dir: 0 }
        } else {
            TileVertex::Disc { a: Complex64::new(1.0, 0.0), b: Complex64::new(0.0, 0.0), log_scale: 0.0 }
        }
    }

    /// The `j`-th neighbour counterclockwise from the reference neighbour.
    /// The new vertex's reference neighbour is the vertex it was reached from.
    pub fn neighbor(&self, v: &TileVertex, j: usize) -> TileVertex {
        match *v {
            TileVertex::Disc { a, b, log_scale } => {
                let (p, q) = self.moves[j % self.d];
                let na = a * p + b * q.conj();
                let nb = a * q + b * p.conj();
                let s = na.norm();
                TileVertex::Disc { a: na / s, b: nb / s, log_scale: log_scale + s.ln() }
            }
            TileVertex::Lattice { x, y, dir } => {
                const STEPS: [(i64, i64); 6] = [(1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)];
                let k = (dir as usize + j) % 6;
                let (dx, dy) = STEPS[k];
                TileVertex::Lattice { x: x + dx, y: y + dy, dir: ((k + 3) % 6) as u8 }
            }
        }
    }

    /// Euclidean centre of `v` (loses precision once `1 - |z|` drops below
    /// machine epsilon; use [`RegularTiling::observe`] for log-scale data).
    pub fn centre(&self, v: &TileVertex) -> Complex64 {
        match *v {
            TileVertex::Lattice { x, y, .. } => {
                let w = Complex64::from_polar(1.0, PI / 3.0);
                2.0 * (x as f64 + y as f64 * w)
            }
            TileVertex::Disc { .. } => {
                let o = self.observe(v);
                let h = o.hyp.expect("disc vertex");
                Complex64::from_polar(1.0 - h.log_gap.exp(), o.arg)
            }
        }
    }

    /// Hyperbolic centre of a disc vertex.
    pub fn hyper_centre(&self, v: &TileVertex) -> Option<Complex64> {
        match *v {
            TileVertex::Disc { a, b, .. } => Some(b / a.conj()),
            TileVertex::Lattice { .. } => None,
        }
    }

    pub fn observe(&self, v: &TileVertex) -> CircleObs {
        match *v {
            TileVertex::Lattice { .. } => {
                let z = self.centre(v);
                CircleObs { deg: 6, arg: z.arg(), neg_log_r: 0.0, hyp: None }
            }
            TileVertex::Disc { a, b, log_scale } => {
                let nb = b.norm();
                let dist = 2.0 * (log_scale + nb.ln_1p());
                let h = self.radius;
                let (lo, hi) = ((dist - h) / 2.0, (dist + h) / 2.0);
                let log_r = h.sinh().ln() - LN_2 - ln_cosh(lo) - ln_cosh(hi);
                let log_gap = log_add_exp(ln_one_minus_tanh(lo), ln_one_minus_tanh(hi)) - LN_2;
                let log_gap_h = -2.0 * log_scale - nb.ln_1p();
                let arg = if nb == 0.0 { 0.0 } else { (b * a).arg() };
                CircleObs {
                    deg: self.d,
                    arg,
                    neg_log_r: -log_r,
                    hyp: Some(HypObs { dist, log_gap_h, log_gap }),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypgeo::{dist, hyper_to_euclid, seven_regular_radius};

    #[test]
    fn seven_neighbours_form_a_flower() {
        let t = RegularTiling::new(7).unwrap();
        let r = seven_regular_radius();
        let root = t.root();
        let nb: Vec<Complex64> = (0..7).map(|j| t.hyper_centre(&t.neighbor(&root, j)).unwrap()).collect();
        for j in 0..7 {
            assert!((dist(Complex64::new(0.0, 0.0), nb[j]).unwrap() - 2.0 * r).abs() < 1e-12);
            assert!((dist(nb[j], nb[(j + 1) % 7]).unwrap() - 2.0 * r).abs() < 1e-12);
            let ang = nb[j].arg().rem_euclid(2.0 * PI);
            assert!((ang - 2.0 * PI * j as f64 / 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn stepping_back_returns() {
        let t = RegularTiling::new(7).unwrap();
        let mut v = t.root();
        for j in [3usize, 1, 4, 6, 2] {
            v = t.neighbor(&v, j);
        }
        let here = t.hyper_centre(&v).unwrap();
        let back = t.neighbor(&t.neighbor(&v, 5), 0);
        assert!((t.hyper_centre(&back).unwrap() - here).norm() < 1e-12);
    }

    #[test]
    fn neighbours_of_a_neighbour_are_tangent() {
        let t = RegularTiling::new(8).unwrap();
        let v = t.neighbor(&t.neighbor(&t.root(), 2), 3);
        let c = t.hyper_centre(&v).unwrap();
        for j in 0..8 {
            let u = t.hyper_centre(&t.neighbor(&v, j)).unwrap();
            assert!((dist(c, u).unwrap() - 2.0 * t.radius()).abs() < 1e-10);
        }
    }

    #[test]
    fn log_observations_match_direct_formulas() {
        let t = RegularTiling::new(7).unwrap();
        let mut v = t.root();
        for j in [1usize, 3, 3, 4, 2, 5] {
            v = t.neighbor(&v, j);
            let zh = t.hyper_centre(&v).unwrap();
            let (z, r) = hyper_to_euclid(zh, t.radius()).unwrap();
            let o = t.observe(&v);
            let h = o.hyp.unwrap();
            assert!((h.dist - dist(Complex64::new(0.0, 0.0), zh).unwrap()).abs() < 1e-10);
            assert!((o.neg_log_r + r.ln()).abs() < 1e-10);
            assert!((h.log_gap - (1.0 - z.norm()).ln()).abs() < 1e-8);
            assert!((h.log_gap_h - (1.0 - zh.norm()).ln()).abs() < 1e-8);
            assert!((o.arg - zh.arg()).abs() < 1e-12);
        }
    }

    #[test]
    fn far_vertices_stay_finite() {
        let t = RegularTiling::new(7).unwrap();
        let mut v = t.root();
        for _ in 0..3000 {
            v = t.neighbor(&v, 3);
        }
        let o = t.observe(&v);
        let h = o.hyp.unwrap();
        assert!(h.dist > 1000.0 && h.dist.is_finite());
        assert!(o.neg_log_r.is_finite() && h.log_gap.is_finite());
        // far from the root the radius and the gap scale together
        assert!((h.log_gap_h - (-h.dist + LN_2)).abs() < 1e-9);
    }

    #[test]
    fn lattice_neighbours() {
        let t = RegularTiling::new(6).unwrap();
        let root = t.root();
        for j in 0..6 {
            let u = t.neighbor(&root, j);
            let z = t.centre(&u);
            assert!((z.norm() - 2.0).abs() < 1e-12);
            assert_eq!(t.neighbor(&u, 0), TileVertex::Lattice { x: 0, y: 0, dir: match u {
                TileVertex::Lattice { dir, .. } => ((dir as usize + 3) % 6) as u8,
                _ => unreachable!(),
            } });
            assert_eq!(t.observe(&u).neg_log_r, 0.0);
        }
    }
}
