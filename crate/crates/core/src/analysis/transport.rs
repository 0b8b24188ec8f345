//! Angle transport on packed triangulations and the degree–area identity.

use std::f64::consts::PI;

use serde::Serialize;

use super::{mean_and_se, AnalysisError};
use crate::hypgeo;
use crate::map::PlanarMap;
use crate::packer::{angle_sum, Geometry, Radii};

#[derive(Debug, Clone, Serialize)]
pub struct TransportReport {
    /// Vertices at least `collar` hops from the boundary.
    pub vertices: Vec<usize>,
    pub sent: Vec<f64>,
    pub received: Vec<f64>,
    /// `Area(u)`: total hyperbolic area of the faces at `u`.
    pub areas: Vec<f64>,
    pub mean_deg: f64,
    pub mean_area: f64,
    /// Mean of `deg(u) - 6 - Area(u) / pi` over the vertices, with its
    /// standard error.
    pub residual: f64,
    pub residual_se: f64,
    /// Totals over faces lying entirely among the vertices.
    pub global_sent: f64,
    pub global_received: f64,
}

fn corner(geometry: Geometry, r: f64, r1: f64, r2: f64) -> f64 {
    match geometry {
        Geometry::Plane => hypgeo::euclid_angle(r, r1, r2),
        Geometry::Disc => hypgeo::hyper_angle(r, r1, r2),
    }
}

/// Every vertex sends each of its corner angles to all three corners of the
/// face, so it sends three full angle systems and receives the angle sum of
/// each incident face.
pub fn angle_transport_report(map: &PlanarMap, radii: &Radii, collar: usize, tol: f64) -> Result<TransportReport, AnalysisError> {
    let collar = collar.max(1);
    let dist = map.distances_to_boundary();
    let inside: Vec<bool> = dist.iter().map(|&d| d >= collar && d != usize::MAX).collect();
    let vertices: Vec<usize> = (0..map.vertex_count()).filter(|&v| inside[v]).collect();
    if vertices.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let worst = vertices
        .iter()
        .map(|&v| (angle_sum(map, radii, v) - 2.0 * PI).abs())
        .fold(0.0, f64::max);
    if !(worst <= tol) {
        return Err(AnalysisError::UnconvergedPacking(worst));
    }
    let r = &radii.values;
    let g = radii.geometry;
    let face_sum = |d: usize| {
        let e = map.next_in_face(d);
        let (a, b, c) = (map.tail(d), map.head(d), map.head(e));
        corner(g, r[a], r[b], r[c]) + corner(g, r[b], r[c], r[a]) + corner(g, r[c], r[a], r[b])
    };
    let mut sent = Vec::with_capacity(vertices.len());
    let mut received = Vec::with_capacity(vertices.len());
    let mut areas = Vec::with_capacity(vertices.len());
    let mut residuals = Vec::with_capacity(vertices.len());
    for &u in &vertices {
        let mut s = 0.0;
        let mut rec = 0.0;
        let mut area = 0.0;
        for d in map.darts(u) {
            let (v, w) = (map.head(d), map.head(map.next_in_face(d)));
            s += 3.0 * corner(g, r[u], r[v], r[w]);
            let theta = face_sum(d);
            rec += theta;
            area += PI - theta;
        }
        sent.push(s);
        received.push(rec);
        areas.push(area);
        residuals.push(map.degree(u) as f64 - 6.0 - area / PI);
    }
    let n = vertices.len() as f64;
    let mean_deg = vertices.iter().map(|&v| map.degree(v) as f64).sum::<f64>() / n;
    let mean_area = areas.iter().sum::<f64>() / n;
    let (residual, residual_se) = mean_and_se(&residuals);
    let mut global_sent = 0.0;
    let mut global_received = 0.0;
    for f in 0..map.face_count() {
        if Some(f) == map.boundary_face() {
            continue;
        }
        let darts = map.face_darts(f);
        if darts.iter().all(|&d| inside[map.tail(d)]) {
            let theta = face_sum(darts[0]);
            global_received += 3.0 * theta;
            global_sent += darts
                .iter()
                .map(|&d| 3.0 * corner(g, r[map.tail(d)], r[map.head(d)], r[map.head(map.next_in_face(d))]))
                .sum::<f64>();
        }
    }
    Ok(TransportReport {
        vertices,
        sent,
        received,
        areas,
        mean_deg,
        mean_area,
        residual,
        residual_se,
        global_sent,
        global_received,
    })
}
