//! Text formats: map files, packing, coordinate and trajectory CSV.

use std::fmt::Write as _;

use num_complex::Complex64;
use thiserror::Error;

use crate::map::{MapError, PlanarMap};
use crate::packer::{CirclePair, HyperCircle};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Map(#[from] MapError),
}

fn perr(line: usize, msg: impl Into<String>) -> IoError {
    IoError::Parse { line, msg: msg.into() }
}

/// Edge weight `u v w` from a `WEIGHTS` section.
pub type WeightLine = (usize, usize, f64);

/// A parsed map file.
#[derive(Debug, Clone)]
pub struct MapFile {
    pub map: PlanarMap,
    pub weights: Option<Vec<WeightLine>>,
}

/// Serializes `map` as
///
/// ```text
/// PLANARMAP v1 <V> <E>
/// BOUNDARY <vertex walk of the boundary face>
/// <id>: <ccw neighbours>
/// WEIGHTS
/// <u> <v> <w>
/// ```
///
/// `header` lines are written first as `#` comments.
pub fn write_map(map: &PlanarMap, weights: Option<&[WeightLine]>, header: &[String]) -> String {
    let mut s = String::new();
    for h in header {
        let _ = writeln!(s, "# {h}");
    }
    let _ = writeln!(s, "PLANARMAP v1 {} {}", map.vertex_count(), map.edge_count());
    if let Some(f) = map.boundary_face() {
        let walk: Vec<String> = map.face_vertices(f).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "BOUNDARY {}", walk.join(" "));
    }
    for v in 0..map.vertex_count() {
        let nb: Vec<String> = map.neighbors(v).map(|w| w.to_string()).collect();
        if nb.is_empty() {
            let _ = writeln!(s, "{v}:");
        } else {
            let _ = writeln!(s, "{v}: {}", nb.join(" "));
        }
    }
    if let Some(w) = weights {
        s.push_str("WEIGHTS\n");
        for &(u, v, x) in w {
            let _ = writeln!(s, "{u} {v} {x:e}");
        }
    }
    s
}

fn parse_usize(tok: &str, line: usize) -> Result<usize, IoError> {
    tok.parse().map_err(|_| perr(line, format!("expected a vertex id, got {tok:?}")))
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, IoError> {
    tok.parse().map_err(|_| perr(line, format!("expected a number, got {tok:?}")))
}

pub fn parse_map(text: &str) -> Result<MapFile, IoError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hl, header) = lines.next().ok_or_else(|| perr(1, "empty map file"))?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "PLANARMAP" || h[1] != "v1" {
        return Err(perr(hl, "expected header `PLANARMAP v1 <V> <E>`"));
    }
    let nv = parse_usize(h[2], hl)?;
    let ne = parse_usize(h[3], hl)?;
    let mut boundary: Option<Vec<usize>> = None;
    let mut rotations: Vec<Option<Vec<usize>>> = vec![None; nv];
    let mut weights: Option<Vec<WeightLine>> = None;
    for (ln, l) in lines {
        if let Some(w) = weights.as_mut() {
            let t: Vec<&str> = l.split_whitespace().collect();
            if t.len() != 3 {
                return Err(perr(ln, "expected `u v w`"));
            }
            let x = parse_f64(t[2], ln)?;
            if !(x >= 0.0 && x.is_finite()) {
                return Err(perr(ln, "weights must be finite and nonnegative"));
            }
            w.push((parse_usize(t[0], ln)?, parse_usize(t[1], ln)?, x));
        } else if l == "WEIGHTS" {
            weights = Some(Vec::new());
        } else if let Some(rest) = l.strip_prefix("BOUNDARY") {
            let walk = rest.split_whitespace().map(|t| parse_usize(t, ln)).collect::<Result<Vec<_>, _>>()?;
            boundary = Some(walk);
        } else {
            let (id, rest) = l.split_once(':').ok_or_else(|| perr(ln, "expected `<id>: <neighbours>`"))?;
            let v = parse_usize(id.trim(), ln)?;
            if v >= nv {
                return Err(perr(ln, format!("vertex {v} out of range")));
            }
            if rotations[v].is_some() {
                return Err(perr(ln, format!("vertex {v} listed twice")));
            }
            let nb = rest.split_whitespace().map(|t| parse_usize(t, ln)).collect::<Result<Vec<_>, _>>()?;
            rotations[v] = Some(nb);
        }
    }
    let rotations: Vec<Vec<usize>> = rotations
        .into_iter()
        .enumerate()
        .map(|(v, r)| r.ok_or_else(|| perr(hl, format!("vertex {v} has no rotation line"))))
        .collect::<Result<_, _>>()?;
    let mut map = PlanarMap::from_rotations(&rotations)?;
    if map.edge_count() != ne {
        return Err(perr(hl, format!("header says {ne} edges, rotations give {}", map.edge_count())));
    }
    if let Some(walk) = boundary {
        map.mark_boundary_walk(&walk)?;
    }
    Ok(MapFile { map, weights })
}

fn with_header(header: &[String], columns: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut out: Vec<u8> = header.iter().flat_map(|h| format!("# {h}\n").into_bytes()).collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    out.extend(w.into_inner().expect("in-memory flush"));
    String::from_utf8(out).expect("utf-8 cells")
}

fn csv_rows(text: &str, columns: &[&str]) -> Result<Vec<(usize, Vec<String>)>, IoError> {
    let mut rd = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let head = rd.headers().map_err(|e| perr(1, e.to_string()))?.clone();
    if head.iter().ne(columns.iter().copied()) {
        return Err(perr(1, format!("expected columns `{}`", columns.join(","))));
    }
    rd.records()
        .map(|r| {
            let r = r.map_err(|e| perr(e.position().map_or(0, |p| p.line() as usize), e.to_string()))?;
            let ln = r.position().map_or(0, |p| p.line() as usize);
            Ok((ln, r.iter().map(str::to_string).collect()))
        })
        .collect()
}

fn check_order(ln: usize, expected: usize, got: usize) -> Result<(), IoError> {
    if got != expected {
        return Err(perr(ln, format!("expected row {expected}, got {got}")));
    }
    Ok(())
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

const PACKING_COLUMNS: [&str; 7] = ["vertex", "x", "y", "r", "xh", "yh", "rh"];

/// Packing CSV with columns `vertex,x,y,r,xh,yh,rh`; the hyperbolic columns
/// are empty for plane packings and `rh` is `inf` for horocycles.
pub fn write_packing_csv(circles: &[CirclePair], header: &[String]) -> String {
    let rows = circles
        .iter()
        .enumerate()
        .map(|(v, c)| {
            let mut r = vec![v.to_string(), num(c.z.re), num(c.z.im), num(c.r)];
            match c.hyper {
                Some(h) => r.extend([num(h.centre.re), num(h.centre.im), num(h.radius)]),
                None => r.extend([String::new(), String::new(), String::new()]),
            }
            r
        })
        .collect();
    with_header(header, &PACKING_COLUMNS, rows)
}

pub fn parse_packing_csv(text: &str) -> Result<Vec<CirclePair>, IoError> {
    csv_rows(text, &PACKING_COLUMNS)?
        .into_iter()
        .enumerate()
        .map(|(i, (ln, c))| {
            check_order(ln, i, parse_usize(&c[0], ln)?)?;
            let z = Complex64::new(parse_f64(&c[1], ln)?, parse_f64(&c[2], ln)?);
            let r = parse_f64(&c[3], ln)?;
            let hyper = if c[4].is_empty() {
                None
            } else {
                let centre = Complex64::new(parse_f64(&c[4], ln)?, parse_f64(&c[5], ln)?);
                Some(HyperCircle { centre, radius: parse_f64(&c[6], ln)? })
            };
            Ok(CirclePair { z, r, hyper })
        })
        .collect()
}

/// Coordinate CSV `vertex,x,y`.
pub fn write_coords_csv(coords: &[Complex64], header: &[String]) -> String {
    let rows = coords.iter().enumerate().map(|(v, z)| vec![v.to_string(), num(z.re), num(z.im)]).collect();
    with_header(header, &["vertex", "x", "y"], rows)
}

pub fn parse_coords_csv(text: &str) -> Result<Vec<Complex64>, IoError> {
    csv_rows(text, &["vertex", "x", "y"])?
        .into_iter()
        .enumerate()
        .map(|(i, (ln, c))| {
            check_order(ln, i, parse_usize(&c[0], ln)?)?;
            Ok(Complex64::new(parse_f64(&c[1], ln)?, parse_f64(&c[2], ln)?))
        })
        .collect()
}

/// Trajectory CSV `walk,step,vertex` holding several walks.
pub fn write_trajectories_csv(walks: &[Vec<usize>], header: &[String]) -> String {
    let rows = walks
        .iter()
        .enumerate()
        .flat_map(|(w, path)| path.iter().enumerate().map(move |(t, v)| vec![w.to_string(), t.to_string(), v.to_string()]))
        .collect();
    with_header(header, &["walk", "step", "vertex"], rows)
}

pub fn parse_trajectories_csv(text: &str) -> Result<Vec<Vec<usize>>, IoError> {
    let mut walks: Vec<Vec<usize>> = Vec::new();
    for (ln, c) in csv_rows(text, &["walk", "step", "vertex"])? {
        let w = parse_usize(&c[0], ln)?;
        let t = parse_usize(&c[1], ln)?;
        let v = parse_usize(&c[2], ln)?;
        if w == walks.len() {
            walks.push(Vec::new());
        } else if w + 1 != walks.len() {
            return Err(perr(ln, format!("walk {w} out of order")));
        }
        let path = walks.last_mut().expect("pushed above");
        check_order(ln, path.len(), t)?;
        path.push(v);
    }
    Ok(walks)
}

/// Generic numeric CSV with the given columns.
pub fn write_table_csv(columns: &[&str], rows: &[Vec<f64>], header: &[String]) -> String {
    let rows = rows.iter().map(|r| r.iter().map(|&x| num(x)).collect()).collect();
    with_header(header, columns, rows)
}
