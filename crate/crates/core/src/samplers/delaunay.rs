//! Incremental Euclidean Delaunay triangulation with exact predicates.

use std::collections::{HashMap, HashSet};

use num_complex::Complex64;
use robust::{incircle, orient2d, Coord};

fn coord(z: Complex64) -> Coord<f64> {
    Coord { x: z.re, y: z.im }
}

/// Circumcentre and radius of the triangle `a, b, c`.
pub(crate) fn circumcircle(a: Complex64, b: Complex64, c: Complex64) -> (Complex64, f64) {
    let (b, c) = (b - a, c - a);
    let d = 2.0 * (b.re * c.im - b.im * c.re);
    let (nb, nc) = (b.norm_sqr(), c.norm_sqr());
    let u = Complex64::new((c.im * nb - b.im * nc) / d, (b.re * nc - c.re * nb) / d);
    (a + u, u.norm())
}

const NONE: usize = usize::MAX;

/// Delaunay triangles of `points` (inside the unit disc), each listed
/// counterclockwise. A point exactly on a circumcircle counts as outside it.
/// Triangles are computed within a large enclosing triangle, so hull
/// triangles may be missing; any triangle whose circumdisc avoids the
/// auxiliary vertices is exact.
pub(crate) fn delaunay(points: &[Complex64]) -> Vec<[usize; 3]> {
    let n = points.len();
    let mut pts: Vec<Complex64> = points.to_vec();
    let big = 1.0e3;
    pts.push(Complex64::new(0.0, 2.0 * big));
    pts.push(Complex64::new(-2.0 * big, -big));
    pts.push(Complex64::new(2.0 * big, -big));
    // nb[t][i] is the triangle across the edge opposite corner i
    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    let mut nb: Vec<[usize; 3]> = vec![[NONE; 3]];
    let mut alive = vec![true];
    let mut stamp: Vec<usize> = vec![0];
    let mut present: HashSet<(u64, u64)> = HashSet::new();
    let mut last = 0;
    let mut turn = 0usize;
    let mut by_first: HashMap<usize, usize> = HashMap::new();
    let mut by_second: HashMap<usize, usize> = HashMap::new();
    for p in 0..n {
        let z = pts[p];
        if !present.insert((z.re.to_bits(), z.im.to_bits())) {
            continue;
        }
        // visibility walk to a triangle containing z
        let mut t = last;
        'walk: loop {
            turn = turn.wrapping_add(1);
            for k in 0..3 {
                let i = (k + turn) % 3;
                let (a, b) = (tris[t][(i + 1) % 3], tris[t][(i + 2) % 3]);
                if orient2d(coord(pts[a]), coord(pts[b]), coord(z)) < 0.0 {
                    t = nb[t][i];
                    continue 'walk;
                }
            }
            break;
        }
        let mark = p + 1;
        let mut bad = vec![t];
        stamp[t] = mark;
        let mut i = 0;
        while i < bad.len() {
            let b = bad[i];
            i += 1;
            for &u in &nb[b] {
                if u == NONE || stamp[u] == mark {
                    continue;
                }
                let [x, y, w] = tris[u];
                if incircle(coord(pts[x]), coord(pts[y]), coord(pts[w]), coord(z)) > 0.0 {
                    stamp[u] = mark;
                    bad.push(u);
                }
            }
        }
        by_first.clear();
        by_second.clear();
        let mut fresh = Vec::new();
        for &b in &bad {
            alive[b] = false;
            for i in 0..3 {
                let u = nb[b][i];
                if u != NONE && stamp[u] == mark {
                    continue;
                }
                let (x, y) = (tris[b][(i + 1) % 3], tris[b][(i + 2) % 3]);
                let id = tris.len();
                tris.push([x, y, p]);
                nb.push([NONE, NONE, u]);
                alive.push(true);
                stamp.push(0);
                if u != NONE {
                    let j = nb[u].iter().position(|&q| q == b).expect("adjacency is symmetric");
                    nb[u][j] = id;
                }
                by_first.insert(x, id);
                by_second.insert(y, id);
                fresh.push(id);
            }
        }
        for &id in &fresh {
            let [x, y, _] = tris[id];
            nb[id][0] = by_first[&y];
            nb[id][1] = by_second[&x];
        }
        last = *fresh.last().expect("cavity is nonempty");
    }
    let mut out: Vec<[usize; 3]> = (0..tris.len())
        .filter(|&t| alive[t] && tris[t].iter().all(|&x| x < n))
        .map(|t| tris[t])
        .collect();
    for t in &mut out {
        let k = (0..3).min_by_key(|&i| t[i]).expect("three corners");
        t.rotate_left(k);
    }
    out.sort_unstable();
    out
}
