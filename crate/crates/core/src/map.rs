//! Combinatorial planar maps stored as rotation systems.
//!
//! A map is a set of darts (half-edges). Darts leaving a vertex are stored
//! contiguously in counterclockwise order; every dart has a twin running the
//! other way. Faces are traced with the face on the left of each dart:
//! the successor of `u -> v` is the dart leaving `v` just clockwise of
//! `v -> u`. Interior faces of a straight-line embedding are therefore
//! traversed counterclockwise and the outer face clockwise.

use std::collections::{BTreeMap, VecDeque};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("inconsistent rotation: {0}")]
    InconsistentRotation(String),
    #[error("map is not a sphere map: V - E + F = {chi}")]
    NonPlanarEuler { chi: i64 },
    #[error("vertex {0} out of range")]
    BadVertex(usize),
    #[error("boundary walk does not match any face")]
    UnknownBoundary,
    #[error("simple core is empty")]
    CoreEmpty,
    #[error("operation needs a marked outer face")]
    NoOuterFace,
    #[error("transport returned a non-finite value at ({0}, {1})")]
    NonFiniteTransport(usize, usize),
    #[error("map has no vertices")]
    EmptyMap,
}

/// Finite planar map with an optional marked boundary (outer) face.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarMap {
    first: Vec<usize>,
    tail: Vec<usize>,
    head: Vec<usize>,
    twin: Vec<usize>,
    face: Vec<usize>,
    face_start: Vec<usize>,
    face_len: Vec<usize>,
    edge: Vec<usize>,
    edge_dart: Vec<usize>,
    boundary: Option<usize>,
}

impl PlanarMap {
    /// Builds a map from per-vertex counterclockwise neighbour lists.
    ///
    /// Parallel edges are listed once per edge and loops twice. When a pair
    /// of vertices is joined by several edges (or a vertex carries several
    /// loops) the pairing of darts is not determined by the lists alone; the
    /// planar pairing is recovered by maximising the number of faces.
    pub fn from_rotations(rotations: &[Vec<usize>]) -> Result<Self, MapError> {
        let n = rotations.len();
        let mut first = Vec::with_capacity(n + 1);
        let mut head = Vec::new();
        let mut tail = Vec::new();
        first.push(0);
        for (v, rot) in rotations.iter().enumerate() {
            for &u in rot {
                if u >= n {
                    return Err(MapError::BadVertex(u));
                }
                head.push(u);
                tail.push(v);
            }
            first.push(head.len());
        }

        // Group darts into bundles: all darts between the same unordered pair.
        let mut bundles: BTreeMap<(usize, usize), (Vec<usize>, Vec<usize>)> = BTreeMap::new();
        for d in 0..head.len() {
            let (u, v) = (tail[d], head[d]);
            let key = (u.min(v), u.max(v));
            let entry = bundles.entry(key).or_default();
            if u <= v {
                entry.0.push(d);
            } else {
                entry.1.push(d);
            }
        }

        let mut twin = vec![usize::MAX; head.len()];
        let mut choices: Vec<Bundle> = Vec::new();
        for ((u, v), (fwd, back)) in bundles {
            if u == v {
                if fwd.len() % 2 != 0 {
                    return Err(MapError::InconsistentRotation(format!(
                        "vertex {u} lists itself an odd number of times"
                    )));
                }
                if fwd.len() == 2 {
                    twin[fwd[0]] = fwd[1];
                    twin[fwd[1]] = fwd[0];
                } else {
                    choices.push(Bundle::loops(fwd));
                }
            } else {
                if fwd.len() != back.len() {
                    return Err(MapError::InconsistentRotation(format!(
                        "{u} lists {v} {} times but {v} lists {u} {} times",
                        fwd.len(),
                        back.len()
                    )));
                }
                if fwd.len() == 1 {
                    twin[fwd[0]] = back[0];
                    twin[back[0]] = fwd[0];
                } else {
                    choices.push(Bundle::parallel(fwd, back));
                }
            }
        }

        if !choices.is_empty() {
            resolve_bundles(&first, &head, &tail, &mut twin, &mut choices);
        }
        Self::from_parts(first, head, twin, None)
    }

    /// Assembles a map from CSR rotation data and an explicit twin pairing.
    pub(crate) fn from_parts(
        first: Vec<usize>,
        head: Vec<usize>,
        twin: Vec<usize>,
        boundary: Option<usize>,
    ) -> Result<Self, MapError> {
        let n = first.len() - 1;
        let mut tail = vec![0; head.len()];
        for v in 0..n {
            for d in first[v]..first[v + 1] {
                tail[d] = v;
            }
        }
        for d in 0..head.len() {
            let t = twin[d];
            if t >= head.len() || twin[t] != d || t == d {
                return Err(MapError::InconsistentRotation(format!("dart {d} has no reverse")));
            }
            if head[d] != tail[t] || tail[d] != head[t] {
                return Err(MapError::InconsistentRotation(format!("dart {d} twin mismatch")));
            }
        }
        let mut edge = vec![usize::MAX; head.len()];
        let mut edge_dart = Vec::with_capacity(head.len() / 2);
        for d in 0..head.len() {
            if edge[d] == usize::MAX {
                edge[d] = edge_dart.len();
                edge[twin[d]] = edge_dart.len();
                edge_dart.push(d);
            }
        }
        let mut map = PlanarMap {
            first,
            tail,
            head,
            twin,
            face: Vec::new(),
            face_start: Vec::new(),
            face_len: Vec::new(),
            edge,
            edge_dart,
            boundary,
        };
        map.trace_faces();
        let chi = map.euler_characteristic();
        let components = map.component_count() as i64;
        if chi != 1 + components || components > 1 {
            return Err(MapError::NonPlanarEuler { chi });
        }
        Ok(map)
    }

    fn trace_faces(&mut self) {
        let nd = self.head.len();
        self.face = vec![usize::MAX; nd];
        self.face_start.clear();
        self.face_len.clear();
        for d0 in 0..nd {
            if self.face[d0] != usize::MAX {
                continue;
            }
            let id = self.face_start.len();
            let mut d = d0;
            let mut len = 0;
            loop {
                self.face[d] = id;
                len += 1;
                d = self.next_in_face(d);
                if d == d0 {
                    break;
                }
            }
            self.face_start.push(d0);
            self.face_len.push(len);
        }
    }

    fn component_count(&self) -> usize {
        let n = self.vertex_count();
        if n == 0 {
            return 0;
        }
        let mut seen = vec![false; n];
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for d in self.darts(x) {
                    let y = self.head[d];
                    if !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        count
    }

    pub fn vertex_count(&self) -> usize {
        self.first.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edge_dart.len()
    }

    pub fn dart_count(&self) -> usize {
        self.head.len()
    }

    /// Number of faces; a lone vertex has the single face of the sphere.
    pub fn face_count(&self) -> usize {
        if self.head.is_empty() {
            usize::from(self.vertex_count() > 0)
        } else {
            self.face_start.len()
        }
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Darts leaving `v`, counterclockwise.
    pub fn darts(&self, v: usize) -> std::ops::Range<usize> {
        self.first[v]..self.first[v + 1]
    }

    /// Counterclockwise neighbour sequence of `v` (with repetitions for
    /// parallel edges and loops).
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.darts(v).map(move |d| self.head[d])
    }

    pub fn degree(&self, v: usize) -> usize {
        self.first[v + 1] - self.first[v]
    }

    pub fn head(&self, d: usize) -> usize {
        self.head[d]
    }

    pub fn tail(&self, d: usize) -> usize {
        self.tail[d]
    }

    pub fn twin(&self, d: usize) -> usize {
        self.twin[d]
    }

    pub fn edge_of(&self, d: usize) -> usize {
        self.edge[d]
    }

    /// Representative dart of edge `e`.
    pub fn edge_dart(&self, e: usize) -> usize {
        self.edge_dart[e]
    }

    /// Endpoints of edge `e`.
    pub fn edge_ends(&self, e: usize) -> (usize, usize) {
        let d = self.edge_dart[e];
        (self.tail[d], self.head[d])
    }

    /// Next dart counterclockwise around the tail of `d`.
    pub fn ccw_next(&self, d: usize) -> usize {
        let v = self.tail[d];
        if d + 1 == self.first[v + 1] {
            self.first[v]
        } else {
            d + 1
        }
    }

    /// Next dart clockwise around the tail of `d`.
    pub fn ccw_prev(&self, d: usize) -> usize {
        let v = self.tail[d];
        if d == self.first[v] {
            self.first[v + 1] - 1
        } else {
            d - 1
        }
    }

    /// Successor of `d` along the face on its left.
    pub fn next_in_face(&self, d: usize) -> usize {
        self.ccw_prev(self.twin[d])
    }

    pub fn face_of(&self, d: usize) -> usize {
        self.face[d]
    }

    pub fn face_degree(&self, f: usize) -> usize {
        self.face_len[f]
    }

    /// Darts of face `f` in traversal order.
    pub fn face_darts(&self, f: usize) -> Vec<usize> {
        let d0 = self.face_start[f];
        let mut out = vec![d0];
        let mut d = self.next_in_face(d0);
        while d != d0 {
            out.push(d);
            d = self.next_in_face(d);
        }
        out
    }

    /// Vertex walk of face `f` (tails of its darts).
    pub fn face_vertices(&self, f: usize) -> Vec<usize> {
        self.face_darts(f).into_iter().map(|d| self.tail[d]).collect()
    }

    pub fn boundary_face(&self) -> Option<usize> {
        self.boundary
    }

    pub fn set_boundary_face(&mut self, f: Option<usize>) {
        self.boundary = f;
    }

    /// Marks as boundary the face whose vertex walk equals `walk` up to
    /// cyclic rotation (either orientation is accepted).
    pub fn mark_boundary_walk(&mut self, walk: &[usize]) -> Result<usize, MapError> {
        let mut reversed: Vec<usize> = walk.to_vec();
        reversed.reverse();
        for f in 0..self.face_start.len() {
            let fv = self.face_vertices(f);
            if cyclic_eq(&fv, walk) || cyclic_eq(&fv, &reversed) {
                self.boundary = Some(f);
                return Ok(f);
            }
        }
        Err(MapError::UnknownBoundary)
    }

    /// Vertices on the boundary face.
    pub fn boundary_vertices(&self) -> Vec<bool> {
        let mut out = vec![false; self.vertex_count()];
        if let Some(f) = self.boundary {
            for v in self.face_vertices(f) {
                out[v] = true;
            }
        }
        out
    }

    /// First dart from `u` to `v`, if any.
    pub fn dart_between(&self, u: usize, v: usize) -> Option<usize> {
        self.darts(u).find(|&d| self.head[d] == v)
    }

    pub fn is_simple(&self) -> bool {
        (0..self.vertex_count()).all(|v| {
            let mut seen: Vec<usize> = self.neighbors(v).collect();
            let len = seen.len();
            if seen.contains(&v) {
                return false;
            }
            seen.sort_unstable();
            seen.dedup();
            seen.len() == len
        })
    }

    /// True iff every face (other than the boundary face when
    /// `ignore_boundary` is set) has degree three.
    pub fn is_triangulation(&self, ignore_boundary: bool) -> bool {
        if self.head.is_empty() {
            return false;
        }
        (0..self.face_start.len())
            .filter(|&f| !(ignore_boundary && Some(f) == self.boundary))
            .all(|f| self.face_len[f] == 3)
    }

    /// Hop distances from `v` (`usize::MAX` when unreachable).
    pub fn distances_from(&self, v: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        dist[v] = 0;
        let mut queue = VecDeque::from([v]);
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Hop distance of every vertex to the boundary face.
    pub fn distances_to_boundary(&self) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.vertex_count()];
        let mut queue = VecDeque::new();
        for (v, &b) in self.boundary_vertices().iter().enumerate() {
            if b {
                dist[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(x) = queue.pop_front() {
            for y in self.neighbors(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    queue.push_back(y);
                }
            }
        }
        dist
    }

    /// Induced submap on the vertices with `keep[v]`, inheriting rotations.
    ///
    /// The boundary of the result is the face created by the cut (or the
    /// inherited boundary face); when several candidates exist the longest
    /// one is marked and the rest are left as holes.
    pub fn induced_submap(&self, keep: &[bool]) -> Submap {
        let host_ids: Vec<usize> = (0..self.vertex_count()).filter(|&v| keep[v]).collect();
        let mut new_id = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in host_ids.iter().enumerate() {
            new_id[v] = i;
        }
        let mut first = vec![0];
        let mut head = Vec::new();
        let mut host_dart = Vec::new();
        let mut dart_id = vec![usize::MAX; self.dart_count()];
        for &v in &host_ids {
            for d in self.darts(v) {
                if keep[self.head[d]] {
                    dart_id[d] = head.len();
                    head.push(new_id[self.head[d]]);
                    host_dart.push(d);
                }
            }
            first.push(head.len());
        }
        let twin: Vec<usize> = host_dart.iter().map(|&d| dart_id[self.twin[d]]).collect();
        let mut map = PlanarMap::from_parts(first, head, twin, None)
            .expect("induced submaps of connected planar maps are planar");
        if map.dart_count() > 0 {
            let mut candidates: Vec<usize> = Vec::new();
            for f in 0..map.face_start.len() {
                let darts = map.face_darts(f);
                let cut = darts.iter().any(|&d| {
                    let hd = host_dart[d];
                    host_dart[map.next_in_face(d)] != self.next_in_face(hd)
                });
                let inherited = darts
                    .iter()
                    .any(|&d| Some(self.face[host_dart[d]]) == self.boundary);
                if cut || inherited {
                    candidates.push(f);
                }
            }
            map.boundary = candidates.into_iter().max_by_key(|&f| (map.face_len[f], usize::MAX - f));
        }
        Submap { map, host_ids }
    }

    /// Ball of hop radius `r` around `v`, rooted at `v`.
    pub fn ball(&self, v: usize, r: usize) -> Submap {
        let dist = self.distances_from(v);
        let keep: Vec<bool> = dist.iter().map(|&d| d <= r).collect();
        self.induced_submap(&keep)
    }

    /// Disc-shaped exhaustion around `root`: level `k` is grown from level
    /// `k - 1` by attaching host faces whose vertices all lie within hop
    /// distance `k`, only ever gluing a face along a boundary path so that
    /// every level is a triangulated disc. Levels are nested.
    pub fn disc_exhaustion(&self, root: usize, levels: &[usize]) -> Vec<Submap> {
        let dist = self.distances_from(root);
        let nf = self.face_start.len();
        let mut in_region = vec![false; nf];
        let mut grower = DiscGrower::new(self);
        let mut out = Vec::new();
        let mut started = false;
        for &k in levels {
            let allowed: Vec<bool> = (0..nf)
                .map(|f| {
                    Some(f) != self.boundary
                        && self.face_len[f] == 3
                        && self.face_darts(f).iter().all(|&d| dist[self.tail[d]] <= k)
                })
                .collect();
            if !started {
                // seed: the star of the root (or its first face)
                for d in self.darts(root) {
                    let f = self.face[d];
                    if allowed[f] && !in_region[f] && grower.can_add(f, &in_region) {
                        grower.add(f, &mut in_region);
                    }
                }
                started = true;
            }
            grower.grow(&allowed, &mut in_region);
            out.push(self.face_region_submap(&in_region));
        }
        out
    }

    /// Largest triangulated disc grown face by face from the star of `root`
    /// through faces with `allowed[f]`.
    pub fn disc_region(&self, root: usize, allowed: &[bool]) -> Submap {
        let mut in_region = vec![false; self.face_start.len()];
        let mut grower = DiscGrower::new(self);
        for d in self.darts(root) {
            let f = self.face[d];
            if allowed[f] && self.face_len[f] == 3 && !in_region[f] && grower.can_add(f, &in_region) {
                grower.add(f, &mut in_region);
            }
        }
        grower.grow(allowed, &mut in_region);
        self.face_region_submap(&in_region)
    }

    /// Map formed by the faces with `faces[f]`; its outer face is marked.
    pub fn face_region_submap(&self, faces: &[bool]) -> Submap {
        let mut keep_dart = vec![false; self.dart_count()];
        for d in 0..self.dart_count() {
            if faces[self.face[d]] {
                keep_dart[d] = true;
                keep_dart[self.twin[d]] = true;
            }
        }
        let mut keep_v = vec![false; self.vertex_count()];
        for d in 0..self.dart_count() {
            if keep_dart[d] {
                keep_v[self.tail[d]] = true;
            }
        }
        let host_ids: Vec<usize> = (0..self.vertex_count()).filter(|&v| keep_v[v]).collect();
        let mut new_id = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in host_ids.iter().enumerate() {
            new_id[v] = i;
        }
        let mut first = vec![0];
        let mut head = Vec::new();
        let mut host_dart = Vec::new();
        let mut dart_id = vec![usize::MAX; self.dart_count()];
        for &v in &host_ids {
            for d in self.darts(v) {
                if keep_dart[d] {
                    dart_id[d] = head.len();
                    head.push(new_id[self.head[d]]);
                    host_dart.push(d);
                }
            }
            first.push(head.len());
        }
        let twin: Vec<usize> = host_dart.iter().map(|&d| dart_id[self.twin[d]]).collect();
        let mut map = PlanarMap::from_parts(first, head, twin, None)
            .expect("face regions of planar maps are planar");
        // the outer face is the one made of darts whose host face is excluded
        map.boundary = (0..map.face_start.len()).find(|&f| {
            map.face_darts(f).iter().all(|&d| !faces[self.face[host_dart[d]]])
        });
        Submap { map, host_ids }
    }

    /// Core obtained by excising the side of every loop and every pair of
    /// parallel edges that does not contain the outer face, then merging
    /// parallel edges and dropping loops.
    pub fn simple_core(&self) -> Result<PlanarMap, MapError> {
        let outer = self.boundary.ok_or(MapError::NoOuterFace)?;
        let mut map = self.clone();
        let mut outer_dart = self.face_start[outer];
        while let Some(cycle) = map.find_short_cycle() {
            let (next, dart) = map.excise(&cycle, outer_dart)?;
            map = next;
            outer_dart = dart;
        }
        if map.vertex_count() < 3 {
            return Err(MapError::CoreEmpty);
        }
        Ok(map)
    }

    /// A loop `[d]` or a pair of parallel darts `[d1, d2]` leaving the same vertex.
    fn find_short_cycle(&self) -> Option<Vec<usize>> {
        for v in 0..self.vertex_count() {
            let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
            for d in self.darts(v) {
                let u = self.head[d];
                if u == v {
                    return Some(vec![d]);
                }
                if let Some(&d1) = seen.get(&u) {
                    return Some(vec![d1, d]);
                }
                seen.insert(u, d);
            }
        }
        None
    }

    /// Removes the side of the closed curve formed by `cycle` that does not
    /// contain the face of `outer_dart`, then drops one cycle edge.
    fn excise(&self, cycle: &[usize], outer_dart: usize) -> Result<(PlanarMap, usize), MapError> {
        let cycle_edges: Vec<usize> = cycle.iter().map(|&d| self.edge[d]).collect();
        let outer = self.face[outer_dart];
        // flood the dual from the outer face without crossing the cycle
        let nf = self.face_start.len();
        let mut outside = vec![false; nf];
        outside[outer] = true;
        let mut stack = vec![outer];
        while let Some(f) = stack.pop() {
            for d in self.face_darts(f) {
                if cycle_edges.contains(&self.edge[d]) {
                    continue;
                }
                let g = self.face[self.twin[d]];
                if !outside[g] {
                    outside[g] = true;
                    stack.push(g);
                }
            }
        }
        let on_cycle: Vec<usize> = cycle.iter().flat_map(|&d| [self.tail[d], self.head[d]]).collect();
        let mut keep_v = vec![true; self.vertex_count()];
        let mut drop_edge = vec![false; self.edge_count()];
        for d in 0..self.dart_count() {
            if !outside[self.face[d]] && !cycle_edges.contains(&self.edge[d]) {
                drop_edge[self.edge[d]] = true;
                for x in [self.tail[d], self.head[d]] {
                    if !on_cycle.contains(&x) {
                        keep_v[x] = false;
                    }
                }
            }
        }
        // the cycle edge whose outer side is not the outer face goes first
        drop_edge[cycle_edges[cycle_edges.len() - 1]] = true;
        if cycle_edges.len() == 2 && cycle_edges[0] == cycle_edges[1] {
            return Err(MapError::CoreEmpty);
        }

        let kept_v: Vec<usize> = (0..self.vertex_count()).filter(|&v| keep_v[v]).collect();
        let mut new_id = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in kept_v.iter().enumerate() {
            new_id[v] = i;
        }
        let mut first = vec![0];
        let mut head = Vec::new();
        let mut old = Vec::new();
        let mut dart_id = vec![usize::MAX; self.dart_count()];
        for &v in &kept_v {
            for d in self.darts(v) {
                if !drop_edge[self.edge[d]] {
                    dart_id[d] = head.len();
                    head.push(new_id[self.head[d]]);
                    old.push(d);
                }
            }
            first.push(head.len());
        }
        if head.is_empty() {
            return Err(MapError::CoreEmpty);
        }
        let twin: Vec<usize> = old.iter().map(|&d| dart_id[self.twin[d]]).collect();
        let mut map = PlanarMap::from_parts(first, head, twin, None)?;
        let witness = (0..self.dart_count())
            .find(|&d| outside[self.face[d]] && dart_id[d] != usize::MAX && !cycle_edges.contains(&self.edge[d]))
            .or_else(|| (0..self.dart_count()).find(|&d| outside[self.face[d]] && dart_id[d] != usize::MAX))
            .ok_or(MapError::CoreEmpty)?;
        let new_dart = dart_id[witness];
        map.boundary = Some(map.face[new_dart]);
        Ok((map, new_dart))
    }
}

fn cyclic_eq(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..a.len()).any(|s| (0..a.len()).all(|i| a[(s + i) % a.len()] == b[i]))
}

/// A group of darts whose twin pairing is ambiguous from neighbour lists.
struct Bundle {
    options: Vec<Vec<(usize, usize)>>,
    chosen: usize,
}

impl Bundle {
    fn parallel(fwd: Vec<usize>, back: Vec<usize>) -> Self {
        // planar pairings reverse the cyclic order; only the offset is free
        let k = fwd.len();
        let options = (0..k)
            .map(|c| (0..k).map(|i| (fwd[i], back[(c + k - i) % k])).collect())
            .collect();
        Bundle { options, chosen: 0 }
    }

    fn loops(darts: Vec<usize>) -> Self {
        let mut options = Vec::new();
        non_crossing_matchings(&darts, &mut Vec::new(), &mut options);
        Bundle { options, chosen: 0 }
    }

    fn apply(&self, twin: &mut [usize]) {
        for &(a, b) in &self.options[self.chosen] {
            twin[a] = b;
            twin[b] = a;
        }
    }
}

fn non_crossing_matchings(items: &[usize], acc: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
    if items.is_empty() {
        out.push(acc.clone());
        return;
    }
    // pair the first item with an item at odd offset so both sides stay even
    for j in (1..items.len()).step_by(2) {
        acc.push((items[0], items[j]));
        let inner = &items[1..j];
        let outer = &items[j + 1..];
        let mut inner_out = Vec::new();
        non_crossing_matchings(inner, &mut Vec::new(), &mut inner_out);
        for m in inner_out {
            let mut with_inner = acc.clone();
            with_inner.extend(m);
            non_crossing_matchings(outer, &mut with_inner, out);
        }
        acc.pop();
    }
}

fn count_faces(first: &[usize], tail: &[usize], twin: &[usize]) -> usize {
    let nd = twin.len();
    let mut seen = vec![false; nd];
    let mut faces = 0;
    for d0 in 0..nd {
        if seen[d0] {
            continue;
        }
        faces += 1;
        let mut d = d0;
        while !seen[d] {
            seen[d] = true;
            let t = twin[d];
            let v = tail[t];
            d = if t == first[v] { first[v + 1] - 1 } else { t - 1 };
        }
    }
    faces
}

fn resolve_bundles(first: &[usize], head: &[usize], tail: &[usize], twin: &mut [usize], bundles: &mut [Bundle]) {
    let _ = head;
    for b in bundles.iter() {
        b.apply(twin);
    }
    let mut best = count_faces(first, tail, twin);
    loop {
        let mut improved = false;
        for i in 0..bundles.len() {
            for c in 0..bundles[i].options.len() {
                if c == bundles[i].chosen {
                    continue;
                }
                let prev = bundles[i].chosen;
                bundles[i].chosen = c;
                bundles[i].apply(twin);
                let faces = count_faces(first, tail, twin);
                if faces > best {
                    best = faces;
                    improved = true;
                } else {
                    bundles[i].chosen = prev;
                    bundles[i].apply(twin);
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Face-by-face growth of a triangulated disc.
struct DiscGrower<'a> {
    map: &'a PlanarMap,
    vertex_faces: Vec<usize>,
}

impl<'a> DiscGrower<'a> {
    fn new(map: &'a PlanarMap) -> Self {
        DiscGrower { map, vertex_faces: vec![0; map.vertex_count()] }
    }

    /// Whether adding triangle `f` keeps the region a disc.
    fn can_add(&self, f: usize, in_region: &[bool]) -> bool {
        let darts = self.map.face_darts(f);
        if self.vertex_faces.iter().all(|&c| c == 0) {
            return true;
        }
        let shared: Vec<bool> = darts.iter().map(|&d| in_region[self.map.face[self.map.twin[d]]]).collect();
        let n_shared = shared.iter().filter(|&&s| s).count();
        match n_shared {
            1 => {
                // the vertex opposite the shared edge must be new
                let i = shared.iter().position(|&s| s).unwrap();
                let opposite = self.map.tail[darts[(i + 2) % 3]];
                self.vertex_faces[opposite] == 0
            }
            2 => true,
            _ => false,
        }
    }

    fn add(&mut self, f: usize, in_region: &mut [bool]) {
        in_region[f] = true;
        for d in self.map.face_darts(f) {
            self.vertex_faces[self.map.tail[d]] += 1;
        }
    }

    fn grow(&mut self, allowed: &[bool], in_region: &mut [bool]) {
        loop {
            let mut changed = false;
            let mut frontier: Vec<usize> = Vec::new();
            for d in 0..self.map.dart_count() {
                let f = self.map.face[d];
                let g = self.map.face[self.map.twin[d]];
                if in_region[f] && !in_region[g] && allowed[g] {
                    frontier.push(g);
                }
            }
            frontier.sort_unstable();
            frontier.dedup();
            for g in frontier {
                if !in_region[g] && self.can_add(g, in_region) {
                    self.add(g, in_region);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
}

/// A submap together with the host ids of its vertices.
#[derive(Debug, Clone)]
pub struct Submap {
    pub map: PlanarMap,
    pub host_ids: Vec<usize>,
}

impl Submap {
    /// Local id of host vertex `v`, if present.
    pub fn local_id(&self, v: usize) -> Option<usize> {
        self.host_ids.binary_search(&v).ok()
    }

    pub fn rooted_at_host(&self, v: usize) -> Option<RootedMap> {
        Some(RootedMap { map: self.map.clone(), root: self.local_id(v)?, root_mode: RootMode::Uniform })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootMode {
    Uniform,
    DegreeBiased,
}

#[derive(Debug, Clone)]
pub struct RootedMap {
    pub map: PlanarMap,
    pub root: usize,
    pub root_mode: RootMode,
}

/// Draws a root uniformly or proportionally to degree.
pub fn choose_root<R: Rng + ?Sized>(map: &PlanarMap, mode: RootMode, rng: &mut R) -> Result<RootedMap, MapError> {
    let n = map.vertex_count();
    if n == 0 {
        return Err(MapError::EmptyMap);
    }
    let root = match mode {
        RootMode::Uniform => rng.random_range(0..n),
        RootMode::DegreeBiased => {
            let total = map.dart_count();
            if total == 0 {
                rng.random_range(0..n)
            } else {
                map.tail(rng.random_range(0..total))
            }
        }
    };
    Ok(RootedMap { map: map.clone(), root, root_mode: mode })
}

/// Site percolation on a host map: open edges are those with both ends open.
#[derive(Debug, Clone)]
pub struct Percolation<'a> {
    pub host: &'a PlanarMap,
    pub open_vertices: Vec<bool>,
    pub open_edges: Vec<bool>,
}

impl<'a> Percolation<'a> {
    pub fn from_sites(host: &'a PlanarMap, open_vertices: Vec<bool>) -> Self {
        let open_edges = (0..host.edge_count())
            .map(|e| {
                let (u, v) = host.edge_ends(e);
                open_vertices[u] && open_vertices[v]
            })
            .collect();
        Percolation { host, open_vertices, open_edges }
    }

    /// Degree of `v` in the open subgraph (0 when closed).
    pub fn open_degree(&self, v: usize) -> usize {
        if !self.open_vertices[v] {
            return 0;
        }
        self.host.darts(v).filter(|&d| self.open_edges[self.host.edge_of(d)]).count()
    }

    /// Connected components of the open subgraph, each sorted.
    pub fn clusters(&self) -> Vec<Vec<usize>> {
        let n = self.host.vertex_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if !self.open_vertices[s] || seen[s] {
                continue;
            }
            seen[s] = true;
            let mut cluster = vec![s];
            let mut stack = vec![s];
            while let Some(x) = stack.pop() {
                for d in self.host.darts(x) {
                    let y = self.host.head(d);
                    if self.open_edges[self.host.edge_of(d)] && !seen[y] {
                        seen[y] = true;
                        cluster.push(y);
                        stack.push(y);
                    }
                }
            }
            cluster.sort_unstable();
            out.push(cluster);
        }
        out
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Evaluates both sides of the mass transport principle on a finite map with
/// a uniform root: mean mass sent from and received by the root.
pub fn mass_transport_check<F>(map: &PlanarMap, transport: F) -> Result<(f64, f64), MapError>
where
    F: Fn(&PlanarMap, usize, usize) -> f64,
{
    let n = map.vertex_count();
    if n == 0 {
        return Err(MapError::EmptyMap);
    }
    let mut table = vec![0.0; n * n];
    for u in 0..n {
        for v in 0..n {
            let m = transport(map, u, v);
            if !m.is_finite() {
                return Err(MapError::NonFiniteTransport(u, v));
            }
            table[u * n + v] = m;
        }
    }
    let out = compensated_sum((0..n).flat_map(|u| (0..n).map(move |v| (u, v))).map(|(u, v)| table[u * n + v]));
    let inn = compensated_sum((0..n).flat_map(|u| (0..n).map(move |v| (u, v))).map(|(u, v)| table[v * n + u]));
    Ok((out / n as f64, inn / n as f64))
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn tetrahedron_euler() {
        let m = tetrahedron();
        assert_eq!((m.vertex_count(), m.edge_count(), m.face_count()), (4, 6, 4));
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.is_triangulation(false));
        assert!(m.is_simple());
    }

    #[test]
    fn wheel_faces() {
        let m = wheel(6);
        assert_eq!(m.face_count(), 7);
        let degs: Vec<usize> = (0..m.face_count()).map(|f| m.face_degree(f)).collect();
        assert_eq!(degs.iter().filter(|&&d| d == 3).count(), 6);
        assert_eq!(degs.iter().filter(|&&d| d == 6).count(), 1);
        assert_eq!(m.face_degree(m.boundary_face().unwrap()), 6);
        assert!(m.is_triangulation(true));
        assert!(!m.is_triangulation(false));
    }

    #[test]
    fn missing_reverse_is_rejected() {
        let err = PlanarMap::from_rotations(&[vec![1, 2], vec![2], vec![0, 1]]).unwrap_err();
        assert!(matches!(err, MapError::InconsistentRotation(_)));
    }

    #[test]
    fn twisted_rotation_is_not_planar() {
        // K4 with one rotation flipped has genus 1
        let err = PlanarMap::from_rotations(&[vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]]);
        assert!(matches!(err, Err(MapError::NonPlanarEuler { .. })));
    }

    #[test]
    fn four_cycle_is_not_a_triangulation() {
        let m = PlanarMap::from_rotations(&[vec![1, 3], vec![2, 0], vec![3, 1], vec![0, 2]]).unwrap();
        assert_eq!(m.face_count(), 2);
        assert!(!m.is_triangulation(false));
    }

    #[test]
    fn ball_radius_zero_is_a_point() {
        let s = tetrahedron().ball(2, 0);
        assert_eq!(s.map.vertex_count(), 1);
        assert_eq!(s.map.edge_count(), 0);
        assert_eq!(s.map.euler_characteristic(), 2);
        assert_eq!(s.host_ids, vec![2]);
    }

    #[test]
    fn ball_of_wheel_hub() {
        let s = wheel(7).ball(0, 1);
        assert_eq!(s.map.vertex_count(), 8);
        assert_eq!(s.map.degree(0), 7);
        assert!(s.map.is_triangulation(true));
    }

    /// Double edge u-v enclosing w, with x outside.
    fn lens() -> PlanarMap {
        // u=0 v=1 w=2 x=3
        let mut m = PlanarMap::from_rotations(&[vec![2, 1, 3, 1], vec![3, 0, 2, 0], vec![1, 0], vec![0, 1]]).unwrap();
        // outer face: the u, x, v triangle beside u -> x
        let f = (0..m.face_count())
            .find(|&f| {
                m.face_darts(f).contains(&(m.darts(0).start + 2))
            })
            .unwrap();
        m.set_boundary_face(Some(f));
        m
    }

    #[test]
    fn parallel_edges_pair_planarly() {
        let m = lens();
        assert_eq!(m.euler_characteristic(), 2);
        assert!(m.is_triangulation(false));
        assert!(!m.is_simple());
    }

    #[test]
    fn core_removes_enclosed_vertex() {
        let core = lens().simple_core().unwrap();
        assert!(core.is_simple());
        assert_eq!(core.vertex_count(), 3);
        assert_eq!(core.edge_count(), 3);
        assert!(core.is_triangulation(false));
        // idempotent
        let again = core.simple_core().unwrap();
        assert_eq!(again, core);
    }

    #[test]
    fn core_of_simple_map_is_identity() {
        let w = wheel(6);
        assert_eq!(w.simple_core().unwrap(), w);
    }

    #[test]
    fn core_removes_loop_patch() {
        // Triangle a b c (outer), loop at a enclosing vertex p joined to a twice? use
        // p joined to a once inside the loop: a's rotation b, [loop], p, [loop], c
        // a=0 b=1 c=2 p=3
        let rot = vec![vec![1, 0, 3, 0, 2], vec![2, 0], vec![0, 1], vec![0]];
        let mut m = PlanarMap::from_rotations(&rot).unwrap();
        assert_eq!(m.euler_characteristic(), 2);
        // outer face is the b-a-c side: mark the triangle face not touching the loop on the left
        let outer = (0..m.face_count())
            .find(|&f| m.face_vertices(f).len() == 3 && !m.face_vertices(f).contains(&3) && {
                let ds = m.face_darts(f);
                ds.iter().all(|&d| m.head(d) != m.tail(d))
            })
            .unwrap();
        m.set_boundary_face(Some(outer));
        let core = m.simple_core().unwrap();
        assert!(core.is_simple());
        assert_eq!(core.vertex_count(), 3);
        assert_eq!(core.edge_count(), 3);
    }

    #[test]
    fn core_needs_outer_face() {
        let mut m = lens();
        m.set_boundary_face(None);
        assert_eq!(m.simple_core().unwrap_err(), MapError::NoOuterFace);
    }

    #[test]
    fn mtp_on_k4_adjacency() {
        let m = tetrahedron();
        let adj = |g: &PlanarMap, u: usize, v: usize| if g.dart_between(u, v).is_some() { 1.0 } else { 0.0 };
        assert_eq!(mass_transport_check(&m, adj).unwrap(), (3.0, 3.0));
        assert_eq!(mass_transport_check(&m, |_, _, _| 0.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn mtp_on_wheel_with_degree_transport() {
        let m = wheel(6);
        let f = |g: &PlanarMap, u: usize, v: usize| if g.dart_between(u, v).is_some() { g.degree(u) as f64 } else { 0.0 };
        let (out, inn) = mass_transport_check(&m, f).unwrap();
        // brute force: sum over darts of deg(tail) and of deg(head), divided by V
        let direct_out: f64 = (0..m.dart_count()).map(|d| m.degree(m.tail(d)) as f64).sum::<f64>() / 7.0;
        let direct_in: f64 = (0..m.dart_count()).map(|d| m.degree(m.head(d)) as f64).sum::<f64>() / 7.0;
        assert!((out - direct_out).abs() < 1e-12 && (inn - direct_in).abs() < 1e-12);
        assert!((out - inn).abs() < 1e-12);
    }

    #[test]
    fn mtp_rejects_nan() {
        let err = mass_transport_check(&tetrahedron(), |_, _, _| f64::NAN).unwrap_err();
        assert_eq!(err, MapError::NonFiniteTransport(0, 0));
    }

    #[test]
    fn degree_biased_root_on_path() {
        use rand::SeedableRng;
        let path = PlanarMap::from_rotations(&[vec![1], vec![0, 2], vec![1]]).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let n = 40_000;
        let hits = (0..n)
            .filter(|_| choose_root(&path, RootMode::DegreeBiased, &mut rng).unwrap().root == 1)
            .count();
        let p = hits as f64 / n as f64;
        let se = (0.25 / n as f64).sqrt();
        assert!((p - 0.5).abs() < 4.0 * se, "p = {p}");
    }

    #[test]
    fn percolation_clusters() {
        let m = wheel(6);
        let mut open = vec![true; 7];
        open[0] = false;
        open[3] = false;
        open[6] = false;
        let p = Percolation::from_sites(&m, open);
        assert_eq!(p.clusters(), vec![vec![1, 2], vec![4, 5]]);
        assert_eq!(p.open_degree(5), 1);
        assert_eq!(p.open_degree(0), 0);
    }
}
