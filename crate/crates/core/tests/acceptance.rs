//! Acceptance suite: one PASS/FAIL line per criterion.

use std::f64::consts::PI;
use std::time::Instant;

use circlewalk_core::analysis::*;
use circlewalk_core::map::{mass_transport_check, PlanarMap};
use circlewalk_core::packer::tiling::RegularTiling;
use circlewalk_core::packer::*;
use circlewalk_core::rng::stream_rng;
use circlewalk_core::samplers::*;
use circlewalk_core::walker::*;
use rand::Rng;

type Outcome = (bool, String);
type Transport<'a> = Box<dyn Fn(&PlanarMap, usize, usize) -> f64 + 'a>;

fn wheel(k: usize) -> PlanarMap {
    let mut rot = vec![(1..=k).collect::<Vec<_>>()];
    for i in 1..=k {
        let next = if i == k { 1 } else { i + 1 };
        let prev = if i == 1 { k } else { i - 1 };
        rot.push(vec![next, 0, prev]);
    }
    let mut map = PlanarMap::from_rotations(&rot).unwrap();
    map.mark_boundary_walk(&(1..=k).rev().collect::<Vec<_>>()).unwrap();
    map
}

fn r_star() -> f64 {
    let c = (2.0 * PI / 7.0).cos();
    0.5 * (c / (1.0 - c)).acosh()
}

fn mean_se(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (var / n).sqrt())
}

fn wheels() -> Outcome {
    let mut ok = true;
    let mut parts = vec![];
    for k in [5usize, 6, 7] {
        let problem = PackingProblem::plane(wheel(k), 1.0).unwrap();
        let packing = pack(&problem, &SolverConfig::default(), 0).unwrap();
        let hub = packing.circles[0].r;
        let oracle = (2.0 / (1.0 - (2.0 * PI / k as f64).cos())).sqrt() - 1.0;
        let err = (hub - oracle).abs();
        ok &= err < 1e-8;
        parts.push(format!("k={k} hub={hub:.8} err={err:.1e}"));
    }
    (ok, parts.join(", "))
}

fn exhaustion(levels: &[usize]) -> ExhaustionReport {
    let host = regular_triangulation(7, *levels.last().unwrap()).unwrap();
    pack_exhaustion(&host, 0, levels, Geometry::Disc, &SolverConfig::default()).unwrap()
}

fn exhaustion_convergence(rep: &ExhaustionReport) -> Outcome {
    let rs = r_star();
    let errs: Vec<(usize, f64)> = rep
        .levels
        .iter()
        .map(|l| (l.level, l.b1_radii.iter().map(|r| (r - rs).abs()).fold(0.0, f64::max)))
        .collect();
    let at8 = errs.iter().find(|e| e.0 == 8).unwrap().1;
    let first = errs.iter().find(|e| e.1 < 1e-4).map_or("none".to_string(), |e| e.0.to_string());
    let shown: Vec<String> = errs.iter().map(|(k, e)| format!("{k}:{e:.1e}")).collect();
    let shrinking = rep.deltas.windows(2).all(|w| w[1] < w[0]);
    (at8 < 1e-4, format!("max B_1 |r - r*| at k=8 = {at8:.2e}; per k [{}]; first k below 1e-4: {first}; deltas shrinking: {shrinking}", shown.join(" ")))
}

fn classification() -> Outcome {
    let map = regular_triangulation(7, 5).unwrap();
    let radii = Radii { geometry: Geometry::Disc, values: vec![seven_r(); map.vertex_count()] };
    let rep = angle_transport_report(&map, &radii, 1, 1e-9).unwrap();
    let worst = rep
        .vertices
        .iter()
        .zip(&rep.areas)
        .map(|(&v, a)| (map.degree(v) as f64 - 6.0 - a / PI).abs())
        .fold(0.0, f64::max);
    let mut ok = worst < 1e-6;
    let mut parts = vec![format!("7-regular max |deg-6-Area/pi| = {worst:.1e} over {} vertices", rep.vertices.len())];
    for lambda in [0.5, 1.0, 2.0] {
        let window = SampleWindow::scaled(lambda, 4.0, 12.0).unwrap();
        let means: Vec<f64> = (0..20)
            .map(|s| poisson_delaunay_hyp(lambda, window, 1000 + s).unwrap().mean_inner_degree().0)
            .collect();
        let (m, se) = mean_se(&means);
        let target = 6.0 + 3.0 / (PI * lambda);
        let z = (m - target) / se;
        ok &= z.abs() < 3.0;
        parts.push(format!("lambda={lambda}: {m:.4} vs {target:.4} (z={z:.2})"));
    }
    (ok, parts.join("; "))
}

fn seven_r() -> f64 {
    circlewalk_core::hypgeo::seven_regular_radius()
}

fn random_map(i: u64) -> PlanarMap {
    if i.is_multiple_of(5) {
        regular_triangulation(7 + (i as usize / 5) % 3, 2).unwrap()
    } else {
        let lambda = [0.5, 1.0, 2.0, 3.0][(i % 4) as usize];
        poisson_delaunay_hyp(lambda, SampleWindow::new(3.0, 1.0).unwrap(), i).unwrap().map.map
    }
}

fn mass_transport() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failures = 0;
    let mut count = 0;
    for i in 0..50u64 {
        let map = random_map(i);
        let n = map.vertex_count();
        let mut rng = stream_rng(77, i);
        let table: Vec<f64> = (0..n * n).map(|_| rng.random::<f64>()).collect();
        let labels: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..5.0)).collect();
        let decay: f64 = rng.random_range(0.2..2.0);
        let dist: Vec<Vec<usize>> = (0..n).map(|v| map.distances_from(v)).collect();
        let transports: [Transport; 4] = [
            Box::new(|m: &PlanarMap, u, v| if m.dart_between(u, v).is_some() { table[u * n + v] } else { 0.0 }),
            Box::new(|m: &PlanarMap, u, v| if m.dart_between(u, v).is_some() { 1.0 / m.degree(u) as f64 } else { 0.0 }),
            Box::new(|_: &PlanarMap, u, v| (-decay * dist[u][v] as f64).exp() * labels[u]),
            Box::new(|_: &PlanarMap, u, v| if dist[u][v] <= 2 { labels[u] * labels[v] / (1 + dist[u][v]) as f64 } else { 0.0 }),
        ];
        for t in &transports {
            let (out, inn) = mass_transport_check(&map, t).unwrap();
            let gap = (out - inn).abs();
            worst = worst.max(gap);
            failures += usize::from(gap > 1e-12);
            count += 1;
        }
    }
    (failures == 0, format!("{count} transports on 50 maps, worst |out-in| = {worst:.1e}, failures {failures}"))
}

fn speed_identity() -> Outcome {
    let t = RegularTiling::new(7).unwrap();
    let s = estimate_speed(&observed_walks(&t, &t.root(), 100, 2000, 5, 0), 0.4).unwrap();
    let speed = s.speed_hyp.unwrap();
    let z = s.discrepancy_z().unwrap();
    let lattice = RegularTiling::new(6).unwrap();
    let l = estimate_speed(&observed_walks(&lattice, &lattice.root(), 100, 2000, 5, 0), 0.4).unwrap();
    let ok = speed > 0.0 && s.decay_rate > 0.0 && z.abs() < 3.0 && l.decay_rate == 0.0;
    (ok, format!("7-regular speed {speed:.4} decay {:.4} z={z:.2}; lattice decay {}", s.decay_rate, l.decay_rate))
}

fn exit_measure() -> Outcome {
    let t = RegularTiling::new(7).unwrap();
    let walks = observed_walks(&t, &t.root(), 1000, 400, 6, 0);
    let angles: Vec<f64> = walks.iter().filter_map(|w| exit_point(&w.obs, 1e-3).ok().map(|e| e.0)).collect();
    let h3 = exit_histogram(&angles, 3).unwrap();
    let h6 = exit_histogram(&angles, 6).unwrap();
    let (a, b) = angles.split_at(angles.len() / 2);
    let sym = rotation_symmetry(a, b, 2.0 * PI / 7.0, 3).unwrap();
    let atom = exit_histogram(&[1.234; 1000], 6).unwrap();
    let ok = angles.len() == 1000 && h3.min_coarse_count > 0 && h6.max_arc_mass < 0.1 && sym.failing_arcs == 0 && atom.max_arc_mass == 1.0;
    (
        ok,
        format!(
            "{} converged; level-3 counts {:?}; level-6 max mass {:.3}; rotation worst z {:.2}; atomic control max mass {}",
            angles.len(),
            h3.counts,
            h6.max_arc_mass,
            sym.worst_z,
            atom.max_arc_mass
        ),
    )
}

/// `w(u) P_u(first return to omega at v)` by Gauss-Seidel sweeps.
fn induced_oracle(g: &WeightedGraph, omega: &[bool], u: usize, v: usize) -> f64 {
    let n = g.vertex_count();
    let mut h = vec![0.0; n];
    h[v] = 1.0;
    for _ in 0..100_000 {
        let mut change: f64 = 0.0;
        for x in 0..n {
            if omega[x] {
                continue;
            }
            let new: f64 = g.entries(x).iter().map(|&(y, w)| w * h[y]).sum::<f64>() / g.weight(x);
            change = change.max((new - h[x]).abs());
            h[x] = new;
        }
        if change < 1e-15 {
            break;
        }
    }
    g.entries(u).iter().map(|&(y, w)| w * h[y]).sum()
}

fn induced_networks() -> Outcome {
    let tri = WeightedGraph::from_adjacency(vec![vec![(1, 1.0), (2, 1.0)], vec![(0, 1.0), (2, 1.0)], vec![(0, 1.0), (1, 1.0)]]).unwrap();
    let (gt, _) = induced_network(&tri, &[true, true, false]).unwrap();
    let path = WeightedGraph::from_adjacency(vec![vec![(1, 1.0)], vec![(0, 1.0), (2, 1.0)], vec![(1, 1.0)]]).unwrap();
    let (gp, _) = induced_network(&path, &[true, false, true]).unwrap();
    let exact = gt.edge_weight(0, 1) == 1.5 && gt.edge_weight(0, 0) == 0.5 && gp.edge_weight(0, 1) == 0.5;
    let (mut asym, mut oracle_err): (f64, f64) = (0.0, 0.0);
    for i in 0..20u64 {
        let map = poisson_delaunay_hyp(1.0, SampleWindow::new(2.5, 0.5).unwrap(), 300 + i).unwrap().map.map;
        let host = WeightedGraph::from_map(&map);
        let mut rng = stream_rng(91, i);
        let p = rng.random_range(0.2..0.8);
        let mut omega: Vec<bool> = (0..map.vertex_count()).map(|_| rng.random::<f64>() < p).collect();
        omega[0] = true;
        let (g, members) = induced_network(&host, &omega).unwrap();
        let k = members.len();
        for a in 0..k {
            for b in 0..k {
                asym = asym.max((g.edge_weight(a, b) - g.edge_weight(b, a)).abs());
            }
        }
        for _ in 0..3 {
            let (a, b) = (rng.random_range(0..k), rng.random_range(0..k));
            oracle_err = oracle_err.max((g.edge_weight(a, b) - induced_oracle(&host, &omega, members[a], members[b])).abs());
        }
    }
    let ok = exact && asym < 1e-10 && oracle_err < 1e-10;
    (ok, format!("hand examples exact: {exact}; max asymmetry {asym:.1e}; max deviation from iterative oracle {oracle_err:.1e}"))
}

fn b1_ring(level: &ExhaustionLevel, root: usize) -> f64 {
    let m = &level.problem.map;
    let r = level.submap.local_id(root).unwrap();
    let b1: Vec<bool> = m.distances_from(r).iter().map(|&d| d <= 1).collect();
    ring_report(&level.problem, &level.packing, Some(&b1))
}

fn ring_sequence(rep: &ExhaustionReport, root: usize) -> (bool, String) {
    let c: Vec<f64> = rep.levels.iter().map(|l| b1_ring(l, root)).collect();
    let global: Vec<f64> = rep.levels.iter().map(|l| ring_report(&l.problem, &l.packing, None)).collect();
    let ok = c.iter().chain(&global).all(|x| x.is_finite()) && c.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.5}")).collect::<Vec<_>>().join(" ");
    (ok, format!("B_1 [{}] global [{}]", fmt(&c), fmt(&global)))
}

fn ring_lemma(reg: &ExhaustionReport) -> Outcome {
    let (mut ok, text) = ring_sequence(reg, 0);
    let mut parts = vec![format!("7-regular {text}")];
    for seed in 0..3 {
        let s = poisson_delaunay_hyp(1.0, SampleWindow::scaled(1.0, 7.0, 12.0).unwrap(), seed).unwrap();
        let levels: Vec<usize> = (3..=9).collect();
        let rep = pack_exhaustion(&s.map.map, s.map.root, &levels, Geometry::Disc, &SolverConfig::default()).unwrap();
        let (o, text) = ring_sequence(&rep, s.map.root);
        ok &= o;
        parts.push(format!("Poisson-Delaunay seed {seed} {text}"));
    }
    (ok, parts.join("; "))
}

fn tree(depth: usize) -> WeightedGraph {
    let mut adj: Vec<Vec<(usize, f64)>> = vec![vec![]];
    let mut frontier = vec![0usize];
    for level in 0..depth {
        let mut next = vec![];
        for &v in &frontier {
            for _ in 0..if level == 0 { 3 } else { 2 } {
                let c = adj.len();
                adj.push(vec![(v, 1.0)]);
                adj[v].push((c, 1.0));
                next.push(c);
            }
        }
        frontier = next;
    }
    WeightedGraph::from_adjacency(adj).unwrap()
}

fn spectral() -> Outcome {
    let t = spectral_radius_estimate(&tree(12), 0, 12).unwrap().trend;
    let oracle = 2.0 * 2f64.sqrt() / 3.0;
    let depth = 10;
    let est = |d: usize| {
        let m = regular_triangulation(d, depth).unwrap();
        spectral_radius_estimate(&WeightedGraph::from_map(&m), 0, depth).unwrap().trend
    };
    let (h, l) = (est(7), est(6));
    let ok = (t - oracle).abs() < 0.02 && h < l;
    (ok, format!("tree {t:.4} vs {oracle:.4}; depth {depth}: 7-regular {h:.4} < lattice {l:.4}"))
}

fn bls() -> Outcome {
    let (delta, m_cap, rounds) = (4.5, 7, 20);
    let hyp = regular_triangulation(7, 7).unwrap();
    let lat = regular_triangulation(6, 20).unwrap();
    let mut ok = true;
    for s in 0..5 {
        let r = bls_refinement(&hyp, m_cap, 0.0, rounds, s, 0);
        let start: Vec<bool> = (0..hyp.vertex_count()).map(|v| hyp.degree(v) <= m_cap).collect();
        ok &= r.omega.open_vertices == start && r.history.iter().all(|h| *h == start);
    }
    let identity = ok;
    let mut ratios_ok = true;
    let mut fractions = vec![];
    for (map, want_high) in [(&hyp, true), (&lat, false)] {
        let interior: Vec<bool> = map.distances_to_boundary().iter().map(|&d| d >= 2).collect();
        let mut f = vec![];
        for s in 0..5 {
            let r = bls_refinement(map, m_cap, delta, rounds, s, 0);
            ratios_ok &= r.kept.iter().all(|c| c.boundary_edges as f64 >= delta * c.vertices.len() as f64);
            f.push(r.surviving_fraction(&interior));
        }
        ok &= if want_high { f.iter().all(|&x| x > 0.9) } else { f.iter().all(|&x| x < 0.1) };
        fractions.push(f);
    }
    ok &= ratios_ok;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ");
    (
        ok,
        format!(
            "delta=0 identity: {identity}; delta={delta} M={m_cap}: 7-regular interior kept [{}], lattice [{}]; kept clusters satisfy ratio: {ratios_ok}",
            fmt(&fractions[0]),
            fmt(&fractions[1])
        ),
    )
}

fn harmonicity() -> Outcome {
    let t = RegularTiling::new(7).unwrap();
    let arc = |a: f64| if a.rem_euclid(2.0 * PI) < 2.0 * PI / 7.0 { 1.0 } else { 0.0 };
    let (walks, steps, eps) = (4000, 2000, 1e-3);
    let one = harmonic_estimate(&t, &t.root(), &|_| 1.0, 500, steps, eps, 1, 0).unwrap();
    let root = harmonic_estimate(&t, &t.root(), &arc, 20_000, steps, eps, 2, 0).unwrap();
    let root_z = (root.value - 1.0 / 7.0) / root.se;
    let path = observed_walk(&t, t.root(), 9, 3, 0).states;
    let mut worst: f64 = 0.0;
    let mut failing = 0;
    for (i, v) in path.iter().enumerate() {
        let seed = 100 + i as u64;
        let hv = harmonic_estimate(&t, v, &arc, walks, steps, eps, seed, 0).unwrap();
        let nb: Vec<HarmonicEstimate> = (0..7)
            .map(|j| harmonic_estimate(&t, &t.neighbor(v, j), &arc, walks, steps, eps, seed, ((j + 1) * walks) as u64).unwrap())
            .collect();
        let avg = nb.iter().map(|e| e.value).sum::<f64>() / 7.0;
        let se = (hv.se.powi(2) + nb.iter().map(|e| e.se.powi(2)).sum::<f64>() / 49.0).sqrt();
        let z = (hv.value - avg) / se;
        worst = worst.max(z.abs());
        failing += usize::from(z.abs() >= 3.0);
    }
    let ok = one.value == 1.0 && root_z.abs() < 3.0 && failing == 0;
    (
        ok,
        format!(
            "g=1 gives {}; root arc value {:.4} +- {:.4} vs 1/7 (z={root_z:.2}); mean-value worst z {worst:.2} over {} vertices",
            one.value,
            root.value,
            root.se,
            path.len()
        ),
    )
}

fn report(id: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let (ok, detail) = f();
    println!("{} {id:>2} {name}: {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, t0.elapsed().as_secs_f64());
    ok
}

fn main() {
    let mut results = vec![];
    results.push(report(1, "wheel oracles", wheels));
    let t0 = Instant::now();
    let reg = exhaustion(&(3..=8).collect::<Vec<_>>());
    let packed = t0.elapsed();
    results.push(report(2, "exhaustion convergence", || {
        let (ok, s) = exhaustion_convergence(&reg);
        (ok, format!("{s}; packing {:.1} s", packed.as_secs_f64()))
    }));
    results.push(report(3, "classification identity", classification));
    results.push(report(4, "mass transport", mass_transport));
    results.push(report(5, "speed identity", speed_identity));
    results.push(report(6, "exit measure", exit_measure));
    results.push(report(7, "induced network", induced_networks));
    results.push(report(8, "ring lemma", || ring_lemma(&reg)));
    results.push(report(9, "spectral radius", spectral));
    results.push(report(10, "percolation refinement", bls));
    results.push(report(11, "harmonicity", harmonicity));
    let passed = results.iter().filter(|&&r| r).count();
    println!("{passed}/{} criteria passed", results.len());
}
