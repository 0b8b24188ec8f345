use std::f64::consts::PI;

use circlewalk_core::analysis::levy_convergence_check;
use circlewalk_core::map::{mass_transport_check, PlanarMap};
use circlewalk_core::packer::tiling::RegularTiling;
use circlewalk_core::rng::stream_rng;
use circlewalk_core::samplers::*;
use circlewalk_core::walker::*;
use proptest::prelude::*;
use rand::Rng;

fn sample(lambda: f64, seed: u64) -> EmbeddedSample {
    poisson_delaunay_hyp(lambda, SampleWindow::new(3.0, 1.0).unwrap(), seed).unwrap()
}

fn rotations(m: &PlanarMap) -> Vec<Vec<usize>> {
    (0..m.vertex_count()).map(|v| m.neighbors(v).collect()).collect()
}

/// Doubles the interior edge `u v` and puts a new degree-2 vertex in the digon.
fn add_lens(rot: &mut Vec<Vec<usize>>, u: usize, v: usize) {
    let p = rot.len();
    let iu = rot[u].iter().position(|&x| x == v).unwrap();
    rot[u].splice(iu..=iu, [v, p, v]);
    let iv = rot[v].iter().position(|&x| x == u).unwrap();
    rot[v].splice(iv..=iv, [u, p, u]);
    rot.push(vec![u, v]);
}

fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampler_output_is_a_sphere_triangulation(lambda in 0.3f64..3.0, seed in 0u64..10_000) {
        let s = sample(lambda, seed);
        let m = &s.map.map;
        prop_assert_eq!(m.euler_characteristic(), 2);
        prop_assert!(m.is_triangulation(true));
        prop_assert!(m.is_simple());
        for d in 0..m.dart_count() {
            prop_assert_eq!(m.twin(m.twin(d)), d);
            prop_assert_eq!(m.head(d), m.tail(m.twin(d)));
        }
        let face_darts: usize = (0..m.face_count()).map(|f| m.face_degree(f)).sum();
        prop_assert_eq!(face_darts, m.dart_count());
    }

    #[test]
    fn random_transports_balance(seed in 0u64..10_000, keep in 0.5f64..1.0) {
        let m = sample(1.0, seed).map.map;
        let n = m.vertex_count();
        let mut rng = stream_rng(seed, 1);
        let table: Vec<f64> = (0..n * n).map(|_| if rng.random::<f64>() < keep { rng.random_range(0.0..10.0) } else { 0.0 }).collect();
        let (out, inn) = mass_transport_check(&m, |_, u, v| table[u * n + v]).unwrap();
        prop_assert!((out - inn).abs() <= 1e-12);
        let (out, inn) = mass_transport_check(&m, |g, u, v| if g.dart_between(u, v).is_some() { table[u * n + v] / g.degree(u) as f64 } else { 0.0 }).unwrap();
        prop_assert!((out - inn).abs() <= 1e-12);
    }

    #[test]
    fn simple_core_removes_lenses_and_is_idempotent(seed in 0u64..10_000, lenses in 1usize..4) {
        let base = sample(1.0, seed).map.map;
        let bf = base.boundary_face().unwrap();
        let boundary = base.boundary_vertices();
        let interior: Vec<(usize, usize)> = (0..base.edge_count())
            .map(|e| base.edge_ends(e))
            .filter(|&(u, v)| !boundary[u] && !boundary[v])
            .collect();
        prop_assume!(!interior.is_empty());
        let mut rng = stream_rng(seed, 2);
        let mut rot = rotations(&base);
        let mut used = vec![];
        for _ in 0..lenses {
            let e = interior[rng.random_range(0..interior.len())];
            if !used.contains(&e) {
                add_lens(&mut rot, e.0, e.1);
                used.push(e);
            }
        }
        let mut m = PlanarMap::from_rotations(&rot).unwrap();
        m.mark_boundary_walk(&base.face_vertices(bf)).unwrap();
        prop_assert_eq!(m.euler_characteristic(), 2);
        prop_assert!(!m.is_simple());
        let core = m.simple_core().unwrap();
        prop_assert!(core.is_simple());
        prop_assert_eq!(core.vertex_count(), base.vertex_count());
        prop_assert_eq!(core.edge_count(), base.edge_count());
        prop_assert_eq!(core.simple_core().unwrap(), core.clone());
        prop_assert_eq!(base.simple_core().unwrap(), base);
    }

    #[test]
    fn balls_grow_monotonically(seed in 0u64..10_000, r in 0usize..4) {
        let m = sample(1.0, seed).map.map;
        let root = seed as usize % m.vertex_count();
        let small = m.ball(root, r);
        let big = m.ball(root, r + 1);
        for v in &small.host_ids {
            prop_assert!(big.host_ids.contains(v));
        }
        prop_assert!(small.host_ids.contains(&root));
    }

    #[test]
    fn one_step_lands_on_a_neighbour(seed in 0u64..10_000) {
        let m = sample(1.0, seed).map.map;
        let g = WeightedGraph::from_map(&m);
        let t = simple_random_walk(&g, 0, 50, seed, 0).unwrap();
        for w in t.vertices.windows(2) {
            prop_assert!(m.dart_between(w[0], w[1]).is_some());
        }
        prop_assert_eq!(simple_random_walk(&g, 0, 50, seed, 0).unwrap(), t);
    }
}

#[test]
fn radial_and_angular_laws() {
    let (lambda, radius) = (8.0, 6.0);
    let pts = poisson_points(lambda, radius, &mut stream_rng(5, 0)).unwrap();
    let n = pts.len() as f64;
    let expected = lambda * 2.0 * PI * (radius.cosh() - 1.0);
    assert!((n - expected).abs() < 4.0 * expected.sqrt(), "{n} points, expected {expected}");
    let mut radii: Vec<f64> = pts.iter().map(|z| 2.0 * z.norm().atanh()).collect();
    let mut angles: Vec<f64> = pts.iter().map(|z| z.arg().rem_euclid(2.0 * PI)).collect();
    radii.sort_by(f64::total_cmp);
    angles.sort_by(f64::total_cmp);
    let critical = 1.63 / n.sqrt();
    let dr = ks_statistic(&radii, |r| (r.cosh() - 1.0) / (radius.cosh() - 1.0));
    let da = ks_statistic(&angles, |a| a / (2.0 * PI));
    assert!(dr < critical, "radial KS {dr} vs {critical}");
    assert!(da < critical, "angular KS {da} vs {critical}");
}

#[test]
fn mean_degree_exceeds_six_and_falls_with_intensity() {
    let means: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&l| {
            let w = SampleWindow::scaled(l, 4.0, 12.0).unwrap();
            (0..6).map(|s| poisson_delaunay_hyp(l, w, 40 + s).unwrap().mean_inner_degree().0).sum::<f64>() / 6.0
        })
        .collect();
    assert!(means[2] > 6.0);
    assert!(means[0] > means[1] && means[1] > means[2], "{means:?}");
}

#[test]
fn one_step_frequencies_are_uniform() {
    let m = regular_triangulation(7, 2).unwrap();
    let g = WeightedGraph::from_map(&m);
    let nb: Vec<usize> = m.neighbors(0).collect();
    let trials = 14_000;
    let mut counts = vec![0usize; nb.len()];
    for s in 0..trials {
        let t = simple_random_walk(&g, 0, 1, 9, s).unwrap();
        counts[nb.iter().position(|&x| x == t.vertices[1]).unwrap()] += 1;
    }
    let e = trials as f64 / nb.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    // 99.9% quantile of chi-square with 6 degrees of freedom
    assert!(chi2 < 22.46, "{counts:?} chi2 {chi2}");
}

#[test]
fn harmonic_extension_tracks_the_exit_value() {
    let t = RegularTiling::new(7).unwrap();
    let g = |a: f64| a.cos();
    let walk = observed_walk(&t, t.root(), 120, 21, 0);
    let rep = levy_convergence_check(&t, &walk.states, &g, 400, 600, 1e-8, 20, 22).unwrap();
    let gap = rep.terminal_gap.expect("walk exits");
    assert!(gap < 0.05, "terminal gap {gap}");
    let first = rep.h[0];
    assert!(first.value.abs() < 4.0 * first.se + 1e-12, "root value {first:?}");
    for e in &rep.h {
        assert!(e.value.abs() <= 1.0 && e.not_converged == 0);
    }
}
