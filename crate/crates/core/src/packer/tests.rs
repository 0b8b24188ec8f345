use super::*;
use crate::map::fixtures::wheel;

fn hub_radius(k: usize) -> f64 {
    let p = PackingProblem::plane(wheel(k), 1.0).unwrap();
    let (r, _) = solve_radii(&p, &SolverConfig::default(), None).unwrap();
    r.values[0]
}

#[test]
fn wheel_hub_radii() {
    assert_eq!(hub_radius(6), 1.0);
    for k in [5usize, 7] {
        let t = 2.0 * PI / k as f64;
        let oracle = (2.0 / (1.0 - t.cos())).sqrt() - 1.0;
        assert!((hub_radius(k) - oracle).abs() < 1e-10, "k = {k}");
    }
    assert!((hub_radius(7) - 1.304_76).abs() < 1e-5);
    assert!((hub_radius(5) - 0.701_30).abs() < 1e-5);
}

#[test]
fn unconverged_angle_sum_diagnostic() {
    let m = wheel(7);
    let r = Radii { geometry: Geometry::Plane, values: vec![1.0; 8] };
    assert!((angle_sum(&m, &r, 0) - 7.0 * PI / 3.0).abs() < 1e-12);
    let h = wheel(6);
    let r = Radii { geometry: Geometry::Plane, values: vec![1.0; 7] };
    assert!((angle_sum(&h, &r, 0) - 2.0 * PI).abs() < 1e-14);
}

#[test]
fn hexagonal_wheel_layout() {
    let p = PackingProblem::plane(wheel(6), 1.0).unwrap();
    let pk = pack(&p, &SolverConfig::default(), 0).unwrap();
    assert!(pk.circles[0].z.norm() < 1e-15);
    for v in 1..=6 {
        let z = pk.circles[v].z;
        assert!((z.norm() - 2.0).abs() < 1e-12);
        let k = (z.arg() / (PI / 3.0)).round();
        assert!((z.arg() - k * PI / 3.0).abs() < 1e-12);
    }
    assert_eq!(pk.report.iters, 0);
    assert!(pk.tangency_residual < 1e-12);
}

#[test]
fn budget_exhaustion_reports_defect() {
    let p = PackingProblem::plane(wheel(7), 1.0).unwrap();
    let cfg = SolverConfig { max_iters: 1, damping: 0.1, ..SolverConfig::default() };
    match solve_radii(&p, &cfg, None) {
        Err(PackError::NoConvergence { iters, defect, vertex }) => {
            assert_eq!((iters, vertex), (1, 0));
            assert!(defect > 0.0);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn bad_config_is_rejected() {
    let p = PackingProblem::plane(wheel(6), 1.0).unwrap();
    let cfg = SolverConfig { damping: 0.0, ..SolverConfig::default() };
    assert!(matches!(solve_radii(&p, &cfg, None), Err(PackError::BadConfig(_))));
}

#[test]
fn disc_wheel_with_horocycle_rim() {
    // hub surrounded by k horocycles: sin(pi/k) = exp(-h)
    for k in [3usize, 5, 7, 12] {
        let p = PackingProblem::disc(wheel(k)).unwrap();
        let pk = pack(&p, &SolverConfig::default(), 0).unwrap();
        let h = pk.radii.values[0];
        assert!((h + (PI / k as f64).sin().ln()).abs() < 1e-10, "k = {k}");
        assert!(pk.relative_residual(&p.map) < 1e-9);
        for v in 1..=k {
            let c = pk.circles[v];
            assert!((c.z.norm() + c.r - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn damped_defect_decreases_on_wheels() {
    for k in [4usize, 5, 7, 9] {
        let p = PackingProblem::plane(wheel(k), 1.0).unwrap();
        let mut prev = f64::INFINITY;
        let mut start: Option<Radii> = None;
        for _ in 0..30 {
            let cfg = SolverConfig { max_iters: 1, damping: 0.5, tol: 1e-300, ..SolverConfig::default() };
            let r = match solve_radii(&p, &cfg, start.as_ref()) {
                Err(PackError::NoConvergence { defect, .. }) => {
                    assert!(defect <= prev + 1e-15);
                    prev = defect;
                    let mut s = start.unwrap_or(Radii { geometry: Geometry::Plane, values: vec![1.0; k + 1] });
                    let theta = angle_sum(&p.map, &s, 0);
                    let target = uniform_neighbour_target(Geometry::Plane, s.values[0], theta, k);
                    s.values[0] += 0.5 * (target - s.values[0]);
                    s
                }
                Ok((r, _)) => r,
                Err(e) => panic!("{e}"),
            };
            start = Some(r);
        }
    }
}
