use proptest::prelude::*;
use sphere_periods::circle::PlCircleMap;
use sphere_periods::constants::{polygon_side, simplex_edge};
use sphere_periods::lab::{conjugate_map, small_diameter_set};
use sphere_periods::linalg::{orthogonality_residual, random_unit};
use sphere_periods::{
    build_pl_conjugacy, is_regular_pgon, orbit, origin_hull_distance, random_periodic_isometry, regular_configuration,
    seed, set_diameter, shift_exact, smallest_enclosing_cap, ConfigurationKind, MapSpec, PeriodicMap, SpherePoint,
};

fn point(dim: usize, s: u64) -> SpherePoint {
    SpherePoint::new(random_unit(dim, &mut seed::rng(s))).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn chords_are_symmetric_and_bounded(dim in 2usize..8, a in any::<u64>(), b in any::<u64>()) {
        let (x, y) = (point(dim, a), point(dim, b));
        prop_assert!((x.chord(&y) - y.chord(&x)).abs() < 1e-15);
        prop_assert!(x.chord(&y) <= 2.0 + 1e-15);
        prop_assert!((x.chord(&x.antipode()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn random_isometries_are_periodic_and_shift_at_least_rho(n in 1usize..8, pi in 0usize..6, s in any::<u64>()) {
        let p = [2, 3, 5, 7, 11, 13][pi];
        let q = random_periodic_isometry(n, p, s).unwrap();
        prop_assert!(orthogonality_residual(&q.matrix) < 1e-12);
        let h = PeriodicMap::from_isometry(&q);
        prop_assert!(h.period_residual(8, s) < 1e-10);
        prop_assert!(shift_exact(&q) >= polygon_side(p) - 1e-12);
    }

    #[test]
    fn orbits_close_up(n in 1usize..5, pi in 0usize..4, s in any::<u64>()) {
        let p = [2, 3, 5, 7][pi];
        let h = conjugate_map(n, p, s).unwrap();
        let x = point(n + 1, s ^ 1);
        let o = orbit(&h, &x).unwrap();
        prop_assert_eq!(o.points.len(), p);
        prop_assert!(o.points[p - 1].chord(&x) < 1e-9);
    }

    #[test]
    fn map_specs_rebuild_the_same_map(n in 1usize..5, s in any::<u64>()) {
        let h = conjugate_map(n, 5, s).unwrap();
        let spec: MapSpec = serde_json::from_str(&serde_json::to_string(h.provenance().unwrap()).unwrap()).unwrap();
        let g = PeriodicMap::from_spec(&spec).unwrap();
        let x = point(n + 1, s);
        prop_assert_eq!(h.apply(x.coords()), g.apply(x.coords()));
    }

    #[test]
    fn hull_distance_is_at_most_any_point(dim in 2usize..6, m in 1usize..10, s in any::<u64>()) {
        let pts: Vec<SpherePoint> = (0..m as u64).map(|i| point(dim, seed::derive(s, 1, i))).collect();
        let h = origin_hull_distance(&pts).unwrap();
        prop_assert!(h.distance >= 0.0 && h.distance <= 1.0 + 1e-12);
        for x in &pts {
            // The nearest point y satisfies <x, y> >= |y|^2 for every x in the set.
            let y = h.nearest_point(&pts);
            prop_assert!(x.coords().dot(&y) >= y.norm_squared() - 1e-8);
        }
    }

    #[test]
    fn small_sets_fit_in_jung_caps(n in 1usize..8, i in 0usize..30, s in any::<u64>()) {
        let pts = small_diameter_set(n, i, s).unwrap();
        prop_assert!(set_diameter(&pts) < simplex_edge(n));
        let cap = smallest_enclosing_cap(&pts).unwrap();
        prop_assert!(cap.covers(&pts, 1e-9));
        prop_assert!(cap.chordal_radius >= set_diameter(&pts) / 2.0 - 1e-9);
        prop_assert!(!origin_hull_distance(&pts).unwrap().contains_origin);
    }

    #[test]
    fn regular_gons_are_recognized(p in 3usize..20, dim in 2usize..6, s in any::<u64>()) {
        let gon = regular_configuration(ConfigurationKind::Pgon, p, dim, s).unwrap();
        prop_assert!(is_regular_pgon(&gon, 1e-9).regular);
        let mut bent = gon.clone();
        let mut c = bent[0].coords().clone();
        c[0] += 1e-3;
        bent[0] = SpherePoint::new(c).unwrap();
        prop_assert!(!is_regular_pgon(&bent, 1e-6).regular);
    }

    #[test]
    fn circle_conjugators_invert(s in any::<u64>(), u in 0.0f64..1.0) {
        let g = PlCircleMap::random(&mut seed::rng(s));
        prop_assert!((g.lift_inverse(g.lift(u)) - u).abs() < 1e-12);
        prop_assert!(g.lift(u + 1.0) - g.lift(u) - 1.0 < 1e-12);
    }

    #[test]
    fn conjugated_rotations_have_exact_period(q in 1usize..12, s in any::<u64>()) {
        let p = 13;
        let h = build_pl_conjugacy(q, p, None, s).unwrap();
        prop_assert!(h.period_residual(64) < 1e-10);
    }
}
