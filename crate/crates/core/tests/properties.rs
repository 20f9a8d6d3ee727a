//! Property tests for the geometric invariants of every module.

use confdiam_core::doubling::{build_double, make_teardrop, tube_area};
use confdiam_core::gates::{self, check_gates, main_inequality_report, rho0, wz_constant, ReportOptions};
use confdiam_core::geodesy::{GraphOptions, WeightedGraph};
use confdiam_core::plateau::{minimize_area, screen_boundary, SolverOptions, AREA_SLACK};
use confdiam_core::surface::{area, boundary_length, total_mean_curvature};
use confdiam_core::{generate, AmbientKind, ConformalAmbient, ImmersedMesh, Vec3};
use nalgebra::{Rotation3, Unit};
use proptest::prelude::*;
use std::f64::consts::PI;

const BUILTINS: [AmbientKind; 4] = [
    AmbientKind::Euclidean,
    AmbientKind::HyperbolicBall,
    AmbientKind::HyperbolicHalfSpace,
    AmbientKind::SphereStereographic,
];

fn ambient(kind: AmbientKind) -> ConformalAmbient {
    ConformalAmbient::from_kind(kind).unwrap()
}

/// A point well inside the chart domain of `kind`, from unit-cube coordinates.
fn inside(kind: AmbientKind, u: [f64; 3]) -> Vec3 {
    let v = Vec3::new(u[0], u[1], u[2]);
    match kind {
        AmbientKind::HyperbolicBall => v * 0.6 / 3f64.sqrt(),
        AmbientKind::HyperbolicHalfSpace => Vec3::new(2.0 * v.x, 2.0 * v.y, 1.5 + 1.0 * v.z),
        _ => v * 3.0,
    }
}

fn unit3() -> impl Strategy<Value = [f64; 3]> {
    [-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64]
}

fn kind() -> impl Strategy<Value = AmbientKind> {
    prop::sample::select(BUILTINS.to_vec())
}

/// A bumpy, jittered disk placed inside the chart domain of `kind`.
fn fixture(kind: AmbientKind, seed: u64) -> ImmersedMesh {
    let (radius, lift) = match kind {
        AmbientKind::HyperbolicBall => (0.5, 0.0),
        AmbientKind::HyperbolicHalfSpace => (1.0, 1.5),
        _ => (1.0, 0.0),
    };
    let disk = generate::bumpy_disk(radius, 5, 0.1 * radius);
    generate::jitter_interior(&disk, 0.2, seed).map_positions(|p| p + Vec3::new(0.0, 0.0, lift)).unwrap()
}

fn relabeled(mesh: &ImmersedMesh, perm: &[usize]) -> ImmersedMesh {
    let mut positions = vec![Vec3::zeros(); perm.len()];
    for (old, &new) in perm.iter().enumerate() {
        positions[new] = *mesh.position(old);
    }
    let faces = mesh.faces().iter().map(|f| [perm[f[0]], perm[f[1]], perm[f[2]]]).collect();
    ImmersedMesh::new(positions, faces).unwrap()
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_bounded_by_polyline_length(k in kind(), p in unit3(), q in unit3(), b in unit3()) {
        let a = ambient(k);
        let (p, q) = (inside(k, p), inside(k, q));
        let bump = Vec3::new(b[0], b[1], b[2]) * 0.2;
        let n = 400;
        let path: Vec<Vec3> = (0..=n)
            .map(|i| {
                let t = i as f64 / n as f64;
                p + (q - p) * t + bump * (PI * t).sin()
            })
            .collect();
        let d = a.ambient_distance(&p, &q).unwrap();
        let len = a.curve_length(&path, false).unwrap();
        prop_assert!(len >= d * (1.0 - 1e-3), "{k:?}: length {len} < distance {d}");
    }

    #[test]
    fn distance_is_symmetric_metric(k in kind(), p in unit3(), q in unit3(), r in unit3()) {
        let a = ambient(k);
        let (p, q, r) = (inside(k, p), inside(k, q), inside(k, r));
        let pq = a.ambient_distance(&p, &q).unwrap();
        let qp = a.ambient_distance(&q, &p).unwrap();
        let qr = a.ambient_distance(&q, &r).unwrap();
        let pr = a.ambient_distance(&p, &r).unwrap();
        prop_assert!((pq - qp).abs() <= 1e-9 * (1.0 + pq));
        prop_assert!(pr <= pq + qr + 1e-9 * (1.0 + pr));
        prop_assert!(a.ambient_distance(&p, &p).unwrap().abs() <= 1e-9);
    }

    #[test]
    fn conformal_norm_is_homogeneous(k in kind(), p in unit3(), v in unit3(), e in -20i32..20, neg in any::<bool>(), lam in -1e3..1e3f64) {
        let a = ambient(k);
        let p = inside(k, p);
        let v = Vec3::new(v[0], v[1], v[2]);
        let base = a.conformal_norm(&p, &v).unwrap();
        let two = if neg { -(2f64.powi(e)) } else { 2f64.powi(e) };
        prop_assert_eq!(a.conformal_norm(&p, &(v * two)).unwrap(), two.abs() * base);
        let scaled = a.conformal_norm(&p, &(v * lam)).unwrap();
        prop_assert!((scaled - lam.abs() * base).abs() <= 4.0 * f64::EPSILON * scaled.abs());
    }

    #[test]
    fn sphere_distance_at_most_pi(p in unit3(), q in unit3(), s in 0.0..4.0f64) {
        let a = ambient(AmbientKind::SphereStereographic);
        let p = Vec3::new(p[0], p[1], p[2]) * 10f64.powf(s - 2.0);
        let q = -Vec3::new(q[0], q[1], q[2]) * 10f64.powf(2.0 - s);
        prop_assert!(a.ambient_distance(&p, &q).unwrap() <= PI);
    }

    #[test]
    fn wz_constant_is_minimal_at_two_thirds(alpha in 1e-3..0.999f64) {
        let best = wz_constant(2.0 / 3.0).unwrap();
        prop_assert!(wz_constant(alpha).unwrap() >= best * (1.0 - 1e-15));
    }

    #[test]
    fn nonpositive_curvature_passes_gates(alpha in 1e-6..(1.0 - 1e-6), area in 1e-9..1e9f64, k in -10.0..=0.0f64, strict in any::<bool>()) {
        prop_assert_eq!(check_gates(area, k, f64::INFINITY, alpha, strict), (true, true));
    }

    #[test]
    fn rho0_continuous_across_flat(alpha in 0.01..0.99f64, area2 in 1e-4..1.0f64) {
        let flat = rho0(alpha, area2, 0.0).unwrap();
        for k in [1e-12, -1e-12] {
            prop_assert!((rho0(alpha, area2, k).unwrap() - flat).abs() <= 1e-6);
        }
    }

    #[test]
    fn teardrop_total_curvature_exceeds_pi(eta in 1e-3..(PI / 4.0 - 1e-3)) {
        let drop = make_teardrop(eta, 256).unwrap();
        prop_assert!((drop.analytic_total_abs_curvature() - (PI + 4.0 * eta)).abs() <= 1e-9);
        prop_assert!(drop.analytic_total_abs_curvature() > PI);
        prop_assert!(drop.total_abs_curvature() >= PI - 1e-3);
        let turning = drop.tangent_turning();
        let wrapped = (turning - PI).rem_euclid(2.0 * PI);
        prop_assert!(wrapped.min(2.0 * PI - wrapped) <= 1e-6, "turning {turning}");
        prop_assert!(drop.start().norm() <= 1e-12 && drop.end().norm() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn constant_factor_scales_total_curvature(seed in any::<u64>(), c in -2.0..2.0f64) {
        let mesh = fixture(AmbientKind::Euclidean, seed);
        let flat = ambient(AmbientKind::Euclidean);
        let shifted = flat.shifted(c);
        let base = total_mean_curvature(&mesh, &flat).unwrap();
        let scaled = total_mean_curvature(&mesh, &shifted).unwrap();
        prop_assert!(rel_close(scaled, c.exp() * base, 1e-9), "{scaled} vs {}", c.exp() * base);
    }

    #[test]
    fn euclidean_area_is_rigid_invariant(seed in any::<u64>(), axis in unit3(), angle in 0.0..(2.0 * PI), t in unit3()) {
        let a = ambient(AmbientKind::Euclidean);
        let mesh = fixture(AmbientKind::Euclidean, seed);
        let axis = Unit::try_new(Vec3::new(axis[0], axis[1], axis[2]), 1e-3).unwrap_or(Vec3::z_axis());
        let rot = Rotation3::from_axis_angle(&axis, angle);
        let shift = Vec3::new(t[0], t[1], t[2]) * 10.0;
        let moved = mesh.map_positions(|p| rot * p + shift).unwrap();
        prop_assert!(rel_close(area(&moved, &a).unwrap(), area(&mesh, &a).unwrap(), 1e-12));
    }

    #[test]
    fn graph_distance_dominates_ambient_distance(k in kind(), seed in any::<u64>(), picks in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 8)) {
        let a = ambient(k);
        let mesh = fixture(k, seed);
        let graph = WeightedGraph::build(&mesh, &a, &GraphOptions::default()).unwrap();
        let tolerance = 2.0 * graph.max_weight();
        for (i, j) in picks {
            let (u, v) = (i.index(mesh.vertex_count()), j.index(mesh.vertex_count()));
            let graph_d = graph.distances_from(u)[v];
            let ambient_d = a.ambient_distance(mesh.position(u), mesh.position(v)).unwrap();
            prop_assert!(graph_d >= ambient_d - tolerance, "{k:?} {u}-{v}: graph {graph_d} < ambient {ambient_d}");
        }
    }

    #[test]
    fn diameter_ignores_vertex_labels(k in kind(), seed in any::<u64>(), perm in Just((0..91).collect::<Vec<usize>>()).prop_shuffle()) {
        let a = ambient(k);
        let mesh = fixture(k, seed);
        prop_assume!(mesh.vertex_count() == perm.len());
        let d0 = WeightedGraph::build(&mesh, &a, &GraphOptions::default()).unwrap().diameter().value;
        let d1 = WeightedGraph::build(&relabeled(&mesh, &perm), &a, &GraphOptions::default()).unwrap().diameter().value;
        prop_assert!(rel_close(d0, d1, 1e-12), "{d0} vs {d1}");
    }

    #[test]
    fn steiner_round_never_increases_diameter(k in kind(), seed in any::<u64>()) {
        let a = ambient(k);
        let mesh = fixture(k, seed);
        let plain = WeightedGraph::build(&mesh, &a, &GraphOptions::default()).unwrap().diameter().value;
        let refined = WeightedGraph::build(&mesh, &a, &GraphOptions::with_steiner(1)).unwrap().diameter().value;
        prop_assert!(refined <= plain + 1e-12, "{refined} > {plain}");
    }

    #[test]
    fn report_scales_with_constant_shift(k in prop::sample::select(vec![AmbientKind::Euclidean, AmbientKind::HyperbolicBall]), seed in any::<u64>(), c in -1.5..1.5f64) {
        let a = ambient(k);
        let mesh = fixture(k, seed);
        let opts = ReportOptions::default();
        let base = main_inequality_report(&mesh, &a, None, &opts).unwrap();
        let moved = main_inequality_report(&mesh, &a.shifted(c), None, &opts).unwrap();
        let s = c.exp();
        prop_assert!(rel_close(moved.diameter.unwrap(), s * base.diameter.unwrap(), 1e-6));
        prop_assert!(rel_close(moved.rhs.unwrap(), s * base.rhs.unwrap(), 1e-6));
        prop_assert!(rel_close(moved.boundary_len, s * base.boundary_len, 1e-6));
        prop_assert!(rel_close(moved.total_h, s * base.total_h, 1e-6));
        prop_assert_eq!(moved.margin.unwrap() >= 0.0, base.margin.unwrap() >= 0.0);
    }

    #[test]
    fn doubled_area_splits_and_tube_shrinks(eta in 0.02..0.6f64, seed in any::<u64>()) {
        let a = ambient(AmbientKind::Euclidean);
        let mesh = fixture(AmbientKind::Euclidean, seed);
        let drop = make_teardrop(eta, 128).unwrap();
        let sigma_area = area(&mesh, &a).unwrap();
        let ell = boundary_length(&mesh, &a).unwrap().total;
        let mut constant = None;
        for eps in [0.08, 0.04, 0.02, 0.01] {
            let d = build_double(&mesh, &a, eps, &drop, 32).unwrap();
            let tube = tube_area(&d, &a).unwrap();
            let total = area(&d.mesh, &a).unwrap();
            prop_assert!(rel_close(total, 2.0 * sigma_area + tube, 1e-12));
            let c = *constant.get_or_insert(tube / (eps * ell));
            prop_assert!(tube <= 1.05 * c * eps * ell, "eps {eps}: {tube} vs {}", c * eps * ell);
            for v in mesh.boundary_loops().iter().flatten() {
                prop_assert!((d.mesh.position(d.copy_a[*v]) - mesh.position(*v)).norm() <= 1e-12);
                prop_assert!((d.mesh.position(d.copy_b[*v]) - mesh.position(*v)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn area_descent_never_increases_area(k in prop::sample::select(vec![AmbientKind::Euclidean, AmbientKind::HyperbolicBall]), seed in any::<u64>()) {
        let a = ambient(k);
        let mesh = fixture(k, seed);
        let opts = SolverOptions { max_iters: 30, ..Default::default() };
        let out = minimize_area(&mesh, &a, &opts).unwrap();
        for w in out.history.windows(2) {
            prop_assert!(w[1].area <= w[0].area * (1.0 + AREA_SLACK));
        }
        let raw = SolverOptions { precondition: false, max_iters: 30, ..Default::default() };
        let out = minimize_area(&mesh, &a, &raw).unwrap();
        for w in out.history.windows(2) {
            prop_assert!(w[1].area <= w[0].area * (1.0 + AREA_SLACK));
        }
    }

    #[test]
    fn area_gradient_matches_central_differences(k in kind(), seed in any::<u64>(), picks in prop::collection::vec(any::<prop::sample::Index>(), 20)) {
        let a = ambient(k);
        let mesh = fixture(k, seed);
        let grad = confdiam_core::plateau::area_gradient(&mesh, &a).unwrap();
        let interior: Vec<usize> = mesh.interior_vertices().collect();
        let h = 1e-6 * mesh.bounding_box_diagonal();
        for pick in picks {
            let v = interior[pick.index(interior.len())];
            let mut fd = Vec3::zeros();
            for c in 0..3 {
                let at = |s: f64| {
                    let mut x = mesh.positions().to_vec();
                    x[v][c] += s;
                    area(&mesh.with_positions(x).unwrap(), &a).unwrap()
                };
                fd[c] = (at(h) - at(-h)) / (2.0 * h);
            }
            prop_assert!((fd - grad[v]).norm() <= 1e-5 * grad[v].norm(), "{k:?} v {v}: {fd:?} vs {:?}", grad[v]);
        }
    }

    #[test]
    fn screen_ignores_labels_and_rigid_motions(sep in 1.0..1e3f64, r0 in 0.1..2.0f64, r1 in 0.1..2.0f64, axis in unit3(), angle in 0.0..(2.0 * PI), t in unit3()) {
        let a = ambient(AmbientKind::Euclidean);
        let c0 = generate::circle(Vec3::zeros(), r0, 24);
        let c1 = generate::circle(Vec3::new(sep, 0.0, 0.0), r1, 24);
        let v = screen_boundary(&[c0.clone(), c1.clone()], &a, None, None, false).unwrap();
        let swapped = screen_boundary(&[c1.clone(), c0.clone()], &a, None, None, false).unwrap();
        prop_assert_eq!(v.verdict, swapped.verdict);
        prop_assert_eq!(v.bound, swapped.bound);
        prop_assert_eq!(v.separation, swapped.separation);
        let axis = Unit::try_new(Vec3::new(axis[0], axis[1], axis[2]), 1e-3).unwrap_or(Vec3::z_axis());
        let rot = Rotation3::from_axis_angle(&axis, angle);
        let shift = Vec3::new(t[0], t[1], t[2]) * 100.0;
        let moved: Vec<Vec<Vec3>> = [c0, c1].iter().map(|c| c.iter().map(|p| rot * p + shift).collect()).collect();
        let m = screen_boundary(&moved, &a, None, None, false).unwrap();
        prop_assert!(rel_close(m.separation, v.separation, 1e-9));
        prop_assert!(rel_close(m.bound, v.bound, 1e-9));
        let decisive = (v.separation - v.bound).abs() > 1e-9 * v.bound;
        prop_assert!(!decisive || m.verdict == v.verdict);
    }

    #[test]
    fn screen_ignores_area_budget_without_curvature(kind in prop::sample::select(vec![AmbientKind::Euclidean, AmbientKind::HyperbolicBall, AmbientKind::HyperbolicHalfSpace]), budget in 1e-6..1e6f64, sep in 0.05..0.5f64) {
        let a = ambient(kind);
        let base = match kind {
            AmbientKind::HyperbolicHalfSpace => Vec3::new(0.0, 0.0, 1.0),
            _ => Vec3::zeros(),
        };
        let c0 = generate::circle(base - Vec3::new(sep, 0.0, 0.0), 0.02, 16);
        let c1 = generate::circle(base + Vec3::new(sep, 0.0, 0.0), 0.02, 16);
        let curves = [c0, c1];
        let without = screen_boundary(&curves, &a, None, None, false).unwrap();
        let with = screen_boundary(&curves, &a, None, Some(budget), false).unwrap();
        prop_assert_eq!(without.verdict, with.verdict);
        prop_assert_eq!(without.bound, with.bound);
        prop_assert_eq!(without.alpha, with.alpha);
    }
}

#[test]
fn golden_section_finds_two_thirds() {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.05, 0.95);
    let f = |x: f64| wz_constant(x).unwrap();
    while hi - lo > 1e-7 {
        let (x1, x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
        if f(x1) < f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    assert!((0.5 * (lo + hi) - gates::OPTIMAL_ALPHA).abs() <= 3e-8);
}

#[test]
fn disk_refinement_is_second_order() {
    let a = ambient(AmbientKind::Euclidean);
    let deficits = |rings: usize| {
        let disk = generate::disk(1.0, rings);
        (PI - area(&disk, &a).unwrap(), 2.0 * PI - boundary_length(&disk, &a).unwrap().total)
    };
    for rings in [4, 8, 16] {
        let (a1, l1) = deficits(rings);
        let (a2, l2) = deficits(2 * rings);
        assert!((2.5..=6.0).contains(&(a1 / a2)), "area ratio {}", a1 / a2);
        assert!((2.5..=6.0).contains(&(l1 / l2)), "length ratio {}", l1 / l2);
    }
}
