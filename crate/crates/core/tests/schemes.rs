use mrlbm::lbm::*;
use mrlbm::mesh::*;
use mrlbm::multiresolution::*;
use mrlbm::schemes::*;
use mrlbm::solver::AdaptiveSolver;

fn adaptive(scheme: &SchemeSpec, bcs: Boundaries, init: &UniformField, eps: f64) -> AdaptiveSolver {
    let pred = Prediction::new(init.lattice().dim(), 1).unwrap();
    AdaptiveSolver::new(scheme.clone(), bcs, pred, AdaptParams { eps, mu: 1.0 }, init).unwrap()
}

fn moments(scheme: &SchemeSpec, f: &UniformField, lin: usize) -> Vec<f64> {
    scheme.conserved_moments(f.cell(lin))
}

#[test]
fn d2q9_third_moment_uses_squared_momentum() {
    let scheme = ns_d2q9(&NsParams::default(), 1.0 / 128.0).unwrap();
    let (rho, qx, qy) = (1.2, 0.06, -0.03);
    let f = scheme.equilibrium_populations(&[rho, qx, qy]).unwrap();
    let mut m = vec![0.0; 9];
    scheme.to_moments(&f, &mut m);
    let cs2 = 1.0 / 3.0;
    let expected = 3.0 * (-2.0 * cs2 * rho + (qx * qx + qy * qy) / rho);
    assert!((m[3] - expected).abs() < 1e-14);
    assert!((m[7] - (qx * qx - qy * qy) / rho).abs() < 1e-15);
}

#[test]
fn d2q9_relaxation_follows_viscosity() {
    let p = NsParams::default();
    let dt = 1.0 / 256.0;
    let mu = p.rho0 * p.u0 * p.length / p.reynolds;
    let s2 = 1.0 / (0.5 + 3.0 * mu / dt);
    assert!((ns_relaxation(&p, dt) - s2).abs() < 1e-15);
    assert_eq!(ns_d2q9(&p, dt).unwrap().relaxation()[7], s2);
}

#[test]
fn d2q9_rest_state_is_a_collision_fixed_point() {
    let scheme = ns_d2q9(&NsParams::default(), 1.0 / 128.0).unwrap();
    let mut f = scheme.equilibrium_populations(&[1.0, 0.0, 0.0]).unwrap();
    let g = f.clone();
    let mut s = vec![0.0; scheme.scratch_len()];
    scheme.collide_cell(&mut f, &mut s).unwrap();
    for (a, b) in f.iter().zip(&g) {
        assert!((a - b).abs() < 1e-15);
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    assert!(matches!(
        advection_d3q6(1.0, [1.5, 0.0, 0.0], 1.4, 1.0),
        Err(SchemeError::Cfl { .. })
    ));
    assert!(matches!(
        advection_d1q2(1.0, 0.5, 2.5),
        Err(SchemeError::Relaxation { .. })
    ));
    let bad = EulerParams {
        s_q: [1.9, 2.0, 1.75, 1.75],
        ..EulerParams::default()
    };
    assert!(matches!(euler_d2q4(&bad), Err(SchemeError::Relaxation { .. })));
    let fast = NsParams {
        u0: 0.9,
        ..NsParams::default()
    };
    assert!(matches!(ns_d2q9(&fast, 0.01), Err(SchemeError::Parameter { .. })));
    assert!(matches!(lax_liu(7), Err(SchemeError::UnknownConfig(7))));
}

#[test]
fn quadrant_files_parse() {
    let q = parse_quadrants("# demo\n1 0 0 1\n2 0 0 2\n3 0 0 3 # comment\n\n4 0 0 4\n").unwrap();
    assert_eq!(q.lower_left[0], 3.0);
    assert_eq!(q.at(0.9, 0.1), [4.0, 0.0, 0.0, 4.0]);
    assert!(matches!(
        parse_quadrants("1 0 0 1\n1 0 0\n1 0 0 1\n1 0 0 1"),
        Err(SchemeError::Quadrants { line: 2, .. })
    ));
    assert!(parse_quadrants("1 0 0 1\n1 0 0 -1\n1 0 0 1\n1 0 0 1").is_err());
    assert!(parse_quadrants("1 0 0 1").is_err());
}

#[test]
fn initial_mass_is_the_area_weighted_quadrant_density() {
    let scheme = euler_d2q4(&EulerParams::default()).unwrap();
    let lat = Lattice::new(2, 2, 6).unwrap();
    let data = lax_liu(3).unwrap();
    let init = lax_liu_initial(&scheme, lat, 6, &data).unwrap();
    let h2 = 1.0 / (64.0 * 64.0);
    let mass: f64 = (0..init.num_cells()).map(|l| moments(&scheme, &init, l)[0] * h2).sum();
    let expected = 0.25 * (data.upper_right[0] + data.upper_left[0] + data.lower_left[0] + data.lower_right[0]);
    assert!((mass - expected).abs() < 1e-13);
}

#[test]
fn uniform_equilibria_are_fixed_points_of_the_adaptive_step() {
    let euler = euler_d2q4(&EulerParams::default()).unwrap();
    let lat2 = Lattice::new(2, 2, 5).unwrap();
    let still = lax_liu_initial(&euler, lat2, 5, &QuadrantData::uniform([1.4, 0.3, -0.2, 1.0])).unwrap();

    let params = NsParams::default();
    let ns = ns_d2q9(&params, 1.0 / 32.0).unwrap();
    let nlat = Lattice::with_base(2, 2, 5, [2, 1, 1]).unwrap();
    let flow = equilibrium_field(&ns, nlat, 5, |_| vec![1.0, 0.05, 0.0]).unwrap();

    let adv = advection_d3q6(1.0, [0.25, -0.25, 0.1], 1.4, 1.0).unwrap();
    let lat3 = Lattice::new(3, 1, 4).unwrap();
    let flat = equilibrium_field(&adv, lat3, 4, |_| vec![0.7]).unwrap();

    let cases = [
        (euler, Boundaries::uniform(BoundaryKind::Copy), still),
        (ns.clone(), ns_boundaries(&ns, &params).unwrap(), flow),
        (adv, Boundaries::uniform(BoundaryKind::Copy), flat),
    ];
    for (scheme, bcs, init) in cases {
        let mut a = adaptive(&scheme, bcs, &init, 1e-3);
        for _ in 0..3 {
            a.step().unwrap();
        }
        let out = a.reconstruct();
        for (x, y) in out.data().iter().zip(init.data()) {
            assert!((x - y).abs() < 1e-13, "{}: {x} vs {y}", scheme.name());
        }
        assert_eq!(a.tree().num_leaves(), lat_coarsest(init.lattice()));
    }
}

fn lat_coarsest(lat: &Lattice) -> usize {
    lat.cells_on_level(lat.min_level())
}

#[test]
fn euler_is_symmetric_under_axis_swap() {
    let scheme = euler_d2q4(&EulerParams::default()).unwrap();
    let lat = Lattice::new(2, 2, 6).unwrap();
    let sod = |s: f64| if s < 0.5 { [1.0, 0.0, 2.5] } else { [0.125, 0.0, 0.25] };
    let along_x = equilibrium_field(&scheme, lat, 6, |x| {
        let [r, q, e] = sod(x[0]);
        vec![r, q, 0.0, e]
    })
    .unwrap();
    let along_y = equilibrium_field(&scheme, lat, 6, |x| {
        let [r, q, e] = sod(x[1]);
        vec![r, 0.0, q, e]
    })
    .unwrap();
    let mut a = adaptive(&scheme, Boundaries::uniform(BoundaryKind::Copy), &along_x, 1e-3);
    let mut b = adaptive(&scheme, Boundaries::uniform(BoundaryKind::Copy), &along_y, 1e-3);
    for _ in 0..40 {
        a.step().unwrap();
        b.step().unwrap();
    }
    let (fa, fb) = (a.reconstruct(), b.reconstruct());
    let mut max = 0.0f64;
    for lin in 0..fa.num_cells() {
        let k = lat.delinear(6, lin);
        let ma = moments(&scheme, &fa, lin);
        let mb = moments(&scheme, &fb, lat.linear(6, &[k[1], k[0], 0]));
        for (x, y) in [(ma[0], mb[0]), (ma[1], mb[2]), (ma[2], mb[1]), (ma[3], mb[3])] {
            max = max.max((x - y).abs());
        }
    }
    assert!(max <= 1e-12, "asymmetry {max:e}");
    // the one-dimensional datum must not develop a transverse dependence
    for lin in 0..fa.num_cells() {
        let k = lat.delinear(6, lin);
        let other = moments(&scheme, &fa, lat.linear(6, &[k[0], 0, 0]));
        assert!((moments(&scheme, &fa, lin)[0] - other[0]).abs() <= 1e-12);
    }
}

#[test]
fn d3q6_is_symmetric_under_axis_permutation() {
    let lat = Lattice::new(3, 1, 5).unwrap();
    let v = [0.25, 0.125, -0.0625];
    let perm = [2, 0, 1];
    let pv = [v[perm[0]], v[perm[1]], v[perm[2]]];
    let ball = sphere_indicator([0.5; 3], 0.2, 3);
    let run = |vel: [f64; 3]| {
        let scheme = advection_d3q6(1.0, vel, 1.4, 1.0).unwrap();
        let init = equilibrium_field(&scheme, lat, 5, |x| vec![ball(x)]).unwrap();
        let mut a = adaptive(&scheme, Boundaries::uniform(BoundaryKind::Copy), &init, 1e-3);
        for _ in 0..10 {
            a.step().unwrap();
        }
        let out = a.reconstruct();
        (0..out.num_cells()).map(|l| moments(&scheme, &out, l)[0]).collect::<Vec<_>>()
    };
    let a = run(v);
    let b = run(pv);
    let mut max = 0.0f64;
    for (lin, va) in a.iter().enumerate() {
        let k = lat.delinear(5, lin);
        // the permuted run sees axis i of the original as axis j with perm[j] = i
        let kb = [k[perm[0]], k[perm[1]], k[perm[2]]];
        max = max.max((va - b[lat.linear(5, &kb)]).abs());
    }
    assert!(max <= 1e-12, "asymmetry {max:e}");
}

#[test]
fn zero_velocity_keeps_the_datum() {
    let scheme = advection_d3q6(1.0, [0.0; 3], 1.4, 1.0).unwrap();
    let lat = Lattice::new(3, 1, 4).unwrap();
    let ball = sphere_indicator([0.5; 3], 0.15, 3);
    let init = equilibrium_field(&scheme, lat, 4, |x| vec![ball(x)]).unwrap();
    let mut r = ReferenceSolver::new(init.clone());
    let bcs = Boundaries::uniform(BoundaryKind::Copy);
    for _ in 0..3 {
        r.advance(&scheme, &bcs).unwrap();
    }
    // with V = 0 the scheme only diffuses: mass is kept and the centroid stays put
    let centroid = (0..r.state().num_cells())
        .map(|l| moments(&scheme, r.state(), l)[0] * (lat.delinear(4, l)[0] as f64 + 0.5) / 16.0)
        .sum::<f64>();
    let total = |f: &UniformField| (0..f.num_cells()).map(|l| moments(&scheme, f, l)[0]).sum::<f64>();
    assert!((total(r.state()) - total(&init)).abs() < 1e-12);
    assert!((centroid / total(r.state()) - 0.5).abs() < 1e-12);
}

#[test]
fn obstacle_blend_limits() {
    let params = NsParams::default();
    let scheme = ns_d2q9(&params, 1.0 / 128.0).unwrap();
    let lat = Lattice::with_base(2, 2, 5, [2, 1, 1]).unwrap();
    let tree = CellTree::full(lat, 5);
    let init = equilibrium_field(&scheme, lat, 5, |x| vec![1.0 + 0.01 * x[0], 0.05, 0.01]).unwrap();
    let mut field = Field::zeros(9, tree.len());
    for pos in tree.level_range(5) {
        field.cell_mut(pos).copy_from_slice(init.get(&tree.index(pos)));
    }
    let rest = scheme.equilibrium_populations(&[1.0, 0.0, 0.0]).unwrap();
    let before = field.clone();
    let removed = apply_obstacle(&scheme, &tree, &mut field, &[], &rest);
    assert_eq!(removed, [0.0, 0.0]);
    assert_eq!(field.data(), before.data());

    let pos = tree.level_range(5).start + 7;
    let removed = apply_obstacle(&scheme, &tree, &mut field, &[(pos, 1.0), (pos + 1, 0.0)], &rest);
    assert_eq!(field.cell(pos), &rest[..]);
    assert_eq!(field.cell(pos + 1), before.cell(pos + 1));
    let vol = lat.geometry(&tree.cell(pos)).measure;
    assert!((removed[0] - 0.05 * vol).abs() < 1e-15);
}

#[test]
fn volume_fractions_converge_with_subsampling() {
    let disc = Disc {
        center: [0.3125, 0.5078125],
        radius: 1.0 / 32.0,
    };
    let coarse = ObstacleSpec::new(disc, 16).unwrap();
    let fine = ObstacleSpec::new(disc, 64).unwrap();
    let lat = Lattice::with_base(2, 2, 7, [2, 1, 1]).unwrap();
    let mut total = 0.0;
    for lin in 0..lat.cells_on_level(7) {
        let g = lat.geometry(&CellId::new(7, lat.delinear(7, lin)));
        let (a, b) = (coarse.fraction(&g), fine.fraction(&g));
        assert!((0.0..=1.0).contains(&a));
        assert!((a - b).abs() < 1e-2, "{a} vs {b}");
        total += b * g.measure;
    }
    assert!((total - disc.area()).abs() / disc.area() < 1e-3);
    let far = lat.geometry(&CellId::new(2, [7, 3, 0]));
    assert_eq!(fine.fraction(&far), 0.0);
}
