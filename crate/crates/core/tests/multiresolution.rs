use mrlbm::mesh::*;
use mrlbm::multiresolution::*;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn r(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// Exact mean of `x^m` over `[a, b]`.
fn poly_mean(m: i32, a: f64, b: f64) -> f64 {
    (b.powi(m + 1) - a.powi(m + 1)) / ((m + 1) as f64 * (b - a))
}

#[test]
fn coefficients_match_the_table() {
    assert_eq!(tabulated_coefficients(1).unwrap(), vec![r(-1, 8)]);
    assert_eq!(tabulated_coefficients(2).unwrap(), vec![r(-11, 64), r(3, 128)]);
    assert_eq!(tabulated_coefficients(3).unwrap(), vec![r(-201, 1024), r(11, 256), r(-5, 1024)]);
    for g in 1..=3 {
        assert_eq!(derive_prediction_weights(g).unwrap(), tabulated_coefficients(g).unwrap());
    }
    assert_eq!(tabulated_coefficients(4), Err(MrError::InvalidGamma(4)));
    assert_eq!(derive_prediction_weights(0), Err(MrError::InvalidGamma(0)));
}

#[test]
fn one_dimensional_prediction_is_exact_on_polynomials() {
    for gamma in 1..=3u32 {
        let p = Prediction::new(1, gamma).unwrap();
        let g = gamma as i32;
        for m in 0..=2 * g {
            // parent cells of width 1 centred on integers, parent 0 predicted
            let stencil: Vec<f64> = (-g..=g)
                .map(|o| poly_mean(m, o as f64 - 0.5, o as f64 + 0.5))
                .collect();
            let kids = p.predict_all(&stencil);
            assert!((kids[0] - poly_mean(m, -0.5, 0.0)).abs() < 1e-13, "γ={gamma} m={m}");
            assert!((kids[1] - poly_mean(m, 0.0, 0.5)).abs() < 1e-13, "γ={gamma} m={m}");
        }
        // degree 2γ+1 is not reproduced
        let m = 2 * g + 1;
        let stencil: Vec<f64> = (-g..=g).map(|o| poly_mean(m, o as f64 - 0.5, o as f64 + 0.5)).collect();
        assert!((p.predict_all(&stencil)[0] - poly_mean(m, -0.5, 0.0)).abs() > 1e-6);
    }
}

#[test]
fn two_dimensional_weights_are_a_tensor_product() {
    let p = Prediction::new(2, 1).unwrap();
    let w = p.weights(0);
    let at = |x: i32, y: i32| {
        let i = p.offsets().iter().position(|o| o[0] == x && o[1] == y).unwrap();
        w[i]
    };
    assert_eq!(at(0, 0), 1.0);
    assert_eq!(at(-1, 0), 0.125);
    assert_eq!(at(1, 0), -0.125);
    assert_eq!(at(0, -1), 0.125);
    assert_eq!(at(0, 1), -0.125);
    assert_eq!(at(1, -1), -1.0 / 64.0);
    assert_eq!(at(-1, -1), 1.0 / 64.0);
    assert_eq!(at(1, 1), 1.0 / 64.0);
    assert_eq!(at(-1, 1), -1.0 / 64.0);
    assert_eq!(p.weights(0).iter().sum::<f64>(), 1.0);
}

#[test]
fn constant_stencil_predicts_the_constant() {
    for dim in 1..=3 {
        for gamma in 1..=3 {
            let p = Prediction::new(dim, gamma).unwrap();
            let s = vec![2.5; p.offsets().len()];
            assert!(p.predict_all(&s).iter().all(|v| (v - 2.5).abs() < 1e-14));
        }
    }
}

#[test]
fn level_thresholds_scale_with_volume() {
    let lat = Lattice::new(2, 2, 7).unwrap();
    assert_eq!(level_threshold(&lat, 7, 1e-3), 1e-3);
    assert_eq!(level_threshold(&lat, 6, 1e-3), 0.25e-3);
    let lat3 = Lattice::new(3, 1, 8).unwrap();
    assert_eq!(level_threshold(&lat3, 7, 1.0), 0.125);
}

#[test]
fn threshold_rejects_bad_eps() {
    let lat = Lattice::new(1, 1, 3).unwrap();
    let t = CellTree::full(lat, 3);
    let m = vec![0.0; t.len()];
    assert_eq!(threshold(&t, &m, -1.0).unwrap_err(), MrError::InvalidThreshold(-1.0));
    assert!(threshold(&t, &m, f64::NAN).is_err());
    assert_eq!(threshold(&t, &m, 0.1).unwrap().len(), 2);
}

fn random_full(dim: usize, jmin: u32, jmax: u32, q: usize, seed: u64) -> (CellTree, Field) {
    let lat = Lattice::new(dim, jmin, jmax).unwrap();
    let tree = CellTree::full(lat, jmax);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = Field::zeros(q, tree.len());
    for pos in tree.level_range(jmax) {
        for v in f.cell_mut(pos) {
            *v = rng.random::<f64>() - 0.5;
        }
    }
    project_up(&tree, &mut f);
    (tree, f)
}

#[test]
fn sibling_details_sum_to_zero() {
    for dim in 1..=3 {
        for gamma in 1..=3 {
            let (tree, f) = random_full(dim, 1, if dim == 3 { 4 } else { 6 }, 2, 7);
            let p = Prediction::new(dim, gamma).unwrap();
            let d = details(&tree, &f, &p);
            let lat = *tree.lattice();
            for level in lat.min_level()..lat.max_level() {
                for pos in tree.level_range(level) {
                    let cell = tree.cell(pos);
                    for j in 0..2 {
                        let s: f64 = (0..lat.num_children())
                            .map(|c| {
                                let ch = lat.child_unchecked(&cell, c);
                                d.cell(tree.position(ch.level, &ch.k).unwrap())[j]
                            })
                            .sum();
                        assert!(s.abs() < 1e-12, "d={dim} γ={gamma}: {s}");
                    }
                }
            }
        }
    }
}

#[test]
fn encode_decode_is_lossless_at_zero_threshold() {
    let (tree, f) = random_full(2, 1, 5, 1, 3);
    let lat = *tree.lattice();
    let data = UniformField::from_fn(lat, 5, 1, |k, out| out[0] = f.cell(tree.position(5, &k).unwrap())[0]);
    let p = Prediction::new(2, 2).unwrap();
    let c = encode(&data, &p, 0.0).unwrap();
    let back = decode(&c.tree, &c.field, &p);
    for (a, b) in back.data().iter().zip(data.data()) {
        assert!((a - b).abs() < 1e-13);
    }
}

#[test]
fn encode_error_is_controlled_by_eps() {
    let lat = Lattice::new(2, 1, 7).unwrap();
    let data = UniformField::from_fn(lat, 7, 1, |k, out| {
        let x = (k[0] as f64 + 0.5) / 128.0;
        let y = (k[1] as f64 + 0.5) / 128.0;
        out[0] = (2.0 * std::f64::consts::PI * x).sin() * (2.0 * std::f64::consts::PI * y).sin();
    });
    let p = Prediction::new(2, 1).unwrap();
    let mut prev_leaves = 0;
    for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
        let c = encode(&data, &p, eps).unwrap();
        let back = decode(&c.tree, &c.field, &p);
        let err = back.data().iter().zip(data.data()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 10.0 * eps, "eps {eps}: {err}");
        assert!(c.tree.num_leaves() >= prev_leaves);
        prev_leaves = c.tree.num_leaves();
    }
}

#[test]
fn reconstruction_agrees_with_the_recursive_reconstructor() {
    let lat = Lattice::new(2, 1, 6).unwrap();
    let data = UniformField::from_fn(lat, 6, 2, |k, out| {
        out[0] = if k[0] + k[1] < 40 { 1.0 } else { 0.2 };
        out[1] = (k[0] as f64 * 0.1).cos();
    });
    let p = Prediction::new(2, 1).unwrap();
    let c = encode(&data, &p, 1e-3).unwrap();
    assert!(c.tree.num_leaves() < lat.cells_on_level(6));
    let uni = reconstruct_uniform(&c.tree, &c.field, &p, 6);
    let mut rec = Reconstructor::new(&c.tree, &c.field, &p);
    for lin in 0..uni.num_cells() {
        let k = lat.delinear(6, lin);
        let v = rec.value(6, &k);
        assert!((v[0] - uni.cell(lin)[0]).abs() < 1e-13 && (v[1] - uni.cell(lin)[1]).abs() < 1e-13);
    }
}

#[test]
fn transfer_onto_the_same_tree_is_the_identity() {
    let (tree, f) = random_full(2, 1, 5, 3, 11);
    let p = Prediction::new(2, 1).unwrap();
    let g = transfer(&tree, &f, &p, &tree).unwrap();
    for (a, b) in g.data().iter().zip(f.data()) {
        assert!((a - b).abs() < 1e-15);
    }
    let wrong = Field::zeros(3, 5);
    assert!(matches!(transfer(&tree, &wrong, &p, &tree), Err(MrError::FieldSize { .. })));
}

#[test]
fn adaptation_keeps_a_graded_tree_and_leaf_totals() {
    let lat = Lattice::new(2, 2, 6).unwrap();
    let data = UniformField::from_fn(lat, 6, 1, |k, out| out[0] = if k[0] < 20 { 1.0 } else { 0.0 });
    let p = Prediction::new(2, 1).unwrap();
    let full = CellTree::full(lat, 6);
    let mut f = Field::zeros(1, full.len());
    for pos in full.level_range(6) {
        f.cell_mut(pos)[0] = data.get(&full.index(pos))[0];
    }
    let v = [[1, 0, 0], [0, 1, 0], [-1, 0, 0], [0, -1, 0]];
    let (t, g) = adapt(&full, &mut f, &p, AdaptParams { eps: 1e-3, mu: 1.0 }, &v).unwrap();
    assert!(t.is_graded(1));
    assert!(t.num_leaves() < full.num_leaves());
    let mass = |tree: &CellTree, field: &Field| -> f64 {
        tree.leaves()
            .iter()
            .map(|&pos| field.cell(pos as usize)[0] * lat.geometry(&tree.cell(pos as usize)).measure)
            .sum()
    };
    assert!((mass(&t, &g) - mass(&full, &f)).abs() < 1e-13);
}

#[test]
fn flattened_table_matches_recursive_sum() {
    let gap = 3;
    let lat = Lattice::new(2, 0, 4 + gap).unwrap();
    let mut set = CellSet::full_to(lat, 4);
    set.insert_closed(&CellId::new(4, [0; 3]));
    let tree = CellTree::from_set(&set).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut f = Field::zeros(1, tree.len());
    for pos in tree.level_range(4) {
        f.cell_mut(pos)[0] = rng.random::<f64>();
    }
    project_up(&tree, &mut f);
    let p = Prediction::new(2, 1).unwrap();
    let cell = CellId::new(4, [8, 7, 0]);
    for eta in [[1, 0, 0], [-2, 1, 0], [1, 1, 0]] {
        for side in [Side::Incoming, Side::Outgoing] {
            let table = prediction_table(&p, gap, &eta, side).unwrap();
            let flat: f64 = table
                .shifts
                .iter()
                .zip(&table.weights)
                .map(|(s, w)| w * f.cell(tree.position(4, &add(&cell.k, s)).unwrap())[0])
                .sum();
            let (e, a) = compute_ea(&lat, &cell, &eta);
            let cells = if side == Side::Incoming { e } else { a };
            let mut rec = Reconstructor::new(&tree, &f, &p);
            let direct: f64 = cells.iter().map(|k| rec.value(4 + gap, k)[0]).sum();
            assert!((flat - direct).abs() <= 1e-12 * direct.abs().max(1.0));
        }
    }
}

#[test]
fn ea_sets_have_the_expected_size() {
    for gap in 0..5u32 {
        let n = 1i32 << gap;
        let (e, a) = ea_boxes(gap, &[1, 0, 0], 2);
        let count = |b: &[IndexBox]| b.iter().map(IndexBox::count).sum::<usize>();
        assert_eq!(count(&e), n as usize);
        assert_eq!(count(&a), n as usize);
        let (e, _) = ea_boxes(gap, &[1, 1, 0], 2);
        assert_eq!(count(&e), (2 * n - 1) as usize);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn projection_of_prediction_is_the_centre(
        dim in 1usize..=3,
        gamma in 1u32..=3,
        vals in prop::collection::vec(-10.0f64..10.0, 343),
    ) {
        let p = Prediction::new(dim, gamma).unwrap();
        let s = &vals[..p.offsets().len()];
        let centre = s[s.len() / 2];
        prop_assert!((project(&p.predict_all(s)) - centre).abs() <= 1e-13 * (1.0 + centre.abs()));
    }

    #[test]
    fn prediction_commutes_with_reflection(gamma in 1u32..=3, vals in prop::collection::vec(-1.0f64..1.0, 7)) {
        let p = Prediction::new(1, gamma).unwrap();
        let n = p.offsets().len();
        let s = &vals[..n];
        let mirrored: Vec<f64> = s.iter().rev().copied().collect();
        let a = p.predict_all(s);
        let b = p.predict_all(&mirrored);
        prop_assert!((a[0] - b[1]).abs() < 1e-14 && (a[1] - b[0]).abs() < 1e-14);
    }

    #[test]
    fn affine_data_has_vanishing_details(a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let lat = Lattice::new(2, 1, 5).unwrap();
        let tree = CellTree::full(lat, 5);
        let mut f = Field::zeros(1, tree.len());
        for pos in tree.level_range(5) {
            let g = lat.geometry(&tree.cell(pos));
            let x = g.center(2);
            f.cell_mut(pos)[0] = a + b * x[0] + c * x[1];
        }
        project_up(&tree, &mut f);
        let p = Prediction::new(2, 1).unwrap();
        let d = details(&tree, &f, &p);
        // interior cells only: mirrored ghosts break affinity at the walls
        for level in 2..=5u32 {
            for pos in tree.level_range(level) {
                let k = tree.index(pos);
                let e = lat.extent(level) ;
                if k[0] >= 2 && k[1] >= 2 && k[0] < e[0] - 2 && k[1] < e[1] - 2 {
                    prop_assert!(d.cell(pos)[0].abs() < 1e-12);
                }
            }
        }
    }
}
