use mrlbm::lbm::{BoundaryKind, Boundaries, ReferenceSolver, SchemeSpec};
use mrlbm::mesh::Lattice;
use mrlbm::multiresolution::{AdaptParams, Prediction, UniformField};
use mrlbm::schemes::*;
use mrlbm::solver::AdaptiveSolver;

fn max_diff(a: &UniformField, b: &UniformField) -> f64 {
    let scale = b.data().iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn check(scheme: SchemeSpec, bcs: Boundaries, init: UniformField, steps: usize) {
    let pred = Prediction::new(scheme.dim(), 1).unwrap();
    let mut ad = AdaptiveSolver::new(scheme.clone(), bcs.clone(), pred, AdaptParams { eps: 0.0, mu: 1.0 }, &init).unwrap();
    let mut rf = ReferenceSolver::new(init);
    for s in 0..steps {
        ad.step().unwrap();
        rf.advance(&scheme, &bcs).unwrap();
        let d = max_diff(&ad.reconstruct(), rf.state());
        assert!(d <= 1e-12, "{} step {s}: {d}", scheme.name());
    }
}

#[test]
fn euler_full_mesh_matches_reference() {
    let scheme = euler_d2q4(&EulerParams::default()).unwrap();
    let lat = Lattice::new(2, 2, 5).unwrap();
    let init = lax_liu_initial(&scheme, lat, 5, &lax_liu(3).unwrap()).unwrap();
    check(scheme, Boundaries::uniform(BoundaryKind::Copy), init, 20);
}

#[test]
fn ns_full_mesh_matches_reference() {
    let p = NsParams::default();
    let lat = Lattice::with_base(2, 2, 5, [2, 1, 1]).unwrap();
    let scheme = ns_d2q9(&p, 1.0 / 32.0).unwrap();
    let bcs = ns_boundaries(&scheme, &p).unwrap();
    let init = equilibrium_field(&scheme, lat, 5, |x| {
        let bump = 0.02 * (-80.0 * ((x[0] - 0.6).powi(2) + (x[1] - 0.5).powi(2))).exp();
        vec![1.0 + bump, 0.05, 0.0]
    })
    .unwrap();
    check(scheme, bcs, init, 20);
}

#[test]
fn d3q6_full_mesh_matches_reference() {
    let scheme = advection_d3q6(1.0, [0.25, 0.25, 0.25], 1.4, 1.0).unwrap();
    let lat = Lattice::new(3, 1, 4).unwrap();
    let ind = sphere_indicator([0.3; 3], 0.25, 3);
    let init = equilibrium_field(&scheme, lat, 4, |c| vec![ind(c)]).unwrap();
    check(scheme, Boundaries::uniform(BoundaryKind::Copy), init, 10);
}
