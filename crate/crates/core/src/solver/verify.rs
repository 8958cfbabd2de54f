use super::config::{ProblemId, RunConfig, Wall};
use super::{AdaptiveSolver, ProblemSetup, SolverError};
use crate::lbm::{ReferenceSolver, StreamMode};
use crate::multiresolution::{derive_prediction_weights, project, tabulated_coefficients, AdaptParams, Prediction};
use crate::schemes::{ns_d2q9, NsParams};

/// Outcome of one self-check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, value: f64, tol: f64) -> Check {
    Check {
        name,
        passed: value <= tol,
        detail: format!("{value:.3e} (tolerance {tol:.0e})"),
    }
}

fn custom(dim: usize, max_level: u32, eps: f64, wall: Wall) -> Result<RunConfig, SolverError> {
    let mut cfg = RunConfig::defaults(ProblemId::Custom);
    cfg.max_level = max_level;
    cfg.eps = eps;
    let a = cfg.advection.as_mut().expect("custom has advection");
    a.dim = dim;
    a.velocity = vec![0.5; dim];
    a.center = vec![0.4; dim];
    a.boundary = wall;
    cfg.validate()?;
    Ok(cfg)
}

fn solver(cfg: &RunConfig) -> Result<(ProblemSetup, AdaptiveSolver), SolverError> {
    let s = ProblemSetup::new(cfg)?;
    let a = AdaptiveSolver::new(
        s.scheme.clone(),
        s.bcs.clone(),
        s.pred.clone(),
        AdaptParams { eps: cfg.eps, mu: cfg.mu },
        &s.initial,
    )?;
    Ok((s, a))
}

/// Quick invariant suite: exact coefficients, consistency of prediction and projection,
/// equivalence with the uniform solver at zero threshold, flattened against recursive streaming,
/// and conservation.
pub fn verify() -> Result<Vec<Check>, SolverError> {
    let mut out = Vec::new();

    let exact = (1..=3).all(|g| derive_prediction_weights(g).ok() == tabulated_coefficients(g).ok());
    out.push(Check {
        name: "prediction coefficients",
        passed: exact,
        detail: "derived rationals equal the tabulated values".into(),
    });

    let mut worst = 0.0f64;
    for dim in 1..=3 {
        for gamma in 1..=3 {
            let p = Prediction::new(dim, gamma)?;
            let stencil: Vec<f64> = (0..p.offsets().len()).map(|i| (1.3 * i as f64 + 0.7).sin()).collect();
            let centre = stencil[stencil.len() / 2];
            worst = worst.max((project(&p.predict_all(&stencil)) - centre).abs());
        }
    }
    out.push(check("projection of prediction", worst, 1e-13));

    let mut worst = 0.0f64;
    for (dim, level) in [(1, 6), (2, 5)] {
        let cfg = custom(dim, level, 0.0, Wall::BounceBack)?;
        let (s, mut a) = solver(&cfg)?;
        let mut r = ReferenceSolver::new(s.initial.clone());
        for _ in 0..20 {
            a.step()?;
            r.advance(&s.scheme, &s.bcs)?;
            let rec = a.reconstruct();
            for (x, y) in rec.data().iter().zip(r.state().data()) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    out.push(check("zero threshold matches uniform solver", worst, 1e-12));

    let mut cfg = RunConfig::defaults(ProblemId::EulerCfg3);
    cfg.max_level = 6;
    let (s, mut a) = solver(&cfg)?;
    let mut b = AdaptiveSolver::new(
        s.scheme.clone(),
        s.bcs.clone(),
        s.pred.clone(),
        a.params(),
        &s.initial,
    )?
    .with_stream_mode(StreamMode::Recursive);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        a.step()?;
        b.step()?;
        for (x, y) in a.field().data().iter().zip(b.field().data()) {
            worst = worst.max((x - y).abs());
        }
    }
    out.push(check("flattened equals recursive stream", worst, 1e-12));

    let cfg = custom(2, 6, 1e-3, Wall::BounceBack)?;
    let (_, mut a) = solver(&cfg)?;
    let m0 = a.totals()[0];
    let mut worst = 0.0f64;
    for _ in 0..20 {
        a.step()?;
        worst = worst.max(((a.totals()[0] - m0) / m0).abs());
    }
    out.push(check("closed box mass", worst, 1e-12));

    let scheme = ns_d2q9(&NsParams::default(), 1.0 / 128.0)?;
    let mut f: Vec<f64> = (0..9).map(|i| 0.1 + 0.01 * (i as f64).cos()).collect();
    let before = scheme.conserved_moments(&f);
    let mut scratch = vec![0.0; scheme.scratch_len()];
    scheme.collide_cell(&mut f, &mut scratch).map_err(|e| SolverError::Config(e.to_string()))?;
    let after = scheme.conserved_moments(&f);
    let drift = before.iter().zip(&after).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    out.push(check("collision keeps conserved moments", drift, 1e-15));

    Ok(out)
}
