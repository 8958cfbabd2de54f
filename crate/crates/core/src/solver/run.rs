use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::output::{fmt_f64, write_cells_csv, GridDump, MetricsWriter};
use super::setup::ProblemSetup;
use super::{AdaptiveSolver, KernelCounts, SolverError};
use crate::diagnostics::{additional_error, drag_lift, occupation_rates, strouhal, Strouhal};
use crate::lbm::ReferenceSolver;
use crate::multiresolution::AdaptParams;
use crate::schemes::{apply_obstacle, apply_obstacle_uniform, VolumeFractions};

/// Metrics after one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub step: u64,
    pub time: f64,
    pub leaves: usize,
    pub cells: usize,
    pub mem_or: f64,
    pub mesh_or: f64,
    /// Conserved totals over the domain.
    pub totals: Vec<f64>,
    /// `(C_D, C_L)` of the adaptive run.
    pub forces: Option<(f64, f64)>,
    /// `(C_D, C_L)` of the reference run.
    pub reference_forces: Option<(f64, f64)>,
    /// Additional error per conserved moment.
    pub errors: Option<Vec<f64>>,
}

/// A run in progress: adaptive solver, optional reference solver and obstacle state.
#[derive(Debug)]
pub struct Simulation {
    cfg: RunConfig,
    setup: ProblemSetup,
    solver: AdaptiveSolver,
    reference: Option<ReferenceSolver>,
    fractions: Option<VolumeFractions>,
    reference_fractions: Vec<(usize, f64)>,
    step: u64,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self, SolverError> {
        let setup = ProblemSetup::new(cfg)?;
        let solver = AdaptiveSolver::new(
            setup.scheme.clone(),
            setup.bcs.clone(),
            setup.pred.clone(),
            AdaptParams {
                eps: cfg.eps,
                mu: cfg.mu,
            },
            &setup.initial,
        )?;
        let mut solver = solver;
        let mut reference = cfg.reference.then(|| ReferenceSolver::new(setup.initial.clone()));
        let mut fractions = setup.obstacle.as_ref().map(|o| VolumeFractions::new(o.spec));
        let reference_fractions = match (&mut fractions, cfg.reference) {
            (Some(f), true) => f.for_level(&setup.lattice, cfg.max_level),
            _ => Vec::new(),
        };
        // the obstacle is part of the initial datum, so the first adaptation sees it
        if let (Some(fr), Some(ob)) = (&mut fractions, &setup.obstacle) {
            solver.modify_leaves(|tree, field| {
                let list = fr.for_tree(tree);
                apply_obstacle(&setup.scheme, tree, field, &list, &ob.rest)
            });
            if let Some(r) = &mut reference {
                apply_obstacle_uniform(&setup.scheme, r.state_mut(), &reference_fractions, &ob.rest);
            }
        }
        Ok(Self {
            cfg: cfg.clone(),
            setup,
            solver,
            reference,
            fractions,
            reference_fractions,
            step: 0,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }
    pub fn setup(&self) -> &ProblemSetup {
        &self.setup
    }
    pub fn solver(&self) -> &AdaptiveSolver {
        &self.solver
    }
    pub fn reference(&self) -> Option<&ReferenceSolver> {
        self.reference.as_ref()
    }
    pub fn step_count(&self) -> u64 {
        self.step
    }
    pub fn time(&self) -> f64 {
        self.step as f64 * self.cfg.dt()
    }

    /// Metrics of the current state (forces are only known after a step).
    pub fn record(&self, forces: Option<(f64, f64)>, reference_forces: Option<(f64, f64)>) -> Result<StepRecord, SolverError> {
        let tree = self.solver.tree();
        let (mem_or, mesh_or) = occupation_rates(tree);
        let errors = match &self.reference {
            Some(r) => {
                let rec = self.solver.reconstruct();
                let scheme = &self.setup.scheme;
                Some(
                    scheme
                        .conserved()
                        .iter()
                        .map(|&row| additional_error(scheme, &rec, r.state(), row))
                        .collect::<Result<Vec<_>, _>>()?,
                )
            }
            None => None,
        };
        Ok(StepRecord {
            step: self.step,
            time: self.time(),
            leaves: tree.num_leaves(),
            cells: tree.len(),
            mem_or,
            mesh_or,
            totals: self.solver.totals(),
            forces,
            reference_forces,
            errors,
        })
    }

    /// One step: adapt, stream, collide, then the obstacle blend.
    pub fn advance(&mut self) -> Result<StepRecord, SolverError> {
        let step = self.step + 1;
        let numerical = |source| SolverError::Numerical { step, source };
        self.solver.step().map_err(numerical)?;
        if let Some(r) = &mut self.reference {
            r.advance(&self.setup.scheme, &self.setup.bcs).map_err(numerical)?;
        }
        let mut forces = None;
        let mut reference_forces = None;
        if let (Some(fr), Some(ob)) = (&mut self.fractions, &self.setup.obstacle) {
            let scheme = &self.setup.scheme;
            let dt = self.cfg.dt();
            let p = &ob.params;
            let removed = self.solver.modify_leaves(|tree, field| {
                let list = fr.for_tree(tree);
                apply_obstacle(scheme, tree, field, &list, &ob.rest)
            });
            forces = Some(drag_lift(removed, dt, p.rho0, p.u0, p.length));
            if let Some(r) = &mut self.reference {
                let removed = apply_obstacle_uniform(scheme, r.state_mut(), &self.reference_fractions, &ob.rest);
                reference_forces = Some(drag_lift(removed, dt, p.rho0, p.u0, p.length));
            }
        }
        self.step = step;
        self.record(forces, reference_forces)
    }
}

/// Outcome of a complete run.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub problem: String,
    pub steps: u64,
    pub final_time: f64,
    pub leaves: usize,
    pub cells: usize,
    pub mem_or: f64,
    pub mesh_or: f64,
    pub totals: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub errors: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strouhal: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strouhal_bin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strouhal_reference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strouhal_reference_bin: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strouhal_resolution: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strouhal_note: Option<String>,
    pub adapts: u64,
    pub streams: u64,
    pub collided_leaves: u64,
}

fn metrics_header(sim: &Simulation) -> Vec<String> {
    let names = &sim.setup.moment_names;
    let mut h: Vec<String> = ["step", "time", "leaves", "cells", "mem_or", "mesh_or"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(names.iter().map(|n| format!("total_{n}")));
    if sim.setup.obstacle.is_some() {
        h.extend(["cd".to_string(), "cl".to_string()]);
        if sim.reference.is_some() {
            h.extend(["cd_ref".to_string(), "cl_ref".to_string()]);
        }
    }
    if sim.reference.is_some() {
        h.extend(names.iter().map(|n| format!("err_{n}")));
    }
    h
}

fn metrics_values(sim: &Simulation, r: &StepRecord) -> Vec<String> {
    let mut v = vec![fmt_f64(r.time), r.leaves.to_string(), r.cells.to_string()];
    let mut f = vec![r.mem_or, r.mesh_or];
    f.extend(&r.totals);
    if sim.setup.obstacle.is_some() {
        let (cd, cl) = r.forces.unwrap_or((0.0, 0.0));
        f.extend([cd, cl]);
        if sim.reference.is_some() {
            let (cd, cl) = r.reference_forces.unwrap_or((0.0, 0.0));
            f.extend([cd, cl]);
        }
    }
    if let Some(e) = &r.errors {
        f.extend(e);
    }
    v.extend(f.into_iter().map(fmt_f64));
    v
}

fn snapshot(sim: &Simulation, dir: &Path) -> Result<(), SolverError> {
    let step = sim.step;
    let s = sim.solver();
    write_cells_csv(
        &dir.join(format!("cells_{step}.csv")),
        &sim.setup.scheme,
        s.tree(),
        s.field(),
        &sim.setup.moment_names,
    )?;
    if sim.cfg.binary_dump {
        GridDump::from_populations(&sim.setup.scheme, &s.reconstruct()).write(&dir.join(format!("grid_{step}.bin")))?;
    }
    Ok(())
}

/// Output directory: the explicit argument, else `MRLBM_OUTPUT`, else the config entry.
pub fn output_dir(cfg: &RunConfig, explicit: Option<&Path>) -> Option<PathBuf> {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os("MRLBM_OUTPUT").map(PathBuf::from))
        .or_else(|| cfg.output.clone())
}

/// Run a configuration to completion, writing outputs to `dir` when given.
pub fn run(cfg: &RunConfig, dir: Option<&Path>) -> Result<RunSummary, SolverError> {
    let mut sim = Simulation::new(cfg)?;
    let mut metrics = match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            std::fs::write(d.join("resolved_config.toml"), cfg.to_toml())?;
            Some(MetricsWriter::create(&d.join("metrics.csv"), &metrics_header(&sim))?)
        }
        None => None,
    };
    let first = sim.record(None, None)?;
    if let (Some(m), Some(d)) = (&mut metrics, dir) {
        m.row(0, &metrics_values(&sim, &first))?;
        snapshot(&sim, d)?;
    }
    let n = cfg.num_steps();
    let mut last = first;
    let mut lift = Vec::new();
    let mut lift_ref = Vec::new();
    for _ in 0..n {
        last = sim.advance()?;
        if let Some((_, cl)) = last.forces {
            lift.push((last.time, cl));
        }
        if let Some((_, cl)) = last.reference_forces {
            lift_ref.push((last.time, cl));
        }
        if let (Some(m), Some(d)) = (&mut metrics, dir) {
            m.row(sim.step, &metrics_values(&sim, &last))?;
            if cfg.snapshot_every > 0 && sim.step.is_multiple_of(cfg.snapshot_every) {
                snapshot(&sim, d)?;
            }
        }
    }
    if let Some(d) = dir {
        if cfg.snapshot_every == 0 || !sim.step.is_multiple_of(cfg.snapshot_every) {
            snapshot(&sim, d)?;
        }
    }
    let counts: KernelCounts = sim.solver.counts();
    let mut summary = RunSummary {
        problem: cfg.problem.name().into(),
        steps: sim.step,
        final_time: sim.time(),
        leaves: last.leaves,
        cells: last.cells,
        mem_or: last.mem_or,
        mesh_or: last.mesh_or,
        totals: last.totals.clone(),
        errors: last.errors.clone(),
        strouhal: None,
        strouhal_bin: None,
        strouhal_reference: None,
        strouhal_reference_bin: None,
        strouhal_resolution: None,
        strouhal_note: None,
        adapts: counts.adapts,
        streams: counts.streams,
        collided_leaves: counts.collided_leaves,
    };
    if let Some(ob) = &sim.setup.obstacle {
        let p = &ob.params;
        let est = |s: &[(f64, f64)]| strouhal(s, p.u0, p.length, ob.transient);
        match est(&lift) {
            Ok(Strouhal { st, bin, resolution, .. }) => {
                summary.strouhal = Some(st);
                summary.strouhal_bin = Some(bin);
                summary.strouhal_resolution = Some(resolution);
            }
            Err(e) => summary.strouhal_note = Some(e.to_string()),
        }
        if let Ok(s) = est(&lift_ref) {
            summary.strouhal_reference = Some(s.st);
            summary.strouhal_reference_bin = Some(s.bin);
        }
    }
    if let Some(d) = dir {
        let text = toml::to_string(&summary).map_err(|e| SolverError::Config(e.to_string()))?;
        std::fs::write(d.join("summary.toml"), text)?;
    }
    Ok(summary)
}
