//! Minimax dynamic programming over a grid.
//!
//! The value recursion is
//!
//! ```text
//! J_N(x) = g_N(x)
//! J_k(x) = g_k(x) ⊕ min_u max_w J_{k+1}(f(x, u, w))
//! ```
//!
//! where `⊕` is a plain sum or, by default, `min(1, g + J)`. The effective
//! target set at step `k` is `{x : J_k(x) = 0}`; off-node it is decided by
//! comparing the interpolated value against a threshold.
//!
//! [`full_dp`] grids the whole state space. [`reduced_dp`] grids the
//! invariant coordinates of a [`MovingFrame`] instead: each reduced node is
//! re-embedded on the cross-section with `ρ̄⁻¹`, stepped through the full
//! dynamics, and mapped back with `ρ` before interpolation.
//!
//! Each backward step reads the immutable field `k + 1` and writes field
//! `k`; nodes are independent, so the sweep is split across rayon workers.
//! Results do not depend on the worker count.

mod policy;

pub use policy::{
    lift_policy, rollout, Adversary, FixedAdversary, GreedyAdversary, Identity, Invariants, Policy, RandomAdversary,
    StateProjection, TablePolicy, Trajectory,
};

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{BoundaryPolicy, Grid, GridError, ValueField};
use crate::symmetry::MovingFrame;
use crate::system::SystemModel;
use crate::tube::TargetTube;

/// Nodes handled per parallel work item.
const CHUNK: usize = 512;

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("{what}: expected dimension {expected}, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("tube horizon {tube} does not match solver horizon {config}")]
    HorizonMismatch { tube: usize, config: usize },
    #[error("membership threshold {0} must lie in (0, 1)")]
    InvalidThreshold(f64),
    #[error("non-finite value at step {step}, node {node}")]
    NonFinite { step: usize, node: usize },
    #[error("step {step} is outside 0..={horizon}")]
    StepOutOfRange { step: usize, horizon: usize },
    #[error("time budget exhausted during step {step}")]
    Timeout { step: usize },
    #[error("could not build worker pool: {0}")]
    WorkerPool(String),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub horizon: usize,
    pub grid: Arc<Grid>,
    pub boundary: BoundaryPolicy,
    /// Interpolated values below this count as inside the effective target set.
    pub membership_threshold: f64,
    /// Accumulate with `min(1, g + J)` instead of `g + J`.
    pub saturating: bool,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Abort with [`SolveError::Timeout`] once the sweep has run this long.
    pub time_budget: Option<Duration>,
}

impl SolveConfig {
    pub fn new(horizon: usize, grid: Grid) -> Self {
        SolveConfig {
            horizon,
            grid: Arc::new(grid),
            boundary: BoundaryPolicy::default(),
            membership_threshold: 0.5,
            saturating: true,
            workers: None,
            time_budget: None,
        }
    }

    pub fn with_boundary(mut self, boundary: BoundaryPolicy) -> Self {
        self.boundary = boundary;
        self
    }

    pub fn with_saturating(mut self, saturating: bool) -> Self {
        self.saturating = saturating;
        self
    }

    pub fn with_workers(mut self, workers: Option<usize>) -> Self {
        self.workers = workers;
        self
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.membership_threshold = threshold;
        self
    }

    pub fn with_time_budget(mut self, budget: Option<Duration>) -> Self {
        self.time_budget = budget;
        self
    }
}

/// `J_0, …, J_N` on a shared grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSequence {
    fields: Vec<ValueField>,
}

impl ValueSequence {
    pub fn new(fields: Vec<ValueField>) -> Result<Self, SolveError> {
        if let Some(first) = fields.first() {
            for f in &fields[1..] {
                if f.grid() != first.grid() {
                    return Err(SolveError::DimensionMismatch {
                        what: "value sequence grid",
                        expected: first.grid().len(),
                        got: f.grid().len(),
                    });
                }
            }
        }
        Ok(ValueSequence { fields })
    }

    pub fn horizon(&self) -> usize {
        self.fields.len().saturating_sub(1)
    }

    pub fn get(&self, k: usize) -> Option<&ValueField> {
        self.fields.get(k)
    }

    pub fn fields(&self) -> &[ValueField] {
        &self.fields
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.fields[0].grid()
    }

    /// `J_k` evaluated at `projection(x)`.
    pub fn value<P: StateProjection>(&self, k: usize, x: &[f64], projection: &P) -> Result<f64, SolveError> {
        let field = self.get(k).ok_or(SolveError::StepOutOfRange {
            step: k,
            horizon: self.horizon(),
        })?;
        Ok(field.interpolate(&projection.project(x))?)
    }
}

/// Minimizing control index per step `k < N` and node. Ties go to the
/// lowest control-set index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyTable {
    controls: usize,
    steps: Vec<Vec<u32>>,
}

impl PolicyTable {
    pub fn new(controls: usize, steps: Vec<Vec<u32>>) -> Self {
        PolicyTable { controls, steps }
    }

    pub fn control_count(&self) -> usize {
        self.controls
    }

    /// Number of decision steps (`N`).
    pub fn steps(&self) -> usize {
        self.steps.len()
    }

    pub fn step(&self, k: usize) -> &[u32] {
        &self.steps[k]
    }

    pub fn get(&self, k: usize, node: usize) -> usize {
        self.steps[k][node] as usize
    }
}

#[derive(Debug, Clone)]
pub struct DpSolution {
    pub values: ValueSequence,
    pub policy: PolicyTable,
    /// Wall time of each backward step, indexed by `k` (`N` is the base case).
    pub step_seconds: Vec<f64>,
    pub membership_threshold: f64,
}

impl DpSolution {
    /// Total wall time of the recursion.
    pub fn seconds(&self) -> f64 {
        self.step_seconds.iter().sum()
    }

    /// Node-level membership mask of `{J_k < threshold}`.
    pub fn member_nodes(&self, k: usize) -> Vec<bool> {
        self.values.fields[k]
            .values()
            .iter()
            .map(|&v| v < self.membership_threshold)
            .collect()
    }
}

/// Whether `x` lies in the effective target set at step `k`, evaluating
/// `J_k` directly at `x`.
pub fn membership(values: &ValueSequence, k: usize, x: &[f64], threshold: f64) -> Result<bool, SolveError> {
    Ok(values.value(k, x, &Identity)? < threshold)
}

/// Whether `x` lies in the effective target set at step `k`, evaluating the
/// reduced value `J̄_k` at `ρ(x)`.
pub fn membership_lifted<F: MovingFrame>(
    values: &ValueSequence,
    k: usize,
    x: &[f64],
    frame: &F,
    threshold: f64,
) -> Result<bool, SolveError> {
    Ok(values.value(k, x, &Invariants(frame))? < threshold)
}

/// Minimax recursion on the full state space.
pub fn full_dp<S, T>(system: &S, tube: &T, config: &SolveConfig) -> Result<DpSolution, SolveError>
where
    S: SystemModel,
    T: TargetTube,
{
    check_common(system, tube, config)?;
    if config.grid.dim() != system.state_dim() {
        return Err(SolveError::DimensionMismatch {
            what: "grid",
            expected: system.state_dim(),
            got: config.grid.dim(),
        });
    }
    let copy = |a: &[f64], b: &mut [f64]| b.copy_from_slice(a);
    run_in_pool(config, || sweep(system, tube, config, copy, copy))
}

/// Minimax recursion on the reduced coordinates of `frame`.
///
/// The caller is responsible for the problem actually being invariant
/// under the frame's group; see [`crate::symmetry::verify_invariance`].
pub fn reduced_dp<S, F, T>(system: &S, frame: &F, tube: &T, config: &SolveConfig) -> Result<DpSolution, SolveError>
where
    S: SystemModel,
    F: MovingFrame,
    T: TargetTube,
{
    check_common(system, tube, config)?;
    if frame.state_dim() != system.state_dim() {
        return Err(SolveError::DimensionMismatch {
            what: "frame state",
            expected: system.state_dim(),
            got: frame.state_dim(),
        });
    }
    if config.grid.dim() != frame.reduced_dim() {
        return Err(SolveError::DimensionMismatch {
            what: "grid",
            expected: frame.reduced_dim(),
            got: config.grid.dim(),
        });
    }
    run_in_pool(config, || {
        sweep(
            system,
            tube,
            config,
            |r, x| frame.rho_bar_inv(r, x),
            |x, r| frame.rho(x, r),
        )
    })
}

fn check_common<S: SystemModel, T: TargetTube>(system: &S, tube: &T, config: &SolveConfig) -> Result<(), SolveError> {
    if tube.horizon() != config.horizon {
        return Err(SolveError::HorizonMismatch {
            tube: tube.horizon(),
            config: config.horizon,
        });
    }
    let t = config.membership_threshold;
    if !(t > 0.0 && t < 1.0) {
        return Err(SolveError::InvalidThreshold(t));
    }
    if system.periods().len() != system.state_dim() {
        return Err(SolveError::DimensionMismatch {
            what: "system periods",
            expected: system.state_dim(),
            got: system.periods().len(),
        });
    }
    Ok(())
}

fn run_in_pool<R: Send>(
    config: &SolveConfig,
    job: impl FnOnce() -> Result<R, SolveError> + Send,
) -> Result<R, SolveError> {
    match config.workers {
        None => job(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SolveError::WorkerPool(e.to_string()))?;
            pool.install(job)
        }
    }
}

/// Backward sweep shared by both recursions. `lift` maps grid coordinates
/// to a full state; `project` maps a full state to grid coordinates.
fn sweep<S, T, L, P>(system: &S, tube: &T, config: &SolveConfig, lift: L, project: P) -> Result<DpSolution, SolveError>
where
    S: SystemModel,
    T: TargetTube,
    L: Fn(&[f64], &mut [f64]) + Sync,
    P: Fn(&[f64], &mut [f64]) + Sync,
{
    let grid = config.grid.clone();
    let n_nodes = grid.len();
    let horizon = config.horizon;
    let started = Instant::now();
    let deadline = config.time_budget.map(|b| started + b);
    let expired = AtomicBool::new(false);

    let mut step_seconds = vec![0.0; horizon + 1];
    let mut fields: Vec<Option<ValueField>> = vec![None; horizon + 1];
    let mut policy_steps: Vec<Vec<u32>> = vec![Vec::new(); horizon];

    // terminal cost sampled at nodes
    let t0 = Instant::now();
    let mut terminal = vec![0.0; n_nodes];
    terminal.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
        let mut p = vec![0.0; grid.dim()];
        let mut x = vec![0.0; system.state_dim()];
        for (i, v) in out.iter_mut().enumerate() {
            grid.flat_node_point(c * CHUNK + i, &mut p);
            lift(&p, &mut x);
            *v = f64::from(tube.cost_at(horizon, &x));
        }
    });
    fields[horizon] = Some(ValueField::new(grid.clone(), terminal, config.boundary)?);
    step_seconds[horizon] = t0.elapsed().as_secs_f64();

    let controls = system.controls();
    let disturbances = system.disturbances();

    for k in (0..horizon).rev() {
        let t0 = Instant::now();
        let next = fields[k + 1].as_ref().expect("field k+1 computed");
        let mut values = vec![0.0; n_nodes];
        let mut choice = vec![0u32; n_nodes];

        values
            .par_chunks_mut(CHUNK)
            .zip(choice.par_chunks_mut(CHUNK))
            .enumerate()
            .try_for_each(|(c, (vals, picks))| -> Result<(), SolveError> {
                if let Some(d) = deadline {
                    if expired.load(Ordering::Relaxed) || Instant::now() > d {
                        expired.store(true, Ordering::Relaxed);
                        return Err(SolveError::Timeout { step: k });
                    }
                }
                let mut p = vec![0.0; grid.dim()];
                let mut q = vec![0.0; grid.dim()];
                let mut x = vec![0.0; system.state_dim()];
                let mut nx = vec![0.0; system.state_dim()];
                for (i, (v, pick)) in vals.iter_mut().zip(picks.iter_mut()).enumerate() {
                    let node = c * CHUNK + i;
                    grid.flat_node_point(node, &mut p);
                    lift(&p, &mut x);
                    let stage = f64::from(tube.cost_at(k, &x));

                    let mut best = f64::INFINITY;
                    let mut best_u = 0;
                    for (ui, u) in controls.iter().enumerate() {
                        let mut worst = f64::NEG_INFINITY;
                        for w in disturbances.iter() {
                            system.step(&x, u, w, &mut nx);
                            project(&nx, &mut q);
                            let j = next
                                .interpolate(&q)
                                .map_err(|_| SolveError::NonFinite { step: k, node })?;
                            if !j.is_finite() {
                                return Err(SolveError::NonFinite { step: k, node });
                            }
                            worst = worst.max(j);
                            // this control can no longer beat the incumbent
                            if worst >= best {
                                break;
                            }
                        }
                        if worst < best {
                            best = worst;
                            best_u = ui;
                        }
                    }

                    let total = stage + best;
                    *v = if config.saturating { total.min(1.0) } else { total };
                    *pick = best_u as u32;
                }
                Ok(())
            })?;

        fields[k] = Some(ValueField::new(grid.clone(), values, config.boundary)?);
        policy_steps[k] = choice;
        step_seconds[k] = t0.elapsed().as_secs_f64();
    }

    let values = ValueSequence::new(fields.into_iter().map(|f| f.expect("all steps computed")).collect())?;
    Ok(DpSolution {
        values,
        policy: PolicyTable::new(controls.len(), policy_steps),
        step_seconds,
        membership_threshold: config.membership_threshold,
    })
}
