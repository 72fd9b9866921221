//! Policies read from a solved table, adversaries, and closed-loop rollouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PolicyTable, ValueSequence};
use crate::grid::Grid;
use crate::symmetry::MovingFrame;
use crate::system::SystemModel;
use crate::tube::TargetTube;

/// Maps a full state into the coordinates a value table is gridded in.
pub trait StateProjection: Sync {
    fn project(&self, state: &[f64]) -> Vec<f64>;
}

/// Full-space tables: the state is already in grid coordinates.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl StateProjection for Identity {
    fn project(&self, state: &[f64]) -> Vec<f64> {
        state.to_vec()
    }
}

/// Reduced tables: grid coordinates are the invariants `ρ(x)`.
#[derive(Debug, Clone, Copy)]
pub struct Invariants<'a, F>(pub &'a F);

impl<F: MovingFrame> StateProjection for Invariants<'_, F> {
    fn project(&self, state: &[f64]) -> Vec<f64> {
        self.0.rho_vec(state)
    }
}

/// State feedback `μ_k(x)`, returning an index into the control set.
pub trait Policy {
    fn control(&self, k: usize, state: &[f64]) -> usize;
}

/// Looks up the table entry at the grid node nearest to the projected
/// state (per axis, periodic axes wrap). Steps past the table reuse its
/// last entry.
pub struct TablePolicy<'a, P> {
    table: &'a PolicyTable,
    grid: &'a Grid,
    projection: P,
}

impl<'a, P: StateProjection> TablePolicy<'a, P> {
    pub fn new(table: &'a PolicyTable, grid: &'a Grid, projection: P) -> Self {
        TablePolicy {
            table,
            grid,
            projection,
        }
    }
}

impl<P: StateProjection> Policy for TablePolicy<'_, P> {
    fn control(&self, k: usize, state: &[f64]) -> usize {
        let point = self.projection.project(state);
        let index = self
            .grid
            .nearest_node(&point)
            .expect("projected state matches grid dimension");
        let node = self.grid.ravel(&index).expect("nearest node is in range");
        let k = k.min(self.table.steps().saturating_sub(1));
        self.table.get(k, node)
    }
}

/// `μ_k = μ̄_k ∘ ρ`: a reduced policy table acting on full states.
pub fn lift_policy<'a, F: MovingFrame>(
    table: &'a PolicyTable,
    grid: &'a Grid,
    frame: &'a F,
) -> TablePolicy<'a, Invariants<'a, F>> {
    TablePolicy::new(table, grid, Invariants(frame))
}

/// Disturbance strategy. It sees the control already chosen at this step.
pub trait Adversary {
    fn disturbance(&mut self, k: usize, state: &[f64], control: usize) -> usize;
}

#[derive(Debug, Clone, Copy)]
pub struct FixedAdversary(pub usize);

impl Adversary for FixedAdversary {
    fn disturbance(&mut self, _k: usize, _state: &[f64], _control: usize) -> usize {
        self.0
    }
}

pub struct RandomAdversary {
    rng: ChaCha8Rng,
    count: usize,
}

impl RandomAdversary {
    pub fn new(seed: u64, count: usize) -> Self {
        RandomAdversary {
            rng: ChaCha8Rng::seed_from_u64(seed),
            count,
        }
    }
}

impl Adversary for RandomAdversary {
    fn disturbance(&mut self, _k: usize, _state: &[f64], _control: usize) -> usize {
        self.rng.gen_range(0..self.count)
    }
}

/// Picks the disturbance maximizing the interpolated next-step value
/// `J_{k+1}` (lowest index on ties).
pub struct GreedyAdversary<'a, S, P> {
    system: &'a S,
    values: &'a ValueSequence,
    projection: P,
}

impl<'a, S: SystemModel, P: StateProjection> GreedyAdversary<'a, S, P> {
    pub fn new(system: &'a S, values: &'a ValueSequence, projection: P) -> Self {
        GreedyAdversary {
            system,
            values,
            projection,
        }
    }
}

impl<S: SystemModel, P: StateProjection> Adversary for GreedyAdversary<'_, S, P> {
    fn disturbance(&mut self, k: usize, state: &[f64], control: usize) -> usize {
        let u = &self.system.controls()[control];
        let next_k = (k + 1).min(self.values.horizon());
        let mut best = (0, f64::NEG_INFINITY);
        for (wi, w) in self.system.disturbances().iter().enumerate() {
            let next = self.system.step_vec(state, u, w);
            let v = self
                .values
                .value(next_k, &next, &self.projection)
                .unwrap_or(f64::INFINITY);
            if v > best.1 {
                best = (wi, v);
            }
        }
        best.0
    }
}

/// A closed-loop trajectory with the stage cost at every visited state.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// `steps + 1` states.
    pub states: Vec<Vec<f64>>,
    pub controls: Vec<usize>,
    pub disturbances: Vec<usize>,
    /// `g_k(x_k)` for every visited state.
    pub costs: Vec<u8>,
}

impl Trajectory {
    pub fn violations(&self) -> usize {
        self.costs.iter().filter(|&&c| c != 0).count()
    }
}

/// Simulates `steps` steps of the game from `x0`.
pub fn rollout<S, T, P, A>(system: &S, tube: &T, policy: &P, adversary: &mut A, x0: &[f64], steps: usize) -> Trajectory
where
    S: SystemModel,
    T: TargetTube,
    P: Policy + ?Sized,
    A: Adversary + ?Sized,
{
    let mut states = vec![x0.to_vec()];
    let mut controls = Vec::with_capacity(steps);
    let mut disturbances = Vec::with_capacity(steps);
    let mut costs = vec![tube.cost_at(0, x0)];
    for k in 0..steps {
        let x = states.last().expect("non-empty");
        let u = policy.control(k, x);
        let w = adversary.disturbance(k, x, u);
        let next = system.step_vec(x, &system.controls()[u], &system.disturbances()[w]);
        costs.push(tube.cost_at(k + 1, &next));
        controls.push(u);
        disturbances.push(w);
        states.push(next);
    }
    Trajectory {
        states,
        controls,
        disturbances,
        costs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::AxisSpec;
    use crate::system::InputSet;
    use crate::tube::FnTube;

    struct Still {
        inputs: InputSet,
    }

    impl SystemModel for Still {
        fn state_dim(&self) -> usize {
            2
        }
        fn controls(&self) -> &InputSet {
            &self.inputs
        }
        fn disturbances(&self) -> &InputSet {
            &self.inputs
        }
        fn periods(&self) -> &[Option<f64>] {
            &[None, None]
        }
        fn step(&self, s: &[f64], _: &[f64], _: &[f64], n: &mut [f64]) {
            n.copy_from_slice(s);
        }
    }

    #[test]
    fn identity_system_gives_constant_trajectory() {
        let sys = Still {
            inputs: InputSet::new(vec![vec![0.0], vec![1.0]]).unwrap(),
        };
        let grid = Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 2); 2]).unwrap();
        let table = PolicyTable::new(2, vec![vec![1; 4]; 3]);
        let policy = TablePolicy::new(&table, &grid, Identity);
        let tube = FnTube::new(3, true, |_, x: &[f64]| x[0] < 0.5);
        let mut adv = RandomAdversary::new(7, 2);
        let traj = rollout(&sys, &tube, &policy, &mut adv, &[0.2, 0.9], 3);
        assert_eq!(traj.states, vec![vec![0.2, 0.9]; 4]);
        assert_eq!(traj.controls, vec![1, 1, 1]);
        assert_eq!(traj.costs, vec![0; 4]);
        let traj = rollout(&sys, &tube, &policy, &mut FixedAdversary(0), &[0.7, 0.0], 2);
        assert_eq!(traj.violations(), 3);
        assert_eq!(traj.disturbances, vec![0, 0]);
    }

    #[test]
    fn table_policy_uses_nearest_node() {
        let grid = Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 3)]).unwrap();
        let table = PolicyTable::new(3, vec![vec![0, 1, 2]]);
        let policy = TablePolicy::new(&table, &grid, Identity);
        assert_eq!(policy.control(0, &[0.1]), 0);
        assert_eq!(policy.control(0, &[0.4]), 1);
        assert_eq!(policy.control(0, &[7.0]), 2);
        // past the horizon, the last step is reused
        assert_eq!(policy.control(5, &[0.6]), 1);
    }
}
