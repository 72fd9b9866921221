//! Backward reachable sets for discrete-time nonlinear dynamic games.
//!
//! Effective target sets are computed by minimax dynamic programming on a
//! rectilinear grid. When the dynamics and the target tube share a
//! continuous symmetry, a moving frame maps the recursion onto the
//! lower-dimensional space of invariants and the result is lifted back.
//!
//! Module map:
//! * [`grid`] : rectilinear grids, value fields, multilinear interpolation, export.
//! * [`system`] : discrete-time models (`x' = f(x, u, w)`) with finite input sets.
//! * [`symmetry`] : transformation groups, moving frames and randomized verification.
//! * [`tube`] : target tubes as binary stage costs.
//! * [`solver`] : full and reduced minimax recursions, policies and rollouts.

pub mod angle;
pub mod grid;
pub mod solver;
pub mod symmetry;
pub mod system;
pub mod tube;

pub use grid::{AxisSpec, BoundaryPolicy, Grid, GridError, ValueField};
pub use solver::{full_dp, reduced_dp, DpSolution, PolicyTable, SolveConfig, SolveError, ValueSequence};
pub use symmetry::{MovingFrame, TransformationGroup, VerificationReport};
pub use system::{InputSet, SystemModel};
pub use tube::TargetTube;
