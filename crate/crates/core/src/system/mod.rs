//! Discrete-time systems `x[k+1] = f(x[k], u[k], w[k])` with finite control
//! and disturbance sets.

mod dubins;
mod gridworld;

pub use dubins::{dubins_step, two_vehicle_step, DubinsParams, DubinsVehicle, TwoVehicleDubins};
pub use gridworld::{gridworld_step, GridWorld, Heading, Move};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SystemError {
    #[error("input set must contain at least one element")]
    EmptyInputSet,
    #[error("input set element {index} has dimension {got}, expected {expected}")]
    MixedDimensions { index: usize, expected: usize, got: usize },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("unknown move symbol {0:?}")]
    UnknownMove(String),
}

/// A finite, ordered set of input vectors. Order matters: policies store
/// indices into it and ties are broken towards the lowest index.
#[derive(Debug, Clone, PartialEq)]
pub struct InputSet {
    dim: usize,
    elements: Vec<Vec<f64>>,
}

impl InputSet {
    pub fn new(elements: Vec<Vec<f64>>) -> Result<Self, SystemError> {
        let dim = elements.first().ok_or(SystemError::EmptyInputSet)?.len();
        for (index, e) in elements.iter().enumerate() {
            if e.len() != dim {
                return Err(SystemError::MixedDimensions {
                    index,
                    expected: dim,
                    got: e.len(),
                });
            }
        }
        Ok(InputSet { dim, elements })
    }

    /// The one-element set holding the empty vector; used where a player
    /// has no input.
    pub fn none() -> Self {
        InputSet {
            dim: 0,
            elements: vec![vec![]],
        }
    }

    /// Cartesian product of per-component value lists, first component
    /// varying slowest.
    pub fn product(components: &[&[f64]]) -> Result<Self, SystemError> {
        let mut elements: Vec<Vec<f64>> = vec![vec![]];
        for values in components {
            elements = elements
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut e = prefix.clone();
                        e.push(v);
                        e
                    })
                })
                .collect();
        }
        Self::new(elements)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&[f64]> {
        self.elements.get(index).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.elements.iter().map(Vec::as_slice)
    }
}

impl std::ops::Index<usize> for InputSet {
    type Output = [f64];

    fn index(&self, index: usize) -> &[f64] {
        &self.elements[index]
    }
}

/// A deterministic discrete-time system with finite input sets.
///
/// `step` must be total and pure on its declared domains; solvers call it
/// concurrently from many workers. Periodic state components must be
/// returned in canonical form (`[0, period)`).
pub trait SystemModel: Sync {
    fn state_dim(&self) -> usize;

    /// Control set `U`; the minimizing player.
    fn controls(&self) -> &InputSet;

    /// Disturbance set `W`; the maximizing player.
    fn disturbances(&self) -> &InputSet;

    /// Period of each state component, `None` for unbounded ones. Angles
    /// use `2π`.
    fn periods(&self) -> &[Option<f64>];

    fn step(&self, state: &[f64], control: &[f64], disturbance: &[f64], next: &mut [f64]);

    fn step_vec(&self, state: &[f64], control: &[f64], disturbance: &[f64]) -> Vec<f64> {
        let mut next = vec![0.0; self.state_dim()];
        self.step(state, control, disturbance, &mut next);
        next
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_order_first_component_slowest() {
        let set = InputSet::product(&[&[0.0, 0.05], &[-1.0, 0.0, 1.0]]).unwrap();
        assert_eq!(set.len(), 6);
        assert_eq!(&set[0], &[0.0, -1.0]);
        assert_eq!(&set[1], &[0.0, 0.0]);
        assert_eq!(&set[5], &[0.05, 1.0]);
    }

    #[test]
    fn input_set_validation() {
        assert_eq!(InputSet::new(vec![]), Err(SystemError::EmptyInputSet));
        assert!(matches!(
            InputSet::new(vec![vec![1.0], vec![1.0, 2.0]]),
            Err(SystemError::MixedDimensions { index: 1, .. })
        ));
        assert_eq!(InputSet::none().len(), 1);
        assert_eq!(InputSet::none().dim(), 0);
    }
}
