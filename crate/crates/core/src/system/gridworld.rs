//! A heading-aware walker on an `m × m` torus. Small enough for exhaustive
//! game-tree search, and symmetric under quarter turns about the board
//! centre, so it serves as an exact oracle for the solvers.

use std::str::FromStr;

use super::{InputSet, SystemError, SystemModel};

/// Headings in counter-clockwise order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heading {
    East = 0,
    North = 1,
    West = 2,
    South = 3,
}

impl Heading {
    pub fn from_index(h: usize) -> Self {
        match h % 4 {
            0 => Heading::East,
            1 => Heading::North,
            2 => Heading::West,
            _ => Heading::South,
        }
    }

    fn offset(self) -> (isize, isize) {
        match self {
            Heading::East => (1, 0),
            Heading::North => (0, 1),
            Heading::West => (-1, 0),
            Heading::South => (0, -1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Forward,
    TurnLeft,
    TurnRight,
}

impl Move {
    pub const ALL: [Move; 3] = [Move::Forward, Move::TurnLeft, Move::TurnRight];

    /// Numeric code used as the control vector component.
    pub fn code(self) -> f64 {
        match self {
            Move::Forward => 0.0,
            Move::TurnLeft => 1.0,
            Move::TurnRight => 2.0,
        }
    }

    pub fn from_code(code: f64) -> Option<Self> {
        Move::ALL.into_iter().find(|m| m.code() == code)
    }
}

impl FromStr for Move {
    type Err = SystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "forward" | "F" => Ok(Move::Forward),
            "turn_left" | "L" => Ok(Move::TurnLeft),
            "turn_right" | "R" => Ok(Move::TurnRight),
            other => Err(SystemError::UnknownMove(other.to_string())),
        }
    }
}

/// One step on the `m × m` torus. Heading `h` is 0..4 (east, north, west,
/// south); turns leave the position unchanged.
pub fn gridworld_step(state: (usize, usize, usize), mv: Move, m: usize) -> (usize, usize, usize) {
    let (i, j, h) = state;
    match mv {
        Move::Forward => {
            let (di, dj) = Heading::from_index(h).offset();
            let wrap = |a: usize, d: isize| (a as isize + d).rem_euclid(m as isize) as usize;
            (wrap(i, di), wrap(j, dj), h % 4)
        }
        Move::TurnLeft => (i, j, (h + 1) % 4),
        Move::TurnRight => (i, j, (h + 3) % 4),
    }
}

/// [`gridworld_step`] as a [`SystemModel`]: state `(i, j, h)` as reals,
/// control `[code]`, no disturbance.
#[derive(Debug, Clone)]
pub struct GridWorld {
    m: usize,
    controls: InputSet,
    disturbances: InputSet,
    periods: [Option<f64>; 3],
}

impl GridWorld {
    pub fn new(m: usize) -> Result<Self, SystemError> {
        if m < 2 {
            return Err(SystemError::InvalidParameter {
                name: "m",
                value: m as f64,
                reason: "board needs at least two cells per side",
            });
        }
        let controls = InputSet::new(Move::ALL.iter().map(|mv| vec![mv.code()]).collect())?;
        Ok(GridWorld {
            m,
            controls,
            disturbances: InputSet::none(),
            periods: [Some(m as f64), Some(m as f64), Some(4.0)],
        })
    }

    pub fn size(&self) -> usize {
        self.m
    }

    /// All `m·m·4` states in row-major `(i, j, h)` order.
    pub fn states(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        let m = self.m;
        (0..m).flat_map(move |i| (0..m).flat_map(move |j| (0..4).map(move |h| [i as f64, j as f64, h as f64])))
    }
}

impl SystemModel for GridWorld {
    fn state_dim(&self) -> usize {
        3
    }

    fn controls(&self) -> &InputSet {
        &self.controls
    }

    fn disturbances(&self) -> &InputSet {
        &self.disturbances
    }

    fn periods(&self) -> &[Option<f64>] {
        &self.periods
    }

    fn step(&self, state: &[f64], control: &[f64], _disturbance: &[f64], next: &mut [f64]) {
        let mv = Move::from_code(control[0]).expect("control outside the gridworld move set");
        let m = self.m as f64;
        let cell = |x: f64, period: f64| crate::angle::wrap(x.round(), period) as usize;
        let (i, j, h) = gridworld_step((cell(state[0], m), cell(state[1], m), cell(state[2], 4.0)), mv, self.m);
        next[0] = i as f64;
        next[1] = j as f64;
        next[2] = h as f64;
    }
}
