//! Target tubes `X_0, …, X_N` encoded as binary stage costs: `g_k(x) = 0`
//! exactly when `x ∈ X_k`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TubeError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("ring tube needs at least one band")]
    NoBands,
    #[error("ring tube needs an odd board size, got {0}")]
    EvenBoard(usize),
}

pub trait TargetTube: Sync {
    /// Final step `N`; costs are defined for `k` in `0..=N`.
    fn horizon(&self) -> usize;

    /// `g_k(x)`: 0 inside `X_k`, 1 outside.
    fn cost_at(&self, k: usize, state: &[f64]) -> u8;

    fn is_time_invariant(&self) -> bool;
}

/// Camera model of vehicle 1: a forward cone of half-angle `half_angle`
/// and radius `range`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub range: f64,
    /// Radians, in `(0, π)`.
    pub half_angle: f64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            range: 0.5,
            half_angle: 15f64.to_radians(),
        }
    }
}

impl DetectionParams {
    pub fn validate(&self) -> Result<(), TubeError> {
        if !(self.range.is_finite() && self.range > 0.0) {
            return Err(TubeError::InvalidParameter {
                name: "range",
                value: self.range,
                reason: "must be finite and strictly positive",
            });
        }
        if !(self.half_angle > 0.0 && self.half_angle < std::f64::consts::PI) {
            return Err(TubeError::InvalidParameter {
                name: "half_angle",
                value: self.half_angle,
                reason: "must lie in (0, π)",
            });
        }
        Ok(())
    }
}

/// 1 when vehicle 2 is inside vehicle 1's detection cone.
///
/// Coincident vehicles count as detected. Both boundaries are inclusive.
#[inline]
pub fn detection_cost(x: &[f64], params: &DetectionParams) -> u8 {
    let (dz, dy) = (x[3] - x[0], x[4] - x[1]);
    let dist2 = dz * dz + dy * dy;
    if dist2 > params.range * params.range {
        return 0;
    }
    if dist2 == 0.0 {
        return 1;
    }
    let (s, c) = x[2].sin_cos();
    let cosine = (dz * c + dy * s) / dist2.sqrt();
    u8::from(cosine >= params.half_angle.cos())
}

/// The detection region as a tube. By default every step is constrained;
/// with `terminal_only` only `k = N` is.
#[derive(Debug, Clone)]
pub struct DetectionTube {
    params: DetectionParams,
    horizon: usize,
    terminal_only: bool,
}

impl DetectionTube {
    pub fn new(params: DetectionParams, horizon: usize) -> Result<Self, TubeError> {
        params.validate()?;
        Ok(DetectionTube {
            params,
            horizon,
            terminal_only: false,
        })
    }

    pub fn terminal_only(mut self, terminal_only: bool) -> Self {
        self.terminal_only = terminal_only;
        self
    }

    pub fn params(&self) -> &DetectionParams {
        &self.params
    }
}

impl TargetTube for DetectionTube {
    fn horizon(&self) -> usize {
        self.horizon
    }

    #[inline]
    fn cost_at(&self, k: usize, state: &[f64]) -> u8 {
        if self.terminal_only && k < self.horizon {
            0
        } else {
            detection_cost(state, &self.params)
        }
    }

    fn is_time_invariant(&self) -> bool {
        !self.terminal_only
    }
}

/// Gridworld tube: at step `k` the walker must sit at a Chebyshev distance
/// from the board centre within `bands[k] = (lo, hi)`.
#[derive(Debug, Clone)]
pub struct RingTube {
    m: usize,
    bands: Vec<(usize, usize)>,
}

impl RingTube {
    pub fn new(m: usize, bands: Vec<(usize, usize)>) -> Result<Self, TubeError> {
        if bands.is_empty() {
            return Err(TubeError::NoBands);
        }
        if m.is_multiple_of(2) {
            return Err(TubeError::EvenBoard(m));
        }
        Ok(RingTube { m, bands })
    }

    /// Horizon-3 tube on a 7×7 board: leave the centre, then settle onto
    /// the ring at distance 2.
    pub fn default_for_seven() -> Self {
        RingTube::new(7, vec![(0, 3), (1, 3), (1, 2), (2, 2)]).expect("valid bands")
    }

    pub fn distance(&self, i: usize, j: usize) -> usize {
        let c = (self.m - 1) / 2;
        i.abs_diff(c).max(j.abs_diff(c))
    }
}

impl TargetTube for RingTube {
    fn horizon(&self) -> usize {
        self.bands.len() - 1
    }

    fn cost_at(&self, k: usize, state: &[f64]) -> u8 {
        let m = self.m as f64;
        let cell = |x: f64| crate::angle::wrap(x.round(), m) as usize;
        let d = self.distance(cell(state[0]), cell(state[1]));
        let (lo, hi) = self.bands[k.min(self.bands.len() - 1)];
        u8::from(!(lo..=hi).contains(&d))
    }

    fn is_time_invariant(&self) -> bool {
        self.bands.windows(2).all(|w| w[0] == w[1])
    }
}

/// Tube defined by a closure `(k, x) -> bool` giving membership in `X_k`.
pub struct FnTube<F> {
    horizon: usize,
    time_invariant: bool,
    inside: F,
}

impl<F: Fn(usize, &[f64]) -> bool + Sync> FnTube<F> {
    pub fn new(horizon: usize, time_invariant: bool, inside: F) -> Self {
        FnTube {
            horizon,
            time_invariant,
            inside,
        }
    }
}

impl<F: Fn(usize, &[f64]) -> bool + Sync> TargetTube for FnTube<F> {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn cost_at(&self, k: usize, state: &[f64]) -> u8 {
        u8::from(!(self.inside)(k, state))
    }

    fn is_time_invariant(&self) -> bool {
        self.time_invariant
    }
}
