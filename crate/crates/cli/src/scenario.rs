//! Concrete systems and tubes built from a [`ScenarioConfig`].

use anyhow::Result;
use symreach::system::{GridWorld, InputSet, SystemModel, TwoVehicleDubins};
use symreach::tube::{detection_cost, DetectionParams, DetectionTube, RingTube, TargetTube};

use crate::config::{ScenarioConfig, SystemKind, TubeKind};

/// Two-vehicle Dubins game with an optional constant world-frame drift on
/// both vehicles. Any nonzero drift breaks the rotational symmetry.
#[derive(Debug, Clone)]
pub struct WindyDubins {
    inner: TwoVehicleDubins,
    wind: [f64; 2],
}

impl WindyDubins {
    pub fn new(inner: TwoVehicleDubins, wind: [f64; 2]) -> Self {
        WindyDubins { inner, wind }
    }
}

impl SystemModel for WindyDubins {
    fn state_dim(&self) -> usize {
        6
    }

    fn controls(&self) -> &InputSet {
        self.inner.controls()
    }

    fn disturbances(&self) -> &InputSet {
        self.inner.disturbances()
    }

    fn periods(&self) -> &[Option<f64>] {
        self.inner.periods()
    }

    #[inline]
    fn step(&self, state: &[f64], control: &[f64], disturbance: &[f64], next: &mut [f64]) {
        self.inner.step(state, control, disturbance, next);
        if self.wind != [0.0, 0.0] {
            for base in [0, 3] {
                next[base] += self.wind[0];
                next[base + 1] += self.wind[1];
            }
        }
    }
}

pub enum AnySystem {
    Dubins(WindyDubins),
    Grid(GridWorld),
}

impl SystemModel for AnySystem {
    fn state_dim(&self) -> usize {
        match self {
            AnySystem::Dubins(s) => s.state_dim(),
            AnySystem::Grid(s) => s.state_dim(),
        }
    }

    fn controls(&self) -> &InputSet {
        match self {
            AnySystem::Dubins(s) => s.controls(),
            AnySystem::Grid(s) => s.controls(),
        }
    }

    fn disturbances(&self) -> &InputSet {
        match self {
            AnySystem::Dubins(s) => s.disturbances(),
            AnySystem::Grid(s) => s.disturbances(),
        }
    }

    fn periods(&self) -> &[Option<f64>] {
        match self {
            AnySystem::Dubins(s) => s.periods(),
            AnySystem::Grid(s) => s.periods(),
        }
    }

    #[inline]
    fn step(&self, state: &[f64], control: &[f64], disturbance: &[f64], next: &mut [f64]) {
        match self {
            AnySystem::Dubins(s) => s.step(state, control, disturbance, next),
            AnySystem::Grid(s) => s.step(state, control, disturbance, next),
        }
    }
}

/// Detection cone of a fixed camera at the world origin facing `+z`,
/// applied to vehicle 2.
#[derive(Debug, Clone)]
pub struct AnchoredTube {
    params: DetectionParams,
    horizon: usize,
}

impl TargetTube for AnchoredTube {
    fn horizon(&self) -> usize {
        self.horizon
    }

    fn cost_at(&self, _k: usize, state: &[f64]) -> u8 {
        detection_cost(&[0.0, 0.0, 0.0, state[3], state[4], state[5]], &self.params)
    }

    fn is_time_invariant(&self) -> bool {
        true
    }
}

pub enum AnyTube {
    Detection(DetectionTube),
    Anchored(AnchoredTube),
    Ring(RingTube),
}

impl TargetTube for AnyTube {
    fn horizon(&self) -> usize {
        match self {
            AnyTube::Detection(t) => t.horizon(),
            AnyTube::Anchored(t) => t.horizon(),
            AnyTube::Ring(t) => t.horizon(),
        }
    }

    #[inline]
    fn cost_at(&self, k: usize, state: &[f64]) -> u8 {
        match self {
            AnyTube::Detection(t) => t.cost_at(k, state),
            AnyTube::Anchored(t) => t.cost_at(k, state),
            AnyTube::Ring(t) => t.cost_at(k, state),
        }
    }

    fn is_time_invariant(&self) -> bool {
        match self {
            AnyTube::Detection(t) => t.is_time_invariant(),
            AnyTube::Anchored(t) => t.is_time_invariant(),
            AnyTube::Ring(t) => t.is_time_invariant(),
        }
    }
}

pub struct Scenario {
    pub system: AnySystem,
    pub tube: AnyTube,
}

impl Scenario {
    pub fn build(config: &ScenarioConfig) -> Result<Self> {
        let horizon = config.horizon();
        let system = match config.system.kind {
            SystemKind::Dubins => AnySystem::Dubins(WindyDubins::new(
                TwoVehicleDubins::new(config.system.dubins_params())?,
                config.system.wind,
            )),
            SystemKind::Gridworld => AnySystem::Grid(GridWorld::new(config.system.m)?),
        };
        let tube = match config.tube_kind() {
            TubeKind::Detection => AnyTube::Detection(
                DetectionTube::new(config.tube.detection_params(), horizon)?.terminal_only(config.tube.terminal_only),
            ),
            TubeKind::Anchored => {
                let params = config.tube.detection_params();
                params.validate()?;
                AnyTube::Anchored(AnchoredTube { params, horizon })
            }
            TubeKind::Ring => AnyTube::Ring(RingTube::new(config.system.m, config.bands()?)?),
        };
        Ok(Scenario { system, tube })
    }
}
