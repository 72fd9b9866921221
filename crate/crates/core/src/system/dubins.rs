use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{InputSet, SystemError, SystemModel};
use crate::angle::wrap_angle;

/// Parameters of a discrete-time Dubins vehicle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DubinsParams {
    /// Turning-radius parameter `L`.
    pub length: f64,
    pub v_max: f64,
    /// Steering bound in radians.
    pub s_max: f64,
}

impl Default for DubinsParams {
    fn default() -> Self {
        DubinsParams {
            length: 1.0,
            v_max: 0.05,
            s_max: 1.0,
        }
    }
}

impl DubinsParams {
    pub fn validate(&self) -> Result<(), SystemError> {
        for (name, value) in [("length", self.length), ("v_max", self.v_max), ("s_max", self.s_max)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(SystemError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite and strictly positive",
                });
            }
        }
        Ok(())
    }

    /// `{0, v_max} × {-s_max, 0, s_max}`, speed varying slowest.
    pub fn input_set(&self) -> InputSet {
        InputSet::product(&[&[0.0, self.v_max], &[-self.s_max, 0.0, self.s_max]]).expect("non-empty product")
    }
}

/// One step of a single Dubins vehicle with speed `v` and steering `s`.
/// The heading is returned wrapped to `[0, 2π)`.
#[inline]
pub fn dubins_step(state: [f64; 3], v: f64, s: f64, params: &DubinsParams) -> [f64; 3] {
    let [z, y, theta] = state;
    [
        z + v * theta.cos(),
        y + v * theta.sin(),
        wrap_angle(theta + v * s.sin() / params.length),
    ]
}

/// Joint step of the two-vehicle game. Components 0..3 are vehicle 1 (the
/// pursuer, driven by the disturbance `w = (v, s)`), components 3..6 are
/// vehicle 2 (the evader, driven by the control `u = (ṽ, s̃)`).
pub fn two_vehicle_step(x: &[f64; 6], u: [f64; 2], w: [f64; 2], params: &DubinsParams) -> [f64; 6] {
    let a = dubins_step([x[0], x[1], x[2]], w[0], w[1], params);
    let b = dubins_step([x[3], x[4], x[5]], u[0], u[1], params);
    [a[0], a[1], a[2], b[0], b[1], b[2]]
}

/// A single vehicle controlled by `(v, s)`, with no disturbance.
#[derive(Debug, Clone)]
pub struct DubinsVehicle {
    params: DubinsParams,
    controls: InputSet,
    disturbances: InputSet,
}

const SINGLE_PERIODS: [Option<f64>; 3] = [None, None, Some(TAU)];
const PAIR_PERIODS: [Option<f64>; 6] = [None, None, Some(TAU), None, None, Some(TAU)];

impl DubinsVehicle {
    pub fn new(params: DubinsParams) -> Result<Self, SystemError> {
        params.validate()?;
        Ok(DubinsVehicle {
            params,
            controls: params.input_set(),
            disturbances: InputSet::none(),
        })
    }
}

impl SystemModel for DubinsVehicle {
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
        &SINGLE_PERIODS
    }

    fn step(&self, state: &[f64], control: &[f64], _disturbance: &[f64], next: &mut [f64]) {
        let out = dubins_step([state[0], state[1], state[2]], control[0], control[1], &self.params);
        next.copy_from_slice(&out);
    }
}

/// The six-dimensional pursuit-evasion game of two Dubins vehicles.
#[derive(Debug, Clone)]
pub struct TwoVehicleDubins {
    params: DubinsParams,
    controls: InputSet,
    disturbances: InputSet,
}

impl TwoVehicleDubins {
    /// Both players use `{0, v_max} × {-s_max, 0, s_max}`.
    pub fn new(params: DubinsParams) -> Result<Self, SystemError> {
        params.validate()?;
        Ok(TwoVehicleDubins {
            params,
            controls: params.input_set(),
            disturbances: params.input_set(),
        })
    }

    pub fn with_sets(params: DubinsParams, controls: InputSet, disturbances: InputSet) -> Result<Self, SystemError> {
        params.validate()?;
        for set in [&controls, &disturbances] {
            if set.dim() != 2 {
                return Err(SystemError::MixedDimensions {
                    index: 0,
                    expected: 2,
                    got: set.dim(),
                });
            }
        }
        Ok(TwoVehicleDubins {
            params,
            controls,
            disturbances,
        })
    }

    pub fn params(&self) -> &DubinsParams {
        &self.params
    }
}

impl SystemModel for TwoVehicleDubins {
    fn state_dim(&self) -> usize {
        6
    }

    fn controls(&self) -> &InputSet {
        &self.controls
    }

    fn disturbances(&self) -> &InputSet {
        &self.disturbances
    }

    fn periods(&self) -> &[Option<f64>] {
        &PAIR_PERIODS
    }

    #[inline]
    fn step(&self, state: &[f64], control: &[f64], disturbance: &[f64], next: &mut [f64]) {
        let x: &[f64; 6] = state.try_into().expect("two-vehicle state has 6 components");
        let out = two_vehicle_step(
            x,
            [control[0], control[1]],
            [disturbance[0], disturbance[1]],
            &self.params,
        );
        next.copy_from_slice(&out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    const P: DubinsParams = DubinsParams {
        length: 1.0,
        v_max: 0.05,
        s_max: 1.0,
    };

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn dubins_step_examples() {
        assert_eq!(dubins_step([0.0, 0.0, 0.0], 1.0, 0.0, &P), [1.0, 0.0, 0.0]);
        assert!(close(
            &dubins_step([0.0, 0.0, FRAC_PI_2], 0.05, 0.0, &P),
            &[0.0, 0.05, FRAC_PI_2]
        ));
        let s = dubins_step([0.0, 0.0, 0.0], 0.05, 1.0, &P);
        assert!(close(&s, &[0.05, 0.0, 0.05 * 1f64.sin()]));
        assert!((s[2] - 0.042_073_549_240_394_83).abs() < 1e-15);
    }

    #[test]
    fn two_vehicle_step_examples() {
        let zero = [0.0; 6];
        assert_eq!(two_vehicle_step(&zero, [0.0, 0.0], [0.0, 0.0], &P), zero);
        assert!(close(
            &two_vehicle_step(&zero, [0.05, 0.0], [0.05, 0.0], &P),
            &[0.05, 0.0, 0.0, 0.05, 0.0, 0.0]
        ));
        assert!(close(
            &two_vehicle_step(&[0.0, 0.0, 0.0, 1.0, 1.0, FRAC_PI_2], [0.05, 0.0], [0.0, 0.0], &P),
            &[0.0, 0.0, 0.0, 1.0, 1.05, FRAC_PI_2]
        ));
    }

    #[test]
    fn invalid_params_rejected() {
        let bad = DubinsParams { length: 0.0, ..P };
        assert!(matches!(
            TwoVehicleDubins::new(bad),
            Err(SystemError::InvalidParameter { name: "length", .. })
        ));
        assert!(DubinsVehicle::new(DubinsParams { v_max: f64::NAN, ..P }).is_err());
    }

    proptest! {
        #[test]
        fn zero_speed_is_identity(z in -5.0..5.0f64, y in -5.0..5.0f64, t in 0.0..TAU, s in -3.0..3.0f64) {
            prop_assert_eq!(dubins_step([z, y, t], 0.0, s, &P), [z, y, t]);
        }

        #[test]
        fn displacement_equals_speed(z in -5.0..5.0f64, y in -5.0..5.0f64, t in -10.0..10.0f64,
                                     v in -1.0..1.0f64, s in -3.0..3.0f64) {
            let n = dubins_step([z, y, t], v, s, &P);
            prop_assert!(((n[0] - z).hypot(n[1] - y) - v.abs()).abs() < 1e-12);
            prop_assert!((0.0..TAU).contains(&n[2]));
        }

        #[test]
        fn vehicles_are_decoupled(x in prop::array::uniform6(-3.0..3.0f64), other in prop::array::uniform3(-3.0..3.0f64),
                                  u in 0usize..6, w in 0usize..6) {
            let set = P.input_set();
            let (u, w) = ([set[u][0], set[u][1]], [set[w][0], set[w][1]]);
            let a = two_vehicle_step(&x, u, w, &P);
            let mut y = x;
            y[3..].copy_from_slice(&other);
            let b = two_vehicle_step(&y, u, w, &P);
            prop_assert_eq!(&a[..3], &b[..3]);
            let mut y = x;
            y[..3].copy_from_slice(&other);
            let b = two_vehicle_step(&y, u, w, &P);
            prop_assert_eq!(&a[3..], &b[3..]);
        }

        #[test]
        fn total_displacement_bounded(x in prop::array::uniform3(-3.0..3.0f64), moves in prop::collection::vec(0usize..6, 10)) {
            let set = P.input_set();
            let mut s = x;
            for m in &moves {
                s = dubins_step(s, set[*m][0], set[*m][1], &P);
            }
            prop_assert!((s[0] - x[0]).hypot(s[1] - x[1]) <= 10.0 * P.v_max + 1e-12);
        }
    }
}
