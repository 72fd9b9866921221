//! SE(2) acting on planar vehicle poses, and the moving frame that pins
//! the first vehicle at the origin facing along the first axis.
//!
//! The element `(z', y', θ')` rotates every position by `θ'`, then
//! translates by `(z', y')`, and adds `θ'` to every heading.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{CaseSampler, MovingFrame, TransformationGroup};
use crate::angle::wrap_angle;
use crate::system::InputSet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Se2 {
    pub z: f64,
    pub y: f64,
    /// Rotation angle in `[0, 2π)`.
    pub theta: f64,
}

impl Se2 {
    pub fn new(z: f64, y: f64, theta: f64) -> Self {
        Se2 {
            z,
            y,
            theta: wrap_angle(theta),
        }
    }

    pub const IDENTITY: Se2 = Se2 {
        z: 0.0,
        y: 0.0,
        theta: 0.0,
    };

    #[inline]
    fn rotate(&self, z: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        (c * z - s * y, s * z + c * y)
    }

    #[inline]
    fn apply_pose(&self, pose: &[f64], out: &mut [f64]) {
        let (z, y) = self.rotate(pose[0], pose[1]);
        out[0] = z + self.z;
        out[1] = y + self.y;
        out[2] = wrap_angle(pose[2] + self.theta);
    }
}

/// `φ_α` on the six-dimensional two-vehicle state.
pub fn se2_phi(alpha: &Se2, x: &[f64; 6]) -> [f64; 6] {
    let mut out = [0.0; 6];
    alpha.apply_pose(&x[..3], &mut out[..3]);
    alpha.apply_pose(&x[3..], &mut out[3..]);
    out
}

/// The moving frame: the element taking vehicle 1 to the origin with zero
/// heading.
pub fn se2_gamma(x: &[f64]) -> Se2 {
    let (s, c) = x[2].sin_cos();
    Se2::new(-x[0] * c - x[1] * s, x[0] * s - x[1] * c, -x[2])
}

/// Pose of vehicle 2 expressed in vehicle 1's body frame.
pub fn se2_rho(x: &[f64; 6]) -> [f64; 3] {
    let (s, c) = x[2].sin_cos();
    let (dz, dy) = (x[3] - x[0], x[4] - x[1]);
    [dz * c + dy * s, -dz * s + dy * c, wrap_angle(x[5] - x[2])]
}

/// Re-embeds a relative pose on the cross-section (vehicle 1 at the origin).
pub fn se2_rho_bar_inv(reduced: &[f64; 3]) -> [f64; 6] {
    [0.0, 0.0, 0.0, reduced[0], reduced[1], reduced[2]]
}

/// SE(2) acting on `vehicles` stacked planar poses `(z, y, θ)`. Controls
/// and disturbances are left unchanged.
#[derive(Debug, Clone)]
pub struct Se2Group {
    vehicles: usize,
}

impl Se2Group {
    pub fn new(vehicles: usize) -> Self {
        assert!(vehicles >= 1, "SE(2) group needs at least one vehicle");
        Se2Group { vehicles }
    }

    pub fn vehicles(&self) -> usize {
        self.vehicles
    }

    pub fn state_periods(&self) -> Vec<Option<f64>> {
        (0..self.vehicles).flat_map(|_| [None, None, Some(TAU)]).collect()
    }
}

impl TransformationGroup for Se2Group {
    type Element = Se2;

    fn dim(&self) -> usize {
        3
    }

    fn identity(&self) -> Se2 {
        Se2::IDENTITY
    }

    fn compose(&self, a: &Se2, b: &Se2) -> Se2 {
        let (z, y) = a.rotate(b.z, b.y);
        Se2::new(z + a.z, y + a.y, a.theta + b.theta)
    }

    fn inverse(&self, a: &Se2) -> Se2 {
        let (s, c) = a.theta.sin_cos();
        Se2::new(-(c * a.z + s * a.y), s * a.z - c * a.y, -a.theta)
    }

    fn phi(&self, a: &Se2, state: &[f64]) -> Vec<f64> {
        assert_eq!(state.len(), 3 * self.vehicles, "state dimension");
        let mut out = vec![0.0; state.len()];
        for (pose, o) in state.chunks_exact(3).zip(out.chunks_exact_mut(3)) {
            a.apply_pose(pose, o);
        }
        out
    }
}

/// Moving frame for the two-vehicle game: cross-section `x₁ = x₂ = x₃ = 0`,
/// reduced coordinates are the relative pose of vehicle 2.
#[derive(Debug, Clone)]
pub struct Se2Frame {
    group: Se2Group,
}

impl Default for Se2Frame {
    fn default() -> Self {
        Se2Frame {
            group: Se2Group::new(2),
        }
    }
}

const SECTION: [usize; 3] = [0, 1, 2];
const SECTION_CONSTANT: [f64; 3] = [0.0; 3];
const STATE_PERIODS: [Option<f64>; 6] = [None, None, Some(TAU), None, None, Some(TAU)];
const REDUCED_PERIODS: [Option<f64>; 3] = [None, None, Some(TAU)];

impl MovingFrame for Se2Frame {
    type Group = Se2Group;

    fn group(&self) -> &Se2Group {
        &self.group
    }

    fn state_dim(&self) -> usize {
        6
    }

    fn reduced_dim(&self) -> usize {
        3
    }

    fn section_components(&self) -> &[usize] {
        &SECTION
    }

    fn section_constant(&self) -> &[f64] {
        &SECTION_CONSTANT
    }

    fn state_periods(&self) -> &[Option<f64>] {
        &STATE_PERIODS
    }

    fn reduced_periods(&self) -> &[Option<f64>] {
        &REDUCED_PERIODS
    }

    fn gamma(&self, state: &[f64]) -> Se2 {
        se2_gamma(state)
    }

    #[inline]
    fn rho(&self, state: &[f64], reduced: &mut [f64]) {
        let x: &[f64; 6] = state.try_into().expect("two-vehicle state has 6 components");
        reduced.copy_from_slice(&se2_rho(x));
    }

    #[inline]
    fn rho_bar_inv(&self, reduced: &[f64], state: &mut [f64]) {
        let r: &[f64; 3] = reduced.try_into().expect("reduced state has 3 components");
        state.copy_from_slice(&se2_rho_bar_inv(r));
    }
}

/// Seeded sampler of SE(2) elements, stacked poses and inputs.
pub struct Se2Sampler {
    rng: ChaCha8Rng,
    vehicles: usize,
    extent: f64,
    controls: InputSet,
    disturbances: InputSet,
}

impl Se2Sampler {
    /// Positions and translations are drawn from `[-extent, extent]`,
    /// angles from `[0, 2π)`, inputs uniformly from the given sets.
    pub fn new(seed: u64, vehicles: usize, extent: f64, controls: InputSet, disturbances: InputSet) -> Self {
        Se2Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            vehicles,
            extent,
            controls,
            disturbances,
        }
    }
}

impl CaseSampler<Se2> for Se2Sampler {
    fn element(&mut self) -> Se2 {
        let e = self.extent;
        Se2::new(
            self.rng.gen_range(-e..=e),
            self.rng.gen_range(-e..=e),
            self.rng.gen_range(0.0..TAU),
        )
    }

    fn state(&mut self) -> Vec<f64> {
        let e = self.extent;
        (0..self.vehicles)
            .flat_map(|_| {
                [
                    self.rng.gen_range(-e..=e),
                    self.rng.gen_range(-e..=e),
                    self.rng.gen_range(0.0..TAU),
                ]
            })
            .collect()
    }

    fn control(&mut self) -> Vec<f64> {
        let i = self.rng.gen_range(0..self.controls.len());
        self.controls[i].to_vec()
    }

    fn disturbance(&mut self) -> Vec<f64> {
        let i = self.rng.gen_range(0..self.disturbances.len());
        self.disturbances[i].to_vec()
    }

    fn step_index(&mut self, horizon: usize) -> usize {
        self.rng.gen_range(0..=horizon)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::residual;
    use crate::symmetry::{
        invariants_from_action, verify_frame, verify_group, verify_group_cases, FrameTolerances, GroupCase,
    };
    use crate::system::DubinsParams;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn close(a: &[f64], b: &[f64], periods: &[Option<f64>]) -> bool {
        residual(a, b, periods) < 1e-12
    }

    fn sampler(seed: u64) -> Se2Sampler {
        let set = DubinsParams::default().input_set();
        Se2Sampler::new(seed, 2, 5.0, set.clone(), set)
    }

    #[test]
    fn phi_examples() {
        let x = [0.3, -1.0, 2.0, 4.0, 0.5, 6.0];
        assert!(close(&se2_phi(&Se2::IDENTITY, &x), &x, &STATE_PERIODS));
        assert_eq!(
            se2_phi(&Se2::new(1.0, 2.0, 0.0), &[0.0; 6]),
            [1.0, 2.0, 0.0, 1.0, 2.0, 0.0]
        );
        let r = se2_phi(&Se2::new(0.0, 0.0, FRAC_PI_2), &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(close(&r, &[0.0, 1.0, FRAC_PI_2, -1.0, 0.0, FRAC_PI_2], &STATE_PERIODS));
    }

    #[test]
    fn gamma_examples() {
        assert_eq!(se2_gamma(&[0.0, 0.0, 0.0, 1.0, 2.0, 3.0]), Se2::IDENTITY);
        let g = se2_gamma(&[1.0, 0.0, FRAC_PI_2, 0.0, 0.0, 0.0]);
        assert!(close(&[g.z, g.y, g.theta], &[0.0, 1.0, 1.5 * PI], &REDUCED_PERIODS));
        assert!((g.theta - 1.5 * PI).abs() < 1e-15);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(se2_rho(&[0.0, 0.0, 0.0, 0.4, -0.2, 1.0]), [0.4, -0.2, 1.0]);
        let r = se2_rho(&[1.0, 0.0, FRAC_PI_2, 1.0, 1.0, PI]);
        assert!(close(&r, &[1.0, 0.0, FRAC_PI_2], &REDUCED_PERIODS));
    }

    #[test]
    fn rho_bar_inv_examples() {
        assert_eq!(se2_rho_bar_inv(&[0.0; 3]), [0.0; 6]);
        assert_eq!(
            se2_rho_bar_inv(&[1.0, 0.0, FRAC_PI_2]),
            [0.0, 0.0, 0.0, 1.0, 0.0, FRAC_PI_2]
        );
    }

    #[test]
    fn closed_form_rho_matches_group_action() {
        let frame = Se2Frame::default();
        let mut s = sampler(11);
        for _ in 0..500 {
            let x = s.state();
            let a = frame.rho_vec(&x);
            let b = invariants_from_action(&frame, &x);
            assert!(residual(&a, &b, &REDUCED_PERIODS) < 1e-12, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn group_axioms_hold() {
        let g = Se2Group::new(2);
        let r = verify_group(&g, &mut sampler(1), 1000, &g.state_periods(), 1e-9);
        assert!(r.passed(), "{r}");
    }

    struct FlippedCompose(Se2Group);

    impl TransformationGroup for FlippedCompose {
        type Element = Se2;
        fn dim(&self) -> usize {
            3
        }
        fn identity(&self) -> Se2 {
            Se2::IDENTITY
        }
        fn compose(&self, a: &Se2, b: &Se2) -> Se2 {
            let c = self.0.compose(a, b);
            Se2::new(c.z, c.y, a.theta - b.theta)
        }
        fn inverse(&self, a: &Se2) -> Se2 {
            self.0.inverse(a)
        }
        fn phi(&self, a: &Se2, x: &[f64]) -> Vec<f64> {
            self.0.phi(a, x)
        }
    }

    #[test]
    fn broken_compose_detected() {
        let g = FlippedCompose(Se2Group::new(2));
        let r = verify_group(&g, &mut sampler(2), 1000, &STATE_PERIODS, 1e-9);
        assert!(!r.passed());
        let comp = r.check("group composition").unwrap();
        assert!(comp.max_residual > 1e-9);
        assert!(r.check("group identity").unwrap().passed());
    }

    #[test]
    fn frame_properties() {
        let frame = Se2Frame::default();
        let r = verify_frame(&frame, &mut sampler(3), 1000, FrameTolerances::default());
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn single_vehicle_group() {
        let g = Se2Group::new(1);
        let cases = (0..50).map(|i| {
            let t = i as f64 * 0.3;
            GroupCase {
                a: Se2::new(t, -t, t),
                b: Se2::new(1.0, 2.0, -t),
                state: vec![t.cos(), t.sin(), t],
                control: vec![],
                disturbance: vec![],
            }
        });
        assert!(verify_group_cases(&g, cases, &g.state_periods(), 1e-9).passed());
    }
}
