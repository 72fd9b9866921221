//! Quarter-turn symmetry of the torus gridworld.
//!
//! `C4(a)` rotates the board `a` quarter turns counter-clockwise about its
//! centre, `(i, j) ↦ (m-1-j, i)` per turn, and advances the heading by `a`.

use super::{GroupCase, InvarianceCase, MovingFrame, TransformationGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct C4(pub u8);

impl C4 {
    pub const ALL: [C4; 4] = [C4(0), C4(1), C4(2), C4(3)];
}

#[derive(Debug, Clone)]
pub struct C4Group {
    m: usize,
}

impl C4Group {
    pub fn new(m: usize) -> Self {
        C4Group { m }
    }

    fn rotate_ccw(&self, (i, j): (usize, usize), turns: usize) -> (usize, usize) {
        (0..turns % 4).fold((i, j), |(i, j), _| (self.m - 1 - j, i))
    }

    fn rotate_cw(&self, (i, j): (usize, usize), turns: usize) -> (usize, usize) {
        (0..turns % 4).fold((i, j), |(i, j), _| (j, self.m - 1 - i))
    }

    fn cell(&self, x: f64, period: usize) -> usize {
        crate::angle::wrap(x.round(), period as f64) as usize
    }

    pub fn state_periods(&self) -> [Option<f64>; 3] {
        [Some(self.m as f64), Some(self.m as f64), Some(4.0)]
    }

    /// Every `(a, b, state, control)` combination for the given controls.
    pub fn exhaustive_cases(&self, controls: &[Vec<f64>]) -> Vec<GroupCase<C4>> {
        let mut out = Vec::new();
        for a in C4::ALL {
            for b in C4::ALL {
                for s in self.states() {
                    for u in controls {
                        out.push(GroupCase {
                            a,
                            b,
                            state: s.to_vec(),
                            control: u.clone(),
                            disturbance: vec![],
                        });
                    }
                }
            }
        }
        out
    }

    /// Every `(α, state, control, k)` combination for `k` in `0..=horizon`.
    pub fn exhaustive_invariance_cases(&self, controls: &[Vec<f64>], horizon: usize) -> Vec<InvarianceCase<C4>> {
        let mut out = Vec::new();
        for element in C4::ALL {
            for s in self.states() {
                for u in controls {
                    for step in 0..=horizon {
                        out.push(InvarianceCase {
                            element,
                            state: s.to_vec(),
                            control: u.clone(),
                            disturbance: vec![],
                            step,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn states(&self) -> impl Iterator<Item = [f64; 3]> {
        let m = self.m;
        (0..m).flat_map(move |i| (0..m).flat_map(move |j| (0..4).map(move |h| [i as f64, j as f64, h as f64])))
    }
}

impl TransformationGroup for C4Group {
    type Element = C4;

    fn dim(&self) -> usize {
        1
    }

    fn identity(&self) -> C4 {
        C4(0)
    }

    fn compose(&self, a: &C4, b: &C4) -> C4 {
        C4((a.0 + b.0) % 4)
    }

    fn inverse(&self, a: &C4) -> C4 {
        C4((4 - a.0 % 4) % 4)
    }

    fn phi(&self, a: &C4, state: &[f64]) -> Vec<f64> {
        let turns = a.0 as usize;
        let (i, j) = self.rotate_ccw((self.cell(state[0], self.m), self.cell(state[1], self.m)), turns);
        let h = (self.cell(state[2], 4) + turns) % 4;
        vec![i as f64, j as f64, h as f64]
    }
}

/// Frame with cross-section `h = 0`; reduced coordinates are the board
/// position after undoing the heading's rotation.
#[derive(Debug, Clone)]
pub struct C4Frame {
    group: C4Group,
    state_periods: [Option<f64>; 3],
    reduced_periods: [Option<f64>; 2],
}

impl C4Frame {
    pub fn new(m: usize) -> Self {
        let group = C4Group::new(m);
        C4Frame {
            state_periods: group.state_periods(),
            reduced_periods: [Some(m as f64), Some(m as f64)],
            group,
        }
    }
}

impl MovingFrame for C4Frame {
    type Group = C4Group;

    fn group(&self) -> &C4Group {
        &self.group
    }

    fn state_dim(&self) -> usize {
        3
    }

    fn reduced_dim(&self) -> usize {
        2
    }

    fn section_components(&self) -> &[usize] {
        &[2]
    }

    fn section_constant(&self) -> &[f64] {
        &[0.0]
    }

    fn state_periods(&self) -> &[Option<f64>] {
        &self.state_periods
    }

    fn reduced_periods(&self) -> &[Option<f64>] {
        &self.reduced_periods
    }

    fn gamma(&self, state: &[f64]) -> C4 {
        let h = self.group.cell(state[2], 4);
        C4(((4 - h) % 4) as u8)
    }

    fn rho(&self, state: &[f64], reduced: &mut [f64]) {
        let g = &self.group;
        let h = g.cell(state[2], 4);
        let (i, j) = g.rotate_cw((g.cell(state[0], g.m), g.cell(state[1], g.m)), h);
        reduced[0] = i as f64;
        reduced[1] = j as f64;
    }

    fn rho_bar_inv(&self, reduced: &[f64], state: &mut [f64]) {
        state[0] = reduced[0];
        state[1] = reduced[1];
        state[2] = 0.0;
    }
}
