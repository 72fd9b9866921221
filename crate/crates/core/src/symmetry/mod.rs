//! Transformation groups acting jointly on states, controls and
//! disturbances; moving frames built on them; and randomized (or
//! exhaustive) checks that a problem really has the claimed symmetry.
//!
//! A group element `α` acts by `φ_α` on states, `χ_α` on controls and
//! `ψ_α` on disturbances, with `φ_{a∗b} = φ_a ∘ φ_b`. A problem `(f, X)` is
//! invariant when `φ_α⁻¹(f(φ_α x, χ_α u, ψ_α w)) = f(x, u, w)` and every
//! `X_k` is mapped onto itself.
//!
//! A moving frame picks, for each state `x`, the element `γ(x)` sending it
//! onto a cross-section `{x : φᵃ(x) = c}`. The remaining components
//! `ρ(x) = φᵇ_{γ(x)}(x)` are invariant and serve as reduced coordinates;
//! `ρ̄⁻¹` re-embeds them on the cross-section.

mod c4;
mod report;
mod se2;

pub use c4::{C4Frame, C4Group, C4};
pub use report::{Check, VerificationReport};
pub use se2::{se2_gamma, se2_phi, se2_rho, se2_rho_bar_inv, Se2, Se2Frame, Se2Group, Se2Sampler};

use std::fmt::Debug;

use crate::angle::residual;
use crate::system::SystemModel;
use crate::tube::TargetTube;

pub trait TransformationGroup: Sync {
    type Element: Clone + Debug + Send + Sync;

    /// Dimension `r` of the group.
    fn dim(&self) -> usize;

    fn identity(&self) -> Self::Element;

    /// `a ∗ b`, defined so that `φ_{a∗b} = φ_a ∘ φ_b`.
    fn compose(&self, a: &Self::Element, b: &Self::Element) -> Self::Element;

    fn inverse(&self, a: &Self::Element) -> Self::Element;

    fn phi(&self, a: &Self::Element, state: &[f64]) -> Vec<f64>;

    fn chi(&self, _a: &Self::Element, control: &[f64]) -> Vec<f64> {
        control.to_vec()
    }

    fn psi(&self, _a: &Self::Element, disturbance: &[f64]) -> Vec<f64> {
        disturbance.to_vec()
    }
}

/// Closed-form moving frame `(γ, ρ, ρ̄⁻¹)` for a transformation group.
pub trait MovingFrame: Sync {
    type Group: TransformationGroup;

    fn group(&self) -> &Self::Group;

    fn state_dim(&self) -> usize;

    /// `n - r`.
    fn reduced_dim(&self) -> usize;

    /// State components making up `φᵃ`.
    fn section_components(&self) -> &[usize];

    /// The constant `c` defining the cross-section `φᵃ(x) = c`.
    fn section_constant(&self) -> &[f64];

    fn state_periods(&self) -> &[Option<f64>];

    fn reduced_periods(&self) -> &[Option<f64>];

    fn gamma(&self, state: &[f64]) -> <Self::Group as TransformationGroup>::Element;

    fn rho(&self, state: &[f64], reduced: &mut [f64]);

    fn rho_bar_inv(&self, reduced: &[f64], state: &mut [f64]);

    fn rho_vec(&self, state: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.reduced_dim()];
        self.rho(state, &mut out);
        out
    }

    fn rho_bar_inv_vec(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.state_dim()];
        self.rho_bar_inv(reduced, &mut out);
        out
    }
}

/// Invariants computed the long way: apply `φ_{γ(x)}` and keep the
/// components outside the cross-section split. Independent of any
/// closed-form `rho`.
pub fn invariants_from_action<F: MovingFrame>(frame: &F, state: &[f64]) -> Vec<f64> {
    let moved = frame.group().phi(&frame.gamma(state), state);
    let section = frame.section_components();
    moved
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !section.contains(i))
        .map(|(_, v)| v)
        .collect()
}

/// Supplies random samples for the verification routines.
pub trait CaseSampler<E> {
    fn element(&mut self) -> E;
    fn state(&mut self) -> Vec<f64>;
    fn control(&mut self) -> Vec<f64>;
    fn disturbance(&mut self) -> Vec<f64>;
    /// A step index in `0..=horizon`.
    fn step_index(&mut self, horizon: usize) -> usize;
}

/// One sample for the group-axiom checks.
#[derive(Debug, Clone)]
pub struct GroupCase<E> {
    pub a: E,
    pub b: E,
    pub state: Vec<f64>,
    pub control: Vec<f64>,
    pub disturbance: Vec<f64>,
}

/// One sample for the problem-invariance checks.
#[derive(Debug, Clone)]
pub struct InvarianceCase<E> {
    pub element: E,
    pub state: Vec<f64>,
    pub control: Vec<f64>,
    pub disturbance: Vec<f64>,
    pub step: usize,
}

/// Checks identity, composition and bijection axioms on every case.
/// Residuals on states compare components modulo `state_periods`.
pub fn verify_group_cases<G: TransformationGroup>(
    group: &G,
    cases: impl IntoIterator<Item = GroupCase<G::Element>>,
    state_periods: &[Option<f64>],
    tol: f64,
) -> VerificationReport {
    let mut identity = Check::new("group identity", tol);
    let mut composition = Check::new("group composition", tol);
    let mut bijection = Check::new("group bijection", tol);
    let e = group.identity();
    let flat: &[Option<f64>] = &[];

    for c in cases {
        let (x, u, w) = (&c.state, &c.control, &c.disturbance);
        identity.record(
            residual(&group.phi(&e, x), x, state_periods)
                .max(residual(&group.chi(&e, u), u, flat))
                .max(residual(&group.psi(&e, w), w, flat)),
        );

        let ab = group.compose(&c.a, &c.b);
        composition.record(
            residual(&group.phi(&ab, x), &group.phi(&c.a, &group.phi(&c.b, x)), state_periods)
                .max(residual(
                    &group.chi(&ab, u),
                    &group.chi(&c.a, &group.chi(&c.b, u)),
                    flat,
                ))
                .max(residual(
                    &group.psi(&ab, w),
                    &group.psi(&c.a, &group.psi(&c.b, w)),
                    flat,
                )),
        );

        let inv = group.inverse(&c.a);
        bijection.record(
            residual(&group.phi(&inv, &group.phi(&c.a, x)), x, state_periods)
                .max(residual(&group.chi(&inv, &group.chi(&c.a, u)), u, flat))
                .max(residual(&group.psi(&inv, &group.psi(&c.a, w)), w, flat)),
        );
    }
    VerificationReport::new(vec![identity, composition, bijection])
}

/// Randomized group-axiom check over `trials` sampled cases.
pub fn verify_group<G: TransformationGroup, S: CaseSampler<G::Element>>(
    group: &G,
    sampler: &mut S,
    trials: usize,
    state_periods: &[Option<f64>],
    tol: f64,
) -> VerificationReport {
    let cases: Vec<_> = (0..trials)
        .map(|_| GroupCase {
            a: sampler.element(),
            b: sampler.element(),
            state: sampler.state(),
            control: sampler.control(),
            disturbance: sampler.disturbance(),
        })
        .collect();
    verify_group_cases(group, cases, state_periods, tol)
}

/// Checks that the dynamics commute with the group action and that the
/// target tube is preserved by `φ`.
pub fn verify_invariance_cases<S, T, G>(
    system: &S,
    tube: &T,
    group: &G,
    cases: impl IntoIterator<Item = InvarianceCase<G::Element>>,
    tol: f64,
) -> VerificationReport
where
    S: SystemModel,
    T: TargetTube,
    G: TransformationGroup,
{
    let mut dynamics = Check::new("dynamics invariance", tol);
    let mut membership = Check::new("target membership", 0.0);
    let periods = system.periods();
    for c in cases {
        let a = &c.element;
        let moved = system.step_vec(
            &group.phi(a, &c.state),
            &group.chi(a, &c.control),
            &group.psi(a, &c.disturbance),
        );
        let pulled_back = group.phi(&group.inverse(a), &moved);
        let direct = system.step_vec(&c.state, &c.control, &c.disturbance);
        dynamics.record(residual(&pulled_back, &direct, periods));
        membership.record_membership(tube, c.step, &c.state, &group.phi(a, &c.state));
    }
    VerificationReport::new(vec![dynamics, membership])
}

pub fn verify_invariance<S, T, G, Smp>(
    system: &S,
    tube: &T,
    group: &G,
    sampler: &mut Smp,
    trials: usize,
    tol: f64,
) -> VerificationReport
where
    S: SystemModel,
    T: TargetTube,
    G: TransformationGroup,
    Smp: CaseSampler<G::Element>,
{
    let horizon = tube.horizon();
    let cases: Vec<_> = (0..trials)
        .map(|_| InvarianceCase {
            element: sampler.element(),
            state: sampler.state(),
            control: sampler.control(),
            disturbance: sampler.disturbance(),
            step: sampler.step_index(horizon),
        })
        .collect();
    verify_invariance_cases(system, tube, group, cases, tol)
}

/// Membership half of [`verify_invariance_cases`], for certifying a tube
/// without a system model.
pub fn tube_is_invariant<T, G>(
    tube: &T,
    group: &G,
    cases: impl IntoIterator<Item = (G::Element, Vec<f64>, usize)>,
) -> VerificationReport
where
    T: TargetTube,
    G: TransformationGroup,
{
    let mut membership = Check::new("target membership", 0.0);
    for (a, x, k) in cases {
        membership.record_membership(tube, k, &x, &group.phi(&a, &x));
    }
    VerificationReport::new(vec![membership])
}

/// Tolerances for [`verify_frame_cases`].
#[derive(Debug, Clone, Copy)]
pub struct FrameTolerances {
    pub normalization: f64,
    pub invariance: f64,
    pub round_trip: f64,
}

impl Default for FrameTolerances {
    fn default() -> Self {
        FrameTolerances {
            normalization: 1e-12,
            invariance: 1e-9,
            round_trip: 1e-12,
        }
    }
}

/// Checks the normalization equations, invariance of `ρ` along orbits and
/// the `ρ ∘ ρ̄⁻¹` round trip on reduced points `ρ(x)`.
pub fn verify_frame_cases<F: MovingFrame>(
    frame: &F,
    cases: impl IntoIterator<Item = (<F::Group as TransformationGroup>::Element, Vec<f64>)>,
    tol: FrameTolerances,
) -> VerificationReport {
    let mut normalization = Check::new("frame normalization", tol.normalization);
    let mut invariance = Check::new("rho invariance", tol.invariance);
    let mut round_trip = Check::new("section round trip", tol.round_trip);
    let group = frame.group();
    let state_periods = frame.state_periods();
    let reduced_periods = frame.reduced_periods();

    for (a, x) in cases {
        let on_section = group.phi(&frame.gamma(&x), &x);
        let worst = frame
            .section_components()
            .iter()
            .zip(frame.section_constant())
            .map(|(&i, &c)| residual(&on_section[i..=i], &[c], &state_periods[i..=i]))
            .fold(0.0, f64::max);
        normalization.record(worst);

        let reduced = frame.rho_vec(&x);
        invariance.record(residual(&frame.rho_vec(&group.phi(&a, &x)), &reduced, reduced_periods));

        let back = frame.rho_vec(&frame.rho_bar_inv_vec(&reduced));
        round_trip.record(residual(&back, &reduced, reduced_periods));
    }
    VerificationReport::new(vec![normalization, invariance, round_trip])
}

pub fn verify_frame<F, S>(frame: &F, sampler: &mut S, trials: usize, tol: FrameTolerances) -> VerificationReport
where
    F: MovingFrame,
    S: CaseSampler<<F::Group as TransformationGroup>::Element>,
{
    let cases: Vec<_> = (0..trials).map(|_| (sampler.element(), sampler.state())).collect();
    verify_frame_cases(frame, cases, tol)
}
