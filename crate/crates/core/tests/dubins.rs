//! Two-vehicle Dubins game on the reduced 51³ grid with horizon 10.

use std::f64::consts::TAU;
use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use symreach::grid::{AxisSpec, BoundaryPolicy, Grid};
use symreach::solver::{
    lift_policy, membership_lifted, reduced_dp, rollout, DpSolution, GreedyAdversary, Invariants, Policy, SolveConfig,
};
use symreach::symmetry::{se2_phi, se2_rho_bar_inv, Se2, Se2Frame};
use symreach::system::{DubinsParams, TwoVehicleDubins};
use symreach::tube::{detection_cost, DetectionParams, DetectionTube, TargetTube};

const N: usize = 10;

fn reduced_grid(points: usize) -> Grid {
    Grid::new(vec![
        AxisSpec::bounded(-1.2, 1.2, points),
        AxisSpec::bounded(-1.2, 1.2, points),
        AxisSpec::periodic(0.0, TAU, points),
    ])
    .unwrap()
}

fn system() -> TwoVehicleDubins {
    TwoVehicleDubins::new(DubinsParams::default()).unwrap()
}

fn tube() -> DetectionTube {
    DetectionTube::new(DetectionParams::default(), N).unwrap()
}

fn solution() -> &'static DpSolution {
    static SOLUTION: OnceLock<DpSolution> = OnceLock::new();
    SOLUTION.get_or_init(|| {
        let cfg = SolveConfig::new(N, reduced_grid(51)).with_boundary(BoundaryPolicy::ConstantSafe);
        reduced_dp(&system(), &Se2Frame::default(), &tube(), &cfg).unwrap()
    })
}

#[test]
fn detection_nodes_are_lost_at_every_step() {
    let sol = solution();
    let grid = sol.values.grid();
    let mut p = [0.0; 3];
    let mut inside = 0;
    for node in 0..grid.len() {
        grid.flat_node_point(node, &mut p);
        if detection_cost(&se2_rho_bar_inv(&p), &DetectionParams::default()) == 1 {
            inside += 1;
            for k in 0..=N {
                assert_eq!(sol.values.get(k).unwrap().values()[node], 1.0, "k={k} node={p:?}");
            }
        }
    }
    assert!(inside > 100);
}

#[test]
fn base_case_is_sampled_terminal_cost() {
    let cfg = SolveConfig::new(0, reduced_grid(21)).with_boundary(BoundaryPolicy::ConstantSafe);
    let tube = DetectionTube::new(DetectionParams::default(), 0).unwrap();
    let sol = reduced_dp(&system(), &Se2Frame::default(), &tube, &cfg).unwrap();
    let field = sol.values.get(0).unwrap();
    let mut p = [0.0; 3];
    for node in 0..field.grid().len() {
        field.grid().flat_node_point(node, &mut p);
        assert_eq!(field.values()[node], f64::from(tube.cost_at(0, &se2_rho_bar_inv(&p))));
    }
}

/// Vehicles close at most `2·V_max` per step, so a relative distance above
/// `r + 2·N·V_max` cannot reach the cone within the horizon.
#[test]
fn far_states_are_safe_off_grid() {
    let sol = solution();
    let frame = Se2Frame::default();
    let bound = 0.5 + 2.0 * N as f64 * 0.05;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut tested = 0;
    while tested < 2000 {
        let x: Vec<f64> = (0..6)
            .map(|i| {
                if i % 3 == 2 {
                    rng.gen_range(0.0..TAU)
                } else {
                    rng.gen_range(-3.0..3.0)
                }
            })
            .collect();
        let d = (x[3] - x[0]).hypot(x[4] - x[1]);
        if d <= bound + 0.05 {
            continue;
        }
        tested += 1;
        for k in 0..=N {
            assert!(membership_lifted(&sol.values, k, &x, &frame, 0.5).unwrap(), "x={x:?}");
        }
    }
}

#[test]
fn node_sets_grow_with_k() {
    let sol = solution();
    for k in 0..N {
        let now = sol.member_nodes(k);
        let later = sol.member_nodes(k + 1);
        assert!(now.iter().zip(&later).all(|(&a, &b)| !a || b), "k={k}");
    }
    let count = |k| sol.member_nodes(k).iter().filter(|&&m| m).count();
    assert!(count(0) < count(N), "the unsafe set should grow backwards");
}

#[test]
fn lifted_policy_is_constant_on_orbits() {
    let sol = solution();
    let frame = Se2Frame::default();
    let policy = lift_policy(&sol.policy, sol.values.grid(), &frame);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let x: [f64; 6] = std::array::from_fn(|i| {
            if i % 3 == 2 {
                rng.gen_range(0.0..TAU)
            } else {
                rng.gen_range(-1.0..1.0)
            }
        });
        let a = Se2::new(
            rng.gen_range(-5.0..5.0),
            rng.gen_range(-5.0..5.0),
            rng.gen_range(0.0..TAU),
        );
        let moved = se2_phi(&a, &x);
        for k in 0..N {
            assert_eq!(policy.control(k, &moved), policy.control(k, &x));
        }
    }
    // on the cross-section at a node the table entry is returned as is
    let grid = sol.values.grid();
    let mut p = [0.0; 3];
    for node in (0..grid.len()).step_by(997) {
        grid.flat_node_point(node, &mut p);
        assert_eq!(policy.control(3, &se2_rho_bar_inv(&p)), sol.policy.get(3, node));
    }
}

/// The grid recursion is not formally conservative, so violations are
/// reported rather than failed on. A gross majority of failures would
/// point at a bug rather than interpolation error.
#[test]
fn greedy_rollouts_from_safe_nodes() {
    let sol = solution();
    let sys = system();
    let tube = tube();
    let frame = Se2Frame::default();
    let grid = sol.values.grid();
    let policy = lift_policy(&sol.policy, grid, &frame);
    let mut adversary = GreedyAdversary::new(&sys, &sol.values, Invariants(&frame));
    let v0 = sol.values.get(0).unwrap().values();
    let mut p = [0.0; 3];
    let (mut runs, mut failed) = (0, 0);
    for node in (0..grid.len()).step_by(37) {
        grid.flat_node_point(node, &mut p);
        if v0[node] != 0.0 || p[0].hypot(p[1]) > 0.9 {
            continue;
        }
        runs += 1;
        let traj = rollout(&sys, &tube, &policy, &mut adversary, &se2_rho_bar_inv(&p), N);
        assert_eq!(traj.states.len(), N + 1);
        if traj.violations() > 0 {
            failed += 1;
        }
    }
    eprintln!("greedy rollouts from J0 = 0 nodes: {failed} of {runs} entered the cone");
    assert!(runs > 100);
    assert!(failed * 10 < runs, "{failed} of {runs} rollouts failed");
}
