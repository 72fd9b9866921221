use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context};
use symreach::grid::Grid;
use symreach::solver::{
    full_dp, reduced_dp, rollout, Adversary, DpSolution, FixedAdversary, GreedyAdversary, RandomAdversary, SolveConfig,
    SolveError, StateProjection, TablePolicy,
};
use symreach::symmetry::{
    verify_frame, verify_frame_cases, verify_group, verify_group_cases, verify_invariance, verify_invariance_cases,
    C4Frame, C4Group, FrameTolerances, MovingFrame, Se2Frame, Se2Group, Se2Sampler, VerificationReport, C4,
};
use symreach::system::SystemModel;

use crate::artifacts::{self, Manifest};
use crate::config::{Mode, ScenarioConfig, SystemKind};
use crate::scenario::{AnySystem, Scenario};
use crate::{BenchArgs, Common, ExportArgs, RolloutArgs, SolveArgs, VerifyArgs};

pub const EXIT_SOLVE: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;
pub const EXIT_MISSING: u8 = 4;

/// Residual tolerance for randomized SE(2) checks.
const SE2_TOL: f64 = 1e-9;
/// Half-width of the box SE(2) samples are drawn from.
const SE2_EXTENT: f64 = 1.0;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub type Outcome = Result<(), Failure>;

trait OrExit<T> {
    fn or_exit(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure { code, error: e.into() })
    }
}

fn fail<T>(code: u8, error: anyhow::Error) -> Result<T, Failure> {
    Err(Failure { code, error })
}

pub fn load_config(common: &Common) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => ScenarioConfig::load(path).or_exit(EXIT_CONFIG)?,
        None => ScenarioConfig::default(),
    };
    if let Some(mode) = common.mode {
        cfg.mode = mode;
    }
    if let Some(w) = common.workers {
        cfg.workers = w;
    }
    if let Some(out) = &common.output {
        cfg.output = out.clone();
    }
    cfg.validate().or_exit(EXIT_CONFIG)?;
    Ok(cfg)
}

/// Maps full states to the coordinates of a stored value grid.
#[derive(Clone)]
pub enum Projection {
    Identity,
    Se2(Se2Frame),
    C4(C4Frame),
}

impl StateProjection for Projection {
    fn project(&self, state: &[f64]) -> Vec<f64> {
        match self {
            Projection::Identity => state.to_vec(),
            Projection::Se2(f) => f.rho_vec(state),
            Projection::C4(f) => f.rho_vec(state),
        }
    }
}

impl Projection {
    /// The projection matching a stored grid of dimension `grid_dim`.
    fn for_grid(system: &AnySystem, grid_dim: usize) -> anyhow::Result<Self> {
        let frame = match system {
            AnySystem::Dubins(_) => Projection::Se2(Se2Frame::default()),
            AnySystem::Grid(g) => Projection::C4(C4Frame::new(g.size())),
        };
        let reduced = match &frame {
            Projection::Se2(f) => f.reduced_dim(),
            Projection::C4(f) => f.reduced_dim(),
            Projection::Identity => unreachable!(),
        };
        if grid_dim == system.state_dim() {
            Ok(Projection::Identity)
        } else if grid_dim == reduced {
            Ok(frame)
        } else {
            bail!(
                "stored grid has {grid_dim} axes; expected {} (full) or {reduced} (reduced)",
                system.state_dim()
            )
        }
    }
}

/// Group axioms, problem invariance and frame checks for the scenario.
/// SE(2) checks are randomized, C4 checks are exhaustive and exact.
pub fn verify_scenario(cfg: &ScenarioConfig, scenario: &Scenario) -> VerificationReport {
    match &scenario.system {
        AnySystem::Dubins(sys) => {
            let group = Se2Group::new(2);
            let mut sampler = Se2Sampler::new(
                cfg.seed,
                2,
                SE2_EXTENT,
                sys.controls().clone(),
                sys.disturbances().clone(),
            );
            let mut report = verify_group(&group, &mut sampler, cfg.trials, &group.state_periods(), SE2_TOL);
            report.extend(verify_invariance(
                sys,
                &scenario.tube,
                &group,
                &mut sampler,
                cfg.trials,
                SE2_TOL,
            ));
            report.extend(verify_frame(
                &Se2Frame::default(),
                &mut sampler,
                cfg.trials,
                FrameTolerances::default(),
            ));
            report
        }
        AnySystem::Grid(world) => {
            let m = world.size();
            let group = C4Group::new(m);
            let controls: Vec<Vec<f64>> = world.controls().iter().map(<[f64]>::to_vec).collect();
            let mut report = verify_group_cases(&group, group.exhaustive_cases(&controls), &group.state_periods(), 0.0);
            report.extend(verify_invariance_cases(
                world,
                &scenario.tube,
                &group,
                group.exhaustive_invariance_cases(&controls, cfg.horizon()),
                0.0,
            ));
            let cases: Vec<_> = C4::ALL
                .iter()
                .flat_map(|&a| group.states().map(move |s| (a, s.to_vec())))
                .collect();
            let exact = FrameTolerances {
                normalization: 0.0,
                invariance: 0.0,
                round_trip: 0.0,
            };
            report.extend(verify_frame_cases(&C4Frame::new(m), cases, exact));
            report
        }
    }
}

fn solve_config(cfg: &ScenarioConfig, mode: Mode, grid: Grid, timeout: Option<f64>) -> SolveConfig {
    SolveConfig::new(cfg.horizon(), grid)
        .with_boundary(cfg.boundary(mode))
        .with_saturating(cfg.solver.saturating)
        .with_threshold(cfg.solver.threshold)
        .with_workers(cfg.workers())
        .with_time_budget(timeout.map(Duration::from_secs_f64))
}

fn run_dp(scenario: &Scenario, mode: Mode, config: &SolveConfig) -> Result<DpSolution, SolveError> {
    match (mode, &scenario.system) {
        (Mode::Full, _) => full_dp(&scenario.system, &scenario.tube, config),
        (Mode::Reduced, AnySystem::Dubins(_)) => {
            reduced_dp(&scenario.system, &Se2Frame::default(), &scenario.tube, config)
        }
        (Mode::Reduced, AnySystem::Grid(g)) => {
            reduced_dp(&scenario.system, &C4Frame::new(g.size()), &scenario.tube, config)
        }
    }
}

fn worker_count(cfg: &ScenarioConfig) -> usize {
    cfg.workers()
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn check_timeout(timeout: Option<f64>) -> Result<(), Failure> {
    match timeout {
        Some(t) if !(t.is_finite() && t >= 0.0) => fail(
            EXIT_CONFIG,
            anyhow!("--timeout must be a non-negative number of seconds"),
        ),
        _ => Ok(()),
    }
}

pub fn solve(args: &SolveArgs) -> Outcome {
    let cfg = load_config(&args.common)?;
    check_timeout(args.timeout)?;
    let scenario = Scenario::build(&cfg).or_exit(EXIT_CONFIG)?;
    let verification = if args.skip_verify {
        "skipped"
    } else {
        let report = verify_scenario(&cfg, &scenario);
        print!("{report}");
        if !report.passed() {
            return fail(
                EXIT_VERIFY,
                anyhow!("symmetry verification failed; rerun with --skip-verify to solve anyway"),
            );
        }
        "passed"
    };

    let mode = cfg.mode;
    let grid = cfg.grid(mode).or_exit(EXIT_CONFIG)?;
    if mode == Mode::Full && grid.len() > cfg.node_ceiling && !args.allow_large {
        return fail(
            EXIT_SOLVE,
            anyhow!(
                "full grid has {} nodes, above node_ceiling = {}; pass --allow-large to run it",
                grid.len(),
                cfg.node_ceiling
            ),
        );
    }
    let nodes = grid.len();
    let config = solve_config(&cfg, mode, grid, args.timeout);
    let solution = run_dp(&scenario, mode, &config).or_exit(EXIT_SOLVE)?;

    let dir = &cfg.output;
    std::fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .or_exit(EXIT_SOLVE)?;
    write_solution(&cfg, &solution, dir).or_exit(EXIT_SOLVE)?;
    let manifest = Manifest {
        config: cfg.clone(),
        workers: worker_count(&cfg),
        horizon: cfg.horizon(),
        nodes,
        verification: verification.into(),
        step_seconds: solution.step_seconds.clone(),
        total_seconds: solution.seconds(),
    };
    artifacts::write_manifest(&manifest, &artifacts::manifest_path(dir)).or_exit(EXIT_SOLVE)?;

    let members = solution.member_nodes(0).iter().filter(|&&m| m).count();
    println!(
        "{mode:?} solve: N = {}, {nodes} nodes, {:.3} s; {members} nodes in the k = 0 set; wrote {}",
        cfg.horizon(),
        solution.seconds(),
        dir.display()
    );
    Ok(())
}

fn write_solution(cfg: &ScenarioConfig, solution: &DpSolution, dir: &Path) -> anyhow::Result<()> {
    for (k, field) in solution.values.fields().iter().enumerate() {
        artifacts::write_field_raster(field, &artifacts::values_path(dir, k))?;
    }
    let first = &solution.values.fields()[0];
    artifacts::write_field_csv(first, &artifacts::values_csv_path(dir, 0))?;
    let threshold = cfg.solver.threshold;
    artifacts::write_membership(
        first.grid(),
        |node, _| Ok(first.values()[node] < threshold),
        &artifacts::membership_path(dir, 0),
    )?;
    artifacts::write_policy(&solution.policy, &artifacts::policy_path(dir))
}

pub fn verify(args: &VerifyArgs) -> Outcome {
    let cfg = load_config(&args.common)?;
    let scenario = Scenario::build(&cfg).or_exit(EXIT_CONFIG)?;
    let report = verify_scenario(&cfg, &scenario);
    print!("{report}");
    if report.passed() {
        println!("verification passed");
        Ok(())
    } else {
        fail(EXIT_VERIFY, anyhow!("verification failed"))
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Median DP-loop seconds over `reps` runs, or `None` on timeout.
fn time_solve(scenario: &Scenario, mode: Mode, config: &SolveConfig, reps: usize) -> Result<Option<f64>, Failure> {
    let mut times = Vec::with_capacity(reps);
    for _ in 0..reps {
        match run_dp(scenario, mode, config) {
            Ok(sol) => times.push(sol.seconds()),
            Err(SolveError::Timeout { .. }) => return Ok(None),
            Err(e) => return fail(EXIT_SOLVE, e.into()),
        }
    }
    Ok(Some(median(times)))
}

pub fn bench(args: &BenchArgs) -> Outcome {
    let mut cfg = load_config(&args.common)?;
    if cfg.system.kind != SystemKind::Dubins {
        return fail(EXIT_CONFIG, anyhow!("bench needs a dubins scenario"));
    }
    if args.reps == 0 || args.points.is_empty() {
        return fail(
            EXIT_CONFIG,
            anyhow!("bench needs at least one repetition and one point count"),
        );
    }
    check_timeout(Some(args.timeout))?;
    cfg.tube.horizon = Some(args.horizon);
    let scenario = Scenario::build(&cfg).or_exit(EXIT_CONFIG)?;

    let mut reduced = Vec::new();
    let mut baseline = Vec::new();
    for &p in &args.points {
        let grid = cfg.grid_with_points(Mode::Reduced, p).or_exit(EXIT_CONFIG)?;
        let config = solve_config(&cfg, Mode::Reduced, grid, Some(args.timeout));
        reduced.push(time_solve(&scenario, Mode::Reduced, &config, args.reps)?);

        let grid = cfg.grid_with_points(Mode::Full, p).or_exit(EXIT_CONFIG)?;
        if grid.len() > cfg.node_ceiling && !args.allow_large {
            baseline.push(None);
            continue;
        }
        let config = solve_config(&cfg, Mode::Full, grid, Some(args.timeout));
        baseline.push(time_solve(&scenario, Mode::Full, &config, args.reps)?);
    }

    println!(
        "horizon N = {}, median of {} run(s), {} worker(s), timeout {} s, node ceiling {}",
        args.horizon,
        args.reps,
        worker_count(&cfg),
        args.timeout,
        cfg.node_ceiling
    );
    println!("{}", bench_table(&args.points, &reduced, &baseline));
    Ok(())
}

fn bench_table(points: &[usize], reduced: &[Option<f64>], baseline: &[Option<f64>]) -> String {
    let cell = |t: &Option<f64>| t.map_or_else(|| "*".to_string(), |s| format!("{s:.4}"));
    let mut out = String::new();
    let _ = write!(out, "{:<28}", "grid points per dimension");
    for p in points {
        let _ = write!(out, "{p:>12}");
    }
    for (label, row) in [("reduced wall time (s)", reduced), ("baseline wall time (s)", baseline)] {
        let _ = write!(out, "\n{label:<28}");
        for t in row {
            let _ = write!(out, "{:>12}", cell(t));
        }
    }
    let _ = write!(out, "\n{:<28}", "baseline / reduced");
    for (r, b) in reduced.iter().zip(baseline) {
        let ratio = match (r, b) {
            (Some(r), Some(b)) if *r > 0.0 => format!("{:.1}x", b / r),
            _ => "-".to_string(),
        };
        let _ = write!(out, "{ratio:>12}");
    }
    out
}

fn parse_adversary<'a>(
    choice: &str,
    scenario: &'a Scenario,
    values: &'a symreach::solver::ValueSequence,
    projection: &Projection,
) -> anyhow::Result<Box<dyn Adversary + 'a>> {
    let count = scenario.system.disturbances().len();
    let (kind, arg) = choice.split_once(':').unwrap_or((choice, ""));
    Ok(match kind {
        "greedy" if arg.is_empty() => Box::new(GreedyAdversary::new(&scenario.system, values, projection.clone())),
        "fixed" => {
            let i: usize = arg
                .parse()
                .with_context(|| format!("bad disturbance index in {choice:?}"))?;
            if i >= count {
                bail!("disturbance index {i} out of range (set has {count} elements)");
            }
            Box::new(FixedAdversary(i))
        }
        "random" => {
            let seed: u64 = if arg.is_empty() {
                0
            } else {
                arg.parse().with_context(|| format!("bad seed in {choice:?}"))?
            };
            Box::new(RandomAdversary::new(seed, count))
        }
        _ => bail!("unknown adversary {choice:?}; expected greedy, fixed:INDEX or random:SEED"),
    })
}

pub fn rollout_cmd(args: &RolloutArgs) -> Outcome {
    let cfg = load_config(&args.common)?;
    let scenario = Scenario::build(&cfg).or_exit(EXIT_CONFIG)?;
    let dir = &cfg.output;
    let horizon = cfg.horizon();
    let values = artifacts::read_values(dir, horizon).or_exit(EXIT_MISSING)?;
    let table = artifacts::read_policy(&artifacts::policy_path(dir)).or_exit(EXIT_MISSING)?;
    let grid = values.grid().clone();
    if table.steps() != horizon || table.step(0).len() != grid.len() {
        return fail(
            EXIT_MISSING,
            anyhow!("policy table in {} does not match the stored values", dir.display()),
        );
    }
    let projection = Projection::for_grid(&scenario.system, grid.dim()).or_exit(EXIT_MISSING)?;

    let n = scenario.system.state_dim();
    if args.x0.len() != n {
        return fail(EXIT_CONFIG, anyhow!("--x0 needs {n} components, got {}", args.x0.len()));
    }
    let mut adversary = parse_adversary(&args.adversary, &scenario, &values, &projection).or_exit(EXIT_CONFIG)?;
    let policy = TablePolicy::new(&table, &grid, projection.clone());
    let steps = args.steps.unwrap_or(horizon);
    let traj = rollout(
        &scenario.system,
        &scenario.tube,
        &policy,
        adversary.as_mut(),
        &args.x0,
        steps,
    );

    let path = args.to.clone().unwrap_or_else(|| dir.join("rollout.csv"));
    write_trajectory(&traj, n, &path).or_exit(EXIT_SOLVE)?;
    println!(
        "{} steps, {} stage(s) outside the tube; wrote {}",
        steps,
        traj.violations(),
        path.display()
    );
    Ok(())
}

fn write_trajectory(traj: &symreach::solver::Trajectory, n: usize, path: &Path) -> anyhow::Result<()> {
    let mut out = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    let xs: Vec<String> = (0..n).map(|d| format!("x{d}")).collect();
    writeln!(out, "k,{},u,w,g", xs.join(","))?;
    for (k, x) in traj.states.iter().enumerate() {
        let state: Vec<String> = x.iter().map(f64::to_string).collect();
        let u = traj.controls.get(k).map_or(String::new(), usize::to_string);
        let w = traj.disturbances.get(k).map_or(String::new(), usize::to_string);
        writeln!(out, "{k},{},{u},{w},{}", state.join(","), traj.costs[k])?;
    }
    out.flush()?;
    Ok(())
}

/// Full-state grid used for lifted membership exports.
fn lift_grid(cfg: &ScenarioConfig) -> anyhow::Result<Grid> {
    match cfg.mode {
        Mode::Full => cfg.grid(Mode::Full),
        Mode::Reduced => Ok(Grid::new(cfg.default_axes(Mode::Full))?),
    }
}

pub fn export(args: &ExportArgs) -> Outcome {
    let cfg = load_config(&args.common)?;
    let dir = &cfg.output;
    let field = artifacts::read_field(&artifacts::values_path(dir, args.step)).or_exit(EXIT_MISSING)?;
    let path: PathBuf;
    if args.membership {
        let scenario = Scenario::build(&cfg).or_exit(EXIT_CONFIG)?;
        let projection = Projection::for_grid(&scenario.system, field.grid().dim()).or_exit(EXIT_MISSING)?;
        let grid = lift_grid(&cfg).or_exit(EXIT_CONFIG)?;
        let threshold = cfg.solver.threshold;
        path = args
            .to
            .clone()
            .unwrap_or_else(|| dir.join(format!("membership_full_k{}.csv", args.step)));
        artifacts::write_membership(
            &grid,
            |_, x| Ok(field.interpolate(&projection.project(x))? < threshold),
            &path,
        )
        .or_exit(EXIT_SOLVE)?;
    } else {
        path = args
            .to
            .clone()
            .unwrap_or_else(|| artifacts::values_csv_path(dir, args.step));
        artifacts::write_field_csv(&field, &path).or_exit(EXIT_SOLVE)?;
    }
    println!("wrote {}", path.display());
    Ok(())
}
