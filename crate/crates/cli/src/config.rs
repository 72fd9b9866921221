//! Scenario files: one TOML document per experiment.
//!
//! Every field has a default, so an empty file describes the two-vehicle
//! Dubins game on the 51³ reduced grid with horizon 10.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use symreach::grid::{AxisSpec, BoundaryPolicy, Grid};
use symreach::system::DubinsParams;
use symreach::tube::DetectionParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Full,
    Reduced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    Dubins,
    Gridworld,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TubeKind {
    /// Vehicle 2 must stay out of vehicle 1's camera cone.
    Detection,
    /// Gridworld rings around the board centre.
    Ring,
    /// Camera cone pinned at the world origin facing `+z`; deliberately
    /// not invariant under SE(2).
    Anchored,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub mode: Mode,
    /// Worker threads, 0 for all cores.
    pub workers: usize,
    pub output: PathBuf,
    /// Full-space solves above this many nodes need `--allow-large`.
    pub node_ceiling: usize,
    /// Randomized verification: seed and number of samples per check.
    pub seed: u64,
    pub trials: usize,
    pub system: SystemSection,
    pub tube: TubeSection,
    pub grid: GridSection,
    pub solver: SolverSection,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            mode: Mode::Reduced,
            workers: 0,
            output: PathBuf::from("out"),
            node_ceiling: 5_000_000,
            seed: 0,
            trials: 1000,
            system: SystemSection::default(),
            tube: TubeSection::default(),
            grid: GridSection::default(),
            solver: SolverSection::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemSection {
    pub kind: SystemKind,
    pub length: f64,
    pub v_max: f64,
    pub s_max: f64,
    /// Constant world-frame drift added to both vehicles each step.
    pub wind: [f64; 2],
    /// Gridworld board size.
    pub m: usize,
}

impl Default for SystemSection {
    fn default() -> Self {
        let p = DubinsParams::default();
        SystemSection {
            kind: SystemKind::Dubins,
            length: p.length,
            v_max: p.v_max,
            s_max: p.s_max,
            wind: [0.0, 0.0],
            m: 7,
        }
    }
}

impl SystemSection {
    pub fn dubins_params(&self) -> DubinsParams {
        DubinsParams {
            length: self.length,
            v_max: self.v_max,
            s_max: self.s_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeSection {
    /// Defaults to `detection` for Dubins and `ring` for the gridworld.
    pub kind: Option<TubeKind>,
    /// Defaults to 10 for Dubins and to the band count minus one for rings.
    pub horizon: Option<usize>,
    pub range: f64,
    pub half_angle_deg: f64,
    /// Only constrain the final step.
    pub terminal_only: bool,
    /// Ring bands `[lo, hi]` per step.
    pub bands: Option<Vec<[usize; 2]>>,
}

impl Default for TubeSection {
    fn default() -> Self {
        let p = DetectionParams::default();
        TubeSection {
            kind: None,
            horizon: None,
            range: p.range,
            half_angle_deg: p.half_angle.to_degrees(),
            terminal_only: false,
            bands: None,
        }
    }
}

impl TubeSection {
    pub fn detection_params(&self) -> DetectionParams {
        DetectionParams {
            range: self.range,
            half_angle: self.half_angle_deg.to_radians(),
        }
    }
}

/// Either one value for every axis or one per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerAxis<T> {
    All(T),
    Each(Vec<T>),
}

impl<T: Copy> PerAxis<T> {
    fn expand(&self, dim: usize, name: &str) -> Result<Vec<T>> {
        match self {
            PerAxis::All(v) => Ok(vec![*v; dim]),
            PerAxis::Each(v) if v.len() == dim => Ok(v.clone()),
            PerAxis::Each(v) => bail!("grid.{name} has {} entries, the grid has {dim} axes", v.len()),
        }
    }
}

/// Unset entries fall back to the defaults of the system and mode.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub points: Option<PerAxis<usize>>,
    pub lower: Option<PerAxis<f64>>,
    pub upper: Option<PerAxis<f64>>,
    pub periodic: Option<PerAxis<bool>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub saturating: bool,
    pub threshold: f64,
    /// Defaults to `constant_safe` for reduced Dubins grids, `clamp` otherwise.
    pub boundary: Option<BoundaryPolicy>,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection {
            saturating: true,
            threshold: 0.5,
            boundary: None,
        }
    }
}

/// Default ring bands for a 7×7 board.
pub const SEVEN_BANDS: [[usize; 2]; 4] = [[0, 3], [1, 3], [1, 2], [2, 2]];

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let config: ScenarioConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        match (self.system.kind, self.tube_kind()) {
            (SystemKind::Dubins, TubeKind::Ring) => bail!("tube.kind = \"ring\" needs system.kind = \"gridworld\""),
            (SystemKind::Gridworld, TubeKind::Detection | TubeKind::Anchored) => {
                bail!("gridworld scenarios only support tube.kind = \"ring\"")
            }
            _ => {}
        }
        match self.system.kind {
            SystemKind::Dubins => {
                self.system.dubins_params().validate()?;
                self.tube.detection_params().validate()?;
                if !self.system.wind.iter().all(|w| w.is_finite()) {
                    bail!("system.wind must be finite");
                }
            }
            SystemKind::Gridworld => {
                let bands = self.bands()?;
                if let Some(h) = self.tube.horizon {
                    if h + 1 != bands.len() {
                        bail!(
                            "tube.horizon = {h} but {} ring bands give horizon {}",
                            bands.len(),
                            bands.len() - 1
                        );
                    }
                }
            }
        }
        if !(self.solver.threshold > 0.0 && self.solver.threshold < 1.0) {
            bail!("solver.threshold must lie in (0, 1), got {}", self.solver.threshold);
        }
        if self.trials == 0 {
            bail!("trials must be positive");
        }
        self.grid(self.mode)?;
        Ok(())
    }

    pub fn tube_kind(&self) -> TubeKind {
        self.tube.kind.unwrap_or(match self.system.kind {
            SystemKind::Dubins => TubeKind::Detection,
            SystemKind::Gridworld => TubeKind::Ring,
        })
    }

    pub fn bands(&self) -> Result<Vec<(usize, usize)>> {
        let bands = match &self.tube.bands {
            Some(b) => b.clone(),
            None if self.system.m == 7 => SEVEN_BANDS.to_vec(),
            None => bail!("tube.bands is required for a {0}×{0} board", self.system.m),
        };
        if bands.is_empty() {
            bail!("tube.bands must not be empty");
        }
        Ok(bands.into_iter().map(|[lo, hi]| (lo, hi)).collect())
    }

    pub fn horizon(&self) -> usize {
        match self.system.kind {
            SystemKind::Dubins => self.tube.horizon.unwrap_or(10),
            SystemKind::Gridworld => self.bands().map(|b| b.len() - 1).unwrap_or(0),
        }
    }

    pub fn workers(&self) -> Option<usize> {
        (self.workers > 0).then_some(self.workers)
    }

    /// Axes used when the grid section leaves them unset.
    pub fn default_axes(&self, mode: Mode) -> Vec<AxisSpec> {
        match self.system.kind {
            SystemKind::Dubins => {
                let pos = |n| AxisSpec::bounded(-1.2, 1.2, n);
                match mode {
                    Mode::Reduced => vec![pos(51), pos(51), AxisSpec::periodic(0.0, TAU, 51)],
                    Mode::Full => {
                        let pose = [
                            AxisSpec::bounded(-1.0, 1.0, 5),
                            AxisSpec::bounded(-1.0, 1.0, 5),
                            AxisSpec::periodic(0.0, TAU, 5),
                        ];
                        pose.iter().chain(&pose).copied().collect()
                    }
                }
            }
            SystemKind::Gridworld => {
                let m = self.system.m;
                let cells = AxisSpec::periodic(0.0, m as f64, m);
                match mode {
                    Mode::Reduced => vec![cells, cells],
                    Mode::Full => vec![cells, cells, AxisSpec::periodic(0.0, 4.0, 4)],
                }
            }
        }
    }

    /// The solve grid for `mode`, with `[grid]` overrides applied.
    pub fn grid(&self, mode: Mode) -> Result<Grid> {
        let mut axes = self.default_axes(mode);
        let dim = axes.len();
        let g = &self.grid;
        if let Some(p) = &g.points {
            for (a, v) in axes.iter_mut().zip(p.expand(dim, "points")?) {
                a.points = v;
            }
        }
        if let Some(p) = &g.lower {
            for (a, v) in axes.iter_mut().zip(p.expand(dim, "lower")?) {
                a.lower = v;
            }
        }
        if let Some(p) = &g.upper {
            for (a, v) in axes.iter_mut().zip(p.expand(dim, "upper")?) {
                a.upper = v;
            }
        }
        if let Some(p) = &g.periodic {
            for (a, v) in axes.iter_mut().zip(p.expand(dim, "periodic")?) {
                a.periodic = v;
            }
        }
        Ok(Grid::new(axes)?)
    }

    /// Same as [`ScenarioConfig::grid`] with every axis resampled at
    /// `points` nodes.
    pub fn grid_with_points(&self, mode: Mode, points: usize) -> Result<Grid> {
        let axes = self
            .grid(mode)?
            .axes()
            .iter()
            .map(|a| AxisSpec { points, ..*a })
            .collect();
        Ok(Grid::new(axes)?)
    }

    pub fn boundary(&self, mode: Mode) -> BoundaryPolicy {
        self.solver.boundary.unwrap_or(match (self.system.kind, mode) {
            (SystemKind::Dubins, Mode::Reduced) => BoundaryPolicy::ConstantSafe,
            _ => BoundaryPolicy::Clamp,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_reference_scenario() {
        let c = ScenarioConfig::parse("").unwrap();
        assert_eq!(c.mode, Mode::Reduced);
        assert_eq!(c.system.dubins_params(), DubinsParams::default());
        let d = c.tube.detection_params();
        assert_eq!(d.range, 0.5);
        assert!((d.half_angle - 15f64.to_radians()).abs() < 1e-15);
        assert_eq!(c.horizon(), 10);
        let g = c.grid(Mode::Reduced).unwrap();
        assert_eq!(g.len(), 51 * 51 * 51);
        assert!(g.axes()[2].periodic);
        assert_eq!(c.boundary(Mode::Reduced), BoundaryPolicy::ConstantSafe);
        assert_eq!(c.grid(Mode::Full).unwrap().dim(), 6);
    }

    #[test]
    fn grid_overrides() {
        let c = ScenarioConfig::parse("[grid]\npoints = [11, 13, 8]\nlower = -2.0\n").unwrap();
        let g = c.grid(Mode::Reduced).unwrap();
        assert_eq!(g.axes()[1].points, 13);
        assert_eq!(g.axes()[2].lower, -2.0);
        assert_eq!(g.axes()[0].upper, 1.2);
        assert!(ScenarioConfig::parse("[grid]\npoints = [3, 3]\n").is_err());
    }

    #[test]
    fn gridworld_defaults() {
        let c = ScenarioConfig::parse("[system]\nkind = \"gridworld\"\n").unwrap();
        assert_eq!(c.tube_kind(), TubeKind::Ring);
        assert_eq!(c.horizon(), 3);
        assert_eq!(c.grid(Mode::Full).unwrap().len(), 7 * 7 * 4);
        assert!(ScenarioConfig::parse("[system]\nkind = \"gridworld\"\nm = 9\n").is_err());
        assert!(ScenarioConfig::parse("[system]\nkind = \"gridworld\"\n[tube]\nkind = \"detection\"\n").is_err());
        assert!(ScenarioConfig::parse("[system]\nkind = \"gridworld\"\n[tube]\nhorizon = 5\n").is_err());
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = ScenarioConfig::parse("mode = \"reduced\"\n\n[system]\nkind = \"boat\"\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 4"), "{err:#}");
        let err = ScenarioConfig::parse("[tube]\nrange = 0.5\ncolour = 3\n").unwrap_err();
        assert!(format!("{err:#}").contains("line 3"), "{err:#}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ScenarioConfig::parse("[tube]\nhalf_angle_deg = 190.0\n").is_err());
        assert!(ScenarioConfig::parse("[system]\nv_max = 0.0\n").is_err());
        assert!(ScenarioConfig::parse("[solver]\nthreshold = 1.0\n").is_err());
    }
}
