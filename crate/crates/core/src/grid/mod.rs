//! Rectilinear grids with optional periodic axes, and scalar value fields
//! sampled on them.
//!
//! Nodes are enumerated row-major (last axis fastest). That flat ordering is
//! used everywhere: value storage, policy tables, CSV and raster exports.

mod export;

pub use export::{read_raster, write_csv, write_raster, RasterHeader};

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Upper bound on grid dimension; interpolation keeps per-axis state on the stack.
pub const MAX_DIMS: usize = 8;

/// Fractional cell offsets closer than this to an integer are snapped onto
/// the node, so that queries at node coordinates reproduce stored values.
const SNAP: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid needs at least one axis")]
    NoAxes,
    #[error("grid has {0} axes, at most {MAX_DIMS} are supported")]
    TooManyAxes(usize),
    #[error("axis {axis}: {reason}")]
    InvalidAxis { axis: usize, reason: String },
    #[error("index {index} out of range for axis {axis} with {points} points")]
    IndexOutOfRange { axis: usize, index: usize, points: usize },
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {axis} is not finite")]
    NonFiniteCoordinate { axis: usize },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("value at node {node} is not finite")]
    NonFiniteValue { node: usize },
}

/// One axis of a rectilinear grid.
///
/// A periodic axis covers `[lower, upper)` and wraps; its spacing is
/// `(upper - lower) / points`. A bounded axis includes both endpoints as
/// nodes and has spacing `(upper - lower) / (points - 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSpec {
    pub lower: f64,
    pub upper: f64,
    pub points: usize,
    #[serde(default)]
    pub periodic: bool,
}

impl AxisSpec {
    pub fn bounded(lower: f64, upper: f64, points: usize) -> Self {
        AxisSpec {
            lower,
            upper,
            points,
            periodic: false,
        }
    }

    pub fn periodic(lower: f64, upper: f64, points: usize) -> Self {
        AxisSpec {
            lower,
            upper,
            points,
            periodic: true,
        }
    }

    fn validate(&self, axis: usize) -> Result<(), GridError> {
        let bad = |reason: &str| {
            Err(GridError::InvalidAxis {
                axis,
                reason: reason.to_string(),
            })
        };
        if !self.lower.is_finite() || !self.upper.is_finite() {
            return bad("bounds must be finite");
        }
        if self.lower >= self.upper {
            return bad("lower bound must be below upper bound");
        }
        if self.points < 2 {
            return bad("at least two points are required");
        }
        Ok(())
    }

    #[inline]
    pub fn spacing(&self) -> f64 {
        if self.periodic {
            (self.upper - self.lower) / self.points as f64
        } else {
            (self.upper - self.lower) / (self.points - 1) as f64
        }
    }

    /// Length of one period, for periodic axes.
    pub fn period(&self) -> Option<f64> {
        self.periodic.then_some(self.upper - self.lower)
    }

    #[inline]
    pub fn coordinate(&self, index: usize) -> f64 {
        self.lower + index as f64 * self.spacing()
    }

    /// Position of `p` in cell units. Periodic axes are wrapped into
    /// `[0, points)`; bounded axes are returned unclamped.
    #[inline]
    fn cell_position(&self, p: f64) -> f64 {
        let t = (p - self.lower) / self.spacing();
        let t = if self.periodic {
            crate::angle::wrap(t, self.points as f64)
        } else {
            t
        };
        let r = t.round();
        if (t - r).abs() < SNAP {
            if self.periodic && r as usize >= self.points {
                0.0
            } else {
                r
            }
        } else {
            t
        }
    }

    /// Index of the node nearest to `p`; bounded axes clamp.
    pub fn nearest_index(&self, p: f64) -> usize {
        let t = self.cell_position(p);
        if self.periodic {
            (t.round() as usize) % self.points
        } else {
            t.round().clamp(0.0, (self.points - 1) as f64) as usize
        }
    }
}

/// How interpolation treats points outside a bounded axis.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryPolicy {
    /// Project the point onto the axis range.
    #[default]
    Clamp,
    /// Any out-of-range coordinate evaluates to 0.
    ConstantSafe,
    /// Any out-of-range coordinate evaluates to 1.
    ConstantUnsafe,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    axes: Vec<AxisSpec>,
    strides: Vec<usize>,
    len: usize,
}

impl Grid {
    pub fn new(axes: Vec<AxisSpec>) -> Result<Self, GridError> {
        if axes.is_empty() {
            return Err(GridError::NoAxes);
        }
        if axes.len() > MAX_DIMS {
            return Err(GridError::TooManyAxes(axes.len()));
        }
        for (i, a) in axes.iter().enumerate() {
            a.validate(i)?;
        }
        let mut strides = vec![1; axes.len()];
        for d in (0..axes.len() - 1).rev() {
            strides[d] = strides[d + 1] * axes[d + 1].points;
        }
        let len = strides[0] * axes[0].points;
        Ok(Grid { axes, strides, len })
    }

    pub fn axes(&self) -> &[AxisSpec] {
        &self.axes
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Per-axis period (`None` for bounded axes).
    pub fn periods(&self) -> Vec<Option<f64>> {
        self.axes.iter().map(AxisSpec::period).collect()
    }

    pub fn ravel(&self, index: &[usize]) -> Result<usize, GridError> {
        self.check_index(index)?;
        Ok(index.iter().zip(&self.strides).map(|(i, s)| i * s).sum())
    }

    /// Writes the multi-index of flat node `flat` into `out`.
    pub fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for (o, s) in out.iter_mut().zip(&self.strides) {
            *o = flat / s;
            flat %= s;
        }
    }

    /// Coordinates of the node at `index`.
    pub fn node_point(&self, index: &[usize]) -> Result<Vec<f64>, GridError> {
        self.check_index(index)?;
        Ok(self.axes.iter().zip(index).map(|(a, &i)| a.coordinate(i)).collect())
    }

    /// Coordinates of flat node `flat`, written into `out`.
    pub fn flat_node_point(&self, mut flat: usize, out: &mut [f64]) {
        for ((o, s), a) in out.iter_mut().zip(&self.strides).zip(&self.axes) {
            *o = a.coordinate(flat / s);
            flat %= s;
        }
    }

    /// Multi-index of the node nearest to `point` (periodic axes wrap,
    /// bounded axes clamp).
    pub fn nearest_node(&self, point: &[f64]) -> Result<Vec<usize>, GridError> {
        self.check_point(point)?;
        Ok(self.axes.iter().zip(point).map(|(a, &p)| a.nearest_index(p)).collect())
    }

    fn check_index(&self, index: &[usize]) -> Result<(), GridError> {
        if index.len() != self.dim() {
            return Err(GridError::DimensionMismatch {
                expected: self.dim(),
                got: index.len(),
            });
        }
        for (axis, (&i, a)) in index.iter().zip(&self.axes).enumerate() {
            if i >= a.points {
                return Err(GridError::IndexOutOfRange {
                    axis,
                    index: i,
                    points: a.points,
                });
            }
        }
        Ok(())
    }

    fn check_point(&self, point: &[f64]) -> Result<(), GridError> {
        if point.len() != self.dim() {
            return Err(GridError::DimensionMismatch {
                expected: self.dim(),
                got: point.len(),
            });
        }
        if let Some(axis) = point.iter().position(|p| p.is_nan()) {
            return Err(GridError::NonFiniteCoordinate { axis });
        }
        Ok(())
    }
}

/// A scalar field sampled on every node of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    grid: Arc<Grid>,
    values: Vec<f64>,
    boundary: BoundaryPolicy,
}

impl ValueField {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, boundary: BoundaryPolicy) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFiniteValue { node });
        }
        Ok(ValueField { grid, values, boundary })
    }

    /// Samples `f` at every node.
    pub fn from_fn(
        grid: Arc<Grid>,
        boundary: BoundaryPolicy,
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self, GridError> {
        let mut p = vec![0.0; grid.dim()];
        let values = (0..grid.len())
            .map(|n| {
                grid.flat_node_point(n, &mut p);
                f(&p)
            })
            .collect();
        Self::new(grid, values, boundary)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn boundary(&self) -> BoundaryPolicy {
        self.boundary
    }

    pub fn value_at(&self, index: &[usize]) -> Result<f64, GridError> {
        Ok(self.values[self.grid.ravel(index)?])
    }

    /// Multilinear interpolation over the `2^n` nodes enclosing `point`.
    ///
    /// Periodic axes wrap, so the cell between the last and first node is
    /// valid. Out-of-range coordinates on bounded axes follow the field's
    /// [`BoundaryPolicy`].
    pub fn interpolate(&self, point: &[f64]) -> Result<f64, GridError> {
        let grid = &*self.grid;
        let n = grid.dim();
        if point.len() != n {
            return Err(GridError::DimensionMismatch {
                expected: n,
                got: point.len(),
            });
        }

        let mut lo = [0usize; MAX_DIMS];
        let mut hi = [0usize; MAX_DIMS];
        let mut frac = [0.0f64; MAX_DIMS];

        for (d, (axis, &p)) in grid.axes.iter().zip(point).enumerate() {
            if p.is_nan() || (axis.periodic && !p.is_finite()) {
                return Err(GridError::NonFiniteCoordinate { axis: d });
            }
            let mut t = axis.cell_position(p);
            if axis.periodic {
                let i0 = (t.floor() as usize).min(axis.points - 1);
                lo[d] = i0;
                hi[d] = (i0 + 1) % axis.points;
                frac[d] = t - i0 as f64;
            } else {
                let last = (axis.points - 1) as f64;
                if t < 0.0 || t > last {
                    match self.boundary {
                        BoundaryPolicy::Clamp => t = t.clamp(0.0, last),
                        BoundaryPolicy::ConstantSafe => return Ok(0.0),
                        BoundaryPolicy::ConstantUnsafe => return Ok(1.0),
                    }
                }
                let i0 = (t.floor() as usize).min(axis.points - 2);
                lo[d] = i0;
                hi[d] = i0 + 1;
                frac[d] = t - i0 as f64;
            }
        }

        let mut acc = 0.0;
        'corners: for corner in 0..(1usize << n) {
            let mut w = 1.0;
            let mut idx = 0;
            for d in 0..n {
                let (i, wd) = if corner >> d & 1 == 1 {
                    (hi[d], frac[d])
                } else {
                    (lo[d], 1.0 - frac[d])
                };
                if wd == 0.0 {
                    continue 'corners;
                }
                w *= wd;
                idx += i * grid.strides[d];
            }
            acc += w * self.values[idx];
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn field(axes: Vec<AxisSpec>, values: Vec<f64>, boundary: BoundaryPolicy) -> ValueField {
        ValueField::new(Arc::new(Grid::new(axes).unwrap()), values, boundary).unwrap()
    }

    #[test]
    fn node_point_examples() {
        let g = Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 3)]).unwrap();
        assert_eq!(g.node_point(&[1]).unwrap(), vec![0.5]);

        let g = Grid::new(vec![AxisSpec::periodic(0.0, TAU, 4)]).unwrap();
        assert!((g.node_point(&[3]).unwrap()[0] - 1.5 * PI).abs() < 1e-15);

        let g = Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 2), AxisSpec::bounded(0.0, 1.0, 2)]).unwrap();
        assert_eq!(g.node_point(&[1, 1]).unwrap(), vec![1.0, 1.0]);
    }

    #[test]
    fn node_point_rejects_out_of_range() {
        let g = Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 3)]).unwrap();
        assert_eq!(
            g.node_point(&[3]),
            Err(GridError::IndexOutOfRange {
                axis: 0,
                index: 3,
                points: 3
            })
        );
        assert!(matches!(
            g.node_point(&[0, 0]),
            Err(GridError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invalid_axes_rejected() {
        assert!(Grid::new(vec![]).is_err());
        assert!(Grid::new(vec![AxisSpec::bounded(1.0, 1.0, 3)]).is_err());
        assert!(Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 1)]).is_err());
        assert!(Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 2); 9]).is_err());
    }

    #[test]
    fn row_major_last_axis_fastest() {
        let g = Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 2), AxisSpec::bounded(0.0, 1.0, 3)]).unwrap();
        assert_eq!(g.ravel(&[0, 1]).unwrap(), 1);
        assert_eq!(g.ravel(&[1, 0]).unwrap(), 3);
        let mut idx = [0; 2];
        g.unravel(5, &mut idx);
        assert_eq!(idx, [1, 2]);
    }

    #[test]
    fn interpolate_examples() {
        let zero = field(
            vec![AxisSpec::bounded(0.0, 1.0, 3), AxisSpec::periodic(0.0, TAU, 4)],
            vec![0.0; 12],
            BoundaryPolicy::Clamp,
        );
        assert_eq!(zero.interpolate(&[0.3, 2.0]).unwrap(), 0.0);

        let ramp = field(
            vec![AxisSpec::bounded(0.0, 1.0, 2)],
            vec![0.0, 1.0],
            BoundaryPolicy::Clamp,
        );
        assert_eq!(ramp.interpolate(&[0.25]).unwrap(), 0.25);

        let unsafe_out = field(
            vec![AxisSpec::bounded(0.0, 1.0, 2)],
            vec![0.0, 0.0],
            BoundaryPolicy::ConstantUnsafe,
        );
        assert_eq!(unsafe_out.interpolate(&[1.5]).unwrap(), 1.0);

        // midpoint of the wrap cell between node 3 (value 1) and node 0 (value 0)
        let wrap = field(
            vec![AxisSpec::periodic(0.0, TAU, 4)],
            vec![0.0, 0.0, 0.0, 1.0],
            BoundaryPolicy::Clamp,
        );
        assert!((wrap.interpolate(&[7.0 * PI / 4.0]).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn boundary_policies() {
        let axes = vec![AxisSpec::bounded(0.0, 1.0, 2)];
        let clamp = field(axes.clone(), vec![0.2, 0.8], BoundaryPolicy::Clamp);
        assert_eq!(clamp.interpolate(&[-3.0]).unwrap(), 0.2);
        assert_eq!(clamp.interpolate(&[f64::INFINITY]).unwrap(), 0.8);
        let safe = field(axes, vec![1.0, 1.0], BoundaryPolicy::ConstantSafe);
        assert_eq!(safe.interpolate(&[-0.01]).unwrap(), 0.0);
        assert_eq!(safe.interpolate(&[1.0]).unwrap(), 1.0);
    }

    #[test]
    fn interpolate_errors() {
        let f = field(
            vec![AxisSpec::bounded(0.0, 1.0, 2)],
            vec![0.0, 1.0],
            BoundaryPolicy::Clamp,
        );
        assert!(matches!(
            f.interpolate(&[0.1, 0.2]),
            Err(GridError::DimensionMismatch { .. })
        ));
        assert_eq!(
            f.interpolate(&[f64::NAN]),
            Err(GridError::NonFiniteCoordinate { axis: 0 })
        );
    }

    #[test]
    fn field_rejects_bad_values() {
        let g = Arc::new(Grid::new(vec![AxisSpec::bounded(0.0, 1.0, 2)]).unwrap());
        assert!(ValueField::new(g.clone(), vec![0.0], BoundaryPolicy::Clamp).is_err());
        assert_eq!(
            ValueField::new(g, vec![0.0, f64::NAN], BoundaryPolicy::Clamp),
            Err(GridError::NonFiniteValue { node: 1 })
        );
    }

    fn test_grid() -> Arc<Grid> {
        Arc::new(
            Grid::new(vec![
                AxisSpec::bounded(-1.2, 1.2, 7),
                AxisSpec::bounded(0.0, 2.0, 5),
                AxisSpec::periodic(0.0, TAU, 9),
            ])
            .unwrap(),
        )
    }

    fn arb_field() -> impl Strategy<Value = ValueField> {
        let g = test_grid();
        prop::collection::vec(0.0..=1.0f64, g.len())
            .prop_map(move |v| ValueField::new(g.clone(), v, BoundaryPolicy::Clamp).unwrap())
    }

    proptest! {
        #[test]
        fn exact_at_nodes(f in arb_field(), node in 0usize..315) {
            let mut p = [0.0; 3];
            f.grid().flat_node_point(node, &mut p);
            prop_assert!((f.interpolate(&p).unwrap() - f.values()[node]).abs() <= 1e-12);
        }

        #[test]
        fn within_cell_bounds(f in arb_field(), x in -1.2..1.2f64, y in 0.0..2.0f64, t in 0.0..TAU) {
            let g = f.grid();
            let v = f.interpolate(&[x, y, t]).unwrap();
            // enclosing cell corners
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            let cell = |a: &AxisSpec, p: f64| {
                let i = ((p - a.lower) / a.spacing()).floor() as usize;
                if a.periodic { [i % a.points, (i + 1) % a.points] } else { let i = i.min(a.points - 2); [i, i + 1] }
            };
            for i in cell(&g.axes()[0], x) {
                for j in cell(&g.axes()[1], y) {
                    for k in cell(&g.axes()[2], t) {
                        let val = f.value_at(&[i, j, k]).unwrap();
                        lo = lo.min(val);
                        hi = hi.max(val);
                    }
                }
            }
            prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }

        #[test]
        fn periodic_shift_invariant(f in arb_field(), x in -1.2..1.2f64, y in 0.0..2.0f64, t in -10.0..10.0f64) {
            let a = f.interpolate(&[x, y, t]).unwrap();
            let b = f.interpolate(&[x, y, t + TAU]).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn node_round_trip() {
        let g = test_grid();
        let mut idx = [0; 3];
        for n in 0..g.len() {
            g.unravel(n, &mut idx);
            let p = g.node_point(&idx).unwrap();
            assert_eq!(g.nearest_node(&p).unwrap(), idx.to_vec());
        }
    }
}
