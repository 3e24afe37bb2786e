//! Rectangular grid discretization of the deployment area and the two
//! grid-shaped fields built over it: normalized position estimates and
//! nonnegative constraint surfaces.

use crate::geometry::Point;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Cell values below this are treated as exact zeros before normalization.
pub const DENSITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidSpec(String),
    #[error("cell ({row}, {col}) outside {n_rows}x{n_cols} grid")]
    CellOutOfRange {
        row: usize,
        col: usize,
        n_rows: usize,
        n_cols: usize,
    },
    #[error("expected {expected} cells, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("cell {index} has invalid value {value}")]
    InvalidCell { index: usize, value: f64 },
    #[error("field has zero total mass")]
    ZeroMass,
    #[error("grids do not share the same spec")]
    SpecMismatch,
}

/// Geometry of the discretization.
///
/// Cells are square with side `resolution`; `n_cols = ceil(width / resolution)`
/// and `n_rows = ceil(height / resolution)`. Row index grows with `y`, column
/// index with `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    width: f64,
    height: f64,
    resolution: f64,
    n_cols: usize,
    n_rows: usize,
}

impl GridSpec {
    pub fn new(width: f64, height: f64, resolution: f64) -> Result<Self, GridError> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(width) || !ok(height) {
            return Err(GridError::InvalidSpec(format!(
                "area {width}x{height} must be positive"
            )));
        }
        if !ok(resolution) {
            return Err(GridError::InvalidSpec(format!(
                "resolution {resolution} must be positive"
            )));
        }
        // Guard against 99.99999 / 1 style rounding pushing a count up by one.
        let count = |extent: f64| {
            let q = extent / resolution;
            let r = q.round();
            if (q - r).abs() < 1e-9 {
                r as usize
            } else {
                q.ceil() as usize
            }
        };
        Ok(Self {
            width,
            height,
            resolution,
            n_cols: count(width).max(1),
            n_rows: count(height).max(1),
        })
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn height(&self) -> f64 {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cells(&self) -> usize {
        self.n_cols * self.n_rows
    }

    pub fn cell_area(&self) -> f64 {
        self.resolution * self.resolution
    }

    pub fn center(&self) -> Point {
        Point::new(self.width / 2.0, self.height / 2.0)
    }

    /// Row-major flat index of a cell.
    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.n_cols + col
    }

    pub fn cell_center(&self, row: usize, col: usize) -> Result<Point, GridError> {
        if row >= self.n_rows || col >= self.n_cols {
            return Err(GridError::CellOutOfRange {
                row,
                col,
                n_rows: self.n_rows,
                n_cols: self.n_cols,
            });
        }
        Ok(self.center_unchecked(row, col))
    }

    pub(crate) fn center_unchecked(&self, row: usize, col: usize) -> Point {
        Point::new(
            (col as f64 + 0.5) * self.resolution,
            (row as f64 + 0.5) * self.resolution,
        )
    }

    /// Centers of all cells in row-major order.
    pub fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.n_rows)
            .flat_map(move |r| (0..self.n_cols).map(move |c| self.center_unchecked(r, c)))
    }

    /// Cell containing `p`, or `None` outside the grid.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        if !p.is_finite() || p.x < 0.0 || p.y < 0.0 {
            return None;
        }
        let col = (p.x / self.resolution).floor() as usize;
        let row = (p.y / self.resolution).floor() as usize;
        (row < self.n_rows && col < self.n_cols).then_some((row, col))
    }
}

/// Free function form of [`GridSpec::cell_center`].
pub fn cell_center(spec: &GridSpec, row: usize, col: usize) -> Result<Point, GridError> {
    spec.cell_center(row, col)
}

fn validate_cells(spec: &GridSpec, cells: &[f64]) -> Result<(), GridError> {
    if cells.len() != spec.n_cells() {
        return Err(GridError::LengthMismatch {
            expected: spec.n_cells(),
            got: cells.len(),
        });
    }
    if let Some((index, &value)) = cells
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(GridError::InvalidCell { index, value });
    }
    Ok(())
}

fn apply_floor(cells: &mut [f64]) {
    for v in cells.iter_mut() {
        if *v < DENSITY_FLOOR {
            *v = 0.0;
        }
    }
}

/// A normalized probability density over the grid: `sum(cells) * cell_area == 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridEstimate {
    spec: GridSpec,
    cells: Vec<f64>,
}

impl GridEstimate {
    /// Normalizes arbitrary nonnegative cell mass into a density.
    pub fn from_unnormalized(spec: GridSpec, mut cells: Vec<f64>) -> Result<Self, GridError> {
        validate_cells(&spec, &cells)?;
        apply_floor(&mut cells);
        let mass: f64 = cells.iter().sum::<f64>() * spec.cell_area();
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(GridError::ZeroMass);
        }
        let scale = 1.0 / mass;
        cells.iter_mut().for_each(|v| *v *= scale);
        Ok(Self { spec, cells })
    }

    /// Uniform density over every cell of the grid.
    ///
    /// Equals `1 / (width * height)` whenever the resolution divides the area.
    pub fn uniform(spec: GridSpec) -> Self {
        let density = 1.0 / (spec.n_cells() as f64 * spec.cell_area());
        Self {
            spec,
            cells: vec![density; spec.n_cells()],
        }
    }

    /// All mass in a single cell.
    pub fn point_mass(spec: GridSpec, row: usize, col: usize) -> Result<Self, GridError> {
        spec.cell_center(row, col)?;
        let mut cells = vec![0.0; spec.n_cells()];
        cells[spec.index(row, col)] = 1.0 / spec.cell_area();
        Ok(Self { spec, cells })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn density_at(&self, p: Point) -> Option<f64> {
        self.spec
            .cell_of(p)
            .map(|(r, c)| self.cells[self.spec.index(r, c)])
    }

    /// `sum(cells) * cell_area`; 1 for every valid estimate.
    pub fn total_mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() * self.spec.cell_area()
    }

    /// Index of the highest-density cell (first on ties).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, &v) in self.cells.iter().enumerate() {
            if v > self.cells[best] {
                best = i;
            }
        }
        (best / self.spec.n_cols, best % self.spec.n_cols)
    }
}

/// A nonnegative, not identically zero likelihood surface over the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    spec: GridSpec,
    cells: Vec<f64>,
}

impl Constraint {
    pub fn new(spec: GridSpec, mut cells: Vec<f64>) -> Result<Self, GridError> {
        validate_cells(&spec, &cells)?;
        apply_floor(&mut cells);
        if cells.iter().all(|&v| v == 0.0) {
            return Err(GridError::ZeroMass);
        }
        Ok(Self { spec, cells })
    }

    /// The same value everywhere; intersecting with it leaves an estimate unchanged.
    pub fn constant(spec: GridSpec, value: f64) -> Result<Self, GridError> {
        Self::new(spec, vec![value; spec.n_cells()])
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn value_at(&self, p: Point) -> Option<f64> {
        self.spec
            .cell_of(p)
            .map(|(r, c)| self.cells[self.spec.index(r, c)])
    }

    /// Number of strictly positive cells.
    pub fn support(&self) -> usize {
        self.cells.iter().filter(|&&v| v > 0.0).count()
    }
}

impl From<GridEstimate> for Constraint {
    fn from(e: GridEstimate) -> Self {
        Constraint {
            spec: e.spec,
            cells: e.cells,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(w: f64, res: f64) -> GridSpec {
        GridSpec::new(w, w, res).unwrap()
    }

    #[test]
    fn cell_center_examples() {
        assert_eq!(spec(100.0, 1.0).cell_center(0, 0).unwrap(), Point::new(0.5, 0.5));
        assert_eq!(spec(100.0, 2.0).cell_center(0, 0).unwrap(), Point::new(1.0, 1.0));
        assert_eq!(
            spec(100.0, 1.0).cell_center(99, 99).unwrap(),
            Point::new(99.5, 99.5)
        );
    }

    #[test]
    fn cell_center_out_of_range() {
        let s = spec(100.0, 2.0);
        assert!(matches!(
            s.cell_center(50, 0),
            Err(GridError::CellOutOfRange { row: 50, .. })
        ));
        assert!(s.cell_center(0, 50).is_err());
    }

    #[test]
    fn counts_use_ceiling() {
        let s = GridSpec::new(10.0, 7.0, 3.0).unwrap();
        assert_eq!((s.n_cols(), s.n_rows()), (4, 3));
        let s = GridSpec::new(100.0, 100.0, 2.0).unwrap();
        assert_eq!(s.n_cells(), 2500);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(GridSpec::new(0.0, 10.0, 1.0).is_err());
        assert!(GridSpec::new(10.0, 10.0, 0.0).is_err());
        assert!(GridSpec::new(10.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn cell_of_roundtrips_centers() {
        let s = spec(20.0, 2.0);
        for r in 0..s.n_rows() {
            for c in 0..s.n_cols() {
                assert_eq!(s.cell_of(s.cell_center(r, c).unwrap()), Some((r, c)));
            }
        }
        assert_eq!(s.cell_of(Point::new(-0.1, 1.0)), None);
        assert_eq!(s.cell_of(Point::new(20.0, 1.0)), None);
    }

    #[test]
    fn constraint_validation() {
        let s = spec(2.0, 1.0);
        assert_eq!(Constraint::new(s, vec![0.0; 4]), Err(GridError::ZeroMass));
        assert!(matches!(
            Constraint::new(s, vec![1.0, -1.0, 0.0, 0.0]),
            Err(GridError::InvalidCell { index: 1, .. })
        ));
        assert!(matches!(
            Constraint::new(s, vec![1.0; 3]),
            Err(GridError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn floor_clamps_denormals() {
        let s = spec(2.0, 1.0);
        let e = GridEstimate::from_unnormalized(s, vec![1.0, 1e-310, 0.0, 1.0]).unwrap();
        assert_eq!(e.cells()[1], 0.0);
        assert!((e.total_mass() - 1.0).abs() < 1e-12);
    }
}
