use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rectangular cell-centred grid. Values are stored row-major: the last axis is contiguous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    cells: Vec<usize>,
    spacing: Vec<f64>,
    origin: Vec<f64>,
}

impl Grid {
    pub fn new(cells: Vec<usize>, spacing: Vec<f64>, origin: Vec<f64>) -> Result<Self> {
        let n = cells.len();
        if n == 0 {
            return Err(Error::InvalidGrid("grid needs at least one axis".into()));
        }
        if spacing.len() != n || origin.len() != n {
            return Err(Error::InvalidGrid(format!(
                "cells, spacing and origin lengths differ: {}, {}, {}",
                n,
                spacing.len(),
                origin.len()
            )));
        }
        if let Some(c) = cells.iter().find(|&&c| c < 3) {
            return Err(Error::InvalidGrid(format!("need at least 3 cells per axis, got {c}")));
        }
        if let Some(h) = spacing.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidGrid("origin must be finite".into()));
        }
        Ok(Self { cells, spacing, origin })
    }

    /// Grid covering the box `[lower, upper]` with the given cell counts.
    pub fn covering(lower: &[f64], upper: &[f64], cells: &[usize]) -> Result<Self> {
        if lower.len() != upper.len() || lower.len() != cells.len() {
            return Err(Error::InvalidGrid("lower, upper and cells lengths differ".into()));
        }
        let spacing = lower
            .iter()
            .zip(upper)
            .zip(cells)
            .map(|((a, b), &c)| (b - a) / c as f64)
            .collect();
        Self::new(cells.to_vec(), spacing, lower.to_vec())
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn len(&self) -> usize {
        self.cells.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Distance in the flat array between neighbours along `axis`.
    pub fn stride(&self, axis: usize) -> usize {
        self.cells[axis + 1..].iter().product()
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for axis in (0..self.dim()).rev() {
            idx[axis] = flat % self.cells[axis];
            flat /= self.cells[axis];
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.cells).fold(0, |acc, (&i, &c)| acc * c + i)
    }

    pub fn cell_bounds(&self, idx: &[usize]) -> (Vec<f64>, Vec<f64>) {
        let lower: Vec<f64> =
            (0..self.dim()).map(|j| self.origin[j] + idx[j] as f64 * self.spacing[j]).collect();
        let upper = lower.iter().zip(&self.spacing).map(|(l, h)| l + h).collect();
        (lower, upper)
    }

    pub fn cell_center(&self, idx: &[usize]) -> Vec<f64> {
        (0..self.dim())
            .map(|j| self.origin[j] + (idx[j] as f64 + 0.5) * self.spacing[j])
            .collect()
    }

    /// Upper corner of the domain.
    pub fn extent(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.origin[j] + self.cells[j] as f64 * self.spacing[j]).collect()
    }

    /// Halves every spacing `levels` times over the same domain.
    pub fn refined(&self, levels: u32) -> Grid {
        let f = 1usize << levels;
        Grid {
            cells: self.cells.iter().map(|c| c * f).collect(),
            spacing: self.spacing.iter().map(|h| h / f as f64).collect(),
            origin: self.origin.clone(),
        }
    }

    /// Companion grid under `y_j ↦ y_j / factor_j`: same cell counts, scaled spacing and origin.
    pub fn contracted(&self, factors: &[f64]) -> Result<Grid> {
        if factors.len() != self.dim() || factors.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::InvalidGrid(format!("bad contraction factors {factors:?}")));
        }
        Grid::new(
            self.cells.clone(),
            self.spacing.iter().zip(factors).map(|(h, f)| h / f).collect(),
            self.origin.iter().zip(factors).map(|(o, f)| o / f).collect(),
        )
    }
}

/// Cell averages on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: Grid) -> Self {
        let values = vec![0.0; grid.len()];
        Self { grid, values }
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.cell_center(&grid.multi_index(i)))).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ u_i ΔV`, summed in index order.
    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.cell_volume()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|x| x.is_finite())
    }

    pub fn same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field { grid: self.grid.clone(), values: self.values.iter().map(|&x| f(x)).collect() }
    }

    /// Same values on another grid with the same cell counts.
    pub fn with_grid(self, grid: Grid) -> Result<Field> {
        Field::new(grid, self.values)
    }
}
