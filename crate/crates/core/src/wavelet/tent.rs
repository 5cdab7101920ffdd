use std::collections::BTreeMap;

use super::{synthesize, CoefficientField, LevelRange, WaveletBasis};
use crate::dyadic::{DyadicInterval, Grid, StepFunction};
use crate::error::{Error, Result};
use crate::matrix::MatrixValue;

/// Values of `g_I` on the grid cells of `I ∩ window`, starting at cell `start`.
#[derive(Clone, Debug, PartialEq)]
pub struct TentEntry {
    pub start: usize,
    pub cells: Vec<MatrixValue>,
}

/// A finite family `(g_I)` of step functions with `g_I` supported in `I`.
#[derive(Clone, Debug, PartialEq)]
pub struct TentField {
    grid: Grid,
    entries: BTreeMap<DyadicInterval, TentEntry>,
}

impl TentField {
    pub fn new(grid: Grid) -> Self {
        TentField { grid, entries: BTreeMap::new() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&DyadicInterval, &TentEntry)> {
        self.entries.iter()
    }

    pub fn get(&self, interval: &DyadicInterval) -> Option<&TentEntry> {
        self.entries.get(interval)
    }

    /// Inserts `g_I` given by its values on the cells of `I ∩ window`.
    pub fn insert_local(&mut self, interval: DyadicInterval, cells: Vec<MatrixValue>) -> Result<()> {
        let range = match self.grid.cell_range(&interval) {
            Some(r) if !r.is_empty() => r,
            _ => return Err(Error::InvalidInput(format!("interval {interval:?} does not meet the grid at its resolution"))),
        };
        if cells.len() != range.len() {
            return Err(Error::Shape(format!("{interval:?} spans {} cells, got {}", range.len(), cells.len())));
        }
        if let Some(c) = cells.iter().find(|c| c.dim() != self.grid.dim) {
            return Err(Error::Shape(format!("tent entry of dim {} in a dim {} field", c.dim(), self.grid.dim)));
        }
        self.entries.insert(interval, TentEntry { start: range.start, cells });
        Ok(())
    }

    /// Inserts `g_I` given on the whole grid; fails if `g` is nonzero outside `I`.
    pub fn insert_function(&mut self, interval: DyadicInterval, g: &StepFunction) -> Result<()> {
        self.grid.compatible(&g.grid())?;
        let range = self.grid.cell_range(&interval).unwrap_or(0..0);
        if let Some(k) = (0..g.cells().len()).find(|k| !range.contains(k) && g.cell(*k).max_abs_entry() != 0.0) {
            return Err(Error::InvalidInput(format!(
                "g_I for {interval:?} is nonzero on cell {k}, outside its interval"
            )));
        }
        self.insert_local(interval, g.cells()[range].to_vec())
    }

    /// `Σ_I g_I(x)* g_I(x)` cell by cell.
    pub fn column_gram(&self) -> StepFunction {
        let mut out = StepFunction::zeros(self.grid);
        let cells = out.cells_mut();
        for e in self.entries.values() {
            for (k, c) in e.cells.iter().enumerate() {
                cells[e.start + k] += &c.gram();
            }
        }
        out
    }
}

/// `Φ(c)_I = c_I |I|^{-1/2} 1_I`, restricted to the grid window.
pub fn embed_phi(c: &CoefficientField) -> TentField {
    let grid = c.grid();
    let mut out = TentField::new(grid);
    for (interval, m) in c.entries() {
        if let Some(range) = grid.cell_range(interval).filter(|r| !r.is_empty()) {
            let value = m.scale(interval.length().powf(-0.5));
            out.entries.insert(*interval, TentEntry { start: range.start, cells: vec![value; range.len()] });
        }
    }
    out
}

/// `Ψ(g) = Σ_I (|I|^{-1/2} ∫_I g_I) w_I`.
pub fn project_psi(g: &TentField, basis: &WaveletBasis) -> Result<StepFunction> {
    let grid = g.grid();
    let h = grid.cell_width();
    let levels = match (g.entries.keys().map(|i| i.level).min(), g.entries.keys().map(|i| i.level).max()) {
        (Some(a), Some(b)) => LevelRange::new(a, b),
        _ => LevelRange::new(0, -1),
    };
    basis.check_levels(levels, grid.depth)?;
    let mut field = CoefficientField::new(grid, basis.kind(), levels);
    for (interval, e) in &g.entries {
        let mut acc = MatrixValue::zeros(grid.dim);
        for c in &e.cells {
            acc += c;
        }
        field.insert(*interval, acc.scale(h * interval.length().powf(-0.5)))?;
    }
    synthesize(&field, basis)
}
