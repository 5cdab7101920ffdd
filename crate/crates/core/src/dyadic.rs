//! Dyadic intervals, matrix-valued step functions on uniform dyadic grids, and
//! the basic operations on them: noncommutative `L_p` norms, dyadic conditional
//! expectations and the trace pairing.
//!
//! Level convention: a [`DyadicInterval`] at level `n` has length `2^{-n}`.
//! Levels elsewhere in the literature are often shifted by one (`|I| = 2^{-k+1}`,
//! so `k = n + 1`); the conditional expectation `E_n` here averages over
//! intervals of length `2^{-n}` and the Haar wavelets at level `n` span the
//! martingale difference `E_{n+1} f − E_n f`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{check_exponent, invalid_param, Error, Result};
use crate::matrix::{MatrixValue, C64};

/// The dyadic interval `[j·2^{-n}, (j+1)·2^{-n})`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicInterval {
    pub level: i32,
    pub offset: i64,
}

impl DyadicInterval {
    pub const fn new(level: i32, offset: i64) -> Self {
        DyadicInterval { level, offset }
    }

    pub fn length(&self) -> f64 {
        2f64.powi(-self.level)
    }

    pub fn left(&self) -> f64 {
        self.offset as f64 * self.length()
    }

    pub fn right(&self) -> f64 {
        (self.offset + 1) as f64 * self.length()
    }

    pub fn center(&self) -> f64 {
        (self.offset as f64 + 0.5) * self.length()
    }

    pub fn parent(&self) -> Self {
        DyadicInterval::new(self.level - 1, self.offset.div_euclid(2))
    }

    pub fn children(&self) -> [Self; 2] {
        [
            DyadicInterval::new(self.level + 1, 2 * self.offset),
            DyadicInterval::new(self.level + 1, 2 * self.offset + 1),
        ]
    }

    /// The ancestor of `self` at a coarser (or equal) level.
    pub fn ancestor(&self, level: i32) -> Option<Self> {
        if level > self.level {
            return None;
        }
        let shift = (self.level - level) as u32;
        Some(DyadicInterval::new(level, self.offset >> shift.min(63)))
    }

    /// `true` when `other ⊆ self`.
    pub fn contains(&self, other: &Self) -> bool {
        other.level >= self.level && other.ancestor(self.level) == Some(*self)
    }

    pub fn contains_point(&self, x: f64) -> bool {
        self.left() <= x && x < self.right()
    }

    /// The unique interval at `level` containing `x`.
    pub fn containing(x: f64, level: i32) -> Self {
        let scaled = x * 2f64.powi(level);
        DyadicInterval::new(level, scaled.floor() as i64)
    }
}

/// Uniform dyadic grid: `(hi − lo)·2^depth` cells of width `2^{-depth}` covering
/// the integer window `[lo, hi)`, carrying `dim × dim` matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub depth: u32,
    pub lo: i64,
    pub hi: i64,
}

/// Largest supported grid depth.
pub const MAX_DEPTH: u32 = 24;

impl Grid {
    pub fn new(dim: usize, depth: u32, lo: i64, hi: i64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        if hi <= lo {
            return Err(Error::InvalidInput(format!("empty support window [{lo}, {hi})")));
        }
        if depth > MAX_DEPTH {
            return Err(Error::TooLarge(format!("grid depth {depth} exceeds {MAX_DEPTH}")));
        }
        Ok(Grid { dim, depth, lo, hi })
    }

    pub fn cells_per_unit(&self) -> usize {
        1usize << self.depth
    }

    pub fn n_cells(&self) -> usize {
        (self.hi - self.lo) as usize * self.cells_per_unit()
    }

    pub fn cell_width(&self) -> f64 {
        2f64.powi(-(self.depth as i32))
    }

    pub fn cell_interval(&self, k: usize) -> DyadicInterval {
        DyadicInterval::new(self.depth as i32, self.lo * self.cells_per_unit() as i64 + k as i64)
    }

    pub fn cell_center(&self, k: usize) -> f64 {
        self.lo as f64 + (k as f64 + 0.5) * self.cell_width()
    }

    /// Range of cell indices covered by `interval ∩ [lo, hi)`; `None` when the
    /// interval is finer than the grid.
    pub fn cell_range(&self, interval: &DyadicInterval) -> Option<std::ops::Range<usize>> {
        if interval.level > self.depth as i32 {
            return None;
        }
        let total = self.n_cells() as i64;
        let (start, len) = if interval.level >= 0 {
            let shift = self.depth as i32 - interval.level;
            let len = 1i64 << shift;
            (interval.offset * len - self.lo * self.cells_per_unit() as i64, len)
        } else {
            let len_units = 1i64 << (-interval.level);
            let len = len_units << self.depth;
            (interval.offset * len - self.lo * self.cells_per_unit() as i64, len)
        };
        let a = start.clamp(0, total);
        let b = (start + len).clamp(0, total);
        Some(a as usize..b as usize)
    }

    /// `true` when the interval lies inside the window and is not finer than the grid.
    pub fn covers(&self, interval: &DyadicInterval) -> bool {
        if interval.level > self.depth as i32 {
            return false;
        }
        interval.left() >= self.lo as f64 && interval.right() <= self.hi as f64
    }

    pub fn compatible(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::Shape(format!("grid mismatch: {self:?} vs {other:?}")));
        }
        Ok(())
    }
}

/// Matrix-valued step function, constant on every cell of its grid and zero
/// outside its window.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction {
    grid: Grid,
    cells: Vec<MatrixValue>,
}

impl StepFunction {
    pub fn zeros(grid: Grid) -> Self {
        StepFunction { grid, cells: vec![MatrixValue::zeros(grid.dim); grid.n_cells()] }
    }

    pub fn from_cells(grid: Grid, cells: Vec<MatrixValue>) -> Result<Self> {
        if cells.len() != grid.n_cells() {
            return Err(Error::Shape(format!(
                "expected {} cells, got {}",
                grid.n_cells(),
                cells.len()
            )));
        }
        if let Some(k) = cells.iter().position(|c| c.dim() != grid.dim) {
            return Err(Error::Shape(format!("cell {k} has dimension {} instead of {}", cells[k].dim(), grid.dim)));
        }
        if let Some(k) = cells.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("cell {k} has non-finite entries")));
        }
        Ok(StepFunction { grid, cells })
    }

    /// Samples `value` at every cell center.
    pub fn from_fn(grid: Grid, value: impl Fn(f64) -> MatrixValue) -> Result<Self> {
        let cells = (0..grid.n_cells()).map(|k| value(grid.cell_center(k))).collect();
        Self::from_cells(grid, cells)
    }

    /// `value · 1_I` for a dyadic interval `I` on the grid.
    pub fn indicator(grid: Grid, interval: &DyadicInterval, value: &MatrixValue) -> Result<Self> {
        let range = grid
            .cell_range(interval)
            .ok_or_else(|| Error::InvalidParameter(format!("{interval:?} is finer than the grid")))?;
        let mut f = StepFunction::zeros(grid);
        for k in range {
            f.cells[k] = value.clone();
        }
        Ok(f)
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn cells(&self) -> &[MatrixValue] {
        &self.cells
    }

    pub fn cell(&self, k: usize) -> &MatrixValue {
        &self.cells[k]
    }

    pub fn cells_mut(&mut self) -> &mut [MatrixValue] {
        &mut self.cells
    }

    pub fn into_cells(self) -> Vec<MatrixValue> {
        self.cells
    }

    pub fn map(&self, f: impl Fn(&MatrixValue) -> MatrixValue) -> Self {
        StepFunction { grid: self.grid, cells: self.cells.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&MatrixValue) -> Result<MatrixValue>) -> Result<Self> {
        let cells = self.cells.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(StepFunction { grid: self.grid, cells })
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&MatrixValue, &MatrixValue) -> MatrixValue) -> Result<Self> {
        self.grid.compatible(&other.grid)?;
        let cells = self.cells.iter().zip(&other.cells).map(|(a, b)| f(a, b)).collect();
        Ok(StepFunction { grid: self.grid, cells })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|a| a.scale(s))
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        self.map(|a| a.scale_complex(s))
    }

    pub fn adjoint(&self) -> Self {
        self.map(MatrixValue::adjoint)
    }

    /// `f*f` cellwise.
    pub fn gram(&self) -> Self {
        self.map(MatrixValue::gram)
    }

    /// `∫ f`, exact on step functions.
    pub fn integrate(&self) -> MatrixValue {
        let mut acc = MatrixValue::zeros(self.dim());
        for c in &self.cells {
            acc += c;
        }
        acc.scale(self.grid.cell_width())
    }

    pub fn max_cell_diff(&self, other: &Self) -> Result<f64> {
        self.grid.compatible(&other.grid)?;
        Ok(self.cells.iter().zip(&other.cells).fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(b))))
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.cells.iter().fold(0.0, |m, c| m.max(c.max_abs_entry()))
    }

    pub fn is_zero(&self) -> bool {
        self.max_abs_entry() == 0.0
    }

    /// Noncommutative `L_p(L_∞ ⊗ M_d)` norm, `(Σ_k |cell| Σ_i σ_i(f_k)^p)^{1/p}`;
    /// `p = ∞` gives the largest singular value over all cells.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        if let Some(k) = self.cells.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("cell {k} has non-finite entries")));
        }
        let spectra: Vec<Vec<f64>> = self.cells.iter().map(MatrixValue::singular_values).collect();
        Ok(schatten_integral_norm(&spectra, self.grid.cell_width(), p))
    }

    /// Dyadic conditional expectation onto intervals of length `2^{-level}`.
    pub fn conditional_expectation(&self, level: i32) -> Result<Self> {
        if level < 0 || level > self.grid.depth as i32 {
            return invalid_param(format!(
                "conditional expectation level {level} outside 0..={}",
                self.grid.depth
            ));
        }
        let block = 1usize << (self.grid.depth as i32 - level);
        let mut cells = Vec::with_capacity(self.cells.len());
        for chunk in self.cells.chunks(block) {
            let mut acc = MatrixValue::zeros(self.dim());
            for c in chunk {
                acc += c;
            }
            let avg = acc.scale(1.0 / block as f64);
            cells.extend(std::iter::repeat_n(avg, block));
        }
        Ok(StepFunction { grid: self.grid, cells })
    }

    /// `τ∫ g* f`; conjugate-symmetric in its arguments.
    pub fn trace_pair(&self, f: &Self) -> Result<C64> {
        trace_pair(self, f)
    }

    /// Restriction of the window to `[lo, hi)` (which must lie inside it).
    pub fn restrict(&self, lo: i64, hi: i64) -> Result<Self> {
        if lo < self.grid.lo || hi > self.grid.hi || hi <= lo {
            return invalid_param(format!("window [{lo}, {hi}) not inside [{}, {})", self.grid.lo, self.grid.hi));
        }
        let per = self.grid.cells_per_unit();
        let a = (lo - self.grid.lo) as usize * per;
        let b = (hi - self.grid.lo) as usize * per;
        Ok(StepFunction {
            grid: Grid { lo, hi, ..self.grid },
            cells: self.cells[a..b].to_vec(),
        })
    }
}

/// `τ∫ g* f = Σ_k |cell| τ(g_k* f_k)`.
pub fn trace_pair(g: &StepFunction, f: &StepFunction) -> Result<C64> {
    g.grid.compatible(&f.grid)?;
    let sum: C64 = g.cells.iter().zip(&f.cells).map(|(a, b)| a.trace_inner(b)).sum();
    Ok(sum * g.grid.cell_width())
}

/// `(Σ_k w Σ_i s_{k,i}^p)^{1/p}` for per-cell spectra `s_k` of nonnegative values,
/// evaluated with a global rescaling so that large `p` neither overflows nor
/// underflows. `p = ∞` returns the maximum.
pub fn schatten_integral_norm(spectra: &[Vec<f64>], weight: f64, p: f64) -> f64 {
    let top = spectra.iter().flatten().fold(0.0_f64, |m, &s| m.max(s));
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    let mut sum = 0.0;
    for spectrum in spectra {
        let mut cell = 0.0;
        for &s in spectrum {
            if s > 0.0 {
                cell += (s / top).powf(p);
            }
        }
        sum += weight * cell;
    }
    top * sum.powf(1.0 / p)
}

/// Sign assignment `ε_I ∈ {±1}` on a finite set of dyadic intervals.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SignPattern {
    signs: BTreeMap<DyadicInterval, i8>,
}

impl SignPattern {
    pub fn new() -> Self {
        SignPattern::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (DyadicInterval, bool)>) -> Self {
        let signs = pairs
            .into_iter()
            .map(|(i, positive)| (i, if positive { 1 } else { -1 }))
            .collect();
        SignPattern { signs }
    }

    pub fn insert(&mut self, interval: DyadicInterval, positive: bool) {
        self.signs.insert(interval, if positive { 1 } else { -1 });
    }

    pub fn sign(&self, interval: &DyadicInterval) -> Option<f64> {
        self.signs.get(interval).map(|&s| s as f64)
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn intervals(&self) -> impl Iterator<Item = &DyadicInterval> {
        self.signs.keys()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(dim: usize, depth: u32, lo: i64, hi: i64) -> Grid {
        Grid::new(dim, depth, lo, hi).unwrap()
    }

    fn haar_unit(depth: u32) -> StepFunction {
        let g = grid(1, depth, 0, 1);
        StepFunction::from_fn(g, |x| MatrixValue::scalar(1, C64::new(if x < 0.5 { 1.0 } else { -1.0 }, 0.0)))
            .unwrap()
    }

    #[test]
    fn interval_geometry() {
        let i = DyadicInterval::new(2, 3);
        assert_eq!(i.length(), 0.25);
        assert_eq!(i.center(), 0.875);
        assert_eq!(i.parent(), DyadicInterval::new(1, 1));
        assert_eq!(DyadicInterval::new(0, -1).children()[1], DyadicInterval::new(1, -1));
        assert_eq!(DyadicInterval::new(3, -3).parent(), DyadicInterval::new(2, -2));
        assert!(DyadicInterval::new(0, 0).contains(&DyadicInterval::new(3, 7)));
        assert!(!DyadicInterval::new(0, 0).contains(&DyadicInterval::new(3, 8)));
        assert!(DyadicInterval::new(-2, -1).contains(&DyadicInterval::new(1, -8)));
        assert_eq!(DyadicInterval::containing(-0.1, 1), DyadicInterval::new(1, -1));
    }

    #[test]
    fn lp_norm_examples() {
        let g = grid(2, 3, 0, 1);
        assert_eq!(StepFunction::zeros(g).lp_norm(3.0).unwrap(), 0.0);
        let one = StepFunction::from_fn(grid(1, 2, 0, 1), |_| MatrixValue::identity(1)).unwrap();
        assert!((one.lp_norm(3.0).unwrap() - 1.0).abs() < 1e-15);
        let diag = StepFunction::from_fn(g, |_| MatrixValue::diagonal(&[1.0, 2.0])).unwrap();
        assert!((diag.lp_norm(2.0).unwrap() - 5f64.sqrt()).abs() < 1e-14);
        assert!((diag.lp_norm(f64::INFINITY).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(diag.lp_norm(0.5), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn lp_norm_large_exponent_is_stable() {
        let g = grid(1, 4, 0, 2);
        let f = StepFunction::from_fn(g, |x| MatrixValue::scalar(1, C64::new(1e3 * (1.0 + x), 0.0))).unwrap();
        let big = f.lp_norm(65536.0).unwrap();
        let sup = f.lp_norm(f64::INFINITY).unwrap();
        assert!(big.is_finite() && big <= sup * (1.0 + 1e-12) && big >= sup * 0.999);
    }

    #[test]
    fn conditional_expectation_examples() {
        let h = haar_unit(3);
        let e0 = h.conditional_expectation(0).unwrap();
        assert!(e0.is_zero());
        let e1 = h.conditional_expectation(1).unwrap();
        assert_eq!(e1, h);
        assert!(h.conditional_expectation(4).is_err());
        assert!(h.conditional_expectation(-1).is_err());
    }

    #[test]
    fn haar_pairing() {
        let h = haar_unit(2);
        assert!((h.trace_pair(&h).unwrap() - C64::new(1.0, 0.0)).norm() < 1e-15);
        let g = grid(1, 2, 0, 2);
        let left = StepFunction::from_fn(g, |x| MatrixValue::scalar(1, C64::new(if x < 1.0 { 1.0 } else { 0.0 }, 0.0))).unwrap();
        let right = StepFunction::from_fn(g, |x| MatrixValue::scalar(1, C64::new(if x >= 1.0 { 1.0 } else { 0.0 }, 0.0))).unwrap();
        assert_eq!(left.trace_pair(&right).unwrap(), C64::new(0.0, 0.0));
        let other = StepFunction::zeros(grid(1, 3, 0, 2));
        assert!(matches!(left.trace_pair(&other), Err(Error::Shape(_))));
    }

    #[test]
    fn cell_ranges() {
        let g = grid(1, 3, -1, 2);
        assert_eq!(g.cell_range(&DyadicInterval::new(0, -1)), Some(0..8));
        assert_eq!(g.cell_range(&DyadicInterval::new(1, 1)), Some(12..16));
        assert_eq!(g.cell_range(&DyadicInterval::new(-1, 0)), Some(8..24));
        assert_eq!(g.cell_range(&DyadicInterval::new(-2, -1)), Some(0..8));
        assert_eq!(g.cell_range(&DyadicInterval::new(4, 0)), None);
        assert!(g.covers(&DyadicInterval::new(0, 1)));
        assert!(g.covers(&DyadicInterval::new(-1, 0)));
        assert!(!g.covers(&DyadicInterval::new(-1, -1)));
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid(1, 1, 0, 1);
        let cells = vec![MatrixValue::scalar(1, C64::new(f64::NAN, 0.0)), MatrixValue::zeros(1)];
        assert!(matches!(StepFunction::from_cells(g, cells), Err(Error::InvalidInput(_))));
    }
}
