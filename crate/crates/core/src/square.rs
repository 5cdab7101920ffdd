//! Littlewood–Paley square functions
//! `S_c(f)² = Σ_I |⟨f, w_I⟩|²/|I| · 1_I` and `S_r(f)² = Σ_I |⟨f, w_I⟩*|²/|I| · 1_I`,
//! their level truncations, and the tent-space norm.
//!
//! Profiles live on the coefficient field's grid; for Meyer fields this is the
//! restriction of the square function to the analysis window.

use rayon::prelude::*;

use crate::dyadic::StepFunction;
use crate::error::{check_exponent, invalid_param, Result};
use crate::matrix::{Eigh, MatrixValue, TOL_PSD};
use crate::wavelet::{CoefficientField, TentField};
use crate::dyadic::schatten_integral_norm;

/// A PSD square function `S` together with `S²` and the per-cell spectrum of `S²`.
#[derive(Clone, Debug)]
pub struct SquareProfile {
    squared: StepFunction,
    root: StepFunction,
    spectra: Vec<Eigh>,
}

impl SquareProfile {
    /// Builds `S = (S²)^{1/2}` cell by cell.
    pub fn from_squared(squared: StepFunction) -> Result<Self> {
        let spectra: Vec<Eigh> = squared
            .cells()
            .par_iter()
            .map(|c| c.hermitian_part().psd_spectrum(TOL_PSD))
            .collect::<Result<_>>()?;
        let root = StepFunction::from_cells(squared.grid(), spectra.iter().map(|e| e.map(f64::sqrt)).collect())?;
        Ok(SquareProfile { squared, root, spectra })
    }

    pub fn squared(&self) -> &StepFunction {
        &self.squared
    }

    pub fn root(&self) -> &StepFunction {
        &self.root
    }

    /// Clamped eigen-decompositions of `S²` per cell.
    pub fn spectra(&self) -> &[Eigh] {
        &self.spectra
    }

    /// `‖S‖_p`, computed from the eigenvalues of `S²`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        let roots: Vec<Vec<f64>> = self.spectra.iter().map(|e| e.values.iter().map(|v| v.sqrt()).collect()).collect();
        Ok(schatten_integral_norm(&roots, self.squared.grid().cell_width(), p))
    }
}

fn squared_profile(c: &CoefficientField, column: bool, max_level: i32) -> StepFunction {
    let grid = c.grid();
    let mut out = StepFunction::zeros(grid);
    let cells = out.cells_mut();
    for (interval, m) in c.entries() {
        if interval.level > max_level {
            continue;
        }
        let Some(range) = grid.cell_range(interval) else { continue };
        if range.is_empty() {
            continue;
        }
        let g = if column { m.gram() } else { m.cogram() }.scale(1.0 / interval.length());
        for cell in &mut cells[range] {
            *cell += &g;
        }
    }
    out
}

pub fn square_fn_col(c: &CoefficientField) -> Result<SquareProfile> {
    SquareProfile::from_squared(squared_profile(c, true, i32::MAX))
}

pub fn square_fn_row(c: &CoefficientField) -> Result<SquareProfile> {
    SquareProfile::from_squared(squared_profile(c, false, i32::MAX))
}

/// Column square function over levels `≤ max_level`. Valid truncation levels
/// run from one below the field's level range (empty sum) to its top.
pub fn truncated_square_fn(c: &CoefficientField, max_level: i32) -> Result<SquareProfile> {
    let levels = c.levels();
    if max_level < levels.min - 1 || max_level > levels.max {
        return invalid_param(format!(
            "truncation level {max_level} outside {}..={}",
            levels.min - 1,
            levels.max
        ));
    }
    SquareProfile::from_squared(squared_profile(c, true, max_level))
}

/// `‖(Σ_I g_I* g_I)^{1/2}‖_p`, the column tent-space (`L_p(ℓ²_c)`) norm.
pub fn tent_norm(g: &TentField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    SquareProfile::from_squared(g.column_gram())?.lp_norm(p)
}

/// Operator-norm supremum of a PSD profile, `‖S‖_∞`.
pub fn sup_norm(profile: &SquareProfile) -> f64 {
    profile.spectra.iter().map(|e| e.max().max(0.0).sqrt()).fold(0.0, f64::max)
}

/// `τ∫ S²`.
pub fn trace_integral(profile: &SquareProfile) -> f64 {
    let h = profile.squared.grid().cell_width();
    profile.squared.cells().iter().map(|c: &MatrixValue| c.trace().re).sum::<f64>() * h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{DyadicInterval, Grid};
    use crate::matrix::C64;
    use crate::rng::SeededRng;
    use crate::wavelet::{analyze, embed_phi, BasisKind, LevelRange, WaveletBasis};

    fn random_field(seed: u64) -> CoefficientField {
        let grid = Grid::new(2, 5, 0, 2).unwrap();
        let mut rng = SeededRng::new(seed);
        let f = StepFunction::from_cells(grid, (0..grid.n_cells()).map(|_| rng.gaussian_matrix(2)).collect()).unwrap();
        analyze(&f, &WaveletBasis::haar(), None).unwrap()
    }

    #[test]
    fn single_coefficient() {
        let grid = Grid::new(1, 3, 0, 2).unwrap();
        let mut c = CoefficientField::new(grid, BasisKind::Haar, LevelRange::new(0, 2));
        c.insert(DyadicInterval::new(0, 0), MatrixValue::identity(1)).unwrap();
        let s = square_fn_col(&c).unwrap();
        for (k, cell) in s.root().cells().iter().enumerate() {
            let expect = if k < 8 { 1.0 } else { 0.0 };
            assert!((cell.get(0, 0).re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn nilpotent_column_and_row() {
        let grid = Grid::new(2, 1, 0, 1).unwrap();
        let mut c = CoefficientField::new(grid, BasisKind::Haar, LevelRange::new(0, 0));
        let mut a = MatrixValue::zeros(2);
        a.set(0, 1, C64::new(1.0, 0.0));
        c.insert(DyadicInterval::new(0, 0), a).unwrap();
        let col = square_fn_col(&c).unwrap();
        let row = square_fn_row(&c).unwrap();
        assert!(col.root().cell(0).max_abs_diff(&MatrixValue::diagonal(&[0.0, 1.0])) < 1e-15);
        assert!(row.root().cell(0).max_abs_diff(&MatrixValue::diagonal(&[1.0, 0.0])) < 1e-15);
    }

    #[test]
    fn root_squares_back() {
        let s = square_fn_col(&random_field(3)).unwrap();
        for (r, q) in s.root().cells().iter().zip(s.squared().cells()) {
            assert!((r * r).max_abs_diff(q) <= 1e-10 * q.max_abs_entry().max(1.0));
        }
    }

    #[test]
    fn truncations_are_monotone_and_telescope() {
        let c = random_field(5);
        let total = trace_integral(&square_fn_col(&c).unwrap());
        let mut prev = truncated_square_fn(&c, -1).unwrap();
        assert!(prev.squared().is_zero());
        let mut sum = 0.0;
        for n in 0..=4 {
            let cur = truncated_square_fn(&c, n).unwrap();
            let diff = cur.squared().sub(prev.squared()).unwrap();
            for cell in diff.cells() {
                assert!(cell.min_eigenvalue() >= -1e-10 * cell.max_abs_entry().max(1.0));
            }
            sum += trace_integral(&cur) - trace_integral(&prev);
            prev = cur;
        }
        assert!((sum - total).abs() <= 1e-10 * total);
        assert!(truncated_square_fn(&c, 5).is_err());
        assert!(truncated_square_fn(&c, -2).is_err());
    }

    #[test]
    fn tent_norm_of_phi_image_is_column_norm() {
        let c = random_field(7);
        let t = embed_phi(&c);
        for p in [1.0, 1.5, 2.0, 4.0] {
            let a = tent_norm(&t, p).unwrap();
            let b = square_fn_col(&c).unwrap().lp_norm(p).unwrap();
            assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn signs_do_not_change_the_square_function() {
        let c = random_field(9);
        let mut rng = SeededRng::new(1);
        let mut flipped = CoefficientField::new(c.grid(), c.basis(), c.levels());
        for (i, m) in c.entries() {
            flipped.insert(*i, if rng.coin() { m.scale(-1.0) } else { m.clone() }).unwrap();
        }
        let a = square_fn_col(&c).unwrap();
        let b = square_fn_col(&flipped).unwrap();
        assert!(a.squared().max_cell_diff(b.squared()).unwrap() == 0.0);
    }
}
