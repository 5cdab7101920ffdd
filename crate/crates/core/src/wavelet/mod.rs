//! Wavelet bases, analysis and synthesis.
//!
//! Both bases are handled through two primitives: the integral of `w_I` over
//! an interval `[a, b]` and the range of offsets at a level whose support
//! meets a given interval. Analysis pairs cells against `w_I` exactly for
//! step functions (given the basis samples); synthesis returns cell averages
//! of `Σ c_I w_I` plus the scaling part.

mod coefficients;
pub mod meyer;
mod tent;

use std::sync::{Arc, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use coefficients::{CoefficientField, CoefficientFieldJson, EntryJson, LevelRange};
pub use meyer::{MeyerParams, MeyerWavelet};
pub use tent::{embed_phi, project_psi, TentEntry, TentField};

use crate::dyadic::{DyadicInterval, StepFunction};
use crate::error::{invalid_param, Error, Result};
use crate::matrix::MatrixValue;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Haar,
    Meyer,
}

impl std::str::FromStr for BasisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(BasisKind::Haar),
            "meyer" => Ok(BasisKind::Meyer),
            other => Err(Error::InvalidInput(format!("unknown basis `{other}` (expected haar or meyer)"))),
        }
    }
}

impl std::fmt::Display for BasisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BasisKind::Haar => "haar",
            BasisKind::Meyer => "meyer",
        })
    }
}

#[derive(Clone, Debug)]
pub enum WaveletBasis {
    Haar,
    Meyer(Arc<MeyerWavelet>),
}

/// Coarsest and finest Meyer levels used when none are requested.
pub const MEYER_DEFAULT_LEVELS: i32 = 6;

impl WaveletBasis {
    pub fn haar() -> Self {
        WaveletBasis::Haar
    }

    pub fn meyer(params: MeyerParams) -> Result<Self> {
        if params == MeyerParams::default() {
            return Ok(Self::default_meyer());
        }
        Ok(WaveletBasis::Meyer(Arc::new(MeyerWavelet::new(params)?)))
    }

    /// Meyer wavelet with default parameters, built once per process.
    pub fn default_meyer() -> Self {
        static DEFAULT: OnceLock<Arc<MeyerWavelet>> = OnceLock::new();
        let w = DEFAULT.get_or_init(|| Arc::new(MeyerWavelet::new(MeyerParams::default()).expect("default parameters are valid")));
        WaveletBasis::Meyer(Arc::clone(w))
    }

    pub fn from_kind(kind: BasisKind, params: MeyerParams) -> Result<Self> {
        match kind {
            BasisKind::Haar => Ok(WaveletBasis::Haar),
            BasisKind::Meyer => Self::meyer(params),
        }
    }

    pub fn kind(&self) -> BasisKind {
        match self {
            WaveletBasis::Haar => BasisKind::Haar,
            WaveletBasis::Meyer(_) => BasisKind::Meyer,
        }
    }

    /// Haar: every level resolvable on the grid. Meyer: `|n| ≤ 6`, capped at
    /// the grid depth.
    pub fn default_levels(&self, depth: u32) -> LevelRange {
        match self {
            WaveletBasis::Haar => LevelRange::new(0, depth as i32 - 1),
            WaveletBasis::Meyer(_) => LevelRange::new(-MEYER_DEFAULT_LEVELS, MEYER_DEFAULT_LEVELS.min(depth as i32)),
        }
    }

    /// Closed interval outside of which `w_I` vanishes.
    pub fn support(&self, interval: &DyadicInterval) -> (f64, f64) {
        match self {
            WaveletBasis::Haar => (interval.left(), interval.right()),
            WaveletBasis::Meyer(w) => {
                let r = w.radius() * interval.length();
                (interval.center() - r, interval.center() + r)
            }
        }
    }

    /// `w_I(x)`.
    pub fn eval(&self, interval: &DyadicInterval, x: f64) -> f64 {
        let len = interval.length();
        match self {
            WaveletBasis::Haar => {
                if !interval.contains_point(x) {
                    0.0
                } else if x < interval.center() {
                    len.powf(-0.5)
                } else {
                    -len.powf(-0.5)
                }
            }
            WaveletBasis::Meyer(w) => len.powf(-0.5) * w.value((x - interval.center()) / len),
        }
    }

    /// `∫_a^b w_I`.
    pub fn integral(&self, interval: &DyadicInterval, a: f64, b: f64) -> f64 {
        let len = interval.length();
        match self {
            WaveletBasis::Haar => {
                let overlap = |lo: f64, hi: f64| (b.min(hi) - a.max(lo)).max(0.0);
                let c = interval.center();
                (overlap(interval.left(), c) - overlap(c, interval.right())) / len.sqrt()
            }
            WaveletBasis::Meyer(w) => {
                let c = interval.center();
                len.sqrt() * (w.antiderivative((b - c) / len) - w.antiderivative((a - c) / len))
            }
        }
    }

    /// Offsets `j` at `level` for which the support of `w_I` meets `(a, b)`.
    pub fn offsets_meeting(&self, level: i32, a: f64, b: f64) -> (i64, i64) {
        let scale = 2f64.powi(level);
        match self {
            WaveletBasis::Haar => ((a * scale).floor() as i64, (b * scale).ceil() as i64 - 1),
            WaveletBasis::Meyer(w) => {
                let t = w.radius();
                ((a * scale - t - 0.5).floor() as i64 + 1, (b * scale + t - 0.5).ceil() as i64 - 1)
            }
        }
    }

    fn check_levels(&self, levels: LevelRange, depth: u32) -> Result<()> {
        let finest = match self {
            WaveletBasis::Haar => depth as i32 - 1,
            WaveletBasis::Meyer(_) => depth as i32,
        };
        if levels.is_empty() {
            return Ok(());
        }
        if levels.max > finest {
            return invalid_param(format!("level {} is finer than the grid allows (max {finest})", levels.max));
        }
        if matches!(self, WaveletBasis::Haar) && levels.min < 0 {
            return invalid_param(format!("Haar levels start at 0, got {}", levels.min));
        }
        Ok(())
    }

    pub fn meyer_wavelet(&self) -> Option<&MeyerWavelet> {
        match self {
            WaveletBasis::Haar => None,
            WaveletBasis::Meyer(w) => Some(w),
        }
    }
}

/// `w_I(x)` for the given basis.
pub fn wavelet_eval(basis: &WaveletBasis, interval: &DyadicInterval, x: f64) -> f64 {
    basis.eval(interval, x)
}

/// Wavelet coefficients `⟨f, w_I⟩ = ∫ f w_I` over `levels` (default: see
/// [`WaveletBasis::default_levels`]). Haar fields also carry the unit-cell
/// means as scaling part; Meyer fields have none.
pub fn analyze(f: &StepFunction, basis: &WaveletBasis, levels: Option<LevelRange>) -> Result<CoefficientField> {
    let grid = f.grid();
    let levels = levels.unwrap_or_else(|| basis.default_levels(grid.depth));
    basis.check_levels(levels, grid.depth)?;
    let h = grid.cell_width();
    let (lo, hi) = (grid.lo as f64, grid.hi as f64);
    let mut intervals = Vec::new();
    for n in levels.iter() {
        let (j0, j1) = basis.offsets_meeting(n, lo, hi);
        intervals.extend((j0..=j1).map(|j| DyadicInterval::new(n, j)));
    }
    let cells = f.cells();
    let dim = grid.dim;
    let coefficients: Vec<MatrixValue> = intervals
        .par_iter()
        .map(|interval| {
            let (s0, s1) = basis.support(interval);
            let k0 = (((s0 - lo) / h).floor().max(0.0)) as usize;
            let k1 = (((s1 - lo) / h).ceil().max(0.0) as usize).min(cells.len());
            let mut acc = MatrixValue::zeros(dim);
            for (k, cell) in cells.iter().enumerate().take(k1).skip(k0) {
                let a = lo + k as f64 * h;
                let weight = basis.integral(interval, a, a + h);
                if weight != 0.0 {
                    acc.add_scaled(cell, weight);
                }
            }
            acc
        })
        .collect();
    let mut field = CoefficientField::new(grid, basis.kind(), levels);
    for (interval, c) in intervals.into_iter().zip(coefficients) {
        field.insert(interval, c)?;
    }
    if matches!(basis, WaveletBasis::Haar) {
        let per = grid.cells_per_unit();
        let means = cells
            .chunks(per)
            .map(|chunk| {
                let mut acc = MatrixValue::zeros(dim);
                for c in chunk {
                    acc += c;
                }
                acc.scale(1.0 / per as f64)
            })
            .collect();
        field.set_scaling(means)?;
    }
    Ok(field)
}

/// Cell averages of `Σ_I c_I w_I` plus the scaling part, on the field's grid.
pub fn synthesize(c: &CoefficientField, basis: &WaveletBasis) -> Result<StepFunction> {
    if c.basis() != basis.kind() {
        return Err(Error::InvalidInput(format!(
            "coefficient field was built for the {} basis, not {}",
            c.basis(),
            basis.kind()
        )));
    }
    let grid = c.grid();
    let h = grid.cell_width();
    let per = grid.cells_per_unit();
    let levels: Vec<i32> = c.occupied_levels();
    let cells: Vec<MatrixValue> = (0..grid.n_cells())
        .into_par_iter()
        .map(|k| {
            let a = grid.lo as f64 + k as f64 * h;
            let b = a + h;
            let mut acc = match c.scaling() {
                [] => MatrixValue::zeros(grid.dim),
                s => s[k / per].clone(),
            };
            for &n in &levels {
                let (j0, j1) = basis.offsets_meeting(n, a, b);
                for (interval, m) in c.range(DyadicInterval::new(n, j0), DyadicInterval::new(n, j1)) {
                    let weight = basis.integral(interval, a, b) / h;
                    if weight != 0.0 {
                        acc.add_scaled(m, weight);
                    }
                }
            }
            acc
        })
        .collect();
    StepFunction::from_cells(grid, cells)
}

/// Fitted decay constant `C = max max(|w|, |w'|)·(1 + |x|)^m` over the Meyer
/// sample grid.
pub fn decay_check(basis: &WaveletBasis, m: f64) -> Result<f64> {
    match basis {
        WaveletBasis::Haar => Err(Error::Unsupported("Haar wavelet is discontinuous; decay check needs Meyer".into())),
        WaveletBasis::Meyer(w) => w.decay_constant(m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;
    use crate::rng::SeededRng;

    fn random(grid: Grid, seed: u64) -> StepFunction {
        let mut rng = SeededRng::new(seed);
        let cells = (0..grid.n_cells()).map(|_| rng.gaussian_matrix(grid.dim)).collect();
        StepFunction::from_cells(grid, cells).unwrap()
    }

    #[test]
    fn haar_values() {
        let b = WaveletBasis::haar();
        assert_eq!(wavelet_eval(&b, &DyadicInterval::new(0, 0), 0.25), 1.0);
        assert_eq!(wavelet_eval(&b, &DyadicInterval::new(0, 0), 0.75), -1.0);
        assert!((wavelet_eval(&b, &DyadicInterval::new(1, 0), 0.1) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(wavelet_eval(&b, &DyadicInterval::new(1, 0), 0.6), 0.0);
    }

    #[test]
    fn haar_of_haar() {
        let grid = Grid::new(1, 4, 0, 1).unwrap();
        let f = StepFunction::from_fn(grid, |x| MatrixValue::scalar(1, (if x < 0.5 { 1.0 } else { -1.0 }).into())).unwrap();
        let c = analyze(&f, &WaveletBasis::haar(), None).unwrap();
        for (i, m) in c.entries() {
            let expect = if *i == DyadicInterval::new(0, 0) { 1.0 } else { 0.0 };
            assert!((m.get(0, 0).re - expect).abs() < 1e-15, "{i:?}");
        }
        assert_eq!(c.scaling()[0].get(0, 0).re, 0.0);
    }

    #[test]
    fn haar_round_trip() {
        let f = random(Grid::new(2, 6, -1, 2).unwrap(), 3);
        let basis = WaveletBasis::haar();
        let c = analyze(&f, &basis, None).unwrap();
        let g = synthesize(&c, &basis).unwrap();
        assert!(g.max_cell_diff(&f).unwrap() <= 1e-12);
    }

    #[test]
    fn constants_have_no_wavelet_content() {
        let grid = Grid::new(2, 5, 0, 2).unwrap();
        let a = SeededRng::new(9).gaussian_matrix(2);
        let f = StepFunction::from_fn(grid, |_| a.clone()).unwrap();
        let c = analyze(&f, &WaveletBasis::haar(), None).unwrap();
        assert!(c.entries().all(|(_, m)| m.max_abs_entry() < 1e-14));
    }

    #[test]
    fn haar_parseval() {
        let f = random(Grid::new(2, 5, 0, 3).unwrap(), 11);
        let c = analyze(&f, &WaveletBasis::haar(), None).unwrap();
        let mean_free = f.sub(&f.conditional_expectation(0).unwrap()).unwrap();
        let lhs = c.hs_energy();
        let rhs = mean_free.lp_norm(2.0).unwrap().powi(2);
        assert!((lhs - rhs).abs() <= 1e-10 * rhs.max(1.0));
    }

    #[test]
    fn haar_levels_match_martingale_differences() {
        let grid = Grid::new(2, 5, 0, 2).unwrap();
        let f = random(grid, 21);
        let basis = WaveletBasis::haar();
        let c = analyze(&f, &basis, None).unwrap();
        for n in 0..5 {
            let level = c.filter(|i| i.level == n).without_scaling();
            let diff = f.conditional_expectation(n + 1).unwrap().sub(&f.conditional_expectation(n).unwrap()).unwrap();
            assert!(synthesize(&level, &basis).unwrap().max_cell_diff(&diff).unwrap() < 1e-12);
        }
    }

    #[test]
    fn levels_beyond_the_grid_are_rejected() {
        let f = random(Grid::new(1, 3, 0, 1).unwrap(), 1);
        assert!(matches!(analyze(&f, &WaveletBasis::haar(), Some(LevelRange::new(0, 3))), Err(Error::InvalidParameter(_))));
        assert!(matches!(
            analyze(&f, &WaveletBasis::default_meyer(), Some(LevelRange::new(0, 4))),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn adjoint_and_linearity() {
        let grid = Grid::new(2, 4, 0, 2).unwrap();
        let (f, g) = (random(grid, 1), random(grid, 2));
        let basis = WaveletBasis::haar();
        let cf = analyze(&f, &basis, None).unwrap();
        let cg = analyze(&g, &basis, None).unwrap();
        let combo = analyze(&f.scale(2.5).add(&g).unwrap(), &basis, None).unwrap();
        assert!(combo.max_abs_diff(&cf.scale(2.5).add(&cg).unwrap()) < 1e-12);
        let star = analyze(&f.adjoint(), &basis, None).unwrap();
        assert!(star.max_abs_diff(&cf.adjoint()) < 1e-15);
    }

    #[test]
    fn decay_check_rejects_haar() {
        assert!(matches!(decay_check(&WaveletBasis::haar(), 2.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn meyer_cell_integrals_vanish() {
        let basis = WaveletBasis::default_meyer();
        for i in [DyadicInterval::new(0, 0), DyadicInterval::new(3, -5), DyadicInterval::new(-2, 1)] {
            let (a, b) = basis.support(&i);
            assert!(basis.integral(&i, a - 1.0, b + 1.0).abs() < 1e-8);
        }
    }
}
