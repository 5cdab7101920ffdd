//! Column, row and mixed Hardy norms.
//!
//! For `p < 2` the mixed norm `inf ‖G‖_{H^c_p} + ‖C − G‖_{H^r_p}` over coefficient
//! splits is bracketed. The upper end is the best split found by normalized
//! subgradient descent. The lower end comes from duality: for any coefficient
//! family `Λ`, `Re⟨Λ, C⟩ / max(‖Λ‖_{(H^c_p)*}, ‖Λ‖_{(H^r_p)*})` is a lower bound,
//! and each dual norm is bounded above by `‖(Σ a_I* a_I)^{1/2}‖_{p'}` (resp. the
//! row version) for any functions `a_I` supported on `I` whose normalized
//! averages `|I|^{-1/2}∫_I a_I` equal `Λ_I`.

use std::ops::Range;

use crate::dyadic::{schatten_integral_norm, Grid, StepFunction};
use crate::error::{check_exponent, Error, Result};
use crate::matrix::{Eigh, MatrixValue};
use crate::norms::NormBracket;
use crate::rng::SeededRng;
use crate::square::{square_fn_col, square_fn_row, SquareProfile};
use crate::wavelet::{analyze, BasisKind, CoefficientField, WaveletBasis};

/// `‖S_c(f)‖_p` with Haar coefficients.
pub fn hardy_col_norm(f: &StepFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    hardy_col_norm_of(&analyze(f, &WaveletBasis::haar(), None)?, p)
}

/// `‖S_r(f)‖_p` with Haar coefficients.
pub fn hardy_row_norm(f: &StepFunction, p: f64) -> Result<f64> {
    check_exponent(p)?;
    hardy_row_norm_of(&analyze(f, &WaveletBasis::haar(), None)?, p)
}

pub fn hardy_col_norm_of(c: &CoefficientField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    square_fn_col(c)?.lp_norm(p)
}

pub fn hardy_row_norm_of(c: &CoefficientField, p: f64) -> Result<f64> {
    check_exponent(p)?;
    square_fn_row(c)?.lp_norm(p)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HardyOptions {
    pub starts: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for HardyOptions {
    fn default() -> Self {
        HardyOptions { starts: 8, iterations: 500, seed: 0 }
    }
}

pub fn hardy_norm(f: &StepFunction, p: f64) -> Result<NormBracket> {
    hardy_norm_with(f, p, &HardyOptions::default())
}

pub fn hardy_norm_with(f: &StepFunction, p: f64, options: &HardyOptions) -> Result<NormBracket> {
    check_exponent(p)?;
    hardy_norm_of(&analyze(f, &WaveletBasis::haar(), None)?, p, options)
}

/// `H_p` norm of a Haar coefficient field: exact `max(column, row)` for
/// `p ≥ 2`, a certified bracket for `p < 2`.
pub fn hardy_norm_of(c: &CoefficientField, p: f64, options: &HardyOptions) -> Result<NormBracket> {
    check_exponent(p)?;
    if p >= 2.0 {
        let v = hardy_col_norm_of(c, p)?.max(hardy_row_norm_of(c, p)?);
        return Ok(NormBracket::exact(v, "max(column, row)"));
    }
    if c.basis() != BasisKind::Haar {
        return Err(Error::Unsupported("mixed Hardy norm needs a Haar coefficient field".into()));
    }
    let problem = SplitProblem::new(c, p);
    if problem.coeffs.iter().all(|m| m.max_abs_entry() == 0.0) {
        return Ok(NormBracket::exact(0.0, "zero"));
    }
    let zero: Vec<MatrixValue> = problem.coeffs.iter().map(|m| MatrixValue::zeros(m.dim())).collect();
    let col = problem.evaluate(&problem.coeffs, true).norm;
    let row = problem.evaluate(&problem.coeffs, false).norm;
    let (mut upper, mut best) = if col <= row { (col, problem.coeffs.clone()) } else { (row, zero.clone()) };
    let mut method_upper = "trivial split".to_string();
    let mut lower = problem.certify(&best);
    if lower < upper * (1.0 - 1e-9) {
        let starts = options.starts.max(1);
        for s in 0..starts {
            let start: Vec<MatrixValue> = match s {
                0 => problem.coeffs.clone(),
                1 => zero.clone(),
                2 => problem.coeffs.iter().map(|m| m.scale(0.5)).collect(),
                _ => {
                    let mut rng = SeededRng::derive(options.seed, s as u64);
                    problem.coeffs.iter().map(|m| m.scale(rng.uniform())).collect()
                }
            };
            let (value, g) = problem.descend(start, options.iterations);
            if value < upper {
                upper = value;
                best = g;
            }
        }
        method_upper = format!("split descent ({starts} starts x {} iterations)", options.iterations);
        lower = lower.max(problem.certify(&best));
    }
    NormBracket::new(lower, upper, "duality certificate", method_upper)
}

/// Relative regularization added to `S²` before taking negative powers.
const ETA_REL: f64 = 1e-12;

struct SplitProblem {
    grid: Grid,
    p: f64,
    h: f64,
    lens: Vec<f64>,
    ranges: Vec<Range<usize>>,
    covering: Vec<Vec<usize>>,
    coeffs: Vec<MatrixValue>,
}

struct Evaluation {
    norm: f64,
    spectra: Vec<Eigh>,
}

/// Per-cell weight `K = (S² + η)^{(p−2)/2}` and its interval averages `M_I`
/// with inverses.
struct Reference {
    weights: Vec<MatrixValue>,
    means: Vec<MatrixValue>,
    inverses: Vec<MatrixValue>,
}

impl SplitProblem {
    fn new(c: &CoefficientField, p: f64) -> Self {
        let grid = c.grid();
        let mut lens = Vec::new();
        let mut ranges = Vec::new();
        let mut coeffs = Vec::new();
        let mut covering = vec![Vec::new(); grid.n_cells()];
        for (interval, m) in c.entries() {
            let Some(r) = grid.cell_range(interval).filter(|r| !r.is_empty()) else { continue };
            let idx = coeffs.len();
            for k in r.clone() {
                covering[k].push(idx);
            }
            lens.push(interval.length());
            ranges.push(r);
            coeffs.push(m.clone());
        }
        SplitProblem { grid, p, h: grid.cell_width(), lens, ranges, covering, coeffs }
    }

    fn dual_exponent(&self) -> f64 {
        if self.p == 1.0 {
            f64::INFINITY
        } else {
            self.p / (self.p - 1.0)
        }
    }

    /// Per-cell sums `Σ_{I ∋ x} T_I` of per-interval matrices.
    fn cell_sums(&self, per_interval: &[MatrixValue]) -> Vec<MatrixValue> {
        let d = self.coeffs[0].dim();
        self.covering
            .iter()
            .map(|cov| {
                let mut acc = MatrixValue::zeros(d);
                for &i in cov {
                    acc += &per_interval[i];
                }
                acc
            })
            .collect()
    }

    fn profile(&self, g: &[MatrixValue], column: bool) -> Vec<MatrixValue> {
        let terms: Vec<MatrixValue> = g
            .iter()
            .zip(&self.lens)
            .map(|(m, len)| if column { m.gram() } else { m.cogram() }.scale(1.0 / len))
            .collect();
        self.cell_sums(&terms)
    }

    fn spectra(cells: &[MatrixValue]) -> Vec<Eigh> {
        cells
            .iter()
            .map(|c| {
                let mut e = c.eigh();
                for v in e.values.iter_mut() {
                    *v = v.max(0.0);
                }
                e
            })
            .collect()
    }

    fn evaluate(&self, g: &[MatrixValue], column: bool) -> Evaluation {
        let spectra = Self::spectra(&self.profile(g, column));
        let roots: Vec<Vec<f64>> = spectra.iter().map(|e| e.values.iter().map(|v| v.sqrt()).collect()).collect();
        Evaluation { norm: schatten_integral_norm(&roots, self.h, self.p), spectra }
    }

    fn reference(&self, spectra: &[Eigh]) -> Reference {
        let top = spectra.iter().map(Eigh::max).fold(0.0, f64::max);
        let eta = ETA_REL * top.max(f64::MIN_POSITIVE);
        let expo = (self.p - 2.0) / 2.0;
        let weights: Vec<MatrixValue> = spectra.iter().map(|e| e.map(|l| (l + eta).powf(expo))).collect();
        let means: Vec<MatrixValue> = self
            .ranges
            .iter()
            .zip(&self.lens)
            .map(|(r, len)| {
                let mut acc = MatrixValue::zeros(weights[0].dim());
                for k in r.clone() {
                    acc += &weights[k];
                }
                acc.scale(self.h / len)
            })
            .collect();
        let inverses = means.iter().map(|m| m.eigh().map(|l| 1.0 / l)).collect();
        Reference { weights, means, inverses }
    }

    /// Objective value and its gradient with respect to `G`.
    fn objective(&self, g: &[MatrixValue]) -> (f64, Vec<MatrixValue>) {
        let rest: Vec<MatrixValue> = self.coeffs.iter().zip(g).map(|(c, g)| c - g).collect();
        let col = self.evaluate(g, true);
        let row = self.evaluate(&rest, false);
        let mut grad: Vec<MatrixValue> = g.iter().map(|m| MatrixValue::zeros(m.dim())).collect();
        if col.norm > 0.0 {
            let r = self.reference(&col.spectra);
            let s = col.norm.powf(1.0 - self.p);
            for (i, gi) in grad.iter_mut().enumerate() {
                gi.add_scaled(&(&g[i] * &r.means[i]), s);
            }
        }
        if row.norm > 0.0 {
            let r = self.reference(&row.spectra);
            let s = row.norm.powf(1.0 - self.p);
            for (i, gi) in grad.iter_mut().enumerate() {
                gi.add_scaled(&(&r.means[i] * &rest[i]), -s);
            }
        }
        (col.norm + row.norm, grad)
    }

    fn descend(&self, mut g: Vec<MatrixValue>, iterations: usize) -> (f64, Vec<MatrixValue>) {
        let scale = self.coeffs.iter().map(MatrixValue::hs_norm_sq).sum::<f64>().sqrt();
        let alpha0 = 0.25 * scale;
        let (mut best, mut grad) = self.objective(&g);
        let mut best_g = g.clone();
        for t in 0..iterations {
            let gn = grad.iter().map(MatrixValue::hs_norm_sq).sum::<f64>().sqrt();
            if !(gn > 0.0) {
                break;
            }
            let step = alpha0 / ((t + 1) as f64).sqrt() / gn;
            for (gi, di) in g.iter_mut().zip(&grad) {
                gi.add_scaled(di, -step);
            }
            let (value, next) = self.objective(&g);
            if value < best {
                best = value;
                best_g.clone_from(&g);
            }
            grad = next;
        }
        (best, best_g)
    }

    fn rep_bound(&self, lambda: &[MatrixValue], reference: Option<&Reference>, column: bool) -> f64 {
        let terms: Vec<MatrixValue> = lambda
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let inner = if column { l.gram() } else { l.cogram() };
                let m = match reference {
                    None => inner,
                    Some(r) => &(&r.inverses[i] * &inner) * &r.inverses[i],
                };
                m.scale(1.0 / self.lens[i])
            })
            .collect();
        let mut cells = self.cell_sums(&terms);
        if let Some(r) = reference {
            for (c, k) in cells.iter_mut().zip(&r.weights) {
                *c = &(k * &*c) * k;
            }
        }
        let pp = self.dual_exponent();
        let sq = StepFunction::from_cells(self.grid, cells).expect("cell count matches");
        SquareProfile::from_squared(sq).and_then(|s| s.lp_norm(pp)).unwrap_or(f64::INFINITY)
    }

    fn dual_bound(&self, lambda: &[MatrixValue], refs: &[Reference]) -> f64 {
        let best = |column: bool| {
            refs.iter()
                .map(|r| self.rep_bound(lambda, Some(r), column))
                .fold(self.rep_bound(lambda, None, column), f64::min)
        };
        best(true).max(best(false))
    }

    /// Largest duality ratio over a fixed set of candidates built from the split `G`.
    fn certify(&self, g: &[MatrixValue]) -> f64 {
        let rest: Vec<MatrixValue> = self.coeffs.iter().zip(g).map(|(c, g)| c - g).collect();
        let refs = [
            self.reference(&self.evaluate(g, true).spectra),
            self.reference(&self.evaluate(&rest, false).spectra),
            self.reference(&self.evaluate(&self.coeffs, true).spectra),
            self.reference(&self.evaluate(&self.coeffs, false).spectra),
        ];
        let lam_c: Vec<MatrixValue> = g.iter().zip(&refs[0].means).map(|(a, m)| a * m).collect();
        let lam_r: Vec<MatrixValue> = rest.iter().zip(&refs[1].means).map(|(a, m)| m * a).collect();
        let lam_cc: Vec<MatrixValue> = self.coeffs.iter().zip(&refs[2].means).map(|(a, m)| a * m).collect();
        let lam_cr: Vec<MatrixValue> = self.coeffs.iter().zip(&refs[3].means).map(|(a, m)| m * a).collect();
        let mut best = 0.0_f64;
        let mut bounds = Vec::new();
        for lam in [&lam_c, &lam_r, &lam_cc, &lam_cr, &self.coeffs] {
            let pairing: f64 = lam.iter().zip(&self.coeffs).map(|(l, c)| l.real_inner(c)).sum();
            let bound = self.dual_bound(lam, &refs);
            bounds.push(bound);
            if bound > 0.0 && bound.is_finite() && pairing > 0.0 {
                best = best.max(pairing / bound);
            }
        }
        if bounds[0] > 0.0 && bounds[1] > 0.0 && bounds[0].is_finite() && bounds[1].is_finite() {
            let mixed: Vec<MatrixValue> = lam_c
                .iter()
                .zip(&lam_r)
                .map(|(a, b)| &a.scale(1.0 / bounds[0]) + &b.scale(1.0 / bounds[1]))
                .collect();
            let pairing: f64 = mixed.iter().zip(&self.coeffs).map(|(l, c)| l.real_inner(c)).sum();
            let bound = self.dual_bound(&mixed, &refs);
            if bound > 0.0 && bound.is_finite() && pairing > 0.0 {
                best = best.max(pairing / bound);
            }
        }
        best
    }
}
