//! Bracket for `‖sup⁺_k x_k‖_q = inf{‖X‖_q : X ≥ x_k for all k}` on positive
//! sequences of step functions.
//!
//! The infimum separates over grid cells (averaging a majorant over a cell
//! keeps it a majorant and does not increase its norm), so both ends are
//! computed cell by cell and combined as `(Σ_cells |cell|·b_c^q)^{1/q}`.
//!
//! Upper end: the smallest `τ(X^q)^{1/q}` among verified majorants
//! `(Σ x_k^r)^{1/r}` (`r = q, 2q, 4q, 8q`; `t ↦ t^{1/r}` is operator monotone),
//! the entrywise max in a joint eigenbasis when the terms commute, and
//! `max_k ‖x_k‖·1`.
//!
//! Lower end: for any orthonormal basis `(v_i)` and majorant `X`,
//! `τ(X^q) ≥ Σ_i ⟨v_i, X v_i⟩^q ≥ Σ_i (max_k ⟨v_i, x_k v_i⟩)^q`. The best basis
//! among a few spectral candidates seeds a projected-gradient ascent of the
//! duality ratio `Σ_k τ(x_k z_k) / τ((Σ_k z_k)^{q'})^{1/q'}` over `z_k ≥ 0`.

use rayon::prelude::*;

use nalgebra::DMatrix;

use crate::dyadic::{Grid, StepFunction};
use crate::error::{check_exponent, Error, Result};
use crate::matrix::{MatrixValue, C64, TOL_PSD};
use crate::norms::NormBracket;

/// An ordered family `(x_k)` of pointwise PSD step functions on one grid.
#[derive(Clone, Debug)]
pub struct MaximalSequence {
    grid: Grid,
    terms: Vec<StepFunction>,
}

impl MaximalSequence {
    pub fn new(terms: Vec<StepFunction>) -> Result<Self> {
        let Some(first) = terms.first() else {
            return Err(Error::InvalidInput("maximal sequence needs at least one term".into()));
        };
        let grid = first.grid();
        for (k, t) in terms.iter().enumerate() {
            grid.compatible(&t.grid())?;
            for (c, m) in t.cells().iter().enumerate() {
                if !m.is_hermitian(1e-10) || !m.is_psd(TOL_PSD) {
                    return Err(Error::NotPositive(format!("term {k} is not PSD on cell {c}")));
                }
            }
        }
        Ok(MaximalSequence { grid, terms })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn terms(&self) -> &[StepFunction] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MaximalOptions {
    /// Projected-gradient steps per cell for the lower end.
    pub ascent_iterations: usize,
}

impl Default for MaximalOptions {
    fn default() -> Self {
        MaximalOptions { ascent_iterations: 50 }
    }
}

pub fn maximal_norm(x: &MaximalSequence, q: f64) -> Result<NormBracket> {
    maximal_norm_with(x, q, &MaximalOptions::default())
}

pub fn maximal_norm_with(x: &MaximalSequence, q: f64, options: &MaximalOptions) -> Result<NormBracket> {
    check_exponent(q)?;
    let n = x.grid.n_cells();
    if q.is_infinite() {
        let v = (0..n)
            .into_par_iter()
            .map(|c| x.terms.iter().map(|t| t.cell(c).eigh().max().max(0.0)).fold(0.0, f64::max))
            .reduce(|| 0.0, f64::max);
        return Ok(NormBracket::exact(v, "max over terms of sup norm"));
    }
    let bounds: Vec<(f64, f64)> = (0..n)
        .into_par_iter()
        .map(|c| {
            let terms: Vec<MatrixValue> = x.terms.iter().map(|t| t.cell(c).hermitian_part()).collect();
            cell_bracket(&terms, q, options)
        })
        .collect();
    let h = x.grid.cell_width();
    let combine = |sel: fn(&(f64, f64)) -> f64| {
        let top = bounds.iter().map(sel).fold(0.0, f64::max);
        if top == 0.0 {
            return 0.0;
        }
        top * bounds.iter().map(|b| h * (sel(b) / top).powf(q)).sum::<f64>().powf(1.0 / q)
    };
    let lower = combine(|b| b.0);
    let upper = combine(|b| b.1);
    NormBracket::new(lower, upper, "basis pinching + duality ascent", "operator-monotone majorant")
}

fn schatten(m: &MatrixValue, q: f64) -> f64 {
    let e = m.eigh();
    e.values.iter().map(|v| v.max(0.0).powf(q)).sum::<f64>().powf(1.0 / q)
}

fn is_majorant(xm: &MatrixValue, terms: &[MatrixValue]) -> bool {
    let scale = xm.op_norm();
    terms.iter().all(|t| (xm - t).min_eigenvalue() >= -1e-10 * scale)
}

/// Eigenbasis of `Σ_k (1 + 0.618…·k) x_k`, which diagonalizes every term when
/// they commute.
fn joint_basis(terms: &[MatrixValue]) -> DMatrix<C64> {
    let mut acc = MatrixValue::zeros(terms[0].dim());
    for (k, t) in terms.iter().enumerate() {
        acc.add_scaled(t, 1.0 + 0.618_033_988_749_895 * k as f64);
    }
    acc.eigh().vectors
}

fn diagonal_in(basis: &DMatrix<C64>, m: &MatrixValue) -> Vec<f64> {
    let d = basis.ncols();
    (0..d)
        .map(|i| {
            let v = basis.column(i);
            (v.adjoint() * m.as_dmatrix() * v)[(0, 0)].re
        })
        .collect()
}

fn basis_value(basis: &DMatrix<C64>, terms: &[MatrixValue], q: f64) -> f64 {
    let d = basis.ncols();
    let mut best = vec![0.0_f64; d];
    for t in terms {
        for (b, v) in best.iter_mut().zip(diagonal_in(basis, t)) {
            *b = b.max(v);
        }
    }
    best.iter().map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
}

fn cell_bracket(raw: &[MatrixValue], q: f64, options: &MaximalOptions) -> (f64, f64) {
    let m = raw.iter().map(|t| t.eigh().max()).fold(0.0, f64::max);
    if !(m > 0.0) {
        return (0.0, 0.0);
    }
    let terms: Vec<MatrixValue> = raw.iter().map(|t| t.scale(1.0 / m)).collect();
    let d = terms[0].dim();

    let mut majorants = vec![MatrixValue::identity(d)];
    for factor in [1.0, 2.0, 4.0, 8.0] {
        let r = q * factor;
        let mut acc = MatrixValue::zeros(d);
        for t in &terms {
            acc += &t.eigh().map(|l| l.max(0.0).powf(r));
        }
        majorants.push(acc.eigh().map(|l| l.max(0.0).powf(1.0 / r)));
    }
    let joint = joint_basis(&terms);
    let commuting = terms.iter().enumerate().all(|(j, a)| terms[j + 1..].iter().all(|b| a.commutator_hs_norm(b) <= 1e-12));
    if commuting {
        let mut best = vec![0.0_f64; d];
        for t in &terms {
            for (b, v) in best.iter_mut().zip(diagonal_in(&joint, t)) {
                *b = b.max(v);
            }
        }
        let diag = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(d, best.iter().map(|&v| C64::new(v, 0.0))));
        majorants.push(MatrixValue::from_dmatrix(&joint * diag * joint.adjoint()));
    }
    let (upper, best_x) = majorants
        .into_iter()
        .filter(|xm| is_majorant(xm, &terms))
        .map(|xm| (schatten(&xm, q), xm))
        .fold((f64::INFINITY, None), |acc, (v, xm)| if v < acc.0 { (v, Some(xm)) } else { acc });
    let best_x = best_x.expect("the scalar majorant always verifies");

    let mut bases = vec![joint];
    let mut total = MatrixValue::zeros(d);
    for t in &terms {
        bases.push(t.eigh().vectors);
        total += t;
    }
    bases.push(total.eigh().vectors);
    bases.push(best_x.eigh().vectors);
    let (mut lower, seed_basis) = bases
        .into_iter()
        .map(|b| (basis_value(&b, &terms, q), b))
        .fold((0.0, None), |acc, (v, b)| if v > acc.0 { (v, Some(b)) } else { acc });

    if q > 1.0 && lower < upper * (1.0 - 1e-12) && options.ascent_iterations > 0 {
        if let Some(b) = seed_basis {
            lower = lower.max(ascend(&terms, &b, q, options.ascent_iterations));
        }
    }
    (m * lower.min(upper), m * upper)
}

/// Duality ratio `Σ τ(x_k z_k) / τ(Z^{q'})^{1/q'}` with `Z = Σ z_k`.
fn ratio(terms: &[MatrixValue], z: &[MatrixValue], qd: f64) -> (f64, f64, MatrixValue) {
    let num: f64 = terms.iter().zip(z).map(|(x, y)| x.real_inner(y)).sum();
    let mut total = MatrixValue::zeros(terms[0].dim());
    for y in z {
        total += y;
    }
    let den = schatten(&total, qd);
    (num, den, total)
}

fn ascend(terms: &[MatrixValue], basis: &DMatrix<C64>, q: f64, iterations: usize) -> f64 {
    let d = basis.ncols();
    let qd = q / (q - 1.0);
    // Start from the pinching certificate: put weight Y_i^{q−1} on v_i v_i*
    // for the term attaining the max in direction i.
    let diags: Vec<Vec<f64>> = terms.iter().map(|t| diagonal_in(basis, t)).collect();
    let mut z: Vec<MatrixValue> = terms.iter().map(|_| MatrixValue::zeros(d)).collect();
    for i in 0..d {
        let (k, y) = diags.iter().enumerate().map(|(k, v)| (k, v[i])).fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
        if y > 0.0 {
            let v = basis.column(i).into_owned();
            let proj = MatrixValue::from_dmatrix(&v * v.adjoint());
            z[k].add_scaled(&proj, y.powf(q - 1.0));
        }
    }
    let (num, den, _) = ratio(terms, &z, qd);
    if !(den > 0.0) {
        return 0.0;
    }
    let mut best = num / den;
    let mut step = 0.1;
    for _ in 0..iterations {
        let (num, den, total) = ratio(terms, &z, qd);
        if !(den > 0.0) {
            break;
        }
        let r = num / den;
        // ∂R/∂z_k = x_k/D − R·Z^{q'−1}/D^{q'}, scaled by D.
        let pull = total.eigh().map(|l| l.max(0.0).powf(qd - 1.0)).scale(r / den.powf(qd - 1.0));
        let zn = z.iter().map(MatrixValue::hs_norm_sq).sum::<f64>().sqrt();
        let grads: Vec<MatrixValue> = terms.iter().map(|x| x - &pull).collect();
        let gn = grads.iter().map(MatrixValue::hs_norm_sq).sum::<f64>().sqrt();
        if !(gn > 0.0) {
            break;
        }
        let trial: Vec<MatrixValue> = z
            .iter()
            .zip(&grads)
            .map(|(y, g)| {
                let mut t = y.clone();
                t.add_scaled(g, step * zn / gn);
                t.eigh().map(|l| l.max(0.0))
            })
            .collect();
        let (tn, td, _) = ratio(terms, &trial, qd);
        if td > 0.0 && tn / td > r {
            z = trial;
            best = best.max(tn / td);
            step *= 1.2;
        } else {
            step *= 0.5;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    fn psd_field(grid: Grid, rng: &mut SeededRng) -> StepFunction {
        StepFunction::from_cells(grid, (0..grid.n_cells()).map(|_| rng.gaussian_psd(grid.dim)).collect()).unwrap()
    }

    #[test]
    fn single_term_is_exact() {
        let grid = Grid::new(2, 2, 0, 1).unwrap();
        let mut rng = SeededRng::new(1);
        let x = psd_field(grid, &mut rng);
        for q in [1.0, 1.5, 3.0] {
            let b = maximal_norm(&MaximalSequence::new(vec![x.clone()]).unwrap(), q).unwrap();
            let v = x.lp_norm(q).unwrap();
            assert!((b.lower - v).abs() < 1e-8 * v && (b.upper - v).abs() < 1e-8 * v, "{b:?} vs {v}");
        }
    }

    #[test]
    fn equal_terms_collapse() {
        let grid = Grid::new(3, 2, 0, 1).unwrap();
        let x = psd_field(grid, &mut SeededRng::new(2));
        let b = maximal_norm(&MaximalSequence::new(vec![x.clone(); 4]).unwrap(), 2.0).unwrap();
        let v = x.lp_norm(2.0).unwrap();
        assert!((b.upper - v).abs() < 1e-6 * v && (b.lower - v).abs() < 1e-6 * v);
    }

    #[test]
    fn diagonal_terms_give_the_classical_value() {
        let grid = Grid::new(2, 3, 0, 1).unwrap();
        let mut rng = SeededRng::new(3);
        let terms: Vec<StepFunction> = (0..4)
            .map(|_| StepFunction::from_cells(grid, (0..grid.n_cells()).map(|_| rng.gaussian_diagonal(2).conj_map(|z| C64::new(z.re.abs(), 0.0))).collect()).unwrap())
            .collect();
        let exact = {
            let cells: Vec<MatrixValue> = (0..grid.n_cells())
                .map(|c| {
                    let v: Vec<f64> = (0..2).map(|i| terms.iter().map(|t| t.cell(c).get(i, i).re).fold(0.0, f64::max)).collect();
                    MatrixValue::diagonal(&v)
                })
                .collect();
            StepFunction::from_cells(grid, cells).unwrap().lp_norm(2.0).unwrap()
        };
        let b = maximal_norm(&MaximalSequence::new(terms).unwrap(), 2.0).unwrap();
        assert!(b.contains(exact, 1e-10), "{b:?} vs {exact}");
        assert!(b.relative_width() < 1e-10);
    }

    #[test]
    fn noncommuting_bracket_is_ordered_and_monotone() {
        let grid = Grid::new(2, 2, 0, 1).unwrap();
        let mut rng = SeededRng::new(4);
        let mut terms = vec![psd_field(grid, &mut rng), psd_field(grid, &mut rng)];
        let b2 = maximal_norm(&MaximalSequence::new(terms.clone()).unwrap(), 2.0).unwrap();
        assert!(b2.lower <= b2.upper);
        terms.push(psd_field(grid, &mut rng));
        let b3 = maximal_norm(&MaximalSequence::new(terms).unwrap(), 2.0).unwrap();
        assert!(b3.upper >= b2.lower);
        assert!(b3.lower >= b2.lower * (1.0 - 1e-12));
    }

    #[test]
    fn rejects_non_psd() {
        let grid = Grid::new(1, 1, 0, 1).unwrap();
        let neg = StepFunction::from_fn(grid, |_| MatrixValue::identity(1).scale(-1.0)).unwrap();
        assert!(matches!(MaximalSequence::new(vec![neg]), Err(Error::NotPositive(_))));
    }

    #[test]
    fn q_infinity_is_a_max() {
        let grid = Grid::new(2, 2, 0, 1).unwrap();
        let mut rng = SeededRng::new(5);
        let a = psd_field(grid, &mut rng);
        let b = psd_field(grid, &mut rng);
        let v = a.lp_norm(f64::INFINITY).unwrap().max(b.lp_norm(f64::INFINITY).unwrap());
        let r = maximal_norm(&MaximalSequence::new(vec![a, b]).unwrap(), f64::INFINITY).unwrap();
        assert!((r.upper - v).abs() < 1e-12 * v && r.lower == r.upper);
    }
}
