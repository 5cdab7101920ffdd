//! Wavelet BMO, `L_pMO` and mean-oscillation BMO.

use std::collections::BTreeMap;

use crate::dyadic::{DyadicInterval, StepFunction};
use crate::error::{invalid_param, Result};
use crate::matrix::MatrixValue;
use crate::norms::{maximal_norm, MaximalSequence, NormBracket};
use crate::wavelet::{analyze, CoefficientField, WaveletBasis};

/// `Σ_{I ⊆ J} c_I* c_I` (or `c_I c_I*` when `column` is false) for every
/// ancestor `J` of an entry within the field's level range.
pub fn gram_sums(c: &CoefficientField, column: bool) -> BTreeMap<DyadicInterval, MatrixValue> {
    let top = c.levels().min;
    let mut sums: BTreeMap<DyadicInterval, MatrixValue> = BTreeMap::new();
    for (interval, m) in c.entries() {
        let g = if column { m.gram() } else { m.cogram() };
        for level in top..=interval.level {
            let j = interval.ancestor(level).expect("level is not finer than the interval");
            sums.entry(j).and_modify(|s| *s += &g).or_insert_with(|| g.clone());
        }
    }
    sums
}

fn bmo_from_sums(sums: &BTreeMap<DyadicInterval, MatrixValue>) -> f64 {
    sums.iter()
        .map(|(j, s)| s.eigh().max().max(0.0) / j.length())
        .fold(0.0, f64::max)
        .sqrt()
}

/// `sup_J ‖(1/|J|) Σ_{I⊆J} |c_I|²‖^{1/2}`.
pub fn bmo_col_norm_of(c: &CoefficientField) -> f64 {
    bmo_from_sums(&gram_sums(c, true))
}

pub fn bmo_row_norm_of(c: &CoefficientField) -> f64 {
    bmo_from_sums(&gram_sums(c, false))
}

pub fn bmo_col_norm(phi: &StepFunction) -> Result<f64> {
    Ok(bmo_col_norm_of(&analyze(phi, &WaveletBasis::haar(), None)?))
}

pub fn bmo_row_norm(phi: &StepFunction) -> Result<f64> {
    Ok(bmo_row_norm_of(&analyze(phi, &WaveletBasis::haar(), None)?))
}

pub fn bmo_norm(phi: &StepFunction) -> Result<f64> {
    let c = analyze(phi, &WaveletBasis::haar(), None)?;
    Ok(bmo_col_norm_of(&c).max(bmo_row_norm_of(&c)))
}

/// `x_n(t) = (1/|J|) Σ_{I⊆J} c_I* c_I` with `J` the level-`n` ancestor of `t`,
/// one term per level of the field.
pub fn lpmo_sequence(c: &CoefficientField) -> Result<MaximalSequence> {
    let grid = c.grid();
    let sums = gram_sums(c, true);
    let levels = c.levels();
    if levels.is_empty() {
        return MaximalSequence::new(vec![StepFunction::zeros(grid)]);
    }
    let mut terms = Vec::new();
    for n in levels.iter() {
        let cells = (0..grid.n_cells())
            .map(|k| {
                let j = grid.cell_interval(k).ancestor(n).expect("grid cells are finest");
                sums.get(&j).map_or_else(|| MatrixValue::zeros(grid.dim), |s| s.scale(1.0 / j.length()))
            })
            .collect();
        terms.push(StepFunction::from_cells(grid, cells)?);
    }
    MaximalSequence::new(terms)
}

/// `‖φ‖_{L^c_pMO}` bracket: square roots of the `L_{p/2}(ℓ_∞)` bracket of
/// [`lpmo_sequence`]. `p = ∞` gives the column BMO norm.
pub fn lpmo_col_norm_of(c: &CoefficientField, p: f64) -> Result<NormBracket> {
    if !(p > 2.0) {
        return invalid_param(format!("L_pMO needs p > 2, got {p}"));
    }
    let b = maximal_norm(&lpmo_sequence(c)?, p / 2.0)?;
    Ok(b.map_monotone(f64::sqrt))
}

pub fn lpmo_col_norm(phi: &StepFunction, p: f64) -> Result<NormBracket> {
    if !(p > 2.0) {
        return invalid_param(format!("L_pMO needs p > 2, got {p}"));
    }
    lpmo_col_norm_of(&analyze(phi, &WaveletBasis::haar(), None)?, p)
}

/// `sup_I ‖(1/|I|) ∫_I |φ − φ_I|²‖^{1/2}` over runs of `2^j` consecutive cells
/// at every starting cell inside the window.
pub fn mean_osc_bmo_norm(phi: &StepFunction) -> f64 {
    let cells = phi.cells();
    let n = cells.len();
    let d = phi.dim();
    // Oscillation is shift invariant; subtracting the first cell keeps constant
    // functions exactly at zero.
    let base = cells[0].clone();
    let mut first = vec![MatrixValue::zeros(d)];
    let mut second = vec![MatrixValue::zeros(d)];
    for c in cells {
        let s = c - &base;
        let next1 = &first[first.len() - 1] + &s;
        let next2 = &second[second.len() - 1] + &s.gram();
        first.push(next1);
        second.push(next2);
    }
    let mut best = 0.0_f64;
    let mut len = 2;
    while len <= n {
        for start in 0..=n - len {
            let inv = 1.0 / len as f64;
            let mean = (&first[start + len] - &first[start]).scale(inv);
            let meansq = (&second[start + len] - &second[start]).scale(inv);
            let osc = &meansq - &mean.gram();
            best = best.max(osc.eigh().max());
        }
        len *= 2;
    }
    best.max(0.0).sqrt()
}
