//! Pairings and inequality checkers.
//!
//! Every checker returns a [`CheckReport`] comparing a left side against a
//! right side that already includes the constant. Where a norm is only known
//! as a bracket, the end that makes the inequality harder is used.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dyadic::{trace_pair, DyadicInterval, SignPattern, StepFunction};
use crate::error::{check_exponent, invalid_param, Error, Result};
use crate::matrix::MatrixValue;
use crate::norms::{bmo_col_norm, bmo_col_norm_of, hardy_col_norm, hardy_norm_with, lpmo_col_norm, maximal_norm, mean_osc_bmo_norm, HardyOptions, MaximalSequence};
use crate::square::{square_fn_col, SquareProfile};
use crate::wavelet::{analyze, embed_phi, project_psi, synthesize, BasisKind, CoefficientField, WaveletBasis};

/// Relative slack in `lhs ≤ rhs·(1 + REL_SLACK)`.
pub const REL_SLACK: f64 = 1e-9;

/// Exact enumeration limit for [`rademacher_norm`].
pub const MAX_SIGN_VARIABLES: usize = 20;

/// Envelope for the wavelet-BMO / mean-oscillation-BMO ratio.
pub const BMO_ENVELOPE: f64 = 32.0;

/// Relative budgets for the identity checks. A deviation `e` passes when
/// `e ≤ tol · scale`, with `scale` the size of the compared quantity (at least 1
/// except for the Burkholder–Gundy ratio).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub calderon: f64,
    pub parseval: f64,
    pub psi_phi: f64,
    pub sign_flip: f64,
    pub rademacher: f64,
    pub bg: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { calderon: 1e-12, parseval: 1e-10, psi_phi: 1e-12, sign_flip: 1e-12, rademacher: 1e-10, bg: 1e-9 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub constant_used: f64,
    pub margin: f64,
    pub pass: bool,
    /// Whether a failure counts against the suite.
    pub asserted: bool,
    pub metadata: BTreeMap<String, Value>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, lhs: f64, rhs: f64, constant_used: f64, asserted: bool) -> Self {
        CheckReport {
            name: name.into(),
            lhs,
            rhs,
            constant_used,
            margin: rhs - lhs,
            pass: lhs <= rhs * (1.0 + REL_SLACK),
            asserted,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    /// Asserted and not passing.
    pub fn failed(&self) -> bool {
        self.asserted && !self.pass
    }

    pub fn to_json(&self) -> String {
        crate::json::to_json_string(self)
    }
}

/// `f − E_0 f`: removes the unit-cell means so that `f` is spanned by wavelets.
pub fn remove_mean(f: &StepFunction) -> Result<StepFunction> {
    f.sub(&f.conditional_expectation(0)?)
}

fn shape(f: &StepFunction) -> [(&'static str, Value); 3] {
    let g = f.grid();
    [("dim", g.dim.into()), ("depth", g.depth.into()), ("cells", g.n_cells().into())]
}

fn annotate(mut r: CheckReport, f: &StepFunction) -> CheckReport {
    for (k, v) in shape(f) {
        r.metadata.insert(k.into(), v);
    }
    r
}

fn conjugate(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `|τ∫φ*f| ≤ √2 ‖φ‖_{BMO^c} ‖f‖_{H^c_1}`.
pub fn fefferman_check(phi: &StepFunction, f: &StepFunction) -> Result<CheckReport> {
    phi.grid().compatible(&f.grid())?;
    let f0 = remove_mean(f)?;
    let lhs = trace_pair(phi, &f0)?.norm();
    let c = std::f64::consts::SQRT_2;
    let bmo = bmo_col_norm(phi)?;
    let h1 = hardy_col_norm(&f0, 1.0)?;
    let r = CheckReport::new("fefferman", lhs, c * bmo * h1, c, true)
        .with("bmo_c", bmo)
        .with("h_c_1", h1)
        .with("ratio", if bmo * h1 > 0.0 { lhs / (bmo * h1) } else { 0.0 });
    Ok(annotate(r, f))
}

/// `|τ∫φ*f| ≤ √2 ‖φ‖_{L^c_{p'}MO} ‖f‖_{H^c_p}` for `1 < p < 2`, with the
/// upper end of the `L_{p'}MO` bracket.
pub fn hp_lpmo_check(phi: &StepFunction, f: &StepFunction, p: f64) -> Result<CheckReport> {
    if !(p > 1.0 && p < 2.0) {
        return invalid_param(format!("H_p–L_p'MO check needs 1 < p < 2, got {p}"));
    }
    phi.grid().compatible(&f.grid())?;
    let f0 = remove_mean(f)?;
    let lhs = trace_pair(phi, &f0)?.norm();
    let c = std::f64::consts::SQRT_2;
    let mo = lpmo_col_norm(phi, conjugate(p))?;
    let hp = hardy_col_norm(&f0, p)?;
    let r = CheckReport::new("hp_lpmo", lhs, c * mo.upper * hp, c, true)
        .with("p", p)
        .with("lpmo_lower", mo.lower)
        .with("lpmo_upper", mo.upper)
        .with("h_c_p", hp)
        .with("ratio", if mo.upper * hp > 0.0 { lhs / (mo.upper * hp) } else { 0.0 });
    Ok(annotate(r, f))
}

/// Hölder pairing `|τ∫φ*f| ≤ ‖f‖_{H^c_p} ‖φ‖_{H^c_{p'}}`.
pub fn hp_duality_pair(phi: &StepFunction, f: &StepFunction, p: f64) -> Result<CheckReport> {
    if !(p > 1.0 && p.is_finite()) {
        return invalid_param(format!("Hölder pairing needs 1 < p < ∞, got {p}"));
    }
    phi.grid().compatible(&f.grid())?;
    let f0 = remove_mean(f)?;
    let phi0 = remove_mean(phi)?;
    let lhs = trace_pair(&phi0, &f0)?.norm();
    let a = hardy_col_norm(&f0, p)?;
    let b = hardy_col_norm(&phi0, conjugate(p))?;
    let r = CheckReport::new("hp_duality_pair", lhs, a * b, 1.0, true).with("p", p);
    Ok(annotate(r, f))
}

fn column_square(seq: &[StepFunction]) -> Result<SquareProfile> {
    let mut acc = StepFunction::zeros(seq[0].grid());
    for a in seq {
        acc = acc.add(&a.gram())?;
    }
    SquareProfile::from_squared(acc)
}

/// `‖(Σ_n |E_n a_n|²)^{1/2}‖_p` against `‖(Σ_n |a_n|²)^{1/2}‖_p`, where
/// `a[i]` sits at level `i + 1`. Asserted (constant 1) only at `p = 2`.
pub fn stein_check(a: &[StepFunction], p: f64) -> Result<CheckReport> {
    check_exponent(p)?;
    let Some(first) = a.first() else {
        return Err(Error::Shape("Stein check needs at least one level".into()));
    };
    let grid = first.grid();
    if a.len() != grid.depth as usize {
        return Err(Error::Shape(format!("expected {} levels, got {}", grid.depth, a.len())));
    }
    for x in a {
        grid.compatible(&x.grid())?;
    }
    let projected: Vec<StepFunction> = a
        .iter()
        .enumerate()
        .map(|(i, x)| x.conditional_expectation(i as i32 + 1))
        .collect::<Result<_>>()?;
    let lhs = column_square(&projected)?.lp_norm(p)?;
    let rhs = column_square(a)?.lp_norm(p)?;
    let r = CheckReport::new("stein", lhs, rhs, 1.0, p == 2.0)
        .with("p", p)
        .with("ratio", if rhs > 0.0 { lhs / rhs } else { 0.0 });
    Ok(annotate(r, first))
}

/// `τ(y^{-s/2}(y^t − x^t)y^{-s/2}) ≤ 2 τ(y^{-(s+1-t)/2}(y − x)y^{-(s+1-t)/2})`
/// for `0 ≤ x ≤ y`, `y > 0`, `s < t`, `0 ≤ s ≤ 1 ≤ t ≤ 2`.
pub fn operator_lemma_check(x: &MatrixValue, y: &MatrixValue, s: f64, t: f64) -> Result<CheckReport> {
    if !(s < t && (0.0..=1.0).contains(&s) && (1.0..=2.0).contains(&t)) {
        return invalid_param(format!("need s < t, 0 <= s <= 1 <= t <= 2; got s = {s}, t = {t}"));
    }
    if x.dim() != y.dim() {
        return Err(Error::Shape(format!("x is {0}x{0}, y is {1}x{1}", x.dim(), y.dim())));
    }
    let gap = y - x;
    if !gap.is_hermitian(1e-10) || gap.min_eigenvalue() < -1e-10 {
        return Err(Error::NotPositive("y − x is not positive semidefinite".into()));
    }
    let min_y = 1e-8;
    let ys = y.pd_power(-s / 2.0, min_y)?;
    let yr = y.pd_power(-(s + 1.0 - t) / 2.0, min_y)?;
    let yt = y.pd_power(t, min_y)?;
    let xt = x.psd_power(t)?;
    let lhs = (&(&ys * &(&yt - &xt)) * &ys).trace().re;
    let base = (&(&yr * &gap) * &yr).trace().re;
    Ok(CheckReport::new("operator_lemma", lhs, 2.0 * base, 2.0, true)
        .with("s", s)
        .with("t", t)
        .with("dim", x.dim()))
}

fn haar_coefficients(f: &StepFunction) -> Result<CoefficientField> {
    analyze(f, &WaveletBasis::haar(), None)
}

fn flip_field(c: &CoefficientField, pattern: &SignPattern) -> Result<CoefficientField> {
    if let Some(i) = pattern.intervals().find(|i| c.get(i).is_none()) {
        return invalid_param(format!("sign pattern key {i:?} outside the analysis range"));
    }
    let mut out = CoefficientField::new(c.grid(), c.basis(), c.levels());
    for (i, m) in c.entries() {
        if let Some(s) = pattern.sign(i) {
            out.insert(*i, m.scale(s))?;
        }
    }
    Ok(out)
}

/// `T_ε f = Σ_{I ∈ 𝓘} ε_I ⟨f, w_I⟩ w_I` in the Haar basis; the scaling part
/// and intervals outside the pattern are dropped.
pub fn sign_flip(f: &StepFunction, pattern: &SignPattern) -> Result<StepFunction> {
    synthesize(&flip_field(&haar_coefficients(f)?, pattern)?, &WaveletBasis::haar())
}

/// `‖T_ε f‖_{H^c_1} ≤ ‖f‖_{H^c_1}`.
pub fn sign_flip_check(f: &StepFunction, pattern: &SignPattern) -> Result<CheckReport> {
    let lhs = hardy_col_norm(&sign_flip(f, pattern)?, 1.0)?;
    let rhs = hardy_col_norm(f, 1.0)?;
    Ok(annotate(CheckReport::new("sign_flip", lhs, rhs, 1.0, true), f).with("pattern_size", pattern.len()))
}

/// Full-set sign flips leave `S_c²` unchanged: reports the largest cell
/// difference against a relative budget `tol`.
pub fn sign_flip_full_check(f: &StepFunction, pattern: &SignPattern, tol: f64) -> Result<CheckReport> {
    let c = haar_coefficients(f)?;
    if pattern.len() != c.len() {
        return invalid_param(format!("pattern has {} signs, field has {} coefficients", pattern.len(), c.len()));
    }
    let before = square_fn_col(&c.without_scaling())?;
    let after = square_fn_col(&haar_coefficients(&sign_flip(f, pattern)?)?)?;
    let diff = before.squared().max_cell_diff(after.squared())?;
    let scale = before.squared().max_abs_entry().max(1.0);
    Ok(annotate(CheckReport::new("sign_flip_full", diff, tol * scale, 1.0, true), f))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignMode {
    /// One sign per coefficient.
    PerInterval,
    /// One sign per level.
    PerLevel,
}

/// Signed terms of the Haar expansion grouped by sign variable.
fn sign_terms(f: &StepFunction, mode: SignMode) -> Result<Vec<StepFunction>> {
    let c = haar_coefficients(f)?;
    let basis = WaveletBasis::haar();
    let groups: Vec<Vec<DyadicInterval>> = match mode {
        SignMode::PerInterval => c.intervals().map(|i| vec![*i]).collect(),
        SignMode::PerLevel => c
            .occupied_levels()
            .into_iter()
            .map(|n| c.intervals().filter(|i| i.level == n).copied().collect())
            .collect(),
    };
    if groups.len() > MAX_SIGN_VARIABLES {
        return Err(Error::TooLarge(format!(
            "{} sign variables exceed the enumeration limit {MAX_SIGN_VARIABLES}",
            groups.len()
        )));
    }
    groups
        .iter()
        .map(|g| synthesize(&c.filter(|i| g.contains(i)).without_scaling(), &basis))
        .collect()
}

/// `(E ‖Σ ε ⟨f, w_I⟩ w_I‖_p^p)^{1/p}` over all sign patterns (exact enumeration
/// in Gray-code order).
pub fn rademacher_norm(f: &StepFunction, p: f64, mode: SignMode) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return invalid_param("Rademacher average needs finite p");
    }
    let terms = sign_terms(f, mode)?;
    let Some((first, rest)) = terms.split_first() else {
        return Ok(0.0);
    };
    // ε and −ε give the same norm, so the first sign stays +1.
    let n = rest.len();
    let mut signs = vec![1.0; n];
    let fresh = |signs: &[f64]| -> Result<StepFunction> {
        let mut acc = first.clone();
        for (t, s) in rest.iter().zip(signs) {
            acc = acc.add(&t.scale(*s))?;
        }
        Ok(acc)
    };
    let mut sum = fresh(&signs)?;
    let mut total = sum.lp_norm(p)?.powf(p);
    for step in 1u64..(1u64 << n) {
        let j = step.trailing_zeros() as usize;
        signs[j] = -signs[j];
        if step % 1024 == 0 {
            sum = fresh(&signs)?;
        } else {
            sum = sum.add(&rest[j].scale(2.0 * signs[j]))?;
        }
        total += sum.lp_norm(p)?.powf(p);
    }
    Ok((total / (1u64 << n) as f64).powf(1.0 / p))
}

/// `rademacher_norm(f, 2) = ‖f‖_{H^c_2}`.
pub fn rademacher_check(f: &StepFunction, mode: SignMode, tol: f64) -> Result<CheckReport> {
    let r = rademacher_norm(f, 2.0, mode)?;
    let h = hardy_col_norm(f, 2.0)?;
    Ok(annotate(CheckReport::new("rademacher_p2", (r - h).abs(), tol * h.max(1.0), 1.0, true), f)
        .with("rademacher", r)
        .with("h_c_2", h))
}

/// `‖f − E_0 f‖_p / ‖f‖_{H_p}` with the bracket of the Hardy norm. At `p = 2`
/// the two agree exactly and the relative deviation is asserted against `tol`.
pub fn bg_equivalence_report(f: &StepFunction, p: f64, options: &HardyOptions, tol: f64) -> Result<CheckReport> {
    if !(p > 1.0 && p.is_finite()) {
        return invalid_param(format!("Burkholder–Gundy comparison needs 1 < p < ∞, got {p}"));
    }
    let f0 = remove_mean(f)?;
    let lp = f0.lp_norm(p)?;
    let h = hardy_norm_with(&f0, p, options)?;
    let ratio = |v: f64| if v > 0.0 { lp / v } else { 0.0 };
    let r = if p == 2.0 {
        CheckReport::new("bg_p2", (lp - h.upper).abs(), tol * h.upper.max(1e-300), 1.0, true)
    } else {
        CheckReport::new(format!("bg_p{p}"), lp, h.upper, ratio(h.upper), false)
    };
    Ok(annotate(r, f)
        .with("p", p)
        .with("lp_norm", lp)
        .with("ratio", ratio(h.upper))
        .with("ratio_low", ratio(h.upper))
        .with("ratio_high", ratio(h.lower)))
}

/// `‖(E_n(f*f))_n‖_{L_1(ℓ_∞)} ≥ ‖f‖_2²` (the last average is `f*f` itself);
/// other `p ≥ 2` report the maximal ratio unasserted.
pub fn doob_report(f: &StepFunction, p: f64) -> Result<CheckReport> {
    if !(p >= 2.0 && p.is_finite()) {
        return invalid_param(format!("Doob comparison needs 2 <= p < ∞, got {p}"));
    }
    let x = f.gram();
    let depth = f.grid().depth as i32;
    let terms = (0..=depth).map(|n| x.conditional_expectation(n)).collect::<Result<Vec<_>>>()?;
    let q = p / 2.0;
    let b = maximal_norm(&MaximalSequence::new(terms)?, q)?;
    let base = x.lp_norm(q)?;
    let r = if p == 2.0 {
        CheckReport::new("doob_p2", base, b.upper, 1.0, true)
    } else {
        CheckReport::new(format!("doob_p{p}"), b.lower, b.upper, if base > 0.0 { b.upper / base } else { 0.0 }, false)
    };
    Ok(annotate(r, f).with("p", p).with("base", base).with("ratio", if base > 0.0 { b.upper / base } else { 0.0 }))
}

/// `‖φ‖_{BMO^c}` from Meyer coefficients over mean-oscillation BMO; asserts
/// the ratio lies in `[1/32, 32]`. Both sides zero is reported as skipped.
pub fn bmo_equivalence_report(phi: &StepFunction, basis: &WaveletBasis) -> Result<CheckReport> {
    if basis.kind() != BasisKind::Meyer {
        return Err(Error::Unsupported("BMO equivalence compares against a regular wavelet; Haar gives dyadic BMO".into()));
    }
    let wavelet = bmo_col_norm_of(&analyze(phi, basis, None)?);
    let osc = mean_osc_bmo_norm(phi);
    let scale = phi.max_abs_entry();
    if wavelet <= 1e-12 * scale.max(1e-300) && osc <= 1e-12 * scale.max(1e-300) || scale == 0.0 {
        return Ok(annotate(CheckReport::new("bmo_equivalence", 0.0, BMO_ENVELOPE, BMO_ENVELOPE, false), phi)
            .with("skipped", "degenerate"));
    }
    let ratio = wavelet / osc;
    let spread = if ratio > 0.0 && ratio.is_finite() { ratio.max(1.0 / ratio) } else { f64::INFINITY };
    Ok(annotate(CheckReport::new("bmo_equivalence", spread, BMO_ENVELOPE, BMO_ENVELOPE, true), phi)
        .with("ratio", ratio)
        .with("bmo_wavelet", wavelet)
        .with("bmo_mean_osc", osc))
}

/// `Ψ(Φ(c)) = f − E_0 f` with Haar coefficients.
pub fn psi_phi_check(f: &StepFunction, tol: f64) -> Result<CheckReport> {
    let f0 = remove_mean(f)?;
    let basis = WaveletBasis::haar();
    let back = project_psi(&embed_phi(&analyze(&f0, &basis, None)?), &basis)?;
    let err = back.max_cell_diff(&f0)?;
    Ok(annotate(CheckReport::new("psi_phi", err, tol * f0.max_abs_entry().max(1.0), 1.0, true), f))
}

/// `‖f‖_{H^c_2} = ‖f − E_0 f‖_2`.
pub fn parseval_check(f: &StepFunction, tol: f64) -> Result<CheckReport> {
    let h = hardy_col_norm(f, 2.0)?;
    let l = remove_mean(f)?.lp_norm(2.0)?;
    Ok(annotate(CheckReport::new("parseval", (h - l).abs(), tol * l.max(1.0), 1.0, true), f)
        .with("h_c_2", h)
        .with("l_2", l))
}

/// Haar synthesis of the analysis is the identity.
pub fn calderon_check(f: &StepFunction, tol: f64) -> Result<CheckReport> {
    reconstruction_check(f, &haar_coefficients(f)?, &WaveletBasis::haar(), tol)
}

/// Compares `synthesize(c)` with `f`.
pub fn reconstruction_check(f: &StepFunction, c: &CoefficientField, basis: &WaveletBasis, tol: f64) -> Result<CheckReport> {
    let back = synthesize(c, basis)?;
    let err = back.max_cell_diff(f)?;
    Ok(annotate(CheckReport::new("calderon", err, tol * f.max_abs_entry().max(1.0), 1.0, true), f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::Grid;
    use crate::matrix::C64;
    use crate::rng::SeededRng;

    fn haar_fn(grid: Grid) -> StepFunction {
        StepFunction::from_fn(grid, |x| {
            let v = if (0.0..0.5).contains(&x) { 1.0 } else if (0.5..1.0).contains(&x) { -1.0 } else { 0.0 };
            MatrixValue::scalar(grid.dim, C64::new(v, 0.0))
        })
        .unwrap()
    }

    fn random(grid: Grid, seed: u64) -> StepFunction {
        let mut rng = SeededRng::new(seed);
        StepFunction::from_cells(grid, (0..grid.n_cells()).map(|_| rng.gaussian_matrix(grid.dim)).collect()).unwrap()
    }

    #[test]
    fn fefferman_on_haar() {
        let h = haar_fn(Grid::new(1, 3, 0, 1).unwrap());
        let r = fefferman_check(&h, &h).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14);
        assert!((r.rhs - std::f64::consts::SQRT_2).abs() < 1e-12);
        assert!(r.pass && !r.failed());
        let z = StepFunction::zeros(h.grid());
        let r = fefferman_check(&h, &z).unwrap();
        assert!(r.pass && r.lhs == 0.0);
        let other = Grid::new(1, 2, 0, 1).unwrap();
        assert!(matches!(fefferman_check(&StepFunction::zeros(other), &h), Err(Error::Shape(_))));
    }

    #[test]
    fn random_pairs_pass() {
        for seed in 0..12 {
            let grid = Grid::new(1 + (seed % 3) as usize, 3, 0, 1).unwrap();
            let phi = random(grid, 100 + seed);
            let f = random(grid, 200 + seed);
            assert!(fefferman_check(&phi, &f).unwrap().pass);
            assert!(hp_lpmo_check(&phi, &f, 1.5).unwrap().pass);
            assert!(hp_duality_pair(&phi, &f, 1.5).unwrap().pass);
            assert!(hp_duality_pair(&phi, &f, 3.0).unwrap().pass);
        }
    }

    #[test]
    fn hp_lpmo_on_haar() {
        let h = haar_fn(Grid::new(1, 3, 0, 1).unwrap());
        let r = hp_lpmo_check(&h, &h, 1.5).unwrap();
        assert!((r.lhs - 1.0).abs() < 1e-14 && r.pass);
        assert!(matches!(hp_lpmo_check(&h, &h, 2.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(hp_lpmo_check(&h, &h, 1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn holder_equality_at_two() {
        let f = random(Grid::new(2, 4, 0, 2).unwrap(), 4);
        let r = hp_duality_pair(&f, &f, 2.0).unwrap();
        assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.rhs);
        let h = hardy_col_norm(&f, 2.0).unwrap();
        assert!((r.lhs - h * h).abs() <= 1e-12 * r.lhs);
    }

    #[test]
    fn holder_disjoint_supports() {
        let grid = Grid::new(1, 3, 0, 2).unwrap();
        let a = random(grid, 1).map(|m| m.clone());
        let left = StepFunction::from_cells(grid, a.cells().iter().enumerate().map(|(k, m)| if k < 8 { m.clone() } else { MatrixValue::zeros(1) }).collect()).unwrap();
        let right = StepFunction::from_cells(grid, a.cells().iter().enumerate().map(|(k, m)| if k >= 8 { m.clone() } else { MatrixValue::zeros(1) }).collect()).unwrap();
        assert_eq!(hp_duality_pair(&left, &right, 1.5).unwrap().lhs, 0.0);
    }

    #[test]
    fn stein_cases() {
        let grid = Grid::new(2, 4, 0, 1).unwrap();
        let seq: Vec<StepFunction> = (0..4).map(|n| random(grid, 30 + n)).collect();
        assert!(stein_check(&seq, 2.0).unwrap().pass);
        let r3 = stein_check(&seq, 3.0).unwrap();
        assert!(!r3.asserted);
        let measurable: Vec<StepFunction> = seq.iter().enumerate().map(|(i, a)| a.conditional_expectation(i as i32 + 1).unwrap()).collect();
        for p in [1.0, 2.0, 4.0] {
            let r = stein_check(&measurable, p).unwrap();
            assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.rhs);
        }
        assert!(matches!(stein_check(&seq[..3], 2.0), Err(Error::Shape(_))));
    }

    #[test]
    fn operator_lemma_cases() {
        let y = MatrixValue::identity(2);
        let r = operator_lemma_check(&y, &y, 0.5, 1.5).unwrap();
        assert!(r.lhs.abs() < 1e-14 && r.rhs.abs() < 1e-14 && r.pass);
        let r = operator_lemma_check(&MatrixValue::zeros(2), &y, 0.0, 2.0).unwrap();
        assert!((r.lhs - 2.0).abs() < 1e-14 && (r.rhs - 4.0).abs() < 1e-14);
        let mut rng = SeededRng::new(11);
        for _ in 0..50 {
            let x = rng.gaussian_psd(3);
            let y = &x + &rng.gaussian_psd(3);
            let s = rng.uniform();
            let t = 1.0 + rng.uniform();
            if s < t {
                assert!(operator_lemma_check(&x, &y, s, t).unwrap().pass);
            }
        }
        assert!(matches!(operator_lemma_check(&y, &y, 1.0, 1.0), Err(Error::InvalidParameter(_))));
        assert!(matches!(operator_lemma_check(&y.scale(2.0), &y, 0.0, 1.0), Err(Error::NotPositive(_))));
        assert!(matches!(operator_lemma_check(&MatrixValue::zeros(2), &MatrixValue::zeros(2), 0.0, 1.0), Err(Error::NotPositive(_))));
    }

    fn all_signs(f: &StepFunction, positive: bool) -> SignPattern {
        SignPattern::from_pairs(haar_coefficients(f).unwrap().intervals().map(|i| (*i, positive)))
    }

    #[test]
    fn sign_flip_cases() {
        let f = random(Grid::new(2, 3, 0, 1).unwrap(), 6);
        let neg = all_signs(&f, false);
        let a = hardy_col_norm(&f, 1.0).unwrap();
        let b = hardy_col_norm(&sign_flip(&f, &neg).unwrap(), 1.0).unwrap();
        assert!((a - b).abs() <= 1e-12 * a);
        assert!(sign_flip_full_check(&f, &neg, 1e-12).unwrap().pass);
        assert!(sign_flip(&f, &SignPattern::new()).unwrap().is_zero());
        let mut rng = SeededRng::new(2);
        let c = haar_coefficients(&f).unwrap();
        let pattern = SignPattern::from_pairs(c.intervals().filter(|_| rng.coin()).map(|i| (*i, true)));
        assert!(sign_flip_check(&f, &pattern).unwrap().pass);
        let bad = SignPattern::from_pairs([(DyadicInterval::new(9, 0), true)]);
        assert!(sign_flip(&f, &bad).is_err());
    }

    #[test]
    fn rademacher_at_two_is_hardy() {
        let f = random(Grid::new(2, 3, 0, 1).unwrap(), 8);
        assert!(rademacher_check(&f, SignMode::PerInterval, 1e-10).unwrap().pass);
        assert!(rademacher_check(&f, SignMode::PerLevel, 1e-10).unwrap().pass);
        let big = random(Grid::new(1, 5, 0, 1).unwrap(), 8);
        assert!(matches!(rademacher_norm(&big, 2.0, SignMode::PerInterval), Err(Error::TooLarge(_))));
    }

    #[test]
    fn rademacher_single_term() {
        let h = haar_fn(Grid::new(1, 3, 0, 1).unwrap()).scale(3.0);
        for p in [1.0, 3.0] {
            let r = rademacher_norm(&h, p, SignMode::PerInterval).unwrap();
            assert!((r - h.lp_norm(p).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn bg_cases() {
        let f = random(Grid::new(1, 4, 0, 1).unwrap(), 9);
        let opts = HardyOptions::default();
        assert!(bg_equivalence_report(&f, 2.0, &opts, 1e-9).unwrap().pass);
        let h = haar_fn(Grid::new(1, 3, 0, 1).unwrap());
        for p in [1.5, 3.0] {
            let r = bg_equivalence_report(&h, p, &opts, 1e-9).unwrap();
            assert!((r.metadata["ratio_low"].as_f64().unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn doob_envelope() {
        let f = random(Grid::new(2, 3, 0, 1).unwrap(), 10);
        assert!(doob_report(&f, 2.0).unwrap().pass);
        assert!(!doob_report(&f, 4.0).unwrap().asserted);
    }

    #[test]
    fn bmo_equivalence_needs_meyer() {
        let grid = Grid::new(1, 4, -2, 2).unwrap();
        let bump = StepFunction::from_fn(grid, |x| MatrixValue::scalar(1, C64::new((-x * x * 2.0).exp(), 0.0))).unwrap();
        assert!(matches!(bmo_equivalence_report(&bump, &WaveletBasis::haar()), Err(Error::Unsupported(_))));
        let r = bmo_equivalence_report(&bump, &WaveletBasis::default_meyer()).unwrap();
        assert!(r.pass, "{r:?}");
        let c = StepFunction::zeros(grid);
        assert!(!bmo_equivalence_report(&c, &WaveletBasis::default_meyer()).unwrap().asserted);
    }

    #[test]
    fn identities() {
        let f = random(Grid::new(3, 4, -1, 1).unwrap(), 12);
        let tol = Tolerances::default();
        assert!(psi_phi_check(&f, tol.psi_phi).unwrap().pass);
        assert!(parseval_check(&f, tol.parseval).unwrap().pass);
        assert!(calderon_check(&f, tol.calderon).unwrap().pass);
        let mut c = haar_coefficients(&f).unwrap();
        let i = *c.intervals().next().unwrap();
        let bumped = c.get(&i).unwrap() + &MatrixValue::identity(3);
        c.insert(i, bumped).unwrap();
        assert!(reconstruction_check(&f, &c, &WaveletBasis::haar(), tol.calderon).unwrap().failed());
    }

    #[test]
    fn report_json() {
        let r = CheckReport::new("x", 1.0, 2.0, 1.0, true).with("seed", 3u64);
        assert_eq!(
            r.to_json(),
            r#"{"name":"x","lhs":1.0000000000000000e0,"rhs":2.0000000000000000e0,"constant_used":1.0000000000000000e0,"margin":1.0000000000000000e0,"pass":true,"asserted":true,"metadata":{"seed":3}}"#
        );
        assert!(!CheckReport::new("y", 2.0, 1.0, 1.0, false).failed());
    }
}
