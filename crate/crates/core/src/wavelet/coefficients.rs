use std::collections::BTreeMap;
use std::ops::Bound;

use serde::{Deserialize, Serialize};

use super::BasisKind;
use crate::dyadic::{DyadicInterval, Grid};
use crate::error::{Error, Result};
use crate::json::{from_json_str, matrix_from_json, matrix_to_json, to_json_string, MatrixJson, SupportJson};
use crate::matrix::MatrixValue;

/// Inclusive range of storage levels; empty when `min > max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelRange {
    pub min: i32,
    pub max: i32,
}

impl LevelRange {
    pub fn new(min: i32, max: i32) -> Self {
        LevelRange { min, max }
    }

    pub fn is_empty(&self) -> bool {
        self.min > self.max
    }

    pub fn contains(&self, level: i32) -> bool {
        self.min <= level && level <= self.max
    }

    pub fn iter(&self) -> std::ops::RangeInclusive<i32> {
        self.min..=self.max
    }
}

/// Wavelet coefficients `I ↦ ⟨f, w_I⟩` over a grid, plus the unit-cell means
/// (Haar only; empty means zero).
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientField {
    grid: Grid,
    basis: BasisKind,
    levels: LevelRange,
    entries: BTreeMap<DyadicInterval, MatrixValue>,
    scaling: Vec<MatrixValue>,
}

impl CoefficientField {
    pub fn new(grid: Grid, basis: BasisKind, levels: LevelRange) -> Self {
        CoefficientField { grid, basis, levels, entries: BTreeMap::new(), scaling: Vec::new() }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim
    }

    pub fn basis(&self) -> BasisKind {
        self.basis
    }

    pub fn levels(&self) -> LevelRange {
        self.levels
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn insert(&mut self, interval: DyadicInterval, value: MatrixValue) -> Result<()> {
        if value.dim() != self.grid.dim {
            return Err(Error::Shape(format!("coefficient of dim {} in a dim {} field", value.dim(), self.grid.dim)));
        }
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite coefficient at {interval:?}")));
        }
        if !self.levels.contains(interval.level) {
            return Err(Error::InvalidInput(format!(
                "interval {interval:?} outside level range {}..={}",
                self.levels.min, self.levels.max
            )));
        }
        if self.basis == BasisKind::Haar && !self.grid.covers(&interval) {
            return Err(Error::InvalidInput(format!("Haar interval {interval:?} not inside the grid window")));
        }
        self.entries.insert(interval, value);
        Ok(())
    }

    pub fn get(&self, interval: &DyadicInterval) -> Option<&MatrixValue> {
        self.entries.get(interval)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&DyadicInterval, &MatrixValue)> {
        self.entries.iter()
    }

    pub fn intervals(&self) -> impl Iterator<Item = &DyadicInterval> {
        self.entries.keys()
    }

    /// Entries with `from ≤ I ≤ to` in the (level, offset) order.
    pub fn range(&self, from: DyadicInterval, to: DyadicInterval) -> impl Iterator<Item = (&DyadicInterval, &MatrixValue)> {
        let upper = if from <= to { Bound::Included(to) } else { Bound::Excluded(from) };
        self.entries.range((Bound::Included(from), upper))
    }

    /// Distinct levels carrying entries, ascending.
    pub fn occupied_levels(&self) -> Vec<i32> {
        let mut levels: Vec<i32> = self.entries.keys().map(|i| i.level).collect();
        levels.dedup();
        levels
    }

    pub fn scaling(&self) -> &[MatrixValue] {
        &self.scaling
    }

    pub fn set_scaling(&mut self, scaling: Vec<MatrixValue>) -> Result<()> {
        let units = (self.grid.hi - self.grid.lo) as usize;
        if !scaling.is_empty() && scaling.len() != units {
            return Err(Error::Shape(format!("scaling part needs {units} unit-cell means, got {}", scaling.len())));
        }
        if let Some(m) = scaling.iter().find(|m| m.dim() != self.grid.dim) {
            return Err(Error::Shape(format!("scaling matrix of dim {} in a dim {} field", m.dim(), self.grid.dim)));
        }
        self.scaling = scaling;
        Ok(())
    }

    pub fn without_scaling(&self) -> Self {
        CoefficientField { scaling: Vec::new(), ..self.clone() }
    }

    /// Entries satisfying `keep`; the scaling part is retained.
    pub fn filter(&self, keep: impl Fn(&DyadicInterval) -> bool) -> Self {
        let entries = self.entries.iter().filter(|(i, _)| keep(i)).map(|(i, m)| (*i, m.clone())).collect();
        CoefficientField { entries, ..self.clone() }
    }

    /// Applies `f` to every coefficient and scaling matrix.
    pub fn map(&self, f: impl Fn(&MatrixValue) -> MatrixValue) -> Self {
        CoefficientField {
            entries: self.entries.iter().map(|(i, m)| (*i, f(m))).collect(),
            scaling: self.scaling.iter().map(&f).collect(),
            ..self.clone()
        }
    }

    pub fn adjoint(&self) -> Self {
        self.map(MatrixValue::adjoint)
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|m| m.scale(s))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.grid.compatible(&other.grid)?;
        if self.basis != other.basis {
            return Err(Error::Shape("cannot add coefficient fields of different bases".into()));
        }
        let levels = LevelRange::new(self.levels.min.min(other.levels.min), self.levels.max.max(other.levels.max));
        let mut entries = self.entries.clone();
        for (i, m) in &other.entries {
            entries.entry(*i).and_modify(|e| *e += m).or_insert_with(|| m.clone());
        }
        let scaling = match (self.scaling.is_empty(), other.scaling.is_empty()) {
            (true, _) => other.scaling.clone(),
            (_, true) => self.scaling.clone(),
            _ => self.scaling.iter().zip(&other.scaling).map(|(a, b)| a + b).collect(),
        };
        Ok(CoefficientField { grid: self.grid, basis: self.basis, levels, entries, scaling })
    }

    /// Largest entrywise difference over the union of keys (missing = 0).
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0_f64;
        for (i, m) in &self.entries {
            worst = worst.max(match other.entries.get(i) {
                Some(o) => m.max_abs_diff(o),
                None => m.max_abs_entry(),
            });
        }
        for (i, m) in &other.entries {
            if !self.entries.contains_key(i) {
                worst = worst.max(m.max_abs_entry());
            }
        }
        let zero = MatrixValue::zeros(self.dim());
        let n = self.scaling.len().max(other.scaling.len());
        for k in 0..n {
            let a = self.scaling.get(k).unwrap_or(&zero);
            let b = other.scaling.get(k).unwrap_or(&zero);
            worst = worst.max(a.max_abs_diff(b));
        }
        worst
    }

    /// `Σ_I ‖c_I‖²_HS`.
    pub fn hs_energy(&self) -> f64 {
        self.entries.values().map(MatrixValue::hs_norm_sq).sum()
    }

    pub fn to_json(&self) -> String {
        to_json_string(&CoefficientFieldJson::from(self))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        from_json_str::<CoefficientFieldJson>(text)?.into_field()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub level: i32,
    pub offset: i64,
    pub matrix: MatrixJson,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientFieldJson {
    pub dim: usize,
    pub depth: u32,
    pub support: SupportJson,
    pub basis: BasisKind,
    pub levels: LevelRange,
    pub entries: Vec<EntryJson>,
    pub scaling: Vec<MatrixJson>,
}

impl From<&CoefficientField> for CoefficientFieldJson {
    fn from(c: &CoefficientField) -> Self {
        CoefficientFieldJson {
            dim: c.grid.dim,
            depth: c.grid.depth,
            support: SupportJson { lo: c.grid.lo, hi: c.grid.hi },
            basis: c.basis,
            levels: c.levels,
            entries: c
                .entries
                .iter()
                .map(|(i, m)| EntryJson { level: i.level, offset: i.offset, matrix: matrix_to_json(m) })
                .collect(),
            scaling: c.scaling.iter().map(matrix_to_json).collect(),
        }
    }
}

impl CoefficientFieldJson {
    pub fn into_field(self) -> Result<CoefficientField> {
        let parse = |path: String, e: Error| Error::Parse { path, message: e.to_string() };
        let grid = Grid::new(self.dim, self.depth, self.support.lo, self.support.hi).map_err(|e| parse("support".into(), e))?;
        let mut field = CoefficientField::new(grid, self.basis, self.levels);
        for (k, e) in self.entries.iter().enumerate() {
            let path = format!("entries[{k}]");
            let m = matrix_from_json(&e.matrix, self.dim, &format!("{path}.matrix"))?;
            field.insert(DyadicInterval::new(e.level, e.offset), m).map_err(|err| parse(path, err))?;
        }
        let scaling = self
            .scaling
            .iter()
            .enumerate()
            .map(|(k, m)| matrix_from_json(m, self.dim, &format!("scaling[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        field.set_scaling(scaling).map_err(|e| parse("scaling".into(), e))?;
        Ok(field)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;

    #[test]
    fn json_round_trip() {
        let grid = Grid::new(2, 3, 0, 2).unwrap();
        let mut rng = SeededRng::new(4);
        let mut c = CoefficientField::new(grid, BasisKind::Haar, LevelRange::new(0, 2));
        c.insert(DyadicInterval::new(0, 1), rng.gaussian_matrix(2)).unwrap();
        c.insert(DyadicInterval::new(2, 3), rng.gaussian_matrix(2)).unwrap();
        c.set_scaling(vec![rng.gaussian_matrix(2), rng.gaussian_matrix(2)]).unwrap();
        let text = c.to_json();
        let back = CoefficientField::from_json(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn rejects_out_of_window_entries() {
        let grid = Grid::new(1, 3, 0, 1).unwrap();
        let mut c = CoefficientField::new(grid, BasisKind::Haar, LevelRange::new(0, 2));
        assert!(c.insert(DyadicInterval::new(0, 1), MatrixValue::identity(1)).is_err());
        assert!(c.insert(DyadicInterval::new(3, 0), MatrixValue::identity(1)).is_err());
        let bad = r#"{"dim":1,"depth":3,"support":{"lo":0,"hi":1},"basis":"haar","levels":{"min":0,"max":2},"entries":[{"level":0,"offset":5,"matrix":[[[1.0,0.0]]]}],"scaling":[]}"#;
        match CoefficientField::from_json(bad) {
            Err(Error::Parse { path, .. }) => assert_eq!(path, "entries[0]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn range_queries() {
        let grid = Grid::new(1, 4, 0, 1).unwrap();
        let mut c = CoefficientField::new(grid, BasisKind::Haar, LevelRange::new(0, 3));
        for j in 0..8 {
            c.insert(DyadicInterval::new(3, j), MatrixValue::identity(1)).unwrap();
        }
        c.insert(DyadicInterval::new(2, 1), MatrixValue::identity(1)).unwrap();
        assert_eq!(c.range(DyadicInterval::new(3, 2), DyadicInterval::new(3, 4)).count(), 3);
        assert_eq!(c.range(DyadicInterval::new(3, 4), DyadicInterval::new(3, 2)).count(), 0);
        assert_eq!(c.occupied_levels(), vec![2, 3]);
    }
}
