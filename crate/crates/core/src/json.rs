//! JSON encodings of step functions and coefficient fields, plus a serializer
//! that prints every float with 17 significant digits.

use std::io;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter};

use crate::dyadic::{Grid, StepFunction};
use crate::error::{Error, Result};
use crate::matrix::{MatrixValue, C64};

/// Compact JSON with floats written as `{:.16e}`.
#[derive(Default)]
struct PreciseFormatter(CompactFormatter);

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, PreciseFormatter::default());
    value.serialize(&mut ser).expect("serializing to memory cannot fail");
    String::from_utf8(out).expect("serde_json emits UTF-8")
}

/// Deserializes with a JSON-path diagnostic on failure.
pub fn from_json_str<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &MatrixValue) -> MatrixJson {
    let d = m.dim();
    (0..d)
        .map(|i| (0..d).map(|j| { let z = m.get(i, j); [z.re, z.im] }).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson, dim: usize, path: &str) -> Result<MatrixValue> {
    if rows.len() != dim {
        return Err(Error::Parse {
            path: path.to_string(),
            message: format!("expected {dim} rows, found {}", rows.len()),
        });
    }
    let mut entries = Vec::with_capacity(dim * dim);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(Error::Parse {
                path: format!("{path}[{i}]"),
                message: format!("expected {dim} entries, found {}", row.len()),
            });
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Parse {
                    path: format!("{path}[{i}][{j}]"),
                    message: "non-finite entry".into(),
                });
            }
            entries.push(C64::new(re, im));
        }
    }
    Ok(MatrixValue::from_row_major(dim, &entries))
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SupportJson {
    pub lo: i64,
    pub hi: i64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepFunctionJson {
    pub dim: usize,
    pub depth: u32,
    pub support: SupportJson,
    pub cells: Vec<MatrixJson>,
}

impl From<&StepFunction> for StepFunctionJson {
    fn from(f: &StepFunction) -> Self {
        let g = f.grid();
        StepFunctionJson {
            dim: g.dim,
            depth: g.depth,
            support: SupportJson { lo: g.lo, hi: g.hi },
            cells: f.cells().iter().map(matrix_to_json).collect(),
        }
    }
}

impl StepFunctionJson {
    pub fn into_step_function(self) -> Result<StepFunction> {
        let grid = Grid::new(self.dim, self.depth, self.support.lo, self.support.hi).map_err(|e| Error::Parse {
            path: "support".into(),
            message: e.to_string(),
        })?;
        if self.cells.len() != grid.n_cells() {
            return Err(Error::Parse {
                path: "cells".into(),
                message: format!("expected {} cells for this grid, found {}", grid.n_cells(), self.cells.len()),
            });
        }
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(k, c)| matrix_from_json(c, self.dim, &format!("cells[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        StepFunction::from_cells(grid, cells)
    }
}

pub fn step_function_to_json(f: &StepFunction) -> String {
    to_json_string(&StepFunctionJson::from(f))
}

pub fn step_function_from_json(text: &str) -> Result<StepFunction> {
    from_json_str::<StepFunctionJson>(text)?.into_step_function()
}
