//! Seeded test functions.

use std::fmt;
use std::path::{Path, PathBuf};

use crate::dyadic::{Grid, StepFunction};
use crate::json::step_function_to_json;
use crate::matrix::{MatrixValue, C64};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusKind {
    /// i.i.d. complex Gaussian matrix per cell.
    Gaussian,
    /// Real Gaussian diagonal per cell.
    Diagonal,
    /// `g(x)·1` with `g` complex Gaussian per cell.
    Scalar,
    /// Two Gaussian bumps with random matrix amplitudes, sampled at cell centers.
    SmoothBump,
}

impl CorpusKind {
    pub const ALL: [CorpusKind; 4] = [CorpusKind::Gaussian, CorpusKind::Diagonal, CorpusKind::Scalar, CorpusKind::SmoothBump];

    pub fn name(&self) -> &'static str {
        match self {
            CorpusKind::Gaussian => "gaussian",
            CorpusKind::Diagonal => "diagonal",
            CorpusKind::Scalar => "scalar",
            CorpusKind::SmoothBump => "bump",
        }
    }
}

impl fmt::Display for CorpusKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn sample(kind: CorpusKind, grid: Grid, rng: &mut SeededRng) -> StepFunction {
    let d = grid.dim;
    let n = grid.n_cells();
    let cells: Vec<MatrixValue> = match kind {
        CorpusKind::Gaussian => (0..n).map(|_| rng.gaussian_matrix(d)).collect(),
        CorpusKind::Diagonal => (0..n).map(|_| rng.gaussian_diagonal(d)).collect(),
        CorpusKind::Scalar => (0..n).map(|_| MatrixValue::scalar(d, rng.complex_normal())).collect(),
        CorpusKind::SmoothBump => {
            let (lo, hi) = (grid.lo as f64, grid.hi as f64);
            let len = hi - lo;
            let bumps: Vec<(f64, f64, MatrixValue)> = (0..2)
                .map(|_| {
                    let c = rng.uniform_in(lo + 0.3 * len, hi - 0.3 * len);
                    let s = len * rng.uniform_in(0.04, 0.1);
                    (c, s, rng.gaussian_matrix(d))
                })
                .collect();
            (0..n)
                .map(|k| {
                    let x = grid.cell_center(k);
                    let mut acc = MatrixValue::zeros(d);
                    for (c, s, a) in &bumps {
                        acc.add_scaled(a, (-(x - c) * (x - c) / (2.0 * s * s)).exp());
                    }
                    acc
                })
                .collect()
        }
    };
    StepFunction::from_cells(grid, cells).expect("cell count matches the grid")
}

/// Real diagonal bumps: `diag(b_1(x), …, b_d(x))` with independent scalar bumps.
pub fn diagonal_bump(grid: Grid, rng: &mut SeededRng) -> StepFunction {
    let scalar = Grid { dim: 1, ..grid };
    let parts: Vec<StepFunction> = (0..grid.dim).map(|_| real_bump(scalar, rng)).collect();
    let cells = (0..grid.n_cells())
        .map(|k| MatrixValue::diagonal(&parts.iter().map(|p| p.cell(k).get(0, 0).re).collect::<Vec<_>>()))
        .collect();
    StepFunction::from_cells(grid, cells).expect("cell count matches the grid")
}

/// Scalar real bump with positive and negative lobes, times the identity.
pub fn real_bump(grid: Grid, rng: &mut SeededRng) -> StepFunction {
    let (lo, hi) = (grid.lo as f64, grid.hi as f64);
    let len = hi - lo;
    let bumps: Vec<(f64, f64, f64)> = (0..2)
        .map(|_| (rng.uniform_in(lo + 0.3 * len, hi - 0.3 * len), len * rng.uniform_in(0.04, 0.1), rng.normal()))
        .collect();
    StepFunction::from_fn(grid, |x| {
        let v: f64 = bumps.iter().map(|(c, s, a)| a * (-(x - c) * (x - c) / (2.0 * s * s)).exp()).sum();
        MatrixValue::scalar(grid.dim, C64::new(v, 0.0))
    })
    .expect("cell count matches the grid")
}

/// `count` members of every kind; member `i` of kind `k` uses stream `4i + k`.
pub fn generate(seed: u64, grid: Grid, count: usize) -> Vec<(String, StepFunction)> {
    let mut out = Vec::with_capacity(4 * count);
    for i in 0..count {
        for (k, kind) in CorpusKind::ALL.iter().enumerate() {
            let mut rng = SeededRng::derive(seed, (4 * i + k) as u64);
            out.push((format!("{kind}_{i:03}.json"), sample(*kind, grid, &mut rng)));
        }
    }
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

/// Writes [`generate`]'s output as one JSON file per member.
pub fn write(dir: &Path, members: &[(String, StepFunction)]) -> std::io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    members
        .iter()
        .map(|(name, f)| {
            let path = dir.join(name);
            std::fs::write(&path, step_function_to_json(f) + "\n")?;
            Ok(path)
        })
        .collect()
}
