use opval_core::corpus::{sample, CorpusKind};
use opval_core::dyadic::{DyadicInterval, Grid, StepFunction};
use opval_core::matrix::MatrixValue;
use opval_core::norms::*;
use opval_core::rng::SeededRng;
use opval_core::wavelet::{wavelet_eval, WaveletBasis};

fn haar_h(dim: usize) -> StepFunction {
    let grid = Grid::new(dim, 4, 0, 1).unwrap();
    let i = DyadicInterval::new(0, 0);
    StepFunction::from_fn(grid, |x| MatrixValue::identity(dim).scale(wavelet_eval(&WaveletBasis::haar(), &i, x))).unwrap()
}

fn constant() -> StepFunction {
    let grid = Grid::new(2, 3, 0, 2).unwrap();
    StepFunction::from_fn(grid, |_| MatrixValue::from_real_row_major(2, &[1.0, 2.0, -0.5, 3.0])).unwrap()
}

#[test]
fn haar_h_values() {
    let h = haar_h(1);
    for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
        assert!((hardy_col_norm(&h, p).unwrap() - 1.0).abs() < 1e-12);
        assert!((hardy_row_norm(&h, p).unwrap() - 1.0).abs() < 1e-12);
    }
    assert!((bmo_col_norm(&h).unwrap() - 1.0).abs() < 1e-12);
    assert!((mean_osc_bmo_norm(&h) - 1.0).abs() < 1e-12);
}

#[test]
fn constants_vanish() {
    let c = constant();
    assert_eq!(hardy_col_norm(&c, 1.0).unwrap(), 0.0);
    assert_eq!(bmo_norm(&c).unwrap(), 0.0);
    assert!(mean_osc_bmo_norm(&c) < 1e-12);
    let b = lpmo_col_norm(&c, 4.0).unwrap();
    assert_eq!((b.lower, b.upper), (0.0, 0.0));
    assert!(lpmo_col_norm(&c, 2.0).is_err());
}

#[test]
fn hardy_brackets() {
    let zero = StepFunction::zeros(Grid::new(2, 3, 0, 1).unwrap());
    let b = hardy_norm(&zero, 1.0).unwrap();
    assert_eq!((b.lower, b.upper), (0.0, 0.0));

    let mut rng = SeededRng::new(4);
    let grid = Grid::new(1, 4, 0, 1).unwrap();
    for _ in 0..3 {
        let f = sample(CorpusKind::Diagonal, grid, &mut rng);
        for p in [1.0, 1.5] {
            let b = hardy_norm(&f, p).unwrap();
            assert!(b.relative_width() <= 1e-2, "{b:?}");
            assert!(b.upper <= hardy_col_norm(&f, p).unwrap() * (1.0 + 1e-9));
        }
    }

    let f = sample(CorpusKind::Gaussian, Grid::new(2, 3, 0, 1).unwrap(), &mut rng);
    let b = hardy_norm(&f, 3.0).unwrap();
    let want = hardy_col_norm(&f, 3.0).unwrap().max(hardy_row_norm(&f, 3.0).unwrap());
    assert_eq!((b.lower, b.upper), (want, want));
}

#[test]
fn maximal_examples() {
    let mut rng = SeededRng::new(8);
    let grid = Grid::new(2, 3, 0, 1).unwrap();
    let x = sample(CorpusKind::Gaussian, grid, &mut rng).gram();
    for q in [1.0, 2.0, 3.5] {
        let want = x.lp_norm(q).unwrap();
        let one = maximal_norm(&MaximalSequence::new(vec![x.clone()]).unwrap(), q).unwrap();
        assert!((one.lower - want).abs() <= 1e-8 * want && (one.upper - want).abs() <= 1e-8 * want);
        let same = maximal_norm(&MaximalSequence::new(vec![x.clone(); 3]).unwrap(), q).unwrap();
        assert!(same.contains(want, 1e-6) && same.relative_width() <= 1e-6, "{same:?}");
    }
    let bad = x.scale(-1.0);
    assert!(MaximalSequence::new(vec![bad]).and_then(|s| maximal_norm(&s, 2.0)).is_err());
}

#[test]
fn lpmo_examples() {
    let mut rng = SeededRng::new(12);
    let phi = sample(CorpusKind::Gaussian, Grid::new(2, 4, 0, 1).unwrap(), &mut rng);
    let bmo = bmo_col_norm(&phi).unwrap();
    let b = lpmo_col_norm(&phi, f64::INFINITY).unwrap();
    assert!((b.upper - bmo).abs() <= 1e-6 * bmo, "{b:?} vs {bmo}");

    // Commutative case: the maximal function of the dyadic averages.
    let grid = Grid::new(1, 4, 0, 1).unwrap();
    let phi = sample(CorpusKind::Diagonal, grid, &mut rng);
    let c = opval_core::wavelet::analyze(&phi, &WaveletBasis::haar(), None).unwrap();
    let seq = lpmo_sequence(&c).unwrap();
    for p in [3.0, 4.0, 6.0] {
        let q = p / 2.0;
        let h = grid.cell_width();
        let s: f64 = (0..grid.n_cells())
            .map(|k| h * seq.terms().iter().map(|t| t.cell(k).get(0, 0).re).fold(0.0, f64::max).powf(q))
            .sum();
        let exact = s.powf(1.0 / q).sqrt();
        assert!(lpmo_col_norm(&phi, p).unwrap().contains(exact, 1e-9));
    }
}

#[test]
fn diagonal_mean_oscillation_is_componentwise() {
    let mut rng = SeededRng::new(2);
    let grid = Grid::new(2, 4, 0, 2).unwrap();
    let f = sample(CorpusKind::Diagonal, grid, &mut rng);
    let part = |d: usize| {
        let g = Grid { dim: 1, ..grid };
        let cells = f.cells().iter().map(|m| MatrixValue::scalar(1, m.get(d, d))).collect();
        mean_osc_bmo_norm(&StepFunction::from_cells(g, cells).unwrap())
    };
    assert!((mean_osc_bmo_norm(&f) - part(0).max(part(1))).abs() < 1e-12);
}
