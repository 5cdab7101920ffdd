//! Seeded random numbers for reproducible corpora.
//!
//! The stream is SplitMix64 with the seed used as initial state: each draw adds
//! `0x9E3779B97F4A7C15` to the state and returns
//! `z ^ (z >> 31)` where `z` is the state passed through
//! `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9; z = (z ^ (z >> 27)) * 0x94D049BB133111EB`
//! (wrapping arithmetic).
//!
//! Derived quantities:
//! - uniform `[0, 1)`: `(next >> 11) · 2^-53`
//! - standard normal: Box–Muller cosine branch, two draws per sample,
//!   `sqrt(-2 ln(1 − u1)) · cos(2π u2)` with `u1, u2` uniform as above
//! - standard complex normal: independent real and imaginary normals scaled by `1/√2`

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;

use crate::matrix::{MatrixValue, C64};

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: SplitMix64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng { inner: SplitMix64::seed_from_u64(seed) }
    }

    /// Independent child stream, e.g. one per check or corpus member.
    pub fn derive(seed: u64, stream: u64) -> Self {
        let mut mixer = SeededRng::new(seed ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03));
        SeededRng::new(mixer.next_u64())
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_in(&mut self, lo: i64, hi: i64) -> i64 {
        let span = (hi - lo + 1) as u64;
        lo + (self.next_u64() % span) as i64
    }

    pub fn coin(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform();
        let u2 = self.uniform();
        (-2.0 * (1.0 - u1).ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(s * self.normal(), s * self.normal())
    }

    /// Matrix with i.i.d. standard complex normal entries, drawn row-major.
    pub fn gaussian_matrix(&mut self, dim: usize) -> MatrixValue {
        let entries: Vec<C64> = (0..dim * dim).map(|_| self.complex_normal()).collect();
        MatrixValue::from_row_major(dim, &entries)
    }

    /// Real diagonal matrix with standard normal entries.
    pub fn gaussian_diagonal(&mut self, dim: usize) -> MatrixValue {
        let values: Vec<f64> = (0..dim).map(|_| self.normal()).collect();
        MatrixValue::diagonal(&values)
    }

    /// Random PSD matrix `B* B` with `B` Gaussian.
    pub fn gaussian_psd(&mut self, dim: usize) -> MatrixValue {
        self.gaussian_matrix(dim).gram()
    }
}
