//! Sampled Meyer wavelet.
//!
//! The mother wavelet is given by its Fourier transform
//! `ŵ(ξ) = b(|ξ|)` with
//!
//! ```text
//! b(ξ) = sin(π/2 · ν(3ξ/(2π) − 1))   for 2π/3 ≤ ξ ≤ 4π/3
//! b(ξ) = cos(π/2 · ν(3ξ/(4π) − 1))   for 4π/3 ≤ ξ ≤ 8π/3
//! ν(s) = s⁴ (35 − 84s + 70s² − 20s³)
//! ```
//!
//! and zero elsewhere, so `w(u) = (1/π) ∫ b(ξ) cos(ξu) dξ` is real, even, and
//! `|I|^{-1/2} w((x − c_I)/|I|)` runs over an orthonormal basis of `L²(ℝ)`.
//! Samples are taken on `u = −T + iδ` by Gauss–Legendre quadrature with panel
//! boundaries at the knots of `b`. Between samples the wavelet is linearly
//! interpolated; integrals over cells use the exact antiderivative of that
//! interpolant.

use std::f64::consts::PI;

use crate::error::{invalid_param, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeyerParams {
    /// Sample spacing δ.
    pub step: f64,
    /// Truncation radius T; samples cover `[−T, T]`.
    pub radius: f64,
    /// Decay exponent m used by [`MeyerWavelet::decay_constant`].
    pub decay: f64,
}

impl MeyerParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.radius > 0.0) {
            return invalid_param("Meyer sample step and radius must be positive");
        }
        if !(self.decay >= 2.0) {
            return invalid_param(format!("decay exponent m = {} must be at least 2", self.decay));
        }
        let half = self.radius / self.step;
        if (half - half.round()).abs() > 1e-9 || half > 1e7 {
            return invalid_param("radius must be an integer multiple of step (and at most 1e7 steps)");
        }
        Ok(())
    }
}

impl Default for MeyerParams {
    fn default() -> Self {
        MeyerParams { step: 1.0 / 1024.0, radius: 32.0, decay: 2.0 }
    }
}

#[derive(Clone, Debug)]
pub struct MeyerWavelet {
    params: MeyerParams,
    values: Vec<f64>,
    derivative: Vec<f64>,
    /// `cumulative[i] = ∫_{−T}^{u_i}` of the linear interpolant.
    cumulative: Vec<f64>,
    normalization: f64,
}

fn transition(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else {
        s.powi(4) * (35.0 - 84.0 * s + 70.0 * s * s - 20.0 * s * s * s)
    }
}

/// `|ŵ(ξ)|` for `ξ ≥ 0`.
pub fn meyer_profile(xi: f64) -> f64 {
    let xi = xi.abs();
    if !(2.0 * PI / 3.0..=8.0 * PI / 3.0).contains(&xi) {
        0.0
    } else if xi <= 4.0 * PI / 3.0 {
        (PI / 2.0 * transition(3.0 * xi / (2.0 * PI) - 1.0)).sin()
    } else {
        (PI / 2.0 * transition(3.0 * xi / (4.0 * PI) - 1.0)).cos()
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Quadrature nodes `(ξ, weight · b(ξ))` for the band `[2π/3, 8π/3]`, with
/// enough panels that `ξ u` turns by less than four radians per panel for
/// `|u| ≤ radius`.
fn band_nodes(radius: f64) -> Vec<(f64, f64)> {
    let rule = gauss_legendre(16);
    let knots = [2.0 * PI / 3.0, 4.0 * PI / 3.0, 8.0 * PI / 3.0];
    let mut nodes = Vec::new();
    for seg in knots.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        let panels = ((radius.max(1.0) * (b - a)) / 4.0).ceil().max(4.0) as usize;
        let h = (b - a) / panels as f64;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            for &(x, wt) in &rule {
                let xi = mid + 0.5 * h * x;
                nodes.push((xi, 0.5 * h * wt * meyer_profile(xi)));
            }
        }
    }
    nodes
}

impl MeyerWavelet {
    pub fn new(params: MeyerParams) -> Result<Self> {
        params.validate()?;
        let half = (params.radius / params.step).round() as usize;
        let nodes = band_nodes(params.radius);
        // w is even and w' is odd; evaluate u ≥ 0 and mirror.
        let mut pos_val = vec![0.0; half + 1];
        let mut pos_der = vec![0.0; half + 1];
        for i in 0..=half {
            let u = i as f64 * params.step;
            let (mut v, mut d) = (0.0, 0.0);
            for &(xi, wb) in &nodes {
                let (s, c) = (xi * u).sin_cos();
                v += wb * c;
                d -= wb * xi * s;
            }
            pos_val[i] = v / PI;
            pos_der[i] = d / PI;
        }
        let n = 2 * half + 1;
        let mut values = vec![0.0; n];
        let mut derivative = vec![0.0; n];
        for i in 0..n {
            let j = i as i64 - half as i64;
            values[i] = pos_val[j.unsigned_abs() as usize];
            derivative[i] = pos_der[j.unsigned_abs() as usize] * j.signum() as f64;
        }
        let delta = params.step;
        let trapezoid = |v: &[f64]| delta * (v.iter().sum::<f64>() - 0.5 * (v[0] + v[n - 1]));
        // Truncation leaves the tail mass ∫_{|u|>T} w behind. Put it back as a
        // sin² taper on the outer band so the sampled wavelet keeps its
        // vanishing moment.
        let band = (params.radius / 2.0).min(4.0);
        let inner = params.radius - band;
        let mut taper = vec![0.0; n];
        let mut taper_der = vec![0.0; n];
        for i in 0..n {
            let u = -params.radius + i as f64 * delta;
            let s = u.abs() - inner;
            if s > 0.0 {
                let a = PI * s / band;
                taper[i] = a.sin().powi(2);
                taper_der[i] = (PI / band) * (2.0 * a).sin() * u.signum();
            }
        }
        let shift = trapezoid(&values) / trapezoid(&taper);
        for i in 0..n {
            values[i] -= shift * taper[i];
            derivative[i] -= shift * taper_der[i];
        }
        let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
        let normalization = 1.0 / trapezoid(&squares).sqrt();
        for v in values.iter_mut() {
            *v *= normalization;
        }
        for d in derivative.iter_mut() {
            *d *= normalization;
        }
        let mut cumulative = vec![0.0; n];
        for i in 1..n {
            cumulative[i] = cumulative[i - 1] + 0.5 * delta * (values[i - 1] + values[i]);
        }
        Ok(MeyerWavelet { params, values, derivative, cumulative, normalization })
    }

    pub fn params(&self) -> MeyerParams {
        self.params
    }

    /// Factor applied to the raw quadrature samples to make their discrete
    /// `L²` norm exactly one.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn samples(&self) -> &[f64] {
        &self.values
    }

    pub fn derivative_samples(&self) -> &[f64] {
        &self.derivative
    }

    pub fn sample_point(&self, i: usize) -> f64 {
        -self.params.radius + i as f64 * self.params.step
    }

    /// Linear interpolation of the samples; zero outside `[−T, T]`.
    pub fn value(&self, u: f64) -> f64 {
        let t = (u + self.params.radius) / self.params.step;
        if !(t >= 0.0) || t > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let s = t - i as f64;
        self.values[i] + s * (self.values[i + 1] - self.values[i])
    }

    /// `∫_{−∞}^{u}` of the interpolated wavelet.
    pub fn antiderivative(&self, u: f64) -> f64 {
        let last = self.values.len() - 1;
        let t = (u + self.params.radius) / self.params.step;
        if !(t > 0.0) {
            return 0.0;
        }
        if t >= last as f64 {
            return self.cumulative[last];
        }
        let i = (t.floor() as usize).min(last - 1);
        let s = t - i as f64;
        let (a, b) = (self.values[i], self.values[i + 1]);
        self.cumulative[i] + self.params.step * (s * a + 0.5 * s * s * (b - a))
    }

    /// Total integral of the truncated wavelet (zero up to truncation).
    pub fn total_integral(&self) -> f64 {
        self.cumulative[self.values.len() - 1]
    }

    /// Discrete `L²` norm of the samples (trapezoid rule).
    pub fn sample_l2_norm(&self) -> f64 {
        let n = self.values.len();
        let e = self.params.step
            * (self.values.iter().map(|v| v * v).sum::<f64>() - 0.5 * (self.values[0].powi(2) + self.values[n - 1].powi(2)));
        e.sqrt()
    }

    /// `max_i max(|w(u_i)|, |w'(u_i)|)·(1 + |u_i|)^m` over the sample grid.
    pub fn decay_constant(&self, m: f64) -> Result<f64> {
        if m < 2.0 {
            return invalid_param(format!("decay exponent m = {m} must be at least 2"));
        }
        let c = self
            .values
            .iter()
            .zip(&self.derivative)
            .enumerate()
            .map(|(i, (v, d))| v.abs().max(d.abs()) * (1.0 + self.sample_point(i).abs()).powf(m))
            .fold(0.0, f64::max);
        Ok(c)
    }

    /// Central-difference estimate of `w'` at interior sample `i`.
    pub fn central_difference(&self, i: usize) -> Option<f64> {
        if i == 0 || i + 1 >= self.values.len() {
            return None;
        }
        Some((self.values[i + 1] - self.values[i - 1]) / (2.0 * self.params.step))
    }

    pub fn radius(&self) -> f64 {
        self.params.radius
    }
}
