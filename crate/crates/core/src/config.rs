//! Run configuration, read from and written to plain `key = value` text.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are comma
//! separated. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::duality::Tolerances;
use crate::error::{Error, Result};
use crate::norms::{HardyOptions, MaximalOptions};
use crate::wavelet::{BasisKind, MeyerParams};

/// Largest grid depth accepted by a run.
pub const MAX_DEPTH: u32 = 12;
pub const MAX_DIM: usize = 8;

/// Size of the randomized verification sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    /// Random pairs for each duality inequality.
    pub pairs: usize,
    /// Instances for the identity checks and Stein.
    pub instances: usize,
    /// Random `(x, y, s, t)` for the operator lemma.
    pub lemma: usize,
    pub max_dim: usize,
    pub min_depth: u32,
    pub max_depth: u32,
}

impl Default for Sweep {
    fn default() -> Self {
        Sweep { pairs: 200, instances: 100, lemma: 500, max_dim: 3, min_depth: 3, max_depth: 6 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub dim: usize,
    pub depth: u32,
    pub lo: i64,
    pub hi: i64,
    pub basis: BasisKind,
    pub meyer: MeyerParams,
    /// Exponents for `norms`; extra reported exponents for `verify`.
    pub p: Vec<f64>,
    /// Corpus members per kind for `gen`.
    pub count: usize,
    pub hardy_starts: usize,
    pub hardy_iterations: usize,
    pub maximal: MaximalOptions,
    pub tol: Tolerances,
    pub sweep: Sweep,
    pub out: Option<PathBuf>,
    /// Test hook: corrupts one coefficient in the named suite.
    pub inject_fault: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let hardy = HardyOptions::default();
        RunConfig {
            seed: 1,
            dim: 2,
            depth: 4,
            lo: 0,
            hi: 1,
            basis: BasisKind::Haar,
            meyer: MeyerParams::default(),
            p: Vec::new(),
            count: 4,
            hardy_starts: hardy.starts,
            hardy_iterations: hardy.iterations,
            maximal: MaximalOptions::default(),
            tol: Tolerances::default(),
            sweep: Sweep::default(),
            out: None,
            inject_fault: None,
        }
    }
}

fn bad(line: usize, key: &str, message: impl Into<String>) -> Error {
    let path = if line == 0 { key.to_string() } else { format!("line {line}: {key}") };
    Error::Parse { path, message: message.into() }
}

fn num<T: std::str::FromStr>(line: usize, key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| bad(line, key, format!("`{value}`: {e}")))
}

impl RunConfig {
    pub fn hardy_options(&self) -> HardyOptions {
        HardyOptions { starts: self.hardy_starts, iterations: self.hardy_iterations, seed: self.seed }
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.set_at(0, key, value)
    }

    fn set_at(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        match key {
            "seed" => self.seed = num(line, key, v)?,
            "dim" => self.dim = num(line, key, v)?,
            "depth" => self.depth = num(line, key, v)?,
            "lo" => self.lo = num(line, key, v)?,
            "hi" => self.hi = num(line, key, v)?,
            "basis" => self.basis = v.parse().map_err(|e: Error| bad(line, key, e.to_string()))?,
            "meyer.step" => self.meyer.step = num(line, key, v)?,
            "meyer.radius" => self.meyer.radius = num(line, key, v)?,
            "meyer.decay" => self.meyer.decay = num(line, key, v)?,
            "p" => {
                self.p = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',').map(|s| num(line, key, s.trim())).collect::<Result<_>>()?
                }
            }
            "count" => self.count = num(line, key, v)?,
            "hardy.starts" => self.hardy_starts = num(line, key, v)?,
            "hardy.iterations" => self.hardy_iterations = num(line, key, v)?,
            "maximal.ascent_iterations" => self.maximal.ascent_iterations = num(line, key, v)?,
            "tol.calderon" => self.tol.calderon = num(line, key, v)?,
            "tol.parseval" => self.tol.parseval = num(line, key, v)?,
            "tol.psi_phi" => self.tol.psi_phi = num(line, key, v)?,
            "tol.sign_flip" => self.tol.sign_flip = num(line, key, v)?,
            "tol.rademacher" => self.tol.rademacher = num(line, key, v)?,
            "tol.bg" => self.tol.bg = num(line, key, v)?,
            "sweep.pairs" => self.sweep.pairs = num(line, key, v)?,
            "sweep.instances" => self.sweep.instances = num(line, key, v)?,
            "sweep.lemma" => self.sweep.lemma = num(line, key, v)?,
            "sweep.max_dim" => self.sweep.max_dim = num(line, key, v)?,
            "sweep.min_depth" => self.sweep.min_depth = num(line, key, v)?,
            "sweep.max_depth" => self.sweep.max_depth = num(line, key, v)?,
            "out" => self.out = (!v.is_empty()).then(|| PathBuf::from(v)),
            "inject_fault" => self.inject_fault = (!v.is_empty()).then(|| v.to_string()),
            _ => return Err(bad(line, key, "unknown key")),
        }
        Ok(())
    }

    /// Parses `key = value` text over the defaults and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(bad(i + 1, line, "expected `key = value`"));
            };
            cfg.set_at(i + 1, key.trim(), value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let err = |key: &str, msg: String| Err(bad(0, key, msg));
        if self.dim == 0 || self.dim > MAX_DIM {
            return err("dim", format!("must be in 1..={MAX_DIM}, got {}", self.dim));
        }
        if self.depth > MAX_DEPTH {
            return err("depth", format!("at most {MAX_DEPTH}, got {}", self.depth));
        }
        if self.hi <= self.lo {
            return err("hi", format!("window [{}, {}) is empty", self.lo, self.hi));
        }
        self.meyer.validate().map_err(|e| bad(0, "meyer", e.to_string()))?;
        if let Some(p) = self.p.iter().find(|p| !(**p >= 1.0)) {
            return err("p", format!("exponents must be at least 1, got {p}"));
        }
        let t = &self.tol;
        for (name, v) in [
            ("tol.calderon", t.calderon),
            ("tol.parseval", t.parseval),
            ("tol.psi_phi", t.psi_phi),
            ("tol.sign_flip", t.sign_flip),
            ("tol.rademacher", t.rademacher),
            ("tol.bg", t.bg),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return err(name, format!("tolerances must be positive, got {v}"));
            }
        }
        let s = &self.sweep;
        if s.max_dim == 0 || s.max_dim > MAX_DIM {
            return err("sweep.max_dim", format!("must be in 1..={MAX_DIM}"));
        }
        if s.min_depth == 0 || s.min_depth > s.max_depth || s.max_depth > MAX_DEPTH {
            return err("sweep.max_depth", format!("need 1 <= min_depth <= max_depth <= {MAX_DEPTH}"));
        }
        if self.hardy_starts == 0 {
            return err("hardy.starts", "need at least one start".into());
        }
        Ok(())
    }

    /// Canonical text; [`RunConfig::parse`] reads it back to an equal value.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").expect("writing to a String cannot fail");
        kv("seed", self.seed.to_string());
        kv("dim", self.dim.to_string());
        kv("depth", self.depth.to_string());
        kv("lo", self.lo.to_string());
        kv("hi", self.hi.to_string());
        kv("basis", self.basis.to_string());
        kv("meyer.step", format!("{:?}", self.meyer.step));
        kv("meyer.radius", format!("{:?}", self.meyer.radius));
        kv("meyer.decay", format!("{:?}", self.meyer.decay));
        kv("p", self.p.iter().map(|p| format!("{p:?}")).collect::<Vec<_>>().join(", "));
        kv("count", self.count.to_string());
        kv("hardy.starts", self.hardy_starts.to_string());
        kv("hardy.iterations", self.hardy_iterations.to_string());
        kv("maximal.ascent_iterations", self.maximal.ascent_iterations.to_string());
        kv("tol.calderon", format!("{:?}", self.tol.calderon));
        kv("tol.parseval", format!("{:?}", self.tol.parseval));
        kv("tol.psi_phi", format!("{:?}", self.tol.psi_phi));
        kv("tol.sign_flip", format!("{:?}", self.tol.sign_flip));
        kv("tol.rademacher", format!("{:?}", self.tol.rademacher));
        kv("tol.bg", format!("{:?}", self.tol.bg));
        kv("sweep.pairs", self.sweep.pairs.to_string());
        kv("sweep.instances", self.sweep.instances.to_string());
        kv("sweep.lemma", self.sweep.lemma.to_string());
        kv("sweep.max_dim", self.sweep.max_dim.to_string());
        kv("sweep.min_depth", self.sweep.min_depth.to_string());
        kv("sweep.max_depth", self.sweep.max_depth.to_string());
        kv("out", self.out.as_ref().map(|p| p.display().to_string()).unwrap_or_default());
        kv("inject_fault", self.inject_fault.clone().unwrap_or_default());
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let mut c = RunConfig::default();
        c.seed = 99;
        c.p = vec![1.5, 3.0];
        c.basis = BasisKind::Meyer;
        c.tol.bg = 3.3e-9;
        c.out = Some("reports/x.jsonl".into());
        let text = c.to_text();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn comments_and_defaults() {
        let c = RunConfig::parse("# run\n\nseed = 7\n  depth=5  \n").unwrap();
        assert_eq!((c.seed, c.depth, c.dim), (7, 5, 2));
        assert!(c.p.is_empty());
    }

    #[test]
    fn rejections() {
        for (text, path) in [
            ("depth = 13", "depth"),
            ("tol.parseval = 0", "tol.parseval"),
            ("tol.bg = -1", "tol.bg"),
            ("bogus = 1", "line 1: bogus"),
            ("seed = x", "line 1: seed"),
            ("\nseed", "line 2: seed"),
            ("basis = daubechies", "line 1: basis"),
            ("meyer.step = 0.3", "meyer"),
            ("p = 0.5", "p"),
        ] {
            match RunConfig::parse(text) {
                Err(Error::Parse { path: got, .. }) => assert_eq!(got, path, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }
}
