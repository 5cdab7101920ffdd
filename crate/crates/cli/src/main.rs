//! `opval`: corpus generation, wavelet analysis, norms, pairings and the
//! verification suite.
//!
//! Exit codes: 0 success, 1 an asserted check failed, 2 bad input.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use opval_core::config::RunConfig;
use opval_core::corpus;
use opval_core::dyadic::{Grid, StepFunction};
use opval_core::duality::{fefferman_check, hp_duality_pair, hp_lpmo_check, CheckReport};
use opval_core::error::Error;
use opval_core::json::{step_function_from_json, to_json_string};
use opval_core::norms::{bmo_col_norm_of, bmo_row_norm_of, hardy_col_norm_of, hardy_norm_of, hardy_row_norm_of, lpmo_col_norm_of, mean_osc_bmo_norm};
use opval_core::verify::run_verify;
use opval_core::wavelet::{analyze, BasisKind, WaveletBasis};

const DEFAULT_NORM_EXPONENTS: [f64; 5] = [1.0, 1.5, 2.0, 3.0, 4.0];

#[derive(Parser)]
#[command(name = "opval", version, about = "Matrix-valued wavelet norms and inequality checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// key = value configuration file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    #[arg(long, global = true)]
    depth: Option<u32>,
    #[arg(long, global = true)]
    basis: Option<BasisKind>,
    /// Exponents, comma separated or repeated.
    #[arg(long, global = true, value_delimiter = ',')]
    p: Vec<f64>,
    /// Output file (directory for `gen`); stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded corpus of step functions.
    Gen,
    /// Wavelet coefficients of a step function.
    Analyze { input: PathBuf },
    /// Every norm of a step function.
    Norms { input: PathBuf },
    /// Pairing `τ∫φ*f` and the duality inequalities for it.
    Pair { phi: PathBuf, f: PathBuf },
    /// Run the randomized verification suite.
    Verify,
}

enum Failure {
    Input(String),
    Checks(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Input(format!("{}: {e}", path.display()))
}

fn load_config(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::parse(&std::fs::read_to_string(path).map_err(|e| io_err(path, e))?)?,
        None => RunConfig::default(),
    };
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = c.dim {
        cfg.dim = v;
    }
    if let Some(v) = c.depth {
        cfg.depth = v;
    }
    if let Some(v) = c.basis {
        cfg.basis = v;
    }
    if !c.p.is_empty() {
        cfg.p = c.p.clone();
    }
    if let Some(v) = &c.out {
        cfg.out = Some(v.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_function(path: &Path) -> Result<StepFunction, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    step_function_from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(path) => std::fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn num(v: f64) -> Value {
    serde_json::Number::from_f64(v).map_or(Value::Null, Value::Number)
}

fn norms(f: &StepFunction, cfg: &RunConfig) -> Result<Map<String, Value>, Failure> {
    let start = Instant::now();
    let basis = WaveletBasis::from_kind(cfg.basis, cfg.meyer)?;
    let c = analyze(f, &basis, None)?;
    let ps: Vec<f64> = if cfg.p.is_empty() { DEFAULT_NORM_EXPONENTS.to_vec() } else { cfg.p.clone() };
    let opts = cfg.hardy_options();
    let mut out = Map::new();
    out.insert("basis".into(), Value::String(cfg.basis.to_string()));
    let g = f.grid();
    out.insert("dim".into(), g.dim.into());
    out.insert("depth".into(), g.depth.into());
    for p in ps {
        out.insert(format!("L_{p}"), num(f.lp_norm(p)?));
        out.insert(format!("H_c_{p}"), num(hardy_col_norm_of(&c, p)?));
        out.insert(format!("H_r_{p}"), num(hardy_row_norm_of(&c, p)?));
        let mixed = match hardy_norm_of(&c, p, &opts) {
            Ok(b) => serde_json::to_value(&b).expect("brackets serialize"),
            Err(Error::Unsupported(msg)) => Value::String(format!("unsupported: {msg}")),
            Err(e) => return Err(e.into()),
        };
        out.insert(format!("H_{p}"), mixed);
        if p > 2.0 {
            let b = lpmo_col_norm_of(&c, p)?;
            out.insert(format!("LpMO_c_{p}"), serde_json::to_value(&b).expect("brackets serialize"));
        }
    }
    let (bc, br) = (bmo_col_norm_of(&c), bmo_row_norm_of(&c));
    out.insert("BMO_c".into(), num(bc));
    out.insert("BMO_r".into(), num(br));
    out.insert("BMO".into(), num(bc.max(br)));
    out.insert("BMO_mean_osc".into(), num(mean_osc_bmo_norm(f)));
    out.insert("timing_s".into(), num(start.elapsed().as_secs_f64()));
    Ok(out)
}

fn pair(phi: &StepFunction, f: &StepFunction, cfg: &RunConfig) -> Result<Vec<CheckReport>, Failure> {
    let z = opval_core::dyadic::trace_pair(phi, f)?;
    let mut reports = vec![CheckReport::new("pairing", z.norm(), z.norm(), 1.0, false).with("re", z.re).with("im", z.im)];
    reports.push(fefferman_check(phi, f)?);
    let ps: Vec<f64> = if cfg.p.is_empty() { vec![1.5, 2.0, 3.0] } else { cfg.p.clone() };
    for &p in &ps {
        if p > 1.0 && p < 2.0 {
            reports.push(hp_lpmo_check(phi, f, p)?);
        }
        if p > 1.0 && p.is_finite() {
            reports.push(hp_duality_pair(phi, f, p)?);
        }
    }
    Ok(reports)
}

fn lines(reports: &[CheckReport]) -> String {
    reports.iter().map(|r| r.to_json() + "\n").collect()
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cfg = load_config(&cli.common)?;
    match cli.command {
        Command::Gen => {
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("corpus"));
            let grid = Grid::new(cfg.dim, cfg.depth, cfg.lo, cfg.hi)?;
            let members = corpus::generate(cfg.seed, grid, cfg.count);
            for path in corpus::write(&dir, &members).map_err(|e| io_err(&dir, e))? {
                println!("{}", path.display());
            }
        }
        Command::Analyze { input } => {
            let f = read_function(&input)?;
            let basis = WaveletBasis::from_kind(cfg.basis, cfg.meyer)?;
            emit(&cfg, &(analyze(&f, &basis, None)?.to_json() + "\n"))?;
        }
        Command::Norms { input } => {
            let f = read_function(&input)?;
            emit(&cfg, &(to_json_string(&norms(&f, &cfg)?) + "\n"))?;
        }
        Command::Pair { phi, f } => {
            let reports = pair(&read_function(&phi)?, &read_function(&f)?, &cfg)?;
            emit(&cfg, &lines(&reports))?;
            if let Some(r) = reports.iter().find(|r| r.failed()) {
                return Err(Failure::Checks(format!("check `{}` failed", r.name)));
            }
        }
        Command::Verify => {
            let out = run_verify(&cfg)?;
            emit(&cfg, &out.to_json_lines())?;
            let failed: Vec<&str> = out.suites.iter().filter(|r| r.failed()).map(|r| r.name.as_str()).collect();
            eprintln!("{} suites, {} failed", out.suites.len(), failed.len());
            if !failed.is_empty() {
                return Err(Failure::Checks(format!("failed checks: {}", failed.join(", "))));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Checks(msg)) => {
            eprintln!("opval: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("opval: {msg}");
            ExitCode::from(2)
        }
    }
}
