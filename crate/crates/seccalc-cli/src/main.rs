// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! `seccalc`: norms, reproducing formulas, matrix functional calculi and the
//! verification suites from the command line.

mod config;
mod report;

use clap::{Parser, Subcommand, ValueEnum};
use config::{Format, RunConfig};
use seccalc::fcalc;
use seccalc::funcat;
use seccalc::matops::{self, SectorialOp};
use seccalc::normcalc::{self, NormResult, QuadConfig};
use seccalc::reprkernel;
use seccalc::verify::{self, Suite, SuiteParams, SuiteReport};
use seccalc::C64;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{0}")]
    Io(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed matrix file: {0}")]
    Matrix(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lib(#[from] seccalc::Error),
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::MissingFile(_) => "missing_file",
            CliError::Io(_) => "io",
            CliError::Config(_) => "config",
            CliError::Matrix(_) => "matrix",
            CliError::Usage(_) => "usage",
            CliError::Lib(e) => match e {
                seccalc::Error::Domain(_) => "domain",
                seccalc::Error::Unsupported(_) => "unsupported",
                seccalc::Error::Divergent(_) => "divergent",
                seccalc::Error::Singular(_) => "singular",
                seccalc::Error::Precondition(_) => "precondition",
                seccalc::Error::Parse(_) => "parse",
                seccalc::Error::Quadrature(_) => "quadrature",
                seccalc::Error::Oracle(_) => "oracle",
            },
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::MissingFile(_) => 2,
            _ => 3,
        }
    }
}

#[derive(Parser)]
#[command(name = "seccalc", version, about = "Functional calculi for sectorial matrices")]
struct Cli {
    /// Worker threads for quadrature node evaluation.
    #[arg(long, global = true, env = "SECCALC_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SpaceArg {
    Vs,
    Ds,
    DsInf,
    B,
    H1,
    H1Star,
    H1Halfplane,
    Hpsi,
    HpsiPrime,
    Epsi,
    Hp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormulaArg {
    Qs,
    Lift,
    Arccot,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    D,
    HLift,
    HArccot,
    Hp,
    Oracle,
}

#[derive(Subcommand)]
enum Cmd {
    /// Norm of a catalog function.
    Norm {
        /// Catalog key, e.g. `resolvent:1`, `arccot`, `cayley:n=10`.
        #[arg(long = "fn")]
        key: String,
        #[arg(long, value_enum, default_value = "ds")]
        space: SpaceArg,
        /// Weight exponent of the `vs`/`ds`/`ds-inf` norms.
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Sector half-angle of the sectorial norms.
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        psi: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Evaluate a reproducing formula at points `re,im`.
    Reproduce {
        #[arg(long = "fn")]
        key: String,
        #[arg(long, value_enum, default_value = "qs")]
        formula: FormulaArg,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        psi: f64,
        #[arg(long = "z", required = true, value_parser = parse_complex, allow_hyphen_values = true)]
        points: Vec<C64>,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Compute `f(A)` for a matrix file.
    Calc {
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long = "fn")]
        key: String,
        /// JSON rows of `[re, im]` pairs, or Matrix Market text.
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long, default_value_t = std::f64::consts::FRAC_PI_2)]
        psi: f64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run one verification suite on the fixed test matrices.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for the CSV tables.
        #[arg(long)]
        csv_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
    },
    /// Run the suites listed in a JSON configuration.
    Run { config: PathBuf },
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (re, im) = s.split_once(',').unwrap_or((s, "0"));
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("bad number '{x}': {e}"));
    Ok(C64::new(p(re)?, p(im)?))
}

fn quad(tol: f64) -> Result<QuadConfig, CliError> {
    let cfg = QuadConfig::with_tol(tol, tol);
    cfg.validate()?;
    Ok(cfg)
}

fn emit(v: &Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = report::to_string(v);
    match out {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
}

fn norm(key: &str, space: SpaceArg, s: f64, psi: f64, cfg: &QuadConfig) -> Result<Value, CliError> {
    let f = funcat::from_key(key)?;
    let (r, param): (NormResult, Option<(&str, f64)>) = match space {
        SpaceArg::Vs => (normcalc::vs_norm(&f, s, cfg)?, Some(("s", s))),
        SpaceArg::Ds => (normcalc::ds_norm(&f, s, cfg)?, Some(("s", s))),
        SpaceArg::DsInf => (normcalc::ds_inf_norm(&f, s, cfg)?, Some(("s", s))),
        SpaceArg::B => (normcalc::b_norm(&f, cfg)?, None),
        SpaceArg::H1 => (normcalc::h1_sector_norm(&f, psi, cfg)?, Some(("psi", psi))),
        SpaceArg::H1Star => (normcalc::h1_star_norm(&f, psi, cfg)?, Some(("psi", psi))),
        SpaceArg::H1Halfplane => (normcalc::h1_halfplane_norm(&f, cfg)?, None),
        SpaceArg::Hpsi => (normcalc::hpsi_norm(&f, psi, cfg)?, Some(("psi", psi))),
        SpaceArg::HpsiPrime => (normcalc::hpsi_norm_prime(&f, psi, cfg)?, Some(("psi", psi))),
        SpaceArg::Epsi => (normcalc::epsi_norm(&f, psi, cfg)?, Some(("psi", psi))),
        SpaceArg::Hp => (normcalc::hp_norm(&f, cfg)?, None),
    };
    Ok(report::norm_result(f.key(), param, &r))
}

fn reproduce(key: &str, formula: FormulaArg, s: f64, psi: f64, points: &[C64], cfg: &QuadConfig) -> Result<Value, CliError> {
    let f = funcat::from_key(key)?;
    let reps = points
        .iter()
        .map(|&z| {
            let r = match formula {
                FormulaArg::Qs => reprkernel::reproduce_ds(&f, s, z, cfg)?,
                FormulaArg::Lift => reprkernel::reproduce_hpsi(&f, psi, z, cfg)?,
                FormulaArg::Arccot => reprkernel::reproduce_arccot(&f, psi, z, cfg)?,
            };
            Ok(report::repro(&r))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(report::Obj::new().put("fn", f.key()).put("points", Value::Array(reps)).build())
}

fn calc(method: MethodArg, key: &str, matrix: &Path, s: f64, psi: f64, cfg: &QuadConfig) -> Result<Value, CliError> {
    let a = config::load_matrix(matrix)?;
    let f = funcat::from_key(key)?;
    let op = SectorialOp::new(a)?;
    let r = match method {
        MethodArg::D => fcalc::d_calc(&f, &op, s, cfg)?,
        MethodArg::HLift => fcalc::h_calc_lift(&f, &op, psi, cfg)?,
        MethodArg::HArccot => fcalc::h_calc_arccot(&f, &op, psi, cfg)?,
        MethodArg::Hp => fcalc::hp_calc(&f, &op, cfg)?,
        MethodArg::Oracle => fcalc::oracle_calc(&f, &op)?,
    };
    Ok(report::calc(f.key(), &r))
}

fn write_suite(r: &SuiteReport, dir: &Path, format: Format) -> Result<(), CliError> {
    let name = r.suite.name();
    match format {
        Format::Json => write_file(&dir.join(format!("{name}.json")), &report::to_string(&report::suite(r))),
        Format::Csv => {
            write_file(&dir.join(format!("{name}.csv")), &r.checks_csv())?;
            write_tables(r, dir)
        }
    }
}

fn write_tables(r: &SuiteReport, dir: &Path) -> Result<(), CliError> {
    for t in &r.tables {
        write_file(&dir.join(format!("{}-{}.csv", r.suite.name(), t.name)), &t.to_csv())?;
    }
    Ok(())
}

/// Returns whether every check passed.
fn run(path: &Path, parallel: bool) -> Result<bool, CliError> {
    let cfg = RunConfig::load(path)?;
    let suites = cfg.suites()?;
    let mut quad = cfg.quad.to_config()?;
    quad.parallel = parallel;
    let params: SuiteParams = cfg.params.apply();
    // load matrices before running anything so a bad file fails fast
    let mats = cfg.test_matrices()?;
    let mut reports = Vec::new();
    for s in suites {
        let r = verify::run_suite(s, &mats, &params, cfg.seed, &quad)?;
        write_suite(&r, &cfg.output_dir, cfg.format)?;
        reports.push(r);
    }
    match cfg.format {
        Format::Json => write_file(
            &cfg.output_dir.join("summary.json"),
            &report::to_string(&report::summary(&reports, cfg.seed)),
        )?,
        Format::Csv => write_file(&cfg.output_dir.join("summary.csv"), &report::summary_csv(&reports))?,
    }
    Ok(reports.iter().all(|r| r.passed()))
}

fn verify_cmd(suite: &str, out: Option<&Path>, csv_dir: Option<&Path>, seed: u64, cfg: &QuadConfig) -> Result<bool, CliError> {
    let s = Suite::from_name(suite)?;
    let r = verify::run_suite(s, &matops::test_matrices(), &SuiteParams::default(), seed, cfg)?;
    emit(&report::suite(&r), out)?;
    if let Some(dir) = csv_dir {
        write_file(&dir.join(format!("{}.csv", s.name())), &r.checks_csv())?;
        write_tables(&r, dir)?;
    }
    Ok(r.passed())
}

fn execute(cli: Cli) -> Result<bool, CliError> {
    let threads = cli.threads.unwrap_or(1).max(1);
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    let parallel = threads > 1;
    let with_threads = |mut c: QuadConfig| {
        c.parallel = parallel;
        c
    };
    match cli.cmd {
        Cmd::Norm { key, space, s, psi, tol } => {
            emit(&norm(&key, space, s, psi, &with_threads(quad(tol)?))?, None)?;
            Ok(true)
        }
        Cmd::Reproduce { key, formula, s, psi, points, tol } => {
            emit(&reproduce(&key, formula, s, psi, &points, &with_threads(quad(tol)?))?, None)?;
            Ok(true)
        }
        Cmd::Calc { method, key, matrix, s, psi, tol, report } => {
            emit(&calc(method, &key, &matrix, s, psi, &with_threads(quad(tol)?))?, report.as_deref())?;
            Ok(true)
        }
        Cmd::Verify { suite, out, csv_dir, seed, tol } => {
            verify_cmd(&suite, out.as_deref(), csv_dir.as_deref(), seed, &with_threads(quad(tol)?))
        }
        Cmd::Run { config } => run(&config, parallel),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            let v = report::Obj::new()
                .put("error", report::Obj::new().put("kind", e.kind()).put("message", e.to_string()).build())
                .build();
            eprint!("{}", report::to_string(&v));
            ExitCode::from(e.exit_code())
        }
    }
}
