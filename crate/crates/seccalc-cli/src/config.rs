// Copyright 2026 The seccalc Authors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration and matrix files.

use crate::CliError;
use seccalc::matops::{self, CMatrix, TestMatrix};
use seccalc::normcalc::QuadConfig;
use seccalc::verify::{Suite, SuiteParams};
use serde::Deserialize;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Overrides of [`QuadConfig`]; absent fields keep the defaults.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadSection {
    pub abs_tol: Option<f64>,
    pub rel_tol: Option<f64>,
    pub log_radius_cut: Option<f64>,
    pub angular_cut: Option<f64>,
    pub max_panels: Option<usize>,
}

impl QuadSection {
    pub fn to_config(&self) -> Result<QuadConfig, CliError> {
        let d = QuadConfig::with_tol(1e-8, 1e-8);
        let cfg = QuadConfig {
            abs_tol: self.abs_tol.unwrap_or(d.abs_tol),
            rel_tol: self.rel_tol.unwrap_or(d.rel_tol),
            log_radius_cut: self.log_radius_cut.unwrap_or(d.log_radius_cut),
            angular_cut: self.angular_cut.unwrap_or(d.angular_cut),
            max_panels: self.max_panels.unwrap_or(d.max_panels),
            ..d
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Overrides of [`SuiteParams`].
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    pub cayley_n: Option<Vec<u32>>,
    pub semigroup_t: Option<Vec<f64>>,
    pub semigroup_nu: Option<Vec<f64>>,
    pub analf_n: Option<Vec<u32>>,
    pub analf_t: Option<Vec<f64>>,
    pub bernstein_g: Option<Vec<String>>,
    pub frac_gamma: Option<Vec<f64>>,
    pub fractional_resolvent_gamma: Option<Vec<f64>>,
    pub random_points: Option<usize>,
    pub fn_n: Option<Vec<u32>>,
    pub fn_s: Option<f64>,
    pub rational_degrees: Option<Vec<usize>>,
    pub calculus_audits: Option<bool>,
}

impl ParamsSection {
    pub fn apply(&self) -> SuiteParams {
        let mut p = SuiteParams::default();
        macro_rules! take {
            ($($f:ident),*) => { $( if let Some(v) = &self.$f { p.$f = v.clone(); } )* };
        }
        take!(
            cayley_n,
            semigroup_t,
            semigroup_nu,
            analf_n,
            analf_t,
            bernstein_g,
            frac_gamma,
            fractional_resolvent_gamma,
            random_points,
            fn_n,
            fn_s,
            rational_degrees,
            calculus_audits
        );
        p
    }
}

/// The single JSON document read by `seccalc run`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub suites: Vec<String>,
    #[serde(default)]
    pub quad: QuadSection,
    /// Matrix files; when empty the fixed test-matrix suite is used.
    #[serde(default)]
    pub matrices: Vec<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: Format,
    #[serde(default)]
    pub params: ParamsSection,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("seccalc-out")
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = read_file(path)?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        // relative paths inside the config are relative to the config file
        let base = path.parent().unwrap_or(Path::new(""));
        for m in &mut cfg.matrices {
            if m.is_relative() {
                *m = base.join(&*m);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn suites(&self) -> Result<Vec<Suite>, CliError> {
        self.suites.iter().map(|s| Suite::from_name(s).map_err(CliError::from)).collect()
    }

    pub fn test_matrices(&self) -> Result<Vec<TestMatrix>, CliError> {
        if self.matrices.is_empty() {
            return Ok(matops::test_matrices());
        }
        self.matrices
            .iter()
            .map(|p| {
                Ok(TestMatrix {
                    name: p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default(),
                    a: load_matrix(p)?,
                })
            })
            .collect()
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::MissingFile(path.to_path_buf())
        } else {
            CliError::Io(format!("{}: {e}", path.display()))
        }
    })
}

/// A JSON array of rows of `[re, im]` pairs, or Matrix Market text.
pub fn load_matrix(path: &Path) -> Result<CMatrix, CliError> {
    let text = read_file(path)?;
    let bad = |e: String| CliError::Matrix(format!("{}: {e}", path.display()));
    if text.trim_start().starts_with('[') {
        let rows: Vec<Vec<[f64; 2]>> = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        matops::from_pairs(&rows).map_err(|e| bad(e.to_string()))
    } else {
        matops::matrix_from_market(&text).map_err(|e| bad(e.to_string()))
    }
}
