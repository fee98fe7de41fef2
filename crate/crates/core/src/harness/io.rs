//! CSV and JSON artifacts.
//!
//! Floats are written with Rust's shortest round-trip formatting in
//! scientific notation (`{:e}`), so parsing a cell gives back the exact
//! double. Missing values are empty cells. Column order is fixed.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::curve_geometry::{closure_residual, reconstruct_embedding, total_length};
use crate::flows::FlowDiagnostics;
use crate::flows::FlowState;

use super::{ExperimentConfig, HarnessError, OUTPUT_ROOT_ENV};

pub const RUN_COLUMNS: [&str; 11] = [
    "t",
    "dt",
    "energy",
    "length",
    "mass",
    "closure_norm",
    "d_m",
    "residual_h2",
    "rhs_sup",
    "density_min",
    "density_max",
];

pub const CURVE_COLUMNS: [&str; 7] = ["s", "kappa", "g", "gamma_x", "gamma_y", "theta", "density"];

pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Resolve the output directory, relocating relative paths under
/// `CURVEFLOW_OUTPUT_ROOT` when it is set.
pub fn resolve_output_dir(dir: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if dir.is_relative() && !root.is_empty() => PathBuf::from(root).join(dir),
        _ => dir.to_path_buf(),
    }
}

/// Hex SHA-256 of the canonical JSON form of the resolved config.
pub fn config_hash(config: &ExperimentConfig) -> Result<String, HarnessError> {
    let canonical = serde_json::to_vec(config)?;
    Ok(Sha256::digest(&canonical).iter().map(|b| format!("{b:02x}")).collect())
}

/// Writes files into one directory and remembers their names for the
/// manifest.
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    files: Vec<String>,
}

impl ArtifactWriter {
    pub fn create(dir: PathBuf) -> Result<Self, HarnessError> {
        fs::create_dir_all(&dir).map_err(|source| HarnessError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self { dir, files: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[String] {
        &self.files
    }

    fn record(&mut self, name: &str) -> PathBuf {
        if !self.files.iter().any(|f| f == name) {
            self.files.push(name.to_string());
        }
        self.dir.join(name)
    }

    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), HarnessError> {
        let path = self.record(name);
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(&path, text).map_err(|source| HarnessError::Io { path, source })
    }

    /// Write a table given as a header and rows of pre-formatted cells.
    pub fn write_table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), HarnessError> {
        let path = self.record(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for row in rows {
            w.write_record(row)?;
        }
        w.flush().map_err(|source| HarnessError::Io { path, source })
    }

    /// One row per recorded step.
    pub fn write_run(&mut self, name: &str, diagnostics: &[FlowDiagnostics]) -> Result<(), HarnessError> {
        let rows: Vec<Vec<String>> = diagnostics
            .iter()
            .map(|d| {
                vec![
                    fmt_f64(d.t),
                    fmt_f64(d.dt),
                    fmt_f64(d.energy),
                    fmt_f64(d.length),
                    fmt_opt(d.mass),
                    fmt_f64(d.closure_norm),
                    fmt_opt(d.d_m),
                    fmt_opt(d.residual_h2),
                    fmt_f64(d.rhs_sup),
                    fmt_opt(d.density_min),
                    fmt_opt(d.density_max),
                ]
            })
            .collect();
        self.write_table(name, &RUN_COLUMNS, &rows)
    }

    /// Curve fields plus a JSON sidecar `<stem>.json` with grid metadata.
    pub fn write_curve(&mut self, stem: &str, state: &FlowState) -> Result<(), HarnessError> {
        let u = &state.u;
        let emb = reconstruct_embedding(u, 0.0, [0.0, 0.0]);
        let density = state.rho.as_ref().or(state.rho_m.as_ref());
        let rows: Vec<Vec<String>> = (0..u.n())
            .map(|j| {
                vec![
                    fmt_f64(u.grid().s(j)),
                    fmt_f64(u.kappa()[j]),
                    fmt_f64(u.g_at(j)),
                    fmt_f64(emb.gamma[j][0]),
                    fmt_f64(emb.gamma[j][1]),
                    fmt_f64(emb.theta[j]),
                    fmt_opt(density.map(|r| r[j])),
                ]
            })
            .collect();
        self.write_table(&format!("{stem}.csv"), &CURVE_COLUMNS, &rows)?;
        let sidecar = CurveSidecar {
            n: u.n(),
            scheme: u.grid().scheme(),
            gauge: if u.metric().is_uniform() {
                "scaled_arclength"
            } else {
                "general"
            },
            t: state.t,
            length: total_length(u),
            closure_residual: closure_residual(u).norm(),
            density: if state.rho.is_some() {
                Some("agent")
            } else if state.rho_m.is_some() {
                Some("membrane")
            } else {
                None
            },
        };
        self.write_json(&format!("{stem}.json"), &sidecar)
    }

    /// `manifest.json`: library version, config hash, the resolved config and
    /// every file written so far.
    pub fn write_manifest(&mut self, config: &ExperimentConfig) -> Result<(), HarnessError> {
        let mut files = self.files.clone();
        files.push("manifest.json".into());
        let manifest = Manifest {
            library: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            config_sha256: config_hash(config)?,
            config,
            files: &files,
        };
        self.write_json("manifest.json", &manifest)
    }
}

#[derive(Serialize)]
struct CurveSidecar {
    n: usize,
    scheme: crate::grid::DiffScheme,
    gauge: &'static str,
    t: f64,
    length: f64,
    closure_residual: f64,
    density: Option<&'static str>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    library: &'static str,
    version: &'static str,
    config_sha256: String,
    config: &'a ExperimentConfig,
    files: &'a [String],
}
