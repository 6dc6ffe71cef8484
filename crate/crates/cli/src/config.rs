//! JSON run configuration shared by the solve, certify, and oracle commands.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;

use monofem::{
    generate_structured, load_mesh, CertifyOptions, DataBounds, Kappa, Mesh, OracleMode,
    Reaction, SolveOptions, Source, StructuredKind,
};

/// One complete run: a mesh, a problem, one or two sources, and options.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub problem: ProblemBlock,
    /// Source for the first solve.
    pub f1: Source,
    /// Source for the second solve; defaults to `f1`, which turns the
    /// comparison into a uniqueness check.
    #[serde(default)]
    pub f2: Option<Source>,
    #[serde(default)]
    pub solver: SolverBlock,
    #[serde(default)]
    pub certify: CertifyBlock,
    /// Default report path; the --out flag wins.
    #[serde(default)]
    pub output: Option<PathBuf>,
}

/// Exactly one of `{"file": ...}` or `{"generator": ..., "n": ...}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MeshSource {
    File(FileMesh),
    Generated(GeneratedMesh),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileMesh {
    /// Base name of a .node/.ele pair (either file name also works).
    pub file: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratedMesh {
    pub generator: StructuredKind,
    /// Subdivisions per side of the unit parallelogram.
    pub n: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemBlock {
    pub kappa: Kappa,
    pub g: Reaction,
    pub bounds: DataBounds,
}

/// Solver options; missing fields take the library defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverBlock {
    pub max_iters: usize,
    pub tol: f64,
    pub dense_threshold: usize,
}

impl Default for SolverBlock {
    fn default() -> Self {
        let o = SolveOptions::default();
        SolverBlock {
            max_iters: o.max_iters,
            tol: o.tol,
            dense_threshold: o.dense_threshold,
        }
    }
}

impl SolverBlock {
    pub fn to_options(&self) -> SolveOptions {
        SolveOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            dense_threshold: self.dense_threshold,
            ..SolveOptions::default()
        }
    }
}

/// Certification options; missing fields take the library defaults.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifyBlock {
    pub eps0: f64,
    pub sign_tol: f64,
    pub dominance_tol: f64,
    pub max_slack_retries: usize,
    pub oracle: OracleMode,
    pub oracle_cap: usize,
}

impl Default for CertifyBlock {
    fn default() -> Self {
        let o = CertifyOptions::default();
        CertifyBlock {
            eps0: o.eps0,
            sign_tol: o.sign_tol,
            dominance_tol: o.dominance_tol,
            max_slack_retries: o.max_slack_retries,
            oracle: o.oracle,
            oracle_cap: o.oracle_cap,
        }
    }
}

impl CertifyBlock {
    pub fn to_options(&self) -> CertifyOptions {
        CertifyOptions {
            eps0: self.eps0,
            sign_tol: self.sign_tol,
            dominance_tol: self.dominance_tol,
            max_slack_retries: self.max_slack_retries,
            oracle: self.oracle,
            oracle_cap: self.oracle_cap,
        }
    }
}

pub fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let config = serde_json::from_str(&text)
        .with_context(|| format!("invalid config {}", path.display()))?;
    Ok(config)
}

pub fn build_mesh(source: &MeshSource) -> anyhow::Result<Mesh> {
    match source {
        MeshSource::File(f) => Ok(load_mesh(&f.file)?),
        MeshSource::Generated(g) => Ok(generate_structured(g.generator, g.n)?),
    }
}
