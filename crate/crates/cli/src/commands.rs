//! The four subcommands and their JSON reports.
//!
//! Every report carries `"schema": 1` and is byte-identical across repeated
//! runs of the same configuration; nothing environment-dependent is echoed.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use serde::Serialize;

use monofem::{
    assemble_linearized, comparison_experiment, generate_structured, load_mesh, monotone_oracle,
    save_mesh, solve_picard, ComparisonReport, MeshAdmissibility, NodalField, OracleMode,
    OracleReport, PicardTrace, ProblemSpec, StructuredKind, Verdict,
};

use crate::config::{build_mesh, load_config, RunConfig};

const SCHEMA: u32 = 1;

#[derive(clap::Args)]
pub struct MeshArgs {
    /// Structured generator: three_direction or right_uniform.
    #[arg(long = "gen", conflicts_with = "input")]
    pub generator: Option<String>,
    /// Subdivisions per side for --gen (default 4).
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Load a mesh from base.node/base.ele instead of generating one.
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    /// Directory to write mesh.node/mesh.ele into.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Report path; stdout when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct SolveArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Maximum Picard sweeps (default 200).
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Sup-norm increment tolerance (default 1e-10).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Unknown count up to which the linear solves factor densely
    /// (default 2000); above it conjugate gradients take over.
    #[arg(long)]
    pub dense_threshold: Option<usize>,
    /// Report path; overrides the config's output; stdout when both absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct CertifyArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Scaling amplitude at the boundary layer, in (0, 1) (default 0.5).
    #[arg(long)]
    pub eps0: Option<f64>,
    /// Relative tolerance of the entrywise sign checks (default 1e-13).
    #[arg(long)]
    pub sign_tol: Option<f64>,
    /// Relative tolerance of the dominance margins (default 1e-13).
    #[arg(long)]
    pub dominance_tol: Option<f64>,
    /// Slack halvings allowed in the scaling construction (default 8).
    #[arg(long)]
    pub max_slack_retries: Option<usize>,
    /// Oracle mode: always, on_failure, or never (default on_failure).
    #[arg(long)]
    pub oracle: Option<String>,
    /// Largest unknown count for the dense oracle (default 2000).
    #[arg(long)]
    pub oracle_cap: Option<usize>,
    /// Report path; overrides the config's output; stdout when both absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(clap::Args)]
pub struct OracleArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Largest unknown count the dense inverse is attempted for
    /// (default 2000).
    #[arg(long, default_value_t = 2000)]
    pub cap: usize,
    /// Report path; overrides the config's output; stdout when both absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct MeshReport<'a> {
    schema: u32,
    command: &'static str,
    n_vertices: usize,
    n_triangles: usize,
    n_boundary: usize,
    n_interior: usize,
    max_degree: usize,
    admissibility: &'a MeshAdmissibility,
}

#[derive(Serialize)]
struct SolveReport<'a> {
    schema: u32,
    command: &'static str,
    n_vertices: usize,
    n_dofs: usize,
    u_min: f64,
    u_max: f64,
    trace: &'a PicardTrace,
    u: &'a NodalField,
}

#[derive(Serialize)]
struct CertifyReport<'a> {
    schema: u32,
    command: &'static str,
    verdict: Verdict,
    /// Sup-norm of u1 - u2; with f1 = f2 this measures uniqueness.
    max_abs_difference: f64,
    report: &'a ComparisonReport,
}

#[derive(Serialize)]
struct OracleRun<'a> {
    schema: u32,
    command: &'static str,
    n_dofs: usize,
    oracle: &'a OracleReport,
}

fn emit<T: Serialize>(report: &T, out: Option<&Path>) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    match out {
        Some(path) => fs::write(path, text)
            .with_context(|| format!("cannot write report {}", path.display()))?,
        None => {
            use std::io::Write;
            // A consumer like `head` may close the pipe early; that is not
            // an error, and the exit code must still reflect the verdict.
            if let Err(err) = std::io::stdout().write_all(text.as_bytes()) {
                if err.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(err).context("cannot write report to stdout");
                }
            }
        }
    }
    Ok(())
}

fn spec_of(config: &RunConfig) -> anyhow::Result<ProblemSpec> {
    Ok(ProblemSpec::new(
        config.problem.kappa.clone(),
        config.problem.g.clone(),
        config.f1.clone(),
        config.problem.bounds,
    )?)
}

fn parse_oracle_mode(s: &str) -> anyhow::Result<OracleMode> {
    match s {
        "always" => Ok(OracleMode::Always),
        "on_failure" => Ok(OracleMode::OnFailure),
        "never" => Ok(OracleMode::Never),
        other => bail!("unknown oracle mode '{other}' (use always, on_failure, or never)"),
    }
}

pub fn cmd_mesh(args: &MeshArgs) -> anyhow::Result<i32> {
    let mesh = match (&args.generator, &args.input) {
        (Some(kind), None) => {
            let kind: StructuredKind = kind.parse()?;
            generate_structured(kind, args.n)?
        }
        (None, Some(path)) => load_mesh(path)?,
        (None, None) => bail!("choose a mesh source: --gen <kind> or --in <base>"),
        (Some(_), Some(_)) => unreachable!("clap rejects --gen with --in"),
    };
    let admissibility = mesh.analyze();
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)
            .with_context(|| format!("cannot create {}", dir.display()))?;
        save_mesh(&mesh, dir.join("mesh"))?;
    }
    let report = MeshReport {
        schema: SCHEMA,
        command: "mesh",
        n_vertices: mesh.n_vertices(),
        n_triangles: mesh.n_triangles(),
        n_boundary: mesh.n_boundary(),
        n_interior: mesh.n_interior(),
        max_degree: mesh.max_degree(),
        admissibility: &admissibility,
    };
    emit(&report, args.report.as_deref())?;
    eprintln!(
        "mesh: {} vertices, {} triangles, admissible: {}",
        mesh.n_vertices(),
        mesh.n_triangles(),
        admissibility.admissible
    );
    Ok(if admissibility.admissible { 0 } else { 2 })
}

pub fn cmd_solve(args: &SolveArgs) -> anyhow::Result<i32> {
    let config = load_config(&args.config)?;
    let mesh = build_mesh(&config.mesh)?;
    let spec = spec_of(&config)?;
    let mut opts = config.solver.to_options();
    if let Some(v) = args.max_iters {
        opts.max_iters = v;
    }
    if let Some(v) = args.tol {
        opts.tol = v;
    }
    if let Some(v) = args.dense_threshold {
        opts.dense_threshold = v;
    }
    let solution = solve_picard(&mesh, &spec, &opts)?;
    let u_min = solution.u.values().iter().copied().fold(f64::INFINITY, f64::min);
    let u_max = solution
        .u
        .values()
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let report = SolveReport {
        schema: SCHEMA,
        command: "solve",
        n_vertices: mesh.n_vertices(),
        n_dofs: mesh.n_interior(),
        u_min,
        u_max,
        trace: &solution.trace,
        u: &solution.u,
    };
    let out = args.out.clone().or_else(|| config.output.clone());
    emit(&report, out.as_deref())?;
    eprintln!(
        "solve: {} sweeps, residual {:e}",
        solution.trace.iterations, solution.trace.residual_norm
    );
    Ok(0)
}

pub fn cmd_certify(args: &CertifyArgs) -> anyhow::Result<i32> {
    let config = load_config(&args.config)?;
    let mesh = build_mesh(&config.mesh)?;
    let spec = spec_of(&config)?;
    let solve_opts = config.solver.to_options();
    let mut certify_opts = config.certify.to_options();
    if let Some(v) = args.eps0 {
        certify_opts.eps0 = v;
    }
    if let Some(v) = args.sign_tol {
        certify_opts.sign_tol = v;
    }
    if let Some(v) = args.dominance_tol {
        certify_opts.dominance_tol = v;
    }
    if let Some(v) = args.max_slack_retries {
        certify_opts.max_slack_retries = v;
    }
    if let Some(s) = &args.oracle {
        certify_opts.oracle = parse_oracle_mode(s)?;
    }
    if let Some(v) = args.oracle_cap {
        certify_opts.oracle_cap = v;
    }
    let f2 = config.f2.clone().unwrap_or_else(|| config.f1.clone());
    let report = comparison_experiment(&mesh, &spec, &config.f1, &f2, &solve_opts, &certify_opts)?;
    let max_abs_difference = report
        .u1
        .values()
        .iter()
        .zip(report.u2.values())
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let verdict = report.certificate.verdict;
    let wrapped = CertifyReport {
        schema: SCHEMA,
        command: "certify",
        verdict,
        max_abs_difference,
        report: &report,
    };
    let out = args.out.clone().or_else(|| config.output.clone());
    emit(&wrapped, out.as_deref())?;
    eprintln!(
        "certify: {:?} ({} unknowns, ordered: {})",
        verdict, report.certificate.n_dofs, report.ordered
    );
    Ok(verdict.exit_code())
}

pub fn cmd_oracle(args: &OracleArgs) -> anyhow::Result<i32> {
    let config = load_config(&args.config)?;
    let mesh = build_mesh(&config.mesh)?;
    let spec = spec_of(&config)?;
    let solve_opts = config.solver.to_options();
    let sol1 = solve_picard(&mesh, &spec, &solve_opts)?;
    let sol2 = match &config.f2 {
        Some(f2) => solve_picard(&mesh, &spec.with_source(f2.clone()), &solve_opts)?,
        None => sol1.clone(),
    };
    let system = assemble_linearized(&mesh, &spec, &sol1.u, &sol2.u)?;
    let n = system.dofs.n_dofs();
    if n > args.cap {
        bail!("{n} unknowns exceed the dense-oracle cap of {} (raise --cap)", args.cap);
    }
    let oracle = monotone_oracle(&system.matrix);
    let report = OracleRun {
        schema: SCHEMA,
        command: "oracle",
        n_dofs: n,
        oracle: &oracle,
    };
    let out = args.out.clone().or_else(|| config.output.clone());
    emit(&report, out.as_deref())?;
    eprintln!("oracle: monotone: {} ({n} unknowns)", oracle.monotone);
    Ok(if oracle.monotone { 0 } else { 5 })
}
