//! Fixed-point solution of the discrete quasilinear problem.
//!
//! Each sweep freezes the state inside the coefficients and solves the
//! linear problem
//!
//! ```text
//! int kappa(x, u_k) grad u . grad phi_i + int c_k u phi_i
//!     = int f phi_i - int g(x, u_k) phi_i + int c_k u_k phi_i
//! ```
//!
//! with c_k(x) = d g / d eta at the current state. The reaction shift keeps
//! the matrix symmetric positive definite (c_k >= 0 by assumption) without
//! changing the fixed point, so the linear solves are a dense LU for small
//! problems and Jacobi-preconditioned conjugate gradients above a size
//! threshold. Everything is deterministic: rerunning a solve reproduces the
//! same bits.

use std::collections::BTreeMap;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fem::local::basis_gradients;
use crate::fem::quadrature::TRI_MIDPOINT;
use crate::fem::sparse::CsrMatrix;
use crate::fem::{assemble_action, assemble_load, DofMap, NodalField};
use crate::mesh::Mesh;
use crate::problem::ProblemSpec;

/// Options for the fixed-point iteration.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Maximum number of sweeps before giving up.
    pub max_iters: usize,
    /// Sup-norm increment below which the iteration stops.
    pub tol: f64,
    /// Starting state; zero if absent. Must conform to the boundary
    /// condition.
    pub initial_guess: Option<NodalField>,
    /// Unknown counts up to this bound use a dense factorization; larger
    /// systems use conjugate gradients.
    pub dense_threshold: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            max_iters: 200,
            tol: 1e-10,
            initial_guess: None,
            dense_threshold: 2000,
        }
    }
}

/// Convergence history of one solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardTrace {
    /// Sup-norm of the update after each sweep.
    pub increments: Vec<f64>,
    /// Number of sweeps performed.
    pub iterations: usize,
    /// Sup-norm of the discrete residual at the returned state.
    pub residual_norm: f64,
    pub converged: bool,
}

/// A converged state together with its trace.
#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub u: NodalField,
    pub trace: PicardTrace,
}

/// Solves the discrete problem with the source field named in `spec`.
pub fn solve_picard(mesh: &Mesh, spec: &ProblemSpec, opts: &SolveOptions) -> Result<PicardSolution> {
    let load = assemble_load(mesh, &spec.f);
    solve_picard_with_load(mesh, spec, &load, opts)
}

/// Solves the discrete problem against an explicit load functional (entry i
/// is the right-hand side tested with phi_i; boundary entries are ignored).
pub fn solve_picard_with_load(
    mesh: &Mesh,
    spec: &ProblemSpec,
    load: &NodalField,
    opts: &SolveOptions,
) -> Result<PicardSolution> {
    if load.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "load has {} entries for a mesh with {} vertices",
            load.len(),
            mesh.n_vertices()
        )));
    }
    let dofs = DofMap::new(mesh);
    let n = dofs.n_dofs();
    let mut u = match &opts.initial_guess {
        Some(g) => {
            if !g.is_dirichlet_conforming(mesh) {
                return Err(Error::InvalidArgument(
                    "initial guess must be exactly zero on the Dirichlet boundary".into(),
                ));
            }
            g.clone()
        }
        None => NodalField::zeros(mesh.n_vertices()),
    };
    if n == 0 {
        return Ok(PicardSolution {
            u,
            trace: PicardTrace {
                increments: Vec::new(),
                iterations: 0,
                residual_norm: 0.0,
                converged: true,
            },
        });
    }

    let load_dofs = dofs.gather(load);
    let mut increments = Vec::new();
    for sweep in 1..=opts.max_iters {
        let (matrix, shift) = assemble_sweep(mesh, spec, &dofs, &u);
        let rhs: Vec<f64> = (0..n).map(|i| load_dofs[i] + shift[i]).collect();
        let x = if n <= opts.dense_threshold {
            solve_dense(&matrix, &rhs)?
        } else {
            solve_cg_jacobi(&matrix, &rhs)?
        };
        let prev = dofs.gather(&u);
        let increment = x
            .iter()
            .zip(&prev)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        increments.push(increment);
        u = dofs.scatter(&x);
        if increment <= opts.tol {
            let residual_norm = residual_sup_norm(mesh, spec, &dofs, &u, &load_dofs)?;
            return Ok(PicardSolution {
                u,
                trace: PicardTrace {
                    increments,
                    iterations: sweep,
                    residual_norm,
                    converged: true,
                },
            });
        }
    }
    let residual_norm = residual_sup_norm(mesh, spec, &dofs, &u, &load_dofs)?;
    let last_increment = increments.last().copied().unwrap_or(f64::INFINITY);
    Err(Error::NonConvergence {
        iterations: opts.max_iters,
        last_increment,
        trace: Box::new(PicardTrace {
            increments,
            iterations: opts.max_iters,
            residual_norm,
            converged: false,
        }),
    })
}

/// Assembles the frozen-coefficient matrix and the reaction-shift part of
/// the right-hand side at the current state: shift_i collects
/// `int (c_k u_k - g(x, u_k)) phi_i` with both terms grouped per quadrature
/// point, so they cancel exactly when g is linear in the state.
fn assemble_sweep(
    mesh: &Mesh,
    spec: &ProblemSpec,
    dofs: &DofMap,
    u: &NodalField,
) -> (CsrMatrix, Vec<f64>) {
    let n = dofs.n_dofs();
    let mut rows = vec![BTreeMap::new(); n];
    let mut shift = vec![0.0; n];
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        let coords = mesh.tri_coords(t);
        let (grads, area) = basis_gradients(coords);
        for (bary, wfrac) in TRI_MIDPOINT {
            let w = wfrac * area;
            let mut xq = [0.0; 2];
            let mut uq = 0.0;
            for (l, &v) in tri.iter().enumerate() {
                xq[0] += bary[l] * coords[l][0];
                xq[1] += bary[l] * coords[l][1];
                uq += bary[l] * u[v];
            }
            let kq = spec.kappa.eval(xq, uq);
            let cq = spec.g.deta(xq, uq);
            let gq = spec.g.eval(xq, uq);
            for li in 0..3 {
                let Some(row) = dofs.dof(tri[li]) else {
                    continue;
                };
                shift[row] += w * (cq * uq - gq) * bary[li];
                for lj in 0..3 {
                    let Some(col) = dofs.dof(tri[lj]) else {
                        continue;
                    };
                    let grad_dot =
                        grads[li][0] * grads[lj][0] + grads[li][1] * grads[lj][1];
                    let val = w * (kq * grad_dot + cq * bary[lj] * bary[li]);
                    *rows[row].entry(col).or_insert(0.0) += val;
                }
            }
        }
    }
    (CsrMatrix::from_rows(n, &rows), shift)
}

fn residual_sup_norm(
    mesh: &Mesh,
    spec: &ProblemSpec,
    dofs: &DofMap,
    u: &NodalField,
    load_dofs: &[f64],
) -> Result<f64> {
    let action = assemble_action(mesh, spec, u)?;
    let action_dofs = dofs.gather(&action);
    Ok(action_dofs
        .iter()
        .zip(load_dofs)
        .fold(0.0f64, |m, (a, l)| m.max((a - l).abs())))
}

fn solve_dense(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let lu = a.to_dense().lu();
    let x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or_else(|| Error::LinearSolve("singular sweep matrix".into()))?;
    Ok(x.data.into())
}

/// Conjugate gradients with Jacobi preconditioning; valid because every
/// sweep matrix is symmetric positive definite.
fn solve_cg_jacobi(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    let mut diag = vec![0.0; n];
    for (i, d) in diag.iter_mut().enumerate() {
        *d = a.get(i, i);
        if *d <= 0.0 {
            return Err(Error::LinearSolve(format!(
                "sweep matrix has nonpositive diagonal {d} at row {i}"
            )));
        }
    }
    let norm_b = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm_b == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let target = 1e-12 * norm_b;
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    for _ in 0..(20 * n + 100) {
        let ap = a.matvec(&p);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            return Err(Error::LinearSolve(
                "sweep matrix is not positive definite".into(),
            ));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let norm_r = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_r <= target {
            return Ok(x);
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::LinearSolve(
        "conjugate gradients failed to reach tolerance".into(),
    ))
}
