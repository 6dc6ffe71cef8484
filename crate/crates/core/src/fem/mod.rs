//! Nodal fields, interior-unknown numbering, and assembly of the linearized
//! operator, load vectors, and residuals for the P1 discretization.
//!
//! The central object is the matrix that governs the difference w = u1 - u2
//! of two states. Row i tests against the hat function phi_i of interior
//! vertex i; column j weights the difference at vertex j:
//!
//! ```text
//! a_ij = int kappa(x, u1) grad phi_j . grad phi_i
//!      + int b(x) (grad u2 . grad phi_i) phi_j
//!      + int c(x) phi_j phi_i
//! ```
//!
//! where b and c are the averages of d kappa / d eta and d g / d eta along
//! the segment between the two states at x. With b and c computed this way,
//! `A (u1 - u2) = residual(u1) - residual(u2)` holds under the same
//! quadrature, which is what ties sign conditions on A to a comparison
//! principle for the discrete problem.
//!
//! Spatial integrals use the edge-midpoint rule (exact for quadratics,
//! strictly positive weights); the state averages use an 8-point
//! Gauss-Legendre rule on the segment. Positive weights matter: every
//! coefficient bound that holds pointwise then transfers to the assembled
//! entries with no quadrature slack.

pub mod local;
pub mod quadrature;
pub mod sparse;

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::Mesh;
use crate::problem::{Kappa, ProblemSpec, Reaction, Source};
use local::basis_gradients;
use quadrature::{gl8_01, TRI_MIDPOINT};
pub use sparse::CsrMatrix;

/// One value per mesh vertex.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(transparent)]
pub struct NodalField {
    values: Vec<f64>,
}

impl NodalField {
    pub fn new(values: Vec<f64>) -> Self {
        NodalField { values }
    }

    pub fn zeros(n: usize) -> Self {
        NodalField {
            values: vec![0.0; n],
        }
    }

    /// Evaluates `f` at every vertex.
    pub fn from_fn(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        NodalField {
            values: (0..mesh.n_vertices()).map(|v| f(mesh.vertex(v))).collect(),
        }
    }

    /// Evaluates `f` at interior vertices and pins boundary vertices to
    /// exactly zero, producing a field that conforms to the homogeneous
    /// Dirichlet condition.
    pub fn from_fn_conforming(mesh: &Mesh, f: impl Fn(Point) -> f64) -> Self {
        NodalField {
            values: (0..mesh.n_vertices())
                .map(|v| {
                    if mesh.is_boundary(v) {
                        0.0
                    } else {
                        f(mesh.vertex(v))
                    }
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// True when every boundary vertex carries exactly 0.0.
    pub fn is_dirichlet_conforming(&self, mesh: &Mesh) -> bool {
        self.values.len() == mesh.n_vertices()
            && (0..mesh.n_vertices()).all(|v| !mesh.is_boundary(v) || self.values[v] == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for NodalField {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

impl std::ops::IndexMut<usize> for NodalField {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.values[i]
    }
}

/// Numbering of the interior vertices as unknowns, in vertex order.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    vertex_of_dof: Vec<usize>,
    dof_of_vertex: Vec<Option<usize>>,
}

impl DofMap {
    pub fn new(mesh: &Mesh) -> Self {
        let mut vertex_of_dof = Vec::with_capacity(mesh.n_interior());
        let mut dof_of_vertex = vec![None; mesh.n_vertices()];
        for (v, slot) in dof_of_vertex.iter_mut().enumerate() {
            if !mesh.is_boundary(v) {
                *slot = Some(vertex_of_dof.len());
                vertex_of_dof.push(v);
            }
        }
        DofMap {
            vertex_of_dof,
            dof_of_vertex,
        }
    }

    pub fn n_dofs(&self) -> usize {
        self.vertex_of_dof.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.dof_of_vertex.len()
    }

    /// Mesh vertex carrying unknown `dof`.
    pub fn vertex(&self, dof: usize) -> usize {
        self.vertex_of_dof[dof]
    }

    /// Unknown index of a vertex, or None on the boundary.
    pub fn dof(&self, vertex: usize) -> Option<usize> {
        self.dof_of_vertex[vertex]
    }

    /// Extracts the interior values of a field, in unknown order.
    pub fn gather(&self, field: &NodalField) -> Vec<f64> {
        self.vertex_of_dof.iter().map(|&v| field[v]).collect()
    }

    /// Expands unknown values to a conforming field (zero on the boundary).
    pub fn scatter(&self, dof_values: &[f64]) -> NodalField {
        assert_eq!(dof_values.len(), self.n_dofs());
        let mut values = vec![0.0; self.n_vertices()];
        for (d, &v) in self.vertex_of_dof.iter().enumerate() {
            values[v] = dof_values[d];
        }
        NodalField::new(values)
    }
}

/// The assembled linearized operator on the interior unknowns.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub matrix: CsrMatrix,
    pub dofs: DofMap,
}

/// Average of d kappa / d eta along the segment from `eta2` to `eta1`,
/// so that kappa(x, eta1) - kappa(x, eta2) = slope * (eta1 - eta2).
pub fn averaged_kappa_slope(kappa: &Kappa, x: Point, eta1: f64, eta2: f64) -> f64 {
    gl8_01()
        .iter()
        .map(|&(t, w)| w * kappa.deta(x, t * eta1 + (1.0 - t) * eta2))
        .sum()
}

/// Average of d g / d eta along the segment from `eta2` to `eta1`.
pub fn averaged_g_slope(g: &Reaction, x: Point, eta1: f64, eta2: f64) -> f64 {
    gl8_01()
        .iter()
        .map(|&(t, w)| w * g.deta(x, t * eta1 + (1.0 - t) * eta2))
        .sum()
}

fn check_field(mesh: &Mesh, u: &NodalField, name: &str) -> Result<()> {
    if u.len() != mesh.n_vertices() {
        return Err(Error::InvalidArgument(format!(
            "field {name} has {} values for a mesh with {} vertices",
            u.len(),
            mesh.n_vertices()
        )));
    }
    if !u.is_dirichlet_conforming(mesh) {
        return Err(Error::InvalidArgument(format!(
            "field {name} must be exactly zero on the Dirichlet boundary"
        )));
    }
    Ok(())
}

/// Assembles the linearized matrix for the pair of states (u1, u2), both of
/// which must conform to the homogeneous Dirichlet condition. Rows and
/// columns range over interior vertices only.
pub fn assemble_linearized(
    mesh: &Mesh,
    spec: &ProblemSpec,
    u1: &NodalField,
    u2: &NodalField,
) -> Result<AssembledSystem> {
    check_field(mesh, u1, "u1")?;
    check_field(mesh, u2, "u2")?;
    let dofs = DofMap::new(mesh);
    let mut rows = vec![BTreeMap::new(); dofs.n_dofs()];
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        let coords = mesh.tri_coords(t);
        let (grads, area) = basis_gradients(coords);
        // grad u2 is constant on the triangle.
        let mut gu2 = [0.0; 2];
        for (l, &v) in tri.iter().enumerate() {
            gu2[0] += u2[v] * grads[l][0];
            gu2[1] += u2[v] * grads[l][1];
        }
        for (bary, wfrac) in TRI_MIDPOINT {
            let w = wfrac * area;
            let mut xq = [0.0; 2];
            let mut u1q = 0.0;
            let mut u2q = 0.0;
            for (l, &v) in tri.iter().enumerate() {
                xq[0] += bary[l] * coords[l][0];
                xq[1] += bary[l] * coords[l][1];
                u1q += bary[l] * u1[v];
                u2q += bary[l] * u2[v];
            }
            let kq = spec.kappa.eval(xq, u1q);
            let bq = averaged_kappa_slope(&spec.kappa, xq, u1q, u2q);
            let cq = averaged_g_slope(&spec.g, xq, u1q, u2q);
            for li in 0..3 {
                let Some(row) = dofs.dof(tri[li]) else {
                    continue;
                };
                let conv_i = gu2[0] * grads[li][0] + gu2[1] * grads[li][1];
                for lj in 0..3 {
                    let Some(col) = dofs.dof(tri[lj]) else {
                        continue;
                    };
                    let grad_dot =
                        grads[li][0] * grads[lj][0] + grads[li][1] * grads[lj][1];
                    let val =
                        w * (kq * grad_dot + bq * conv_i * bary[lj] + cq * bary[lj] * bary[li]);
                    *rows[row].entry(col).or_insert(0.0) += val;
                }
            }
        }
    }
    Ok(AssembledSystem {
        matrix: CsrMatrix::from_rows(dofs.n_dofs(), &rows),
        dofs,
    })
}

/// Load functional of a source field: entry i is `int f phi_i`, for every
/// vertex (boundary entries are assembled too; solvers ignore them).
pub fn assemble_load(mesh: &Mesh, f: &Source) -> NodalField {
    let mut load = vec![0.0; mesh.n_vertices()];
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        let coords = mesh.tri_coords(t);
        let area = mesh.area(t);
        for (bary, wfrac) in TRI_MIDPOINT {
            let w = wfrac * area;
            let mut xq = [0.0; 2];
            for (l, c) in coords.iter().enumerate() {
                xq[0] += bary[l] * c[0];
                xq[1] += bary[l] * c[1];
            }
            let fq = f.eval(xq);
            for l in 0..3 {
                load[tri[l]] += w * fq * bary[l];
            }
        }
    }
    NodalField::new(load)
}

/// Action of the nonlinear operator on a conforming state: entry i is
/// `int kappa(x, u) grad u . grad phi_i + int g(x, u) phi_i` at interior
/// vertices, zero on the boundary.
pub fn assemble_action(mesh: &Mesh, spec: &ProblemSpec, u: &NodalField) -> Result<NodalField> {
    check_field(mesh, u, "u")?;
    let mut action = vec![0.0; mesh.n_vertices()];
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        let coords = mesh.tri_coords(t);
        let (grads, area) = basis_gradients(coords);
        let mut gu = [0.0; 2];
        for (l, &v) in tri.iter().enumerate() {
            gu[0] += u[v] * grads[l][0];
            gu[1] += u[v] * grads[l][1];
        }
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
            let gq = spec.g.eval(xq, uq);
            for (l, &v) in tri.iter().enumerate() {
                if mesh.is_boundary(v) {
                    continue;
                }
                let flux = gu[0] * grads[l][0] + gu[1] * grads[l][1];
                action[v] += w * (kq * flux + gq * bary[l]);
            }
        }
    }
    Ok(NodalField::new(action))
}

/// Residual of a conforming state against the problem's source: the action
/// minus the load, at interior vertices (zero on the boundary).
pub fn assemble_residual(mesh: &Mesh, spec: &ProblemSpec, u: &NodalField) -> Result<NodalField> {
    let action = assemble_action(mesh, spec, u)?;
    let load = assemble_load(mesh, &spec.f);
    let values = (0..mesh.n_vertices())
        .map(|v| {
            if mesh.is_boundary(v) {
                0.0
            } else {
                action[v] - load[v]
            }
        })
        .collect();
    Ok(NodalField::new(values))
}

/// Per-edge variation of a nodal field, indexed by edge id.
///
/// `edge` is the difference across the edge itself; `patch` is the largest
/// difference between any two vertices of the edge's patch (the up-to-four
/// vertices of its incident triangles); the `patch_excl_*` variants restrict
/// the pairs to patch vertices other than the named endpoint.
#[derive(Debug, Clone)]
pub struct NodalDifferences {
    pub edge: Vec<f64>,
    pub patch: Vec<f64>,
    pub patch_excl_i: Vec<f64>,
    pub patch_excl_j: Vec<f64>,
}

fn max_pairwise(values: &[f64]) -> f64 {
    let mut m = 0.0f64;
    for (a, &x) in values.iter().enumerate() {
        for &y in &values[a + 1..] {
            m = m.max((x - y).abs());
        }
    }
    m
}

/// Computes all per-edge variation measures of `u` in one sweep.
pub fn nodal_differences(mesh: &Mesh, u: &NodalField) -> NodalDifferences {
    let n = mesh.edges().len();
    let mut out = NodalDifferences {
        edge: Vec::with_capacity(n),
        patch: Vec::with_capacity(n),
        patch_excl_i: Vec::with_capacity(n),
        patch_excl_j: Vec::with_capacity(n),
    };
    for e in mesh.edges() {
        out.edge.push((u[e.i] - u[e.j]).abs());
        let verts: Vec<usize> = e.patch_vertices().collect();
        let all: Vec<f64> = verts.iter().map(|&v| u[v]).collect();
        let excl_i: Vec<f64> = verts
            .iter()
            .filter(|&&v| v != e.i)
            .map(|&v| u[v])
            .collect();
        let excl_j: Vec<f64> = verts
            .iter()
            .filter(|&&v| v != e.j)
            .map(|&v| u[v])
            .collect();
        out.patch.push(max_pairwise(&all));
        out.patch_excl_i.push(max_pairwise(&excl_i));
        out.patch_excl_j.push(max_pairwise(&excl_j));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, StructuredKind};
    use crate::problem::DataBounds;

    fn spec(kappa: Kappa, g: Reaction) -> ProblemSpec {
        ProblemSpec {
            kappa,
            g,
            f: Source::Constant { a: 0.0 },
            bounds: DataBounds {
                k_alpha: 0.1,
                k_beta: 10.0,
                k_eta: 10.0,
                g_eta: 10.0,
            },
        }
    }

    #[test]
    fn averaged_slopes_match_hand_integrals() {
        // kappa = eta^2 has slope 2 eta; averaged between 1 and 3 the
        // substitution z = 3 - 2t gives int_0^1 2 (3 - 2t) dt = 4.
        let k = Kappa::Quadratic {
            a: 0.0,
            b: 0.0,
            c: 1.0,
        };
        let b = averaged_kappa_slope(&k, [0.0, 0.0], 1.0, 3.0);
        assert!((b - 4.0).abs() < 1e-14, "{b}");
        // g = eta^3 has slope 3 eta^2; between 1 and 2: int 3 (2 - t)^2 = 7.
        let g = Reaction::Cubic { a: 1.0 };
        let c = averaged_g_slope(&g, [0.0, 0.0], 1.0, 2.0);
        assert!((c - 7.0).abs() < 1e-13, "{c}");
        // Swapping the states leaves the average unchanged.
        assert!((averaged_kappa_slope(&k, [0.0, 0.0], 3.0, 1.0) - b).abs() < 1e-14);
    }

    #[test]
    fn averaged_slope_of_constant_kappa_is_zero() {
        let k = Kappa::Constant { a: 3.0 };
        assert_eq!(averaged_kappa_slope(&k, [0.5, 0.5], -2.0, 7.0), 0.0);
    }

    #[test]
    fn five_point_stencil_diagonal() {
        // Unit Laplacian on the right-triangle grid: the single interior
        // vertex of the n = 2 mesh carries the classical diagonal value 4.
        let mesh = generate_structured(StructuredKind::RightUniform, 2).unwrap();
        let z = NodalField::zeros(mesh.n_vertices());
        let sys = assemble_linearized(
            &mesh,
            &spec(Kappa::Constant { a: 1.0 }, Reaction::Zero),
            &z,
            &z,
        )
        .unwrap();
        assert_eq!(sys.dofs.n_dofs(), 1);
        assert!((sys.matrix.get(0, 0) - 4.0).abs() < 1e-13);
    }

    #[test]
    fn linear_reaction_adds_patch_mass() {
        // With g = eta the averaged slope is 1, so the diagonal gains the
        // lumped-free mass of the vertex star: 6 triangles of area 1/8,
        // each contributing area/6.
        let mesh = generate_structured(StructuredKind::RightUniform, 2).unwrap();
        let z = NodalField::zeros(mesh.n_vertices());
        let sys = assemble_linearized(
            &mesh,
            &spec(Kappa::Constant { a: 1.0 }, Reaction::Linear { a: 1.0 }),
            &z,
            &z,
        )
        .unwrap();
        assert!((sys.matrix.get(0, 0) - (4.0 + 0.125)).abs() < 1e-13);
    }

    #[test]
    fn convective_term_from_unit_slope() {
        // kappa = 1 + eta makes the averaged slope exactly 1, so with
        // u2 the center hat function the convective part adds
        // (1/3) sum_T |grad phi_c|^2 |T| = (1/3) * 4 to the diagonal,
        // while kappa(x, u1 = 0) keeps the diffusion part at 4.
        let mesh = generate_structured(StructuredKind::RightUniform, 2).unwrap();
        let z = NodalField::zeros(mesh.n_vertices());
        let mut u2 = NodalField::zeros(mesh.n_vertices());
        let center = (0..mesh.n_vertices())
            .find(|&v| !mesh.is_boundary(v))
            .unwrap();
        u2[center] = 1.0;
        let sys = assemble_linearized(
            &mesh,
            &spec(
                Kappa::Quadratic {
                    a: 1.0,
                    b: 1.0,
                    c: 0.0,
                },
                Reaction::Zero,
            ),
            &z,
            &u2,
        )
        .unwrap();
        assert!((sys.matrix.get(0, 0) - (4.0 + 4.0 / 3.0)).abs() < 1e-13);
    }

    #[test]
    fn constant_load_is_star_area_third() {
        let mesh = generate_structured(StructuredKind::RightUniform, 2).unwrap();
        let load = assemble_load(&mesh, &Source::Constant { a: 1.0 });
        let center = (0..mesh.n_vertices())
            .find(|&v| !mesh.is_boundary(v))
            .unwrap();
        // Six star triangles of area 1/8, each giving area/3.
        assert!((load[center] - 0.25).abs() < 1e-15);
        // Total load equals the domain area.
        let total: f64 = load.values().iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn linearization_matches_residual_difference() {
        // For polynomial coefficient families the state averages are exact,
        // so A (u1 - u2) = r(u1) - r(u2) holds to roundoff.
        let mesh = generate_structured(StructuredKind::ThreeDirection, 4).unwrap();
        let p = ProblemSpec {
            kappa: Kappa::Quadratic {
                a: 1.0,
                b: 0.2,
                c: 0.1,
            },
            g: Reaction::Cubic { a: 0.3 },
            f: Source::Trig {
                a: 1.0,
                kx: 1.0,
                ky: 1.0,
            },
            bounds: DataBounds {
                k_alpha: 0.5,
                k_beta: 2.0,
                k_eta: 1.0,
                g_eta: 1.0,
            },
        };
        let u1 = NodalField::from_fn_conforming(&mesh, |x| {
            0.5 * (x[0] * 3.0).sin() * (x[1] + 0.2)
        });
        let u2 = NodalField::from_fn_conforming(&mesh, |x| 0.3 * x[0] * x[1] - 0.1 * x[1]);
        let sys = assemble_linearized(&mesh, &p, &u1, &u2).unwrap();
        let w: Vec<f64> = sys
            .dofs
            .gather(&u1)
            .iter()
            .zip(sys.dofs.gather(&u2))
            .map(|(a, b)| a - b)
            .collect();
        let aw = sys.matrix.matvec(&w);
        let r1 = sys.dofs.gather(&assemble_residual(&mesh, &p, &u1).unwrap());
        let r2 = sys.dofs.gather(&assemble_residual(&mesh, &p, &u2).unwrap());
        let scale = aw.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(scale > 0.0);
        for i in 0..aw.len() {
            assert!(
                (aw[i] - (r1[i] - r2[i])).abs() <= 1e-12 * scale,
                "row {i}: {} vs {}",
                aw[i],
                r1[i] - r2[i]
            );
        }
    }

    #[test]
    fn rejects_non_conforming_states() {
        let mesh = generate_structured(StructuredKind::RightUniform, 2).unwrap();
        let bad = NodalField::from_fn(&mesh, |x| x[0] + 1.0);
        let z = NodalField::zeros(mesh.n_vertices());
        let p = spec(Kappa::Constant { a: 1.0 }, Reaction::Zero);
        assert!(assemble_linearized(&mesh, &p, &bad, &z).is_err());
        assert!(assemble_linearized(&mesh, &p, &z, &bad).is_err());
        assert!(assemble_residual(&mesh, &p, &bad).is_err());
    }

    #[test]
    fn dof_map_round_trip() {
        let mesh = generate_structured(StructuredKind::ThreeDirection, 3).unwrap();
        let dofs = DofMap::new(&mesh);
        assert_eq!(dofs.n_dofs(), mesh.n_interior());
        let u = NodalField::from_fn_conforming(&mesh, |x| x[0] - 2.0 * x[1]);
        let gathered = dofs.gather(&u);
        assert_eq!(dofs.scatter(&gathered), u);
        for d in 0..dofs.n_dofs() {
            assert_eq!(dofs.dof(dofs.vertex(d)), Some(d));
        }
    }

    #[test]
    fn nodal_differences_on_two_triangles() {
        let mesh = crate::mesh::Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let u = NodalField::new(vec![0.0, 1.0, 3.0, 6.0]);
        let d = nodal_differences(&mesh, &u);
        let diag = mesh.edge_id(0, 2).unwrap();
        assert_eq!(d.edge[diag], 3.0);
        assert_eq!(d.patch[diag], 6.0);
        assert_eq!(d.patch_excl_i[diag], 5.0);
        assert_eq!(d.patch_excl_j[diag], 6.0);
        let bottom = mesh.edge_id(0, 1).unwrap();
        assert_eq!(d.edge[bottom], 1.0);
        assert_eq!(d.patch[bottom], 3.0);
        assert_eq!(d.patch_excl_i[bottom], 2.0);
        assert_eq!(d.patch_excl_j[bottom], 3.0);
    }
}
