//! Independent oracles and generators shared by the integration suites.
//!
//! Nothing here reuses the library's quadrature, local element tables, or
//! assembly loops: the Gauss-Legendre rule comes from the Golub-Welsch
//! eigenvalue construction, the triangle rule is a degree-14 conical
//! product, gradients come from inverting the affine element map with
//! nalgebra, and the boundary distance is a from-scratch breadth-first
//! search over an adjacency list built directly from the triangle list.

// Each test target pulls in a different subset of these helpers.
#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use monofem::{
    generate_structured, Kappa, Mesh, NodalField, ProblemSpec, Reaction, StructuredKind,
};

/// Gauss-Legendre nodes and weights on [-1, 1] by the Golub-Welsch
/// construction: eigenvalues of the symmetric Jacobi matrix are the nodes,
/// the squared first eigenvector components (times 2) the weights.
pub fn gauss_legendre_gw(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1);
    let mut jacobi = DMatrix::zeros(n, n);
    for k in 1..n {
        let b = k as f64 / (4.0 * (k as f64).powi(2) - 1.0).sqrt();
        jacobi[(k - 1, k)] = b;
        jacobi[(k, k - 1)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let node = eig.eigenvalues[k];
            let weight = 2.0 * eig.eigenvectors[(0, k)].powi(2);
            (node, weight)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// The same rule mapped to [0, 1].
pub fn gauss_legendre_gw_01(n: usize) -> Vec<(f64, f64)> {
    gauss_legendre_gw(n)
        .into_iter()
        .map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w))
        .collect()
}

/// Conical-product rule on the reference triangle (0,0), (1,0), (0,1):
/// x = u, y = v (1 - u) over the unit square absorbs the Jacobian (1 - u)
/// into the weights. With an m-point Gauss-Legendre factor the rule is
/// exact for polynomials of total degree 2m - 2; m = 8 gives degree 14.
pub fn tri_rule(m: usize) -> Vec<([f64; 2], f64)> {
    let line = gauss_legendre_gw_01(m);
    let mut rule = Vec::with_capacity(m * m);
    for &(u, wu) in &line {
        for &(v, wv) in &line {
            rule.push(([u, v * (1.0 - u)], wu * wv * (1.0 - u)));
        }
    }
    rule
}

/// State-averaged coefficient slope by a 24-point Gauss-Legendre rule in
/// the averaging parameter.
fn averaged_slope(
    deta: impl Fn(f64) -> f64,
    eta1: f64,
    eta2: f64,
    line: &[(f64, f64)],
) -> f64 {
    line.iter()
        .map(|&(t, w)| w * deta(t * eta1 + (1.0 - t) * eta2))
        .sum()
}

/// Dense assembly of the linearized matrix by the degree-14 triangle rule,
/// with element gradients from the inverted affine map. Rows and columns
/// index the interior vertices in ascending vertex order.
pub fn oracle_assemble(
    mesh: &Mesh,
    spec: &ProblemSpec,
    u1: &NodalField,
    u2: &NodalField,
) -> DMatrix<f64> {
    let dof: Vec<Option<usize>> = {
        let mut next = 0;
        (0..mesh.n_vertices())
            .map(|v| {
                if mesh.is_boundary(v) {
                    None
                } else {
                    let d = next;
                    next += 1;
                    Some(d)
                }
            })
            .collect()
    };
    let n = dof.iter().flatten().count();
    let mut a = DMatrix::zeros(n, n);
    let rule = tri_rule(8);
    let line24 = gauss_legendre_gw_01(24);

    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        let p: Vec<[f64; 2]> = tri.iter().map(|&v| mesh.vertex(v)).collect();
        let jac = Matrix2::new(
            p[1][0] - p[0][0],
            p[2][0] - p[0][0],
            p[1][1] - p[0][1],
            p[2][1] - p[0][1],
        );
        let det = jac.determinant();
        assert!(det > 0.0, "triangles are counterclockwise");
        let inv_t = jac.try_inverse().unwrap().transpose();
        // Reference gradients of the three barycentric coordinates.
        let grads: Vec<Vector2<f64>> = [
            Vector2::new(-1.0, -1.0),
            Vector2::new(1.0, 0.0),
            Vector2::new(0.0, 1.0),
        ]
        .iter()
        .map(|g| inv_t * g)
        .collect();
        let grad_u2 = grads[0] * u2[tri[0]] + grads[1] * u2[tri[1]] + grads[2] * u2[tri[2]];

        for &([xi, eta], w_ref) in &rule {
            let bary = [1.0 - xi - eta, xi, eta];
            let x = [
                p[0][0] + jac[(0, 0)] * xi + jac[(0, 1)] * eta,
                p[0][1] + jac[(1, 0)] * xi + jac[(1, 1)] * eta,
            ];
            let w = w_ref * det;
            let u1q: f64 = (0..3).map(|l| bary[l] * u1[tri[l]]).sum();
            let u2q: f64 = (0..3).map(|l| bary[l] * u2[tri[l]]).sum();
            let kq = spec.kappa.eval(x, u1q);
            let bq = averaged_slope(|e| spec.kappa.deta(x, e), u1q, u2q, &line24);
            let cq = averaged_slope(|e| spec.g.deta(x, e), u1q, u2q, &line24);
            for (li, &vi) in tri.iter().enumerate() {
                let Some(row) = dof[vi] else { continue };
                let conv = grad_u2.dot(&grads[li]);
                for (lj, &vj) in tri.iter().enumerate() {
                    let Some(col) = dof[vj] else { continue };
                    let diffusion = kq * grads[lj].dot(&grads[li]);
                    let convective = bq * conv * bary[lj];
                    let reactive = cq * bary[lj] * bary[li];
                    a[(row, col)] += w * (diffusion + convective + reactive);
                }
            }
        }
    }
    a
}

/// Breadth-first boundary distance, computed from scratch: adjacency from
/// the triangle list, sources at interior vertices with a boundary
/// neighbor, None on the boundary.
pub fn bfs_distance(mesh: &Mesh) -> Vec<Option<usize>> {
    let n = mesh.n_vertices();
    let mut adjacency = vec![std::collections::BTreeSet::new(); n];
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangle(t);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            adjacency[tri[a]].insert(tri[b]);
            adjacency[tri[b]].insert(tri[a]);
        }
    }
    let mut dist = vec![None; n];
    let mut queue = std::collections::VecDeque::new();
    for v in 0..n {
        if !mesh.is_boundary(v) && adjacency[v].iter().any(|&w| mesh.is_boundary(w)) {
            dist[v] = Some(0);
            queue.push_back(v);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v].unwrap();
        for &w in &adjacency[v] {
            if !mesh.is_boundary(w) && dist[w].is_none() {
                dist[w] = Some(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// A three-direction mesh whose interior vertices are jiggled by up to
/// `rel_amp` times the lattice spacing in each coordinate.
pub fn perturbed_three_direction(n: usize, rel_amp: f64, seed: u64) -> Mesh {
    let base = generate_structured(StructuredKind::ThreeDirection, n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / n as f64;
    let vertices: Vec<[f64; 2]> = (0..base.n_vertices())
        .map(|v| {
            let p = base.vertex(v);
            if base.is_boundary(v) {
                p
            } else {
                [
                    p[0] + rng.random_range(-rel_amp..rel_amp) * h,
                    p[1] + rng.random_range(-rel_amp..rel_amp) * h,
                ]
            }
        })
        .collect();
    Mesh::new(vertices, base.triangles().to_vec()).unwrap()
}

/// A smooth random field, zero on the boundary, rescaled to the requested
/// amplitude in the sup norm.
pub fn random_conforming_field(mesh: &Mesh, amplitude: f64, seed: u64) -> NodalField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
    let raw = NodalField::from_fn_conforming(mesh, |x| {
        c[0] * x[0]
            + c[1] * x[1]
            + c[2] * (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).sin()
            + c[3] * x[0] * x[1]
    });
    let max = raw.max_abs();
    if max == 0.0 {
        return raw;
    }
    let scale = amplitude / max;
    NodalField::new(raw.values().iter().map(|&v| v * scale).collect())
}

/// Conservative data bounds valid for the given coefficient pair over
/// states up to `state_cap` in absolute value.
pub fn bounds_for(kappa: &Kappa, g: &Reaction, state_cap: f64) -> monofem::DataBounds {
    let (k_alpha, k_beta, k_eta) = match *kappa {
        Kappa::Constant { a } => (a, a, 0.0),
        Kappa::Tanh { a, b, c } => (a - b.abs(), a + b.abs(), (b * c).abs()),
        Kappa::Rational { a, b } => {
            // a + b / (1 + eta^2) ranges over [a, a + b] for b >= 0; the
            // slope magnitude peaks at eta = 1/sqrt(3).
            assert!(b >= 0.0);
            (a, a + b, 3.0 * 3.0f64.sqrt() / 8.0 * b)
        }
        Kappa::Quadratic { a, b, c } => {
            let r = state_cap;
            let ends = [a - b * r + c * r * r, a + b * r + c * r * r];
            let mut lo = ends[0].min(ends[1]);
            let mut hi = ends[0].max(ends[1]);
            if c != 0.0 {
                let vertex = -b / (2.0 * c);
                if vertex.abs() <= r {
                    let v = a + b * vertex + c * vertex * vertex;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
            }
            (lo, hi, b.abs() + 2.0 * c.abs() * r)
        }
    };
    let g_eta = match *g {
        Reaction::Zero => 0.0,
        Reaction::Linear { a } => a,
        Reaction::Cubic { a } => 3.0 * a * state_cap * state_cap,
    };
    monofem::DataBounds {
        k_alpha,
        k_beta,
        k_eta,
        g_eta,
    }
}
