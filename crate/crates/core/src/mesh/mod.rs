//! Conforming triangle meshes and the geometric quantities used by the
//! admissibility and certification checks.
//!
//! A [`Mesh`] is immutable after construction: edge patches, neighbor lists,
//! and boundary flags are derived up front so that all later queries are
//! read-only and cheap. Every triangle is stored counterclockwise; inverted
//! or degenerate elements are rejected at construction time.
//!
//! The mesh quality analysis ([`Mesh::analyze`]) reports the three numbers
//! the certification depends on: the maximum interior angle, the minimum
//! over interior edges of the sum of the two angles' cotangents opposite the
//! edge, and the maximum "patch cotangent sum" (the opposite-cotangent sum
//! plus the cotangents at one endpoint across the patch). A mesh is
//! admissible when no angle exceeds pi/2 and every opposite-cotangent sum is
//! strictly positive.

mod generate;
mod io;

pub use generate::{generate_structured, StructuredKind};
pub use io::{load_mesh, save_mesh};

use std::collections::BTreeMap;
use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{self, Point};

/// Angles may exceed pi/2 by at most this much before a mesh is rejected.
pub const ANGLE_TOL: f64 = 1e-12;

/// Opposite-cotangent sums must exceed this threshold for admissibility.
pub const COT_SUM_TOL: f64 = 1e-12;

/// Geometry of the one- or two-triangle patch around a mesh edge.
///
/// For an interior edge the patch is the pair of triangles sharing the edge;
/// for a boundary edge it is the single adjacent triangle. All angles and
/// cotangents are precomputed from coordinates (cotangents as dot products
/// over twice the area, never through a tangent).
#[derive(Debug, Clone)]
pub struct EdgePatch {
    /// First endpoint (always the smaller vertex index).
    pub i: usize,
    /// Second endpoint.
    pub j: usize,
    /// Adjacent triangle indices: one entry for a boundary edge, two for an
    /// interior edge.
    pub triangles: Vec<usize>,
    /// Vertex opposite the edge in each adjacent triangle.
    pub opposite: Vec<usize>,
    /// Angle opposite the edge in each adjacent triangle.
    pub theta_opposite: Vec<f64>,
    /// Cotangent of each opposite angle.
    pub cot_opposite: Vec<f64>,
    /// Angle at endpoint `i` in each adjacent triangle.
    pub theta_at_i: Vec<f64>,
    /// Cotangent of each angle at `i`.
    pub cot_at_i: Vec<f64>,
    /// Angle at endpoint `j` in each adjacent triangle.
    pub theta_at_j: Vec<f64>,
    /// Cotangent of each angle at `j`.
    pub cot_at_j: Vec<f64>,
}

impl EdgePatch {
    /// True when two triangles share the edge.
    pub fn is_interior(&self) -> bool {
        self.triangles.len() == 2
    }

    /// Angle opposite the edge in the first adjacent triangle.
    pub fn theta_plus(&self) -> f64 {
        self.theta_opposite[0]
    }

    /// Angle opposite the edge in the second adjacent triangle, if any.
    pub fn theta_minus(&self) -> Option<f64> {
        self.theta_opposite.get(1).copied()
    }

    /// Sum of the cotangents of the angles opposite the edge.
    pub fn opposite_cot_sum(&self) -> f64 {
        self.cot_opposite.iter().sum()
    }

    /// Opposite-cotangent sum plus the cotangents at one endpoint over the
    /// patch triangles (`end` = 0 for `i`, 1 for `j`).
    pub fn patch_cot_sum(&self, end: usize) -> f64 {
        let at_end: f64 = match end {
            0 => self.cot_at_i.iter().sum(),
            1 => self.cot_at_j.iter().sum(),
            _ => panic!("edge endpoint selector must be 0 or 1"),
        };
        self.opposite_cot_sum() + at_end
    }

    /// Vertices of the patch: the two endpoints followed by the opposite
    /// vertices of the adjacent triangles.
    pub fn patch_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        [self.i, self.j].into_iter().chain(self.opposite.iter().copied())
    }
}

/// A triangle whose largest interior angle exceeds the admissible limit.
#[derive(Debug, Clone, Serialize)]
pub struct AngleViolation {
    pub triangle: usize,
    pub angle: f64,
}

/// An interior edge whose opposite-cotangent sum is not strictly positive.
#[derive(Debug, Clone, Serialize)]
pub struct EdgeViolation {
    pub i: usize,
    pub j: usize,
    pub cot_sum: f64,
}

/// Summary of the angle-based mesh quality analysis.
#[derive(Debug, Clone, Serialize)]
pub struct MeshAdmissibility {
    /// Largest interior angle over all triangles.
    pub max_interior_angle: f64,
    /// Minimum over interior edges of cot(theta+) + cot(theta-); `None` when
    /// the mesh has no interior edge.
    pub min_opposite_cot_sum: Option<f64>,
    /// Maximum over interior edges and endpoint choices of the patch
    /// cotangent sum; `None` when the mesh has no interior edge.
    pub max_patch_cot_sum: Option<f64>,
    /// Maximum number of neighbors of any vertex.
    pub max_degree: usize,
    /// True when every angle is at most pi/2 (+ [`ANGLE_TOL`]) and every
    /// interior-edge cotangent sum exceeds [`COT_SUM_TOL`].
    pub admissible: bool,
    /// Triangles violating the angle bound.
    pub angle_violations: Vec<AngleViolation>,
    /// Interior edges violating the cotangent-sum bound.
    pub edge_violations: Vec<EdgeViolation>,
}

/// Conforming triangulation with counterclockwise elements.
#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    edges: Vec<EdgePatch>,
    neighbors: Vec<Vec<usize>>,
    edge_ids: BTreeMap<(usize, usize), usize>,
}

impl Mesh {
    /// Builds a mesh, inferring the Dirichlet boundary from edges with a
    /// single adjacent triangle.
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        Self::build(vertices, triangles, None)
    }

    /// Builds a mesh with explicit boundary flags. Every endpoint of a
    /// one-triangle edge must be flagged; extra flagged vertices are treated
    /// as additional Dirichlet constraints.
    pub fn with_boundary(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<bool>,
    ) -> Result<Self> {
        Self::build(vertices, triangles, Some(boundary))
    }

    fn build(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        boundary: Option<Vec<bool>>,
    ) -> Result<Self> {
        let nv = vertices.len();
        if nv < 3 {
            return Err(Error::Topology(format!(
                "mesh needs at least 3 vertices, got {nv}"
            )));
        }
        if triangles.is_empty() {
            return Err(Error::Topology("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= nv {
                    return Err(Error::Topology(format!(
                        "triangle {t} references vertex {v}, but the mesh has only {nv} vertices"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Topology(format!(
                    "triangle {t} repeats a vertex: {tri:?}"
                )));
            }
            let a2 = geom::signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a2 <= 0.0 {
                return Err(Error::Topology(format!(
                    "triangle {t} is degenerate or clockwise (doubled signed area {a2:.3e}); \
                     elements must be counterclockwise"
                )));
            }
        }

        // Collect the triangles adjacent to each undirected edge, remembering
        // the direction in which each triangle traverses it.
        let mut edge_tris: BTreeMap<(usize, usize), Vec<(usize, bool)>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                edge_tris.entry(key).or_default().push((t, a < b));
            }
        }
        for (&(a, b), adj) in &edge_tris {
            if adj.len() > 2 {
                return Err(Error::Topology(format!(
                    "edge ({a}, {b}) is shared by {} triangles; a conforming mesh allows at most 2",
                    adj.len()
                )));
            }
            if adj.len() == 2 && adj[0].1 == adj[1].1 {
                return Err(Error::Topology(format!(
                    "edge ({a}, {b}) is traversed twice in the same direction; \
                     neighboring triangles have inconsistent orientation"
                )));
            }
        }

        // Boundary flags: inferred from one-triangle edges, or validated
        // against them when supplied.
        let mut inferred = vec![false; nv];
        for (&(a, b), adj) in &edge_tris {
            if adj.len() == 1 {
                inferred[a] = true;
                inferred[b] = true;
            }
        }
        let boundary = match boundary {
            None => inferred,
            Some(flags) => {
                if flags.len() != nv {
                    return Err(Error::Topology(format!(
                        "boundary flag vector has length {}, expected {nv}",
                        flags.len()
                    )));
                }
                for v in 0..nv {
                    if inferred[v] && !flags[v] {
                        return Err(Error::Topology(format!(
                            "vertex {v} lies on a boundary edge but is not flagged as boundary"
                        )));
                    }
                }
                flags
            }
        };
        if !boundary.iter().any(|&b| b) {
            return Err(Error::NoBoundary);
        }

        // Neighbor lists (sorted) and per-edge patch geometry.
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); nv];
        for &(a, b) in edge_tris.keys() {
            neighbors[a].push(b);
            neighbors[b].push(a);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }

        let mut edges = Vec::with_capacity(edge_tris.len());
        let mut edge_ids = BTreeMap::new();
        for (&(i, j), adj) in &edge_tris {
            let mut patch = EdgePatch {
                i,
                j,
                triangles: Vec::with_capacity(adj.len()),
                opposite: Vec::new(),
                theta_opposite: Vec::new(),
                cot_opposite: Vec::new(),
                theta_at_i: Vec::new(),
                cot_at_i: Vec::new(),
                theta_at_j: Vec::new(),
                cot_at_j: Vec::new(),
            };
            for &(t, _) in adj {
                let tri = triangles[t];
                let k = *tri
                    .iter()
                    .find(|&&v| v != i && v != j)
                    .expect("triangle adjacent to an edge has a third vertex");
                let (qi, qj, qk) = (vertices[i], vertices[j], vertices[k]);
                patch.triangles.push(t);
                patch.opposite.push(k);
                patch.theta_opposite.push(geom::angle_at(qk, qi, qj));
                patch.cot_opposite.push(geom::cot_at(qk, qi, qj));
                patch.theta_at_i.push(geom::angle_at(qi, qj, qk));
                patch.cot_at_i.push(geom::cot_at(qi, qj, qk));
                patch.theta_at_j.push(geom::angle_at(qj, qi, qk));
                patch.cot_at_j.push(geom::cot_at(qj, qi, qk));
            }
            edge_ids.insert((i, j), edges.len());
            edges.push(patch);
        }

        Ok(Mesh {
            vertices,
            triangles,
            boundary,
            edges,
            neighbors,
            edge_ids,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Point {
        self.vertices[v]
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [usize; 3] {
        self.triangles[t]
    }

    /// Coordinates of the three vertices of triangle `t`.
    pub fn tri_coords(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Area of triangle `t` (positive; elements are counterclockwise).
    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.tri_coords(t);
        0.5 * geom::signed_area2(a, b, c)
    }

    /// Largest element area.
    pub fn max_area(&self) -> f64 {
        (0..self.n_triangles())
            .map(|t| self.area(t))
            .fold(0.0, f64::max)
    }

    /// Interior angles of triangle `t`, one per vertex in storage order.
    pub fn angles(&self, t: usize) -> [f64; 3] {
        let [a, b, c] = self.tri_coords(t);
        [
            geom::angle_at(a, b, c),
            geom::angle_at(b, c, a),
            geom::angle_at(c, a, b),
        ]
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn n_boundary(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    /// Indices of vertices not on the Dirichlet boundary, ascending.
    pub fn interior_vertices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_vertices()).filter(|&v| !self.boundary[v])
    }

    pub fn n_interior(&self) -> usize {
        self.boundary.iter().filter(|&&b| !b).count()
    }

    /// All edge patches, ordered by (i, j).
    pub fn edges(&self) -> &[EdgePatch] {
        &self.edges
    }

    /// The patch around the edge between `a` and `b`, if the edge exists.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<&EdgePatch> {
        let key = (a.min(b), a.max(b));
        self.edge_ids.get(&key).map(|&e| &self.edges[e])
    }

    /// Index into [`Mesh::edges`] of the edge between `a` and `b`.
    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_ids.get(&(a.min(b), a.max(b))).copied()
    }

    /// Vertices sharing an edge with `v`, ascending.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Maximum number of neighbors over all vertices.
    pub fn max_degree(&self) -> usize {
        self.neighbors.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Angle-based mesh quality analysis; see the module docs.
    pub fn analyze(&self) -> MeshAdmissibility {
        let mut max_angle: f64 = 0.0;
        let mut angle_violations = Vec::new();
        for t in 0..self.n_triangles() {
            for angle in self.angles(t) {
                max_angle = max_angle.max(angle);
                if angle > std::f64::consts::FRAC_PI_2 + ANGLE_TOL {
                    angle_violations.push(AngleViolation { triangle: t, angle });
                    break;
                }
            }
        }

        let mut min_cot: Option<f64> = None;
        let mut max_patch: Option<f64> = None;
        let mut edge_violations = Vec::new();
        for patch in self.edges.iter().filter(|p| p.is_interior()) {
            let s = patch.opposite_cot_sum();
            min_cot = Some(min_cot.map_or(s, |m: f64| m.min(s)));
            if s <= COT_SUM_TOL {
                edge_violations.push(EdgeViolation {
                    i: patch.i,
                    j: patch.j,
                    cot_sum: s,
                });
            }
            for end in 0..2 {
                let p = patch.patch_cot_sum(end);
                max_patch = Some(max_patch.map_or(p, |m: f64| m.max(p)));
            }
        }

        let angles_ok = max_angle <= std::f64::consts::FRAC_PI_2 + ANGLE_TOL;
        let cots_ok = min_cot.is_none_or(|c| c > COT_SUM_TOL);
        MeshAdmissibility {
            max_interior_angle: max_angle,
            min_opposite_cot_sum: min_cot,
            max_patch_cot_sum: max_patch,
            max_degree: self.max_degree(),
            admissible: angles_ok && cots_ok,
            angle_violations,
            edge_violations,
        }
    }

    /// Graph distance of each interior vertex to the Dirichlet boundary.
    ///
    /// An interior vertex has distance 0 when it neighbors a boundary vertex;
    /// otherwise its distance is one more than the smallest distance among
    /// its interior neighbors (breadth-first search over the interior vertex
    /// graph). Returns one entry per vertex: `None` for boundary vertices.
    ///
    /// Fails when the mesh has no boundary vertex or when some interior
    /// vertex cannot reach the boundary layer.
    pub fn boundary_distance(&self) -> Result<Vec<Option<usize>>> {
        if !self.boundary.iter().any(|&b| b) {
            return Err(Error::NoBoundary);
        }
        let nv = self.n_vertices();
        let mut dist: Vec<Option<usize>> = vec![None; nv];
        let mut queue = VecDeque::new();
        for v in self.interior_vertices() {
            if self.neighbors[v].iter().any(|&w| self.boundary[w]) {
                dist[v] = Some(0);
                queue.push_back(v);
            }
        }
        while let Some(v) = queue.pop_front() {
            let d = dist[v].expect("queued vertices have a distance");
            for &w in &self.neighbors[v] {
                if !self.boundary[w] && dist[w].is_none() {
                    dist[w] = Some(d + 1);
                    queue.push_back(w);
                }
            }
        }
        for v in self.interior_vertices() {
            if dist[v].is_none() {
                return Err(Error::Topology(format!(
                    "interior vertex {v} is not connected to the Dirichlet boundary"
                )));
            }
        }
        Ok(dist)
    }
}
