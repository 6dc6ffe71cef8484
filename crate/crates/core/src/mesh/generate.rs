//! Structured mesh families on simple reference domains.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::Mesh;

/// Built-in structured mesh families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructuredKind {
    /// Congruent equilateral triangles tiling a unit-side rhombus: every
    /// interior angle is pi/3, so the mesh satisfies the admissibility
    /// conditions with room to spare.
    ThreeDirection,
    /// Unit square cut into n x n squares, each split by the same diagonal
    /// direction into two right isosceles triangles. The two right angles
    /// opposite each diagonal sum to pi, so the mesh is inadmissible — it is
    /// the canonical counterexample for the sign conditions.
    RightUniform,
}

impl fmt::Display for StructuredKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StructuredKind::ThreeDirection => "three_direction",
            StructuredKind::RightUniform => "right_uniform",
        })
    }
}

impl FromStr for StructuredKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "three_direction" => Ok(StructuredKind::ThreeDirection),
            "right_uniform" => Ok(StructuredKind::RightUniform),
            other => Err(Error::InvalidArgument(format!(
                "unknown mesh family '{other}' (expected three_direction or right_uniform)"
            ))),
        }
    }
}

/// Generates an n x n structured mesh of the given family.
///
/// Both families use an (n+1) x (n+1) vertex lattice and 2n^2 triangles.
pub fn generate_structured(kind: StructuredKind, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidArgument(
            "structured mesh subdivision must be at least 1".into(),
        ));
    }
    let h = 1.0 / n as f64;
    let vid = |i: usize, j: usize| j * (n + 1) + i;

    let mut vertices: Vec<Point> = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            let (x, y) = match kind {
                // Lattice spanned by (1, 0) and (1/2, sqrt(3)/2): unit rhombus.
                StructuredKind::ThreeDirection => (
                    (i as f64 + 0.5 * j as f64) * h,
                    (3f64.sqrt() / 2.0) * j as f64 * h,
                ),
                StructuredKind::RightUniform => (i as f64 * h, j as f64 * h),
            };
            vertices.push([x, y]);
        }
    }

    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            // Every cell is split along the same (anti-)diagonal, from
            // (i+1, j) to (i, j+1); for the three-direction lattice this
            // produces two equilateral triangles.
            triangles.push([vid(i, j), vid(i + 1, j), vid(i, j + 1)]);
            triangles.push([vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)]);
        }
    }

    Mesh::new(vertices, triangles)
}
