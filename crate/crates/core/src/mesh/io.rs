//! Reading and writing meshes in the Triangle .node/.ele text format.
//!
//! A mesh is stored as a pair of files sharing a base name: `base.node`
//! holds the vertex coordinates (with optional attributes and boundary
//! markers), `base.ele` the triangle connectivity. Indices may be 0- or
//! 1-based; the base is detected from the labels themselves. Lines starting
//! with `#` and trailing `#` comments are ignored.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::geom::Point;
use crate::mesh::Mesh;

/// Loads a mesh from `base.node` / `base.ele`.
///
/// `path` may be the base name or either of the two file names. Boundary
/// vertices come from the marker column when the .node file declares one and
/// at least one marker is nonzero; otherwise they are inferred from edges
/// with a single adjacent triangle.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    let base = base_path(path.as_ref());
    let node_path = base.with_extension("node");
    let ele_path = base.with_extension("ele");

    let node_text = fs::read_to_string(&node_path).map_err(|e| {
        Error::Parse(format!("cannot read {}: {e}", node_path.display()))
    })?;
    let ele_text = fs::read_to_string(&ele_path).map_err(|e| {
        Error::Parse(format!("cannot read {}: {e}", ele_path.display()))
    })?;

    let (vertices, labels, markers) = parse_node(&node_text, &node_path)?;
    let triangles = parse_ele(&ele_text, &ele_path, &labels)?;

    match markers {
        Some(flags) => Mesh::with_boundary(vertices, triangles, flags),
        None => Mesh::new(vertices, triangles),
    }
}

/// Writes `base.node` and `base.ele` (1-based, with boundary markers).
pub fn save_mesh(mesh: &Mesh, base: impl AsRef<Path>) -> Result<()> {
    let base = base_path(base.as_ref());

    let mut node = String::new();
    writeln!(node, "{} 2 0 1", mesh.n_vertices()).unwrap();
    for (v, p) in mesh.vertices().iter().enumerate() {
        let marker = if mesh.is_boundary(v) { 1 } else { 0 };
        writeln!(node, "{} {} {} {}", v + 1, p[0], p[1], marker).unwrap();
    }
    fs::write(base.with_extension("node"), node)?;

    let mut ele = String::new();
    writeln!(ele, "{} 3 0", mesh.n_triangles()).unwrap();
    for (t, tri) in mesh.triangles().iter().enumerate() {
        writeln!(ele, "{} {} {} {}", t + 1, tri[0] + 1, tri[1] + 1, tri[2] + 1).unwrap();
    }
    fs::write(base.with_extension("ele"), ele)?;
    Ok(())
}

fn base_path(path: &Path) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some("node") | Some("ele") => path.with_extension(""),
        _ => path.to_path_buf(),
    }
}

/// Strips comments and splits a file into whitespace-tokenized data lines,
/// keeping 1-based line numbers for error messages.
fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(idx, line)| {
        let line = line.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            None
        } else {
            Some((idx + 1, tokens))
        }
    })
}

fn parse_count(tok: &str, what: &str, file: &Path, line: usize) -> Result<usize> {
    tok.parse().map_err(|_| {
        Error::Parse(format!(
            "{}:{line}: invalid {what} '{tok}'",
            file.display()
        ))
    })
}

fn parse_f64(tok: &str, what: &str, file: &Path, line: usize) -> Result<f64> {
    tok.parse().map_err(|_| {
        Error::Parse(format!(
            "{}:{line}: invalid {what} '{tok}'",
            file.display()
        ))
    })
}

type NodeData = (Vec<Point>, HashMap<usize, usize>, Option<Vec<bool>>);

/// Parses a .node file into coordinates, a label-to-index map, and boundary
/// flags when a marker column is present and used.
fn parse_node(text: &str, file: &Path) -> Result<NodeData> {
    let mut lines = data_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", file.display())))?;
    if header.len() < 2 {
        return Err(Error::Parse(format!(
            "{}:{hline}: node header needs at least '<count> <dim>'",
            file.display()
        )));
    }
    let count = parse_count(header[0], "vertex count", file, hline)?;
    let dim = parse_count(header[1], "dimension", file, hline)?;
    if dim != 2 {
        return Err(Error::Parse(format!(
            "{}:{hline}: only 2-dimensional meshes are supported, got dimension {dim}",
            file.display()
        )));
    }
    let n_attr = header
        .get(2)
        .map(|t| parse_count(t, "attribute count", file, hline))
        .transpose()?
        .unwrap_or(0);
    let n_marker = header
        .get(3)
        .map(|t| parse_count(t, "marker count", file, hline))
        .transpose()?
        .unwrap_or(0);

    let mut vertices = Vec::with_capacity(count);
    let mut labels = HashMap::with_capacity(count);
    let mut markers = Vec::with_capacity(count);
    for (line, tokens) in lines {
        if vertices.len() == count {
            return Err(Error::Parse(format!(
                "{}:{line}: more vertex lines than the declared count {count}",
                file.display()
            )));
        }
        let expected = 3 + n_attr + n_marker;
        if tokens.len() < expected {
            return Err(Error::Parse(format!(
                "{}:{line}: expected {expected} fields, got {}",
                file.display(),
                tokens.len()
            )));
        }
        let label = parse_count(tokens[0], "vertex label", file, line)?;
        let x = parse_f64(tokens[1], "x coordinate", file, line)?;
        let y = parse_f64(tokens[2], "y coordinate", file, line)?;
        if labels.insert(label, vertices.len()).is_some() {
            return Err(Error::Parse(format!(
                "{}:{line}: duplicate vertex label {label}",
                file.display()
            )));
        }
        vertices.push([x, y]);
        if n_marker > 0 {
            let m = parse_count(tokens[3 + n_attr], "boundary marker", file, line)?;
            markers.push(m != 0);
        }
    }
    if vertices.len() != count {
        return Err(Error::Parse(format!(
            "{}: declared {count} vertices but found {}",
            file.display(),
            vertices.len()
        )));
    }

    // An all-zero marker column carries no information; fall back to the
    // topological boundary in that case.
    let markers = (n_marker > 0 && markers.iter().any(|&m| m)).then_some(markers);
    Ok((vertices, labels, markers))
}

fn parse_ele(
    text: &str,
    file: &Path,
    labels: &HashMap<usize, usize>,
) -> Result<Vec<[usize; 3]>> {
    let mut lines = data_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", file.display())))?;
    let count = parse_count(header[0], "triangle count", file, hline)?;
    let nodes_per = header
        .get(1)
        .map(|t| parse_count(t, "nodes per triangle", file, hline))
        .transpose()?
        .unwrap_or(3);
    if nodes_per != 3 {
        return Err(Error::Parse(format!(
            "{}:{hline}: only 3-node (linear) triangles are supported, got {nodes_per}",
            file.display()
        )));
    }

    let mut triangles = Vec::with_capacity(count);
    for (line, tokens) in lines {
        if triangles.len() == count {
            return Err(Error::Parse(format!(
                "{}:{line}: more triangle lines than the declared count {count}",
                file.display()
            )));
        }
        if tokens.len() < 4 {
            return Err(Error::Parse(format!(
                "{}:{line}: expected '<label> <v1> <v2> <v3>', got {} fields",
                file.display(),
                tokens.len()
            )));
        }
        let mut tri = [0usize; 3];
        for k in 0..3 {
            let label = parse_count(tokens[1 + k], "vertex reference", file, line)?;
            tri[k] = *labels.get(&label).ok_or_else(|| {
                Error::Topology(format!(
                    "{}:{line}: triangle references vertex label {label}, \
                     which the .node file does not define",
                    file.display()
                ))
            })?;
        }
        triangles.push(tri);
    }
    if triangles.len() != count {
        return Err(Error::Parse(format!(
            "{}: declared {count} triangles but found {}",
            file.display(),
            triangles.len()
        )));
    }
    Ok(triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured, StructuredKind};

    fn write_pair(dir: &Path, node: &str, ele: &str) -> PathBuf {
        let base = dir.join("m");
        fs::write(base.with_extension("node"), node).unwrap();
        fs::write(base.with_extension("ele"), ele).unwrap();
        base
    }

    #[test]
    fn parses_single_triangle_one_based() {
        let dir = tempfile::tempdir().unwrap();
        let base = write_pair(
            dir.path(),
            "# a comment\n3 2 0 1\n1 0.0 0.0 1\n2 1.0 0.0 1\n3 0.0 1.0 1\n",
            "1 3 0\n1 1 2 3\n",
        );
        let m = load_mesh(&base).unwrap();
        assert_eq!(m.n_vertices(), 3);
        assert_eq!(m.n_triangles(), 1);
        assert_eq!(m.n_boundary(), 3);
    }

    #[test]
    fn parses_zero_based_without_markers() {
        let dir = tempfile::tempdir().unwrap();
        let base = write_pair(
            dir.path(),
            "3 2\n0 0.0 0.0\n1 1.0 0.0\n2 0.0 1.0\n",
            "1 3 0\n0 0 1 2\n",
        );
        let m = load_mesh(base.with_extension("node")).unwrap();
        assert_eq!(m.n_vertices(), 3);
        assert_eq!(m.n_boundary(), 3);
    }

    #[test]
    fn rejects_unknown_vertex_reference() {
        let dir = tempfile::tempdir().unwrap();
        let base = write_pair(
            dir.path(),
            "3 2 0 0\n1 0.0 0.0\n2 1.0 0.0\n3 0.0 1.0\n",
            "1 3 0\n1 1 2 9\n",
        );
        let err = load_mesh(&base).unwrap_err();
        assert!(matches!(err, Error::Topology(_)), "{err}");
    }

    #[test]
    fn rejects_malformed_coordinate() {
        let dir = tempfile::tempdir().unwrap();
        let base = write_pair(
            dir.path(),
            "3 2 0 0\n1 0.0 zero\n2 1.0 0.0\n3 0.0 1.0\n",
            "1 3 0\n1 1 2 3\n",
        );
        let err = load_mesh(&base).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn missing_file_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = load_mesh(dir.path().join("absent")).unwrap_err();
        assert!(matches!(err, Error::Parse(_)), "{err}");
    }

    #[test]
    fn round_trip_preserves_mesh() {
        let dir = tempfile::tempdir().unwrap();
        let m = generate_structured(StructuredKind::ThreeDirection, 2).unwrap();
        let base = dir.path().join("rt");
        save_mesh(&m, &base).unwrap();
        let m2 = load_mesh(&base).unwrap();
        assert_eq!(m2.n_vertices(), 9);
        assert_eq!(m2.n_triangles(), 8);
        assert_eq!(m2.n_boundary(), 8);
        for v in 0..m.n_vertices() {
            assert_eq!(m.vertex(v), m2.vertex(v), "vertex {v} changed");
            assert_eq!(m.is_boundary(v), m2.is_boundary(v));
        }
        assert_eq!(m.triangles(), m2.triangles());
    }

    #[test]
    fn honors_explicit_markers() {
        // Mark one extra vertex (an interior one) as Dirichlet.
        let dir = tempfile::tempdir().unwrap();
        let m = generate_structured(StructuredKind::ThreeDirection, 2).unwrap();
        let interior = m.interior_vertices().next().unwrap();
        let mut node = String::new();
        writeln!(node, "{} 2 0 1", m.n_vertices()).unwrap();
        for (v, p) in m.vertices().iter().enumerate() {
            let marker = if m.is_boundary(v) || v == interior { 1 } else { 0 };
            writeln!(node, "{} {} {} {}", v + 1, p[0], p[1], marker).unwrap();
        }
        let mut ele = String::new();
        writeln!(ele, "{} 3 0", m.n_triangles()).unwrap();
        for (t, tri) in m.triangles().iter().enumerate() {
            writeln!(ele, "{} {} {} {}", t + 1, tri[0] + 1, tri[1] + 1, tri[2] + 1).unwrap();
        }
        let base = write_pair(dir.path(), &node, &ele);
        let m2 = load_mesh(&base).unwrap();
        assert_eq!(m2.n_interior(), 0);
    }

}
