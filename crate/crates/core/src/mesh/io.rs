//! Plain-text `.poly` mesh format:
//!
//! ```text
//! #poly-mesh 1
//! V E
//! x y            (V lines)
//! n i1 ... in    (E lines, 0-based vertex indices)
//! ```
//!
//! Blank lines and lines starting with `%` are ignored after the header.
//! Clockwise cycles are reversed on load.

use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use super::PolygonalMesh;
use crate::cli_io::write_atomic;
use crate::error::{Error, Result};
use crate::geometry;

const HEADER: &str = "#poly-mesh 1";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse { line, message: message.into() }
}

pub fn load_mesh<R: BufRead>(reader: R) -> Result<PolygonalMesh> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut next = |what: &str| -> Result<(usize, String)> {
        for (no, line) in lines.by_ref() {
            let line = line.map_err(|e| parse_err(no, e.to_string()))?;
            let t = line.trim();
            if no > 1 && (t.is_empty() || t.starts_with('%')) {
                continue;
            }
            return Ok((no, t.to_string()));
        }
        Err(parse_err(0, format!("unexpected end of file, expected {what}")))
    };

    let (no, header) = next("header")?;
    if header != HEADER {
        return Err(parse_err(no, format!("expected header '{HEADER}', found '{header}'")));
    }
    let (no, counts) = next("vertex and element counts")?;
    let counts: Vec<usize> = counts
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(no, format!("invalid count '{t}'"))))
        .collect::<Result<_>>()?;
    let [nv, ne] = counts[..] else {
        return Err(parse_err(no, "expected two counts 'V E'"));
    };

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (no, line) = next("vertex coordinates")?;
        let xy: Vec<f64> = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(no, format!("invalid coordinate '{t}'"))))
            .collect::<Result<_>>()?;
        match xy[..] {
            [x, y] if x.is_finite() && y.is_finite() => vertices.push([x, y]),
            [_, _] => return Err(parse_err(no, "non-finite coordinate")),
            _ => return Err(parse_err(no, format!("expected 2 coordinates, found {}", xy.len()))),
        }
    }

    let mut elements = Vec::with_capacity(ne);
    for e in 0..ne {
        let (no, line) = next("element")?;
        let ids: Vec<usize> = line
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(no, format!("invalid vertex index '{t}'"))))
            .collect::<Result<_>>()?;
        let Some((&n, cycle)) = ids.split_first() else {
            return Err(parse_err(no, "empty element line"));
        };
        if cycle.len() != n {
            return Err(parse_err(no, format!("element {e} declares {n} vertices but lists {}", cycle.len())));
        }
        if let Some(&bad) = cycle.iter().find(|&&v| v >= nv) {
            return Err(parse_err(no, format!("element {e}: vertex index {bad} out of range (V = {nv})")));
        }
        for (k, v) in cycle.iter().enumerate() {
            if cycle[..k].contains(v) {
                return Err(parse_err(no, format!("element {e}: vertex {v} repeated")));
            }
        }
        let mut cycle = cycle.to_vec();
        let pts: Vec<_> = cycle.iter().map(|&v| vertices[v]).collect();
        if geometry::signed_area(&pts) < 0.0 {
            cycle.reverse();
        }
        elements.push(cycle);
    }
    PolygonalMesh::new(vertices, elements)
}

pub fn write_mesh<W: Write>(mesh: &PolygonalMesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{HEADER}")?;
    writeln!(w, "{} {}", mesh.num_vertices(), mesh.num_elements())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {}", p[0], p[1])?;
    }
    for cycle in mesh.elements() {
        write!(w, "{}", cycle.len())?;
        for v in cycle {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_mesh_file(path: &Path) -> Result<PolygonalMesh> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
    load_mesh(BufReader::new(file))
}

pub fn write_mesh_file(path: &Path, mesh: &PolygonalMesh) -> Result<()> {
    write_atomic(path, |w| write_mesh(mesh, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, DomainSpec, MeshFamily};

    #[test]
    fn loads_unit_square() {
        let text = "#poly-mesh 1\n4 1\n0 0\n1 0\n1 1\n0 1\n4 0 1 2 3\n";
        let m = load_mesh(text.as_bytes()).unwrap();
        assert_eq!(m.num_elements(), 1);
        assert!((m.total_area() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_is_reversed() {
        let text = "#poly-mesh 1\n4 1\n0 0\n1 0\n1 1\n0 1\n4 3 2 1 0\n";
        let m = load_mesh(text.as_bytes()).unwrap();
        assert!((m.total_area() - 1.0).abs() < 1e-15);
        assert!(m.element_geometry(0).unwrap().area > 0.0);
    }

    #[test]
    fn duplicate_vertex_names_element() {
        let text = "#poly-mesh 1\n4 2\n0 0\n1 0\n1 1\n0 1\n3 0 1 2\n4 0 2 2 3\n";
        match load_mesh(text.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 8);
                assert!(message.contains("element 1"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn reports_line_numbers() {
        let text = "#poly-mesh 1\n3 1\n0 0\n1 x\n0 1\n3 0 1 2\n";
        assert!(matches!(load_mesh(text.as_bytes()), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(load_mesh("mesh\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
        let short = "#poly-mesh 1\n3 1\n0 0\n1 0\n0 1\n3 0 1\n";
        assert!(matches!(load_mesh(short.as_bytes()), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn round_trip_is_exact() {
        let m = build_mesh(&DomainSpec::HShape, MeshFamily::Voro, 4).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = load_mesh(&buf[..]).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.elements(), m.elements());
    }
}
