//! Legacy ASCII VTK output of polygonal meshes.

use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;

use super::write_atomic;
use crate::error::{Error, Result};
use crate::mesh::PolygonalMesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Location {
    Vertex,
    Element,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FieldValues {
    Real(Vec<f64>),
    /// Written as `<name>_re`, `<name>_im` and `<name>_abs`.
    Complex(Vec<Complex64>),
}

impl FieldValues {
    fn len(&self) -> usize {
        match self {
            Self::Real(v) => v.len(),
            Self::Complex(v) => v.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VtkField {
    pub name: String,
    pub location: Location,
    pub values: FieldValues,
}

impl VtkField {
    pub fn vertex(name: impl Into<String>, values: FieldValues) -> Self {
        Self { name: name.into(), location: Location::Vertex, values }
    }

    pub fn element(name: impl Into<String>, values: FieldValues) -> Self {
        Self { name: name.into(), location: Location::Element, values }
    }
}

fn check(mesh: &PolygonalMesh, fields: &[VtkField]) -> Result<()> {
    for f in fields {
        let expected = match f.location {
            Location::Vertex => mesh.num_vertices(),
            Location::Element => mesh.num_elements(),
        };
        if f.values.len() != expected {
            return Err(Error::InvalidArgument(format!(
                "field {} has {} values, expected {expected}",
                f.name,
                f.values.len()
            )));
        }
        if f.name.is_empty() || f.name.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!("field name {:?} must be non-empty without spaces", f.name)));
        }
    }
    Ok(())
}

fn scalars<W: Write>(w: &mut W, name: &str, values: impl Iterator<Item = f64>) -> io::Result<()> {
    writeln!(w, "SCALARS {name} double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for v in values {
        writeln!(w, "{v:e}")?;
    }
    Ok(())
}

fn data_section<W: Write>(w: &mut W, header: &str, count: usize, fields: &[&VtkField]) -> io::Result<()> {
    if fields.is_empty() {
        return Ok(());
    }
    writeln!(w, "{header} {count}")?;
    for f in fields {
        match &f.values {
            FieldValues::Real(v) => scalars(w, &f.name, v.iter().copied())?,
            FieldValues::Complex(v) => {
                scalars(w, &format!("{}_re", f.name), v.iter().map(|z| z.re))?;
                scalars(w, &format!("{}_im", f.name), v.iter().map(|z| z.im))?;
                scalars(w, &format!("{}_abs", f.name), v.iter().map(|z| z.norm()))?;
            }
        }
    }
    Ok(())
}

/// Writes the mesh as POLYDATA polygons with the given scalar fields.
pub fn write_vtk<W: Write>(mut w: W, mesh: &PolygonalMesh, fields: &[VtkField]) -> Result<()> {
    check(mesh, fields)?;
    let io = |source| Error::Io { path: "<stream>".into(), source };
    write_body(&mut w, mesh, fields).map_err(io)
}

fn write_body<W: Write>(w: &mut W, mesh: &PolygonalMesh, fields: &[VtkField]) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "vemspectra polygonal mesh, generation {}", mesh.generation())?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET POLYDATA")?;
    writeln!(w, "POINTS {} double", mesh.num_vertices())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    let size: usize = mesh.elements().iter().map(|c| c.len() + 1).sum();
    writeln!(w, "POLYGONS {} {size}", mesh.num_elements())?;
    for cycle in mesh.elements() {
        let ids: Vec<String> = cycle.iter().map(usize::to_string).collect();
        writeln!(w, "{} {}", cycle.len(), ids.join(" "))?;
    }
    let vertex: Vec<&VtkField> = fields.iter().filter(|f| f.location == Location::Vertex).collect();
    let element: Vec<&VtkField> = fields.iter().filter(|f| f.location == Location::Element).collect();
    data_section(w, "CELL_DATA", mesh.num_elements(), &element)?;
    data_section(w, "POINT_DATA", mesh.num_vertices(), &vertex)
}

pub fn export_vtk(path: &Path, mesh: &PolygonalMesh, fields: &[VtkField]) -> Result<()> {
    check(mesh, fields)?;
    write_atomic(path, |w| write_body(w, mesh, fields))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, DomainSpec, MeshFamily};

    fn square() -> PolygonalMesh {
        build_mesh(&DomainSpec::UnitSquare, MeshFamily::Quad, 2).unwrap()
    }

    fn render(mesh: &PolygonalMesh, fields: &[VtkField]) -> String {
        let mut buf = Vec::new();
        write_vtk(&mut buf, mesh, fields).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn geometry_only() {
        let text = render(&square(), &[]);
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains("POINTS 9 double"));
        assert!(text.contains("POLYGONS 4 20"));
        assert!(!text.contains("POINT_DATA"));
        assert!(!text.contains("CELL_DATA"));
    }

    #[test]
    fn complex_field_gives_three_arrays() {
        let m = square();
        let z: Vec<Complex64> = (0..9).map(|i| Complex64::new(3.0 * i as f64, 4.0 * i as f64)).collect();
        let text = render(&m, &[VtkField::vertex("u", FieldValues::Complex(z))]);
        for name in ["u_re", "u_im", "u_abs"] {
            assert!(text.contains(&format!("SCALARS {name} double 1")), "{name}");
        }
        let abs = text.split("SCALARS u_abs double 1\nLOOKUP_TABLE default\n").nth(1).unwrap();
        let values: Vec<f64> = abs.lines().take(9).map(|l| l.parse().unwrap()).collect();
        assert_eq!(values[2], 10.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        let m = square();
        let f = VtkField::vertex("u", FieldValues::Real(vec![0.0; 8]));
        assert!(write_vtk(Vec::new(), &m, &[f.clone()]).is_err());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.vtk");
        assert!(export_vtk(&path, &m, &[f]).is_err());
        assert!(!path.exists());
        let cells = VtkField::element("eta", FieldValues::Real(vec![1.0; 4]));
        assert!(render(&m, &[cells]).contains("CELL_DATA 4"));
    }
}
