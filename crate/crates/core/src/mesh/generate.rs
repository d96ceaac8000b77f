use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use super::domain::DomainSpec;
use super::voronoi;
use super::PolygonalMesh;
use crate::error::{Error, Result};
use crate::geometry::Point;

pub const DEFAULT_VORONOI_SEED: u64 = 0x5eed_2024;

/// Vertical offset of the zig-zag rows in hexagonal meshes, in lattice spacings.
const HEXA_OFFSET: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MeshFamily {
    Tria,
    Quad,
    Hexa,
    Voro,
    File,
}

impl FromStr for MeshFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tria" | "tri" | "triangles" => Ok(Self::Tria),
            "quad" | "quads" | "square" | "squares" => Ok(Self::Quad),
            "hexa" | "hex" | "hexagons" => Ok(Self::Hexa),
            "voro" | "voronoi" => Ok(Self::Voro),
            "file" => Ok(Self::File),
            other => Err(Error::InvalidArgument(format!(
                "unknown mesh family '{other}' (expected tria, quad, hexa or voro)"
            ))),
        }
    }
}

impl fmt::Display for MeshFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Tria => "tria",
            Self::Quad => "quad",
            Self::Hexa => "hexa",
            Self::Voro => "voro",
            Self::File => "file",
        })
    }
}

/// Builds a mesh of `domain` with the default Voronoi seed.
///
/// `resolution` is the number of lattice cells per unit length (rounded up to
/// a multiple of 8 on the H-shape so its corners are lattice points); for
/// Voronoi meshes it sets the seed density to `resolution²` per unit area.
pub fn build_mesh(domain: &DomainSpec, family: MeshFamily, resolution: usize) -> Result<PolygonalMesh> {
    build_mesh_seeded(domain, family, resolution, DEFAULT_VORONOI_SEED)
}

pub fn build_mesh_seeded(
    domain: &DomainSpec,
    family: MeshFamily,
    resolution: usize,
    seed: u64,
) -> Result<PolygonalMesh> {
    if resolution == 0 {
        return Err(Error::InvalidArgument("resolution must be at least 1".into()));
    }
    if matches!(domain, DomainSpec::FromFile(_)) || family == MeshFamily::File {
        return Err(Error::Unsupported(format!(
            "{family} meshes of {domain} are read with load_mesh, not generated"
        )));
    }
    let mesh = match family {
        MeshFamily::Quad => Lattice::new(domain, resolution).quad_mesh()?,
        MeshFamily::Tria => Lattice::new(domain, resolution).tria_mesh()?,
        MeshFamily::Hexa => Lattice::new(domain, resolution).hexa_mesh()?,
        MeshFamily::Voro => voronoi::voronoi_mesh(domain, resolution, seed)?,
        MeshFamily::File => unreachable!(),
    };
    let expected = domain.area().expect("generated domains have an area");
    let area = mesh.total_area();
    if ((area - expected) / expected).abs() > 1e-12 {
        return Err(Error::NonConforming(format!(
            "generated {family} mesh covers area {area}, domain area is {expected}"
        )));
    }
    Ok(mesh)
}

/// Structured grid of square cells aligned with the domain corners.
struct Lattice {
    origin: Point<f64>,
    spacing: f64,
    nx: usize,
    ny: usize,
    inside: Vec<bool>,
}

impl Lattice {
    fn new(domain: &DomainSpec, resolution: usize) -> Self {
        let unit = domain.lattice_unit();
        let k = (resolution as f64 * unit).ceil().max(1.0);
        let spacing = unit / k;
        let rects = domain.rectangles().expect("lattice domains are rectangle unions");
        let x0 = rects.iter().map(|r| r[0]).fold(f64::INFINITY, f64::min);
        let x1 = rects.iter().map(|r| r[1]).fold(f64::NEG_INFINITY, f64::max);
        let y0 = rects.iter().map(|r| r[2]).fold(f64::INFINITY, f64::min);
        let y1 = rects.iter().map(|r| r[3]).fold(f64::NEG_INFINITY, f64::max);
        let nx = ((x1 - x0) / spacing).round() as usize;
        let ny = ((y1 - y0) / spacing).round() as usize;
        let mut inside = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let c = [x0 + (i as f64 + 0.5) * spacing, y0 + (j as f64 + 0.5) * spacing];
                inside[j * nx + i] = domain.contains(c, 0.0);
            }
        }
        Self { origin: [x0, y0], spacing, nx, ny, inside }
    }

    fn cell_inside(&self, i: i64, j: i64) -> bool {
        i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny && self.inside[j as usize * self.nx + i as usize]
    }

    fn point(&self, i: i64, j: i64) -> Point<f64> {
        // Integer multiples keep lattice points (and domain corners) exact.
        [self.origin[0] + i as f64 * self.spacing, self.origin[1] + j as f64 * self.spacing]
    }

    fn on_boundary(&self, i: i64, j: i64) -> bool {
        let around = [(i - 1, j - 1), (i, j - 1), (i - 1, j), (i, j)];
        around.iter().any(|&(a, b)| !self.cell_inside(a, b))
    }

    /// Element cycles over lattice points; vertex ids assigned in order of first use.
    fn finish(&self, cycles: Vec<Vec<(i64, i64)>>, shift: impl Fn(i64, i64) -> Point<f64>) -> Result<PolygonalMesh> {
        let mut ids: HashMap<(i64, i64), usize> = HashMap::new();
        let mut vertices = Vec::new();
        let elements = cycles
            .into_iter()
            .map(|cycle| {
                cycle
                    .into_iter()
                    .map(|key| {
                        *ids.entry(key).or_insert_with(|| {
                            let p = self.point(key.0, key.1);
                            let d = shift(key.0, key.1);
                            vertices.push([p[0] + d[0], p[1] + d[1]]);
                            vertices.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        PolygonalMesh::new(vertices, elements)
    }

    fn cells(&self) -> impl Iterator<Item = (i64, i64)> + '_ {
        (0..self.ny as i64).flat_map(move |j| (0..self.nx as i64).map(move |i| (i, j))).filter(|&(i, j)| self.cell_inside(i, j))
    }

    fn quad_mesh(&self) -> Result<PolygonalMesh> {
        let cycles = self.cells().map(|(i, j)| vec![(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]).collect();
        self.finish(cycles, |_, _| [0.0, 0.0])
    }

    fn tria_mesh(&self) -> Result<PolygonalMesh> {
        let mut cycles = Vec::new();
        for (i, j) in self.cells() {
            cycles.push(vec![(i, j), (i + 1, j), (i + 1, j + 1)]);
            cycles.push(vec![(i, j), (i + 1, j + 1), (i, j + 1)]);
        }
        self.finish(cycles, |_, _| [0.0, 0.0])
    }

    /// Staggered bricks of two cells (one cell next to the boundary) whose
    /// shared horizontal lines are bent into zig-zags, giving convex hexagons.
    fn hexa_mesh(&self) -> Result<PolygonalMesh> {
        let mut bricks: Vec<(i64, i64, i64)> = Vec::new();
        for j in 0..self.ny as i64 {
            let mut i = 0i64;
            while i < self.nx as i64 {
                if !self.cell_inside(i, j) {
                    i += 1;
                    continue;
                }
                let starts_brick = (i - j).rem_euclid(2) == 0;
                if starts_brick && self.cell_inside(i + 1, j) {
                    bricks.push((i, i + 2, j));
                    i += 2;
                } else {
                    bricks.push((i, i + 1, j));
                    i += 1;
                }
            }
        }

        let mut corners: HashMap<(i64, i64), ()> = HashMap::new();
        for &(i0, i1, j) in &bricks {
            for key in [(i0, j), (i1, j), (i1, j + 1), (i0, j + 1)] {
                corners.insert(key, ());
            }
        }
        let cycles = bricks
            .iter()
            .map(|&(i0, i1, j)| {
                let mut c = Vec::new();
                c.extend((i0..i1).map(|i| (i, j)).filter(|k| corners.contains_key(k)));
                c.push((i1, j));
                c.extend((i0 + 1..=i1).rev().map(|i| (i, j + 1)).filter(|k| corners.contains_key(k)));
                c.push((i0, j + 1));
                c
            })
            .collect();
        let dy = HEXA_OFFSET * self.spacing;
        self.finish(cycles, |i, j| {
            if self.on_boundary(i, j) {
                [0.0, 0.0]
            } else if (i - j).rem_euclid(2) == 0 {
                [0.0, dy]
            } else {
                [0.0, -dy]
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_square_quad_2() {
        let m = build_mesh(&DomainSpec::UnitSquare, MeshFamily::Quad, 2).unwrap();
        assert_eq!(m.num_elements(), 4);
        assert_eq!(m.num_vertices(), 9);
        assert!((m.total_area() - 1.0).abs() < 1e-14);
        assert_eq!(m.num_interior_vertices(), 1);
    }

    #[test]
    fn l_shape_quad_2() {
        let m = build_mesh(&DomainSpec::LShape, MeshFamily::Quad, 2).unwrap();
        assert_eq!(m.num_elements(), 12);
        assert!((m.total_area() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn unit_square_tria_1() {
        let m = build_mesh(&DomainSpec::UnitSquare, MeshFamily::Tria, 1).unwrap();
        assert_eq!(m.num_elements(), 2);
        for e in 0..2 {
            assert!((m.element_geometry(e).unwrap().area - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn hexa_meshes_are_valid_and_mostly_hexagons() {
        for (d, r) in [(DomainSpec::UnitSquare, 6), (DomainSpec::LShape, 5), (DomainSpec::HShape, 8)] {
            let m = build_mesh(&d, MeshFamily::Hexa, r).unwrap();
            let hexes = m.elements().iter().filter(|c| c.len() == 6).count();
            assert!(hexes * 3 > m.num_elements(), "{d}: {hexes} of {}", m.num_elements());
            for e in 0..m.num_elements() {
                let pts = m.element_points(e);
                let n = pts.len();
                for k in 0..n {
                    let turn = crate::geometry::orient(pts[k], pts[(k + 1) % n], pts[(k + 2) % n]);
                    assert!(turn >= -1e-14, "{d}: element {e} not convex");
                }
            }
        }
    }

    #[test]
    fn h_shape_corners_are_vertices() {
        let m = build_mesh(&DomainSpec::HShape, MeshFamily::Quad, 8).unwrap();
        for c in DomainSpec::HShape.reentrant_corners() {
            assert!(m.vertices().iter().any(|v| v == &c));
        }
        assert_eq!(m.num_elements(), 12 * 24 - 4 * 10 - 4 * 9);
    }

    #[test]
    fn from_file_is_rejected() {
        assert!(matches!(
            build_mesh(&DomainSpec::FromFile("x.poly".into()), MeshFamily::Quad, 2),
            Err(Error::Unsupported(_))
        ));
        assert!(build_mesh(&DomainSpec::UnitSquare, MeshFamily::File, 2).is_err());
        assert!(build_mesh(&DomainSpec::UnitSquare, MeshFamily::Quad, 0).is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        for f in [MeshFamily::Tria, MeshFamily::Quad, MeshFamily::Hexa, MeshFamily::Voro] {
            let a = build_mesh(&DomainSpec::LShape, f, 4).unwrap();
            let b = build_mesh(&DomainSpec::LShape, f, 4).unwrap();
            assert_eq!(a, b, "{f}");
        }
    }
}
