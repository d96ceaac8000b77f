//! Conforming polygonal meshes: representation, generators for the model
//! domains, barycentric refinement and the `.poly` text format.

mod domain;
mod generate;
mod io;
mod refine;
mod voronoi;

use std::collections::HashMap;

pub use domain::DomainSpec;
pub use generate::{build_mesh, build_mesh_seeded, MeshFamily, DEFAULT_VORONOI_SEED};
pub use io::{load_mesh, read_mesh_file, write_mesh, write_mesh_file};
pub use refine::{refine, uniform_refine};

use crate::error::{Error, PolygonError, Result};
use crate::geometry::{self, ElementGeometry, Point};

/// Mesh edge `vertices[0] → vertices[1]`, traversed in that direction by the
/// counter-clockwise cycle of `left`; `right` (if any) traverses it backwards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeshEdge {
    pub vertices: [usize; 2],
    pub left: usize,
    pub right: Option<usize>,
}

impl MeshEdge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }
}

/// Polygonal mesh with counter-clockwise element cycles.
///
/// Immutable after construction; refinement produces a new mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonalMesh {
    vertices: Vec<Point<f64>>,
    elements: Vec<Vec<usize>>,
    edges: Vec<MeshEdge>,
    element_edges: Vec<Vec<usize>>,
    boundary_vertex: Vec<bool>,
    generation: usize,
}

impl PolygonalMesh {
    /// Validates the cycles and builds edge adjacency and boundary flags.
    pub fn new(vertices: Vec<Point<f64>>, elements: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_generation(vertices, elements, 0)
    }

    pub fn with_generation(vertices: Vec<Point<f64>>, elements: Vec<Vec<usize>>, generation: usize) -> Result<Self> {
        let nv = vertices.len();
        for (e, cycle) in elements.iter().enumerate() {
            if cycle.len() < 3 {
                return Err(Error::InvalidElement { element: e, source: PolygonError::TooFewVertices(cycle.len()) });
            }
            let mut seen = HashMap::with_capacity(cycle.len());
            for &v in cycle {
                if v >= nv {
                    return Err(Error::VertexOutOfRange { element: e, index: v, count: nv });
                }
                if seen.insert(v, ()).is_some() {
                    return Err(Error::InvalidElement { element: e, source: PolygonError::DuplicateVertex(v) });
                }
            }
            let pts: Vec<_> = cycle.iter().map(|&v| vertices[v]).collect();
            ElementGeometry::new(&pts).map_err(|source| Error::InvalidElement { element: e, source })?;
        }

        let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges: Vec<MeshEdge> = Vec::new();
        let mut element_edges = Vec::with_capacity(elements.len());
        for (e, cycle) in elements.iter().enumerate() {
            let mut local = Vec::with_capacity(cycle.len());
            for k in 0..cycle.len() {
                let (a, b) = (cycle[k], cycle[(k + 1) % cycle.len()]);
                if directed.contains_key(&(a, b)) {
                    return Err(Error::NonConforming(format!(
                        "edge ({a}, {b}) traversed in the same direction by two elements (element {e})"
                    )));
                }
                if let Some(&id) = directed.get(&(b, a)) {
                    let edge: &mut MeshEdge = &mut edges[id];
                    if edge.right.is_some() {
                        return Err(Error::NonConforming(format!("edge ({a}, {b}) shared by more than two elements")));
                    }
                    edge.right = Some(e);
                    directed.insert((a, b), id);
                    local.push(id);
                } else {
                    let id = edges.len();
                    edges.push(MeshEdge { vertices: [a, b], left: e, right: None });
                    directed.insert((a, b), id);
                    local.push(id);
                }
            }
            element_edges.push(local);
        }

        let mut boundary_vertex = vec![false; nv];
        for edge in edges.iter().filter(|e| e.is_boundary()) {
            boundary_vertex[edge.vertices[0]] = true;
            boundary_vertex[edge.vertices[1]] = true;
        }

        let mesh = Self { vertices, elements, edges, element_edges, boundary_vertex, generation };
        mesh.check_no_hanging_vertices()?;
        Ok(mesh)
    }

    /// Rejects vertices lying strictly inside a boundary edge: such T-junctions
    /// mean two elements meet along a segment without sharing it.
    fn check_no_hanging_vertices(&self) -> Result<()> {
        let bverts: Vec<usize> = (0..self.vertices.len()).filter(|&v| self.boundary_vertex[v]).collect();
        if bverts.is_empty() {
            return Ok(());
        }
        let (lo, hi) = self.bounding_box();
        let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
        let cells = (bverts.len() as f64).sqrt().ceil().max(1.0) as usize;
        let cell = extent / cells as f64;
        let key = |p: Point<f64>| (((p[0] - lo[0]) / cell).floor() as i64, ((p[1] - lo[1]) / cell).floor() as i64);
        let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for &v in &bverts {
            grid.entry(key(self.vertices[v])).or_default().push(v);
        }
        for edge in self.edges.iter().filter(|e| e.is_boundary()) {
            let [a, b] = edge.vertices;
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let len2 = geometry::dist2(pa, pb);
            let tol = 1e-10 * len2.sqrt();
            let (k0, k1) = (key(pa), key(pb));
            for i in k0.0.min(k1.0) - 1..=k0.0.max(k1.0) + 1 {
                for j in k0.1.min(k1.1) - 1..=k0.1.max(k1.1) + 1 {
                    let Some(list) = grid.get(&(i, j)) else { continue };
                    for &v in list {
                        if v == a || v == b {
                            continue;
                        }
                        let p = self.vertices[v];
                        let t = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / len2;
                        if t <= 0.0 || t >= 1.0 {
                            continue;
                        }
                        if geometry::orient(pa, pb, p).abs() / len2.sqrt() <= tol {
                            return Err(Error::NonConforming(format!(
                                "vertex {v} lies inside boundary edge ({a}, {b}) of element {}",
                                edge.left
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vertices(&self) -> &[Point<f64>] {
        &self.vertices
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn edges(&self) -> &[MeshEdge] {
        &self.edges
    }

    /// Mesh-edge ids of element `e`; entry `k` is the edge from cycle vertex `k` to `k + 1`.
    pub fn element_edges(&self, e: usize) -> &[usize] {
        &self.element_edges[e]
    }

    pub fn boundary_vertex_flags(&self) -> &[bool] {
        &self.boundary_vertex
    }

    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn num_interior_vertices(&self) -> usize {
        self.boundary_vertex.iter().filter(|&&b| !b).count()
    }

    pub fn element_points(&self, e: usize) -> Vec<Point<f64>> {
        self.elements[e].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn element_geometry(&self, e: usize) -> Result<ElementGeometry<f64>> {
        ElementGeometry::new(&self.element_points(e)).map_err(|source| Error::InvalidElement { element: e, source })
    }

    pub fn geometries(&self) -> Result<Vec<ElementGeometry<f64>>> {
        (0..self.num_elements()).map(|e| self.element_geometry(e)).collect()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.num_elements()).map(|e| geometry::signed_area(&self.element_points(e))).sum()
    }

    pub fn bounding_box(&self) -> (Point<f64>, Point<f64>) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for k in 0..2 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }

    /// Smallest `min-edge / h_E` over all elements; reported, never enforced.
    pub fn min_edge_ratio(&self) -> f64 {
        (0..self.num_elements())
            .filter_map(|e| self.element_geometry(e).ok())
            .map(|g| g.min_edge_ratio())
            .fold(f64::INFINITY, f64::min)
    }

    /// Maximum element diameter.
    pub fn max_diameter(&self) -> f64 {
        (0..self.num_elements())
            .map(|e| geometry::diameter(&self.element_points(e)))
            .fold(0.0, f64::max)
    }
}
