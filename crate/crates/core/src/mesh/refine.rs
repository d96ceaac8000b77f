use std::collections::HashMap;

use super::PolygonalMesh;
use crate::error::{Error, Result};
use crate::geometry::{self, Point};

const COLLINEAR_TOL: f64 = 1e-9;
const MIDPOINT_TOL: f64 = 1e-10;

/// Cycle positions of the geometric corners of an element: vertices where the
/// boundary actually turns. Vertices hanging on a straight side are skipped.
fn corner_positions(pts: &[Point<f64>]) -> Vec<usize> {
    let n = pts.len();
    (0..n)
        .filter(|&k| {
            let (p, v, q) = (pts[(k + n - 1) % n], pts[k], pts[(k + 1) % n]);
            let scale = geometry::dist2(p, v).sqrt() * geometry::dist2(v, q).sqrt();
            geometry::orient(p, v, q).abs() > COLLINEAR_TOL * scale
        })
        .collect()
}

/// Splits every marked element into one quadrilateral-like child per corner,
/// joining side midpoints to an interior star point. Neighbours inherit the
/// new midpoints as extra vertices so the mesh stays conforming.
///
/// An empty `marked` set returns the mesh unchanged.
pub fn refine(mesh: &PolygonalMesh, marked: &[usize]) -> Result<PolygonalMesh> {
    let ne = mesh.num_elements();
    if let Some(&bad) = marked.iter().find(|&&e| e >= ne) {
        return Err(Error::InvalidArgument(format!("marked element {bad} out of range (mesh has {ne})")));
    }
    if marked.is_empty() {
        return Ok(mesh.clone());
    }
    let mut is_marked = vec![false; ne];
    for &e in marked {
        is_marked[e] = true;
    }

    let mut vertices = mesh.vertices().to_vec();
    // New vertices inside mesh edge (min, max), shared by both sides.
    let mut splits: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    // Per marked element: (corner vertex ids, midpoint vertex id per side).
    let mut plans: HashMap<usize, (Vec<usize>, Vec<usize>)> = HashMap::new();

    for e in (0..ne).filter(|&e| is_marked[e]) {
        let cycle = &mesh.elements()[e];
        let pts = mesh.element_points(e);
        let n = cycle.len();
        let corners = corner_positions(&pts);
        let nc = corners.len();
        let mut mids = Vec::with_capacity(nc);
        for s in 0..nc {
            let (k0, k1) = (corners[s], corners[(s + 1) % nc]);
            let (c0, c1) = (pts[k0], pts[k1]);
            let m = [0.5 * (c0[0] + c1[0]), 0.5 * (c0[1] + c1[1])];
            let side2 = geometry::dist2(c0, c1);
            let tol2 = (MIDPOINT_TOL * MIDPOINT_TOL) * side2;
            let param = |p: Point<f64>| ((p[0] - c0[0]) * (c1[0] - c0[0]) + (p[1] - c0[1]) * (c1[1] - c0[1])) / side2;

            let mut k = k0;
            let mut found = None;
            while k != k1 {
                let (a, b) = (cycle[k], cycle[(k + 1) % n]);
                if k != k0 && geometry::dist2(vertices[a], m) <= tol2 {
                    found = Some(a);
                    break;
                }
                let (ta, tb) = (param(vertices[a]), param(vertices[b]));
                if ta < 0.5 && tb > 0.5 && geometry::dist2(vertices[b], m) > tol2 {
                    let entry = splits.entry((a.min(b), a.max(b))).or_default();
                    let v = match entry.iter().find(|&&v| geometry::dist2(vertices[v], m) <= tol2) {
                        Some(&v) => v,
                        None => {
                            vertices.push(m);
                            entry.push(vertices.len() - 1);
                            vertices.len() - 1
                        }
                    };
                    found = Some(v);
                    break;
                }
                k = (k + 1) % n;
            }
            let v = found.ok_or_else(|| Error::NonConforming(format!("no midpoint found on side {s} of element {e}")))?;
            mids.push(v);
        }
        plans.insert(e, (corners.iter().map(|&k| cycle[k]).collect(), mids));
    }

    let mut elements = Vec::with_capacity(ne + 3 * marked.len());
    for e in 0..ne {
        let cycle = &mesh.elements()[e];
        let n = cycle.len();
        let mut full = Vec::with_capacity(n + 4);
        for k in 0..n {
            let (a, b) = (cycle[k], cycle[(k + 1) % n]);
            full.push(a);
            if let Some(extra) = splits.get(&(a.min(b), a.max(b))) {
                let mut extra = extra.clone();
                extra.sort_by(|&x, &y| geometry::dist2(vertices[a], vertices[x]).total_cmp(&geometry::dist2(vertices[a], vertices[y])));
                full.extend(extra);
            }
        }
        let Some((corners, mids)) = plans.get(&e) else {
            elements.push(full);
            continue;
        };
        let star = geometry::star_point(&mesh.element_points(e))
            .map_err(|source| Error::InvalidElement { element: e, source })?;
        vertices.push(star);
        let center = vertices.len() - 1;
        let pos: HashMap<usize, usize> = full.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let nf = full.len();
        let nc = corners.len();
        for s in 0..nc {
            let start = pos[&mids[(s + nc - 1) % nc]];
            let end = pos[&mids[s]];
            let mut child = Vec::new();
            let mut i = start;
            loop {
                child.push(full[i]);
                if i == end {
                    break;
                }
                i = (i + 1) % nf;
            }
            child.push(center);
            elements.push(child);
        }
    }
    PolygonalMesh::with_generation(vertices, elements, mesh.generation() + 1)
}

/// Refines every element.
pub fn uniform_refine(mesh: &PolygonalMesh) -> Result<PolygonalMesh> {
    let all: Vec<usize> = (0..mesh.num_elements()).collect();
    refine(mesh, &all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, DomainSpec, MeshFamily};

    fn single(pts: Vec<Point<f64>>) -> PolygonalMesh {
        let n = pts.len();
        PolygonalMesh::new(pts, vec![(0..n).collect()]).unwrap()
    }

    fn regular(n: usize) -> Vec<Point<f64>> {
        (0..n)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
                [t.cos(), t.sin()]
            })
            .collect()
    }

    #[test]
    fn one_square_in_two_by_two() {
        let m = build_mesh(&DomainSpec::UnitSquare, MeshFamily::Quad, 2).unwrap();
        let r = refine(&m, &[0]).unwrap();
        assert_eq!(r.num_elements(), 7);
        assert_eq!(r.generation(), 1);
        let sizes: Vec<usize> = r.elements().iter().map(|c| c.len()).collect();
        // Both neighbours of element 0 pick up a midpoint; the diagonal one does not.
        assert_eq!(sizes.iter().filter(|&&s| s == 5).count(), 2);
        assert_eq!(sizes.iter().filter(|&&s| s == 4).count(), 5);
        assert!((r.total_area() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polygon_children() {
        for n in [3, 5, 6] {
            let m = single(regular(n));
            let r = refine(&m, &[0]).unwrap();
            assert_eq!(r.num_elements(), n);
            assert!(r.elements().iter().all(|c| c.len() == 4));
            assert!((r.total_area() - m.total_area()).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_two_by_two() {
        let m = build_mesh(&DomainSpec::UnitSquare, MeshFamily::Quad, 2).unwrap();
        let r = uniform_refine(&m).unwrap();
        assert_eq!(r.num_elements(), 16);
        assert_eq!(r.num_vertices(), 25);
        assert!(r.elements().iter().all(|c| c.len() == 4));
    }

    #[test]
    fn hanging_vertices_are_not_corners() {
        let m = build_mesh(&DomainSpec::UnitSquare, MeshFamily::Quad, 2).unwrap();
        let r = refine(&m, &[0]).unwrap();
        let five = r.elements().iter().position(|c| c.len() == 5).unwrap();
        // The neighbour still has four corners, so it splits into four children
        // and reuses the existing midpoint on its shared side.
        let before = r.num_vertices();
        let rr = refine(&r, &[five]).unwrap();
        assert_eq!(rr.num_elements(), r.num_elements() + 3);
        assert_eq!(rr.num_vertices(), before + 3 + 1);
    }

    #[test]
    fn empty_marking_is_identity() {
        let m = build_mesh(&DomainSpec::LShape, MeshFamily::Hexa, 3).unwrap();
        assert_eq!(refine(&m, &[]).unwrap(), m);
        assert!(refine(&m, &[m.num_elements()]).is_err());
    }

    #[test]
    fn repeated_adaptive_refinement_stays_conforming() {
        let mut m = build_mesh(&DomainSpec::LShape, MeshFamily::Hexa, 2).unwrap();
        for _ in 0..6 {
            let marked: Vec<usize> = (0..m.num_elements())
                .filter(|&e| {
                    let g = m.element_geometry(e).unwrap();
                    g.centroid[0].hypot(g.centroid[1]) < 0.5
                })
                .collect();
            m = refine(&m, &marked).unwrap();
            assert!((m.total_area() - 3.0).abs() < 1e-12);
        }
    }
}
