//! Clipped Voronoi meshes of the model domains.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::domain::DomainSpec;
use super::PolygonalMesh;
use crate::error::{Error, Result};
use crate::geometry::{self, Point};

const LLOYD_ITERATIONS: usize = 2;
const MAX_ATTEMPTS: u64 = 32;
/// Edges shorter than this fraction of the mean cell size are collapsed.
const SHORT_EDGE: f64 = 0.1;

pub(crate) fn voronoi_mesh(domain: &DomainSpec, resolution: usize, seed: u64) -> Result<PolygonalMesh> {
    let boundary = domain
        .boundary_polygon()
        .ok_or_else(|| Error::Unsupported(format!("no boundary polygon for {domain}")))?;
    let area = domain.area().unwrap_or_else(|| geometry::signed_area(&boundary));
    let n_seeds = ((resolution * resolution) as f64 * area).round().max(4.0) as usize;
    let mut last_err = None;
    // A cell of a non-convex domain may come out disconnected; draw again.
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let mut seeds = sample_seeds(domain, &boundary, n_seeds, &mut rng);
        let mut cells = None;
        for it in 0..=LLOYD_ITERATIONS {
            let Some(cs) = voronoi_cells(&boundary, &seeds) else { break };
            if it < LLOYD_ITERATIONS {
                seeds = cs.iter().map(|c| geometry::centroid(c)).collect();
            } else {
                cells = Some(cs);
            }
        }
        let Some(cells) = cells else { continue };
        match assemble(&boundary, cells) {
            Ok(mesh) => return Ok(mesh),
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::NonConforming(format!("could not build a Voronoi mesh of {domain}"))))
}

fn sample_seeds(domain: &DomainSpec, boundary: &[Point<f64>], n: usize, rng: &mut ChaCha8Rng) -> Vec<Point<f64>> {
    let (lo, hi) = bbox(boundary);
    let mut seeds = Vec::with_capacity(n);
    while seeds.len() < n {
        let p = [rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1])];
        if domain.contains(p, 0.0) {
            seeds.push(p);
        }
    }
    seeds
}

fn bbox(points: &[Point<f64>]) -> (Point<f64>, Point<f64>) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    (lo, hi)
}

/// Domain polygon clipped by the bisector half-planes of each seed.
/// `None` if some cell is empty or not a simple polygon.
fn voronoi_cells(boundary: &[Point<f64>], seeds: &[Point<f64>]) -> Option<Vec<Vec<Point<f64>>>> {
    let mut cells = Vec::with_capacity(seeds.len());
    let mut order: Vec<usize> = (0..seeds.len()).collect();
    for (i, &s) in seeds.iter().enumerate() {
        order.sort_by(|&a, &b| geometry::dist2(s, seeds[a]).total_cmp(&geometry::dist2(s, seeds[b])));
        let mut cell = boundary.to_vec();
        let mut radius2 = cell.iter().map(|&p| geometry::dist2(s, p)).fold(0.0, f64::max);
        for &j in &order {
            if j == i {
                continue;
            }
            let t = seeds[j];
            let d2 = geometry::dist2(s, t);
            // Points beyond half the seed distance cannot be cut off any more.
            if d2 > 4.0 * radius2 {
                break;
            }
            let m = [0.5 * (s[0] + t[0]), 0.5 * (s[1] + t[1])];
            let dir = [-(t[1] - s[1]), t[0] - s[0]];
            cell = geometry::clip_half_plane(&cell, m, [m[0] + dir[0], m[1] + dir[1]]);
            if cell.len() < 3 {
                return None;
            }
            radius2 = cell.iter().map(|&p| geometry::dist2(s, p)).fold(0.0, f64::max);
        }
        let cell = remove_spikes(dedup_cycle(cell, 1e-12));
        if cell.len() < 3 || !(geometry::signed_area(&cell) > 0.0) || !geometry::is_simple(&cell) {
            return None;
        }
        cells.push(cell);
    }
    Some(cells)
}

/// Drops zero-width spikes that clipping a non-convex polygon leaves behind
/// where a part of the polygon was cut away.
fn remove_spikes(mut cycle: Vec<Point<f64>>) -> Vec<Point<f64>> {
    let mut changed = true;
    while changed && cycle.len() >= 3 {
        changed = false;
        let n = cycle.len();
        for i in 0..n {
            let (a, b, c) = (cycle[(i + n - 1) % n], cycle[i], cycle[(i + 1) % n]);
            let (ab, bc) = ([b[0] - a[0], b[1] - a[1]], [c[0] - b[0], c[1] - b[1]]);
            let scale = ab[0].hypot(ab[1]) * bc[0].hypot(bc[1]);
            let folds = ab[0] * bc[0] + ab[1] * bc[1] < 0.0;
            if folds && geometry::orient(a, b, c).abs() <= 1e-12 * scale {
                cycle.remove(i);
                cycle = dedup_cycle(cycle, 1e-12);
                changed = true;
                break;
            }
        }
    }
    cycle
}

fn dedup_cycle(mut cycle: Vec<Point<f64>>, tol: f64) -> Vec<Point<f64>> {
    cycle.dedup_by(|a, b| geometry::dist2(*a, *b) <= tol * tol);
    while cycle.len() > 1 && geometry::dist2(cycle[0], cycle[cycle.len() - 1]) <= tol * tol {
        cycle.pop();
    }
    cycle
}

/// Merges coincident cell corners into shared vertices and inserts
/// T-junction vertices so that neighbouring cells share whole edges.
fn assemble(boundary: &[Point<f64>], cells: Vec<Vec<Point<f64>>>) -> Result<PolygonalMesh> {
    let (lo, hi) = bbox(boundary);
    let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let tol = 1e-9 * scale;
    let key = |p: Point<f64>| ((p[0] / tol).floor() as i64, (p[1] / tol).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let mut vertices: Vec<Point<f64>> = Vec::new();
    let mut elements = Vec::with_capacity(cells.len());
    for cell in cells {
        let mut cycle: Vec<usize> = Vec::with_capacity(cell.len());
        for p in cell {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        if let Some(&v) = list.iter().find(|&&v| geometry::dist2(vertices[v], p) <= tol * tol) {
                            found = Some(v);
                            break 'search;
                        }
                    }
                }
            }
            let v = found.unwrap_or_else(|| {
                vertices.push(p);
                grid.entry((kx, ky)).or_default().push(vertices.len() - 1);
                vertices.len() - 1
            });
            if cycle.last() != Some(&v) {
                cycle.push(v);
            }
        }
        while cycle.len() > 1 && cycle[0] == cycle[cycle.len() - 1] {
            cycle.pop();
        }
        elements.push(cycle);
    }
    let elements = insert_t_junctions(&vertices, elements, tol);
    let area = geometry::signed_area(boundary);
    let min_len = SHORT_EDGE * (area / elements.len() as f64).sqrt();
    let (vertices, elements) = collapse_short_edges(boundary, vertices, elements, min_len, tol);
    PolygonalMesh::new(vertices, elements)
}

/// Index of every boundary side the point lies on, as a bit mask.
fn boundary_sides(boundary: &[Point<f64>], p: Point<f64>, tol: f64) -> u64 {
    let n = boundary.len();
    let mut mask = 0;
    for i in 0..n {
        let (a, b) = (boundary[i], boundary[(i + 1) % n]);
        let len2 = geometry::dist2(a, b);
        let t = ((p[0] - a[0]) * (b[0] - a[0]) + (p[1] - a[1]) * (b[1] - a[1])) / len2;
        let len = len2.sqrt();
        if t * len >= -tol && (1.0 - t) * len >= -tol && geometry::orient(a, b, p).abs() / len <= tol {
            mask |= 1 << i;
        }
    }
    mask
}

/// Merges the end points of edges shorter than `min_len`. Clipping leaves
/// such edges where a bisector meets the boundary next to a corner, and the
/// resulting slivers keep their shape under refinement. Domain corners never
/// move and boundary vertices only move along their side. A collapse is
/// skipped if it would leave an invalid element.
fn collapse_short_edges(
    boundary: &[Point<f64>],
    mut vertices: Vec<Point<f64>>,
    mut elements: Vec<Vec<usize>>,
    min_len: f64,
    tol: f64,
) -> (Vec<Point<f64>>, Vec<Vec<usize>>) {
    let sides: Vec<u64> = vertices.iter().map(|&p| boundary_sides(boundary, p, tol)).collect();
    let rank = |v: usize| match sides[v].count_ones() {
        0 => 0,
        1 => 1,
        _ => 2,
    };
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); vertices.len()];
    for (e, cycle) in elements.iter().enumerate() {
        for &v in cycle {
            incident[v].push(e);
        }
    }
    let mut edges: Vec<(f64, usize, usize)> = Vec::new();
    for cycle in &elements {
        for k in 0..cycle.len() {
            let (a, b) = (cycle[k], cycle[(k + 1) % cycle.len()]);
            let len = geometry::dist2(vertices[a], vertices[b]).sqrt();
            if a < b && len < min_len {
                edges.push((len, a, b));
            }
        }
    }
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut alive = vec![true; vertices.len()];
    let mut dead_elements = vec![false; elements.len()];

    for (_, a, b) in edges {
        if !alive[a] || !alive[b] {
            continue;
        }
        let len = geometry::dist2(vertices[a], vertices[b]).sqrt();
        let adjacent = incident[a].iter().any(|&e| {
            let c = &elements[e];
            (0..c.len()).any(|k| {
                let (p, q) = (c[k], c[(k + 1) % c.len()]);
                (p == a && q == b) || (p == b && q == a)
            })
        });
        if len >= min_len || !adjacent {
            continue;
        }
        let (keep, drop, target) = match (rank(a), rank(b)) {
            (2, 2) => continue,
            (ra, rb) if ra > rb => (a, b, vertices[a]),
            (ra, rb) if rb > ra => (b, a, vertices[b]),
            (1, 1) if sides[a] & sides[b] == 0 => continue,
            _ => {
                let (pa, pb) = (vertices[a], vertices[b]);
                (a, b, [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])])
            }
        };
        let mut affected: Vec<usize> = incident[a].iter().chain(&incident[b]).copied().collect();
        affected.sort_unstable();
        affected.dedup();
        let mut updated = Vec::with_capacity(affected.len());
        let mut ok = true;
        for &e in &affected {
            let mut cycle: Vec<usize> = elements[e].iter().map(|&v| if v == drop { keep } else { v }).collect();
            cycle.dedup();
            while cycle.len() > 1 && cycle[0] == cycle[cycle.len() - 1] {
                cycle.pop();
            }
            if cycle.len() < 3 {
                updated.push((e, None));
                continue;
            }
            let mut seen = cycle.clone();
            seen.sort_unstable();
            seen.dedup();
            let pts: Vec<Point<f64>> =
                cycle.iter().map(|&v| if v == keep { target } else { vertices[v] }).collect();
            if seen.len() != cycle.len()
                || !(geometry::signed_area(&pts) > 0.0)
                || !geometry::is_simple(&pts)
                || geometry::star_point(&pts).is_err()
            {
                ok = false;
                break;
            }
            updated.push((e, Some(cycle)));
        }
        if !ok {
            continue;
        }
        vertices[keep] = target;
        alive[drop] = false;
        for (e, cycle) in updated {
            match cycle {
                Some(c) => elements[e] = c,
                None => dead_elements[e] = true,
            }
        }
        let moved = std::mem::take(&mut incident[drop]);
        incident[keep].extend(moved);
        incident[keep].retain(|&e| !dead_elements[e]);
        incident[keep].sort_unstable();
        incident[keep].dedup();
    }

    let mut remap = vec![usize::MAX; vertices.len()];
    let mut kept = Vec::new();
    let elements: Vec<Vec<usize>> = elements
        .into_iter()
        .zip(dead_elements)
        .filter(|(_, dead)| !dead)
        .map(|(c, _)| c)
        .collect();
    for cycle in &elements {
        for &v in cycle {
            if remap[v] == usize::MAX {
                remap[v] = kept.len();
                kept.push(vertices[v]);
            }
        }
    }
    let elements = elements.into_iter().map(|c| c.into_iter().map(|v| remap[v]).collect()).collect();
    (kept, elements)
}

/// Adds to every element edge the vertices lying strictly inside it.
fn insert_t_junctions(vertices: &[Point<f64>], elements: Vec<Vec<usize>>, tol: f64) -> Vec<Vec<usize>> {
    let (lo, hi) = bbox(vertices);
    let extent = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let cells = (vertices.len() as f64).sqrt().ceil().max(1.0);
    let cell = extent / cells;
    let key = |p: Point<f64>| (((p[0] - lo[0]) / cell).floor() as i64, ((p[1] - lo[1]) / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (v, &p) in vertices.iter().enumerate() {
        grid.entry(key(p)).or_default().push(v);
    }
    elements
        .into_iter()
        .map(|cycle| {
            let n = cycle.len();
            let mut out = Vec::with_capacity(n + 2);
            for k in 0..n {
                let (a, b) = (cycle[k], cycle[(k + 1) % n]);
                out.push(a);
                let (pa, pb) = (vertices[a], vertices[b]);
                let len2 = geometry::dist2(pa, pb);
                let len = len2.sqrt();
                let (k0, k1) = (key(pa), key(pb));
                let mut inner: Vec<(f64, usize)> = Vec::new();
                for i in k0.0.min(k1.0) - 1..=k0.0.max(k1.0) + 1 {
                    for j in k0.1.min(k1.1) - 1..=k0.1.max(k1.1) + 1 {
                        for &v in grid.get(&(i, j)).into_iter().flatten() {
                            if v == a || v == b {
                                continue;
                            }
                            let p = vertices[v];
                            let t = ((p[0] - pa[0]) * (pb[0] - pa[0]) + (p[1] - pa[1]) * (pb[1] - pa[1])) / len2;
                            if t * len <= tol || (1.0 - t) * len <= tol {
                                continue;
                            }
                            if geometry::orient(pa, pb, p).abs() / len <= tol {
                                inner.push((t, v));
                            }
                        }
                    }
                }
                inner.sort_by(|x, y| x.0.total_cmp(&y.0));
                out.extend(inner.into_iter().map(|(_, v)| v));
            }
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::DEFAULT_VORONOI_SEED as DEFAULT_SEED;

    #[test]
    fn covers_each_domain() {
        for (d, r) in [(DomainSpec::UnitSquare, 6), (DomainSpec::LShape, 5), (DomainSpec::HShape, 6)] {
            let m = voronoi_mesh(&d, r, 7).unwrap();
            assert!((m.total_area() - d.area().unwrap()).abs() < 1e-12, "{d}");
            let seeds = ((r * r) as f64 * d.area().unwrap()).round() as usize;
            assert!(m.num_elements() <= seeds && m.num_elements() + 3 >= seeds, "{d}");
        }
    }

    #[test]
    fn seed_changes_mesh() {
        let a = voronoi_mesh(&DomainSpec::UnitSquare, 4, 1).unwrap();
        let b = voronoi_mesh(&DomainSpec::UnitSquare, 4, 2).unwrap();
        assert_ne!(a.vertices(), b.vertices());
    }

    #[test]
    fn no_short_edges_left_at_corners() {
        let d = DomainSpec::HShape;
        for r in [8, 15] {
            let m = voronoi_mesh(&d, r, DEFAULT_SEED).unwrap();
            let h = (d.area().unwrap() / m.num_elements() as f64).sqrt();
            for c in d.boundary_polygon().unwrap() {
                let v = m.vertices().iter().position(|&p| p == c).unwrap();
                for e in m.edges().iter().filter(|e| e.vertices.contains(&v)) {
                    let [a, b] = e.vertices;
                    let len = geometry::dist2(m.vertices()[a], m.vertices()[b]).sqrt();
                    assert!(len >= SHORT_EDGE * h * 0.5, "corner {c:?}: edge {len}");
                }
            }
        }
    }

    #[test]
    fn t_junction_is_split() {
        let v = vec![[0.0, 0.0], [2.0, 0.0], [2.0, 1.0], [0.0, 1.0], [1.0, 0.0]];
        let e = insert_t_junctions(&v, vec![vec![0, 1, 2, 3]], 1e-12);
        assert_eq!(e[0], vec![0, 4, 1, 2, 3]);
    }
}
