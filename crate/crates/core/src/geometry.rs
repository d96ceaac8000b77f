//! Exact polygon integrals, star points and fan sub-triangulations.
//!
//! Every quantity is computed from the vertex cycle with edge-wise
//! divergence-theorem sums, so polynomial integrands up to degree two are
//! integrated exactly. The fan quadrature exists for validation and for
//! non-polynomial integrands.

use num_complex::Complex;

use crate::error::PolygonError;
use crate::linalg::DenseMat;
use crate::scalar::Scalar;

pub type Point<T> = [T; 2];

/// Index of the product `m_a * m_b` of scaled monomials `{1, ξ, η}` in the
/// moment table `[1, ξ, η, ξ², ξη, η²]`.
pub const fn product_index(a: usize, b: usize) -> usize {
    const TABLE: [[usize; 3]; 3] = [[0, 1, 2], [1, 3, 4], [2, 4, 5]];
    TABLE[a][b]
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeData<T> {
    pub length: T,
    /// Unit outward normal.
    pub normal: Point<T>,
    pub midpoint: Point<T>,
}

/// Geometric data of one polygonal element.
///
/// `moments[k]` holds `∫_E q_k` for the scaled monomial products
/// `q = [1, ξ, η, ξ², ξη, η²]` with `ξ = (x - x_c)/h_E`, `η = (y - y_c)/h_E`.
/// Edge `i` joins vertex `i` to vertex `i + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementGeometry<T> {
    pub vertices: Vec<Point<T>>,
    pub area: T,
    pub centroid: Point<T>,
    pub diameter: T,
    pub perimeter: T,
    pub edges: Vec<EdgeData<T>>,
    pub moments: [T; 6],
}

impl<T: Scalar> ElementGeometry<T> {
    /// Builds the geometry of a simple counter-clockwise polygon.
    pub fn new(vertices: &[Point<T>]) -> Result<Self, PolygonError> {
        let n = vertices.len();
        if n < 3 {
            return Err(PolygonError::TooFewVertices(n));
        }
        let diameter = diameter(vertices);
        let area = signed_area(vertices);
        if !(area > T::geom_eps() * diameter * diameter) {
            return Err(PolygonError::ZeroArea);
        }
        if !is_simple(vertices) {
            return Err(PolygonError::SelfIntersecting);
        }

        let raw = raw_moments(vertices);
        let centroid = raw.centroid;

        let mut edges = Vec::with_capacity(n);
        let mut perimeter = T::zero();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let length = (dx * dx + dy * dy).sqrt();
            perimeter += length;
            let half = T::lit(0.5);
            edges.push(EdgeData {
                length,
                normal: [dy / length, -dx / length],
                midpoint: [(a[0] + b[0]) * half, (a[1] + b[1]) * half],
            });
        }

        // Second pass in scaled coordinates keeps the quadratic moments accurate
        // for small elements far from the origin.
        let scaled: Vec<Point<T>> = vertices
            .iter()
            .map(|p| [(p[0] - centroid[0]) / diameter, (p[1] - centroid[1]) / diameter])
            .collect();
        let local = raw_moments(&scaled);
        let h2 = diameter * diameter;
        let moments = [
            area,
            local.m[1] * h2,
            local.m[2] * h2,
            local.m[3] * h2,
            local.m[4] * h2,
            local.m[5] * h2,
        ];

        Ok(Self { vertices: vertices.to_vec(), area, centroid, diameter, perimeter, edges, moments })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    /// Scaled monomial coordinates `(ξ, η)` of a point.
    pub fn scaled(&self, p: Point<T>) -> Point<T> {
        [(p[0] - self.centroid[0]) / self.diameter, (p[1] - self.centroid[1]) / self.diameter]
    }

    /// Values of `{1, ξ, η}` at a point.
    pub fn monomials(&self, p: Point<T>) -> [T; 3] {
        let [xi, eta] = self.scaled(p);
        [T::one(), xi, eta]
    }

    /// Gram matrix `∫_E m_a m_b` of the scaled linear monomials.
    pub fn monomial_mass(&self) -> DenseMat<T> {
        DenseMat::from_fn(3, 3, |a, b| self.moments[product_index(a, b)])
    }

    /// Shortest edge divided by the diameter (mesh-quality diagnostic).
    pub fn min_edge_ratio(&self) -> T {
        self.edges.iter().fold(T::infinity(), |m, e| m.min(e.length)) / self.diameter
    }
}

/// Shoelace area, positive for counter-clockwise cycles.
pub fn signed_area<T: Scalar>(vertices: &[Point<T>]) -> T {
    let n = vertices.len();
    let o = vertices[0];
    let mut twice = T::zero();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        twice += (a[0] - o[0]) * (b[1] - o[1]) - (b[0] - o[0]) * (a[1] - o[1]);
    }
    twice * T::lit(0.5)
}

pub fn diameter<T: Scalar>(vertices: &[Point<T>]) -> T {
    let mut d2 = T::zero();
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            d2 = d2.max(dist2(*a, *b));
        }
    }
    d2.sqrt()
}

pub fn dist2<T: Scalar>(a: Point<T>, b: Point<T>) -> T {
    let (dx, dy) = (a[0] - b[0], a[1] - b[1]);
    dx * dx + dy * dy
}

/// `(b - a) × (c - a)`.
pub fn orient<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>) -> T {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// True when no two non-adjacent edges touch and adjacent edges do not fold back.
pub fn is_simple<T: Scalar>(vertices: &[Point<T>]) -> bool {
    let n = vertices.len();
    let scale = diameter(vertices);
    let tol = T::geom_eps() * scale * scale;
    for i in 0..n {
        let (a, b) = (vertices[i], vertices[(i + 1) % n]);
        if dist2(a, b) <= tol * tol {
            return false;
        }
        // Adjacent edge folding back onto this one.
        let c = vertices[(i + 2) % n];
        if orient(a, b, c).abs() <= tol {
            let back = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]);
            if back < T::zero() {
                return false;
            }
        }
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (vertices[j], vertices[(j + 1) % n]);
            if segments_touch(a, b, c, d, tol) {
                return false;
            }
        }
    }
    true
}

fn segments_touch<T: Scalar>(a: Point<T>, b: Point<T>, c: Point<T>, d: Point<T>, tol: T) -> bool {
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    let straddle = |x: T, y: T| (x > tol && y < -tol) || (x < -tol && y > tol);
    if straddle(d1, d2) && straddle(d3, d4) {
        return true;
    }
    let on = |p: Point<T>, q: Point<T>, r: Point<T>, o: T| {
        o.abs() <= tol
            && r[0] >= p[0].min(q[0]) - tol.sqrt()
            && r[0] <= p[0].max(q[0]) + tol.sqrt()
            && r[1] >= p[1].min(q[1]) - tol.sqrt()
            && r[1] <= p[1].max(q[1]) + tol.sqrt()
    };
    on(a, b, c, d1) || on(a, b, d, d2) || on(c, d, a, d3) || on(c, d, b, d4)
}

struct RawMoments<T> {
    /// `[∫1, ∫x, ∫y, ∫x², ∫xy, ∫y²]` in the input coordinates.
    m: [T; 6],
    centroid: Point<T>,
}

fn raw_moments<T: Scalar>(vertices: &[Point<T>]) -> RawMoments<T> {
    let n = vertices.len();
    // Shift to the vertex average to limit cancellation, then shift back.
    let inv_n = T::one() / T::from_usize(n).unwrap();
    let o = vertices.iter().fold([T::zero(), T::zero()], |acc, p| [acc[0] + p[0] * inv_n, acc[1] + p[1] * inv_n]);
    let mut s = [T::zero(); 6];
    for i in 0..n {
        let (x0, y0) = (vertices[i][0] - o[0], vertices[i][1] - o[1]);
        let (x1, y1) = (vertices[(i + 1) % n][0] - o[0], vertices[(i + 1) % n][1] - o[1]);
        let c = x0 * y1 - x1 * y0;
        let two = T::lit(2.0);
        s[0] += c;
        s[1] += (x0 + x1) * c;
        s[2] += (y0 + y1) * c;
        s[3] += (x0 * x0 + x0 * x1 + x1 * x1) * c;
        s[4] += (x0 * y1 + two * x0 * y0 + two * x1 * y1 + x1 * y0) * c;
        s[5] += (y0 * y0 + y0 * y1 + y1 * y1) * c;
    }
    let area = s[0] * T::lit(0.5);
    let mx = s[1] / T::lit(6.0);
    let my = s[2] / T::lit(6.0);
    let mxx = s[3] / T::lit(12.0);
    let mxy = s[4] / T::lit(24.0);
    let myy = s[5] / T::lit(12.0);
    let cx = mx / area;
    let cy = my / area;
    // Translate moments from the shifted frame back to the input frame.
    let (ox, oy) = (o[0], o[1]);
    let m = [
        area,
        mx + ox * area,
        my + oy * area,
        mxx + T::lit(2.0) * ox * mx + ox * ox * area,
        mxy + ox * my + oy * mx + ox * oy * area,
        myy + T::lit(2.0) * oy * my + oy * oy * area,
    ];
    RawMoments { m, centroid: [cx + ox, cy + oy] }
}

/// Area centroid of a polygon.
pub fn centroid<T: Scalar>(vertices: &[Point<T>]) -> Point<T> {
    raw_moments(vertices).centroid
}

/// Kernel of a polygon (points seeing the whole boundary), as a convex cycle.
/// Empty when the polygon is not star-shaped.
pub fn kernel<T: Scalar>(vertices: &[Point<T>]) -> Vec<Point<T>> {
    let (mut lo, mut hi) = ([T::infinity(); 2], [T::neg_infinity(); 2]);
    for p in vertices {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let mut region = vec![lo, [hi[0], lo[1]], hi, [lo[0], hi[1]]];
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        region = clip_half_plane(&region, a, b);
        if region.len() < 3 {
            return Vec::new();
        }
    }
    region
}

/// Sutherland–Hodgman step: keeps the part of `poly` left of the directed line `a → b`.
pub fn clip_half_plane<T: Scalar>(poly: &[Point<T>], a: Point<T>, b: Point<T>) -> Vec<Point<T>> {
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let p = poly[i];
        let q = poly[(i + 1) % n];
        let sp = orient(a, b, p);
        let sq = orient(a, b, q);
        if sp >= T::zero() {
            out.push(p);
        }
        if (sp >= T::zero()) != (sq >= T::zero()) {
            let t = sp / (sp - sq);
            out.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    out
}

/// Smallest fan-triangle area from `p`, relative to the polygon area.
fn min_fan_ratio<T: Scalar>(vertices: &[Point<T>], p: Point<T>, area: T) -> T {
    let n = vertices.len();
    (0..n)
        .map(|i| orient(p, vertices[i], vertices[(i + 1) % n]) * T::lit(0.5) / area)
        .fold(T::infinity(), T::min)
}

/// Point the element is star-shaped with respect to: the area centroid when
/// every fan triangle from it is positively oriented, otherwise the centroid
/// of the polygon kernel.
pub fn star_point<T: Scalar>(vertices: &[Point<T>]) -> Result<Point<T>, PolygonError> {
    let area = signed_area(vertices);
    if !(area > T::zero()) {
        return Err(PolygonError::ZeroArea);
    }
    let tol = T::geom_eps().sqrt() / T::from_usize(vertices.len()).unwrap();
    let c = centroid(vertices);
    if min_fan_ratio(vertices, c, area) > tol {
        return Ok(c);
    }
    let ker = kernel(vertices);
    if ker.len() < 3 || signed_area(&ker) <= T::zero() {
        return Err(PolygonError::NotStarShaped);
    }
    let kc = centroid(&ker);
    if min_fan_ratio(vertices, kc, area) > T::zero() {
        Ok(kc)
    } else {
        Err(PolygonError::NotStarShaped)
    }
}

/// Fan triangles from a star point with a degree-2 exact rule on each.
#[derive(Debug, Clone)]
pub struct SubTriangulation<T> {
    pub star_point: Point<T>,
    pub triangles: Vec<[Point<T>; 3]>,
    pub points: Vec<Point<T>>,
    pub weights: Vec<T>,
}

impl<T: Scalar> SubTriangulation<T> {
    pub fn triangle_areas(&self) -> Vec<T> {
        self.triangles.iter().map(|t| orient(t[0], t[1], t[2]) * T::lit(0.5)).collect()
    }
}

/// Fans the polygon from `star` (the [`star_point`] when `None`). Fails when
/// a fan triangle is not positively oriented.
pub fn subtriangulate<T: Scalar>(
    vertices: &[Point<T>],
    star: Option<Point<T>>,
) -> Result<SubTriangulation<T>, PolygonError> {
    let p = match star {
        Some(p) => p,
        None => star_point(vertices)?,
    };
    let n = vertices.len();
    let mut triangles = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(3 * n);
    let mut weights = Vec::with_capacity(3 * n);
    let (sixth, two_thirds, third) = (T::one() / T::lit(6.0), T::lit(2.0) / T::lit(3.0), T::one() / T::lit(3.0));
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        let area = orient(p, a, b) * T::lit(0.5);
        if !(area > T::zero()) {
            return Err(PolygonError::NotStarShaped);
        }
        triangles.push([p, a, b]);
        for bary in [[two_thirds, sixth, sixth], [sixth, two_thirds, sixth], [sixth, sixth, two_thirds]] {
            points.push([
                bary[0] * p[0] + bary[1] * a[0] + bary[2] * b[0],
                bary[0] * p[1] + bary[1] * a[1] + bary[2] * b[1],
            ]);
            weights.push(area * third);
        }
    }
    Ok(SubTriangulation { star_point: p, triangles, points, weights })
}

/// `Σ w_q f(x_q)`; exact for polynomials of degree ≤ 2.
pub fn integrate<T: Scalar, F>(sub: &SubTriangulation<T>, mut f: F) -> Complex<T>
where
    F: FnMut(Point<T>) -> Complex<T>,
{
    sub.points
        .iter()
        .zip(&sub.weights)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (&x, &w)| acc + f(x) * w)
}
