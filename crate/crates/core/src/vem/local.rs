//! Element-level lowest-order operators, generic over the scalar type.

use crate::error::{Error, Result};
use crate::geometry::{self, ElementGeometry};
use crate::linalg::DenseMat;
use crate::scalar::Scalar;

/// Diffusion and advection coefficients on one element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementCoefficients<T> {
    pub kappa: T,
    pub advection: [T; 2],
}

/// Projection data of one element.
///
/// `pi_nabla` (3 × n) maps a dof vector to the coefficients of `Π∇v` in the
/// scaled monomials `{1, ξ, η}`; `d` (n × 3) evaluates the monomials at the vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector<T> {
    pub pi_nabla: DenseMat<T>,
    pub d: DenseMat<T>,
    /// Gradient block of the projector system: `G[a][b] = ∫∇m_a·∇m_b`, row 0 replaced by the boundary mean.
    pub g: DenseMat<T>,
}

/// Local matrices of one element. Entry `(i, j)` of a form matrix is the
/// form evaluated at `(φ_j, φ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperators<T> {
    pub n: usize,
    pub pi_nabla: DenseMat<T>,
    pub d: DenseMat<T>,
    /// `Π = D Π∇` on dof vectors.
    pub pi: DenseMat<T>,
    /// Stabilization of the diffusion form.
    pub s: DenseMat<T>,
    /// Stabilization of the mass form.
    pub s0: DenseMat<T>,
    pub a: DenseMat<T>,
    pub b: DenseMat<T>,
    pub c: DenseMat<T>,
}

/// Builds `Π∇` from edge boundary integrals. The constant part is fixed by the
/// boundary mean, integrated exactly along each (linear) edge trace.
pub fn local_projector<T: Scalar>(geom: &ElementGeometry<T>) -> Result<Projector<T>> {
    let n = geom.num_vertices();
    let h = geom.diameter;
    let half = T::lit(0.5);
    let d = DenseMat::from_fn(n, 3, |i, a| geom.monomials(geom.vertices[i])[a]);
    let mut b = DenseMat::zeros(3, n);
    for i in 0..n {
        let prev = &geom.edges[(i + n - 1) % n];
        let next = &geom.edges[i];
        b[(0, i)] = (prev.length + next.length) * half / geom.perimeter;
        for k in 0..2 {
            b[(k + 1, i)] = (prev.length * prev.normal[k] + next.length * next.normal[k]) * half / h;
        }
    }
    let g = b.matmul(&d);
    let g_inv = g.inverse3().ok_or(Error::SingularProjector(0))?;
    Ok(Projector { pi_nabla: g_inv.matmul(&b), d, g })
}

/// `(I - Π)ᵀ(I - Π)`.
fn defect_gram<T: Scalar>(pi: &DenseMat<T>) -> DenseMat<T> {
    let defect = DenseMat::identity(pi.rows()).sub(pi);
    defect.transpose().matmul(&defect)
}

pub fn local_matrices<T: Scalar>(
    geom: &ElementGeometry<T>,
    coeffs: &ElementCoefficients<T>,
    proj: &Projector<T>,
) -> LocalOperators<T> {
    let n = geom.num_vertices();
    let h = geom.diameter;
    let p = &proj.pi_nabla;
    let pi = proj.d.matmul(p);
    let defect = defect_gram(&pi);

    let mut g_tilde = proj.g.clone();
    for b in 0..3 {
        g_tilde[(0, b)] = T::zero();
    }
    let s = defect.scale(coeffs.kappa);
    let a = p.transpose().matmul(&g_tilde).matmul(p).scale(coeffs.kappa).add(&s);

    let s0 = defect.scale(geom.area);
    let c = p.transpose().matmul(&geom.monomial_mass()).matmul(p).add(&s0);

    // ∫_E ϑ·∇(Π∇φ_j) Π∇φ_i: constant gradient times the integral of Πφ_i.
    let [vx, vy] = coeffs.advection;
    let b = DenseMat::from_fn(n, n, |i, j| {
        let grad = (vx * p[(1, j)] + vy * p[(2, j)]) / h;
        let mean = (0..3).fold(T::zero(), |acc, al| acc + p[(al, i)] * geom.moments[al]);
        grad * mean
    });

    LocalOperators { n, pi_nabla: p.clone(), d: proj.d.clone(), pi, s, s0, a, b, c }
}

/// Geometry, projector and local matrices of a polygon in one call.
pub fn element_operators<T: Scalar>(
    vertices: &[geometry::Point<T>],
    coeffs: &ElementCoefficients<T>,
) -> Result<(ElementGeometry<T>, LocalOperators<T>)> {
    let geom = ElementGeometry::new(vertices).map_err(|source| Error::InvalidElement { element: 0, source })?;
    let proj = local_projector(&geom)?;
    let ops = local_matrices(&geom, coeffs, &proj);
    Ok((geom, ops))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{subtriangulate, Point};

    fn unit_square() -> Vec<Point<f64>> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    fn coeffs(kappa: f64, advection: [f64; 2]) -> ElementCoefficients<f64> {
        ElementCoefficients { kappa, advection }
    }

    /// Value at `p` of the linear polynomial with scaled-monomial coefficients `c`.
    fn eval(geom: &ElementGeometry<f64>, c: &[f64], p: Point<f64>) -> f64 {
        let m = geom.monomials(p);
        c[0] * m[0] + c[1] * m[1] + c[2] * m[2]
    }

    fn apply(m: &DenseMat<f64>, v: &[f64]) -> Vec<f64> {
        m.matvec(v)
    }

    #[test]
    fn reproduces_x_on_unit_square() {
        let (geom, ops) = element_operators(&unit_square(), &coeffs(1.0, [0.0, 0.0])).unwrap();
        let c = apply(&ops.pi_nabla, &[0.0, 1.0, 1.0, 0.0]);
        for p in [[0.3, 0.7], [0.0, 0.0], [0.9, 0.1]] {
            assert!((eval(&geom, &c, p) - p[0]).abs() < 1e-14);
        }
    }

    /// Independent route: the hat function of the unit square restricted to the
    /// boundary is piecewise linear; its energy projection is characterised by
    /// ∫_E ∇Π v·∇q = ∫_∂E v ∂q/∂n for q ∈ {x, y} and matching boundary means.
    /// Evaluate both sides by dense sampling of the boundary trace.
    #[test]
    fn hat_projection_matches_boundary_oracle() {
        let sq = unit_square();
        let (geom, ops) = element_operators(&sq, &coeffs(1.0, [0.0, 0.0])).unwrap();
        let c = apply(&ops.pi_nabla, &[1.0, 0.0, 0.0, 0.0]);
        let hat = |p: Point<f64>| (1.0 - p[0]).min(1.0) * (1.0 - p[1]).min(1.0);
        // On the boundary the bilinear hat equals the VEM hat (linear per edge).
        let samples = 4000;
        let (mut mean, mut gx, mut gy, mut perim) = (0.0, 0.0, 0.0, 0.0);
        for k in 0..4 {
            let (a, b) = (sq[k], sq[(k + 1) % 4]);
            let len = geometry::dist2(a, b).sqrt();
            let e = &geom.edges[k];
            for s in 0..samples {
                let t = (s as f64 + 0.5) / samples as f64;
                let p = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                let w = len / samples as f64;
                mean += hat(p) * w;
                gx += hat(p) * e.normal[0] * w;
                gy += hat(p) * e.normal[1] * w;
            }
            perim += len;
        }
        mean /= perim;
        // |E| = 1 so the gradient equals the boundary integrals directly.
        let grad = [c[1] / geom.diameter, c[2] / geom.diameter];
        assert!((grad[0] - gx).abs() < 1e-6 && (grad[1] - gy).abs() < 1e-6);
        let bmean = (0..4).map(|k| eval(&geom, &c, geom.edges[k].midpoint)).sum::<f64>() / 4.0;
        assert!((bmean - mean).abs() < 1e-6);
        for p in [[0.0, 0.0], [0.5, 0.5], [1.0, 0.25]] {
            let expected = 0.75 - 0.5 * p[0] - 0.5 * p[1];
            assert!((eval(&geom, &c, p) - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn constants_and_idempotence() {
        let pts = vec![[0.0, 0.0], [2.0, 0.1], [2.5, 1.0], [1.0, 2.0], [-0.3, 1.1]];
        let (_, ops) = element_operators(&pts, &coeffs(2.0, [1.0, -0.5])).unwrap();
        let ones = vec![1.0; 5];
        let c = apply(&ops.pi_nabla, &ones);
        assert!((c[0] - 1.0).abs() < 1e-14 && c[1].abs() < 1e-14 && c[2].abs() < 1e-14);
        let pp = ops.pi.matmul(&ops.pi);
        assert!(pp.sub(&ops.pi).max_abs() < 1e-13);
        assert!(apply(&ops.a, &ones).iter().all(|v| v.abs() < 1e-13));
        assert!(apply(&ops.b, &ones).iter().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn unit_square_advection_and_mass() {
        let (_, ops) = element_operators(&unit_square(), &coeffs(1.0, [1.0, 0.0])).unwrap();
        let x = [0.0, 1.0, 1.0, 0.0];
        let ones = [1.0; 4];
        let bx = apply(&ops.b, &x);
        assert!((bx.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let c1 = apply(&ops.c, &ones);
        assert!((c1.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    /// Advection pairing against quadrature of the projected polynomials.
    #[test]
    fn advection_matches_quadrature() {
        let pts = vec![[0.1, 0.0], [1.3, 0.2], [1.1, 1.4], [0.0, 0.9]];
        let theta = [3.0, -1.5];
        let (geom, ops) = element_operators(&pts, &coeffs(1.0, theta)).unwrap();
        let sub = subtriangulate(&pts, None).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let ci: Vec<f64> = (0..3).map(|a| ops.pi_nabla[(a, i)]).collect();
                let cj: Vec<f64> = (0..3).map(|a| ops.pi_nabla[(a, j)]).collect();
                let grad = (theta[0] * cj[1] + theta[1] * cj[2]) / geom.diameter;
                let q = geometry::integrate(&sub, |p| num_complex::Complex::new(grad * eval(&geom, &ci, p), 0.0));
                assert!((q.re - ops.b[(i, j)]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn symmetry_and_definiteness() {
        let pts = vec![[0.0, 0.0], [1.0, 0.0], [1.5, 0.8], [0.7, 1.6], [-0.2, 0.9], [-0.1, 0.4]];
        let (_, ops) = element_operators(&pts, &coeffs(1.7, [0.0, 0.0])).unwrap();
        assert!(ops.a.sub(&ops.a.transpose()).max_abs() < 1e-14);
        assert!(ops.c.sub(&ops.c.transpose()).max_abs() < 1e-14);
        // Diagonal Cholesky test for positive definiteness of C.
        let n = ops.n;
        let mut l = ops.c.clone();
        for k in 0..n {
            assert!(l[(k, k)] > 0.0);
            let p = l[(k, k)].sqrt();
            for i in k + 1..n {
                let f = l[(i, k)] / (p * p);
                for j in k..n {
                    let v = l[(k, j)];
                    l[(i, j)] -= f * v;
                }
            }
        }
        // S vanishes on linears, S0 likewise (Π v = v there).
        let lin: Vec<f64> = pts.iter().map(|p| 2.0 - p[0] + 3.0 * p[1]).collect();
        assert!(apply(&ops.s, &lin).iter().all(|v| v.abs() < 1e-12));
        assert!(apply(&ops.s0, &lin).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn single_precision_operators() {
        let pts: Vec<Point<f32>> = vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let (_, ops) = element_operators(&pts, &ElementCoefficients { kappa: 1.0f32, advection: [0.0, 0.0] }).unwrap();
        let c = ops.pi_nabla.matvec(&[1.0, 0.0, 0.0, 0.0]);
        assert!((c[0] - 0.25).abs() < 1e-6);
    }
}
