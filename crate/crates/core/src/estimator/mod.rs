//! Residual a posteriori indicators for the primal and dual eigenfunctions.

use num_complex::Complex64;

use crate::eig::EigenPair;
use crate::error::{Error, Result};
use crate::geometry::product_index;
use crate::linalg::dot_conj;
use crate::mesh::PolygonalMesh;
use crate::vem::GlobalSystem;

/// Tolerance on `rightᴴ Ch right = 1` accepted by [`primal_indicators`].
pub const NORMALIZATION_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ElementIndicators {
    /// Stabilisation energy of `u_h − Π∇u_h`.
    pub theta_sq: f64,
    /// `h_E² ‖Υ_E‖²`.
    pub r_sq: f64,
    /// `Σ_ℓ h_E ‖J_ℓ‖²` over the element's interior edges.
    pub jump_sq: f64,
    pub eta_sq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorReport {
    pub elements: Vec<ElementIndicators>,
    pub r2: f64,
    pub theta2: f64,
    pub j2: f64,
    pub eta2: f64,
    pub eta: f64,
}

impl EstimatorReport {
    pub fn eta_e(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.eta_sq.sqrt()).collect()
    }
}

/// Volumetric residual per element (coefficients in `{1, ξ, η}`) and the
/// constant conormal jump per mesh edge (zero on the boundary).
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub upsilon: Vec<[Complex64; 3]>,
    pub jumps: Vec<Complex64>,
}

/// Residual of `v` (free-dof coefficients) for eigenvalue `lambda`:
/// `Υ_E = sign·ϑ·∇Π∇v + λ Π∇v` and `J_ℓ = ½[[κ∇Π∇v]]·n`.
pub fn residual_field(
    mesh: &PolygonalMesh,
    system: &GlobalSystem,
    lambda: Complex64,
    v: &[Complex64],
    sign: f64,
) -> ResidualField {
    residual_field_vertex_values(mesh, system, lambda, &system.to_vertices(v), sign)
}

fn residual_field_vertex_values(
    mesh: &PolygonalMesh,
    system: &GlobalSystem,
    lambda: Complex64,
    values: &[Complex64],
    sign: f64,
) -> ResidualField {
    let ne = mesh.num_elements();
    let mut upsilon = Vec::with_capacity(ne);
    let mut grads = Vec::with_capacity(ne);
    for e in 0..ne {
        let ops = &system.local[e];
        let geom = &system.geometries[e];
        let coeffs = system.coefficients.element(e);
        let ve: Vec<Complex64> = mesh.elements()[e].iter().map(|&i| values[i]).collect();
        let a: Vec<Complex64> = (0..3)
            .map(|al| (0..ops.n).fold(Complex64::new(0.0, 0.0), |acc, i| acc + ve[i] * ops.pi_nabla[(al, i)]))
            .collect();
        let h = geom.diameter;
        let adv = (a[1] * coeffs.advection[0] + a[2] * coeffs.advection[1]) / h;
        upsilon.push([adv * sign + lambda * a[0], lambda * a[1], lambda * a[2]]);
        grads.push([a[1] * (coeffs.kappa / h), a[2] * (coeffs.kappa / h)]);
    }
    let jumps = mesh
        .edges()
        .iter()
        .enumerate()
        .map(|(id, edge)| {
            let Some(r) = edge.right else { return Complex64::new(0.0, 0.0) };
            let l = edge.left;
            let k = mesh.element_edges(l).iter().position(|&x| x == id).unwrap();
            let n = system.geometries[l].edges[k].normal;
            let (gl, gr) = (grads[l], grads[r]);
            ((gl[0] - gr[0]) * n[0] + (gl[1] - gr[1]) * n[1]) * 0.5
        })
        .collect();
    ResidualField { upsilon, jumps }
}

/// Indicators of the free-dof vector `v` with advection sign `sign` (−1 primal, +1 dual).
pub fn indicators(mesh: &PolygonalMesh, system: &GlobalSystem, lambda: Complex64, v: &[Complex64], sign: f64) -> EstimatorReport {
    indicators_vertex_values(mesh, system, lambda, &system.to_vertices(v), sign)
}

/// As [`indicators`] for a function given by its values at every mesh
/// vertex, boundary included.
pub fn indicators_vertex_values(
    mesh: &PolygonalMesh,
    system: &GlobalSystem,
    lambda: Complex64,
    values: &[Complex64],
    sign: f64,
) -> EstimatorReport {
    let field = residual_field_vertex_values(mesh, system, lambda, values, sign);
    let mut elements = Vec::with_capacity(mesh.num_elements());
    for e in 0..mesh.num_elements() {
        let ops = &system.local[e];
        let geom = &system.geometries[e];
        let ve: Vec<Complex64> = mesh.elements()[e].iter().map(|&i| values[i]).collect();
        // κ‖(I − Π)v‖², formed from the defect itself to keep it exact on linears.
        let pv = ops.pi.matvec_complex(&ve);
        let defect: f64 = ve.iter().zip(&pv).map(|(a, b)| (a - b).norm_sqr()).sum();
        let theta_sq = system.coefficients.element(e).kappa * defect;
        let c = field.upsilon[e];
        let mut mass = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                mass += (c[a].conj() * c[b]).re * geom.moments[product_index(a, b)];
            }
        }
        let h = geom.diameter;
        let r_sq = h * h * mass.max(0.0);
        let jump_sq: f64 = mesh
            .element_edges(e)
            .iter()
            .zip(&geom.edges)
            .map(|(&id, edge)| h * field.jumps[id].norm_sqr() * edge.length)
            .sum();
        elements.push(ElementIndicators { theta_sq, r_sq, jump_sq, eta_sq: theta_sq + r_sq + jump_sq });
    }
    let r2 = elements.iter().map(|x| x.r_sq).sum();
    let theta2 = elements.iter().map(|x| x.theta_sq).sum();
    let j2 = elements.iter().map(|x| x.jump_sq).sum();
    let eta2: f64 = elements.iter().map(|x| x.eta_sq).sum();
    EstimatorReport { elements, r2, theta2, j2, eta2, eta: eta2.sqrt() }
}

fn c_norm_sq(system: &GlobalSystem, v: &[Complex64]) -> f64 {
    dot_conj(v, &system.ch.matvec_complex(v)).re
}

/// Indicators `η_E` of the primal eigenfunction. The pair must be
/// normalised so that `rightᴴ Ch right = 1`.
pub fn primal_indicators(mesh: &PolygonalMesh, system: &GlobalSystem, pair: &EigenPair) -> Result<EstimatorReport> {
    let norm = c_norm_sq(system, &pair.right);
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Unnormalized(norm));
    }
    Ok(indicators(mesh, system, pair.lambda, &pair.right, -1.0))
}

/// Indicators `η*_E` of the dual eigenfunction. The dual residual involves
/// the conjugated dual coefficients with the advection sign flipped; the
/// vector is scaled to unit `Ch`-norm, like the primal one.
pub fn dual_indicators(mesh: &PolygonalMesh, system: &GlobalSystem, pair: &EigenPair) -> Result<EstimatorReport> {
    let norm = c_norm_sq(system, &pair.left);
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(Error::Unnormalized(norm));
    }
    let scale = norm.sqrt().recip();
    let w: Vec<Complex64> = pair.left.iter().map(|x| x.conj() * scale).collect();
    Ok(indicators(mesh, system, pair.lambda, &w, 1.0))
}

/// `|λ_ref − λ_h| / η²`.
pub fn effectivity(lambda_ref: Complex64, lambda_h: Complex64, eta: f64) -> Result<f64> {
    if !(eta > 0.0) {
        return Err(Error::InvalidArgument(format!("effectivity needs a positive estimator, got {eta}")));
    }
    Ok((lambda_ref - lambda_h).norm() / (eta * eta))
}

#[cfg(test)]
mod tests;
