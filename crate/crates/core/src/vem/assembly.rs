use super::local::{local_matrices, local_projector, ElementCoefficients, LocalOperators};
use crate::error::{Error, Result};
use crate::geometry::ElementGeometry;
use crate::linalg::CsrMatrix;
use crate::mesh::PolygonalMesh;

/// Piecewise-constant coefficients: one entry for the whole mesh or one per element.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    kappa: Vec<f64>,
    advection: Vec<[f64; 2]>,
}

impl Coefficients {
    /// `(κ, ϑ)` when every element carries the same values.
    pub fn constant(&self) -> Option<(f64, [f64; 2])> {
        let kappa = *self.kappa.first()?;
        let adv = *self.advection.first()?;
        let same = self.kappa.iter().all(|&k| k == kappa) && self.advection.iter().all(|&a| a == adv);
        same.then_some((kappa, adv))
    }

    pub fn uniform(kappa: f64, advection: [f64; 2]) -> Self {
        Self { kappa: vec![kappa], advection: vec![advection] }
    }

    pub fn per_element(kappa: Vec<f64>, advection: Vec<[f64; 2]>) -> Result<Self> {
        if kappa.len() != advection.len() {
            return Err(Error::InvalidArgument(format!(
                "{} diffusion values but {} advection vectors",
                kappa.len(),
                advection.len()
            )));
        }
        Ok(Self { kappa, advection })
    }

    pub fn element(&self, e: usize) -> ElementCoefficients<f64> {
        let k = if self.kappa.len() == 1 { 0 } else { e };
        ElementCoefficients { kappa: self.kappa[k], advection: self.advection[k] }
    }

    pub fn with_advection(&self, advection: [f64; 2]) -> Self {
        Self { kappa: self.kappa.clone(), advection: vec![advection; self.kappa.len()] }
    }

    pub fn validate(&self, num_elements: usize) -> Result<()> {
        if self.kappa.len() != 1 && self.kappa.len() != num_elements {
            return Err(Error::InvalidArgument(format!(
                "coefficients given for {} elements, mesh has {num_elements}",
                self.kappa.len()
            )));
        }
        if let Some(k) = self.kappa.iter().find(|k| !(**k > 0.0 && k.is_finite())) {
            return Err(Error::InvalidArgument(format!("diffusion coefficient {k} is not positive")));
        }
        if self.advection.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("advection field is not finite".into()));
        }
        Ok(())
    }
}

/// Assembled pencil `(Bh, Ch)` on the interior vertices.
///
/// Row `i`, column `j` of each matrix holds the form evaluated at `(φ_j, φ_i)`,
/// so eigenpairs satisfy `Bh x = λ Ch x`.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub stiffness: CsrMatrix,
    pub advection: CsrMatrix,
    pub bh: CsrMatrix,
    pub ch: CsrMatrix,
    pub free_to_vertex: Vec<usize>,
    pub vertex_to_free: Vec<Option<usize>>,
    pub geometries: Vec<ElementGeometry<f64>>,
    pub local: Vec<LocalOperators<f64>>,
    pub coefficients: Coefficients,
}

impl GlobalSystem {
    pub fn num_free(&self) -> usize {
        self.free_to_vertex.len()
    }

    /// Gathers element `e`'s dofs from a free-dof vector (boundary values are zero).
    pub fn gather<T: Copy + Default>(&self, mesh: &PolygonalMesh, e: usize, x: &[T]) -> Vec<T> {
        mesh.elements()[e].iter().map(|&v| self.vertex_to_free[v].map_or_else(T::default, |i| x[i])).collect()
    }

    /// Expands a free-dof vector to all vertices, zero on the boundary.
    pub fn to_vertices<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        self.vertex_to_free.iter().map(|f| f.map_or_else(T::default, |i| x[i])).collect()
    }
}

pub fn assemble(mesh: &PolygonalMesh, coeffs: &Coefficients) -> Result<GlobalSystem> {
    coeffs.validate(mesh.num_elements())?;
    let flags = mesh.boundary_vertex_flags();
    let mut vertex_to_free = vec![None; mesh.num_vertices()];
    let mut free_to_vertex = Vec::new();
    for (v, &b) in flags.iter().enumerate() {
        if !b {
            vertex_to_free[v] = Some(free_to_vertex.len());
            free_to_vertex.push(v);
        }
    }
    if free_to_vertex.is_empty() {
        return Err(Error::NoInteriorDofs);
    }
    let n = free_to_vertex.len();

    let mut geometries = Vec::with_capacity(mesh.num_elements());
    let mut local = Vec::with_capacity(mesh.num_elements());
    let mut ta = Vec::new();
    let mut tb = Vec::new();
    let mut tc = Vec::new();
    for (e, cycle) in mesh.elements().iter().enumerate() {
        let geom = mesh.element_geometry(e)?;
        let proj = local_projector(&geom).map_err(|_| Error::SingularProjector(e))?;
        let ops = local_matrices(&geom, &coeffs.element(e), &proj);
        for (i, &vi) in cycle.iter().enumerate() {
            let Some(fi) = vertex_to_free[vi] else { continue };
            for (j, &vj) in cycle.iter().enumerate() {
                let Some(fj) = vertex_to_free[vj] else { continue };
                ta.push((fi, fj, ops.a[(i, j)]));
                tb.push((fi, fj, ops.b[(i, j)]));
                tc.push((fi, fj, ops.c[(i, j)]));
            }
        }
        geometries.push(geom);
        local.push(ops);
    }
    let stiffness = CsrMatrix::from_triplets(n, n, &ta);
    let advection = CsrMatrix::from_triplets(n, n, &tb);
    let bh = stiffness.linear_combination(1.0, &advection, 1.0);
    let ch = CsrMatrix::from_triplets(n, n, &tc);
    Ok(GlobalSystem {
        stiffness,
        advection,
        bh,
        ch,
        free_to_vertex,
        vertex_to_free,
        geometries,
        local,
        coefficients: coeffs.clone(),
    })
}
