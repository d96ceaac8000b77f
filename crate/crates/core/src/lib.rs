//! Lowest-order virtual element discretisation of the convection-diffusion
//! eigenvalue problem `-div(κ∇u) + ϑ·∇u = λu` with homogeneous Dirichlet data,
//! on general polygonal meshes.
//!
//! The crate computes right (primal) and left (dual) eigenpairs of the
//! discrete pencil, residual a posteriori indicators for both, and runs
//! uniform or adaptive refinement studies.
//!
//! ```no_run
//! use vemspectra::adapt::{run_study, StudyConfig, StudyMode};
//! use vemspectra::mesh::{DomainSpec, MeshFamily};
//! use vemspectra::vem::Coefficients;
//!
//! let config = StudyConfig {
//!     domain: DomainSpec::LShape,
//!     family: MeshFamily::Hexa,
//!     resolution: 14,
//!     mode: StudyMode::AdaptivePrimal,
//!     steps: 8,
//!     lambda_ref: Some(11.8897238),
//!     coefficients: Coefficients::uniform(1.0, [3.0, 0.0]),
//!     ..Default::default()
//! };
//! let result = run_study(&config)?;
//! for row in &result.rows {
//!     println!("{} {:.5} {:.3e}", row.n_dofs, row.lambda.re, row.primal.eta2);
//! }
//! # Ok::<(), vemspectra::Error>(())
//! ```

pub mod adapt;
pub mod cli_io;
pub mod eig;
pub mod error;
pub mod estimator;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod scalar;
pub mod vem;

pub use adapt::{run_study, StudyConfig, StudyMode, StudyResult};
pub use eig::{solve_pairs, EigenPair, SolveOptions};
pub use error::{Error, PolygonError, Result};
pub use estimator::{dual_indicators, primal_indicators, EstimatorReport};
pub use mesh::{build_mesh, DomainSpec, MeshFamily, PolygonalMesh};
pub use vem::{assemble, Coefficients, GlobalSystem};

pub type Geometry = geometry::ElementGeometry<f64>;
pub type Geometry32 = geometry::ElementGeometry<f32>;
pub type LocalOps = vem::LocalOperators<f64>;
pub type LocalOps32 = vem::LocalOperators<f32>;
