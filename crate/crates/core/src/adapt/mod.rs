//! Marking, the refinement study loop and convergence-rate fits.

mod fit;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;

use crate::eig::{solve_pairs, EigenPair, SolveOptions};
use crate::error::{Error, Result};
use crate::estimator::{dual_indicators, effectivity, primal_indicators, EstimatorReport};
use crate::mesh::{build_mesh_seeded, read_mesh_file, refine, uniform_refine, DomainSpec, MeshFamily, PolygonalMesh};
use crate::vem::{assemble, Coefficients, GlobalSystem};

pub use fit::{extrapolate_reference, fit_rate, Extrapolation};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StudyMode {
    Uniform,
    /// Mark by the primal indicators `η_E`.
    AdaptivePrimal,
    /// Mark by the dual indicators `η*_E`.
    AdaptiveDual,
    /// Mark elements flagged by either indicator.
    AdaptiveUnion,
}

impl StudyMode {
    pub fn is_adaptive(self) -> bool {
        self != Self::Uniform
    }
}

impl FromStr for StudyMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uniform" => Ok(Self::Uniform),
            "adaptive" | "adaptive-primal" | "primal" => Ok(Self::AdaptivePrimal),
            "adaptive-dual" | "dual" => Ok(Self::AdaptiveDual),
            "adaptive-union" | "union" => Ok(Self::AdaptiveUnion),
            other => Err(Error::InvalidArgument(format!(
                "unknown mode '{other}' (expected uniform, adaptive, adaptive-dual or adaptive-union)"
            ))),
        }
    }
}

impl fmt::Display for StudyMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::AdaptivePrimal => "adaptive",
            Self::AdaptiveDual => "adaptive-dual",
            Self::AdaptiveUnion => "adaptive-union",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub domain: DomainSpec,
    /// Ignored when `domain` is a mesh file.
    pub family: MeshFamily,
    pub resolution: usize,
    pub mesh_seed: u64,
    pub mode: StudyMode,
    pub fraction: f64,
    /// Zero-based position of the tracked eigenvalue in the solver ordering.
    pub eig_index: usize,
    pub steps: usize,
    pub lambda_ref: Option<f64>,
    pub coefficients: Coefficients,
    pub solver: SolveOptions,
    /// Stop refining once the free-dof count reaches this value.
    pub max_dofs: Option<usize>,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::UnitSquare,
            family: MeshFamily::Quad,
            resolution: 8,
            mesh_seed: crate::mesh::DEFAULT_VORONOI_SEED,
            mode: StudyMode::Uniform,
            fraction: 0.5,
            eig_index: 0,
            steps: 1,
            lambda_ref: None,
            coefficients: Coefficients::uniform(1.0, [0.0, 0.0]),
            solver: SolveOptions::default(),
            max_dofs: None,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fraction > 0.0 && self.fraction <= 1.0) {
            return Err(Error::InvalidArgument(format!("marking fraction {} not in (0, 1]", self.fraction)));
        }
        if self.steps == 0 {
            return Err(Error::InvalidArgument("at least one step is required".into()));
        }
        if self.resolution == 0 {
            return Err(Error::InvalidArgument("resolution must be at least 1".into()));
        }
        Ok(())
    }

    pub fn initial_mesh(&self) -> Result<PolygonalMesh> {
        match &self.domain {
            DomainSpec::FromFile(path) => read_mesh_file(path),
            d => build_mesh_seeded(d, self.family, self.resolution, self.mesh_seed),
        }
    }
}

/// Global sums of one estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorTotals {
    pub r2: f64,
    pub theta2: f64,
    pub j2: f64,
    pub eta2: f64,
}

impl From<&EstimatorReport> for EstimatorTotals {
    fn from(r: &EstimatorReport) -> Self {
        Self { r2: r.r2, theta2: r.theta2, j2: r.j2, eta2: r.eta2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub step: usize,
    pub n_dofs: usize,
    pub n_elements: usize,
    pub lambda: Complex64,
    pub primal: EstimatorTotals,
    pub dual: EstimatorTotals,
    /// `NaN` without a reference eigenvalue.
    pub eff: f64,
    pub eff_dual: f64,
    pub residual: f64,
    pub min_diameter: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct StudyResult {
    pub config: StudyConfig,
    pub rows: Vec<StudyRow>,
    /// Reference used for the error column: the configured one or an extrapolation.
    pub lambda_ref: Option<f64>,
    pub extrapolation: Option<Extrapolation>,
    /// Slope of `log|λ_ref − λ_h|` against `log N`, over the extrapolation rows when `λ_ref` is extrapolated.
    pub rate_lambda: Option<f64>,
    /// Slope of `log η²` against `log N`.
    pub rate_eta: Option<f64>,
    pub final_mesh: PolygonalMesh,
}

/// Everything computed on one mesh of a study, handed to observers.
pub struct StepSnapshot<'a> {
    pub step: usize,
    pub mesh: &'a PolygonalMesh,
    pub system: &'a GlobalSystem,
    pub pair: &'a EigenPair,
    pub primal: &'a EstimatorReport,
    pub dual: &'a EstimatorReport,
}

/// `{E : η_E ≥ fraction · max η}`, never empty for a nonempty report.
pub fn mark(report: &EstimatorReport, fraction: f64) -> Vec<usize> {
    mark_values(&report.eta_e(), fraction)
}

pub fn mark_values(eta: &[f64], fraction: f64) -> Vec<usize> {
    let max = eta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let threshold = fraction * max;
    (0..eta.len()).filter(|&e| eta[e] >= threshold || eta[e] == max).collect()
}

/// Smallest Dirichlet eigenvalue of the Laplacian on the L-shaped domain.
pub const LSHAPE_LAPLACE_EIGENVALUE: f64 = 9.6397238;

/// Known first eigenvalue for spatially constant coefficients: writing
/// `u = exp(ϑ·x / 2κ) w` turns the problem into `-κΔw + |ϑ|²/(4κ) w = λw`.
/// Only the unit square and the L-shape have a tabulated Laplace eigenvalue.
pub fn known_reference(domain: &DomainSpec, coefficients: &Coefficients, eig_index: usize) -> Option<f64> {
    let laplace = match domain {
        DomainSpec::UnitSquare => 2.0 * std::f64::consts::PI.powi(2),
        DomainSpec::LShape => LSHAPE_LAPLACE_EIGENVALUE,
        _ => return None,
    };
    let (kappa, adv) = coefficients.constant()?;
    (eig_index == 0).then(|| kappa * laplace + (adv[0] * adv[0] + adv[1] * adv[1]) / (4.0 * kappa))
}

/// Start of the longest trailing run on which `values` is monotone. The
/// extrapolation model is monotone in N, so earlier rows are left out.
pub fn monotone_tail(values: &[f64]) -> usize {
    let n = values.len();
    if n < 3 {
        return 0;
    }
    let sign = (values[n - 1] - values[n - 2]).signum();
    let mut start = n - 2;
    while start > 0 && (values[start] - values[start - 1]).signum() == sign {
        start -= 1;
    }
    start
}

pub fn run_study(config: &StudyConfig) -> Result<StudyResult> {
    run_study_with(config, |_| Ok(()))
}

/// Runs the study, calling `observe` once per step after the indicators are known.
pub fn run_study_with<F>(config: &StudyConfig, mut observe: F) -> Result<StudyResult>
where
    F: FnMut(&StepSnapshot<'_>) -> Result<()>,
{
    config.validate()?;
    let mut mesh = config.initial_mesh()?;
    let mut rows = Vec::with_capacity(config.steps);
    let wrap = |step: usize| move |e: Error| Error::Step { step, source: Box::new(e) };
    let mut solver = config.solver.clone();
    solver.k = solver.k.max(config.eig_index + 1);

    for step in 0..config.steps {
        let start = Instant::now();
        let system = assemble(&mesh, &config.coefficients).map_err(wrap(step))?;
        let pairs = solve_pairs(&system, &solver).map_err(wrap(step))?;
        let pair = &pairs[config.eig_index];
        let primal = primal_indicators(&mesh, &system, pair).map_err(wrap(step))?;
        let dual = dual_indicators(&mesh, &system, pair).map_err(wrap(step))?;
        observe(&StepSnapshot { step, mesh: &mesh, system: &system, pair, primal: &primal, dual: &dual })
            .map_err(wrap(step))?;

        let eff_of = |eta: f64| match config.lambda_ref {
            Some(l) if eta > 0.0 => effectivity(Complex64::new(l, 0.0), pair.lambda, eta).unwrap_or(f64::NAN),
            _ => f64::NAN,
        };
        rows.push(StudyRow {
            step,
            n_dofs: system.num_free(),
            n_elements: mesh.num_elements(),
            lambda: pair.lambda,
            primal: (&primal).into(),
            dual: (&dual).into(),
            eff: eff_of(primal.eta),
            eff_dual: eff_of(dual.eta),
            residual: pair.residual_right.max(pair.residual_left),
            min_diameter: system.geometries.iter().map(|g| g.diameter).fold(f64::INFINITY, f64::min),
            seconds: start.elapsed().as_secs_f64(),
        });

        let last = step + 1 == config.steps;
        let capped = config.max_dofs.is_some_and(|cap| system.num_free() >= cap);
        if last || capped {
            break;
        }
        mesh = match config.mode {
            StudyMode::Uniform => uniform_refine(&mesh),
            StudyMode::AdaptivePrimal => refine(&mesh, &mark(&primal, config.fraction)),
            StudyMode::AdaptiveDual => refine(&mesh, &mark(&dual, config.fraction)),
            StudyMode::AdaptiveUnion => {
                let mut m = mark(&primal, config.fraction);
                m.extend(mark(&dual, config.fraction));
                m.sort_unstable();
                m.dedup();
                refine(&mesh, &m)
            }
        }
        .map_err(wrap(step))?;
    }

    let ns: Vec<f64> = rows.iter().map(|r| r.n_dofs as f64).collect();
    let lambdas: Vec<f64> = rows.iter().map(|r| r.lambda.re).collect();
    // Extrapolated references come from the monotone tail, and the rate is
    // fitted on the same rows.
    let tail = if config.lambda_ref.is_none() { monotone_tail(&lambdas) } else { 0 };
    let extrapolation = if config.lambda_ref.is_none() {
        (lambdas.len() - tail >= 4).then(|| extrapolate_reference(&ns[tail..], &lambdas[tail..]).ok()).flatten()
    } else {
        None
    };
    let lambda_ref = config.lambda_ref.or(extrapolation.as_ref().map(|x| x.lambda_ref));
    if let (None, Some(l)) = (config.lambda_ref, lambda_ref) {
        let l = Complex64::new(l, 0.0);
        for row in &mut rows {
            row.eff = effectivity(l, row.lambda, row.primal.eta2.sqrt()).unwrap_or(f64::NAN);
            row.eff_dual = effectivity(l, row.lambda, row.dual.eta2.sqrt()).unwrap_or(f64::NAN);
        }
    }
    let rate_lambda = lambda_ref.and_then(|l| {
        let errs: Vec<f64> = rows[tail..].iter().map(|r| (r.lambda - l).norm()).collect();
        fit_rate(&ns[tail..], &errs).ok()
    });
    let etas: Vec<f64> = rows.iter().map(|r| r.primal.eta2).collect();
    let rate_eta = fit_rate(&ns, &etas).ok();
    Ok(StudyResult { config: config.clone(), rows, lambda_ref, extrapolation, rate_lambda, rate_eta, final_mesh: mesh })
}

#[cfg(test)]
mod tests;
