//! `vemspectra` command line: `mesh`, `solve` and `study` subcommands.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;

use super::csv::{export_csv, sci5};
use super::vtk::{export_vtk, FieldValues, VtkField};
use crate::adapt::{known_reference, run_study_with, StudyConfig, StudyMode};
use crate::eig::{solve_pairs, EigenPair, SolveOptions};
use crate::error::{Error, Result};
use crate::mesh::{write_mesh_file, DomainSpec, MeshFamily, PolygonalMesh, DEFAULT_VORONOI_SEED};
use crate::vem::{assemble, Coefficients, GlobalSystem};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "VEMSPECTRA_THREADS";

/// Usage errors exit with this status; runtime failures with 1.
pub const USAGE_STATUS: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "vemspectra", version, about = "Virtual element eigensolver for convection-diffusion problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a mesh and write it as a .poly file.
    Mesh(MeshArgs),
    /// Solve for a few eigenpairs on one mesh.
    Solve(SolveArgs),
    /// Run a uniform or adaptive refinement study.
    Study(StudyArgs),
}

#[derive(Debug, Args, Default)]
struct MeshSource {
    /// unit-square, lshape or hshape [default: unit-square]
    #[arg(long)]
    domain: Option<String>,
    /// Mesh family (tria, quad, hexa, voro) or a .poly file to read [default: quad]
    #[arg(long = "mesh", visible_alias = "family")]
    mesh: Option<String>,
    /// Initial resolution (cells per unit length) [default: 8]
    #[arg(long)]
    resolution: Option<usize>,
    /// Seed for Voronoi points and solver start vectors
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct MeshArgs {
    #[command(flatten)]
    source: MeshSource,
    /// Output .poly file
    #[arg(long)]
    out: PathBuf,
    /// Also write a VTK file of the mesh
    #[arg(long)]
    vtk: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct ProblemArgs {
    /// Diffusion coefficient [default: 1]
    #[arg(long)]
    kappa: Option<f64>,
    /// Advection vector [default: 0 0]
    #[arg(long, num_args = 2, value_names = ["VX", "VY"], allow_negative_numbers = true)]
    advect: Option<Vec<f64>>,
    /// Number of eigenpairs to compute [default: 1]
    #[arg(long)]
    num_eigs: Option<usize>,
    /// Shift σ as RE or RE,IM; pairs nearest σ are returned [default: 0]
    #[arg(long, allow_negative_numbers = true)]
    shift: Option<String>,
    /// Residual tolerance [default: 1e-10]
    #[arg(long)]
    tol: Option<f64>,
    /// Problem size up to which the dense solver is used [default: 500]
    #[arg(long)]
    dense_threshold: Option<usize>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: MeshSource,
    #[command(flatten)]
    problem: ProblemArgs,
    /// Directory for eigs.csv and VTK files
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write one VTK file per eigenpair into --out
    #[arg(long, requires = "out")]
    vtk: bool,
}

#[derive(Debug, Args)]
struct StudyArgs {
    #[command(flatten)]
    source: MeshSource,
    #[command(flatten)]
    problem: ProblemArgs,
    /// TOML file with study settings; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// uniform, adaptive, adaptive-dual or adaptive-union [default: uniform]
    #[arg(long)]
    mode: Option<String>,
    /// Number of solve steps [default: 1]
    #[arg(long)]
    steps: Option<usize>,
    /// Marking fraction of the largest indicator [default: 0.5]
    #[arg(long)]
    fraction: Option<f64>,
    /// One-based index of the tracked eigenvalue [default: 1]
    #[arg(long)]
    eig_index: Option<usize>,
    /// Reference eigenvalue. Defaults to the known first eigenvalue on the
    /// unit square and L-shape with constant coefficients, and is otherwise
    /// extrapolated from the run
    #[arg(long, allow_negative_numbers = true)]
    lambda_ref: Option<f64>,
    /// Stop once the number of free dofs reaches this value
    #[arg(long)]
    max_dofs: Option<usize>,
    /// Include dual estimator columns in study.csv (always on for dual and union modes)
    #[arg(long)]
    dual_columns: bool,
    /// Output directory [default: .]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a VTK snapshot of every step into --out
    #[arg(long)]
    vtk: bool,
}

/// Study settings read from a TOML file. Keys mirror the long flags with
/// underscores.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub domain: Option<String>,
    pub mesh: Option<String>,
    pub resolution: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<String>,
    pub steps: Option<usize>,
    pub fraction: Option<f64>,
    pub kappa: Option<f64>,
    pub advect: Option<[f64; 2]>,
    pub num_eigs: Option<usize>,
    pub eig_index: Option<usize>,
    pub shift: Option<String>,
    pub tol: Option<f64>,
    pub dense_threshold: Option<usize>,
    pub lambda_ref: Option<f64>,
    pub max_dofs: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        toml::from_str(&text).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))
    }
}

/// A problem with the arguments themselves, reported with status 2.
#[derive(Debug)]
struct Usage(String);

enum Failure {
    Usage(Usage),
    Run(Error),
}

impl From<Usage> for Failure {
    fn from(u: Usage) -> Self {
        Self::Usage(u)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Run(e)
    }
}

fn usage(msg: impl Into<String>) -> Usage {
    Usage(msg.into())
}

fn parse_shift(s: &str) -> std::result::Result<Complex64, Usage> {
    let bad = || usage(format!("invalid --shift {s:?}: expected RE or RE,IM"));
    let mut parts = s.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = parts.next().transpose().map_err(|_| bad())?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

fn resolve_mesh(
    domain: Option<&str>,
    mesh: Option<&str>,
) -> std::result::Result<(DomainSpec, MeshFamily), Usage> {
    let family = match mesh {
        None => None,
        Some(m) => match m.parse::<MeshFamily>() {
            Ok(MeshFamily::File) => return Err(usage("--mesh file needs a path")),
            Ok(f) => Some(f),
            Err(_) => {
                if domain.is_some() {
                    return Err(usage("--domain cannot be combined with a mesh file"));
                }
                return Ok((DomainSpec::FromFile(PathBuf::from(m)), MeshFamily::File));
            }
        },
    };
    let domain = match domain {
        None => DomainSpec::UnitSquare,
        Some(d) => d.parse().map_err(|e: Error| usage(e.to_string()))?,
    };
    if matches!(domain, DomainSpec::FromFile(_)) {
        return Err(usage("use --mesh <file> to read a mesh file"));
    }
    Ok((domain, family.unwrap_or(MeshFamily::Quad)))
}

struct Problem {
    coefficients: Coefficients,
    solver: SolveOptions,
}

fn resolve_problem(p: &ProblemArgs, cfg: &ConfigFile, seed: Option<u64>) -> std::result::Result<Problem, Usage> {
    let kappa = p.kappa.or(cfg.kappa).unwrap_or(1.0);
    let advect = match &p.advect {
        Some(v) => [v[0], v[1]],
        None => cfg.advect.unwrap_or([0.0, 0.0]),
    };
    let coefficients = Coefficients::uniform(kappa, advect);
    coefficients.validate(1).map_err(|e| usage(e.to_string()))?;
    let mut solver = SolveOptions::default();
    solver.k = p.num_eigs.or(cfg.num_eigs).unwrap_or(solver.k);
    if let Some(s) = p.shift.as_deref().or(cfg.shift.as_deref()) {
        solver.shift = parse_shift(s)?;
    }
    solver.tol = p.tol.or(cfg.tol).unwrap_or(solver.tol);
    solver.dense_threshold = p.dense_threshold.or(cfg.dense_threshold).unwrap_or(solver.dense_threshold);
    if let Some(s) = seed {
        solver.seed = s;
    }
    if solver.k == 0 || !(solver.tol > 0.0) {
        return Err(usage("--num-eigs must be at least 1 and --tol positive"));
    }
    Ok(Problem { coefficients, solver })
}

fn make_mesh(domain: &DomainSpec, family: MeshFamily, resolution: usize, seed: u64) -> Result<PolygonalMesh> {
    StudyConfig { domain: domain.clone(), family, resolution, mesh_seed: seed, ..Default::default() }.initial_mesh()
}

fn pair_fields(system: &GlobalSystem, pair: &EigenPair) -> Vec<VtkField> {
    let dual: Vec<Complex64> = pair.left.iter().map(|z| z.conj()).collect();
    vec![
        VtkField::vertex("u", FieldValues::Complex(system.to_vertices(&pair.right))),
        VtkField::vertex("u_dual", FieldValues::Complex(system.to_vertices(&dual))),
    ]
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })
}

fn run_mesh(args: MeshArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let s = &args.source;
    let (domain, family) = resolve_mesh(s.domain.as_deref(), s.mesh.as_deref())?;
    if matches!(domain, DomainSpec::FromFile(_)) {
        return Err(usage("mesh generates meshes; use --mesh with a family name").into());
    }
    let mesh = make_mesh(&domain, family, s.resolution.unwrap_or(8), s.seed.unwrap_or(DEFAULT_VORONOI_SEED))?;
    write_mesh_file(&args.out, &mesh)?;
    if let Some(vtk) = &args.vtk {
        export_vtk(vtk, &mesh, &[])?;
    }
    let _ = writeln!(
        out,
        "{}: {} vertices, {} elements, {} interior vertices",
        args.out.display(),
        mesh.num_vertices(),
        mesh.num_elements(),
        mesh.num_interior_vertices()
    );
    Ok(())
}

fn run_solve(args: SolveArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let s = &args.source;
    let (domain, family) = resolve_mesh(s.domain.as_deref(), s.mesh.as_deref())?;
    let problem = resolve_problem(&args.problem, &ConfigFile::default(), s.seed)?;
    let mesh = make_mesh(&domain, family, s.resolution.unwrap_or(8), s.seed.unwrap_or(DEFAULT_VORONOI_SEED))?;
    let system = assemble(&mesh, &problem.coefficients)?;
    let pairs = solve_pairs(&system, &problem.solver)?;
    let _ = writeln!(out, "# N = {}", system.num_free());
    let _ = writeln!(out, "# index lambda_re lambda_im residual_right residual_left");
    let mut table = String::from("index,lambda_re,lambda_im,residual_right,residual_left,pairing_warning\n");
    for (i, p) in pairs.iter().enumerate() {
        let warn = if p.pairing_warning { " pairing-warning" } else { "" };
        let _ = writeln!(
            out,
            "{} {:.10} {:+.3e} {:.3e} {:.3e}{warn}",
            i + 1,
            p.lambda.re,
            p.lambda.im,
            p.residual_right,
            p.residual_left
        );
        table.push_str(&format!(
            "{},{:.15e},{:.15e},{:.3e},{:.3e},{}\n",
            i + 1,
            p.lambda.re,
            p.lambda.im,
            p.residual_right,
            p.residual_left,
            p.pairing_warning
        ));
    }
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        super::write_atomic(&dir.join("eigs.csv"), |w| w.write_all(table.as_bytes()))?;
        if args.vtk {
            for (i, p) in pairs.iter().enumerate() {
                export_vtk(&dir.join(format!("pair_{}.vtk", i + 1)), &mesh, &pair_fields(&system, p))?;
            }
        }
    }
    Ok(())
}

fn study_config(args: &StudyArgs) -> std::result::Result<(StudyConfig, PathBuf), Failure> {
    let cfg = match &args.config {
        Some(path) => ConfigFile::load(path).map_err(|e| match e {
            Error::InvalidArgument(m) => Failure::Usage(usage(m)),
            other => Failure::Run(other),
        })?,
        None => ConfigFile::default(),
    };
    let s = &args.source;
    let (domain, family) = resolve_mesh(
        s.domain.as_deref().or(if s.mesh.is_some() { None } else { cfg.domain.as_deref() }),
        s.mesh.as_deref().or(cfg.mesh.as_deref()),
    )?;
    let seed = s.seed.or(cfg.seed);
    let problem = resolve_problem(&args.problem, &cfg, seed)?;
    let mode: StudyMode = match args.mode.as_deref().or(cfg.mode.as_deref()) {
        Some(m) => m.parse().map_err(|e: Error| usage(e.to_string()))?,
        None => StudyMode::Uniform,
    };
    let eig_index = args.eig_index.or(cfg.eig_index).unwrap_or(1);
    if eig_index == 0 {
        return Err(usage("--eig-index is one-based").into());
    }
    let lambda_ref = args
        .lambda_ref
        .or(cfg.lambda_ref)
        .or_else(|| known_reference(&domain, &problem.coefficients, eig_index - 1));
    let config = StudyConfig {
        domain,
        family,
        resolution: s.resolution.or(cfg.resolution).unwrap_or(8),
        mesh_seed: seed.unwrap_or(DEFAULT_VORONOI_SEED),
        mode,
        fraction: args.fraction.or(cfg.fraction).unwrap_or(0.5),
        eig_index: eig_index - 1,
        steps: args.steps.or(cfg.steps).unwrap_or(1),
        lambda_ref,
        coefficients: problem.coefficients,
        solver: problem.solver,
        max_dofs: args.max_dofs.or(cfg.max_dofs),
    };
    config.validate().map_err(|e| usage(e.to_string()))?;
    let out = args.out.clone().or(cfg.out).unwrap_or_else(|| PathBuf::from("."));
    Ok((config, out))
}

fn run_study_cmd(args: StudyArgs, out: &mut dyn Write) -> std::result::Result<(), Failure> {
    let (config, dir) = study_config(&args)?;
    ensure_dir(&dir)?;
    let vtk = args.vtk;
    let result = run_study_with(&config, |snap| {
        if vtk {
            let mut fields = pair_fields(snap.system, snap.pair);
            fields.push(VtkField::element("eta", FieldValues::Real(snap.primal.eta_e())));
            fields.push(VtkField::element("eta_dual", FieldValues::Real(snap.dual.eta_e())));
            export_vtk(&dir.join(format!("step_{:02}.vtk", snap.step)), snap.mesh, &fields)?;
        }
        Ok(())
    })?;
    let dual = args.dual_columns || matches!(config.mode, StudyMode::AdaptiveDual | StudyMode::AdaptiveUnion);
    export_csv(&dir.join("study.csv"), &result, dual)?;
    write_mesh_file(&dir.join("final.poly"), &result.final_mesh)?;

    let _ = writeln!(out, "# step N lambda_re lambda_im eta2 eta*2 eff eff* seconds");
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{} {} {:.8} {:.2e} {} {} {} {} {:.2}",
            r.step,
            r.n_dofs,
            r.lambda.re,
            r.lambda.im,
            sci5(r.primal.eta2),
            sci5(r.dual.eta2),
            sci5(r.eff),
            sci5(r.eff_dual),
            r.seconds
        );
    }
    if let Some(x) = &result.extrapolation {
        let _ = writeln!(out, "# extrapolated lambda_ref = {:.8} (exponent {:.3})", x.lambda_ref, x.exponent);
    }
    if let Some(r) = result.rate_lambda {
        let _ = writeln!(out, "# eigenvalue error rate vs N: {r:.3}");
    }
    if let Some(r) = result.rate_eta {
        let _ = writeln!(out, "# eta^2 rate vs N: {r:.3}");
    }
    Ok(())
}

fn apply_thread_limit() -> std::result::Result<(), Usage> {
    let Ok(v) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| usage(format!("{THREADS_ENV}={v:?} is not a thread count")))?;
    faer::set_global_parallelism(if n <= 1 { faer::Par::Seq } else { faer::Par::rayon(n) });
    Ok(())
}

/// Parses `argv` (including the program name), runs the subcommand and
/// returns the process exit status.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    dispatch(argv, &mut out)
}

/// As [`parse_and_dispatch`] with regular output sent to `out`.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let status = if e.use_stderr() { USAGE_STATUS } else { 0 };
            let _ = e.print();
            return status;
        }
    };
    let result = apply_thread_limit().map_err(Failure::from).and_then(|()| match cli.command {
        Command::Mesh(a) => run_mesh(a, out),
        Command::Solve(a) => run_solve(a, out),
        Command::Study(a) => run_study_cmd(a, out),
    });
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(Usage(m))) => {
            eprintln!("error: {m}\n\nFor more information, try '--help'.");
            USAGE_STATUS
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            1
        }
    }
}
