use super::*;
use crate::eig::{solve_pairs, SolveOptions};
use crate::mesh::{build_mesh, DomainSpec, MeshFamily};
use crate::vem::{assemble, Coefficients};

fn setup(domain: DomainSpec, family: MeshFamily, res: usize, theta: [f64; 2]) -> (PolygonalMesh, GlobalSystem, EigenPair) {
    let mesh = build_mesh(&domain, family, res).unwrap();
    let system = assemble(&mesh, &Coefficients::uniform(1.0, theta)).unwrap();
    let pair = solve_pairs(&system, &SolveOptions::default()).unwrap().remove(0);
    (mesh, system, pair)
}

fn close(a: &EstimatorReport, b: &EstimatorReport, tol: f64) -> bool {
    a.elements.iter().zip(&b.elements).all(|(x, y)| {
        let scale = a.eta2.max(1e-300);
        (x.theta_sq - y.theta_sq).abs() <= tol * scale
            && (x.r_sq - y.r_sq).abs() <= tol * scale
            && (x.jump_sq - y.jump_sq).abs() <= tol * scale
    }) && (a.eta - b.eta).abs() <= tol * a.eta
}

#[test]
fn boundary_edges_carry_no_jump() {
    let (mesh, system, pair) = setup(DomainSpec::UnitSquare, MeshFamily::Quad, 2, [3.0, 0.0]);
    let field = residual_field(&mesh, &system, pair.lambda, &pair.right, -1.0);
    for (edge, j) in mesh.edges().iter().zip(&field.jumps) {
        if edge.is_boundary() {
            assert_eq!(*j, Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn global_linear_has_zero_estimator() {
    let mesh = build_mesh(&DomainSpec::UnitSquare, MeshFamily::Voro, 5).unwrap();
    let system = assemble(&mesh, &Coefficients::uniform(1.0, [0.0, 0.0])).unwrap();
    let values: Vec<Complex64> =
        mesh.vertices().iter().map(|p| Complex64::new(0.3 + 2.0 * p[0] - p[1], 0.5 * p[1])).collect();
    let r = indicators_vertex_values(&mesh, &system, Complex64::new(0.0, 0.0), &values, -1.0);
    assert!(r.eta < 1e-12, "{}", r.eta);
}

#[test]
fn sums_and_splits() {
    let (mesh, system, pair) = setup(DomainSpec::LShape, MeshFamily::Hexa, 5, [3.0, 0.0]);
    for r in [primal_indicators(&mesh, &system, &pair).unwrap(), dual_indicators(&mesh, &system, &pair).unwrap()] {
        let sum: f64 = r.elements.iter().map(|e| e.eta_sq).sum();
        assert!((r.eta * r.eta - sum).abs() <= 1e-12 * sum);
        assert!((r.r2 + r.theta2 + r.j2 - r.eta2).abs() <= 1e-12 * r.eta2);
        assert!(r.elements.iter().all(|e| e.theta_sq >= 0.0 && e.r_sq >= 0.0 && e.jump_sq >= 0.0));
    }
}

#[test]
fn symmetric_problem_dual_equals_primal() {
    let (mesh, system, pair) = setup(DomainSpec::LShape, MeshFamily::Voro, 5, [0.0, 0.0]);
    let p = primal_indicators(&mesh, &system, &pair).unwrap();
    let d = dual_indicators(&mesh, &system, &pair).unwrap();
    assert!(close(&p, &d, 1e-10));
}

#[test]
fn phase_invariance_and_homogeneity() {
    let (mesh, system, pair) = setup(DomainSpec::LShape, MeshFamily::Hexa, 4, [3.0, 0.0]);
    let base = primal_indicators(&mesh, &system, &pair).unwrap();
    for phi in [0.3, 1.7, -2.9] {
        let mut rotated = pair.clone();
        let c = Complex64::from_polar(1.0, phi);
        rotated.right.iter_mut().for_each(|v| *v *= c);
        rotated.left.iter_mut().for_each(|v| *v *= c);
        assert!(close(&base, &primal_indicators(&mesh, &system, &rotated).unwrap(), 1e-12));
        assert!(close(
            &dual_indicators(&mesh, &system, &pair).unwrap(),
            &dual_indicators(&mesh, &system, &rotated).unwrap(),
            1e-12
        ));
    }
    let c = Complex64::new(1.5, -2.0);
    let v: Vec<Complex64> = pair.right.iter().map(|x| x * c).collect();
    let scaled = indicators(&mesh, &system, pair.lambda, &v, -1.0);
    for (a, b) in base.elements.iter().zip(&scaled.elements) {
        assert!((a.r_sq * c.norm_sqr() - b.r_sq).abs() <= 1e-12 * base.eta2 * c.norm_sqr());
        assert!((a.theta_sq * c.norm_sqr() - b.theta_sq).abs() <= 1e-12 * base.eta2 * c.norm_sqr());
        assert!((a.jump_sq * c.norm_sqr() - b.jump_sq).abs() <= 1e-12 * base.eta2 * c.norm_sqr());
    }
}

#[test]
fn double_conjugation_is_identity() {
    let (mesh, system, pair) = setup(DomainSpec::UnitSquare, MeshFamily::Hexa, 5, [3.0, 1.0]);
    let mut twice = pair.clone();
    twice.left = twice.left.iter().map(|v| v.conj()).map(|v| v.conj()).collect();
    assert_eq!(dual_indicators(&mesh, &system, &pair).unwrap(), dual_indicators(&mesh, &system, &twice).unwrap());
}

#[test]
fn unnormalised_pair_is_rejected() {
    let (mesh, system, mut pair) = setup(DomainSpec::UnitSquare, MeshFamily::Quad, 4, [0.0, 0.0]);
    pair.right.iter_mut().for_each(|v| *v *= 2.0);
    assert!(matches!(primal_indicators(&mesh, &system, &pair), Err(Error::Unnormalized(_))));
}

#[test]
fn effectivity_identities() {
    let l = Complex64::new(11.8897238, 0.0);
    assert_eq!(effectivity(l, l, 0.3).unwrap(), 0.0);
    let lh = Complex64::new(11.9, 0.01);
    let e1 = effectivity(l, lh, 0.2).unwrap();
    let e2 = effectivity(l, lh, 0.4).unwrap();
    assert!((e1 / e2 - 4.0).abs() < 1e-12);
    assert!(effectivity(l, lh, 0.0).is_err());
    // Table row N = 31615: eff 7.0400e-4 at η² = 7.4879e-2 implies
    // |λ_ref − λ_h| ≈ 5.27e-5, consistent with the printed λ_h = 11.890.
    let implied = 7.0400e-4 * 7.4879e-2;
    let lh = Complex64::new(11.8897238 + implied, 0.0);
    assert!((lh.re - 11.890).abs() < 5e-4);
    let eff = effectivity(l, lh, 7.4879e-2f64.sqrt()).unwrap();
    assert!((eff - 7.04e-4).abs() < 1e-8);
}
