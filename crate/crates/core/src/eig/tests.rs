use super::*;
use crate::mesh::{build_mesh, DomainSpec, MeshFamily};
use crate::vem::{assemble, Coefficients};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn system(domain: DomainSpec, family: MeshFamily, res: usize, coeffs: Coefficients) -> GlobalSystem {
    let m = build_mesh(&domain, family, res).unwrap();
    assemble(&m, &coeffs).unwrap()
}

fn random_system(seed: u64) -> GlobalSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let families = [MeshFamily::Quad, MeshFamily::Tria, MeshFamily::Hexa, MeshFamily::Voro];
    let family = families[rng.random_range(0..4)];
    let domain = if rng.random_bool(0.5) { DomainSpec::UnitSquare } else { DomainSpec::LShape };
    let res = rng.random_range(5..10);
    let m = build_mesh(&domain, family, res).unwrap();
    let ne = m.num_elements();
    let kappa = (0..ne).map(|_| rng.random_range(0.5..2.0)).collect();
    let theta = [rng.random_range(-4.0..4.0), rng.random_range(-4.0..4.0)];
    assemble(&m, &Coefficients::per_element(kappa, vec![theta; ne]).unwrap()).unwrap()
}

fn dense_opts(k: usize) -> SolveOptions {
    SolveOptions { k, dense_threshold: usize::MAX, ..Default::default() }
}

fn iterative_opts(k: usize) -> SolveOptions {
    SolveOptions { k, dense_threshold: 0, ..Default::default() }
}

#[test]
fn symmetric_case_is_real_and_self_dual() {
    let s = system(DomainSpec::UnitSquare, MeshFamily::Quad, 8, Coefficients::uniform(1.0, [0.0, 0.0]));
    for opts in [dense_opts(3), iterative_opts(3)] {
        let pairs = solve_pairs(&s, &opts).unwrap();
        for p in &pairs {
            assert!(p.lambda.im.abs() <= 1e-9 * p.lambda.norm());
            assert!(p.lambda.re > 0.0);
            assert!(!p.pairing_warning);
        }
        // The first eigenvalue is simple, so its dual vector is the primal one.
        let p = &pairs[0];
        let diff: f64 = p.left.iter().zip(&p.right).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "{diff}");
    }
}

#[test]
fn dense_and_iterative_agree() {
    for seed in 0..20 {
        let s = random_system(seed);
        assert!(s.num_free() <= 500);
        let a = solve_pairs(&s, &dense_opts(4)).unwrap();
        let b = solve_pairs(&s, &iterative_opts(4)).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p.lambda - q.lambda).norm() <= 1e-8 * p.lambda.norm(), "seed {seed}: {} vs {}", p.lambda, q.lambda);
        }
    }
}

#[test]
fn residuals_and_dual_eigenvalues() {
    let s = system(DomainSpec::LShape, MeshFamily::Hexa, 6, Coefficients::uniform(1.0, [3.0, 0.0]));
    for opts in [dense_opts(4), iterative_opts(4)] {
        for p in solve_pairs(&s, &opts).unwrap() {
            assert!(p.residual_right <= 1e-10 && p.residual_left <= 1e-10, "{} {}", p.residual_right, p.residual_left);
            assert!((p.dual_lambda - p.lambda.conj()).norm() <= 1e-8 * p.lambda.norm());
        }
    }
}

#[test]
fn biorthonormal_against_each_other() {
    for seed in 100..105 {
        let s = random_system(seed);
        let pairs = solve_pairs(&s, &dense_opts(5)).unwrap();
        for (i, pi) in pairs.iter().enumerate() {
            for (j, pj) in pairs.iter().enumerate() {
                let g = dot_conj(&pi.left, &s.ch.matvec_complex(&pj.right));
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((g - expected).norm() <= 1e-8, "seed {seed} ({i},{j}): {g}");
            }
        }
    }
}

#[test]
fn normalisation_is_scale_and_phase_invariant() {
    let s = system(DomainSpec::UnitSquare, MeshFamily::Hexa, 6, Coefficients::uniform(1.0, [3.0, 1.0]));
    let pairs = solve_pairs(&s, &dense_opts(2)).unwrap();
    let mut scaled = pairs.clone();
    let factor = Complex64::from_polar(7.0, 0.9);
    for p in &mut scaled {
        p.right.iter_mut().for_each(|v| *v *= factor);
        p.left.iter_mut().for_each(|v| *v *= Complex64::new(0.0, 3.0));
    }
    let again = normalize_biorthogonal(scaled, &s.ch).unwrap();
    for (p, q) in pairs.iter().zip(&again) {
        for (a, b) in p.right.iter().zip(&q.right) {
            assert!((a - b).norm() < 1e-12);
        }
        for (a, b) in p.left.iter().zip(&q.left) {
            assert!((a - b).norm() < 1e-10);
        }
    }
    let pivot = pairs[0].right.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap();
    assert!(pivot.im.abs() < 1e-14 && pivot.re > 0.0);
}

#[test]
fn ordering_and_determinism() {
    let s = system(DomainSpec::LShape, MeshFamily::Voro, 8, Coefficients::uniform(1.0, [3.0, 0.0]));
    let a = solve_pairs(&s, &iterative_opts(3)).unwrap();
    let b = solve_pairs(&s, &iterative_opts(3)).unwrap();
    assert_eq!(a, b);
    for w in a.windows(2) {
        assert!(w[0].lambda.norm() <= w[1].lambda.norm() * (1.0 + 1e-10));
    }
}

#[test]
fn shift_selects_nearby_eigenvalues() {
    let s = system(DomainSpec::UnitSquare, MeshFamily::Quad, 10, Coefficients::uniform(1.0, [0.0, 0.0]));
    let all = solve_pairs(&s, &dense_opts(6)).unwrap();
    let target = all[3].lambda + 0.1;
    let near = solve_pairs(&s, &SolveOptions { k: 1, shift: target, dense_threshold: 0, ..Default::default() }).unwrap();
    assert!((near[0].lambda - all[3].lambda).norm() < 1e-8 * all[3].lambda.norm());
}

#[test]
fn rejects_bad_options() {
    let s = system(DomainSpec::UnitSquare, MeshFamily::Quad, 2, Coefficients::uniform(1.0, [0.0, 0.0]));
    assert!(solve_pairs(&s, &SolveOptions { k: 2, ..Default::default() }).is_err());
    assert!(solve_pairs(&s, &SolveOptions { k: 0, ..Default::default() }).is_err());
    assert!(solve_pairs(&s, &SolveOptions { tol: 0.0, ..Default::default() }).is_err());
}
