use super::*;

#[test]
fn mark_rule() {
    assert_eq!(mark_values(&[1.0, 0.6, 0.4], 0.5), vec![0, 1]);
    assert_eq!(mark_values(&[0.3; 5], 0.5), vec![0, 1, 2, 3, 4]);
    assert_eq!(mark_values(&[0.2, 0.9, 0.5, 0.9], 1.0), vec![1, 3]);
    let eta = [0.13, 0.7, 0.35, 0.349, 0.02];
    let scaled: Vec<f64> = eta.iter().map(|v| v * 37.5).collect();
    assert_eq!(mark_values(&eta, 0.5), mark_values(&scaled, 0.5));
}

#[test]
fn mode_parsing() {
    assert_eq!("adaptive".parse::<StudyMode>().unwrap(), StudyMode::AdaptivePrimal);
    assert_eq!("adaptive-dual".parse::<StudyMode>().unwrap(), StudyMode::AdaptiveDual);
    assert!("sometimes".parse::<StudyMode>().is_err());
}

#[test]
fn single_step_records_one_row() {
    let cfg = StudyConfig { resolution: 4, steps: 1, ..Default::default() };
    let r = run_study(&cfg).unwrap();
    assert_eq!(r.rows.len(), 1);
    assert_eq!(r.final_mesh.generation(), 0);
}

#[test]
fn uniform_square_converges_at_rate_one() {
    let exact = 2.0 * std::f64::consts::PI.powi(2);
    let cfg = StudyConfig { resolution: 16, steps: 3, lambda_ref: Some(exact), ..Default::default() };
    let r = run_study(&cfg).unwrap();
    assert!(r.rows.windows(2).all(|w| w[1].n_dofs > w[0].n_dofs));
    let rate = r.rate_lambda.unwrap();
    assert!((rate + 1.0).abs() < 0.15, "{rate}");
}

#[test]
fn adaptive_l_shape_targets_the_corner() {
    let cfg = StudyConfig {
        domain: DomainSpec::LShape,
        family: MeshFamily::Hexa,
        resolution: 3,
        mode: StudyMode::AdaptivePrimal,
        steps: 7,
        coefficients: Coefficients::uniform(1.0, [3.0, 0.0]),
        ..Default::default()
    };
    let r = run_study(&cfg).unwrap();
    let mesh = &r.final_mesh;
    let smallest = (0..mesh.num_elements())
        .map(|e| mesh.element_geometry(e).unwrap())
        .min_by(|a, b| a.diameter.total_cmp(&b.diameter))
        .unwrap();
    assert!(smallest.centroid[0].hypot(smallest.centroid[1]) < 0.1, "{:?}", smallest.centroid);
}

#[test]
fn study_is_reproducible() {
    let cfg = StudyConfig {
        domain: DomainSpec::HShape,
        family: MeshFamily::Voro,
        resolution: 3,
        mode: StudyMode::AdaptiveUnion,
        steps: 3,
        coefficients: Coefficients::uniform(1.0, [3.0, 0.0]),
        ..Default::default()
    };
    let strip = |r: StudyResult| {
        r.rows.into_iter().map(|row| format!("{:?}", StudyRow { seconds: 0.0, ..row })).collect::<Vec<_>>()
    };
    assert_eq!(strip(run_study(&cfg).unwrap()), strip(run_study(&cfg).unwrap()));
}

#[test]
fn invalid_configs() {
    assert!(run_study(&StudyConfig { fraction: 0.0, ..Default::default() }).is_err());
    assert!(run_study(&StudyConfig { steps: 0, ..Default::default() }).is_err());
}

#[test]
fn monotone_tail_skips_the_pre_asymptotic_head() {
    assert_eq!(monotone_tail(&[1.0, 3.0, 2.5, 2.2, 2.1]), 1);
    assert_eq!(monotone_tail(&[3.0, 2.5, 2.2, 2.1]), 0);
    assert_eq!(monotone_tail(&[1.0, 2.0]), 0);
    assert_eq!(monotone_tail(&[2.0, 1.0, 1.5, 1.7]), 1);
}

#[test]
fn reference_values() {
    let c = Coefficients::uniform(1.0, [3.0, 0.0]);
    assert!((known_reference(&DomainSpec::LShape, &c, 0).unwrap() - 11.8897238).abs() < 1e-12);
    assert_eq!(known_reference(&DomainSpec::LShape, &c, 1), None);
    assert_eq!(known_reference(&DomainSpec::HShape, &c, 0), None);
    let c = Coefficients::uniform(2.0, [0.0, 4.0]);
    let pi2 = std::f64::consts::PI.powi(2);
    assert!((known_reference(&DomainSpec::UnitSquare, &c, 0).unwrap() - (4.0 * pi2 + 2.0)).abs() < 1e-12);
}
