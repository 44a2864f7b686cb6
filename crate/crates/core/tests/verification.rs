use bivcox::model::propagate_pickands;
use bivcox::verify::{check_copula_axioms, check_min_id, check_pickands, check_pqd, check_tp2, check_tp2_differential, GridSpec};
use bivcox::{Copula, LinkValues, PickandsFunction};

fn matrix() -> Vec<Copula> {
    vec![
        Copula::independence(),
        Copula::clayton(0.5).unwrap(),
        Copula::clayton(3.0).unwrap(),
        Copula::gumbel(1.5).unwrap(),
        Copula::gumbel(3.0).unwrap(),
        Copula::amh(0.6).unwrap(),
        Copula::gumbel_barnett(0.5).unwrap(),
        Copula::gumbel_barnett(0.1).unwrap(),
        Copula::asymmetric_logistic(0.4, 0.9, 3.0).unwrap(),
        Copula::countermonotone(),
    ]
}

#[test]
fn standard_copulas_pass_axioms() {
    let grid = GridSpec::default();
    for c in matrix() {
        let r = check_copula_axioms(&c, &grid);
        assert!(r.passed, "{}: {}", c.describe(), r.summary());
    }
}

#[test]
fn tp2_implies_pqd() {
    let grid = GridSpec::default();
    for c in matrix() {
        let tp2 = check_tp2(&c, &grid);
        let pqd = check_pqd(&c, &grid);
        if tp2.passed {
            assert!(pqd.passed, "{} is TP2 but not PQD: {}", c.describe(), pqd.summary());
        }
    }
}

#[test]
fn min_id_agrees_with_tp2() {
    let grid = GridSpec::new(24, 1e-3).unwrap();
    // Weak TP2 failures show up only at small γ.
    let gammas = [0.01, 0.1, 0.5, 2.0];
    for c in matrix() {
        if c.describe().starts_with("countermonotone") {
            continue;
        }
        let tp2 = check_tp2(&c, &grid);
        let min_id = check_min_id(&c, &gammas, &grid).unwrap();
        assert_eq!(tp2.passed, min_id.passed, "{}", c.describe());
    }
}

#[test]
fn gumbel_barnett_fails_every_tp2_form() {
    let c = Copula::gumbel_barnett(0.5).unwrap();
    let grid = GridSpec::default();
    let r = check_tp2(&c, &grid);
    assert!(!r.passed && r.witness.len() == 2 && r.worst_violation > 1e-6);
    assert!(r.summary().contains("violation"));
    assert!(!check_tp2_differential(&c, &grid).passed);
    let m = check_min_id(&c, &[0.1], &grid).unwrap();
    assert!(!m.passed && !m.witness.is_empty());
}

#[test]
fn clayton_and_gumbel_pass_every_tp2_form() {
    let grid = GridSpec::default();
    for c in [Copula::clayton(3.0).unwrap(), Copula::gumbel(3.0).unwrap()] {
        assert!(check_tp2(&c, &grid).passed);
        assert!(check_tp2_differential(&c, &grid).passed);
        assert!(check_pqd(&c, &grid).passed);
        assert!(check_min_id(&c, &[0.1, 0.5, 2.0], &grid).unwrap().passed);
    }
}

#[test]
fn product_determinants_vanish() {
    let r = check_tp2(&Copula::independence(), &GridSpec::default());
    assert!(r.passed);
    assert_eq!(r.worst_violation, 0.0);
    assert!(r.summary().contains("no violation found at resolution 64"));
}

#[test]
fn reports_are_deterministic_and_serializable() {
    let c = Copula::gumbel_barnett(0.5).unwrap();
    let grid = GridSpec::new(20, 0.01).unwrap();
    let a = check_tp2(&c, &grid);
    let b = check_tp2(&c, &grid);
    assert_eq!(a, b);
    let json = serde_json::to_value(&a).unwrap();
    assert_eq!(json["property"], "tp2");
    assert_eq!(json["passed"], false);
}

#[test]
fn propagated_dependence_functions_pass_on_a_sweep() {
    let mut failures = 0;
    for i in 0..1000 {
        let theta = 1.0 + (i % 37) as f64 * 0.4;
        let phi = (-2.0 + 4.0 * ((i * 7919) % 1000) as f64 / 999.0).exp();
        let psi = (-2.0 + 4.0 * ((i * 104_729) % 1000) as f64 / 999.0).exp();
        let a = PickandsFunction::gumbel_logistic(theta).unwrap();
        let b = propagate_pickands(&a, &LinkValues::new(phi, psi).unwrap()).unwrap();
        if !check_pickands(&b, 1001).unwrap().passed {
            failures += 1;
        }
    }
    assert_eq!(failures, 0);
}

#[test]
fn grid_spec_rejects_degenerate_grids() {
    assert!(GridSpec::new(2, 0.1).is_err());
    assert!(GridSpec::new(10, 0.5).is_err());
    assert!(GridSpec::new(10, 0.0).is_err());
}
