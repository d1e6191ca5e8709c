use stcmc::acceptance::{eigenvalue_law, run_criterion, Outcome, CRITERIA};

/// Criteria that are expected to fail, with the reason checked separately.
const KNOWN_FAILURES: [usize; 1] = [5];

#[test]
fn acceptance_suite() {
    let outcomes: Vec<Outcome> = (1..=CRITERIA).map(|id| run_criterion(id).unwrap()).collect();
    for o in &outcomes {
        println!("{}", o.line());
    }
    for o in &outcomes {
        if KNOWN_FAILURES.contains(&o.id) {
            assert!(!o.passed, "criterion {} now passes; drop it from KNOWN_FAILURES", o.id);
        } else {
            assert!(o.passed, "{}", o.line());
        }
    }
}

/// The translational eigenvalues follow `2/sigma^2 + 4m/sigma^3`, not
/// `2/sigma^2 + 6m/sigma^3`: the `int Ric(nu, nu) f_i^2` term contributes
/// `-2m/sigma^3` at the same order. So the normalized shift tends to `2/3`
/// of the Hawking mass, and the prediction that keeps the Ricci term is the
/// one that converges.
#[test]
fn eigenvalue_shift_tends_to_two_thirds() {
    let law = eigenvalue_law().unwrap();
    assert_eq!(law.leaves.len(), 3);
    let gaps: Vec<f64> = law.leaves.iter().map(|l| (l.normalized / l.hawking_mass - 2.0 / 3.0).abs()).collect();
    println!("ratio to m_H: {:?}", law.leaves.iter().map(|l| l.normalized / l.hawking_mass).collect::<Vec<_>>());
    assert!(gaps.windows(2).all(|w| w[1] < 0.6 * w[0]), "{gaps:?}");
    assert!(gaps[2] < 0.03 * 2.0 / 3.0, "{gaps:?}");
    let ricci: Vec<f64> = law.leaves.iter().map(|l| l.ricci_gap).collect();
    assert!(ricci.windows(2).all(|w| w[1] < w[0]), "{ricci:?}");
    assert!(ricci[2] < 1e-3, "{ricci:?}");
    for l in &law.leaves {
        assert!(l.fourth > 5.0 / (l.sigma * l.sigma));
    }
    assert!(!law.passes());
}
