use proptest::prelude::*;
use stcmc::charges::*;
use stcmc::chart::{DataProvider, Mat3, PerturbationTarget, PerturbationTerm, ProviderSpec};
use stcmc::solver::{foliate, SolveConfig};
use stcmc::StcmcError;

const RADII: [f64; 4] = [50.0, 100.0, 200.0, 400.0];

fn rotation(axis: [f64; 3], angle: f64) -> Mat3 {
    let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
    let [x, y, z] = axis.map(|a| a / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

fn apply(o: &Mat3, v: [f64; 3]) -> [f64; 3] {
    std::array::from_fn(|i| (0..3).map(|j| o[i][j] * v[j]).sum())
}

#[test]
fn schwarzschild_energy_flux_is_closed_form() {
    // for g = delta + 2m/(r - 2m) w w the integrand is 4m/(r (r - 2m)), so E(s) = m s / (s - 2m)
    for m in [0.5, 1.0, 2.0] {
        let report = adm_charges(&DataProvider::schwarzschild(m).unwrap(), &RADII).unwrap();
        for (s, e) in report.radii.iter().zip(&report.energy) {
            let exact = m * s / (s - 2.0 * m);
            assert!((e - exact).abs() < 1e-12 * exact, "s = {s}: {e} vs {exact}");
        }
        if m <= 1.0 {
            assert!((report.energy_limit - m).abs() < 1e-3 * m, "{}", report.energy_limit);
        }
        assert!(report.momentum_limit.iter().all(|p| *p == 0.0));
        assert!((report.mass.unwrap() - report.energy_limit).abs() < 1e-15);
    }
}

#[test]
fn euclidean_charges_vanish() {
    let provider = DataProvider::euclidean();
    let table = ChargeTable::compute(&provider, &RADII).unwrap();
    assert!(table.charges.energy.iter().all(|e| e.abs() < 1e-15));
    assert_eq!(table.charges.mass, Some(0.0));
    assert!(table.centers.is_none() && table.evolution.is_none());
    assert_eq!(stcmc_center_coordinate(&provider, &RADII, 0.0), Err(StcmcError::ZeroEnergy));
    assert_eq!(bom_center(&provider, &RADII, 1e-13), Err(StcmcError::ZeroEnergy));
}

#[test]
fn mass_from_energy_and_momentum() {
    assert_eq!(adm_mass(1.0, [0.0; 3]).unwrap(), 1.0);
    assert_eq!(adm_mass(0.0, [0.0; 3]).unwrap(), 0.0);
    assert!((adm_mass(1.0, [0.6, 0.0, 0.0]).unwrap() - 0.8).abs() < 1e-15);
    assert!(matches!(adm_mass(0.5, [0.0, 0.6, 0.0]), Err(StcmcError::SpacelikeEnergyMomentum { .. })));
}

#[test]
fn graphical_slice_energy_and_momentum() {
    let provider = DataProvider::graphical(1.0, [1.0, 0.0, 0.0]).unwrap();
    let report = adm_charges(&provider, &RADII).unwrap();
    assert!((report.energy_limit - 1.0).abs() < 1e-2, "{}", report.energy_limit);
    let norms: Vec<f64> = report.momentum.iter().map(|p| p.iter().map(|v| v * v).sum::<f64>().sqrt()).collect();
    assert!(norms.windows(2).all(|w| w[1] < w[0]), "{norms:?}");
    assert!(norms[3] < 1e-2);
}

#[test]
fn cancellation_on_graphical_slice() {
    let provider = DataProvider::graphical(1.0, [1.0, 0.0, 0.0]).unwrap();
    let radii = log_grid(1e2, 1e4, 41).unwrap();
    let table = ChargeTable::compute(&provider, &radii).unwrap();
    let c = table.centers.as_ref().unwrap();
    let bom: Vec<f64> = c.bom.iter().map(|v| v[0]).collect();
    let z: Vec<f64> = c.correction.iter().map(|v| v[0]).collect();
    let ob = oscillation_fit(&radii, &bom).unwrap();
    let oz = oscillation_fit(&radii, &z).unwrap();
    assert!((ob.cos - 1.0 / 3.0).abs() < 0.05 / 3.0, "{ob:?}");
    assert!((oz.cos + 1.0 / 3.0).abs() < 0.05 / 3.0, "{oz:?}");
    for (s, b) in radii.iter().zip(&bom) {
        assert!((b - s.ln().cos() / 3.0).abs() < 10.0 / s, "s = {s}");
    }
    assert!(c.bom_trend[0].diverges && c.correction_trend[0].diverges);
    assert!(c.bom_limit().is_none());
    assert!(c.stcmc_trend.iter().all(|t| !t.diverges));
    let limit = c.stcmc_limit().unwrap();
    assert!(limit.iter().all(|v| v.abs() < 1e-3), "{limit:?}");

    let at_200 = ChargeTable::compute(&provider, &[200.0]).unwrap();
    let v = at_200.centers.unwrap().stcmc[0];
    assert!(v.iter().map(|x| x * x).sum::<f64>().sqrt() <= 0.05);
    let norms: Vec<f64> = c.stcmc.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    assert!(log_slope(&radii, &norms) <= -0.8);
}

#[test]
fn center_is_exact_sum_of_parts() {
    let provider = DataProvider::graphical(1.0, [0.3, -0.5, 0.8]).unwrap();
    let c = stcmc_center_coordinate(&provider, &RADII, 1.0).unwrap();
    for i in 0..RADII.len() {
        for k in 0..3 {
            assert_eq!(c.stcmc[i][k], c.bom[i][k] + c.correction[i][k]);
        }
    }
    assert_eq!(bom_center(&provider, &RADII, 1.0).unwrap(), c.bom);
    assert_eq!(correction_z(&provider, &RADII, 1.0).unwrap(), c.correction);
}

#[test]
fn center_first_period_peak() {
    // cos(ln s) = 1 at s = e^(2 pi)
    let provider = DataProvider::graphical(1.0, [1.0, 0.0, 0.0]).unwrap();
    let s = (2.0 * std::f64::consts::PI).exp();
    let bom = bom_center(&provider, &[s], 1.0).unwrap()[0];
    assert!((bom[0] - 1.0 / 3.0).abs() < 2.0 / s, "{bom:?}");
}

#[test]
fn translated_schwarzschild_center() {
    let c = [3.0, -2.0, 1.5];
    let provider = DataProvider::schwarzschild(1.0).unwrap().translated(c).unwrap();
    let radii = log_grid(100.0, 3200.0, 6).unwrap();
    let table = ChargeTable::compute(&provider, &radii).unwrap();
    assert!((table.charges.energy_limit - 1.0).abs() < 1e-3);
    let limit = table.centers.unwrap().stcmc_limit().unwrap();
    for i in 0..3 {
        assert!((limit[i] - c[i]).abs() < 1e-3, "{limit:?}");
    }
}

#[test]
fn canonical_schwarzschild_centers_vanish() {
    let c = stcmc_center_coordinate(&DataProvider::schwarzschild(1.0).unwrap(), &RADII, 1.0).unwrap();
    assert!(c.stcmc.iter().flatten().all(|v| v.abs() < 1e-9));
    assert!(c.correction.iter().flatten().all(|v| *v == 0.0));
    assert!(c.stcmc_trend.iter().all(|t| !t.diverges));
}

#[test]
fn rotated_data_rotates_every_center() {
    let o = rotation([1.0, 2.0, -0.5], 0.7);
    let u = [1.0, 0.0, 0.0];
    let radii = [120.0, 400.0, 1500.0, 6000.0];
    let base = ChargeTable::compute(&DataProvider::graphical(1.0, u).unwrap(), &radii).unwrap();
    let turned = ChargeTable::compute(&DataProvider::graphical(1.0, apply(&o, u)).unwrap(), &radii).unwrap();
    let moved = euclidean_motion_transform(&base, o, [0.0; 3]).unwrap();
    let (a, b) = (turned.centers.unwrap(), moved.centers.unwrap());
    for i in 0..radii.len() {
        for k in 0..3 {
            assert!((a.bom[i][k] - b.bom[i][k]).abs() < 1e-10, "{} {}", radii[i], a.bom[i][k] - b.bom[i][k]);
            assert!((a.correction[i][k] - b.correction[i][k]).abs() < 1e-10);
        }
        assert!((turned.charges.energy[i] - base.charges.energy[i]).abs() < 1e-10);
    }
}

#[test]
fn euclidean_motions() {
    let provider = DataProvider::graphical(1.0, [0.0, 1.0, 0.0]).unwrap();
    let table = ChargeTable::compute(&provider, &RADII).unwrap();
    let id = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    assert_eq!(euclidean_motion_transform(&table, id, [0.0; 3]).unwrap(), table);

    let t = [1.0, 2.0, 3.0];
    let shifted = euclidean_motion_transform(&table, id, t).unwrap();
    let (a, b) = (table.centers.as_ref().unwrap(), shifted.centers.as_ref().unwrap());
    assert_eq!(b.correction, a.correction);
    for i in 0..RADII.len() {
        for k in 0..3 {
            assert!((b.bom[i][k] - a.bom[i][k] - t[k]).abs() < 1e-12);
        }
    }
    let skew = [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    assert!(matches!(euclidean_motion_transform(&table, skew, t), Err(StcmcError::NotOrthogonal(_))));
}

#[test]
fn velocity_matches_momentum_over_energy() {
    let schw = DataProvider::schwarzschild(1.0).unwrap();
    let ev = velocity_integral(&schw, &RADII, 1.0, [0.0; 3]).unwrap();
    assert!(ev.velocity.iter().flatten().all(|v| *v == 0.0));

    let graph = DataProvider::graphical(1.0, [1.0, 0.0, 0.0]).unwrap();
    let radii = log_grid(100.0, 1e4, 12).unwrap();
    let table = ChargeTable::compute(&graph, &radii).unwrap();
    let ev = table.evolution.unwrap();
    assert!(ev.discrepancy < 1e-2, "{}", ev.discrepancy);
    let gap: Vec<f64> = ev.velocity.iter().map(|v| (v[0] - ev.expected[0]).abs()).collect();
    assert!(gap.windows(2).all(|w| w[1] < w[0]), "{gap:?}");
}

#[test]
fn csv_layout() {
    let table = ChargeTable::compute(&DataProvider::schwarzschild(1.0).unwrap(), &RADII).unwrap();
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "radius,E,P1,P2,P3,CBOM1,CBOM2,CBOM3,Z1,Z2,Z3,CSTCMC1,CSTCMC2,CSTCMC3,V1,V2,V3");
    assert_eq!(lines.len(), RADII.len() + 1);
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first.len(), 17);
    assert_eq!(first[0], "5.0000000000000000e1");
    let e: f64 = first[1].parse().unwrap();
    assert_eq!(e, table.charges.energy[0]);
}

#[test]
fn energy_density_moments() {
    let shells = mu_moment_shells(&DataProvider::schwarzschild(1.0).unwrap(), &[20.0, 40.0]).unwrap();
    assert!(shells.iter().all(|s| s.moments.iter().all(|m| *m < 1e-10)));
    let bump = ProviderSpec::CustomPerturbation {
        perturbation_terms: vec![PerturbationTerm {
            target: PerturbationTarget::Metric,
            component: [0, 0],
            coefficient: 1.0,
            decay: 1.0,
            angular: [0, 0, 0],
        }],
    };
    let shells = mu_moment_shells(&DataProvider::new(bump).unwrap(), &[10.0, 20.0]).unwrap();
    assert!(shells.iter().all(|s| s.moments.iter().all(|m| *m > 0.0)));
    // mu ~ r^-3 on this data, so the shell moments level off
    let ratio = shells[0].moments[0] / shells[1].moments[0];
    assert!((ratio - 1.0).abs() < 0.1, "{ratio}");
}

#[test]
fn foliation_center_limit() {
    let provider = DataProvider::schwarzschild(1.0).unwrap();
    let config = SolveConfig::with_band(8);
    let fol = foliate(&provider, &[20.0, 40.0, 80.0], None, &config).unwrap();
    let center = stcmc_center_foliation(&fol).unwrap();
    assert!(center.converged);
    assert!(center.limit.unwrap().iter().all(|v| v.abs() < 1e-6));

    let short = foliate(&provider, &[20.0, 40.0], None, &config).unwrap();
    assert_eq!(stcmc_center_foliation(&short), Err(StcmcError::InsufficientLeaves { needed: 3, got: 2 }));
}

#[test]
fn invalid_inputs() {
    let p = DataProvider::schwarzschild(1.0).unwrap();
    assert!(matches!(adm_charges(&p, &[]), Err(StcmcError::InsufficientLeaves { .. })));
    assert_eq!(adm_charges(&p, &[100.0, -1.0]), Err(StcmcError::NonpositiveRadius(-1.0)));
    assert!(matches!(adm_charges(&p, &[1.5]), Err(StcmcError::HorizonReached { .. })));
    assert!(log_grid(10.0, 1.0, 5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_law_is_recovered(c0 in -2.0..2.0f64, c1 in 0.5..20.0f64, p in 0.5..3.0f64) {
        let s = log_grid(20.0, 2000.0, 8).unwrap();
        let y: Vec<f64> = s.iter().map(|v| c0 + c1 * v.powf(-p)).collect();
        let fit = power_law_fit(&s, &y).unwrap();
        prop_assert!((fit.limit - c0).abs() < 1e-8);
        prop_assert!((fit.exponent - p).abs() < 1e-5);
    }

    #[test]
    fn log_periodic_sequences_diverge(a in 0.1..1.0f64, phase in 0.0..6.28f64, d in -5.0..5.0f64) {
        let s = log_grid(100.0, 1e4, 16).unwrap();
        let y: Vec<f64> = s.iter().map(|v| a * (v.ln() + phase).cos() + d / v).collect();
        prop_assert!(Trend::of(&s, &y).diverges);
        let decaying: Vec<f64> = s.iter().map(|v| a * (v.ln() + phase).cos() / v + d / v).collect();
        prop_assert!(!Trend::of(&s, &decaying).diverges);
    }

    #[test]
    fn energy_is_rotation_invariant(ax in -1.0..1.0f64, ay in -1.0..1.0f64, angle in 0.0..3.0f64) {
        let o = rotation([ax, ay, 1.0], angle);
        let base = DataProvider::graphical(1.0, [0.4, 0.1, -0.2]).unwrap();
        let a = adm_charges(&base, &[80.0, 300.0]).unwrap();
        let b = adm_charges(&base.rotated(o).unwrap(), &[80.0, 300.0]).unwrap();
        for i in 0..2 {
            prop_assert!((a.energy[i] - b.energy[i]).abs() < 1e-10);
            let pa = apply(&o, a.momentum[i]);
            for k in 0..3 {
                prop_assert!((pa[k] - b.momentum[i][k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn mass_never_exceeds_energy(e in 0.0..5.0f64, px in -1.0..1.0f64, py in -1.0..1.0f64) {
        let p = [px * e / 2.0, py * e / 2.0, 0.0];
        let m = adm_mass(e, p).unwrap();
        prop_assert!(m >= 0.0 && m <= e);
        prop_assert!((m * m + p[0] * p[0] + p[1] * p[1] - e * e).abs() < 1e-12);
    }
}
