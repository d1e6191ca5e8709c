use stcmc::chart::{
    constraint_densities, decay_check, inverse, scalar_curvature, DataProvider, PerturbationTarget,
    PerturbationTerm, ProviderSpec,
};
use stcmc::StcmcError;

fn schwarzschild_cartesian(m: f64, x: [f64; 3]) -> [[f64; 3]; 3] {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let a = 1.0 / (1.0 - 2.0 * m / r) - 1.0;
    let mut g = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = a * x[i] * x[j] / (r * r) + if i == j { 1.0 } else { 0.0 };
        }
    }
    g
}

/// Static spacetime metric -N^2 dt^2 + g in (t, x) order.
fn spacetime_metric(m: f64, x: [f64; 3]) -> [[f64; 4]; 4] {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    let g = schwarzschild_cartesian(m, x);
    let mut out = [[0.0; 4]; 4];
    out[0][0] = -(1.0 - 2.0 * m / r);
    for i in 0..3 {
        for j in 0..3 {
            out[i + 1][j + 1] = g[i][j];
        }
    }
    out
}

fn time_fn(u: [f64; 3], x: [f64; 3]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    r.ln().sin() + (u[0] * x[0] + u[1] * x[1] + u[2] * x[2]) / r
}

fn shift(x: [f64; 3], i: usize, h: f64) -> [f64; 3] {
    let mut y = x;
    y[i] += h;
    y
}

fn invert4(a: [[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let m = nalgebra::Matrix4::from_fn(|i, j| a[i][j]);
    let inv = m.try_inverse().unwrap();
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = inv[(i, j)];
        }
    }
    out
}

/// Second fundamental form of the graph t = T(x) in the static spacetime,
/// computed with finite differences only.
fn graph_second_fundamental_form(m: f64, u: [f64; 3], x: [f64; 3]) -> [[f64; 3]; 3] {
    let h = 1e-4;
    let g4 = spacetime_metric(m, x);
    let g4inv = invert4(g4);
    // d_c g4_ab, spatial c only (the metric is static)
    let mut dg4 = [[[0.0; 4]; 4]; 4];
    for c in 0..3 {
        let p = spacetime_metric(m, shift(x, c, h));
        let q = spacetime_metric(m, shift(x, c, -h));
        for a in 0..4 {
            for b in 0..4 {
                dg4[c + 1][a][b] = (p[a][b] - q[a][b]) / (2.0 * h);
            }
        }
    }
    let mut gamma = [[[0.0; 4]; 4]; 4];
    for mu in 0..4 {
        for a in 0..4 {
            for b in 0..4 {
                let mut acc = 0.0;
                for l in 0..4 {
                    acc += 0.5 * g4inv[mu][l] * (dg4[a][l][b] + dg4[b][l][a] - dg4[l][a][b]);
                }
                gamma[mu][a][b] = acc;
            }
        }
    }
    let mut dt = [0.0; 3];
    let mut ddt = [[0.0; 3]; 3];
    for i in 0..3 {
        dt[i] = (time_fn(u, shift(x, i, h)) - time_fn(u, shift(x, i, -h))) / (2.0 * h);
        for j in 0..3 {
            ddt[i][j] = (time_fn(u, shift(shift(x, i, h), j, h)) - time_fn(u, shift(shift(x, i, h), j, -h))
                - time_fn(u, shift(shift(x, i, -h), j, h))
                + time_fn(u, shift(shift(x, i, -h), j, -h)))
                / (4.0 * h * h);
        }
    }
    // future unit normal covector proportional to dt - dT
    let cov = [1.0, -dt[0], -dt[1], -dt[2]];
    let mut norm2 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            norm2 += g4inv[a][b] * cov[a] * cov[b];
        }
    }
    let scale = 1.0 / (-norm2).sqrt();
    let n_up_t: f64 = (0..4).map(|b| g4inv[0][b] * cov[b] * scale).sum();
    let sign = if n_up_t > 0.0 { 1.0 } else { -1.0 };
    let n_low: Vec<f64> = cov.iter().map(|c| c * scale * sign).collect();

    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let ei = [dt[i], (i == 0) as u8 as f64, (i == 1) as u8 as f64, (i == 2) as u8 as f64];
            let ej = [dt[j], (j == 0) as u8 as f64, (j == 1) as u8 as f64, (j == 2) as u8 as f64];
            let mut v = [ddt[i][j], 0.0, 0.0, 0.0];
            for mu in 0..4 {
                for a in 0..4 {
                    for b in 0..4 {
                        v[mu] += gamma[mu][a][b] * ei[a] * ej[b];
                    }
                }
            }
            k[i][j] = -(0..4).map(|mu| n_low[mu] * v[mu]).sum::<f64>();
        }
    }
    k
}

#[test]
fn graphical_second_fundamental_form_matches_embedding_differences() {
    let u = [1.0, 0.0, 0.0];
    let provider = DataProvider::graphical(1.0, u).unwrap();
    for x in [[6.0, 2.0, -3.0], [10.0, 0.5, 1.0], [-4.0, 7.0, 2.5]] {
        let k = provider.extrinsic_jet(x).unwrap().k;
        let oracle = graph_second_fundamental_form(1.0, u, x);
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - oracle[i][j]).abs() < 1e-6, "{x:?} {i}{j}: {} vs {}", k[i][j], oracle[i][j]);
            }
        }
    }
}

#[test]
fn graphical_metric_is_induced_spacetime_metric() {
    let u = [0.3, -0.2, 0.5];
    let provider = DataProvider::graphical(1.0, u).unwrap();
    let x = [5.0, -1.0, 4.0];
    let g = provider.metric_value(x).unwrap();
    let g4 = spacetime_metric(1.0, x);
    let h = 1e-5;
    let dt: Vec<f64> = (0..3).map(|i| (time_fn(u, shift(x, i, h)) - time_fn(u, shift(x, i, -h))) / (2.0 * h)).collect();
    for i in 0..3 {
        for j in 0..3 {
            let induced = g4[i + 1][j + 1] + g4[0][0] * dt[i] * dt[j];
            assert!((g[i][j] - induced).abs() < 1e-9);
        }
    }
}

#[test]
fn graphical_slice_satisfies_vacuum_constraints() {
    let provider = DataProvider::graphical(1.0, [1.0, 0.0, 0.0]).unwrap();
    let r = 20.0;
    for (t, p) in [(0.3, 0.1), (1.2, 2.0), (2.0, 4.0), (2.9, 5.5)] {
        let x = [r * f64::sin(t) * f64::cos(p), r * f64::sin(t) * f64::sin(p), r * f64::cos(t)];
        let (mu, j) = constraint_densities(&provider.metric_jet(x).unwrap(), &provider.extrinsic_jet(x).unwrap());
        assert!(mu.abs() <= 1e-8, "mu = {mu}");
        assert!(j.iter().all(|v| v.abs() <= 1e-8), "J = {j:?}");
    }
}

#[test]
fn schwarzschild_is_scalar_flat() {
    let provider = DataProvider::schwarzschild(1.0).unwrap();
    for x in [[3.0, 0.0, 0.0], [4.0, -5.0, 1.0], [30.0, 20.0, -10.0]] {
        assert!(scalar_curvature(&provider.metric_jet(x).unwrap()).abs() < 1e-13);
    }
    let negative = DataProvider::schwarzschild(-0.5).unwrap();
    assert!(scalar_curvature(&negative.metric_jet([0.5, 0.2, 0.1]).unwrap()).abs() < 1e-11);
}

#[test]
fn schwarzschild_metric_matches_closed_form() {
    let provider = DataProvider::schwarzschild(1.3).unwrap();
    let x = [7.0, -2.0, 3.0];
    let g = provider.metric_value(x).unwrap();
    let oracle = schwarzschild_cartesian(1.3, x);
    for i in 0..3 {
        for j in 0..3 {
            assert!((g[i][j] - oracle[i][j]).abs() < 1e-15);
        }
    }
    // inverse metric has radial component 1 - 2m/r
    let r = (49.0f64 + 4.0 + 9.0).sqrt();
    let ginv = inverse(&g);
    let w = [x[0] / r, x[1] / r, x[2] / r];
    let mut radial = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            radial += ginv[i][j] * w[i] * w[j];
        }
    }
    assert!((radial - (1.0 - 2.6 / r)).abs() < 1e-14);
}

#[test]
fn domain_errors() {
    let provider = DataProvider::schwarzschild(1.0).unwrap();
    assert!(matches!(provider.metric_jet([1.5, 0.0, 0.0]), Err(StcmcError::HorizonReached { .. })));
    assert!(matches!(provider.metric_jet([2.05, 0.0, 0.0]), Err(StcmcError::PointInsideCore { .. })));
    let graphical = DataProvider::graphical(1.0, [0.0, 0.0, 50.0]).unwrap();
    assert!(matches!(graphical.extrinsic_jet([2.2, 0.0, 0.0]), Err(StcmcError::SliceNotSpacelike { .. })));
    let bad = DataProvider::euclidean().rotated([[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
    assert!(matches!(bad, Err(StcmcError::NotOrthogonal(_))));
    let slow = ProviderSpec::CustomPerturbation {
        perturbation_terms: vec![PerturbationTerm {
            target: PerturbationTarget::Metric,
            component: [0, 0],
            coefficient: 1.0,
            decay: 0.4,
            angular: [0, 0, 0],
        }],
    };
    assert!(matches!(DataProvider::new(slow), Err(StcmcError::InvalidConfig(_))));
}

#[test]
fn translated_and_rotated_wrappers_transform_tensors() {
    let base = DataProvider::graphical(1.0, [0.2, 0.4, -0.1]).unwrap();
    let c = [1.0, -2.0, 0.5];
    let moved = base.clone().translated(c).unwrap();
    let p = [8.0, 3.0, -4.0];
    let q = [p[0] + c[0], p[1] + c[1], p[2] + c[2]];
    assert_eq!(moved.metric_jet(q).unwrap(), base.metric_jet(p).unwrap());

    let (s, co) = (0.6f64.sin(), 0.6f64.cos());
    let o = [[co, -s, 0.0], [s, co, 0.0], [0.0, 0.0, 1.0]];
    let turned = base.clone().rotated(o).unwrap();
    let y = [
        o[0][0] * p[0] + o[0][1] * p[1] + o[0][2] * p[2],
        o[1][0] * p[0] + o[1][1] * p[1] + o[1][2] * p[2],
        o[2][0] * p[0] + o[2][1] * p[1] + o[2][2] * p[2],
    ];
    let k = base.extrinsic_jet(p).unwrap().k;
    let k_rot = turned.extrinsic_jet(y).unwrap().k;
    for i in 0..3 {
        for j in 0..3 {
            let mut expected = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    expected += o[i][a] * o[j][b] * k[a][b];
                }
            }
            assert!((k_rot[i][j] - expected).abs() < 1e-14);
        }
    }
    // invariants agree
    let (mu_a, _) = constraint_densities(&base.metric_jet(p).unwrap(), &base.extrinsic_jet(p).unwrap());
    let (mu_b, _) = constraint_densities(&turned.metric_jet(y).unwrap(), &turned.extrinsic_jet(y).unwrap());
    assert!((mu_a - mu_b).abs() < 1e-14);
}

#[test]
fn config_round_trip_uses_documented_field_names() {
    let json = r#"{"kind":"translated","center":[1,2,3],"inner":{"kind":"schwarzschild_graphical","mass":1.0,"u":[1,0,0]}}"#;
    let p = DataProvider::from_json(json).unwrap();
    let back = serde_json::to_string(p.spec()).unwrap();
    assert!(back.contains("\"kind\":\"translated\""));
    assert!(back.contains("\"mass\":1.0"));
    let rot = r#"{"kind":"rotated","rotation":[[0,1,0],[-1,0,0],[0,0,1]],"inner":{"kind":"euclidean"}}"#;
    assert!(DataProvider::from_json(rot).is_ok());
}

#[test]
fn decay_report_fits_schwarzschild_exponents() {
    let provider = DataProvider::schwarzschild(1.0).unwrap();
    let report = decay_check(&provider, &[100.0, 200.0, 400.0, 800.0], 0.5, 1.0).unwrap();
    // g - delta ~ 1/r
    assert!((report.fitted_exponents[0] + 1.0).abs() < 0.02, "{:?}", report.fitted_exponents);
    // Schwarzschild is even: odd parts vanish
    assert!(report.rows.iter().all(|r| r.metric_odd_sup < 1e-14));
    assert!(report.rows.iter().all(|r| r.constraint_sup < 1e-12));
}
