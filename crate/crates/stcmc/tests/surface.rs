use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stcmc::chart::{DataProvider, PerturbationTarget, PerturbationTerm, ProviderSpec};
use stcmc::sphere::{basis_len, degree_order, SphereGrid};
use stcmc::surface::{
    embedding_geometry, normal_graph_residual, surface_frames, write_surface_csv, Embedding, GraphSurface,
};
use stcmc::StcmcError;

fn random_coeffs(rng: &mut ChaCha8Rng, band: usize, amplitude: f64) -> Vec<f64> {
    (0..basis_len(band))
        .map(|k| {
            let (l, _) = degree_order(k);
            if l == 0 {
                0.0
            } else {
                amplitude * rng.gen_range(-1.0..1.0) / ((l + 1) * (l + 1)) as f64
            }
        })
        .collect()
}

#[test]
fn euclidean_round_sphere() {
    let s = GraphSurface::sphere([0.0; 3], 10.0, 8).unwrap();
    let geo = surface_frames(&DataProvider::euclidean(), &s).unwrap();
    for g in &geo.nodes {
        assert!((g.mean_curvature - 0.2).abs() < 1e-13);
        assert!((g.stcmc - 0.2).abs() < 1e-13);
        assert!((g.second_form_norm_sq - 0.02).abs() < 1e-14);
    }
    let sc = geo.scalars();
    assert!((sc.area - 400.0 * PI).abs() < 1e-9);
    assert!(sc.hawking_mass.abs() < 1e-12);
    assert!(sc.willmore_deficit.abs() < 1e-10);
    assert!(sc.coordinate_center.iter().all(|c| c.abs() < 1e-12));
}

#[test]
fn schwarzschild_round_sphere_has_hawking_mass_m() {
    let m = 1.0;
    let r = 25.0;
    let s = GraphSurface::sphere([0.0; 3], r, 6).unwrap();
    let geo = surface_frames(&DataProvider::schwarzschild(m).unwrap(), &s).unwrap();
    let lapse = (1.0 - 2.0 * m / r).sqrt();
    for g in &geo.nodes {
        assert!((g.mean_curvature - 2.0 * lapse / r).abs() < 1e-14);
        assert!((g.ricci_normal + 2.0 * m / r.powi(3)).abs() < 1e-15);
        assert!((g.mean_curvature_flat - 2.0 / r).abs() < 1e-14);
    }
    let sc = geo.scalars();
    assert!((sc.area_radius - r).abs() < 1e-11);
    assert!((sc.hawking_mass - m).abs() < 1e-11);
    let cmp = geo.euclidean_comparison();
    assert!((cmp.normal - (1.0 - lapse)).abs() < 1e-13);
    assert!((cmp.mean_curvature - 2.0 * (1.0 - lapse) / r).abs() < 1e-14);
    assert!(cmp.area_density_relative < 1e-13);
}

#[test]
fn translated_sphere_center_is_recovered() {
    let c = [0.3, -1.2, 2.0];
    let s = GraphSurface::sphere(c, 15.0, 6).unwrap();
    let geo = surface_frames(&DataProvider::euclidean(), &s).unwrap();
    let z = geo.coordinate_center();
    for i in 0..3 {
        assert!((z[i] - c[i]).abs() < 1e-12);
    }
}

#[test]
fn rebase_recovers_shifted_sphere() {
    // sphere of radius 10 about c, first written as a graph about the origin
    let c = [0.4, -0.3, 0.2];
    let exact = GraphSurface::sphere(c, 10.0, 12).unwrap();
    let about_origin = exact.rebase([0.0; 3]).unwrap();
    assert!(about_origin.coeffs.iter().skip(1).any(|a| a.abs() > 1e-3));
    let back = about_origin.rebase(c).unwrap();
    assert!((back.radius - 10.0).abs() < 1e-10);
    assert!(back.coeffs.iter().all(|a| a.abs() < 1e-9));
}

#[test]
fn normal_graph_residual_vanishes_on_the_background_sphere() {
    let s = GraphSurface::sphere([0.0; 3], 7.0, 8).unwrap();
    let res = normal_graph_residual(&DataProvider::euclidean(), &s, 7.0).unwrap();
    assert!(res.iter().all(|v| v.abs() < 1e-14));
    let err = normal_graph_residual(&DataProvider::schwarzschild(1.0).unwrap(), &s, 7.0);
    assert!(matches!(err, Err(StcmcError::FoliationNotSupported(_))));
}

#[test]
fn normal_graph_residual_matches_embedding_curvatures() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let k_terms = ProviderSpec::CustomPerturbation {
        perturbation_terms: vec![
            PerturbationTerm { target: PerturbationTarget::Extrinsic, component: [0, 1], coefficient: 0.3, decay: 2.0, angular: [1, 0, 0] },
            PerturbationTerm { target: PerturbationTarget::Extrinsic, component: [2, 2], coefficient: -0.2, decay: 2.0, angular: [0, 0, 0] },
        ],
    };
    let providers = [DataProvider::euclidean(), DataProvider::new(k_terms).unwrap()];
    for provider in &providers {
        for _ in 0..5 {
            let sigma = 9.0;
            let surface = GraphSurface::new([0.0; 3], 9.3, random_coeffs(&mut rng, 10, 0.8)).unwrap();
            let res = normal_graph_residual(provider, &surface, sigma).unwrap();
            let geo = surface_frames(provider, &surface).unwrap();
            for (n, g) in geo.nodes.iter().enumerate() {
                let expected = (g.momentum_trace.powi(2) + 4.0 / (sigma * sigma)).sqrt() - g.mean_curvature;
                assert!((res[n] - expected).abs() < 1e-12, "{} vs {}", res[n], expected);
            }
        }
    }
}

#[test]
fn trapped_surfaces_are_rejected() {
    let spec = ProviderSpec::CustomPerturbation {
        perturbation_terms: vec![PerturbationTerm {
            target: PerturbationTarget::Extrinsic,
            component: [0, 0],
            coefficient: 30.0,
            decay: 1.5,
            angular: [0, 0, 0],
        }],
    };
    let provider = DataProvider::new(spec).unwrap();
    let s = GraphSurface::sphere([0.0; 3], 10.0, 6).unwrap();
    assert!(matches!(surface_frames(&provider, &s), Err(StcmcError::TrappedRegion { .. })));
}

#[test]
fn snapshot_has_documented_columns() {
    let s = GraphSurface::sphere([0.0; 3], 10.0, 4).unwrap();
    let geo = surface_frames(&DataProvider::euclidean(), &s).unwrap();
    let mut buf = Vec::new();
    write_surface_csv(&mut buf, &s, &geo).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# z0="));
    assert_eq!(lines.next().unwrap(), "theta,phi,f,H,P,stcmc");
    assert_eq!(lines.count(), geo.len());
}

fn displaced(surface: &GraphSurface, provider: &DataProvider, u: &[f64], s: f64) -> Embedding {
    let grid = SphereGrid::shared(40).unwrap();
    let emb = surface.embedding(&grid).unwrap();
    let geo = embedding_geometry(provider, &emb).unwrap();
    let uvals = grid.synthesize(u).unwrap();
    let pos: Vec<[f64; 3]> = geo
        .nodes
        .iter()
        .enumerate()
        .map(|(n, g)| {
            let d = s * uvals[n];
            [g.position[0] + d * g.normal[0], g.position[1] + d * g.normal[1], g.position[2] + d * g.normal[2]]
        })
        .collect();
    Embedding::from_positions(&grid, &pos).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn first_variation_of_area(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let provider = DataProvider::schwarzschild(1.0).unwrap();
        let surface = GraphSurface::new([0.5, 0.0, -0.3], 20.0, random_coeffs(&mut rng, 8, 1.0)).unwrap();
        let u = random_coeffs(&mut rng, 8, 1.0);
        let grid = SphereGrid::shared(40).unwrap();
        let base = embedding_geometry(&provider, &surface.embedding(&grid).unwrap()).unwrap();
        let uvals = grid.synthesize(&u).unwrap();
        let predicted: f64 = base.integrate(&uvals.iter().zip(&base.nodes).map(|(a, g)| a * g.mean_curvature).collect::<Vec<_>>());
        let h = 1e-4;
        let plus = embedding_geometry(&provider, &displaced(&surface, &provider, &u, h)).unwrap().area();
        let minus = embedding_geometry(&provider, &displaced(&surface, &provider, &u, -h)).unwrap().area();
        let fd = (plus - minus) / (2.0 * h);
        prop_assert!((fd - predicted).abs() <= 1e-6 * predicted.abs().max(1.0), "{} vs {}", fd, predicted);
    }

    #[test]
    fn stcmc_identity_holds_pointwise(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let provider = DataProvider::graphical(1.0, [0.5, 0.2, 0.0]).unwrap();
        let surface = GraphSurface::new([0.0; 3], 30.0, random_coeffs(&mut rng, 6, 1.0)).unwrap();
        let geo = surface_frames(&provider, &surface).unwrap();
        for g in &geo.nodes {
            let lhs = g.stcmc * g.stcmc + g.momentum_trace * g.momentum_trace;
            prop_assert!((lhs - g.mean_curvature.powi(2)).abs() <= 1e-14 * g.mean_curvature.powi(2));
        }
    }
}
