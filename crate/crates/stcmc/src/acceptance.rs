//! The acceptance suite shared by `stcmc check` and the integration tests.
//! Every criterion returns an [`Outcome`]; numerical errors become failures.

use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::charges::{
    adm_charges, euclidean_motion_transform, log_grid, log_slope, oscillation_fit, sphere_fluxes, sphere_fluxes_about,
    ChargeTable, CHARGE_BAND,
};
use crate::chart::{
    constraint_densities, covector_norm, inverse, DataProvider, Mat3, PerturbationTarget, PerturbationTerm,
    ProviderSpec, Vec3,
};
use crate::error::{Result, StcmcError};
use crate::solver::{
    foliate, laplace_spectrum, linearization_error, newton_solve, solve_dense, uniqueness_cross_check, FoliationResult,
    SolveConfig,
};
use crate::sphere::{angles_of, basis_len, degree_order, SphereGrid};
use crate::surface::{normal_graph_residual, GraphSurface};

pub const CRITERIA: usize = 10;

const ENERGY_RADII: [f64; 4] = [50.0, 100.0, 200.0, 400.0];
const LEAF_SIGMAS: [f64; 3] = [40.0, 80.0, 160.0];
/// Band limit of the leaves solved by the suite.
const LEAF_BAND: usize = 8;

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: usize,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {} {}: {} [{:.2} s]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.title,
            self.summary,
            self.seconds
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AcceptanceReport {
    pub outcomes: Vec<Outcome>,
}

impl AcceptanceReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

pub fn title(id: usize) -> &'static str {
    match id {
        1 => "ADM energy",
        2 => "vacuum constraints",
        3 => "Schwarzschild leaf",
        4 => "graphical slice cancellation",
        5 => "eigenvalue law",
        6 => "linearization gradient",
        7 => "operator floor",
        8 => "uniqueness and equivariance",
        9 => "evolution law",
        10 => "normal graph oracle",
        _ => "unknown",
    }
}

/// Run one criterion, `1..=CRITERIA`.
pub fn run_criterion(id: usize) -> Result<Outcome> {
    let body: fn() -> Result<(bool, String)> = match id {
        1 => adm_energy,
        2 => vacuum_constraints,
        3 => schwarzschild_leaf,
        4 => cancellation,
        5 => eigenvalue_law_outcome,
        6 => linearization_gradient,
        7 => operator_floor,
        8 => uniqueness_and_equivariance,
        9 => evolution_law,
        10 => normal_graph_oracle,
        _ => return Err(StcmcError::InvalidConfig(format!("no acceptance criterion {id}"))),
    };
    let start = Instant::now();
    let (passed, summary) = match body() {
        Ok(r) => r,
        Err(e) => (false, format!("{} error: {e}", e.kind())),
    };
    Ok(Outcome { id, title: title(id), passed, summary, seconds: start.elapsed().as_secs_f64() })
}

pub fn run_all() -> AcceptanceReport {
    let outcomes = (1..=CRITERIA).map(|id| run_criterion(id).expect("criterion ids are in range")).collect();
    AcceptanceReport { outcomes }
}

/// Largest root of `r^3 - sigma^2 r + 2 m sigma^2`: the areal radius of the
/// centered Schwarzschild sphere with spacetime mean curvature `2 / sigma`.
pub fn schwarzschild_leaf_radius(mass: f64, sigma: f64) -> f64 {
    let f = |r: f64| r.powi(3) - sigma * sigma * r + 2.0 * mass * sigma * sigma;
    // the root lies in (sigma / sqrt 3, sigma]
    let (mut lo, mut hi) = (sigma / 3f64.sqrt(), sigma);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

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

fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn rotate(o: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| (0..3).map(|j| o[i][j] * v[j]).sum())
}

/// Rotation by `angle` about `axis`.
pub fn axis_rotation(axis: Vec3, angle: f64) -> Mat3 {
    let n = norm(&axis);
    let [x, y, z] = axis.map(|a| a / n);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
        [y * x * t + z * s, c + y * y * t, y * z * t - x * s],
        [z * x * t - y * s, z * y * t + x * s, c + z * z * t],
    ]
}

fn adm_energy() -> Result<(bool, String)> {
    let start = Instant::now();
    let canonical = adm_charges(&DataProvider::schwarzschild(1.0)?, &ENERGY_RADII)?;
    let graphical = adm_charges(&DataProvider::graphical(1.0, [1.0, 0.0, 0.0])?, &ENERGY_RADII)?;
    let elapsed = start.elapsed().as_secs_f64();
    let (ec, eg) = ((canonical.energy_limit - 1.0).abs(), (graphical.energy_limit - 1.0).abs());
    let passed = ec <= 1e-3 && eg <= 1e-2 && elapsed < 10.0;
    Ok((passed, format!("canonical |E - 1| = {ec:.3e}, graphical |E - 1| = {eg:.3e}, {elapsed:.2} s")))
}

fn vacuum_constraints() -> Result<(bool, String)> {
    let provider = DataProvider::graphical(1.0, [1.0, 0.0, 0.0])?;
    let grid = SphereGrid::shared(CHARGE_BAND)?;
    let (mut mu_max, mut j_max) = (0.0_f64, 0.0_f64);
    for n in 0..grid.len() {
        let w = grid.direction(n);
        let x = [20.0 * w[0], 20.0 * w[1], 20.0 * w[2]];
        let jet = provider.metric_jet(x)?;
        let (mu, j) = constraint_densities(&jet, &provider.extrinsic_jet(x)?);
        mu_max = mu_max.max(mu.abs());
        j_max = j_max.max(covector_norm(&inverse(&jet.g), &j));
    }
    Ok((mu_max <= 1e-8 && j_max <= 1e-8, format!("max |mu| = {mu_max:.3e}, max |J| = {j_max:.3e} at r = 20")))
}

fn schwarzschild_leaf() -> Result<(bool, String)> {
    let provider = DataProvider::schwarzschild(1.0)?;
    let seed = GraphSurface::sphere([0.0; 3], 20.0, LEAF_BAND)?;
    let res = newton_solve(&provider, 20.0, &seed, &SolveConfig::with_band(LEAF_BAND))?;
    let root = schwarzschild_leaf_radius(1.0, 20.0);
    let dr = (res.surface.radius - root).abs();
    let shape = res.surface.coeffs.iter().fold(norm(&res.surface.center), |m, c| m.max(c.abs()));
    let passed = dr <= 1e-8 && res.residual_sup <= 1e-10 && res.iterations <= 8 && shape <= 1e-8;
    Ok((
        passed,
        format!(
            "r = {:.12}, root {root:.12}, |dr| = {dr:.2e}, residual {:.2e}, {} iterations, off-center {shape:.1e}",
            res.surface.radius, res.residual_sup, res.iterations
        ),
    ))
}

/// Measurements of the graphical slice cancellation.
#[derive(Clone, Debug, Serialize)]
pub struct Cancellation {
    pub bom_amplitude: f64,
    pub correction_amplitude: f64,
    pub sum_at_200: f64,
    pub decay_exponent: f64,
    pub seconds: f64,
}

pub fn cancellation_measurements(radii: &[f64]) -> Result<Cancellation> {
    let start = Instant::now();
    let provider = DataProvider::graphical(1.0, [1.0, 0.0, 0.0])?;
    let table = ChargeTable::compute(&provider, radii)?;
    let centers = table.centers.as_ref().ok_or(StcmcError::ZeroEnergy)?;
    let first = |v: &[Vec3]| v.iter().map(|x| x[0]).collect::<Vec<_>>();
    let short = || StcmcError::InsufficientLeaves { needed: 4, got: radii.len() };
    let ob = oscillation_fit(radii, &first(&centers.bom)).ok_or_else(short)?;
    let oz = oscillation_fit(radii, &first(&centers.correction)).ok_or_else(short)?;
    let at_200 = ChargeTable::compute(&provider, &[200.0])?;
    let sum_at_200 = at_200.centers.map(|c| norm(&c.stcmc[0])).ok_or(StcmcError::ZeroEnergy)?;
    let norms: Vec<f64> = centers.stcmc.iter().map(norm).collect();
    Ok(Cancellation {
        bom_amplitude: ob.cos,
        correction_amplitude: oz.cos,
        sum_at_200,
        decay_exponent: log_slope(radii, &norms),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn cancellation() -> Result<(bool, String)> {
    let c = cancellation_measurements(&log_grid(1e2, 1e4, 41)?)?;
    let third = 1.0 / 3.0;
    let passed = (c.bom_amplitude - third).abs() <= 0.05 * third
        && (c.correction_amplitude + third).abs() <= 0.05 * third
        && c.sum_at_200 <= 0.05
        && c.decay_exponent <= -0.8
        && c.seconds < 60.0;
    Ok((
        passed,
        format!(
            "C_BOM cos amplitude {:.5}, Z cos amplitude {:.5}, |C_BOM + Z|(200) = {:.3e}, decay exponent {:.3}, {:.2} s",
            c.bom_amplitude, c.correction_amplitude, c.sum_at_200, c.decay_exponent, c.seconds
        ),
    ))
}

fn schwarzschild_foliation() -> Result<&'static FoliationResult> {
    static LEAVES: OnceLock<Result<FoliationResult>> = OnceLock::new();
    LEAVES
        .get_or_init(|| foliate(&DataProvider::schwarzschild(1.0)?, &LEAF_SIGMAS, None, &SolveConfig::with_band(LEAF_BAND)))
        .as_ref()
        .map_err(Clone::clone)
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenLeaf {
    pub sigma: f64,
    pub hawking_mass: f64,
    /// `lambda_1..3`.
    pub translational: [f64; 3],
    pub fourth: f64,
    /// `(lambda_1 - 2 / sigma^2) sigma^3 / 6`.
    pub normalized: f64,
    /// `normalized / m_H - 1`.
    pub relative_error: f64,
    /// Largest `|lambda_i - prediction_i| / lambda_i` when the prediction
    /// keeps the `int Ric(nu, nu) f_i^2 d mu` term.
    pub ricci_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenvalueLaw {
    pub leaves: Vec<EigenLeaf>,
}

impl EigenvalueLaw {
    pub fn passes(&self) -> bool {
        let errs: Vec<f64> = self.leaves.iter().map(|l| l.relative_error.abs()).collect();
        let gap_ok = self.leaves.iter().all(|l| l.fourth > 5.0 / (l.sigma * l.sigma));
        let last_ok = errs.last().is_some_and(|e| *e <= 0.1);
        gap_ok && last_ok && errs.windows(2).all(|w| w[1] < w[0])
    }
}

pub fn eigenvalue_law() -> Result<EigenvalueLaw> {
    let provider = DataProvider::schwarzschild(1.0)?;
    let fol = schwarzschild_foliation()?;
    let mut leaves = Vec::new();
    for leaf in &fol.leaves {
        let spec = laplace_spectrum(&provider, &leaf.surface, 5)?;
        let s = leaf.sigma;
        let l1 = spec.eigenvalues[1];
        let normalized = (l1 - 2.0 / (s * s)) * s.powi(3) / 6.0;
        let ricci_gap = (0..3)
            .map(|i| (spec.eigenvalues[i + 1] - spec.predicted_with_ricci[i]).abs() / spec.eigenvalues[i + 1])
            .fold(0.0, f64::max);
        leaves.push(EigenLeaf {
            sigma: s,
            hawking_mass: leaf.hawking_mass,
            translational: [spec.eigenvalues[1], spec.eigenvalues[2], spec.eigenvalues[3]],
            fourth: spec.eigenvalues[4],
            normalized,
            relative_error: normalized / leaf.hawking_mass - 1.0,
            ricci_gap,
        });
    }
    Ok(EigenvalueLaw { leaves })
}

fn eigenvalue_law_outcome() -> Result<(bool, String)> {
    let law = eigenvalue_law()?;
    let parts: Vec<String> = law
        .leaves
        .iter()
        .map(|l| {
            format!(
                "sigma {}: ratio {:.5}, lambda4 sigma^2 = {:.3}, Ricci-corrected gap {:.1e}",
                l.sigma,
                l.normalized / l.hawking_mass,
                l.fourth * l.sigma * l.sigma,
                l.ricci_gap
            )
        })
        .collect();
    Ok((law.passes(), parts.join("; ")))
}

fn momentum_provider() -> Result<DataProvider> {
    DataProvider::new(ProviderSpec::CustomPerturbation {
        perturbation_terms: vec![
            PerturbationTerm { target: PerturbationTarget::Extrinsic, component: [0, 1], coefficient: 0.8, decay: 1.5, angular: [1, 0, 0] },
            PerturbationTerm { target: PerturbationTarget::Extrinsic, component: [2, 2], coefficient: -0.6, decay: 1.5, angular: [0, 1, 0] },
            PerturbationTerm { target: PerturbationTarget::Metric, component: [0, 2], coefficient: 0.3, decay: 1.0, angular: [0, 0, 1] },
        ],
    })
}

fn linearization_gradient() -> Result<(bool, String)> {
    let providers = [
        DataProvider::graphical(1.0, [1.0, 0.0, 0.0])?,
        momentum_provider()?,
        DataProvider::schwarzschild(1.0)?.translated([0.4, -0.2, 0.1])?,
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0_f64;
    let mut count = 0;
    for (p, provider) in providers.iter().enumerate() {
        let surface = GraphSurface::new([0.3, 0.1, -0.2], 25.0, random_coeffs(&mut rng, LEAF_BAND, 0.5))?;
        let n = if p == 0 { 34 } else { 33 };
        for _ in 0..n {
            let v = random_coeffs(&mut rng, LEAF_BAND, 1.0);
            worst = worst.max(linearization_error(provider, &surface, &v, 1e-5)?);
            count += 1;
        }
    }
    Ok((worst <= 1e-5, format!("{count} directions over 3 providers, max relative error {worst:.3e}")))
}

fn operator_floor() -> Result<(bool, String)> {
    let fol = schwarzschild_foliation()?;
    let energy = adm_charges(&DataProvider::schwarzschild(1.0)?, &log_grid(100.0, 1e4, 12)?)?.energy_limit;
    let mut ok = true;
    let mut gaps = Vec::new();
    let mut ratios = Vec::new();
    for leaf in &fol.leaves {
        let bound = 3.0 * leaf.hawking_mass.abs() / leaf.sigma.powi(3);
        ratios.push(leaf.sigma_min / bound);
        ok &= leaf.sigma_min >= 0.9 * bound;
        gaps.push((energy - leaf.hawking_mass).abs());
    }
    // nonincreasing up to an absolute floor: m_H is constant on these leaves
    let decreasing = gaps.windows(2).all(|w| w[1] <= w[0] + 1e-8);
    Ok((
        ok && decreasing,
        format!(
            "sigma_min / (3|m|/sigma^3) = [{}], |E - m_H| = [{}]",
            ratios.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>().join(", "),
            gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>().join(", ")
        ),
    ))
}

/// Largest radial offset between `b` and the image of `a` under `motion`.
fn radial_distance(a: &GraphSurface, b: &GraphSurface, motion: impl Fn(Vec3) -> Vec3) -> Result<f64> {
    let grid = a.geometry_grid()?;
    let emb = a.embedding(&grid)?;
    let mut worst = 0.0_f64;
    for p in emb.positions() {
        let q = motion(*p);
        let d = [q[0] - b.center[0], q[1] - b.center[1], q[2] - b.center[2]];
        let (theta, phi) = angles_of(d);
        worst = worst.max((norm(&d) - b.radius_at(theta, phi)).abs());
    }
    Ok(worst)
}

fn uniqueness_and_equivariance() -> Result<(bool, String)> {
    let sigma = 60.0;
    // radial errors scale like residual * sigma^2 / 2
    let config = SolveConfig { tolerance: 1e-13, ..SolveConfig::with_band(LEAF_BAND) };
    let base = DataProvider::graphical(1.0, [1.0, 0.0, 0.0])?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0b5e);
    let mut seeds = vec![
        GraphSurface::sphere([0.0; 3], sigma, LEAF_BAND)?,
        GraphSurface::sphere([1.0, -0.5, 0.5], 0.97 * sigma, LEAF_BAND)?,
        GraphSurface::sphere([-0.8, 0.3, -0.6], 1.03 * sigma, LEAF_BAND)?,
    ];
    seeds.push(GraphSurface::new([0.2, 0.2, 0.0], sigma, random_coeffs(&mut rng, LEAF_BAND, 1.0))?);
    let uniq = uniqueness_cross_check(&base, sigma, &seeds, &config)?;
    let leaf = &uniq.results[0].surface;

    let o = axis_rotation([1.0, 2.0, -0.5], 0.7);
    let rotated = base.clone().rotated(o)?;
    let turned = newton_solve(&rotated, sigma, &GraphSurface::sphere([0.0; 3], sigma, LEAF_BAND)?, &config)?.surface;
    let rot_leaf = radial_distance(leaf, &turned, |p| rotate(&o, &p))?;

    let t = [2.0, -1.0, 0.5];
    let shifted = base.clone().translated(t)?;
    let moved = newton_solve(&shifted, sigma, &GraphSurface::sphere(t, sigma, LEAF_BAND)?, &config)?.surface;
    let tr_leaf = radial_distance(leaf, &moved, |p| [p[0] + t[0], p[1] + t[1], p[2] + t[2]])?;

    let radii = [100.0, 400.0, 1600.0];
    let a = ChargeTable::compute(&base, &radii)?;
    let b = ChargeTable::compute(&rotated, &radii)?;
    let m = euclidean_motion_transform(&a, o, [0.0; 3])?;
    let mut rot_charges = 0.0_f64;
    for i in 0..radii.len() {
        rot_charges = rot_charges.max((m.charges.energy[i] - b.charges.energy[i]).abs());
        let pairs: Vec<(Vec3, Vec3)> = {
            let (mc, bc) = (m.centers.as_ref().ok_or(StcmcError::ZeroEnergy)?, b.centers.as_ref().ok_or(StcmcError::ZeroEnergy)?);
            let (me, be) = (m.evolution.as_ref().ok_or(StcmcError::ZeroEnergy)?, b.evolution.as_ref().ok_or(StcmcError::ZeroEnergy)?);
            vec![
                (m.charges.momentum[i], b.charges.momentum[i]),
                (mc.bom[i], bc.bom[i]),
                (mc.correction[i], bc.correction[i]),
                (me.velocity[i], be.velocity[i]),
            ]
        };
        for (x, y) in pairs {
            rot_charges = rot_charges.max((0..3).map(|k| (x[k] - y[k]).abs()).fold(0.0, f64::max));
        }
    }
    let mut tr_charges = 0.0_f64;
    for &s in &radii {
        let f = sphere_fluxes(&base, s, CHARGE_BAND)?;
        let g = sphere_fluxes_about(&shifted, t, s, CHARGE_BAND)?;
        tr_charges = tr_charges.max((f.energy - g.energy).abs());
        for k in 0..3 {
            tr_charges = tr_charges
                .max((f.momentum[k] - g.momentum[k]).abs())
                .max((f.velocity_flux[k] - g.velocity_flux[k]).abs());
        }
    }

    let passed = uniq.distance <= 1e-8 && rot_leaf.max(tr_leaf).max(rot_charges).max(tr_charges) <= 1e-9;
    Ok((
        passed,
        format!(
            "seed distance {:.2e}, leaf rotation {rot_leaf:.2e}, leaf translation {tr_leaf:.2e}, charge rotation {rot_charges:.2e}, charge translation {tr_charges:.2e}",
            uniq.distance
        ),
    ))
}

/// The catalog used by the evolution law.
pub fn catalog() -> Result<Vec<(&'static str, DataProvider)>> {
    let graphical = DataProvider::graphical(1.0, [1.0, 0.0, 0.0])?;
    let custom = DataProvider::new(ProviderSpec::CustomPerturbation {
        perturbation_terms: vec![
            PerturbationTerm { target: PerturbationTarget::Metric, component: [0, 0], coefficient: 1.0, decay: 1.0, angular: [0, 0, 0] },
            PerturbationTerm { target: PerturbationTarget::Metric, component: [1, 1], coefficient: 1.0, decay: 1.0, angular: [0, 0, 0] },
            PerturbationTerm { target: PerturbationTarget::Metric, component: [2, 2], coefficient: 1.0, decay: 1.0, angular: [0, 0, 0] },
            PerturbationTerm { target: PerturbationTarget::Extrinsic, component: [0, 1], coefficient: 0.5, decay: 2.0, angular: [0, 0, 0] },
            PerturbationTerm { target: PerturbationTarget::Extrinsic, component: [2, 2], coefficient: 0.3, decay: 2.0, angular: [0, 0, 1] },
        ],
    })?;
    Ok(vec![
        ("euclidean", DataProvider::euclidean()),
        ("schwarzschild", DataProvider::schwarzschild(1.0)?),
        ("graphical", graphical.clone()),
        ("translated graphical", graphical.clone().translated([3.0, -2.0, 1.0])?),
        ("rotated graphical", graphical.rotated(axis_rotation([0.0, 1.0, 1.0], 1.1))?),
        ("custom", custom),
    ])
}

fn evolution_law() -> Result<(bool, String)> {
    let radii = log_grid(100.0, 1e4, 12)?;
    let mut passed = true;
    let mut parts = Vec::new();
    for (name, provider) in catalog()? {
        let table = ChargeTable::compute(&provider, &radii)?;
        let (gap, exact) = match (&table.evolution, &table.centers) {
            (Some(e), Some(c)) => {
                let exact = c
                    .stcmc
                    .iter()
                    .zip(c.bom.iter().zip(&c.correction))
                    .all(|(s, (b, z))| (0..3).all(|k| s[k] == b[k] + z[k]));
                (e.discrepancy, exact)
            }
            // zero energy: V and P / E are both taken as zero
            _ => (norm(&table.charges.momentum_limit), true),
        };
        passed &= gap <= 1e-2 && exact;
        parts.push(format!("{name} {gap:.2e}"));
    }
    Ok((passed, format!("|lim V - P/E|: {}; C_STCMC = C_BOM + Z exactly", parts.join(", "))))
}

/// Newton iteration on the even-degree harmonic coefficients of the normal
/// graph residual about the origin, with a centered-difference Jacobian.
/// Odd degrees are held at zero, so the data must be invariant under
/// `x -> -x`; this also removes the nearly singular translation modes.
pub fn normal_graph_root(provider: &DataProvider, sigma: f64, seed: &GraphSurface, tolerance: f64) -> Result<GraphSurface> {
    let band = seed.band();
    let grid = seed.geometry_grid()?;
    let even: Vec<usize> = (0..basis_len(band)).filter(|&k| degree_order(k).0 % 2 == 0).collect();
    let build = |c: &[f64]| {
        let mut full = vec![0.0; basis_len(band)];
        for (v, &k) in c.iter().zip(&even) {
            full[k] = *v;
        }
        GraphSurface::new([0.0; 3], sigma, full)
    };
    let residual = |c: &[f64]| -> Result<(Vec<f64>, f64)> {
        let nodal = normal_graph_residual(provider, &build(c)?, sigma)?;
        let sup = nodal.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let coeffs = grid.analyze_to(&nodal, band)?;
        Ok((even.iter().map(|&k| coeffs[k]).collect(), sup))
    };
    let start = seed.rebase([0.0; 3])?;
    let mut c: Vec<f64> = even.iter().map(|&k| start.coeffs[k]).collect();
    c[0] += (start.radius - sigma) * (4.0 * std::f64::consts::PI).sqrt();
    let n = c.len();
    let h = 1e-6;
    let mut last = f64::INFINITY;
    for it in 0..40 {
        let (r, sup) = residual(&c)?;
        if sup <= tolerance {
            let mut out = build(&c)?;
            out.absorb_mean();
            return Ok(out);
        }
        if it > 10 && sup >= last {
            return Err(StcmcError::NewtonDiverged { iterations: it, residual: sup });
        }
        last = sup;
        let columns = (0..n)
            .into_par_iter()
            .map(|k| {
                let mut plus = c.clone();
                let mut minus = c.clone();
                plus[k] += h;
                minus[k] -= h;
                let (rp, _) = residual(&plus)?;
                let (rm, _) = residual(&minus)?;
                Ok(rp.iter().zip(&rm).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let jac = DMatrix::from_fn(n, n, |i, k| columns[k][i]);
        let (step, _) = solve_dense(&jac, &DVector::from_vec(r))?;
        for k in 0..n {
            c[k] -= step[k];
        }
    }
    Err(StcmcError::MaxIterations { iterations: 40, residual: last })
}

fn normal_graph_oracle() -> Result<(bool, String)> {
    // flat metric with parity-even K, so the leaf stays centered
    let provider = DataProvider::new(ProviderSpec::CustomPerturbation {
        perturbation_terms: vec![
            PerturbationTerm { target: PerturbationTarget::Extrinsic, component: [0, 1], coefficient: 0.8, decay: 1.5, angular: [1, 1, 0] },
            PerturbationTerm { target: PerturbationTarget::Extrinsic, component: [2, 2], coefficient: -0.6, decay: 1.5, angular: [0, 0, 0] },
        ],
    })?;
    let sigma = 10.0;
    let band = 20;
    let config = SolveConfig { tolerance: 1e-12, ..SolveConfig::with_band(band) };
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0b);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let seed = GraphSurface::new([0.0; 3], sigma, random_coeffs(&mut rng, band, 0.3))?;
        let embedded = newton_solve(&provider, sigma, &seed, &config)?.surface;
        let root = normal_graph_root(&provider, sigma, &seed, 1e-12)?;
        worst = worst.max(radial_distance(&embedded, &root, |p| p)?);
    }
    Ok((worst <= 1e-10, format!("20 perturbed seeds, max radial distance {worst:.3e}")))
}
