//! Newton solver for surfaces of constant spacetime mean curvature, the
//! continuation in the extrinsic curvature scale, foliation sweeps and the
//! spectral diagnostics of the linearized operators.

mod diagnostics;
mod operators;
mod spectrum;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::chart::{DataProvider, Vec3};
use crate::error::{Result, StcmcError};
use crate::sphere::{DEFAULT_BAND_LIMIT, MIN_BAND_LIMIT};
use crate::surface::{surface_frames, GraphSurface, SurfaceGeometry};

pub use diagnostics::{
    center_variation_check, linearization_error, uniqueness_cross_check, CenterVariation, UniquenessReport,
};
pub use operators::{
    apply_stencils, assemble_linearization, condition_number, node_stencil, normal_stencils, operator_from_geometry,
    radial_jacobian, radial_stencils, solve_dense, BasisTables, OperatorKind, OperatorMatrix, Stencil,
    GRADIENT_COUPLING,
};
pub use spectrum::{laplace_spectrum, operator_bound_check, OperatorBound, SpectralReport};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub band: usize,
    /// Sup norm of `stcmc - 2/sigma` at which Newton stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial step length of each Newton update.
    pub damping: f64,
    pub tau_steps: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig { band: DEFAULT_BAND_LIMIT, tolerance: 1e-10, max_iterations: 30, damping: 1.0, tau_steps: 8 }
    }
}

impl SolveConfig {
    pub fn with_band(band: usize) -> Self {
        SolveConfig { band, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.band < MIN_BAND_LIMIT {
            return Err(StcmcError::BandLimitTooSmall { requested: self.band, minimum: MIN_BAND_LIMIT });
        }
        if !(self.tolerance > 0.0) {
            return Err(StcmcError::InvalidConfig(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(StcmcError::InvalidConfig(format!("damping must lie in (0, 1], got {}", self.damping)));
        }
        if self.max_iterations == 0 || self.tau_steps == 0 {
            return Err(StcmcError::InvalidConfig("iteration counts must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    pub surface: GraphSurface,
    pub iterations: usize,
    pub residual_sup: f64,
    pub residual_l2: f64,
    /// Condition number of the last Newton matrix.
    pub condition: f64,
    /// Sup residual before each iteration, ending with the final one.
    pub history: Vec<f64>,
    /// Whether some Newton step needed the least-squares fallback.
    pub used_least_squares: bool,
}

/// Maximum number of step halvings per Newton iteration.
const MAX_HALVINGS: usize = 6;

struct Evaluated {
    surface: GraphSurface,
    geometry: SurfaceGeometry,
    residual: Vec<f64>,
    sup: f64,
}

fn evaluate(provider: &DataProvider, surface: GraphSurface, target: f64) -> Result<Evaluated> {
    let geometry = surface_frames(provider, &surface)?;
    let residual: Vec<f64> = geometry.nodes.iter().map(|g| g.stcmc - target).collect();
    let sup = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if !sup.is_finite() {
        return Err(StcmcError::NewtonDiverged { iterations: 0, residual: sup });
    }
    Ok(Evaluated { surface, geometry, residual, sup })
}

/// Move the mean height into the base radius and the base center to the
/// coordinate center of the surface.
fn normalize(mut surface: GraphSurface) -> Result<GraphSurface> {
    surface.absorb_mean();
    let z = surface.coordinate_center()?;
    let shift = ((z[0] - surface.center[0]).powi(2) + (z[1] - surface.center[1]).powi(2) + (z[2] - surface.center[2]).powi(2)).sqrt();
    if shift > 1e-13 * surface.radius {
        surface = surface.rebase(z)?;
    }
    Ok(surface)
}

/// Solve `stcmc(S) = 2/sigma` for a radial graph `S` by damped Newton
/// iteration on the harmonic coefficients of its height.
pub fn newton_solve(provider: &DataProvider, sigma: f64, initial: &GraphSurface, config: &SolveConfig) -> Result<SolveResult> {
    config.validate()?;
    if !(sigma > 0.0) {
        return Err(StcmcError::NonpositiveRadius(sigma));
    }
    let band = config.band;
    let target = 2.0 / sigma;
    let mut current = evaluate(provider, normalize(initial.with_band(band)?)?, target)?;
    let mut history = vec![current.sup];
    let mut used_lsq = false;
    let mut last_jacobian: Option<DMatrix<f64>> = None;
    let mut iterations = 0;

    while current.sup > config.tolerance {
        if iterations == config.max_iterations {
            return Err(StcmcError::MaxIterations { iterations, residual: current.sup });
        }
        iterations += 1;
        let jacobian = radial_jacobian(provider, &current.surface, band)?;
        let rhs = current.geometry.grid.analyze_to(&current.residual, band)?;
        let rhs = -DVector::from_vec(rhs);
        let (delta, lsq) = solve_dense(&jacobian, &rhs)?;
        used_lsq |= lsq;
        last_jacobian = Some(jacobian);

        let mut step = config.damping;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = current
                .surface
                .perturbed(delta.as_slice(), step)
                .and_then(normalize)
                .and_then(|s| evaluate(provider, s, target));
            if let Ok(next) = trial {
                if next.sup < current.sup || next.sup <= config.tolerance {
                    accepted = Some(next);
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some(next) => current = next,
            None => return Err(StcmcError::NewtonDiverged { iterations, residual: current.sup }),
        }
        history.push(current.sup);
    }

    let jacobian = match last_jacobian {
        Some(j) => j,
        None => radial_jacobian(provider, &current.surface, band)?,
    };
    let l2 = current.geometry.integrate(&current.residual.iter().map(|r| r * r).collect::<Vec<_>>()).sqrt();
    Ok(SolveResult {
        surface: current.surface,
        iterations,
        residual_sup: current.sup,
        residual_l2: l2,
        condition: condition_number(&jacobian),
        history,
        used_least_squares: used_lsq,
    })
}

/// One accepted point of the continuation in the extrinsic scale.
#[derive(Clone, Debug, Serialize)]
pub struct ContinuationStep {
    pub tau: f64,
    pub result: SolveResult,
    pub center: Vec3,
    /// Harmonic coefficients of the normal speed `d/d tau` of the leaf.
    pub lapse: Vec<f64>,
    pub lapse_l2: f64,
}

/// Smallest continuation step before giving up.
const MIN_TAU_STEP: f64 = 1.0 / 256.0;

/// Normal speed `u` of the leaves in `tau`: `Stability u = tau P1^2 / H`,
/// where `P1 = P / tau` is the unscaled momentum trace.
fn continuation_lapse(geo: &SurfaceGeometry, band: usize, tau: f64) -> Result<(Vec<f64>, f64)> {
    if tau == 0.0 {
        return Ok((vec![0.0; crate::sphere::basis_len(band)], 0.0));
    }
    let rhs: Vec<f64> = geo.nodes.iter().map(|g| g.momentum_trace.powi(2) / (tau * g.mean_curvature)).collect();
    let op = operator_from_geometry(geo, band, OperatorKind::Stability)?;
    let b = DVector::from_vec(geo.grid.analyze_to(&rhs, band)?);
    let (u, _) = solve_dense(&op.matrix, &b)?;
    let nodal = geo.grid.synthesize(u.as_slice())?;
    let l2 = geo.integrate(&nodal.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt();
    Ok((u.as_slice().to_vec(), l2))
}

/// Solve for the STCMC leaf of radius `sigma` in the family with extrinsic
/// curvature `tau K`, for `tau` from 0 to 1, seeding each solve from the
/// previous leaf and bisecting the step on failure.
pub fn continuation_in_tau(
    provider: &DataProvider,
    sigma: f64,
    steps: usize,
    config: &SolveConfig,
) -> Result<Vec<ContinuationStep>> {
    config.validate()?;
    if steps == 0 {
        return Err(StcmcError::InvalidConfig("continuation needs at least one step".into()));
    }
    let uniform = 1.0 / steps as f64;
    let mut seed = GraphSurface::sphere([0.0; 3], sigma, config.band)?;
    let mut out = Vec::new();
    let mut tau = 0.0;
    let mut step = uniform;
    let mut first = true;
    loop {
        let next = if first { 0.0 } else { (tau + step).min(1.0) };
        let scaled = provider.with_extrinsic_scale(next);
        match newton_solve(&scaled, sigma, &seed, config) {
            Ok(result) => {
                let geo = surface_frames(&scaled, &result.surface)?;
                let (lapse, lapse_l2) = continuation_lapse(&geo, config.band, next)?;
                seed = result.surface.clone();
                out.push(ContinuationStep { tau: next, center: geo.coordinate_center(), result, lapse, lapse_l2 });
                tau = next;
                first = false;
                if tau >= 1.0 {
                    return Ok(out);
                }
                step = (step * 2.0).min(uniform);
            }
            Err(e) if first => return Err(e),
            Err(_) => {
                step *= 0.5;
                if step < MIN_TAU_STEP {
                    return Err(StcmcError::ContinuationStalled { tau, step });
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Leaf {
    pub sigma: f64,
    pub surface: GraphSurface,
    pub area_radius: f64,
    pub center: Vec3,
    pub hawking_mass: f64,
    pub eigenvalues: [f64; 3],
    pub fourth_eigenvalue: f64,
    pub sigma_min: f64,
    pub residual: f64,
    pub iterations: usize,
    /// Minimum over the leaf of `g(d Psi / d sigma, nu)`, by divided
    /// differences with the neighbouring leaf.
    pub lapse_min: f64,
    pub lapse_positive: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct FoliationResult {
    pub leaves: Vec<Leaf>,
}

impl FoliationResult {
    pub fn sigmas(&self) -> Vec<f64> {
        self.leaves.iter().map(|l| l.sigma).collect()
    }

    pub fn centers(&self) -> Vec<Vec3> {
        self.leaves.iter().map(|l| l.center).collect()
    }

    /// `sigma, r_area, z1, z2, z3, m_hawking, lambda1..3, sigma_min_L, residual`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let io = |e: std::io::Error| StcmcError::InvalidConfig(format!("write failed: {e}"));
        writeln!(out, "sigma,r_area,z1,z2,z3,m_hawking,lambda1,lambda2,lambda3,sigma_min_L,residual").map_err(io)?;
        for l in &self.leaves {
            let row = [
                l.sigma,
                l.area_radius,
                l.center[0],
                l.center[1],
                l.center[2],
                l.hawking_mass,
                l.eigenvalues[0],
                l.eigenvalues[1],
                l.eigenvalues[2],
                l.sigma_min,
                l.residual,
            ];
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", cells.join(",")).map_err(io)?;
        }
        Ok(())
    }
}

/// Minimum of `(rho_outer - rho_inner) w / d_sigma` over the inner leaf's
/// geometry nodes, after expressing the outer leaf about the inner center.
fn divided_lapse(provider: &DataProvider, inner: &GraphSurface, outer: &GraphSurface, d_sigma: f64) -> Result<f64> {
    let outer = outer.rebase(inner.center)?;
    let geo = surface_frames(provider, inner)?;
    let grid = &geo.grid;
    let inner_r = grid.synthesize(&inner.coeffs)?;
    let outer_r = grid.synthesize(&outer.with_band(inner.band())?.coeffs)?;
    let mut min = f64::INFINITY;
    for (n, g) in geo.nodes.iter().enumerate() {
        let omega = grid.direction(n);
        let w: f64 = (0..3).map(|i| g.normal_covector[i] * omega[i]).sum();
        let gap = (outer.radius + outer_r[n]) - (inner.radius + inner_r[n]);
        min = min.min(gap * w / d_sigma);
    }
    Ok(min)
}

/// Consecutive STCMC leaves for increasing `sigmas`; each leaf is seeded by
/// radially rescaling the previous one about its own center.
pub fn foliate(provider: &DataProvider, sigmas: &[f64], seed: Option<&GraphSurface>, config: &SolveConfig) -> Result<FoliationResult> {
    config.validate()?;
    if sigmas.is_empty() {
        return Err(StcmcError::InsufficientLeaves { needed: 1, got: 0 });
    }
    if sigmas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(StcmcError::InvalidConfig("sigma list must be strictly increasing".into()));
    }
    let mut guess = match seed {
        Some(s) => s.clone(),
        None => GraphSurface::sphere([0.0; 3], sigmas[0], config.band)?,
    };
    let mut leaves: Vec<Leaf> = Vec::with_capacity(sigmas.len());
    for (k, &sigma) in sigmas.iter().enumerate() {
        if k > 0 {
            guess = guess.scaled(sigma / sigmas[k - 1]);
        }
        let result = newton_solve(provider, sigma, &guess, config)?;
        let geo = surface_frames(provider, &result.surface)?;
        let spectrum = laplace_spectrum(provider, &result.surface, 5)?;
        let scalars = geo.scalars();
        leaves.push(Leaf {
            sigma,
            surface: result.surface.clone(),
            area_radius: scalars.area_radius,
            center: scalars.coordinate_center,
            hawking_mass: scalars.hawking_mass,
            eigenvalues: [spectrum.eigenvalues[1], spectrum.eigenvalues[2], spectrum.eigenvalues[3]],
            fourth_eigenvalue: spectrum.eigenvalues[4],
            sigma_min: spectrum.sigma_min,
            residual: result.residual_sup,
            iterations: result.iterations,
            lapse_min: f64::NAN,
            lapse_positive: true,
        });
        guess = result.surface;
    }
    for k in 0..leaves.len().saturating_sub(1) {
        let d = leaves[k + 1].sigma - leaves[k].sigma;
        let lapse = divided_lapse(provider, &leaves[k].surface, &leaves[k + 1].surface, d)?;
        leaves[k].lapse_min = lapse;
        leaves[k].lapse_positive = lapse > 0.0;
    }
    if leaves.len() > 1 {
        let last = leaves.len() - 1;
        leaves[last].lapse_min = leaves[last - 1].lapse_min;
        leaves[last].lapse_positive = leaves[last - 1].lapse_positive;
    }
    Ok(FoliationResult { leaves })
}
