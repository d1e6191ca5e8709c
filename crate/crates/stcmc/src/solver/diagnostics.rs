use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use super::operators::radial_jacobian;
use super::{newton_solve, SolveConfig, SolveResult};
use crate::chart::{DataProvider, Vec3};
use crate::error::{Result, StcmcError};
use crate::sphere::{band_of, dealias_band, SphereGrid};
use crate::surface::{embedding_geometry, surface_frames, Embedding, GraphSurface};

#[derive(Clone, Debug, Serialize)]
pub struct CenterVariation {
    /// Centered difference of the coordinate center along `X + s u nu`.
    pub finite_difference: Vec3,
    /// `3 / |S| int u nu d mu`.
    pub formula: Vec3,
    pub discrepancy: f64,
    pub sigma: f64,
    /// `|u|` in `L^2(d mu)`.
    pub speed_l2: f64,
}

/// Compare the first variation of the coordinate center under the normal
/// speed `u` (harmonic coefficients) with its integral expression.
pub fn center_variation_check(provider: &DataProvider, surface: &GraphSurface, u: &[f64]) -> Result<CenterVariation> {
    let u_band = band_of(u.len()).ok_or(StcmcError::ShapeMismatch { expected: surface.coeffs.len(), actual: u.len() })?;
    // twice the usual resolution: the displaced surface is not band limited
    let grid = SphereGrid::shared(2 * dealias_band(surface.band().max(u_band)))?;
    let geo = embedding_geometry(provider, &surface.embedding(&grid)?)?;
    let speed = grid.synthesize(u)?;
    let area = geo.area();
    let mut formula = [0.0; 3];
    for i in 0..3 {
        formula[i] = 3.0 / area * geo.integrate_with_index(|n, g| speed[n] * g.normal[i]);
    }
    let h = 1e-4 * surface.radius / speed.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    let shifted = |s: f64| -> Result<Vec3> {
        let pos: Vec<Vec3> = geo
            .nodes
            .iter()
            .zip(&speed)
            .map(|(g, u)| {
                let d = s * u;
                [g.position[0] + d * g.normal[0], g.position[1] + d * g.normal[1], g.position[2] + d * g.normal[2]]
            })
            .collect();
        Ok(Embedding::from_positions(&grid, &pos)?.flat_centroid())
    };
    let (plus, minus) = (shifted(h)?, shifted(-h)?);
    let fd = [(plus[0] - minus[0]) / (2.0 * h), (plus[1] - minus[1]) / (2.0 * h), (plus[2] - minus[2]) / (2.0 * h)];
    let discrepancy = ((fd[0] - formula[0]).powi(2) + (fd[1] - formula[1]).powi(2) + (fd[2] - formula[2]).powi(2)).sqrt();
    let sigma = 2.0 * area / geo.integrate_with(|g| g.stcmc);
    let speed_l2 = geo.integrate_with_index(|n, _| speed[n] * speed[n]).sqrt();
    Ok(CenterVariation { finite_difference: fd, formula, discrepancy, sigma, speed_l2 })
}

#[derive(Clone, Debug, Serialize)]
pub struct UniquenessReport {
    /// Largest sup-distance between the radial heights of two converged
    /// leaves, both expressed about the first leaf's center.
    pub distance: f64,
    pub results: Vec<SolveResult>,
}

/// Solve from every seed and measure how far apart the converged leaves are.
pub fn uniqueness_cross_check(
    provider: &DataProvider,
    sigma: f64,
    seeds: &[GraphSurface],
    config: &SolveConfig,
) -> Result<UniquenessReport> {
    if seeds.is_empty() {
        return Err(StcmcError::InsufficientLeaves { needed: 1, got: 0 });
    }
    let results: Vec<SolveResult> =
        seeds.par_iter().map(|s| newton_solve(provider, sigma, s, config)).collect::<Result<_>>()?;
    let center = results[0].surface.center;
    let grid = results[0].surface.geometry_grid()?;
    let heights: Vec<Vec<f64>> = results
        .iter()
        .map(|r| {
            let s = r.surface.rebase(center)?;
            let f = grid.synthesize(&s.coeffs)?;
            Ok(f.iter().map(|v| v + s.radius).collect())
        })
        .collect::<Result<_>>()?;
    let mut distance = 0.0f64;
    for i in 0..heights.len() {
        for j in i + 1..heights.len() {
            for (a, b) in heights[i].iter().zip(&heights[j]) {
                distance = distance.max((a - b).abs());
            }
        }
    }
    Ok(UniquenessReport { distance, results })
}

/// Relative error, in harmonic coefficients, between the radial Jacobian
/// applied to `direction` and a centered difference of the projected
/// spacetime mean curvature with step `step`.
pub fn linearization_error(provider: &DataProvider, surface: &GraphSurface, direction: &[f64], step: f64) -> Result<f64> {
    let band = surface.band();
    let geo = surface_frames(provider, surface)?;
    let jac = radial_jacobian(provider, surface, band)?;
    if direction.len() != jac.ncols() {
        return Err(StcmcError::ShapeMismatch { expected: jac.ncols(), actual: direction.len() });
    }
    let action = &jac * DVector::from_column_slice(direction);
    let plus = surface_frames(provider, &surface.perturbed(direction, step)?)?.stcmc_values();
    let minus = surface_frames(provider, &surface.perturbed(direction, -step)?)?.stcmc_values();
    let fd: Vec<f64> = plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * step)).collect();
    let fd = DVector::from_vec(geo.grid.analyze_to(&fd, band)?);
    Ok((action - &fd).norm() / fd.norm())
}
