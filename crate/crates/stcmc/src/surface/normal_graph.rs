//! The STCMC equation written as a quasilinear PDE for a graph over a
//! round sphere of a background polar foliation. Only flat metrics are
//! supported; the foliation is by concentric coordinate spheres.

use super::{direction_jet, quad, GraphSurface};
use crate::chart::{DataProvider, PerturbationTarget, ProviderSpec};
use crate::error::{Result, StcmcError};
use crate::sphere::Deriv;

fn is_flat(spec: &ProviderSpec) -> bool {
    match spec {
        ProviderSpec::Euclidean => true,
        ProviderSpec::Translated { inner, .. } | ProviderSpec::Rotated { inner, .. } => is_flat(inner),
        ProviderSpec::CustomPerturbation { perturbation_terms } => {
            perturbation_terms.iter().all(|t| t.target == PerturbationTarget::Extrinsic)
        }
        _ => false,
    }
}

/// Residual `a^{ab} d_a d_b f + b^c d_c f - F` of the graph equation over
/// the sphere of radius `sigma` about `surface.center`, where the graph
/// height is `f = surface.radius - sigma + (harmonic part)`. Values are
/// returned on the surface's geometry grid.
///
/// Here `a = (g_t^{-1} - df df / W^2) / W`, `b^c = -a^{ab} Gamma^c_ab`, and
/// `F = a^{ab}(A_ab + 2 A^c_a f_b f_c) - sqrt(P^2 + 4 / sigma^2)`; the
/// residual equals `sqrt(P^2 + 4/sigma^2) - H` pointwise.
pub fn normal_graph_residual(provider: &DataProvider, surface: &GraphSurface, sigma: f64) -> Result<Vec<f64>> {
    if !is_flat(provider.spec()) {
        return Err(StcmcError::FoliationNotSupported(
            "the normal graph equation needs a flat metric".into(),
        ));
    }
    if !(sigma > 0.0) {
        return Err(StcmcError::NonpositiveRadius(sigma));
    }
    let grid = surface.geometry_grid()?;
    let f0 = surface.radius - sigma;
    let fv = grid.synthesize_kind(&surface.coeffs, Deriv::Value)?;
    let ft = grid.synthesize_kind(&surface.coeffs, Deriv::Theta)?;
    let fp = grid.synthesize_kind(&surface.coeffs, Deriv::Phi)?;
    let ftt = grid.synthesize_kind(&surface.coeffs, Deriv::ThetaTheta)?;
    let ftp = grid.synthesize_kind(&surface.coeffs, Deriv::ThetaPhi)?;
    let fpp = grid.synthesize_kind(&surface.coeffs, Deriv::PhiPhi)?;

    let mut out = Vec::with_capacity(grid.len());
    for n in 0..grid.len() {
        let (theta, phi) = grid.angles(n);
        let (st, ct) = (theta.sin(), theta.cos());
        let rho = sigma + f0 + fv[n];
        let df = [ft[n], fp[n]];
        let ddf = [[ftt[n], ftp[n]], [ftp[n], fpp[n]]];

        // leaf metric rho^2 (d theta^2 + sin^2 d phi^2) and its inverse
        let gt_inv = [[1.0 / (rho * rho), 0.0], [0.0, 1.0 / (rho * rho * st * st)]];
        let up = [gt_inv[0][0] * df[0], gt_inv[1][1] * df[1]];
        let grad_sq = up[0] * df[0] + up[1] * df[1];
        let w2 = 1.0 + grad_sq;
        let w = w2.sqrt();
        let mut hat = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                hat[a][b] = gt_inv[a][b] - up[a] * up[b] / w2;
            }
        }
        // round-sphere Christoffels
        let mut gamma = [[[0.0; 2]; 2]; 2];
        gamma[0][1][1] = -st * ct;
        gamma[1][0][1] = ct / st;
        gamma[1][1][0] = ct / st;

        // A_t = rho * round metric, so A^c_a f_b f_c = f_a f_b / rho
        let leaf_a = [[rho, 0.0], [0.0, rho * st * st]];
        let mut lead = 0.0;
        let mut drift = 0.0;
        let mut forcing = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let coef = hat[a][b] / w;
                lead += coef * ddf[a][b];
                for c in 0..2 {
                    drift -= coef * gamma[c][a][b] * df[c];
                }
                forcing += coef * (leaf_a[a][b] + 2.0 * df[a] * df[b] / rho);
            }
        }

        let p_trace = if provider.has_extrinsic() {
            let wj = direction_jet(theta, phi);
            let y = [
                surface.center[0] + rho * wj[0][0],
                surface.center[1] + rho * wj[0][1],
                surface.center[2] + rho * wj[0][2],
            ];
            let k = provider.extrinsic_value(y)?;
            let tang = [
                [rho * wj[1][0], rho * wj[1][1], rho * wj[1][2]],
                [rho * wj[2][0], rho * wj[2][1], rho * wj[2][2]],
            ];
            let k_tt = quad(&k, wj[0], wj[0]);
            let mut acc = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    let k_ab = quad(&k, tang[a], tang[b]);
                    let k_tb = quad(&k, wj[0], tang[b]);
                    acc += hat[a][b] * (k_ab + 2.0 * df[a] * k_tb + df[a] * df[b] * k_tt);
                }
            }
            acc
        } else {
            0.0
        };
        let rhs = forcing - (p_trace * p_trace + 4.0 / (sigma * sigma)).sqrt();
        out.push(lead + drift - rhs);
    }
    Ok(out)
}
