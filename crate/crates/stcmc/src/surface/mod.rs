//! Closed surfaces written as radial graphs over coordinate spheres, and
//! their extrinsic geometry inside an initial data set.

mod normal_graph;
mod snapshot;

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::chart::{
    christoffel, covariant_derivative_k, inverse, ricci, DataProvider, ExtrinsicJet, Mat3, MetricJet, Vec3,
};
use crate::error::{Result, StcmcError};
use crate::sphere::{
    angles_of, band_of, basis_len, dealias_band, evaluate_at, Deriv, SphereGrid, MIN_BAND_LIMIT,
};

pub use normal_graph::normal_graph_residual;
pub use snapshot::write_surface_csv;

pub type Mat2 = [[f64; 2]; 2];

/// `X(w) = center + (radius + f(w)) w`, with `f` band limited.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphSurface {
    pub center: Vec3,
    pub radius: f64,
    pub coeffs: Vec<f64>,
}

const DERIVS: [Deriv; 6] =
    [Deriv::Value, Deriv::Theta, Deriv::Phi, Deriv::ThetaTheta, Deriv::ThetaPhi, Deriv::PhiPhi];

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn norm(a: Vec3) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn quad(m: &Mat3, a: Vec3, b: Vec3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += m[i][j] * a[i] * b[j];
        }
    }
    acc
}

fn inverse2(h: &Mat2) -> (Mat2, f64) {
    let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
    ([[h[1][1] / det, -h[0][1] / det], [-h[1][0] / det, h[0][0] / det]], det)
}

/// Unit radial direction and its parameter derivatives, indexed like `DERIVS`.
fn direction_jet(theta: f64, phi: f64) -> [Vec3; 6] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [
        [st * cp, st * sp, ct],
        [ct * cp, ct * sp, -st],
        [-st * sp, st * cp, 0.0],
        [-st * cp, -st * sp, -ct],
        [-ct * sp, ct * cp, 0.0],
        [-st * cp, -st * sp, 0.0],
    ]
}

impl GraphSurface {
    pub fn new(center: Vec3, radius: f64, coeffs: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(StcmcError::NonpositiveRadius(radius));
        }
        match band_of(coeffs.len()) {
            Some(b) if b >= MIN_BAND_LIMIT => Ok(GraphSurface { center, radius, coeffs }),
            Some(b) => Err(StcmcError::BandLimitTooSmall { requested: b, minimum: MIN_BAND_LIMIT }),
            None => Err(StcmcError::ShapeMismatch { expected: basis_len(MIN_BAND_LIMIT), actual: coeffs.len() }),
        }
    }

    pub fn sphere(center: Vec3, radius: f64, band: usize) -> Result<Self> {
        Self::new(center, radius, vec![0.0; basis_len(band)])
    }

    pub fn band(&self) -> usize {
        band_of(self.coeffs.len()).unwrap_or(0)
    }

    /// Grid on which products of surface quantities are resolved.
    pub fn geometry_grid(&self) -> Result<Arc<SphereGrid>> {
        SphereGrid::shared(dealias_band(self.band()))
    }

    /// Radial distance from the center in direction `(theta, phi)`.
    pub fn radius_at(&self, theta: f64, phi: f64) -> f64 {
        self.radius + evaluate_at(&self.coeffs, theta, phi).unwrap_or(0.0)
    }

    pub fn point_at(&self, theta: f64, phi: f64) -> Vec3 {
        let w = direction_jet(theta, phi)[0];
        let rho = self.radius_at(theta, phi);
        [self.center[0] + rho * w[0], self.center[1] + rho * w[1], self.center[2] + rho * w[2]]
    }

    /// Nodal embedding with exact parameter derivatives.
    pub fn embedding(&self, grid: &Arc<SphereGrid>) -> Result<Embedding> {
        let mut rho = Vec::with_capacity(6);
        for kind in DERIVS {
            rho.push(grid.synthesize_kind(&self.coeffs, kind)?);
        }
        let n = grid.len();
        let mut d: [Vec<Vec3>; 6] = Default::default();
        for slot in d.iter_mut() {
            slot.reserve(n);
        }
        for node in 0..n {
            let (theta, phi) = grid.angles(node);
            let w = direction_jet(theta, phi);
            let r = self.radius + rho[0][node];
            let (rt, rp) = (rho[1][node], rho[2][node]);
            let (rtt, rtp, rpp) = (rho[3][node], rho[4][node], rho[5][node]);
            let comb = |a: f64, va: Vec3, b: f64, vb: Vec3, c: f64, vc: Vec3, e: f64, ve: Vec3| -> Vec3 {
                [
                    a * va[0] + b * vb[0] + c * vc[0] + e * ve[0],
                    a * va[1] + b * vb[1] + c * vc[1] + e * ve[1],
                    a * va[2] + b * vb[2] + c * vc[2] + e * ve[2],
                ]
            };
            let z = [0.0; 3];
            let x = comb(r, w[0], 1.0, self.center, 0.0, z, 0.0, z);
            d[0].push(x);
            d[1].push(comb(rt, w[0], r, w[1], 0.0, z, 0.0, z));
            d[2].push(comb(rp, w[0], r, w[2], 0.0, z, 0.0, z));
            d[3].push(comb(rtt, w[0], 2.0 * rt, w[1], r, w[3], 0.0, z));
            d[4].push(comb(rtp, w[0], rt, w[2], rp, w[1], r, w[4]));
            d[5].push(comb(rpp, w[0], 2.0 * rp, w[2], r, w[5], 0.0, z));
        }
        Ok(Embedding { grid: grid.clone(), d })
    }

    /// Re-express the same surface as a radial graph about `center`, with the
    /// mean of the height function absorbed into the base radius.
    pub fn rebase(&self, center: Vec3) -> Result<GraphSurface> {
        let grid = self.geometry_grid()?;
        let band = self.band();
        let radii: Vec<f64> = (0..grid.len())
            .into_par_iter()
            .map(|node| {
                let target = grid.direction(node);
                self.ray_hit(center, target)
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut coeffs = grid.analyze_to(&radii, band)?;
        let mean = coeffs[0] / (4.0 * PI).sqrt();
        coeffs[0] = 0.0;
        GraphSurface::new(center, mean, coeffs)
    }

    /// Distance from `origin` along the unit direction `dir` to the surface.
    fn ray_hit(&self, origin: Vec3, dir: Vec3) -> Result<f64> {
        let offset = sub(origin, self.center);
        let mut rho = self.radius + dot(offset, dir);
        for _ in 0..100 {
            let p = [offset[0] + rho * dir[0], offset[1] + rho * dir[1], offset[2] + rho * dir[2]];
            let dist = norm(p);
            let (theta, phi) = angles_of(p);
            let height = self.radius_at(theta, phi);
            let step = dist - height;
            rho -= step / (dot(p, dir) / dist).max(0.1);
            if step.abs() < 1e-14 * self.radius {
                return Ok(rho);
            }
        }
        Err(StcmcError::NewtonDiverged { iterations: 100, residual: f64::NAN })
    }

    /// Euclidean area centroid, computed without any initial data.
    pub fn coordinate_center(&self) -> Result<Vec3> {
        let grid = self.geometry_grid()?;
        Ok(self.embedding(&grid)?.flat_centroid())
    }

    /// `self + t * delta` in coefficient space, same center and base radius.
    pub fn perturbed(&self, delta: &[f64], t: f64) -> Result<GraphSurface> {
        if delta.len() != self.coeffs.len() {
            return Err(StcmcError::ShapeMismatch { expected: self.coeffs.len(), actual: delta.len() });
        }
        let coeffs = self.coeffs.iter().zip(delta).map(|(a, d)| a + t * d).collect();
        GraphSurface::new(self.center, self.radius, coeffs)
    }

    /// Move the l = 0 part of the height into the base radius.
    pub fn absorb_mean(&mut self) {
        let mean = self.coeffs[0] / (4.0 * PI).sqrt();
        self.radius += mean;
        self.coeffs[0] = 0.0;
    }

    /// Radially rescale about the center.
    pub fn scaled(&self, factor: f64) -> GraphSurface {
        GraphSurface {
            center: self.center,
            radius: self.radius * factor,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Same shape at a different band limit (truncated or zero padded).
    pub fn with_band(&self, band: usize) -> Result<GraphSurface> {
        GraphSurface::new(self.center, self.radius, crate::sphere::resize_coeffs(&self.coeffs, band))
    }
}

/// Nodal positions with parameter derivatives, indexed like `Deriv`:
/// value, theta, phi, theta-theta, theta-phi, phi-phi.
#[derive(Clone, Debug)]
pub struct Embedding {
    pub grid: Arc<SphereGrid>,
    pub d: [Vec<Vec3>; 6],
}

impl Embedding {
    /// Spectrally differentiate arbitrary nodal positions.
    pub fn from_positions(grid: &Arc<SphereGrid>, positions: &[Vec3]) -> Result<Embedding> {
        if positions.len() != grid.len() {
            return Err(StcmcError::ShapeMismatch { expected: grid.len(), actual: positions.len() });
        }
        let mut d: [Vec<Vec3>; 6] = Default::default();
        for slot in d.iter_mut() {
            *slot = vec![[0.0; 3]; grid.len()];
        }
        for c in 0..3 {
            let comp: Vec<f64> = positions.iter().map(|p| p[c]).collect();
            let derivs = grid.differentiate(&comp)?;
            for (k, values) in derivs.iter().enumerate() {
                for (n, v) in values.iter().enumerate() {
                    d[k][n][c] = *v;
                }
            }
        }
        Ok(Embedding { grid: grid.clone(), d })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.d[0]
    }

    /// Centroid with respect to the Euclidean area measure.
    pub fn flat_centroid(&self) -> Vec3 {
        let mut z = [0.0; 3];
        let mut area = 0.0;
        for n in 0..self.grid.len() {
            let (sin_t, _) = self.grid.sin_cos_theta(n);
            let w = norm(cross(self.d[1][n], self.d[2][n])) / sin_t * self.grid.weight(n);
            area += w;
            for c in 0..3 {
                z[c] += w * self.d[0][n][c];
            }
        }
        [z[0] / area, z[1] / area, z[2] / area]
    }
}

/// Pointwise geometry of a surface in the initial data set, together with
/// the Euclidean counterparts of the same coordinate surface.
#[derive(Clone, Debug, Serialize)]
pub struct NodeGeometry {
    pub position: Vec3,
    pub tangents: [Vec3; 2],
    pub metric: Mat2,
    pub metric_inv: Mat2,
    /// `d mu / d Omega` at the parameter node.
    pub area_density: f64,
    /// g-unit outward normal (vector components).
    pub normal: Vec3,
    pub normal_covector: Vec3,
    pub second_form: Mat2,
    pub mean_curvature: f64,
    pub momentum_trace: f64,
    pub stcmc: f64,
    pub second_form_norm_sq: f64,
    pub ricci_normal: f64,
    /// `nabla_nu tr K - (nabla_nu K)(nu, nu)`.
    pub normal_derivative_k: f64,
    /// `K(e_a, nu)` for the two coordinate tangents.
    pub k_tangent_normal: [f64; 2],
    /// Levi-Civita symbols of the induced metric, `[c][a][b]`.
    pub christoffel: [Mat2; 2],
    pub normal_flat: Vec3,
    pub metric_flat: Mat2,
    pub area_density_flat: f64,
    pub second_form_flat: Mat2,
    pub mean_curvature_flat: f64,
}

/// Geometry of a surface on its geometry grid.
#[derive(Clone, Debug)]
pub struct SurfaceGeometry {
    pub grid: Arc<SphereGrid>,
    pub nodes: Vec<NodeGeometry>,
}

fn node_geometry(provider: &DataProvider, emb: &Embedding, node: usize) -> Result<NodeGeometry> {
    let jets: [Vec3; 6] = std::array::from_fn(|k| emb.d[k][node]);
    let (sin_t, _) = emb.grid.sin_cos_theta(node);
    let ambient = Ambient::at(provider, jets[0])?;
    local_geometry(&ambient, &jets, sin_t, node)
}

/// Data of the initial data set at one point.
struct Ambient {
    jet: MetricJet,
    ext: ExtrinsicJet,
    extrinsic: bool,
}

impl Ambient {
    fn at(provider: &DataProvider, x: Vec3) -> Result<Ambient> {
        Ok(Ambient { jet: provider.metric_jet(x)?, ext: provider.extrinsic_jet(x)?, extrinsic: provider.has_extrinsic() })
    }
}

fn local_geometry(ambient: &Ambient, jets: &[Vec3; 6], sin_t: f64, node: usize) -> Result<NodeGeometry> {
    let x = jets[0];
    let e = [jets[1], jets[2]];
    let second = [[jets[3], jets[4]], [jets[4], jets[5]]];
    let (jet, ext) = (&ambient.jet, &ambient.ext);
    let g = jet.g;
    let ginv = inverse(&g);
    let gamma = christoffel(&ginv, &jet.dg);

    let mut h = [[0.0; 2]; 2];
    let mut hf = [[0.0; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            h[a][b] = quad(&g, e[a], e[b]);
            hf[a][b] = dot(e[a], e[b]);
        }
    }
    let (hinv, det) = inverse2(&h);
    if !(det > 0.0) {
        return Err(StcmcError::DegenerateInducedMetric { node, det });
    }
    let (hfinv, _) = inverse2(&hf);

    let n = cross(e[0], e[1]);
    let n_len = quad(&ginv, n, n).sqrt();
    let nu_cov = [n[0] / n_len, n[1] / n_len, n[2] / n_len];
    let mut nu = [0.0; 3];
    for i in 0..3 {
        nu[i] = (0..3).map(|j| ginv[i][j] * nu_cov[j]).sum();
    }
    let n_flat_len = norm(n);
    let nu_flat = [n[0] / n_flat_len, n[1] / n_flat_len, n[2] / n_flat_len];

    // ambient covariant derivative of coordinate tangents
    let mut cov_d = [[[0.0; 3]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            for i in 0..3 {
                let mut acc = second[a][b][i];
                for j in 0..3 {
                    for k in 0..3 {
                        acc += gamma[i][j][k] * e[a][j] * e[b][k];
                    }
                }
                cov_d[a][b][i] = acc;
            }
        }
    }
    let mut a_form = [[0.0; 2]; 2];
    let mut a_flat = [[0.0; 2]; 2];
    let mut first_kind = [[[0.0; 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            a_form[a][b] = -dot(nu_cov, cov_d[a][b]);
            a_flat[a][b] = -dot(nu_flat, second[a][b]);
            for c in 0..2 {
                first_kind[c][a][b] = quad(&g, cov_d[a][b], e[c]);
            }
        }
    }
    let mut chris = [[[0.0; 2]; 2]; 2];
    for c in 0..2 {
        for a in 0..2 {
            for b in 0..2 {
                chris[c][a][b] = hinv[c][0] * first_kind[0][a][b] + hinv[c][1] * first_kind[1][a][b];
            }
        }
    }

    let mut mean = 0.0;
    let mut mean_flat = 0.0;
    let mut p_trace = 0.0;
    let mut a_sq = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            mean += hinv[a][b] * a_form[a][b];
            mean_flat += hfinv[a][b] * a_flat[a][b];
            p_trace += hinv[a][b] * quad(&ext.k, e[a], e[b]);
            for c in 0..2 {
                for d in 0..2 {
                    a_sq += hinv[a][c] * hinv[b][d] * a_form[a][b] * a_form[c][d];
                }
            }
        }
    }
    let stcmc_sq = mean * mean - p_trace * p_trace;
    if stcmc_sq < 0.0 {
        return Err(StcmcError::TrappedRegion { node, h: mean, p: p_trace });
    }

    let ric = ricci(jet);
    let ricci_normal = quad(&ric, nu, nu);
    let (normal_derivative_k, k_tangent_normal) = if ambient.extrinsic {
        let nabla_k = covariant_derivative_k(&gamma, ext);
        let mut q = 0.0;
        for l in 0..3 {
            q += nu[l] * (crate::chart::trace(&ginv, &nabla_k[l]) - quad(&nabla_k[l], nu, nu));
        }
        (q, [quad(&ext.k, e[0], nu), quad(&ext.k, e[1], nu)])
    } else {
        (0.0, [0.0, 0.0])
    };

    Ok(NodeGeometry {
        position: x,
        tangents: e,
        metric: h,
        metric_inv: hinv,
        area_density: det.sqrt() / sin_t,
        normal: nu,
        normal_covector: nu_cov,
        second_form: a_form,
        mean_curvature: mean,
        momentum_trace: p_trace,
        stcmc: stcmc_sq.sqrt(),
        second_form_norm_sq: a_sq,
        ricci_normal,
        normal_derivative_k,
        k_tangent_normal,
        christoffel: chris,
        normal_flat: nu_flat,
        metric_flat: hf,
        area_density_flat: n_flat_len / sin_t,
        second_form_flat: a_flat,
        mean_curvature_flat: mean_flat,
    })
}

/// Geometry of an arbitrary nodal embedding.
pub fn embedding_geometry(provider: &DataProvider, emb: &Embedding) -> Result<SurfaceGeometry> {
    let nodes = (0..emb.grid.len())
        .into_par_iter()
        .map(|n| node_geometry(provider, emb, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGeometry { grid: emb.grid.clone(), nodes })
}

/// Relative step of the five point differences in [`radial_sensitivity`].
const JET_STEP: f64 = 1e-3;

/// Partial derivatives of the nodal spacetime mean curvature of a radial
/// graph with respect to the local jet `(r, r_theta, r_phi, r_theta_theta,
/// r_theta_phi, r_phi_phi)` of its height, on the geometry grid.
///
/// A height variation `v` changes the nodal value by `sum_k s[k] v_k`, with
/// `v_k` the same jet of `v`.
pub fn radial_sensitivity(provider: &DataProvider, surface: &GraphSurface) -> Result<Vec<[f64; 6]>> {
    let grid = surface.geometry_grid()?;
    let emb = surface.embedding(&grid)?;
    (0..grid.len())
        .into_par_iter()
        .map(|node| {
            let (theta, phi) = grid.angles(node);
            let (sin_t, _) = grid.sin_cos_theta(node);
            let w = direction_jet(theta, phi);
            let base: [Vec3; 6] = std::array::from_fn(|k| emb.d[k][node]);
            let h = JET_STEP * norm(sub(base[0], surface.center)).max(1.0);
            let ambient = Ambient::at(provider, base[0])?;
            // embedding jet directions of a unit change in each height jet
            let mut dirs = [[[0.0; 3]; 6]; 6];
            dirs[0] = w;
            dirs[1][1] = w[0];
            dirs[1][3] = w[1].map(|c| 2.0 * c);
            dirs[1][4] = w[2];
            dirs[2][2] = w[0];
            dirs[2][4] = w[1];
            dirs[2][5] = w[2].map(|c| 2.0 * c);
            dirs[3][3] = w[0];
            dirs[4][4] = w[0];
            dirs[5][5] = w[0];
            let mut out = [0.0; 6];
            for (k, dir) in dirs.iter().enumerate() {
                let value = |t: f64| -> Result<f64> {
                    let jets: [Vec3; 6] = std::array::from_fn(|j| {
                        [base[j][0] + t * dir[j][0], base[j][1] + t * dir[j][1], base[j][2] + t * dir[j][2]]
                    });
                    if k == 0 {
                        local_geometry(&Ambient::at(provider, jets[0])?, &jets, sin_t, node).map(|g| g.stcmc)
                    } else {
                        local_geometry(&ambient, &jets, sin_t, node).map(|g| g.stcmc)
                    }
                };
                out[k] = (8.0 * (value(h)? - value(-h)?) - (value(2.0 * h)? - value(-2.0 * h)?)) / (12.0 * h);
            }
            Ok(out)
        })
        .collect()
}

/// Geometry of a radial graph on its dealiased geometry grid.
pub fn surface_frames(provider: &DataProvider, surface: &GraphSurface) -> Result<SurfaceGeometry> {
    let grid = surface.geometry_grid()?;
    embedding_geometry(provider, &surface.embedding(&grid)?)
}

/// Integral quantities of a surface.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SurfaceScalars {
    pub area: f64,
    pub area_flat: f64,
    pub area_radius: f64,
    pub coordinate_center: Vec3,
    pub hawking_mass: f64,
    pub geroch_mass: f64,
    pub willmore_deficit: f64,
    pub min_coordinate_radius: f64,
    pub max_coordinate_radius: f64,
    pub mean_stcmc: f64,
}

/// A-priori class slacks; nonnegative entries mean the inequality holds.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct AprioriSlack {
    pub center: f64,
    pub roundness: f64,
    pub willmore: f64,
}

/// Sup-norm differences between the geometry in g and in the flat metric.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct EuclideanComparison {
    pub normal: f64,
    pub second_form: f64,
    pub mean_curvature: f64,
    pub area_density_relative: f64,
}

impl SurfaceGeometry {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int v d mu`.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.nodes
            .iter()
            .enumerate()
            .map(|(n, g)| values[n] * g.area_density * self.grid.weight(n))
            .sum()
    }

    pub fn integrate_with<F: Fn(&NodeGeometry) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().enumerate().map(|(n, g)| f(g) * g.area_density * self.grid.weight(n)).sum()
    }

    /// `int f(n, node) d mu`, for integrands that also need nodal arrays.
    pub fn integrate_with_index<F: Fn(usize, &NodeGeometry) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().enumerate().map(|(n, g)| f(n, g) * g.area_density * self.grid.weight(n)).sum()
    }

    pub fn stcmc_values(&self) -> Vec<f64> {
        self.nodes.iter().map(|g| g.stcmc).collect()
    }

    pub fn area(&self) -> f64 {
        self.integrate_with(|_| 1.0)
    }

    pub fn area_radius(&self) -> f64 {
        (self.area() / (4.0 * PI)).sqrt()
    }

    pub fn coordinate_center(&self) -> Vec3 {
        let mut z = [0.0; 3];
        let mut area = 0.0;
        for (n, g) in self.nodes.iter().enumerate() {
            let w = g.area_density_flat * self.grid.weight(n);
            area += w;
            for c in 0..3 {
                z[c] += w * g.position[c];
            }
        }
        [z[0] / area, z[1] / area, z[2] / area]
    }

    pub fn hawking_mass(&self) -> f64 {
        let area = self.area();
        let willmore = self.integrate_with(|g| g.stcmc * g.stcmc);
        (area / (16.0 * PI)).sqrt() * (1.0 - willmore / (16.0 * PI))
    }

    pub fn scalars(&self) -> SurfaceScalars {
        let area = self.area();
        let area_flat: f64 =
            self.nodes.iter().enumerate().map(|(n, g)| g.area_density_flat * self.grid.weight(n)).sum();
        let h2 = self.integrate_with(|g| g.mean_curvature * g.mean_curvature);
        let sh2 = self.integrate_with(|g| g.stcmc * g.stcmc);
        let radii: Vec<f64> = self.nodes.iter().map(|g| norm(g.position)).collect();
        let scale = (area / (16.0 * PI)).sqrt();
        SurfaceScalars {
            area,
            area_flat,
            area_radius: (area / (4.0 * PI)).sqrt(),
            coordinate_center: self.coordinate_center(),
            hawking_mass: scale * (1.0 - sh2 / (16.0 * PI)),
            geroch_mass: scale * (1.0 - h2 / (16.0 * PI)),
            willmore_deficit: h2 - 16.0 * PI,
            min_coordinate_radius: radii.iter().cloned().fold(f64::INFINITY, f64::min),
            max_coordinate_radius: radii.iter().cloned().fold(0.0, f64::max),
            mean_stcmc: self.integrate_with(|g| g.stcmc) / area,
        }
    }

    /// Slack in `|z| <= a r + b r^(1-eta)`, `r^(2+eta) <= min|x|^(5/2+eps)`
    /// and `int H^2 - 16 pi <= b r^-eta`.
    pub fn apriori_class_check(&self, a: f64, b: f64, eta: f64, epsilon: f64) -> AprioriSlack {
        let s = self.scalars();
        let r = s.area_radius;
        AprioriSlack {
            center: a * r + b * r.powf(1.0 - eta) - norm(s.coordinate_center),
            roundness: s.min_coordinate_radius.powf(2.5 + epsilon) - r.powf(2.0 + eta),
            willmore: b * r.powf(-eta) - s.willmore_deficit,
        }
    }

    pub fn euclidean_comparison(&self) -> EuclideanComparison {
        let mut out = EuclideanComparison { normal: 0.0, second_form: 0.0, mean_curvature: 0.0, area_density_relative: 0.0 };
        for g in &self.nodes {
            out.normal = out.normal.max(norm(sub(g.normal, g.normal_flat)));
            let (hfinv, _) = inverse2(&g.metric_flat);
            let mut diff_sq = 0.0;
            for a in 0..2 {
                for b in 0..2 {
                    for c in 0..2 {
                        for d in 0..2 {
                            diff_sq += hfinv[a][c]
                                * hfinv[b][d]
                                * (g.second_form[a][b] - g.second_form_flat[a][b])
                                * (g.second_form[c][d] - g.second_form_flat[c][d]);
                        }
                    }
                }
            }
            out.second_form = out.second_form.max(diff_sq.max(0.0).sqrt());
            out.mean_curvature = out.mean_curvature.max((g.mean_curvature - g.mean_curvature_flat).abs());
            out.area_density_relative =
                out.area_density_relative.max((g.area_density / g.area_density_flat - 1.0).abs());
        }
        out
    }

    /// Sup over nodes of `|stcmc - target|`.
    pub fn stcmc_deviation(&self, target: f64) -> f64 {
        self.nodes.iter().map(|g| (g.stcmc - target).abs()).fold(0.0, f64::max)
    }
}
