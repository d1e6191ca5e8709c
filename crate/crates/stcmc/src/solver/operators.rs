//! Linearized spacetime mean curvature operators as per-node differential
//! stencils, and their dense matrices in the real harmonic basis.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::DataProvider;
use crate::error::{Result, StcmcError};
use crate::sphere::{basis_len, Deriv, SphereGrid};
use crate::surface::{radial_sensitivity, surface_frames, GraphSurface, NodeGeometry, SurfaceGeometry};

/// Coefficients of `v, v_theta, v_phi, v_theta_theta, v_theta_phi, v_phi_phi`
/// in a second order operator evaluated at one node.
pub type Stencil = [f64; 6];

const KINDS: [Deriv; 6] =
    [Deriv::Value, Deriv::Theta, Deriv::Phi, Deriv::ThetaTheta, Deriv::ThetaPhi, Deriv::PhiPhi];

/// Coefficient of `K(grad f, nu)` in the variation of `P = tr_S K` along a
/// normal speed `f`. The normal turns by `-grad f`, so `K(nu, nu)` changes
/// by `-2 K(grad f, nu)` and `P` by the opposite amount.
pub const GRADIENT_COUPLING: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// Derivative of `sqrt(H^2 - P^2)` along a normal speed.
    Linearized,
    /// `(H dH - P dP) / H`; the classical stability operator when `K = 0`.
    Stability,
    /// `dH + dP`.
    ExpansionPlus,
    /// `dH - dP`.
    ExpansionMinus,
    /// `-Laplacian` of the induced metric.
    Laplacian,
}

impl OperatorKind {
    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Linearized => "linearized",
            OperatorKind::Stability => "stability",
            OperatorKind::ExpansionPlus => "expansion_plus",
            OperatorKind::ExpansionMinus => "expansion_minus",
            OperatorKind::Laplacian => "laplacian",
        }
    }
}

fn laplacian_stencil(g: &NodeGeometry) -> Stencil {
    let h = &g.metric_inv;
    let mut c = [0.0; 6];
    c[3] = -h[0][0];
    c[4] = -2.0 * h[0][1];
    c[5] = -h[1][1];
    for gamma in 0..2 {
        let mut acc = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                acc += h[a][b] * g.christoffel[gamma][a][b];
            }
        }
        c[1 + gamma] = acc;
    }
    c
}

/// Variations of `H` and `P` along a normal speed.
fn variation_stencils(g: &NodeGeometry) -> (Stencil, Stencil) {
    let mut dh = laplacian_stencil(g);
    dh[0] -= g.second_form_norm_sq + g.ricci_normal;
    let mut dp = [0.0; 6];
    dp[0] = g.normal_derivative_k;
    for b in 0..2 {
        let mut acc = 0.0;
        for a in 0..2 {
            acc += g.metric_inv[a][b] * g.k_tangent_normal[a];
        }
        dp[1 + b] = GRADIENT_COUPLING * acc;
    }
    (dh, dp)
}

fn combine(a: f64, x: &Stencil, b: f64, y: &Stencil) -> Stencil {
    let mut out = [0.0; 6];
    for k in 0..6 {
        out[k] = a * x[k] + b * y[k];
    }
    out
}

/// Stencil of `kind` acting on normal speeds at one node.
pub fn node_stencil(g: &NodeGeometry, kind: OperatorKind) -> Stencil {
    if kind == OperatorKind::Laplacian {
        return laplacian_stencil(g);
    }
    let (dh, dp) = variation_stencils(g);
    let (h, p) = (g.mean_curvature, g.momentum_trace);
    match kind {
        OperatorKind::Linearized => combine(h / g.stcmc, &dh, -p / g.stcmc, &dp),
        OperatorKind::Stability => combine(1.0, &dh, -p / h, &dp),
        OperatorKind::ExpansionPlus => combine(1.0, &dh, 1.0, &dp),
        OperatorKind::ExpansionMinus => combine(1.0, &dh, -1.0, &dp),
        OperatorKind::Laplacian => unreachable!(),
    }
}

pub fn normal_stencils(geo: &SurfaceGeometry, kind: OperatorKind) -> Vec<Stencil> {
    geo.nodes.iter().map(|g| node_stencil(g, kind)).collect()
}

/// Derivative of the nodal spacetime mean curvature with respect to the
/// radial height of a graph, at fixed parameter nodes of its geometry grid.
pub fn radial_stencils(provider: &DataProvider, surface: &GraphSurface) -> Result<Vec<Stencil>> {
    radial_sensitivity(provider, surface)
}

/// Nodal values of the stencils applied to a harmonic expansion.
pub fn apply_stencils(grid: &SphereGrid, stencils: &[Stencil], coeffs: &[f64]) -> Result<Vec<f64>> {
    if stencils.len() != grid.len() {
        return Err(StcmcError::ShapeMismatch { expected: grid.len(), actual: stencils.len() });
    }
    let mut out = vec![0.0; grid.len()];
    for (k, kind) in KINDS.iter().enumerate() {
        let values = grid.synthesize_kind(coeffs, *kind)?;
        for (o, (s, v)) in out.iter_mut().zip(stencils.iter().zip(&values)) {
            *o += s[k] * v;
        }
    }
    Ok(out)
}

/// Basis functions of band `band` and their derivatives sampled on a grid,
/// each as a `nodes x basis` matrix.
pub struct BasisTables {
    pub grid: Arc<SphereGrid>,
    pub band: usize,
    pub tables: [DMatrix<f64>; 6],
}

impl BasisTables {
    /// Cached tables for the pair `(grid band, band)`.
    pub fn shared(grid: &Arc<SphereGrid>, band: usize) -> Result<Arc<BasisTables>> {
        type Cache = Mutex<HashMap<(usize, usize), Arc<BasisTables>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        if band > grid.band() {
            return Err(StcmcError::ShapeMismatch { expected: grid.n_basis(), actual: basis_len(band) });
        }
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let key = (grid.band(), band);
        if let Some(t) = cache.lock().expect("basis cache poisoned").get(&key) {
            return Ok(t.clone());
        }
        let nodes = grid.len();
        let nb = basis_len(band);
        let tables: Vec<DMatrix<f64>> = KINDS
            .par_iter()
            .map(|kind| DMatrix::from_fn(nodes, nb, |n, k| grid.basis_at(k, n, *kind)))
            .collect();
        let tables: [DMatrix<f64>; 6] = tables.try_into().expect("six derivative tables");
        let t = Arc::new(BasisTables { grid: grid.clone(), band, tables });
        cache.lock().expect("basis cache poisoned").insert(key, t.clone());
        Ok(t)
    }

    pub fn n_basis(&self) -> usize {
        basis_len(self.band)
    }

    /// `nodes x basis` matrix of the stencils applied to each basis function.
    pub fn nodal_action(&self, stencils: &[Stencil]) -> DMatrix<f64> {
        let nodes = self.grid.len();
        let nb = self.n_basis();
        let mut out = DMatrix::zeros(nodes, nb);
        for (k, table) in self.tables.iter().enumerate() {
            for col in 0..nb {
                let src = table.column(col);
                let mut dst = out.column_mut(col);
                for n in 0..nodes {
                    dst[n] += stencils[n][k] * src[n];
                }
            }
        }
        out
    }

    /// `sum_n w_n Y_k(n) A(n, col)`: spectral projection of nodal columns,
    /// with optional extra nodal weights.
    pub fn project(&self, nodal: &DMatrix<f64>, extra: Option<&[f64]>) -> DMatrix<f64> {
        let mut weighted = nodal.clone();
        for n in 0..self.grid.len() {
            let w = self.grid.weight(n) * extra.map_or(1.0, |e| e[n]);
            weighted.row_mut(n).scale_mut(w);
        }
        self.tables[0].tr_mul(&weighted)
    }
}

/// Dense operator on harmonic coefficients of band `band`: collocation of the
/// stencils on the geometry grid followed by spectral projection.
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    pub kind: OperatorKind,
    pub band: usize,
    pub matrix: DMatrix<f64>,
}

impl OperatorMatrix {
    pub fn apply(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.matrix.ncols() {
            return Err(StcmcError::ShapeMismatch { expected: self.matrix.ncols(), actual: coeffs.len() });
        }
        Ok((&self.matrix * DVector::from_column_slice(coeffs)).as_slice().to_vec())
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|v| v.is_finite())
    }
}

pub fn operator_from_geometry(geo: &SurfaceGeometry, band: usize, kind: OperatorKind) -> Result<OperatorMatrix> {
    let tables = BasisTables::shared(&geo.grid, band)?;
    let nodal = tables.nodal_action(&normal_stencils(geo, kind));
    Ok(OperatorMatrix { kind, band, matrix: tables.project(&nodal, None) })
}

/// Matrix of `kind` on the surface, acting on normal speeds of the surface's
/// band limit.
pub fn assemble_linearization(provider: &DataProvider, surface: &GraphSurface, kind: OperatorKind) -> Result<OperatorMatrix> {
    let geo = surface_frames(provider, surface)?;
    operator_from_geometry(&geo, surface.band(), kind)
}

/// Jacobian of the projected spacetime mean curvature with respect to the
/// harmonic coefficients of the radial height.
pub fn radial_jacobian(provider: &DataProvider, surface: &GraphSurface, band: usize) -> Result<DMatrix<f64>> {
    let tables = BasisTables::shared(&surface.geometry_grid()?, band)?;
    let nodal = tables.nodal_action(&radial_stencils(provider, surface)?);
    Ok(tables.project(&nodal, None))
}

/// Relative size below which singular values are discarded in the
/// least-squares fallback, and below which an LU pivot counts as zero.
const SVD_CUTOFF: f64 = 1e-11;
const PIVOT_CUTOFF: f64 = 1e-10;

/// Solve `a x = b` by partial-pivoting LU; when the matrix is numerically
/// singular, return the minimum-norm least-squares solution instead.
/// The flag reports whether the fallback was used.
pub fn solve_dense(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, bool)> {
    let lu = a.clone().lu();
    let pivots = lu.u().diagonal().abs();
    if pivots.min() > PIVOT_CUTOFF * pivots.max() {
        if let Some(x) = lu.solve(b) {
            if x.iter().all(|v| v.is_finite()) {
                return Ok((x, false));
            }
        }
    }
    let svd = a.clone().svd(true, true);
    let cutoff = SVD_CUTOFF * svd.singular_values.max();
    let x = svd
        .solve(b, cutoff)
        .map_err(|e| StcmcError::EigenSolverFailure(format!("least-squares solve failed: {e}")))?;
    Ok((x, true))
}

/// Ratio of extreme singular values.
pub fn condition_number(a: &DMatrix<f64>) -> f64 {
    let s = a.clone().singular_values();
    let max = s.max();
    let min = s.min();
    if min > 0.0 {
        max / min
    } else {
        f64::INFINITY
    }
}
