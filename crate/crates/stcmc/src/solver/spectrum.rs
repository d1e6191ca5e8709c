use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};
use serde::Serialize;

use super::operators::{normal_stencils, BasisTables, OperatorKind};
use crate::chart::DataProvider;
use crate::error::{Result, StcmcError};
use crate::surface::{surface_frames, GraphSurface, SurfaceGeometry};

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    /// Lowest eigenvalues of `-Laplacian`, nondecreasing, starting at 0.
    pub eigenvalues: Vec<f64>,
    /// Harmonic coefficients of the matching `d mu`-orthonormal eigenfunctions.
    pub eigenfunctions: Vec<Vec<f64>>,
    /// `<f_j, f_i^flat>` for `j = 1..3` (rows) and `i = 1..3` (columns), with
    /// `f_i^flat = sqrt(3 / (4 pi r^4)) (x^i - z^i)`.
    pub alignment: [[f64; 3]; 3],
    /// Eigenfunctions 1..3 rotated towards `f_i^flat` and re-orthonormalized.
    pub translational: Vec<Vec<f64>>,
    /// `2 / sigma` taken as the area mean of the spacetime mean curvature.
    pub sigma: f64,
    pub area_radius: f64,
    pub hawking_mass: f64,
    /// `2/sigma^2 + 6 m / sigma^3`.
    pub predicted: f64,
    /// The same with `int Ric(nu, nu) f_i^2 d mu` added, per translational mode.
    pub predicted_with_ricci: [f64; 3],
    /// Smallest singular value of the stability operator in `L^2(d mu)`.
    pub sigma_min: f64,
    /// `3 |m| / sigma^3`.
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct OperatorBound {
    pub sigma_min: f64,
    pub bound: f64,
    pub ratio: f64,
    /// Smallest `|eigenvalue|` of the Galerkin stability operator; equals
    /// `sigma_min` when the operator is self-adjoint.
    pub min_abs_eigenvalue: f64,
    pub sigma: f64,
    pub hawking_mass: f64,
}

struct Galerkin {
    tables: std::sync::Arc<BasisTables>,
    chol: Cholesky<f64, Dyn>,
    dmu: Vec<f64>,
}

fn galerkin(geo: &SurfaceGeometry, band: usize) -> Result<Galerkin> {
    let tables = BasisTables::shared(&geo.grid, band)?;
    let dmu: Vec<f64> = geo.nodes.iter().map(|g| g.area_density).collect();
    let mass = tables.project(&tables.tables[0], Some(&dmu));
    let mass = (&mass + mass.transpose()) * 0.5;
    let chol = Cholesky::new(mass)
        .ok_or_else(|| StcmcError::EigenSolverFailure("area Gram matrix is not positive definite".into()))?;
    Ok(Galerkin { tables, chol, dmu })
}

impl Galerkin {
    /// `L^{-1} A L^{-T}` for the Cholesky factor `M = L L^T`.
    fn reduce(&self, a: &DMatrix<f64>) -> DMatrix<f64> {
        let l = self.chol.l();
        let x = l.solve_lower_triangular(a).expect("Cholesky factor is nonsingular");
        l.solve_lower_triangular(&x.transpose()).expect("Cholesky factor is nonsingular")
    }

    fn recover(&self, y: &DMatrix<f64>) -> DMatrix<f64> {
        self.chol.l().transpose().solve_upper_triangular(y).expect("Cholesky factor is nonsingular")
    }

    fn stiffness(&self, geo: &SurfaceGeometry) -> DMatrix<f64> {
        let t = &self.tables.tables;
        let nb = self.tables.n_basis();
        let mut s = DMatrix::zeros(nb, nb);
        for a in 0..2 {
            for b in 0..2 {
                let w: Vec<f64> = geo.nodes.iter().zip(&self.dmu).map(|(g, d)| g.metric_inv[a][b] * d).collect();
                s += weighted_gram(&self.tables, &t[1 + a], &t[1 + b], &w);
            }
        }
        (&s + s.transpose()) * 0.5
    }

    fn sym_eigen(&self, a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let c = self.reduce(a);
        let c = (&c + c.transpose()) * 0.5;
        if c.iter().any(|v| !v.is_finite()) {
            return Err(StcmcError::EigenSolverFailure("non-finite reduced matrix".into()));
        }
        let eig = SymmetricEigen::new(c);
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
        Ok((values, self.recover(&vectors)))
    }
}

/// `sum_n w_n x_n A(n, i) B(n, j)` with the quadrature weights included.
fn weighted_gram(tables: &BasisTables, a: &DMatrix<f64>, b: &DMatrix<f64>, x: &[f64]) -> DMatrix<f64> {
    let mut wb = b.clone();
    for n in 0..tables.grid.len() {
        wb.row_mut(n).scale_mut(tables.grid.weight(n) * x[n]);
    }
    a.tr_mul(&wb)
}

fn leaf_sigma(geo: &SurfaceGeometry) -> f64 {
    let area = geo.area();
    2.0 * area / geo.integrate_with(|g| g.stcmc)
}

/// Smallest singular value of the stability operator in the `d mu` norm:
/// `min |L h| / |h|` over band-limited `h`.
fn stability_sigma_min(geo: &SurfaceGeometry, gk: &Galerkin) -> Result<f64> {
    let nodal = gk.tables.nodal_action(&normal_stencils(geo, OperatorKind::Stability));
    let mut weighted = nodal;
    for n in 0..geo.len() {
        weighted.row_mut(n).scale_mut((geo.grid.weight(n) * gk.dmu[n]).sqrt());
    }
    // weighted * L^{-T}, formed as (L^{-1} weighted^T)^T
    let l = gk.chol.l();
    let a = l
        .solve_lower_triangular(&weighted.transpose())
        .ok_or_else(|| StcmcError::EigenSolverFailure("singular Gram factor".into()))?
        .transpose();
    let s = a.singular_values();
    Ok(s.min())
}

/// Lowest `k` eigenpairs of `-Laplacian` on the surface under the `d mu`
/// inner product, with the translational modes aligned to the coordinate
/// functions, and the stability operator's smallest singular value.
pub fn laplace_spectrum(provider: &DataProvider, surface: &GraphSurface, k: usize) -> Result<SpectralReport> {
    let band = surface.band();
    let cap = (band - 2) * (band - 2);
    if k < 4 || k > cap {
        return Err(StcmcError::InvalidConfig(format!("eigenpair count must lie in 4..={cap}, got {k}")));
    }
    let geo = surface_frames(provider, surface)?;
    let gk = galerkin(&geo, band)?;
    let (values, vectors) = gk.sym_eigen(&gk.stiffness(&geo))?;

    let scalars = geo.scalars();
    let r = scalars.area_radius;
    let z = scalars.coordinate_center;
    let norm = (3.0 / (4.0 * PI * r.powi(4))).sqrt();
    let grid = &geo.grid;
    let nodal_eig: Vec<Vec<f64>> = (1..4)
        .map(|j| grid.synthesize(vectors.column(j).as_slice()))
        .collect::<Result<_>>()?;
    let mut alignment = [[0.0; 3]; 3];
    for (j, f) in nodal_eig.iter().enumerate() {
        for i in 0..3 {
            alignment[j][i] = geo.integrate_with_index(|n, g| f[n] * norm * (g.position[i] - z[i]));
        }
    }
    // Gram-Schmidt on the projections, in eigenfunction coordinates where
    // the d mu inner product is Euclidean.
    let mut basis: Vec<[f64; 3]> = Vec::new();
    for i in 0..3 {
        let mut v = [alignment[0][i], alignment[1][i], alignment[2][i]];
        for b in &basis {
            let d = v[0] * b[0] + v[1] * b[1] + v[2] * b[2];
            for c in 0..3 {
                v[c] -= d * b[c];
            }
        }
        let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if len > 1e-12 {
            basis.push([v[0] / len, v[1] / len, v[2] / len]);
        }
    }
    let translational: Vec<Vec<f64>> = basis
        .iter()
        .map(|b| {
            let col = vectors.column(1) * b[0] + vectors.column(2) * b[1] + vectors.column(3) * b[2];
            col.as_slice().to_vec()
        })
        .collect();
    let mut predicted_with_ricci = [0.0; 3];
    let sigma = leaf_sigma(&geo);
    let m = scalars.hawking_mass;
    let predicted = 2.0 / (sigma * sigma) + 6.0 * m / sigma.powi(3);
    for (i, t) in translational.iter().enumerate() {
        let f = grid.synthesize(t)?;
        predicted_with_ricci[i] = predicted + geo.integrate_with_index(|n, g| g.ricci_normal * f[n] * f[n]);
    }

    Ok(SpectralReport {
        eigenvalues: values[..k].to_vec(),
        eigenfunctions: (0..k).map(|j| vectors.column(j).as_slice().to_vec()).collect(),
        alignment,
        translational,
        sigma,
        area_radius: r,
        hawking_mass: m,
        predicted,
        predicted_with_ricci,
        sigma_min: stability_sigma_min(&geo, &gk)?,
        bound: 3.0 * m.abs() / sigma.powi(3),
    })
}

/// Compare the smallest singular value of the stability operator with
/// `3 |m| / sigma^3`.
pub fn operator_bound_check(provider: &DataProvider, surface: &GraphSurface) -> Result<OperatorBound> {
    let geo = surface_frames(provider, surface)?;
    let gk = galerkin(&geo, surface.band())?;
    let sigma_min = stability_sigma_min(&geo, &gk)?;
    let nodal = gk.tables.nodal_action(&normal_stencils(&geo, OperatorKind::Stability));
    let weak = weighted_gram(&gk.tables, &gk.tables.tables[0], &nodal, &gk.dmu);
    let (values, _) = gk.sym_eigen(&weak)?;
    let min_abs = values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
    let sigma = leaf_sigma(&geo);
    let m = geo.hawking_mass();
    let bound = 3.0 * m.abs() / sigma.powi(3);
    Ok(OperatorBound {
        sigma_min,
        bound,
        ratio: if bound > 0.0 { sigma_min / bound } else { f64::INFINITY },
        min_abs_eigenvalue: min_abs,
        sigma,
        hawking_mass: m,
    })
}
