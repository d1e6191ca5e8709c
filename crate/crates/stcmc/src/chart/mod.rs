//! Asymptotically Euclidean initial data on a single chart: providers,
//! analytic jets, curvature and the constraint densities.

mod decay;
mod provider;

pub use decay::{decay_check, DecayReport, DecayRow};
pub use provider::{
    orthogonality_defect, DataProvider, PerturbationTarget, PerturbationTerm, ProviderSpec,
    CUSTOM_CORE_RADIUS,
};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];
/// `t[i][j][k]`; for Christoffel symbols the first index is the raised one.
pub type Tensor3 = [[[f64; 3]; 3]; 3];

/// Metric with exact first and second coordinate derivatives.
/// `dg[k][i][j] = d_k g_ij`, `ddg[k][l][i][j] = d_k d_l g_ij`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct MetricJet {
    pub g: Mat3,
    pub dg: [Mat3; 3],
    pub ddg: [[Mat3; 3]; 3],
}

/// Second fundamental form with exact first derivatives, `dk[l][i][j] = d_l K_ij`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ExtrinsicJet {
    pub k: Mat3,
    pub dk: [Mat3; 3],
}

pub fn inverse(g: &Mat3) -> Mat3 {
    let c00 = g[1][1] * g[2][2] - g[1][2] * g[2][1];
    let c01 = g[1][2] * g[2][0] - g[1][0] * g[2][2];
    let c02 = g[1][0] * g[2][1] - g[1][1] * g[2][0];
    let det = g[0][0] * c00 + g[0][1] * c01 + g[0][2] * c02;
    let inv = 1.0 / det;
    [
        [c00 * inv, (g[0][2] * g[2][1] - g[0][1] * g[2][2]) * inv, (g[0][1] * g[1][2] - g[0][2] * g[1][1]) * inv],
        [c01 * inv, (g[0][0] * g[2][2] - g[0][2] * g[2][0]) * inv, (g[0][2] * g[1][0] - g[0][0] * g[1][2]) * inv],
        [c02 * inv, (g[0][1] * g[2][0] - g[0][0] * g[2][1]) * inv, (g[0][0] * g[1][1] - g[0][1] * g[1][0]) * inv],
    ]
}

pub fn trace(ginv: &Mat3, t: &Mat3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += ginv[i][j] * t[i][j];
        }
    }
    acc
}

/// `Gamma^i_jk` from a first-order jet.
pub fn christoffel(ginv: &Mat3, dg: &[Mat3; 3]) -> Tensor3 {
    let mut first = [[[0.0; 3]; 3]; 3];
    for l in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                first[l][j][k] = 0.5 * (dg[j][l][k] + dg[k][l][j] - dg[l][j][k]);
            }
        }
    }
    let mut gamma = [[[0.0; 3]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                gamma[i][j][k] = (0..3).map(|l| ginv[i][l] * first[l][j][k]).sum();
            }
        }
    }
    gamma
}

/// Ricci tensor `R_jk`.
pub fn ricci(jet: &MetricJet) -> Mat3 {
    let ginv = inverse(&jet.g);
    let gamma = christoffel(&ginv, &jet.dg);
    // d_m g^{il} = -g^{ia} d_m g_ab g^{bl}
    let mut dginv = [[[0.0; 3]; 3]; 3];
    for m in 0..3 {
        for i in 0..3 {
            for l in 0..3 {
                let mut acc = 0.0;
                for a in 0..3 {
                    for b in 0..3 {
                        acc -= ginv[i][a] * jet.dg[m][a][b] * ginv[b][l];
                    }
                }
                dginv[m][i][l] = acc;
            }
        }
    }
    // dgamma[m][i][j][k] = d_m Gamma^i_jk
    let mut dgamma = [[[[0.0; 3]; 3]; 3]; 3];
    for m in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let mut acc = 0.0;
                    for l in 0..3 {
                        let first = 0.5 * (jet.dg[j][l][k] + jet.dg[k][l][j] - jet.dg[l][j][k]);
                        let dfirst = 0.5
                            * (jet.ddg[m][j][l][k] + jet.ddg[m][k][l][j] - jet.ddg[m][l][j][k]);
                        acc += dginv[m][i][l] * first + ginv[i][l] * dfirst;
                    }
                    dgamma[m][i][j][k] = acc;
                }
            }
        }
    }
    let mut ric = [[0.0; 3]; 3];
    for j in 0..3 {
        for k in 0..3 {
            let mut acc = 0.0;
            for i in 0..3 {
                acc += dgamma[i][i][j][k] - dgamma[k][i][j][i];
                for p in 0..3 {
                    acc += gamma[i][i][p] * gamma[p][j][k] - gamma[i][k][p] * gamma[p][j][i];
                }
            }
            ric[j][k] = acc;
        }
    }
    ric
}

pub fn scalar_curvature(jet: &MetricJet) -> f64 {
    trace(&inverse(&jet.g), &ricci(jet))
}

/// Conjugate momentum `pi = (tr K) g - K`, covariant indices.
pub fn conjugate_momentum(g: &Mat3, k: &Mat3) -> Mat3 {
    let tr = trace(&inverse(g), k);
    let mut pi = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            pi[i][j] = tr * g[i][j] - k[i][j];
        }
    }
    pi
}

/// `nabla_l K_ij`, stored as `[l][i][j]`.
pub fn covariant_derivative_k(gamma: &Tensor3, ext: &ExtrinsicJet) -> [Mat3; 3] {
    let mut out = [[[0.0; 3]; 3]; 3];
    for l in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = ext.dk[l][i][j];
                for p in 0..3 {
                    acc -= gamma[p][l][i] * ext.k[p][j] + gamma[p][l][j] * ext.k[i][p];
                }
                out[l][i][j] = acc;
            }
        }
    }
    out
}

/// Energy and momentum densities: `2 mu = Scal - |K|^2 + (tr K)^2` and
/// `J_j = div(K - (tr K) g)_j`.
pub fn constraint_densities(jet: &MetricJet, ext: &ExtrinsicJet) -> (f64, Vec3) {
    let ginv = inverse(&jet.g);
    let scal = trace(&ginv, &ricci(jet));
    let tr = trace(&ginv, &ext.k);
    let mut k_up = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    acc += ginv[i][a] * ginv[j][b] * ext.k[a][b];
                }
            }
            k_up[i][j] = acc;
        }
    }
    let mut k_sq = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            k_sq += k_up[i][j] * ext.k[i][j];
        }
    }
    let mu = 0.5 * (scal - k_sq + tr * tr);

    let gamma = christoffel(&ginv, &jet.dg);
    let nabla_k = covariant_derivative_k(&gamma, ext);
    let mut j_vec = [0.0; 3];
    for (j, out) in j_vec.iter_mut().enumerate() {
        let mut div = 0.0;
        let mut dtr = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                div += ginv[a][b] * nabla_k[a][b][j];
                dtr += ginv[a][b] * nabla_k[j][a][b];
            }
        }
        *out = div - dtr;
    }
    (mu, j_vec)
}

/// Norm of a covector with respect to `g`.
pub fn covector_norm(ginv: &Mat3, v: &Vec3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += ginv[i][j] * v[i] * v[j];
        }
    }
    acc.max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::{lift, second_order, Scalar};

    fn conformal_factor<S: Scalar>(x: [S; 3], m: f64) -> S {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
        r.recip() * (0.5 * m) + 1.0
    }

    fn bump_factor<S: Scalar>(x: [S; 3]) -> S {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        (r2 + 1.0).recip() + 1.0
    }

    fn conformal_jet(p: Vec3, phi: impl Fn([crate::dual::D2; 3]) -> crate::dual::D2) -> MetricJet {
        let f = phi(lift(lift(p))).powi(4);
        let (v, grad, hess) = second_order(f);
        let mut jet = MetricJet::default();
        for i in 0..3 {
            jet.g[i][i] = v;
            for k in 0..3 {
                jet.dg[k][i][i] = grad[k];
                for l in 0..3 {
                    jet.ddg[k][l][i][i] = hess[k][l];
                }
            }
        }
        jet
    }

    #[test]
    fn conformally_flat_christoffels_match_closed_form() {
        let p = [1.3, -0.4, 2.2];
        let m = 1.7;
        let jet = conformal_jet(p, |x| conformal_factor(x, m));
        let gamma = christoffel(&inverse(&jet.g), &jet.dg);
        // Gamma^i_jk = 2/phi (delta_ij d_k phi + delta_ik d_j phi - delta_jk d_i phi)
        let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        let phi = 1.0 + m / (2.0 * r);
        let dphi: Vec<f64> = p.iter().map(|x| -m * x / (2.0 * r.powi(3))).collect();
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let expected =
                        2.0 / phi * (d(i, j) * dphi[k] + d(i, k) * dphi[j] - d(j, k) * dphi[i]);
                    assert!((gamma[i][j][k] - expected).abs() < 1e-14, "{i}{j}{k}");
                }
            }
        }
    }

    #[test]
    fn conformally_flat_scalar_curvature_matches_laplacian_formula() {
        // Scal(phi^4 delta) = -8 phi^-5 Laplace(phi)
        let p = [0.6, 0.9, -0.3];
        let jet = conformal_jet(p, bump_factor);
        let r2: f64 = p.iter().map(|x| x * x).sum();
        let phi = 1.0 + 1.0 / (1.0 + r2);
        // f(r) = (1+r^2)^-1: f'' + 2 f'/r with f' = -2r/(1+r^2)^2, f'' = (6r^2 - 2)/(1+r^2)^3
        let lap = (6.0 * r2 - 2.0) / (1.0 + r2).powi(3) + 2.0 * (-2.0) / (1.0 + r2).powi(2);
        let expected = -8.0 * phi.powi(-5) * lap;
        assert!((scalar_curvature(&jet) - expected).abs() < 1e-13);
    }

    #[test]
    fn harmonic_conformal_factor_is_scalar_flat() {
        let jet = conformal_jet([3.0, 1.0, -2.0], |x| conformal_factor(x, 2.0));
        assert!(scalar_curvature(&jet).abs() < 1e-14);
    }

    #[test]
    fn conjugate_momentum_trace_relation() {
        let g = [[1.2, 0.1, 0.0], [0.1, 0.9, 0.05], [0.0, 0.05, 1.1]];
        let k = [[0.3, -0.2, 0.1], [-0.2, 0.5, 0.0], [0.1, 0.0, -0.4]];
        let pi = conjugate_momentum(&g, &k);
        let ginv = inverse(&g);
        // tr pi = 2 tr K in three dimensions
        assert!((trace(&ginv, &pi) - 2.0 * trace(&ginv, &k)).abs() < 1e-14);
    }
}
