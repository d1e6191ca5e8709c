//! Sampled decay diagnostics. These report sup-ratios and fitted power laws;
//! they never decide whether a data set is admissible.

use serde::Serialize;

use super::{constraint_densities, inverse, DataProvider, ExtrinsicJet, Mat3, MetricJet};
use crate::charges::log_slope;
use crate::error::{Result, StcmcError};
use crate::sphere::SphereGrid;

const SAMPLE_BAND: usize = 12;

/// Sup-norms over the coordinate sphere of one radius.
#[derive(Clone, Debug, Serialize)]
pub struct DecayRow {
    pub radius: f64,
    pub metric_sup: f64,
    pub extrinsic_sup: f64,
    pub constraint_sup: f64,
    pub metric_odd_sup: f64,
    pub momentum_even_sup: f64,
    pub constraint_odd_sup: f64,
    /// Sups divided by the admissible power of the radius.
    pub metric_ratio: f64,
    pub extrinsic_ratio: f64,
    pub constraint_ratio: f64,
    pub metric_odd_ratio: f64,
    pub momentum_even_ratio: f64,
    pub constraint_odd_ratio: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecayReport {
    pub epsilon: f64,
    pub gamma: f64,
    pub rows: Vec<DecayRow>,
    /// Least-squares slopes of log(sup) against log(radius), in the order
    /// metric, extrinsic, constraint, odd metric, even momentum, odd constraint.
    pub fitted_exponents: [f64; 6],
}

fn max_abs(m: &Mat3) -> f64 {
    m.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()))
}

fn max_abs3(t: &[Mat3; 3]) -> f64 {
    t.iter().map(max_abs).fold(0.0, f64::max)
}

fn max_abs4(t: &[[Mat3; 3]; 3]) -> f64 {
    t.iter().flat_map(|row| row.iter()).map(max_abs).fold(0.0, f64::max)
}

fn combine<const N: usize>(a: &[f64; N], b: &[f64; N], sign: f64) -> [f64; N] {
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = 0.5 * (a[i] + sign * b[i]);
    }
    out
}

fn combine_mat(a: &Mat3, b: &Mat3, sign: f64) -> Mat3 {
    [combine(&a[0], &b[0], sign), combine(&a[1], &b[1], sign), combine(&a[2], &b[2], sign)]
}

/// `pi_ij` and `d_k pi_ij` from the jets.
fn momentum_jet(jet: &MetricJet, ext: &ExtrinsicJet) -> (Mat3, [Mat3; 3]) {
    let ginv = inverse(&jet.g);
    let tr: f64 = (0..3).flat_map(|a| (0..3).map(move |b| (a, b))).map(|(a, b)| ginv[a][b] * ext.k[a][b]).sum();
    let mut pi = [[0.0; 3]; 3];
    let mut dpi = [[[0.0; 3]; 3]; 3];
    for k in 0..3 {
        let mut dtr = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                let mut dinv = 0.0;
                for c in 0..3 {
                    for d in 0..3 {
                        dinv -= ginv[a][c] * jet.dg[k][c][d] * ginv[d][b];
                    }
                }
                dtr += dinv * ext.k[a][b] + ginv[a][b] * ext.dk[k][a][b];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                dpi[k][i][j] = dtr * jet.g[i][j] + tr * jet.dg[k][i][j] - ext.dk[k][i][j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            pi[i][j] = tr * jet.g[i][j] - ext.k[i][j];
        }
    }
    (pi, dpi)
}

/// Sample the three decay inequalities and the Regge-Teitelboim parity
/// conditions (with exponent `gamma`) on coordinate spheres.
pub fn decay_check(provider: &DataProvider, radii: &[f64], epsilon: f64, gamma: f64) -> Result<DecayReport> {
    if radii.is_empty() {
        return Err(StcmcError::InsufficientLeaves { needed: 1, got: 0 });
    }
    let grid = SphereGrid::shared(SAMPLE_BAND)?;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        if !(r > 0.0) {
            return Err(StcmcError::NonpositiveRadius(r));
        }
        let mut row = DecayRow {
            radius: r,
            metric_sup: 0.0,
            extrinsic_sup: 0.0,
            constraint_sup: 0.0,
            metric_odd_sup: 0.0,
            momentum_even_sup: 0.0,
            constraint_odd_sup: 0.0,
            metric_ratio: 0.0,
            extrinsic_ratio: 0.0,
            constraint_ratio: 0.0,
            metric_odd_ratio: 0.0,
            momentum_even_ratio: 0.0,
            constraint_odd_ratio: 0.0,
        };
        for n in 0..grid.len() {
            let w = grid.direction(n);
            let p = [r * w[0], r * w[1], r * w[2]];
            let q = [-p[0], -p[1], -p[2]];
            let (jp, jq) = (provider.metric_jet(p)?, provider.metric_jet(q)?);
            let (ep, eq) = (provider.extrinsic_jet(p)?, provider.extrinsic_jet(q)?);

            let mut dev = jp.g;
            for (i, row_i) in dev.iter_mut().enumerate() {
                row_i[i] -= 1.0;
            }
            row.metric_sup = row.metric_sup.max(max_abs(&dev) + r * max_abs3(&jp.dg) + r * r * max_abs4(&jp.ddg));
            row.extrinsic_sup = row.extrinsic_sup.max(max_abs(&ep.k) + r * max_abs3(&ep.dk));
            let (mu_p, j_p) = constraint_densities(&jp, &ep);
            let (mu_q, j_q) = constraint_densities(&jq, &eq);
            let jmax = j_p.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            row.constraint_sup = row.constraint_sup.max(mu_p.abs() + jmax);

            let g_odd = combine_mat(&jp.g, &jq.g, -1.0);
            let dg_odd = [
                combine_mat(&jp.dg[0], &jq.dg[0], 1.0),
                combine_mat(&jp.dg[1], &jq.dg[1], 1.0),
                combine_mat(&jp.dg[2], &jq.dg[2], 1.0),
            ];
            let mut ddg_odd = [[[[0.0; 3]; 3]; 3]; 3];
            for k in 0..3 {
                for l in 0..3 {
                    ddg_odd[k][l] = combine_mat(&jp.ddg[k][l], &jq.ddg[k][l], -1.0);
                }
            }
            row.metric_odd_sup = row
                .metric_odd_sup
                .max(max_abs(&g_odd) + r * max_abs3(&dg_odd) + r * r * max_abs4(&ddg_odd));

            let (pi_p, dpi_p) = momentum_jet(&jp, &ep);
            let (pi_q, dpi_q) = momentum_jet(&jq, &eq);
            let pi_even = combine_mat(&pi_p, &pi_q, 1.0);
            let dpi_even = [
                combine_mat(&dpi_p[0], &dpi_q[0], -1.0),
                combine_mat(&dpi_p[1], &dpi_q[1], -1.0),
                combine_mat(&dpi_p[2], &dpi_q[2], -1.0),
            ];
            row.momentum_even_sup = row.momentum_even_sup.max(max_abs(&pi_even) + r * max_abs3(&dpi_even));

            let j_odd = combine(&j_p, &j_q, -1.0);
            let j_odd_max = j_odd.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            row.constraint_odd_sup = row.constraint_odd_sup.max(0.5 * (mu_p - mu_q).abs() + j_odd_max);
        }
        row.metric_ratio = row.metric_sup / r.powf(-0.5 - epsilon);
        row.extrinsic_ratio = row.extrinsic_sup / r.powf(-1.5 - epsilon);
        row.constraint_ratio = row.constraint_sup / r.powf(-3.0 - epsilon);
        row.metric_odd_ratio = row.metric_odd_sup / r.powf(-gamma - epsilon);
        row.momentum_even_ratio = row.momentum_even_sup / r.powf(-1.0 - gamma - epsilon);
        row.constraint_odd_ratio = row.constraint_odd_sup / r.powf(-2.5 - gamma - epsilon);
        rows.push(row);
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.radius).collect();
    let pick = |f: fn(&DecayRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let fitted_exponents = [
        log_slope(&xs, &pick(|r| r.metric_sup)),
        log_slope(&xs, &pick(|r| r.extrinsic_sup)),
        log_slope(&xs, &pick(|r| r.constraint_sup)),
        log_slope(&xs, &pick(|r| r.metric_odd_sup)),
        log_slope(&xs, &pick(|r| r.momentum_even_sup)),
        log_slope(&xs, &pick(|r| r.constraint_odd_sup)),
    ];
    Ok(DecayReport { epsilon, gamma, rows, fitted_exponents })
}
