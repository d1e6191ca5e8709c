//! Spectral calculus on the unit sphere: Gauss-Legendre x equispaced
//! quadrature, real orthonormal spherical harmonics and their exact angular
//! derivatives.
//!
//! Harmonic coefficients are stored flat with index `l*l + l + m`, where
//! `m < 0` selects the `sin(|m| phi)` harmonic and `m > 0` the cosine one.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Result, StcmcError};

pub const MIN_BAND_LIMIT: usize = 4;
pub const DEFAULT_BAND_LIMIT: usize = 24;

/// Which angular derivative to synthesize or test against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Deriv {
    Value,
    Theta,
    Phi,
    ThetaTheta,
    ThetaPhi,
    PhiPhi,
}

impl Deriv {
    fn orders(self) -> (usize, usize) {
        match self {
            Deriv::Value => (0, 0),
            Deriv::Theta => (1, 0),
            Deriv::Phi => (0, 1),
            Deriv::ThetaTheta => (2, 0),
            Deriv::ThetaPhi => (1, 1),
            Deriv::PhiPhi => (0, 2),
        }
    }
}

pub fn basis_len(band: usize) -> usize {
    (band + 1) * (band + 1)
}

pub fn basis_index(l: usize, m: i64) -> usize {
    ((l * l + l) as i64 + m) as usize
}

/// Degree and order of a flat index.
pub fn degree_order(k: usize) -> (usize, i64) {
    let l = (k as f64).sqrt().floor() as usize;
    let l = if (l + 1) * (l + 1) <= k { l + 1 } else { l };
    (l, k as i64 - (l * l + l) as i64)
}

/// Band limit of a flat coefficient vector, if its length is a square.
pub fn band_of(len: usize) -> Option<usize> {
    let b = (len as f64).sqrt().round() as usize;
    if b * b == len && b > 0 {
        Some(b - 1)
    } else {
        None
    }
}

/// Band limit used for products of degree-`band` functions.
pub fn dealias_band(band: usize) -> usize {
    (3 * band).div_ceil(2)
}

fn tri(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// Gauss-Legendre nodes (descending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for k in 0..n {
        let mut z = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[k] = z;
        w[k] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Orthonormal associated Legendre functions (no Condon-Shortley phase),
/// normalized so that `2 pi * int P_lm^2 sin(theta) d theta = 1`.
pub fn normalized_legendre(band: usize, cos_t: f64, sin_t: f64) -> Vec<f64> {
    let mut p = vec![0.0; tri(band, band) + 1];
    p[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..=band {
        if m > 0 {
            p[tri(m, m)] = ((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * sin_t * p[tri(m - 1, m - 1)];
        }
        if m < band {
            p[tri(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * cos_t * p[tri(m, m)];
        }
        for l in (m + 2)..=band {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
            p[tri(l, m)] = a * (cos_t * p[tri(l - 1, m)] - b * p[tri(l - 2, m)]);
        }
    }
    p
}

/// First and second theta-derivatives of the normalized Legendre table
/// (valid away from the poles).
fn legendre_derivatives(band: usize, cos_t: f64, sin_t: f64, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut dp = vec![0.0; p.len()];
    let mut ddp = vec![0.0; p.len()];
    let cot = cos_t / sin_t;
    for l in 0..=band {
        for m in 0..=l {
            let (lf, mf) = (l as f64, m as f64);
            let lower = if l > m {
                ((2.0 * lf + 1.0) * (lf * lf - mf * mf) / (2.0 * lf - 1.0)).sqrt() * p[tri(l - 1, m)]
            } else {
                0.0
            };
            let d = (lf * cos_t * p[tri(l, m)] - lower) / sin_t;
            dp[tri(l, m)] = d;
            ddp[tri(l, m)] = -cot * d - (lf * (lf + 1.0) - mf * mf / (sin_t * sin_t)) * p[tri(l, m)];
        }
    }
    (dp, ddp)
}

/// Quadrature grid of band limit `L`: `L+1` Gauss-Legendre latitudes times
/// `2L+2` equispaced longitudes. Integrates every product of two degree-`L`
/// harmonics exactly.
#[derive(Debug)]
pub struct SphereGrid {
    band: usize,
    n_theta: usize,
    n_phi: usize,
    theta: Vec<f64>,
    cos_t: Vec<f64>,
    sin_t: Vec<f64>,
    phi: Vec<f64>,
    lat_weight: Vec<f64>,
    // [i][tri(l,m)] tables for value, d/dtheta and d^2/dtheta^2
    leg: Vec<Vec<f64>>,
    dleg: Vec<Vec<f64>>,
    ddleg: Vec<Vec<f64>>,
    // [j][m]
    cos_m: Vec<Vec<f64>>,
    sin_m: Vec<Vec<f64>>,
}

impl SphereGrid {
    pub fn new(band: usize) -> Result<Self> {
        if band < MIN_BAND_LIMIT {
            return Err(StcmcError::BandLimitTooSmall { requested: band, minimum: MIN_BAND_LIMIT });
        }
        let n_theta = band + 1;
        let n_phi = 2 * band + 2;
        let (x, w) = gauss_legendre(n_theta);
        let theta: Vec<f64> = x.iter().map(|c| c.acos()).collect();
        let sin_t: Vec<f64> = x.iter().map(|c| (1.0 - c * c).sqrt()).collect();
        let phi: Vec<f64> = (0..n_phi).map(|j| 2.0 * PI * j as f64 / n_phi as f64).collect();
        let dphi = 2.0 * PI / n_phi as f64;
        let lat_weight: Vec<f64> = w.iter().map(|wi| wi * dphi).collect();
        let mut leg = Vec::with_capacity(n_theta);
        let mut dleg = Vec::with_capacity(n_theta);
        let mut ddleg = Vec::with_capacity(n_theta);
        for i in 0..n_theta {
            let p = normalized_legendre(band, x[i], sin_t[i]);
            let (d, dd) = legendre_derivatives(band, x[i], sin_t[i], &p);
            leg.push(p);
            dleg.push(d);
            ddleg.push(dd);
        }
        let cos_m = phi.iter().map(|&f| (0..=band).map(|m| (m as f64 * f).cos()).collect()).collect();
        let sin_m = phi.iter().map(|&f| (0..=band).map(|m| (m as f64 * f).sin()).collect()).collect();
        Ok(SphereGrid {
            band,
            n_theta,
            n_phi,
            theta,
            cos_t: x,
            sin_t,
            phi,
            lat_weight,
            leg,
            dleg,
            ddleg,
            cos_m,
            sin_m,
        })
    }

    /// Process-wide cached grid of the given band limit.
    pub fn shared(band: usize) -> Result<Arc<SphereGrid>> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<SphereGrid>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(g) = cache.lock().expect("grid cache poisoned").get(&band) {
            return Ok(g.clone());
        }
        let grid = Arc::new(SphereGrid::new(band)?);
        cache.lock().expect("grid cache poisoned").insert(band, grid.clone());
        Ok(grid)
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn len(&self) -> usize {
        self.n_theta * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn n_basis(&self) -> usize {
        basis_len(self.band)
    }

    /// `(theta, phi)` of node `n = i * n_phi + j`.
    pub fn angles(&self, n: usize) -> (f64, f64) {
        (self.theta[n / self.n_phi], self.phi[n % self.n_phi])
    }

    pub fn sin_cos_theta(&self, n: usize) -> (f64, f64) {
        let i = n / self.n_phi;
        (self.sin_t[i], self.cos_t[i])
    }

    /// Quadrature weight for `d Omega` at node `n`; all weights sum to `4 pi`.
    pub fn weight(&self, n: usize) -> f64 {
        self.lat_weight[n / self.n_phi]
    }

    pub fn weights(&self) -> Vec<f64> {
        (0..self.len()).map(|n| self.weight(n)).collect()
    }

    /// Unit vector of node `n`.
    pub fn direction(&self, n: usize) -> [f64; 3] {
        let i = n / self.n_phi;
        let j = n % self.n_phi;
        let (s, c) = (self.sin_t[i], self.cos_t[i]);
        [s * self.cos_m[j][1], s * self.sin_m[j][1], c]
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(n, v)| v * self.weight(n)).sum()
    }

    /// Value of basis function `k` (or one of its derivatives) at node `n`.
    pub fn basis_at(&self, k: usize, n: usize, kind: Deriv) -> f64 {
        let (l, m) = degree_order(k);
        let i = n / self.n_phi;
        let j = n % self.n_phi;
        let ma = m.unsigned_abs() as usize;
        let (t_order, p_order) = kind.orders();
        let table = match t_order {
            0 => &self.leg[i],
            1 => &self.dleg[i],
            _ => &self.ddleg[i],
        };
        let scale = if ma > 0 { std::f64::consts::SQRT_2 } else { 1.0 };
        let leg = scale * table[tri(l, ma)];
        let (c, s) = (self.cos_m[j][ma], self.sin_m[j][ma]);
        let mf = ma as f64;
        let trig = match (m >= 0, p_order) {
            (true, 0) => c,
            (false, 0) => s,
            (true, 1) => -mf * s,
            (false, 1) => mf * c,
            (true, _) => -mf * mf * c,
            (false, _) => -mf * mf * s,
        };
        leg * trig
    }

    fn coeff_band(&self, len: usize) -> Result<usize> {
        match band_of(len) {
            Some(b) if b <= self.band => Ok(b),
            _ => Err(StcmcError::ShapeMismatch { expected: self.n_basis(), actual: len }),
        }
    }

    /// Nodal values of a harmonic expansion or one of its angular derivatives.
    pub fn synthesize_kind(&self, coeffs: &[f64], kind: Deriv) -> Result<Vec<f64>> {
        let band = self.coeff_band(coeffs.len())?;
        let (t_order, p_order) = kind.orders();
        let mut out = vec![0.0; self.len()];
        let mut cm = vec![0.0; band + 1];
        let mut sm = vec![0.0; band + 1];
        for i in 0..self.n_theta {
            let table = match t_order {
                0 => &self.leg[i],
                1 => &self.dleg[i],
                _ => &self.ddleg[i],
            };
            for m in 0..=band {
                let scale = if m > 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                let (mut a, mut b) = (0.0, 0.0);
                for l in m..=band {
                    let p = table[tri(l, m)];
                    a += coeffs[l * l + l + m] * p;
                    if m > 0 {
                        b += coeffs[l * l + l - m] * p;
                    }
                }
                cm[m] = scale * a;
                sm[m] = scale * b;
            }
            for j in 0..self.n_phi {
                let mut acc = 0.0;
                for m in 0..=band {
                    let (c, s) = (self.cos_m[j][m], self.sin_m[j][m]);
                    let mf = m as f64;
                    acc += match p_order {
                        0 => cm[m] * c + sm[m] * s,
                        1 => mf * (-cm[m] * s + sm[m] * c),
                        _ => -mf * mf * (cm[m] * c + sm[m] * s),
                    };
                }
                out[i * self.n_phi + j] = acc;
            }
        }
        Ok(out)
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.synthesize_kind(coeffs, Deriv::Value)
    }

    /// Quadrature inner products `sum_n w_n v_n D Y_k(n)` for all `k` up to
    /// degree `band`. With `Deriv::Value` this is the spectral analysis.
    pub fn analyze_kind(&self, values: &[f64], kind: Deriv, band: usize) -> Result<Vec<f64>> {
        if values.len() != self.len() {
            return Err(StcmcError::ShapeMismatch { expected: self.len(), actual: values.len() });
        }
        if band > self.band {
            return Err(StcmcError::ShapeMismatch { expected: self.n_basis(), actual: basis_len(band) });
        }
        let (t_order, p_order) = kind.orders();
        let mut out = vec![0.0; basis_len(band)];
        let mut fc = vec![0.0; band + 1];
        let mut fs = vec![0.0; band + 1];
        for i in 0..self.n_theta {
            let row = &values[i * self.n_phi..(i + 1) * self.n_phi];
            for m in 0..=band {
                let mf = m as f64;
                let (mut a, mut b) = (0.0, 0.0);
                for (j, v) in row.iter().enumerate() {
                    let (c, s) = (self.cos_m[j][m], self.sin_m[j][m]);
                    match p_order {
                        0 => {
                            a += v * c;
                            b += v * s;
                        }
                        1 => {
                            a -= v * mf * s;
                            b += v * mf * c;
                        }
                        _ => {
                            a -= v * mf * mf * c;
                            b -= v * mf * mf * s;
                        }
                    }
                }
                let scale = if m > 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                fc[m] = a * scale * self.lat_weight[i];
                fs[m] = b * scale * self.lat_weight[i];
            }
            let table = match t_order {
                0 => &self.leg[i],
                1 => &self.dleg[i],
                _ => &self.ddleg[i],
            };
            for l in 0..=band {
                for m in 0..=l {
                    let p = table[tri(l, m)];
                    out[l * l + l + m] += p * fc[m];
                    if m > 0 {
                        out[l * l + l - m] += p * fs[m];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn analyze(&self, values: &[f64]) -> Result<Vec<f64>> {
        self.analyze_kind(values, Deriv::Value, self.band)
    }

    /// Analysis truncated to degree `band`.
    pub fn analyze_to(&self, values: &[f64], band: usize) -> Result<Vec<f64>> {
        self.analyze_kind(values, Deriv::Value, band)
    }

    /// Spectral derivatives of nodal data: analyze at the grid band limit,
    /// then synthesize each requested derivative.
    pub fn differentiate(&self, values: &[f64]) -> Result<[Vec<f64>; 6]> {
        let c = self.analyze(values)?;
        Ok([
            self.synthesize_kind(&c, Deriv::Value)?,
            self.synthesize_kind(&c, Deriv::Theta)?,
            self.synthesize_kind(&c, Deriv::Phi)?,
            self.synthesize_kind(&c, Deriv::ThetaTheta)?,
            self.synthesize_kind(&c, Deriv::ThetaPhi)?,
            self.synthesize_kind(&c, Deriv::PhiPhi)?,
        ])
    }
}

/// Evaluate an expansion at an arbitrary direction.
pub fn evaluate_at(coeffs: &[f64], theta: f64, phi: f64) -> Result<f64> {
    let band = band_of(coeffs.len())
        .ok_or(StcmcError::ShapeMismatch { expected: 0, actual: coeffs.len() })?;
    let p = normalized_legendre(band, theta.cos(), theta.sin());
    let mut acc = 0.0;
    for m in 0..=band {
        let (s, c) = (m as f64 * phi).sin_cos();
        let scale = if m > 0 { std::f64::consts::SQRT_2 } else { 1.0 };
        for l in m..=band {
            let pl = scale * p[tri(l, m)];
            acc += coeffs[l * l + l + m] * pl * c;
            if m > 0 {
                acc += coeffs[l * l + l - m] * pl * s;
            }
        }
    }
    Ok(acc)
}

/// Angles of a (nonzero) Cartesian vector.
pub fn angles_of(v: [f64; 3]) -> (f64, f64) {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
    let phi = v[1].atan2(v[0]);
    (theta, if phi < 0.0 { phi + 2.0 * PI } else { phi })
}

/// Laplacian of the round sphere of radius `r` acting on coefficients.
pub fn laplace_round(coeffs: &[f64], r: f64) -> Result<Vec<f64>> {
    if !(r > 0.0) {
        return Err(StcmcError::NonpositiveRadius(r));
    }
    band_of(coeffs.len()).ok_or(StcmcError::ShapeMismatch { expected: 0, actual: coeffs.len() })?;
    Ok(coeffs
        .iter()
        .enumerate()
        .map(|(k, a)| {
            let (l, _) = degree_order(k);
            -((l * (l + 1)) as f64) / (r * r) * a
        })
        .collect())
}

/// Truncate or zero-pad a coefficient vector to degree `band`.
pub fn resize_coeffs(coeffs: &[f64], band: usize) -> Vec<f64> {
    let mut out = vec![0.0; basis_len(band)];
    let n = out.len().min(coeffs.len());
    out[..n].copy_from_slice(&coeffs[..n]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_four_pi() {
        for band in [4, 7, 24] {
            let g = SphereGrid::new(band).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert!((total - 4.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_small_band() {
        assert!(matches!(SphereGrid::new(3), Err(StcmcError::BandLimitTooSmall { .. })));
    }

    #[test]
    fn index_round_trip() {
        for k in 0..400 {
            let (l, m) = degree_order(k);
            assert_eq!(basis_index(l, m), k);
            assert!(m.unsigned_abs() as usize <= l);
        }
    }

    #[test]
    fn basis_is_orthonormal() {
        let g = SphereGrid::new(8).unwrap();
        let n = g.n_basis();
        for a in 0..n {
            let va: Vec<f64> = (0..g.len()).map(|p| g.basis_at(a, p, Deriv::Value)).collect();
            let c = g.analyze(&va).unwrap();
            for (b, cb) in c.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((cb - expected).abs() < 1e-13, "{a} {b} {cb}");
            }
        }
    }

    #[test]
    fn low_degree_harmonics_match_closed_forms() {
        let g = SphereGrid::new(6).unwrap();
        let c1 = (3.0 / (4.0 * PI)).sqrt();
        for n in 0..g.len() {
            let w = g.direction(n);
            assert!((g.basis_at(basis_index(1, 0), n, Deriv::Value) - c1 * w[2]).abs() < 1e-14);
            assert!((g.basis_at(basis_index(1, 1), n, Deriv::Value) - c1 * w[0]).abs() < 1e-14);
            assert!((g.basis_at(basis_index(1, -1), n, Deriv::Value) - c1 * w[1]).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_synthesis_matches_pointwise_differences() {
        let g = SphereGrid::new(10).unwrap();
        let coeffs: Vec<f64> = (0..g.n_basis()).map(|k| ((k * 7 % 11) as f64 - 5.0) / 10.0).collect();
        let h = 1e-5;
        for kind in [Deriv::Theta, Deriv::Phi, Deriv::ThetaTheta, Deriv::ThetaPhi, Deriv::PhiPhi] {
            let vals = g.synthesize_kind(&coeffs, kind).unwrap();
            for n in (0..g.len()).step_by(17) {
                let (t, p) = g.angles(n);
                let f = |dt: f64, dp: f64| evaluate_at(&coeffs, t + dt, p + dp).unwrap();
                let fd = match kind {
                    Deriv::Theta => (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h),
                    Deriv::Phi => (f(0.0, h) - f(0.0, -h)) / (2.0 * h),
                    Deriv::ThetaTheta => (f(h, 0.0) - 2.0 * f(0.0, 0.0) + f(-h, 0.0)) / (h * h),
                    Deriv::PhiPhi => (f(0.0, h) - 2.0 * f(0.0, 0.0) + f(0.0, -h)) / (h * h),
                    _ => (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h),
                };
                assert!((vals[n] - fd).abs() < 2e-4 * (1.0 + fd.abs()), "{kind:?} {n} {} {fd}", vals[n]);
            }
        }
    }

    #[test]
    fn analyze_kind_is_adjoint_of_synthesis() {
        let g = SphereGrid::new(6).unwrap();
        let coeffs: Vec<f64> = (0..g.n_basis()).map(|k| (k as f64 * 0.37).sin()).collect();
        let values: Vec<f64> = (0..g.len()).map(|n| (n as f64 * 0.11).cos()).collect();
        for kind in [Deriv::Value, Deriv::Theta, Deriv::Phi, Deriv::ThetaTheta, Deriv::ThetaPhi, Deriv::PhiPhi] {
            let s = g.synthesize_kind(&coeffs, kind).unwrap();
            let lhs: f64 = s.iter().enumerate().map(|(n, v)| v * values[n] * g.weight(n)).sum();
            let a = g.analyze_kind(&values, kind, g.band()).unwrap();
            let rhs: f64 = a.iter().zip(&coeffs).map(|(x, y)| x * y).sum();
            assert!((lhs - rhs).abs() < 1e-11, "{kind:?}");
        }
    }

    #[test]
    fn round_laplacian_of_basis_and_gradient_identity() {
        // For a harmonic Y of degree l: |grad Y|^2 integrates to l(l+1).
        let g = SphereGrid::new(12).unwrap();
        for k in [0, 3, 10, 40, 77] {
            let (l, _) = degree_order(k);
            let mut acc = 0.0;
            for n in 0..g.len() {
                let (s, _) = g.sin_cos_theta(n);
                let yt = g.basis_at(k, n, Deriv::Theta);
                let yp = g.basis_at(k, n, Deriv::Phi) / s;
                acc += (yt * yt + yp * yp) * g.weight(n);
            }
            assert!((acc - (l * (l + 1)) as f64).abs() < 1e-10, "{k}");
        }
        let c = vec![1.0; 16];
        let lap = laplace_round(&c, 2.0).unwrap();
        assert_eq!(lap[0], 0.0);
        assert!((lap[5] + 6.0 / 4.0).abs() < 1e-15);
        assert!(matches!(laplace_round(&c, 0.0), Err(StcmcError::NonpositiveRadius(_))));
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let g = SphereGrid::new(4).unwrap();
        assert!(matches!(g.synthesize(&[1.0, 2.0]), Err(StcmcError::ShapeMismatch { .. })));
        assert!(matches!(g.analyze(&[1.0; 3]), Err(StcmcError::ShapeMismatch { .. })));
    }
}
