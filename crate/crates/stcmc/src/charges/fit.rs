//! Least-squares models for radius sweeps.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// `y ~ limit + amplitude * s^(-exponent)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub limit: f64,
    pub amplitude: f64,
    pub exponent: f64,
    pub rms: f64,
}

/// `y ~ mean + a cos(ln s) + b sin(ln s) + decaying terms`. With at least
/// eight samples the decaying part is `(c + a' cos(ln s) + b' sin(ln s)) / s`,
/// otherwise just `c / s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OscillationFit {
    pub mean: f64,
    pub cos: f64,
    pub sin: f64,
    /// `sqrt(cos^2 + sin^2)`, the non-decaying log-periodic part.
    pub amplitude: f64,
    /// Size of the decaying terms at the largest radius.
    pub decaying: f64,
    pub rms: f64,
}

const EXPONENT_MIN: f64 = 0.05;
const EXPONENT_MAX: f64 = 6.0;
const EXPONENT_STEP: f64 = 0.01;

fn linear_at(s: &[f64], y: &[f64], p: f64) -> (f64, f64, f64) {
    let n = s.len() as f64;
    let x: Vec<f64> = s.iter().map(|v| v.powf(-p)).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let c1 = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let c0 = my - c1 * mx;
    let ss: f64 = x.iter().zip(y).map(|(a, b)| (c0 + c1 * a - b).powi(2)).sum();
    (c0, c1, (ss / n).sqrt())
}

/// Fit `c0 + c1 s^(-p)`: coarse scan of `p`, then golden-section refinement.
/// Needs at least three samples.
pub fn power_law_fit(s: &[f64], y: &[f64]) -> Option<PowerFit> {
    if s.len() < 3 || s.len() != y.len() {
        return None;
    }
    let mut best = (f64::INFINITY, EXPONENT_MIN);
    let steps = ((EXPONENT_MAX - EXPONENT_MIN) / EXPONENT_STEP).round() as usize;
    for k in 0..=steps {
        let p = EXPONENT_MIN + k as f64 * EXPONENT_STEP;
        let rms = linear_at(s, y, p).2;
        if rms < best.0 {
            best = (rms, p);
        }
    }
    let (mut lo, mut hi) = ((best.1 - EXPONENT_STEP).max(EXPONENT_MIN), (best.1 + EXPONENT_STEP).min(EXPONENT_MAX));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let a = hi - g * (hi - lo);
        let b = lo + g * (hi - lo);
        if linear_at(s, y, a).2 <= linear_at(s, y, b).2 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mut p = 0.5 * (lo + hi);
    if linear_at(s, y, p).2 > best.0 {
        p = best.1;
    }
    let (limit, amplitude, rms) = linear_at(s, y, p);
    Some(PowerFit { limit, amplitude, exponent: p, rms })
}

/// Least-squares fit of the log-periodic model. Needs at least four samples.
pub fn oscillation_fit(s: &[f64], y: &[f64]) -> Option<OscillationFit> {
    let n = s.len();
    if n < 4 || n != y.len() {
        return None;
    }
    let wide = n >= 8;
    let cols = if wide { 6 } else { 4 };
    let a = DMatrix::from_fn(n, cols, |i, j| {
        let (l, inv) = (s[i].ln(), 1.0 / s[i]);
        match j {
            0 => 1.0,
            1 => l.cos(),
            2 => l.sin(),
            3 => inv,
            4 => l.cos() * inv,
            _ => l.sin() * inv,
        }
    });
    let b = DVector::from_column_slice(y);
    let c = a.clone().svd(true, true).solve(&b, 1e-14).ok()?;
    let resid = &a * &c - &b;
    let rms = (resid.norm_squared() / n as f64).sqrt();
    let s_max = s.iter().cloned().fold(f64::MIN, f64::max);
    let decaying = if wide {
        (c[3].abs() + (c[4] * c[4] + c[5] * c[5]).sqrt()) / s_max
    } else {
        c[3].abs() / s_max
    };
    Some(OscillationFit {
        mean: c[0],
        cos: c[1],
        sin: c[2],
        amplitude: (c[1] * c[1] + c[2] * c[2]).sqrt(),
        decaying,
        rms,
    })
}

/// Least-squares slope of `ln |y|` against `ln s`, skipping zeros.
pub fn log_slope(s: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        s.iter().zip(y).filter(|(_, v)| v.abs() > 0.0).map(|(x, v)| (x.ln(), v.abs().ln())).collect();
    if pts.len() < 2 {
        return f64::NEG_INFINITY;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}
