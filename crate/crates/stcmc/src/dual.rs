//! Forward-mode automatic differentiation in three variables.
//!
//! `Dual<S>` carries a value and its gradient with respect to the three
//! chart coordinates. Nesting (`Dual<Dual<f64>>`, ...) yields exact higher
//! derivatives, which is how providers produce analytic jets without
//! finite differencing.

use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Innermost real part.
    fn re(&self) -> f64;
    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn ln(self) -> Self;
    fn powi(self, n: i32) -> Self;
    fn powf(self, p: f64) -> Self;

    fn recip(self) -> Self {
        Self::cst(1.0) / self
    }
    fn square(self) -> Self {
        self * self
    }
}

impl Scalar for f64 {
    fn cst(v: f64) -> Self {
        v
    }
    fn re(&self) -> f64 {
        *self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn powi(self, n: i32) -> Self {
        f64::powi(self, n)
    }
    fn powf(self, p: f64) -> Self {
        f64::powf(self, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<S> {
    pub v: S,
    pub d: [S; 3],
}

impl<S: Scalar> Dual<S> {
    fn chain(self, value: S, slope: S) -> Self {
        Dual { v: value, d: [self.d[0] * slope, self.d[1] * slope, self.d[2] * slope] }
    }
}

/// Seed each coordinate as an independent variable.
pub fn lift<S: Scalar>(x: [S; 3]) -> [Dual<S>; 3] {
    let z = S::cst(0.0);
    let o = S::cst(1.0);
    [
        Dual { v: x[0], d: [o, z, z] },
        Dual { v: x[1], d: [z, o, z] },
        Dual { v: x[2], d: [z, z, o] },
    ]
}

impl<S: Scalar> Add for Dual<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Dual { v: self.v + o.v, d: [self.d[0] + o.d[0], self.d[1] + o.d[1], self.d[2] + o.d[2]] }
    }
}

impl<S: Scalar> Sub for Dual<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Dual { v: self.v - o.v, d: [self.d[0] - o.d[0], self.d[1] - o.d[1], self.d[2] - o.d[2]] }
    }
}

impl<S: Scalar> Mul for Dual<S> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Dual {
            v: self.v * o.v,
            d: [
                self.d[0] * o.v + self.v * o.d[0],
                self.d[1] * o.v + self.v * o.d[1],
                self.d[2] * o.v + self.v * o.d[2],
            ],
        }
    }
}

impl<S: Scalar> Div for Dual<S> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        let inv = o.v.recip();
        let q = self.v * inv;
        Dual {
            v: q,
            d: [
                (self.d[0] - q * o.d[0]) * inv,
                (self.d[1] - q * o.d[1]) * inv,
                (self.d[2] - q * o.d[2]) * inv,
            ],
        }
    }
}

impl<S: Scalar> Neg for Dual<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Dual { v: -self.v, d: [-self.d[0], -self.d[1], -self.d[2]] }
    }
}

impl<S: Scalar> Add<f64> for Dual<S> {
    type Output = Self;
    fn add(self, c: f64) -> Self {
        Dual { v: self.v + c, d: self.d }
    }
}

impl<S: Scalar> Sub<f64> for Dual<S> {
    type Output = Self;
    fn sub(self, c: f64) -> Self {
        Dual { v: self.v - c, d: self.d }
    }
}

impl<S: Scalar> Mul<f64> for Dual<S> {
    type Output = Self;
    fn mul(self, c: f64) -> Self {
        Dual { v: self.v * c, d: [self.d[0] * c, self.d[1] * c, self.d[2] * c] }
    }
}

impl<S: Scalar> Div<f64> for Dual<S> {
    type Output = Self;
    fn div(self, c: f64) -> Self {
        self * (1.0 / c)
    }
}

impl<S: Scalar> Scalar for Dual<S> {
    fn cst(v: f64) -> Self {
        let z = S::cst(0.0);
        Dual { v: S::cst(v), d: [z, z, z] }
    }
    fn re(&self) -> f64 {
        self.v.re()
    }
    fn sqrt(self) -> Self {
        let s = self.v.sqrt();
        self.chain(s, (s * 2.0).recip())
    }
    fn sin(self) -> Self {
        self.chain(self.v.sin(), self.v.cos())
    }
    fn cos(self) -> Self {
        self.chain(self.v.cos(), -self.v.sin())
    }
    fn ln(self) -> Self {
        self.chain(self.v.ln(), self.v.recip())
    }
    fn powi(self, n: i32) -> Self {
        if n == 0 {
            return Self::cst(1.0);
        }
        let lower = self.v.powi(n - 1);
        self.chain(lower * self.v, lower * n as f64)
    }
    fn powf(self, p: f64) -> Self {
        let lower = self.v.powf(p - 1.0);
        self.chain(lower * self.v, lower * p)
    }
}

pub type D1 = Dual<f64>;
pub type D2 = Dual<Dual<f64>>;

/// Value, gradient and Hessian of a scalar evaluated on twice-lifted inputs.
pub fn second_order<S: Scalar>(f: Dual<Dual<S>>) -> (S, [S; 3], [[S; 3]; 3]) {
    let grad = f.v.d;
    let mut hess = [[f.v.v; 3]; 3];
    for (j, row) in hess.iter_mut().enumerate() {
        for (i, h) in row.iter_mut().enumerate() {
            *h = f.d[j].d[i];
        }
    }
    (f.v.v, grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample<S: Scalar>(x: [S; 3]) -> S {
        // x y^2 sin(z) / sqrt(1 + x^2) + ln(2 + y) z^3
        let x2 = x[0] * x[0];
        x[0] * x[1].powi(2) * x[2].sin() / (x2 + 1.0).sqrt() + (x[1] + 2.0).ln() * x[2].powi(3)
    }

    #[test]
    fn gradient_matches_hand_derivative() {
        let p = [0.7, -0.3, 1.1];
        let f = sample(lift(p));
        let (x, y, z) = (p[0], p[1], p[2]);
        let s = (1.0 + x * x).sqrt();
        let dx = y * y * z.sin() / s - x * x * y * y * z.sin() / (s * s * s);
        let dy = 2.0 * x * y * z.sin() / s + z.powi(3) / (y + 2.0);
        let dz = x * y * y * z.cos() / s + 3.0 * (y + 2.0).ln() * z * z;
        assert!((f.v - sample(p)).abs() < 1e-15);
        assert!((f.d[0] - dx).abs() < 1e-14);
        assert!((f.d[1] - dy).abs() < 1e-14);
        assert!((f.d[2] - dz).abs() < 1e-14);
    }

    #[test]
    fn hessian_is_symmetric_and_matches_differences() {
        let p = [0.4, 0.2, -0.9];
        let (_, _, h) = second_order(sample(lift(lift(p))));
        let step = 1e-5;
        for i in 0..3 {
            for j in 0..3 {
                assert!((h[i][j] - h[j][i]).abs() < 1e-13);
                let mut a = p;
                a[j] += step;
                let mut b = p;
                b[j] -= step;
                let ga = sample(lift(a)).d[i];
                let gb = sample(lift(b)).d[i];
                assert!((h[i][j] - (ga - gb) / (2.0 * step)).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn powf_and_powi_agree() {
        let p = [1.3, 0.5, 2.0];
        let a = lift(p)[0].powf(3.0);
        let b = lift(p)[0].powi(3);
        assert!((a.v - b.v).abs() < 1e-14);
        assert!((a.d[0] - b.d[0]).abs() < 1e-13);
    }
}
