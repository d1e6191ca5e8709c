//! Initial data providers and their validated evaluation tree.

use serde::{Deserialize, Serialize};

use super::{ExtrinsicJet, Mat3, MetricJet, Vec3};
use crate::dual::{lift, second_order, Dual, Scalar};
use crate::error::{Result, StcmcError};

/// Which tensor a perturbation term contributes to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationTarget {
    Metric,
    Extrinsic,
}

/// One term `coefficient * r^(-decay) * w1^a w2^b w3^c` added to the
/// symmetric component pair `component` of the metric or of K, where
/// `w = x / |x|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationTerm {
    pub target: PerturbationTarget,
    pub component: [usize; 2],
    pub coefficient: f64,
    pub decay: f64,
    #[serde(default)]
    pub angular: [u32; 3],
}

/// Serializable description of an initial data set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProviderSpec {
    Euclidean,
    SchwarzschildCanonical {
        mass: f64,
    },
    SchwarzschildGraphical {
        mass: f64,
        u: Vec3,
    },
    Translated {
        inner: Box<ProviderSpec>,
        center: Vec3,
    },
    Rotated {
        inner: Box<ProviderSpec>,
        rotation: Mat3,
    },
    CustomPerturbation {
        perturbation_terms: Vec<PerturbationTerm>,
    },
}

/// Radius inside which custom perturbations are not evaluated.
pub const CUSTOM_CORE_RADIUS: f64 = 1.0;

const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Validated provider, ready for evaluation. `extrinsic_scale` multiplies K
/// and is used for continuation in the second fundamental form.
#[derive(Clone, Debug, PartialEq)]
pub struct DataProvider {
    spec: ProviderSpec,
    extrinsic_scale: f64,
}

pub fn orthogonality_defect(o: &Mat3) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            let dot: f64 = (0..3).map(|k| o[k][i] * o[k][j]).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

fn validate(spec: &ProviderSpec) -> Result<()> {
    match spec {
        ProviderSpec::Euclidean => Ok(()),
        ProviderSpec::SchwarzschildCanonical { mass } => finite("mass", &[*mass]),
        ProviderSpec::SchwarzschildGraphical { mass, u } => {
            finite("mass", &[*mass])?;
            finite("u", u)
        }
        ProviderSpec::Translated { inner, center } => {
            finite("center", center)?;
            validate(inner)
        }
        ProviderSpec::Rotated { inner, rotation } => {
            let defect = orthogonality_defect(rotation);
            if !(defect <= ORTHOGONALITY_TOL) {
                return Err(StcmcError::NotOrthogonal(defect));
            }
            validate(inner)
        }
        ProviderSpec::CustomPerturbation { perturbation_terms } => {
            for term in perturbation_terms {
                finite("coefficient", &[term.coefficient, term.decay])?;
                if term.component.iter().any(|&c| c > 2) {
                    return Err(StcmcError::InvalidConfig(format!(
                        "perturbation component {:?} out of range",
                        term.component
                    )));
                }
                let floor = match term.target {
                    PerturbationTarget::Metric => 0.5,
                    PerturbationTarget::Extrinsic => 1.5,
                };
                if term.decay < floor {
                    return Err(StcmcError::InvalidConfig(format!(
                        "decay exponent {} below {} for a {:?} term",
                        term.decay, floor, term.target
                    )));
                }
            }
            Ok(())
        }
    }
}

fn finite(name: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(StcmcError::InvalidConfig(format!("{name} must be finite")))
    }
}

fn norm<S: Scalar>(x: &[S; 3]) -> S {
    (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
}

fn zeros<S: Scalar>() -> [[S; 3]; 3] {
    [[S::cst(0.0); 3]; 3]
}

/// Spatial Schwarzschild metric in Cartesian form of areal coordinates.
fn schwarzschild_metric<S: Scalar>(mass: f64, x: [S; 3]) -> [[S; 3]; 3] {
    let r = norm(&x);
    // 1/N^2 - 1 divided by r^2
    let a = (r - 2.0 * mass).recip() * (2.0 * mass) / (r * r);
    let mut g = zeros();
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = a * x[i] * x[j] + if i == j { 1.0 } else { 0.0 };
        }
    }
    g
}

fn schwarzschild_inverse<S: Scalar>(mass: f64, x: [S; 3]) -> [[S; 3]; 3] {
    let r = norm(&x);
    let b = r.powi(3).recip() * (2.0 * mass);
    let mut h = zeros();
    for i in 0..3 {
        for j in 0..3 {
            h[i][j] = -(b * x[i] * x[j]) + if i == j { 1.0 } else { 0.0 };
        }
    }
    h
}

fn lapse_squared<S: Scalar>(mass: f64, x: [S; 3]) -> S {
    -(norm(&x).recip() * (2.0 * mass)) + 1.0
}

/// Time function of the oscillating graphical slice.
fn time_function<S: Scalar>(u: &Vec3, x: [S; 3]) -> S {
    let r = norm(&x);
    r.ln().sin() + (x[0] * u[0] + x[1] * u[1] + x[2] * u[2]) / r
}

fn graphical_metric<S: Scalar>(mass: f64, u: &Vec3, x: [S; 3]) -> [[S; 3]; 3] {
    let t = time_function(u, lift(x));
    let n2 = lapse_squared(mass, x);
    let mut g = schwarzschild_metric(mass, x);
    for i in 0..3 {
        for j in 0..3 {
            g[i][j] = g[i][j] - n2 * t.d[i] * t.d[j];
        }
    }
    g
}

fn graphical_extrinsic<S: Scalar>(mass: f64, u: &Vec3, x: [S; 3]) -> [[S; 3]; 3] {
    let gl = schwarzschild_metric(mass, lift(x));
    let ginv = schwarzschild_inverse(mass, x);
    let (_, dt, ddt) = second_order(time_function(u, lift(lift(x))));
    let lapse: Dual<S> = lapse_squared(mass, lift(x)).sqrt();
    let n = lapse.v;
    let dn = lapse.d;

    let mut grad_t = [S::cst(0.0); 3];
    for i in 0..3 {
        for j in 0..3 {
            grad_t[i] = grad_t[i] + ginv[i][j] * dt[j];
        }
    }
    let dt2 = dt[0] * grad_t[0] + dt[1] * grad_t[1] + dt[2] * grad_t[2];
    let dn_grad = dn[0] * grad_t[0] + dn[1] * grad_t[1] + dn[2] * grad_t[2];
    let w = (-(n * n * dt2) + 1.0).sqrt();

    // first-kind Christoffel contracted with the gradient: Gamma^k_ij T_k
    let mut k = zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut gamma_t = S::cst(0.0);
            for l in 0..3 {
                let first = (gl[l][j].d[i] + gl[l][i].d[j] - gl[i][j].d[l]) * 0.5;
                gamma_t = gamma_t + first * grad_t[l];
            }
            let hess = ddt[i][j] - gamma_t;
            k[i][j] = (dt[i] * dn[j] + dt[j] * dn[i] + n * hess - n * n * dt[i] * dt[j] * dn_grad) / w;
        }
    }
    k
}

fn custom_field<S: Scalar>(
    terms: &[PerturbationTerm],
    target: PerturbationTarget,
    x: [S; 3],
) -> [[S; 3]; 3] {
    let r = norm(&x);
    let w = [x[0] / r, x[1] / r, x[2] / r];
    let mut h = zeros();
    for term in terms.iter().filter(|t| t.target == target) {
        let mut value = r.powf(-term.decay) * term.coefficient;
        for (axis, &p) in term.angular.iter().enumerate() {
            if p > 0 {
                value = value * w[axis].powi(p as i32);
            }
        }
        let [i, j] = term.component;
        h[i][j] = h[i][j] + value;
        if i != j {
            h[j][i] = h[j][i] + value;
        }
    }
    h
}

fn rotate_point<S: Scalar>(o: &Mat3, x: [S; 3]) -> [S; 3] {
    // O^T x
    let mut y = [S::cst(0.0); 3];
    for (a, ya) in y.iter_mut().enumerate() {
        for (i, xi) in x.iter().enumerate() {
            *ya = *ya + *xi * o[i][a];
        }
    }
    y
}

fn conjugate<S: Scalar>(o: &Mat3, t: [[S; 3]; 3]) -> [[S; 3]; 3] {
    // O t O^T
    let mut out = zeros();
    for i in 0..3 {
        for j in 0..3 {
            let mut acc = S::cst(0.0);
            for a in 0..3 {
                for b in 0..3 {
                    acc = acc + t[a][b] * (o[i][a] * o[j][b]);
                }
            }
            out[i][j] = acc;
        }
    }
    out
}

fn metric_of<S: Scalar>(spec: &ProviderSpec, x: [S; 3]) -> [[S; 3]; 3] {
    match spec {
        ProviderSpec::Euclidean => {
            let mut g = zeros();
            for (i, row) in g.iter_mut().enumerate() {
                row[i] = S::cst(1.0);
            }
            g
        }
        ProviderSpec::SchwarzschildCanonical { mass } => schwarzschild_metric(*mass, x),
        ProviderSpec::SchwarzschildGraphical { mass, u } => graphical_metric(*mass, u, x),
        ProviderSpec::Translated { inner, center } => {
            metric_of(inner, [x[0] - center[0], x[1] - center[1], x[2] - center[2]])
        }
        ProviderSpec::Rotated { inner, rotation } => {
            conjugate(rotation, metric_of(inner, rotate_point(rotation, x)))
        }
        ProviderSpec::CustomPerturbation { perturbation_terms } => {
            let mut g = custom_field(perturbation_terms, PerturbationTarget::Metric, x);
            for (i, row) in g.iter_mut().enumerate() {
                row[i] = row[i] + 1.0;
            }
            g
        }
    }
}

fn extrinsic_of<S: Scalar>(spec: &ProviderSpec, x: [S; 3]) -> [[S; 3]; 3] {
    match spec {
        ProviderSpec::Euclidean | ProviderSpec::SchwarzschildCanonical { .. } => zeros(),
        ProviderSpec::SchwarzschildGraphical { mass, u } => graphical_extrinsic(*mass, u, x),
        ProviderSpec::Translated { inner, center } => {
            extrinsic_of(inner, [x[0] - center[0], x[1] - center[1], x[2] - center[2]])
        }
        ProviderSpec::Rotated { inner, rotation } => {
            conjugate(rotation, extrinsic_of(inner, rotate_point(rotation, x)))
        }
        ProviderSpec::CustomPerturbation { perturbation_terms } => {
            custom_field(perturbation_terms, PerturbationTarget::Extrinsic, x)
        }
    }
}

fn has_extrinsic(spec: &ProviderSpec) -> bool {
    match spec {
        ProviderSpec::Euclidean | ProviderSpec::SchwarzschildCanonical { .. } => false,
        ProviderSpec::SchwarzschildGraphical { .. } => true,
        ProviderSpec::Translated { inner, .. } | ProviderSpec::Rotated { inner, .. } => {
            has_extrinsic(inner)
        }
        ProviderSpec::CustomPerturbation { perturbation_terms } => perturbation_terms
            .iter()
            .any(|t| t.target == PerturbationTarget::Extrinsic),
    }
}

fn check_point(spec: &ProviderSpec, p: Vec3) -> Result<()> {
    match spec {
        ProviderSpec::Euclidean => Ok(()),
        ProviderSpec::SchwarzschildCanonical { mass } => check_schwarzschild(*mass, p),
        ProviderSpec::SchwarzschildGraphical { mass, u } => {
            check_schwarzschild(*mass, p)?;
            let t = time_function(u, lift(p));
            let h = schwarzschild_inverse(*mass, p);
            let mut dt2 = 0.0;
            for i in 0..3 {
                for j in 0..3 {
                    dt2 += h[i][j] * t.d[i] * t.d[j];
                }
            }
            let margin = 1.0 - lapse_squared(*mass, p) * dt2;
            if margin > 0.0 {
                Ok(())
            } else {
                Err(StcmcError::SliceNotSpacelike { point: p, margin })
            }
        }
        ProviderSpec::Translated { inner, center } => {
            check_point(inner, [p[0] - center[0], p[1] - center[1], p[2] - center[2]])
        }
        ProviderSpec::Rotated { inner, rotation } => check_point(inner, rotate_point(rotation, p)),
        ProviderSpec::CustomPerturbation { .. } => {
            let r = norm(&p);
            if r < CUSTOM_CORE_RADIUS {
                Err(StcmcError::PointInsideCore { point: p, radius: r, inner: CUSTOM_CORE_RADIUS })
            } else {
                Ok(())
            }
        }
    }
}

fn check_schwarzschild(mass: f64, p: Vec3) -> Result<()> {
    let r = norm(&p);
    if mass > 0.0 && r <= 2.0 * mass {
        return Err(StcmcError::HorizonReached { point: p });
    }
    let inner = 1.05 * (2.0 * mass).max(0.0);
    if r < inner {
        return Err(StcmcError::PointInsideCore { point: p, radius: r, inner });
    }
    if r == 0.0 {
        return Err(StcmcError::SingularMetric { point: p });
    }
    Ok(())
}

fn det3(g: &Mat3) -> f64 {
    g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) - g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0])
        + g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0])
}

impl DataProvider {
    pub fn new(spec: ProviderSpec) -> Result<Self> {
        validate(&spec)?;
        Ok(DataProvider { spec, extrinsic_scale: 1.0 })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ProviderSpec =
            serde_json::from_str(text).map_err(|e| StcmcError::InvalidConfig(e.to_string()))?;
        Self::new(spec)
    }

    pub fn euclidean() -> Self {
        DataProvider { spec: ProviderSpec::Euclidean, extrinsic_scale: 1.0 }
    }

    pub fn schwarzschild(mass: f64) -> Result<Self> {
        Self::new(ProviderSpec::SchwarzschildCanonical { mass })
    }

    pub fn graphical(mass: f64, u: Vec3) -> Result<Self> {
        Self::new(ProviderSpec::SchwarzschildGraphical { mass, u })
    }

    pub fn translated(self, center: Vec3) -> Result<Self> {
        let scale = self.extrinsic_scale;
        let mut out = Self::new(ProviderSpec::Translated { inner: Box::new(self.spec), center })?;
        out.extrinsic_scale = scale;
        Ok(out)
    }

    pub fn rotated(self, rotation: Mat3) -> Result<Self> {
        let scale = self.extrinsic_scale;
        let mut out = Self::new(ProviderSpec::Rotated { inner: Box::new(self.spec), rotation })?;
        out.extrinsic_scale = scale;
        Ok(out)
    }

    /// Same metric with K replaced by `tau * K`.
    pub fn with_extrinsic_scale(&self, tau: f64) -> Self {
        DataProvider { spec: self.spec.clone(), extrinsic_scale: tau }
    }

    pub fn spec(&self) -> &ProviderSpec {
        &self.spec
    }

    pub fn extrinsic_scale(&self) -> f64 {
        self.extrinsic_scale
    }

    pub fn has_extrinsic(&self) -> bool {
        self.extrinsic_scale != 0.0 && has_extrinsic(&self.spec)
    }

    /// Mass parameter of the innermost Schwarzschild chart, if any.
    pub fn mass_parameter(&self) -> Option<f64> {
        fn walk(spec: &ProviderSpec) -> Option<f64> {
            match spec {
                ProviderSpec::SchwarzschildCanonical { mass }
                | ProviderSpec::SchwarzschildGraphical { mass, .. } => Some(*mass),
                ProviderSpec::Translated { inner, .. } | ProviderSpec::Rotated { inner, .. } => {
                    walk(inner)
                }
                _ => None,
            }
        }
        walk(&self.spec)
    }

    /// Fails if `p` is outside the domain where the data are defined.
    pub fn check_point(&self, p: Vec3) -> Result<()> {
        check_point(&self.spec, p)
    }

    /// Metric components at `p` with any scalar type (used to build jets).
    pub fn metric_generic<S: Scalar>(&self, x: [S; 3]) -> [[S; 3]; 3] {
        metric_of(&self.spec, x)
    }

    /// Second fundamental form components at `p` with any scalar type.
    pub fn extrinsic_generic<S: Scalar>(&self, x: [S; 3]) -> [[S; 3]; 3] {
        if !self.has_extrinsic() {
            return zeros();
        }
        let mut k = extrinsic_of(&self.spec, x);
        if self.extrinsic_scale != 1.0 {
            for row in k.iter_mut() {
                for v in row.iter_mut() {
                    *v = *v * self.extrinsic_scale;
                }
            }
        }
        k
    }

    /// g, first and second derivatives at `p`.
    pub fn metric_jet(&self, p: Vec3) -> Result<MetricJet> {
        self.check_point(p)?;
        let g2 = self.metric_generic(lift(lift(p)));
        let mut jet = MetricJet::default();
        for i in 0..3 {
            for j in 0..3 {
                let (v, grad, hess) = second_order(g2[i][j]);
                jet.g[i][j] = v;
                for k in 0..3 {
                    jet.dg[k][i][j] = grad[k];
                    for l in 0..3 {
                        jet.ddg[k][l][i][j] = hess[k][l];
                    }
                }
            }
        }
        check_metric(&jet.g, p)?;
        Ok(jet)
    }

    /// g and its first derivatives at `p`; cheaper than a full jet.
    pub fn metric_first(&self, p: Vec3) -> Result<(Mat3, [Mat3; 3])> {
        self.check_point(p)?;
        let g1 = self.metric_generic(lift(p));
        let mut g = [[0.0; 3]; 3];
        let mut dg = [[[0.0; 3]; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = g1[i][j].v;
                for k in 0..3 {
                    dg[k][i][j] = g1[i][j].d[k];
                }
            }
        }
        check_metric(&g, p)?;
        Ok((g, dg))
    }

    pub fn metric_value(&self, p: Vec3) -> Result<Mat3> {
        self.check_point(p)?;
        let g = self.metric_generic(p);
        check_metric(&g, p)?;
        Ok(g)
    }

    /// K and its first derivatives at `p`.
    pub fn extrinsic_jet(&self, p: Vec3) -> Result<ExtrinsicJet> {
        self.check_point(p)?;
        let mut jet = ExtrinsicJet::default();
        if !self.has_extrinsic() {
            return Ok(jet);
        }
        let k1 = self.extrinsic_generic(lift(p));
        for i in 0..3 {
            for j in 0..3 {
                jet.k[i][j] = k1[i][j].v;
                for l in 0..3 {
                    jet.dk[l][i][j] = k1[i][j].d[l];
                }
            }
        }
        Ok(jet)
    }

    pub fn extrinsic_value(&self, p: Vec3) -> Result<Mat3> {
        self.check_point(p)?;
        Ok(self.extrinsic_generic(p))
    }
}

fn check_metric(g: &Mat3, p: Vec3) -> Result<()> {
    let minor = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    let det = det3(g);
    if g[0][0] > 0.0 && minor > 0.0 && det > 0.0 && det.is_finite() {
        Ok(())
    } else {
        Err(StcmcError::SingularMetric { point: p })
    }
}
