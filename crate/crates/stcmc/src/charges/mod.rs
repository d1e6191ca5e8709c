//! Asymptotic charges from flux integrals over coordinate spheres.

mod fit;

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

pub use fit::{log_slope, oscillation_fit, power_law_fit, OscillationFit, PowerFit};

use crate::chart::{conjugate_momentum, constraint_densities, orthogonality_defect, DataProvider, Mat3, Vec3};
use crate::error::{Result, StcmcError};
use crate::solver::FoliationResult;
use crate::sphere::SphereGrid;

/// Band limit of the quadrature grid on each coordinate sphere.
pub const CHARGE_BAND: usize = 32;

/// Energies below this are treated as zero when normalizing centers.
pub const ENERGY_FLOOR: f64 = 1e-12;

/// A log-periodic component counts as divergent only above this size,
/// relative to the scale of the data.
const OSCILLATION_FLOOR: f64 = 1e-9;

/// Raw integrals over one coordinate sphere `|x| = radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SphereFluxes {
    pub radius: f64,
    /// `E(s)`.
    pub energy: f64,
    /// `P(s)`.
    pub momentum: Vec3,
    /// `16 pi E C_BOM(s)`.
    pub center_flux: Vec3,
    /// `32 pi E Z(s)`.
    pub correction_flux: Vec3,
    /// `8 pi E V(s)`, integrated against the induced area element.
    pub velocity_flux: Vec3,
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn quadratic(m: &Mat3, a: &Vec3, b: &Vec3) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            acc += m[i][j] * a[i] * b[j];
        }
    }
    acc
}

/// Evaluate every flux integral on the sphere of coordinate radius `radius`
/// about the origin, using a Gauss-Legendre grid of band `band`.
pub fn sphere_fluxes(provider: &DataProvider, radius: f64, band: usize) -> Result<SphereFluxes> {
    sphere_fluxes_about(provider, [0.0; 3], radius, band)
}

/// Flux integrals on the sphere `|x - center| = radius`. The unit normal
/// replaces `x / |x|`; the moments in the center integrands use `x` itself.
pub fn sphere_fluxes_about(provider: &DataProvider, center: Vec3, radius: f64, band: usize) -> Result<SphereFluxes> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(StcmcError::NonpositiveRadius(radius));
    }
    let grid = SphereGrid::shared(band)?;
    let s = radius;
    let (mut energy, mut momentum) = (0.0, [0.0; 3]);
    let (mut moment, mut correction, mut velocity) = ([0.0; 3], [0.0; 3], [0.0; 3]);
    for n in 0..grid.len() {
        let w = grid.direction(n);
        let (theta, phi) = grid.angles(n);
        let x = [center[0] + s * w[0], center[1] + s * w[1], center[2] + s * w[2]];
        let (g, dg) = provider.metric_first(x)?;
        let k = provider.extrinsic_value(x)?;
        let pi = conjugate_momentum(&g, &k);

        // sum_ij (d_i g_ij - d_j g_ii) w^j, with dg[l] = d_l g
        let mut flux = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                flux += (dg[i][i][j] - dg[j][i][i]) * w[j];
            }
        }
        // the flat part of g integrates to zero; dropping it avoids O(s^2) roundoff
        let tr_dev = g[0][0] + g[1][1] + g[2][2] - 3.0;
        let pi_w: Vec3 = std::array::from_fn(|j| (0..3).map(|i| pi[i][j] * w[i]).sum());
        let pi_ww = quadratic(&pi, &w, &w);

        // round measure s^2 dOmega; the induced one from an orthonormal
        // tangent frame of the unit sphere
        let round = s * s * grid.weight(n);
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        let e1 = [ct * cp, ct * sp, -st];
        let e2 = [-sp, cp, 0.0];
        let h11 = quadratic(&g, &e1, &e1);
        let h12 = quadratic(&g, &e1, &e2);
        let h22 = quadratic(&g, &e2, &e2);
        let induced = round * (h11 * h22 - h12 * h12).sqrt();

        energy += flux * round;
        for l in 0..3 {
            momentum[l] += pi_w[l] * round;
            let dev_w: f64 = (0..3).map(|i| (g[i][l] - if i == l { 1.0 } else { 0.0 }) * w[i]).sum();
            moment[l] += (x[l] * flux - (dev_w - tr_dev * w[l])) * round;
            correction[l] += x[l] * s * pi_ww * pi_ww * round;
            velocity[l] += pi_w[l] * induced;
        }
    }
    Ok(SphereFluxes {
        radius: s,
        energy: energy / (16.0 * PI),
        momentum: momentum.map(|v| v / (8.0 * PI)),
        center_flux: moment,
        correction_flux: correction,
        velocity_flux: velocity,
    })
}

fn validate_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(StcmcError::InsufficientLeaves { needed: 1, got: 0 });
    }
    for &r in radii {
        if !(r > 0.0) || !r.is_finite() {
            return Err(StcmcError::NonpositiveRadius(r));
        }
    }
    Ok(())
}

/// Fluxes on every sphere, evaluated in parallel and returned in input order.
pub fn radius_sweep(provider: &DataProvider, radii: &[f64], band: usize) -> Result<Vec<SphereFluxes>> {
    validate_radii(radii)?;
    radii.par_iter().map(|&r| sphere_fluxes(provider, r, band)).collect()
}

/// Extrapolated limit and log-periodic diagnostics of one scalar sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Trend {
    /// Power-law fit, when at least three samples are available.
    pub fit: Option<PowerFit>,
    /// Log-periodic fit, when at least four samples are available.
    pub oscillation: Option<OscillationFit>,
    /// The log-periodic part dominates the decaying part by more than ten.
    pub diverges: bool,
    /// Fitted limit from the better of the two models on eight or more
    /// samples, else from the power law, else the value at the largest
    /// radius. `None` when the sequence diverges.
    pub limit: Option<f64>,
}

impl Trend {
    pub fn of(s: &[f64], y: &[f64]) -> Trend {
        let fit = power_law_fit(s, y);
        let oscillation = oscillation_fit(s, y);
        let scale = y.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let diverges = oscillation
            .map(|o| o.amplitude > OSCILLATION_FLOOR * scale && o.amplitude > 10.0 * o.decaying.max(o.rms))
            .unwrap_or(false);
        let last = s
            .iter()
            .zip(y)
            .max_by(|a, b| a.0.total_cmp(b.0))
            .map(|(_, v)| *v)
            .unwrap_or(f64::NAN);
        // on dense sweeps the log-periodic model may describe the data better
        let limit = match (diverges, fit, oscillation) {
            (true, ..) => None,
            (false, Some(f), Some(o)) if s.len() >= 8 && o.rms < f.rms => Some(o.mean),
            (false, Some(f), _) => Some(f.limit),
            (false, None, _) => Some(last),
        };
        Trend { fit, oscillation, diverges, limit }
    }
}

fn vector_trend(s: &[f64], v: &[Vec3]) -> [Trend; 3] {
    std::array::from_fn(|i| Trend::of(s, &v.iter().map(|x| x[i]).collect::<Vec<_>>()))
}

fn vector_limit(t: &[Trend; 3]) -> Option<Vec3> {
    Some([t[0].limit?, t[1].limit?, t[2].limit?])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChargeReport {
    pub radii: Vec<f64>,
    pub energy: Vec<f64>,
    pub momentum: Vec<Vec3>,
    pub energy_trend: Trend,
    pub momentum_trend: [Trend; 3],
    pub energy_limit: f64,
    pub momentum_limit: Vec3,
    /// `sqrt(E^2 - |P|^2)` of the limits; `None` when they are spacelike.
    pub mass: Option<f64>,
}

fn charge_report(fluxes: &[SphereFluxes]) -> ChargeReport {
    let radii: Vec<f64> = fluxes.iter().map(|f| f.radius).collect();
    let energy: Vec<f64> = fluxes.iter().map(|f| f.energy).collect();
    let momentum: Vec<Vec3> = fluxes.iter().map(|f| f.momentum).collect();
    let energy_trend = Trend::of(&radii, &energy);
    let momentum_trend = vector_trend(&radii, &momentum);
    // a divergent charge still gets its best power-law estimate
    let pick = |t: &Trend, fallback: f64| t.limit.or(t.fit.map(|f| f.limit)).unwrap_or(fallback);
    let last = fluxes.len() - 1;
    let energy_limit = pick(&energy_trend, energy[last]);
    let momentum_limit: Vec3 = std::array::from_fn(|i| pick(&momentum_trend[i], momentum[last][i]));
    ChargeReport {
        mass: adm_mass(energy_limit, momentum_limit).ok(),
        radii,
        energy,
        momentum,
        energy_trend,
        momentum_trend,
        energy_limit,
        momentum_limit,
    }
}

/// ADM energy and linear momentum on the given radii, with extrapolation.
pub fn adm_charges(provider: &DataProvider, radii: &[f64]) -> Result<ChargeReport> {
    Ok(charge_report(&radius_sweep(provider, radii, CHARGE_BAND)?))
}

/// `sqrt(E^2 - |P|^2)`.
pub fn adm_mass(energy: f64, momentum: Vec3) -> Result<f64> {
    let p2 = dot(&momentum, &momentum);
    let e2 = energy * energy;
    if e2 < p2 {
        return Err(StcmcError::SpacelikeEnergyMomentum { energy, momentum: p2.sqrt() });
    }
    Ok((e2 - p2).sqrt())
}

fn check_energy(energy: f64) -> Result<()> {
    if !(energy.abs() > ENERGY_FLOOR) {
        return Err(StcmcError::ZeroEnergy);
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CenterReport {
    pub radii: Vec<f64>,
    pub energy: f64,
    pub bom: Vec<Vec3>,
    pub correction: Vec<Vec3>,
    /// `bom + correction`, componentwise at every radius.
    pub stcmc: Vec<Vec3>,
    pub bom_trend: [Trend; 3],
    pub correction_trend: [Trend; 3],
    pub stcmc_trend: [Trend; 3],
}

impl CenterReport {
    pub fn bom_limit(&self) -> Option<Vec3> {
        vector_limit(&self.bom_trend)
    }

    pub fn correction_limit(&self) -> Option<Vec3> {
        vector_limit(&self.correction_trend)
    }

    pub fn stcmc_limit(&self) -> Option<Vec3> {
        vector_limit(&self.stcmc_trend)
    }

    fn from_parts(radii: Vec<f64>, energy: f64, bom: Vec<Vec3>, correction: Vec<Vec3>) -> CenterReport {
        let stcmc: Vec<Vec3> = bom
            .iter()
            .zip(&correction)
            .map(|(b, z)| [b[0] + z[0], b[1] + z[1], b[2] + z[2]])
            .collect();
        CenterReport {
            bom_trend: vector_trend(&radii, &bom),
            correction_trend: vector_trend(&radii, &correction),
            stcmc_trend: vector_trend(&radii, &stcmc),
            radii,
            energy,
            bom,
            correction,
            stcmc,
        }
    }
}

fn center_report(fluxes: &[SphereFluxes], energy: f64) -> Result<CenterReport> {
    check_energy(energy)?;
    let radii = fluxes.iter().map(|f| f.radius).collect();
    let bom = fluxes.iter().map(|f| f.center_flux.map(|v| v / (16.0 * PI * energy))).collect();
    let correction = fluxes.iter().map(|f| f.correction_flux.map(|v| v / (32.0 * PI * energy))).collect();
    Ok(CenterReport::from_parts(radii, energy, bom, correction))
}

/// Beig-O Murchadha center `C_BOM(s)` per radius.
pub fn bom_center(provider: &DataProvider, radii: &[f64], energy: f64) -> Result<Vec<Vec3>> {
    check_energy(energy)?;
    Ok(stcmc_center_coordinate(provider, radii, energy)?.bom)
}

/// Spacetime correction `Z(s)` per radius.
pub fn correction_z(provider: &DataProvider, radii: &[f64], energy: f64) -> Result<Vec<Vec3>> {
    check_energy(energy)?;
    Ok(stcmc_center_coordinate(provider, radii, energy)?.correction)
}

/// `C_BOM(s)`, `Z(s)` and their sum, with trends.
pub fn stcmc_center_coordinate(provider: &DataProvider, radii: &[f64], energy: f64) -> Result<CenterReport> {
    check_energy(energy)?;
    center_report(&radius_sweep(provider, radii, CHARGE_BAND)?, energy)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvolutionReport {
    pub radii: Vec<f64>,
    pub velocity: Vec<Vec3>,
    pub velocity_trend: [Trend; 3],
    /// Extrapolated velocity; a divergent component falls back to its
    /// power-law estimate.
    pub velocity_limit: Vec3,
    /// `P / E` from the extrapolated charges.
    pub expected: Vec3,
    /// `max_i |V_i - P_i / E|`.
    pub discrepancy: f64,
}

fn evolution_report(fluxes: &[SphereFluxes], energy: f64, momentum: Vec3) -> Result<EvolutionReport> {
    check_energy(energy)?;
    let radii: Vec<f64> = fluxes.iter().map(|f| f.radius).collect();
    let velocity: Vec<Vec3> = fluxes.iter().map(|f| f.velocity_flux.map(|v| v / (8.0 * PI * energy))).collect();
    let velocity_trend = vector_trend(&radii, &velocity);
    let last = velocity.len() - 1;
    let velocity_limit: Vec3 = std::array::from_fn(|i| {
        let t = &velocity_trend[i];
        t.limit.or(t.fit.map(|f| f.limit)).unwrap_or(velocity[last][i])
    });
    let expected = momentum.map(|p| p / energy);
    let discrepancy = (0..3).map(|i| (velocity_limit[i] - expected[i]).abs()).fold(0.0, f64::max);
    Ok(EvolutionReport { radii, velocity, velocity_trend, velocity_limit, expected, discrepancy })
}

/// Velocity integral `V(s)` compared with `P / E`.
pub fn velocity_integral(provider: &DataProvider, radii: &[f64], energy: f64, momentum: Vec3) -> Result<EvolutionReport> {
    check_energy(energy)?;
    evolution_report(&radius_sweep(provider, radii, CHARGE_BAND)?, energy, momentum)
}

/// Every charge from one sweep. Centers and velocities are absent when the
/// extrapolated energy vanishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChargeTable {
    pub charges: ChargeReport,
    pub centers: Option<CenterReport>,
    pub evolution: Option<EvolutionReport>,
}

impl ChargeTable {
    pub fn compute(provider: &DataProvider, radii: &[f64]) -> Result<ChargeTable> {
        Self::compute_with_band(provider, radii, CHARGE_BAND)
    }

    pub fn compute_with_band(provider: &DataProvider, radii: &[f64], band: usize) -> Result<ChargeTable> {
        let fluxes = radius_sweep(provider, radii, band)?;
        let charges = charge_report(&fluxes);
        let energy = charges.energy_limit;
        let (centers, evolution) = if energy.abs() > ENERGY_FLOOR {
            (
                Some(center_report(&fluxes, energy)?),
                Some(evolution_report(&fluxes, energy, charges.momentum_limit)?),
            )
        } else {
            (None, None)
        };
        Ok(ChargeTable { charges, centers, evolution })
    }

    /// One row per radius: `radius,E,P1..P3,CBOM1..3,Z1..3,CSTCMC1..3,V1..3`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "radius,E,P1,P2,P3,CBOM1,CBOM2,CBOM3,Z1,Z2,Z3,CSTCMC1,CSTCMC2,CSTCMC3,V1,V2,V3"
        )?;
        let nan = [f64::NAN; 3];
        for (i, &r) in self.charges.radii.iter().enumerate() {
            let mut row = vec![r, self.charges.energy[i]];
            row.extend(self.charges.momentum[i]);
            match &self.centers {
                Some(c) => {
                    row.extend(c.bom[i]);
                    row.extend(c.correction[i]);
                    row.extend(c.stcmc[i]);
                }
                None => (0..3).for_each(|_| row.extend(nan)),
            }
            row.extend(self.evolution.as_ref().map(|e| e.velocity[i]).unwrap_or(nan));
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

fn rotate(o: &Mat3, v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| (0..3).map(|j| o[i][j] * v[j]).sum())
}

/// Apply `x -> O x + T` to every report: energies are unchanged, momenta,
/// corrections and velocities rotate, centers rotate and shift.
pub fn euclidean_motion_transform(table: &ChargeTable, rotation: Mat3, translation: Vec3) -> Result<ChargeTable> {
    let defect = orthogonality_defect(&rotation);
    if !(defect <= 1e-10) {
        return Err(StcmcError::NotOrthogonal(defect));
    }
    let moved = |v: &Vec3| {
        let r = rotate(&rotation, v);
        [r[0] + translation[0], r[1] + translation[1], r[2] + translation[2]]
    };
    let c = &table.charges;
    let momentum: Vec<Vec3> = c.momentum.iter().map(|p| rotate(&rotation, p)).collect();
    let momentum_limit = rotate(&rotation, &c.momentum_limit);
    let charges = ChargeReport {
        radii: c.radii.clone(),
        energy: c.energy.clone(),
        momentum_trend: vector_trend(&c.radii, &momentum),
        momentum,
        energy_trend: c.energy_trend,
        energy_limit: c.energy_limit,
        momentum_limit,
        mass: c.mass,
    };
    let centers = table.centers.as_ref().map(|r| {
        CenterReport::from_parts(
            r.radii.clone(),
            r.energy,
            r.bom.iter().map(&moved).collect(),
            r.correction.iter().map(|z| rotate(&rotation, z)).collect(),
        )
    });
    let evolution = table.evolution.as_ref().map(|e| {
        let velocity: Vec<Vec3> = e.velocity.iter().map(|v| rotate(&rotation, v)).collect();
        EvolutionReport {
            radii: e.radii.clone(),
            velocity_trend: vector_trend(&e.radii, &velocity),
            velocity,
            velocity_limit: rotate(&rotation, &e.velocity_limit),
            expected: rotate(&rotation, &e.expected),
            discrepancy: e.discrepancy,
        }
    });
    Ok(ChargeTable { charges, centers, evolution })
}

/// Limit of the leaf coordinate centers along a foliation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FoliationCenter {
    pub sigmas: Vec<f64>,
    pub centers: Vec<Vec3>,
    pub trends: [Trend; 3],
    /// Extrapolated center; `None` when some component diverges.
    pub limit: Option<Vec3>,
    /// Largest power-law fit residual over the components.
    pub residual: f64,
    /// No component diverges and successive center moves do not grow.
    pub converged: bool,
}

pub fn stcmc_center_foliation(foliation: &FoliationResult) -> Result<FoliationCenter> {
    let got = foliation.leaves.len();
    if got < 3 {
        return Err(StcmcError::InsufficientLeaves { needed: 3, got });
    }
    let sigmas = foliation.sigmas();
    let centers = foliation.centers();
    let trends = vector_trend(&sigmas, &centers);
    let residual = trends.iter().map(|t| t.fit.map(|f| f.rms).unwrap_or(0.0)).fold(0.0, f64::max);
    let moves: Vec<f64> = centers
        .windows(2)
        .map(|w| (0..3).map(|i| (w[1][i] - w[0][i]).powi(2)).sum::<f64>().sqrt())
        .collect();
    let scale = centers.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
    let shrinking = moves.windows(2).all(|w| w[1] <= w[0] + 1e-12 * scale);
    let converged = trends.iter().all(|t| !t.diverges) && shrinking;
    Ok(FoliationCenter { limit: vector_limit(&trends), sigmas, centers, trends, residual, converged })
}

/// `oint |mu x^i| d mu_flat` on one coordinate sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ShellMoment {
    pub radius: f64,
    pub moments: Vec3,
}

/// Shell integrals of the first moments of the energy density. Their sum
/// over a radial grid approximates the `L^1` norm of `mu x^i`; no threshold
/// is applied.
pub fn mu_moment_shells(provider: &DataProvider, radii: &[f64]) -> Result<Vec<ShellMoment>> {
    validate_radii(radii)?;
    let grid = SphereGrid::shared(CHARGE_BAND)?;
    radii
        .par_iter()
        .map(|&s| {
            let mut moments = [0.0; 3];
            for n in 0..grid.len() {
                let w = grid.direction(n);
                let x = [s * w[0], s * w[1], s * w[2]];
                let (mu, _) = constraint_densities(&provider.metric_jet(x)?, &provider.extrinsic_jet(x)?);
                for i in 0..3 {
                    moments[i] += (mu * x[i]).abs() * s * s * grid.weight(n);
                }
            }
            Ok(ShellMoment { radius: s, moments })
        })
        .collect()
}

/// `count` radii spaced evenly in `ln s` from `start` to `stop`.
pub fn log_grid(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if !(start > 0.0) || !(stop > start) || count < 2 {
        return Err(StcmcError::InvalidConfig(format!(
            "log grid needs 0 < start < stop and at least two points, got {start}:{stop}:{count}"
        )));
    }
    let (a, b) = (start.ln(), stop.ln());
    Ok((0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect())
}
