//! C interface: opaque handles for providers, solved surfaces and charge
//! tables, integer status codes, and a per-thread last error message.
//!
//! Every function returns a [`StcmcStatus`]. On failure the message stays
//! readable through [`stcmc_last_error_message`] until the next failing
//! call on the same thread. Handles are released with their `_free`
//! function; passing null to a `_free` function is allowed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use stcmc::charges::ChargeTable;
use stcmc::chart::DataProvider;
use stcmc::solver::{newton_solve, SolveConfig};
use stcmc::surface::{surface_frames, GraphSurface};
use stcmc::StcmcError;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StcmcStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// Bad parameters: the same class the command line reports with exit code 2.
    InvalidArgument = 2,
    /// A well-posed request failed numerically.
    NumericalFailure = 3,
    /// A Rust panic was caught at the boundary.
    Panic = 4,
}

/// Initial data set.
pub struct StcmcProvider(DataProvider);

/// Solved STCMC surface with its solve diagnostics.
pub struct StcmcSurface {
    surface: GraphSurface,
    iterations: usize,
    residual: f64,
    area_radius: f64,
    hawking_mass: f64,
}

/// Per-radius charges and their extrapolated limits.
pub struct StcmcChargeTable(ChargeTable);

/// Scalar summary of a solved surface.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default)]
pub struct StcmcSurfaceInfo {
    pub center: [f64; 3],
    pub radius: f64,
    pub area_radius: f64,
    pub hawking_mass: f64,
    pub residual: f64,
    pub band: usize,
    pub iterations: usize,
}

/// Number of values per row of a charge table:
/// `radius, E, P1..3, CBOM1..3, Z1..3, CSTCMC1..3, V1..3`.
pub const STCMC_CHARGE_COLUMNS: usize = 17;

thread_local! {
    static LAST_ERROR: RefCell<Option<(CString, CString)>> = const { RefCell::new(None) };
}

enum Failure {
    Null(&'static str),
    Invalid(String),
    Core(StcmcError),
}

impl From<StcmcError> for Failure {
    fn from(e: StcmcError) -> Self {
        Failure::Core(e)
    }
}

fn remember(kind: &str, message: String) {
    let clean = |s: String| CString::new(s.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some((clean(kind.to_string()), clean(message))));
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> StcmcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => StcmcStatus::Ok,
        Ok(Err(Failure::Null(name))) => {
            remember("NullPointer", format!("{name} must not be null"));
            StcmcStatus::NullPointer
        }
        Ok(Err(Failure::Invalid(msg))) => {
            remember("InvalidConfig", msg);
            StcmcStatus::InvalidArgument
        }
        Ok(Err(Failure::Core(e))) => {
            remember(e.kind(), e.to_string());
            if e.is_config_error() {
                StcmcStatus::InvalidArgument
            } else {
                StcmcStatus::NumericalFailure
            }
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            remember("Panic", msg);
            StcmcStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, name: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(name))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(Failure::Null("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn vec3(p: *const f64, name: &'static str) -> Result<[f64; 3], Failure> {
    if p.is_null() {
        return Err(Failure::Null(name));
    }
    let s = std::slice::from_raw_parts(p, 3);
    Ok([s[0], s[1], s[2]])
}

/// Message of the last failure on this thread, or null if none. The
/// pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn stcmc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |(_, m)| m.as_ptr()))
}

/// Short error name of the last failure on this thread (for example
/// `"NewtonDiverged"`), or null if none.
#[no_mangle]
pub extern "C" fn stcmc_last_error_kind() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |(k, _)| k.as_ptr()))
}

#[no_mangle]
pub extern "C" fn stcmc_clear_last_error() {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn stcmc_version() -> *const c_char {
    static VERSION: &CStr = match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
        Ok(v) => v,
        Err(_) => c"unknown",
    };
    VERSION.as_ptr()
}

/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn stcmc_provider_euclidean(out: *mut *mut StcmcProvider) -> StcmcStatus {
    guard(|| put(out, StcmcProvider(DataProvider::euclidean())))
}

/// Canonical Schwarzschild slice of mass `mass`.
///
/// # Safety
/// `out` must be valid for writing one pointer.
#[no_mangle]
pub unsafe extern "C" fn stcmc_provider_schwarzschild(mass: f64, out: *mut *mut StcmcProvider) -> StcmcStatus {
    guard(|| put(out, StcmcProvider(DataProvider::schwarzschild(mass)?)))
}

/// Graphical Schwarzschild slice with boost direction `u[0..3]`.
///
/// # Safety
/// `u` must point to three doubles and `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn stcmc_provider_graphical(mass: f64, u: *const f64, out: *mut *mut StcmcProvider) -> StcmcStatus {
    guard(|| put(out, StcmcProvider(DataProvider::graphical(mass, vec3(u, "u")?)?)))
}

/// Provider from its JSON description, e.g.
/// `{"kind": "schwarzschild_canonical", "mass": 1.0}`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn stcmc_provider_from_json(json: *const c_char, out: *mut *mut StcmcProvider) -> StcmcStatus {
    guard(|| {
        if json.is_null() {
            return Err(Failure::Null("json"));
        }
        let text = CStr::from_ptr(json).to_str().map_err(|e| Failure::Invalid(format!("json is not UTF-8: {e}")))?;
        put(out, StcmcProvider(DataProvider::from_json(text)?))
    })
}

/// Copy of `provider` moved so that its origin sits at `center[0..3]`.
///
/// # Safety
/// `provider` must be a live handle, `center` must point to three doubles
/// and `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn stcmc_provider_translated(
    provider: *const StcmcProvider,
    center: *const f64,
    out: *mut *mut StcmcProvider,
) -> StcmcStatus {
    guard(|| {
        let p = get(provider, "provider")?;
        put(out, StcmcProvider(p.0.clone().translated(vec3(center, "center")?)?))
    })
}

/// # Safety
/// `provider` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stcmc_provider_free(provider: *mut StcmcProvider) {
    if !provider.is_null() {
        drop(Box::from_raw(provider));
    }
}

/// Solve for the surface with spacetime mean curvature `2 / sigma`, seeded
/// by the coordinate sphere of radius `sigma` about `seed_center` (the
/// origin when null), as a radial graph of band limit `band`.
///
/// # Safety
/// `provider` must be a live handle, `seed_center` null or three doubles,
/// and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn stcmc_solve(
    provider: *const StcmcProvider,
    sigma: f64,
    band: usize,
    tolerance: f64,
    seed_center: *const f64,
    out: *mut *mut StcmcSurface,
) -> StcmcStatus {
    guard(|| {
        let p = &get(provider, "provider")?.0;
        let center = if seed_center.is_null() { [0.0; 3] } else { vec3(seed_center, "seed_center")? };
        let config = SolveConfig { tolerance, ..SolveConfig::with_band(band) };
        let seed = GraphSurface::sphere(center, sigma, band)?;
        let result = newton_solve(p, sigma, &seed, &config)?;
        let geo = surface_frames(p, &result.surface)?;
        put(
            out,
            StcmcSurface {
                iterations: result.iterations,
                residual: result.residual_sup,
                area_radius: geo.area_radius(),
                hawking_mass: geo.hawking_mass(),
                surface: result.surface,
            },
        )
    })
}

/// # Safety
/// `surface` must be a live handle and `info` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn stcmc_surface_info(surface: *const StcmcSurface, info: *mut StcmcSurfaceInfo) -> StcmcStatus {
    guard(|| {
        let s = get(surface, "surface")?;
        if info.is_null() {
            return Err(Failure::Null("info"));
        }
        *info = StcmcSurfaceInfo {
            center: s.surface.center,
            radius: s.surface.radius,
            area_radius: s.area_radius,
            hawking_mass: s.hawking_mass,
            residual: s.residual,
            band: s.surface.band(),
            iterations: s.iterations,
        };
        Ok(())
    })
}

/// Harmonic coefficients of the height function. Writes at most `capacity`
/// values into `coeffs` and the full count into `len`; call with
/// `capacity = 0` to query the size.
///
/// # Safety
/// `surface` must be a live handle, `coeffs` valid for `capacity` doubles
/// (or null when `capacity` is 0) and `len` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn stcmc_surface_coefficients(
    surface: *const StcmcSurface,
    coeffs: *mut f64,
    capacity: usize,
    len: *mut usize,
) -> StcmcStatus {
    guard(|| {
        let s = get(surface, "surface")?;
        if len.is_null() {
            return Err(Failure::Null("len"));
        }
        let c = &s.surface.coeffs;
        *len = c.len();
        if capacity > 0 {
            if coeffs.is_null() {
                return Err(Failure::Null("coeffs"));
            }
            let n = capacity.min(c.len());
            ptr::copy_nonoverlapping(c.as_ptr(), coeffs, n);
        }
        Ok(())
    })
}

/// # Safety
/// `surface` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stcmc_surface_free(surface: *mut StcmcSurface) {
    if !surface.is_null() {
        drop(Box::from_raw(surface));
    }
}

/// Charges over coordinate spheres of the given radii.
///
/// # Safety
/// `provider` must be a live handle, `radii` valid for `count` doubles and
/// `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn stcmc_charges(
    provider: *const StcmcProvider,
    radii: *const f64,
    count: usize,
    out: *mut *mut StcmcChargeTable,
) -> StcmcStatus {
    guard(|| {
        let p = &get(provider, "provider")?.0;
        if radii.is_null() {
            return Err(Failure::Null("radii"));
        }
        let r = std::slice::from_raw_parts(radii, count);
        put(out, StcmcChargeTable(ChargeTable::compute(p, r)?))
    })
}

/// # Safety
/// `table` must be a live handle and `len` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn stcmc_charges_len(table: *const StcmcChargeTable, len: *mut usize) -> StcmcStatus {
    guard(|| {
        let t = get(table, "table")?;
        if len.is_null() {
            return Err(Failure::Null("len"));
        }
        *len = t.0.charges.radii.len();
        Ok(())
    })
}

/// Row `index` of the table, [`STCMC_CHARGE_COLUMNS`] values in the order
/// `radius, E, P1..3, CBOM1..3, Z1..3, CSTCMC1..3, V1..3`. Centers and
/// velocities are NaN when the energy vanishes.
///
/// # Safety
/// `table` must be a live handle and `row` valid for 17 doubles.
#[no_mangle]
pub unsafe extern "C" fn stcmc_charges_row(table: *const StcmcChargeTable, index: usize, row: *mut f64) -> StcmcStatus {
    guard(|| {
        let t = &get(table, "table")?.0;
        if row.is_null() {
            return Err(Failure::Null("row"));
        }
        let n = t.charges.radii.len();
        if index >= n {
            return Err(Failure::Invalid(format!("row {index} out of range for {n} radii")));
        }
        let nan = [f64::NAN; 3];
        let mut values = Vec::with_capacity(STCMC_CHARGE_COLUMNS);
        values.push(t.charges.radii[index]);
        values.push(t.charges.energy[index]);
        values.extend(t.charges.momentum[index]);
        match &t.centers {
            Some(c) => {
                values.extend(c.bom[index]);
                values.extend(c.correction[index]);
                values.extend(c.stcmc[index]);
            }
            None => (0..3).for_each(|_| values.extend(nan)),
        }
        values.extend(t.evolution.as_ref().map_or(nan, |e| e.velocity[index]));
        ptr::copy_nonoverlapping(values.as_ptr(), row, STCMC_CHARGE_COLUMNS);
        Ok(())
    })
}

/// Extrapolated energy and momentum `limits = [E, P1, P2, P3]`.
///
/// # Safety
/// `table` must be a live handle and `limits` valid for 4 doubles.
#[no_mangle]
pub unsafe extern "C" fn stcmc_charges_limits(table: *const StcmcChargeTable, limits: *mut f64) -> StcmcStatus {
    guard(|| {
        let t = &get(table, "table")?.0;
        if limits.is_null() {
            return Err(Failure::Null("limits"));
        }
        let p = t.charges.momentum_limit;
        let values = [t.charges.energy_limit, p[0], p[1], p[2]];
        ptr::copy_nonoverlapping(values.as_ptr(), limits, 4);
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn stcmc_charges_free(table: *mut StcmcChargeTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}
