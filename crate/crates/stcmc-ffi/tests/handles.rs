use std::ffi::{CStr, CString};
use std::ptr;

use stcmc_ffi::*;

fn last_kind() -> String {
    let p = stcmc_last_error_kind();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn last_message() -> String {
    let p = stcmc_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn schwarzschild_charges_through_handles() {
    unsafe {
        let mut provider = ptr::null_mut();
        assert_eq!(stcmc_provider_schwarzschild(1.0, &mut provider), StcmcStatus::Ok);
        let radii = [50.0, 100.0, 200.0, 400.0];
        let mut table = ptr::null_mut();
        assert_eq!(stcmc_charges(provider, radii.as_ptr(), radii.len(), &mut table), StcmcStatus::Ok);
        let mut len = 0;
        assert_eq!(stcmc_charges_len(table, &mut len), StcmcStatus::Ok);
        assert_eq!(len, 4);
        let mut row = [0.0; STCMC_CHARGE_COLUMNS];
        for (i, s) in radii.iter().enumerate() {
            assert_eq!(stcmc_charges_row(table, i, row.as_mut_ptr()), StcmcStatus::Ok);
            assert_eq!(row[0], *s);
            assert!((row[1] - s / (s - 2.0)).abs() < 1e-12);
            assert!(row[5..14].iter().all(|v| v.abs() < 1e-12));
        }
        let mut limits = [0.0; 4];
        assert_eq!(stcmc_charges_limits(table, limits.as_mut_ptr()), StcmcStatus::Ok);
        assert!((limits[0] - 1.0).abs() < 1e-3);

        assert_eq!(stcmc_charges_row(table, 4, row.as_mut_ptr()), StcmcStatus::InvalidArgument);
        assert_eq!(last_kind(), "InvalidConfig");
        stcmc_charges_free(table);
        stcmc_provider_free(provider);
    }
}

#[test]
fn solve_and_read_back_surface() {
    unsafe {
        let mut provider = ptr::null_mut();
        assert_eq!(stcmc_provider_schwarzschild(1.0, &mut provider), StcmcStatus::Ok);
        let mut surface = ptr::null_mut();
        assert_eq!(stcmc_solve(provider, 20.0, 8, 1e-10, ptr::null(), &mut surface), StcmcStatus::Ok);
        let mut info = StcmcSurfaceInfo::default();
        assert_eq!(stcmc_surface_info(surface, &mut info), StcmcStatus::Ok);
        // largest root of r^3 - 400 r + 800
        assert!((info.radius - 18.912985478).abs() < 1e-8, "{info:?}");
        assert!((info.hawking_mass - 1.0).abs() < 1e-8);
        assert!(info.residual <= 1e-10);
        assert_eq!(info.band, 8);

        let mut len = 0;
        assert_eq!(stcmc_surface_coefficients(surface, ptr::null_mut(), 0, &mut len), StcmcStatus::Ok);
        assert_eq!(len, 81);
        let mut coeffs = vec![1.0; len];
        assert_eq!(stcmc_surface_coefficients(surface, coeffs.as_mut_ptr(), len, &mut len), StcmcStatus::Ok);
        assert!(coeffs.iter().all(|c| c.abs() < 1e-8));
        stcmc_surface_free(surface);
        stcmc_provider_free(provider);
    }
}

#[test]
fn translated_provider_moves_the_leaf() {
    unsafe {
        let json = CString::new(r#"{"kind": "schwarzschild_canonical", "mass": 1.0}"#).unwrap();
        let mut base = ptr::null_mut();
        assert_eq!(stcmc_provider_from_json(json.as_ptr(), &mut base), StcmcStatus::Ok);
        let c = [1.0, -2.0, 0.5];
        let mut moved = ptr::null_mut();
        assert_eq!(stcmc_provider_translated(base, c.as_ptr(), &mut moved), StcmcStatus::Ok);
        let mut surface = ptr::null_mut();
        assert_eq!(stcmc_solve(moved, 20.0, 8, 1e-10, c.as_ptr(), &mut surface), StcmcStatus::Ok);
        let mut info = StcmcSurfaceInfo::default();
        assert_eq!(stcmc_surface_info(surface, &mut info), StcmcStatus::Ok);
        for k in 0..3 {
            assert!((info.center[k] - c[k]).abs() < 1e-9);
        }
        stcmc_surface_free(surface);
        stcmc_provider_free(moved);
        stcmc_provider_free(base);
    }
}

#[test]
fn errors_set_status_and_message() {
    unsafe {
        stcmc_clear_last_error();
        assert!(stcmc_last_error_message().is_null());

        let mut provider = ptr::null_mut();
        assert_eq!(stcmc_provider_schwarzschild(f64::NAN, &mut provider), StcmcStatus::InvalidArgument);
        assert!(provider.is_null());
        assert!(!last_message().is_empty());

        assert_eq!(stcmc_provider_euclidean(ptr::null_mut()), StcmcStatus::NullPointer);
        assert_eq!(last_kind(), "NullPointer");

        let bad = CString::new("{\"kind\": \"wormhole\"}").unwrap();
        assert_eq!(stcmc_provider_from_json(bad.as_ptr(), &mut provider), StcmcStatus::InvalidArgument);

        assert_eq!(stcmc_provider_schwarzschild(1.0, &mut provider), StcmcStatus::Ok);
        let mut surface = ptr::null_mut();
        // sigma = 2.5 puts the seed inside the trapped region
        let status = stcmc_solve(provider, 2.5, 6, 1e-10, ptr::null(), &mut surface);
        assert_eq!(status, StcmcStatus::NumericalFailure);
        assert!(surface.is_null());
        assert_ne!(last_kind(), "InvalidConfig");
        assert_eq!(stcmc_solve(provider, 20.0, 1, 1e-10, ptr::null(), &mut surface), StcmcStatus::InvalidArgument);
        assert_eq!(last_kind(), "BandLimitTooSmall");

        let empty: [f64; 0] = [];
        let mut table = ptr::null_mut();
        assert_eq!(stcmc_charges(provider, empty.as_ptr(), 0, &mut table), StcmcStatus::InvalidArgument);
        stcmc_provider_free(provider);

        stcmc_provider_free(ptr::null_mut());
        stcmc_surface_free(ptr::null_mut());
        stcmc_charges_free(ptr::null_mut());
    }
}

#[test]
fn version_and_header() {
    let v = unsafe { CStr::from_ptr(stcmc_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/stcmc.h")).unwrap();
    for name in ["stcmc_solve", "stcmc_charges_row", "stcmc_last_error_message", "StcmcProvider", "STCMC_STATUS_NUMERICAL_FAILURE"] {
        assert!(header.contains(name), "{name} missing from header");
    }
}
