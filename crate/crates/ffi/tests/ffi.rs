//! Exercises the C entry points the way a foreign caller would: raw
//! pointers, status codes, and explicit frees.

use std::ffi::CStr;
use std::ptr;

use ranklift_ffi::*;

fn gen_params(seed: u64) -> RankliftGenParams {
    RankliftGenParams {
        n: 10,
        m: 120,
        r: 1,
        kind: RankliftKind::GaussianFactor,
        outlier_fraction: 0.0,
        outlier_model: RankliftOutlierModel::AdditiveGaussian,
        outlier_a: 1.0,
        outlier_b: 0.0,
        noise_half_width: 0.0,
        replace_outliers: false,
        seed,
    }
}

#[test]
fn version_is_a_c_string() {
    let version = unsafe { CStr::from_ptr(ranklift_version()) };
    assert!(!version.to_str().unwrap().is_empty());
}

#[test]
fn generate_solve_and_read_back() {
    unsafe {
        let mut inst: *mut RankliftInstance = ptr::null_mut();
        assert_eq!(
            ranklift_instance_generate(gen_params(7), &mut inst),
            RankliftStatus::Ok
        );
        assert!(!inst.is_null());

        let (mut n, mut m, mut r) = (0u64, 0u64, 0u64);
        assert_eq!(
            ranklift_instance_dims(inst, &mut n, &mut m, &mut r),
            RankliftStatus::Ok
        );
        assert_eq!((n, m, r), (10, 120, 1));

        let mut result: *mut RankliftResult = ptr::null_mut();
        assert_eq!(
            ranklift_solve(inst, RankliftSolver::Nonconvex, 0, 20_000, &mut result),
            RankliftStatus::Ok
        );
        let mut rel = f64::NAN;
        assert_eq!(
            ranklift_result_rel_error(result, &mut rel),
            RankliftStatus::Ok
        );
        assert!(rel < 1e-4, "clean oversampled recovery, got {rel}");
        let mut diverged = true;
        assert_eq!(
            ranklift_result_diverged(result, &mut diverged),
            RankliftStatus::Ok
        );
        assert!(!diverged);

        let mut json: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(ranklift_result_to_json(result, &mut json), RankliftStatus::Ok);
        let text = CStr::from_ptr(json).to_str().unwrap().to_string();
        assert!(text.contains("\"solver\""));
        ranklift_string_free(json);

        ranklift_result_free(result);
        ranklift_instance_free(inst);
    }
}

#[test]
fn instance_json_round_trips_through_the_abi() {
    unsafe {
        let mut inst: *mut RankliftInstance = ptr::null_mut();
        assert_eq!(
            ranklift_instance_generate(gen_params(11), &mut inst),
            RankliftStatus::Ok
        );
        let mut json: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            ranklift_instance_to_json(inst, &mut json),
            RankliftStatus::Ok
        );

        let mut inst2: *mut RankliftInstance = ptr::null_mut();
        assert_eq!(
            ranklift_instance_from_json(json, &mut inst2),
            RankliftStatus::Ok
        );
        let mut json2: *mut std::ffi::c_char = ptr::null_mut();
        assert_eq!(
            ranklift_instance_to_json(inst2, &mut json2),
            RankliftStatus::Ok
        );
        assert_eq!(CStr::from_ptr(json), CStr::from_ptr(json2));

        ranklift_string_free(json);
        ranklift_string_free(json2);
        ranklift_instance_free(inst);
        ranklift_instance_free(inst2);
    }
}

#[test]
fn null_arguments_are_rejected() {
    unsafe {
        assert_eq!(
            ranklift_instance_generate(gen_params(1), ptr::null_mut()),
            RankliftStatus::NullArgument
        );
        assert_eq!(
            ranklift_instance_from_json(ptr::null(), ptr::null_mut()),
            RankliftStatus::NullArgument
        );
        let mut rel = 0.0;
        assert_eq!(
            ranklift_result_rel_error(ptr::null(), &mut rel),
            RankliftStatus::NullArgument
        );
        // Frees accept NULL.
        ranklift_instance_free(ptr::null_mut());
        ranklift_result_free(ptr::null_mut());
        ranklift_string_free(ptr::null_mut());
    }
}

#[test]
fn invalid_parameters_are_reported() {
    unsafe {
        let mut inst: *mut RankliftInstance = ptr::null_mut();
        let mut params = gen_params(1);
        params.r = 50; // rank beyond the dimension
        assert_eq!(
            ranklift_instance_generate(params, &mut inst),
            RankliftStatus::InvalidArgument
        );

        // Toeplitz solver needs a complex instance.
        assert_eq!(
            ranklift_instance_generate(gen_params(2), &mut inst),
            RankliftStatus::Ok
        );
        let mut result: *mut RankliftResult = ptr::null_mut();
        assert_eq!(
            ranklift_solve(inst, RankliftSolver::Toeplitz, 0, 100, &mut result),
            RankliftStatus::InvalidArgument
        );
        ranklift_instance_free(inst);
    }
}

#[test]
fn malformed_json_is_a_json_error() {
    unsafe {
        let mut inst: *mut RankliftInstance = ptr::null_mut();
        let bad = b"{not json}\0";
        assert_eq!(
            ranklift_instance_from_json(bad.as_ptr() as *const _, &mut inst),
            RankliftStatus::JsonError
        );
    }
}

#[test]
fn complex_toeplitz_instances_work_through_the_abi() {
    unsafe {
        let mut params = gen_params(5);
        params.n = 8;
        params.m = 32;
        params.r = 2;
        params.kind = RankliftKind::ToeplitzVandermonde;
        let mut inst: *mut RankliftInstance = ptr::null_mut();
        assert_eq!(
            ranklift_instance_generate(params, &mut inst),
            RankliftStatus::Ok
        );
        let mut result: *mut RankliftResult = ptr::null_mut();
        assert_eq!(
            ranklift_solve(
                inst,
                RankliftSolver::Toeplitz,
                0,
                200,
                &mut result
            ),
            RankliftStatus::Ok
        );
        let mut rel = f64::NAN;
        assert_eq!(
            ranklift_result_rel_error(result, &mut rel),
            RankliftStatus::Ok
        );
        assert!(rel.is_finite());
        ranklift_result_free(result);
        ranklift_instance_free(inst);
    }
}
