//! Exercises the C ABI exactly as a foreign caller would: through the
//! exported symbols, out-pointers, and status codes.

use needle_lab_ffi::*;
use std::f64::consts::FRAC_2_PI;
use std::ffi::CStr;

struct Ctx(*mut NlContext);

impl Ctx {
    fn new() -> Self {
        let ctx = nl_context_new();
        assert!(!ctx.is_null());
        Ctx(ctx)
    }
}

impl Drop for Ctx {
    fn drop(&mut self) {
        unsafe { nl_context_free(self.0) };
    }
}

fn prob(ctx: &Ctx, variant: NlVariant, l: f64, sigma: f64, a: f64, b: f64) -> NlProbability {
    let mut out = NlProbability { p: f64::NAN, regime: NlRegime::Short };
    let status = unsafe { nl_prob(ctx.0, variant, l, sigma, a, b, &mut out) };
    assert_eq!(status, NlStatus::Ok);
    out
}

#[test]
fn closed_forms_match_through_the_abi() {
    let ctx = Ctx::new();
    let r = prob(&ctx, NlVariant::Needle2d, 6.0, 0.0, 4.0, 3.0);
    assert_eq!(r.p, 1.0);
    assert_eq!(r.regime, NlRegime::Long);

    let r = prob(&ctx, NlVariant::Needle3d, 3.0, 0.0, 6.0_f64.sqrt(), 6.0_f64.sqrt());
    assert!((r.p - 0.733559).abs() <= 1e-4);

    let r = prob(&ctx, NlVariant::Spherocylinder2d, 0.0, 0.5, 4.0, 3.0);
    assert!((r.p - (0.5 / 4.0 + 0.5 / 3.0 - 0.25 / 12.0)).abs() < 1e-14);
}

#[test]
fn single_family_limit_through_the_abi() {
    let ctx = Ctx::new();
    let mut out = NlProbability { p: f64::NAN, regime: NlRegime::Short };
    let status =
        unsafe { nl_prob_single_family(ctx.0, NlVariant::Needle2d, 3.0, 0.0, 3.0, &mut out) };
    assert_eq!(status, NlStatus::Ok);
    assert!((out.p - FRAC_2_PI).abs() < 1e-15);
}

#[test]
fn status_codes_cover_the_error_paths() {
    let ctx = Ctx::new();
    let mut out = NlProbability { p: f64::NAN, regime: NlRegime::Short };
    let status = unsafe { nl_prob(ctx.0, NlVariant::Needle2d, -1.0, 0.0, 4.0, 3.0, &mut out) };
    assert_eq!(status, NlStatus::NegativeLength);
    let status = unsafe { nl_prob(ctx.0, NlVariant::Needle2d, 1.0, 0.0, 0.0, 3.0, &mut out) };
    assert_eq!(status, NlStatus::NonPositiveDimension);
    let status =
        unsafe { nl_prob(ctx.0, NlVariant::Spherocylinder2d, 1.0, -0.5, 4.0, 3.0, &mut out) };
    assert_eq!(status, NlStatus::NonPositiveDimension);
    let status = unsafe {
        nl_prob(std::ptr::null(), NlVariant::Needle2d, 1.0, 0.0, 4.0, 3.0, &mut out)
    };
    assert_eq!(status, NlStatus::NullPointer);
    let status =
        unsafe { nl_prob(ctx.0, NlVariant::Needle2d, 1.0, 0.0, 4.0, 3.0, std::ptr::null_mut()) };
    assert_eq!(status, NlStatus::NullPointer);

    for status in [NlStatus::Ok, NlStatus::NegativeLength, NlStatus::NoConvergence] {
        let message = unsafe { CStr::from_ptr(nl_status_message(status)) };
        assert!(!message.to_str().unwrap().is_empty());
    }
}

#[test]
fn bad_settings_yield_null_context() {
    let ctx = nl_context_with_settings(0, 1e-9, 30, 0);
    assert!(ctx.is_null());
    let ctx = nl_context_with_settings(10_000, -1.0, 30, 0);
    assert!(ctx.is_null());
    let ctx = nl_context_with_settings(100, 1e-7, 30, 2);
    assert!(!ctx.is_null());
    unsafe { nl_context_free(ctx) };
}

#[test]
fn simulation_is_deterministic_through_the_abi() {
    let ctx = Ctx::new();
    let run = || {
        let mut out =
            NlSimResult { n_all: 0, n_coll: 0, p_hat: f64::NAN, std_err: f64::NAN, seed: 0 };
        let status = unsafe {
            nl_simulate(ctx.0, NlVariant::Spherocylinder3d, 3.0, 0.5, 4.0, 3.0, 100_000, 9, &mut out)
        };
        assert_eq!(status, NlStatus::Ok);
        out
    };
    let first = run();
    let second = run();
    assert_eq!(first.n_coll, second.n_coll);
    assert_eq!(first.n_all, 100_000);
    assert_eq!(first.seed, 9);
    assert!((first.p_hat - first.n_coll as f64 / 100_000.0).abs() == 0.0);

    // single-family estimate agrees with the matching closed form (a lone
    // line family never forces certainty for a finite needle)
    let mut sim = NlSimResult { n_all: 0, n_coll: 0, p_hat: f64::NAN, std_err: f64::NAN, seed: 0 };
    let status = unsafe {
        nl_simulate_single_family(ctx.0, NlVariant::Needle2d, 6.0, 0.0, 3.0, 200_000, 1, &mut sim)
    };
    assert_eq!(status, NlStatus::Ok);
    let mut exact = NlProbability { p: f64::NAN, regime: NlRegime::Short };
    let status =
        unsafe { nl_prob_single_family(ctx.0, NlVariant::Needle2d, 6.0, 0.0, 3.0, &mut exact) };
    assert_eq!(status, NlStatus::Ok);
    assert!(exact.p < 1.0);
    assert!((sim.p_hat - exact.p).abs() <= 4.0 * sim.std_err);
}

#[test]
fn header_is_generated_with_the_expected_surface() {
    let header = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include/needle_lab.h");
    let text = std::fs::read_to_string(&header).expect("header generated at build time");
    for symbol in [
        "NEEDLE_LAB_H",
        "typedef struct NlContext NlContext;",
        "nl_context_new",
        "nl_context_free",
        "nl_prob",
        "nl_prob_single_family",
        "nl_simulate",
        "nl_simulate_single_family",
        "nl_status_message",
        "NL_STATUS_OK",
        "NL_VARIANT_NEEDLE2D",
    ] {
        assert!(text.contains(symbol), "header missing {symbol}");
    }
}
