//! C ABI over the intersection-probability library.
//!
//! The surface follows the usual opaque-handle pattern: create an
//! [`NlContext`] (it carries the quadrature settings and the worker count),
//! call evaluation functions that write results through out-pointers and
//! return an [`NlStatus`], free the context when done. The matching header
//! is generated into `include/needle_lab.h` at build time.

use needle_lab::analytic::{prob_2d_needle, prob_2d_sc, prob_3d_needle, prob_3d_sc, prob_bnp};
use needle_lab::montecarlo::{estimate, estimate_bnp, RngSpec, SimResult};
use needle_lab::{
    Error, GridCell, Probability, QuadratureSettings, RegimeKind, Shape, Variant,
};
use std::os::raw::c_char;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NlStatus {
    Ok = 0,
    /// A pointer argument was null.
    NullPointer = 1,
    /// A parameter was rejected (non-finite, out of domain, wrong variant).
    InvalidArgument = 2,
    /// A grid dimension or cap diameter was not positive.
    NonPositiveDimension = 3,
    /// A shape length was negative.
    NegativeLength = 4,
    /// Regime classification with the cap diameter at or above the cell
    /// height.
    SigmaExceedsCell = 5,
    /// The quadrature refinement cap was reached before convergence.
    NoConvergence = 6,
}

impl From<&Error> for NlStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::NonPositiveDimension { .. } => NlStatus::NonPositiveDimension,
            Error::NegativeLength { .. } => NlStatus::NegativeLength,
            Error::SigmaExceedsCell { .. } => NlStatus::SigmaExceedsCell,
            Error::NoConvergence { .. } => NlStatus::NoConvergence,
            Error::NonFinite { .. } | Error::Domain { .. } | Error::StructureNotFound { .. } => {
                NlStatus::InvalidArgument
            }
        }
    }
}

/// Problem variant selector.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NlVariant {
    Needle2d = 0,
    Spherocylinder2d = 1,
    Needle3d = 2,
    Spherocylinder3d = 3,
}

impl From<NlVariant> for Variant {
    fn from(v: NlVariant) -> Variant {
        match v {
            NlVariant::Needle2d => Variant::Needle2D,
            NlVariant::Spherocylinder2d => Variant::Spherocylinder2D,
            NlVariant::Needle3d => Variant::Needle3D,
            NlVariant::Spherocylinder3d => Variant::Spherocylinder3D,
        }
    }
}

/// Length regime of a result.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum NlRegime {
    Short = 0,
    MidB = 1,
    MidA = 2,
    Long = 3,
}

impl From<RegimeKind> for NlRegime {
    fn from(k: RegimeKind) -> Self {
        match k {
            RegimeKind::Short => NlRegime::Short,
            RegimeKind::MidB => NlRegime::MidB,
            RegimeKind::MidA => NlRegime::MidA,
            RegimeKind::Long => NlRegime::Long,
        }
    }
}

/// A probability and the regime that produced it.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NlProbability {
    pub p: f64,
    pub regime: NlRegime,
}

/// Monte Carlo tally.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct NlSimResult {
    pub n_all: u64,
    pub n_coll: u64,
    pub p_hat: f64,
    pub std_err: f64,
    pub seed: u64,
}

/// Opaque evaluation context: quadrature settings plus the worker count
/// used by the Monte Carlo estimator (0 = all cores).
pub struct NlContext {
    settings: QuadratureSettings,
    threads: usize,
}

/// Creates a context with default settings. Free with [`nl_context_free`].
#[no_mangle]
pub extern "C" fn nl_context_new() -> *mut NlContext {
    Box::into_raw(Box::new(NlContext { settings: QuadratureSettings::default(), threads: 0 }))
}

/// Creates a context with explicit quadrature settings and worker count.
/// Returns null if the settings are invalid.
#[no_mangle]
pub extern "C" fn nl_context_with_settings(
    intervals_per_unit: u32,
    epsilon: f64,
    max_refinements: u32,
    threads: u32,
) -> *mut NlContext {
    let settings = QuadratureSettings { intervals_per_unit, epsilon, max_refinements };
    if settings.validate().is_err() {
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(NlContext { settings, threads: threads as usize }))
}

/// Frees a context returned by one of the constructors. Null is a no-op.
///
/// # Safety
/// `ctx` must have been returned by [`nl_context_new`] or
/// [`nl_context_with_settings`] and not freed before.
#[no_mangle]
pub unsafe extern "C" fn nl_context_free(ctx: *mut NlContext) {
    if !ctx.is_null() {
        drop(unsafe { Box::from_raw(ctx) });
    }
}

fn shape_for(variant: NlVariant, l: f64, sigma: f64) -> Result<Shape, Error> {
    match Variant::from(variant) {
        v if v.is_spherocylinder() => Shape::spherocylinder(l, sigma),
        _ => Shape::needle(l),
    }
}

unsafe fn write_prob(out: *mut NlProbability, result: Result<Probability, Error>) -> NlStatus {
    match result {
        Ok(p) => {
            unsafe { *out = NlProbability { p: p.value(), regime: p.regime().into() } };
            NlStatus::Ok
        }
        Err(e) => NlStatus::from(&e),
    }
}

/// Closed-form intersection probability on an `a` by `b` grid cell.
/// `sigma` is the cap diameter and is ignored for needle variants.
///
/// # Safety
/// `ctx` must be a live context and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_prob(
    ctx: *const NlContext,
    variant: NlVariant,
    l: f64,
    sigma: f64,
    a: f64,
    b: f64,
    out: *mut NlProbability,
) -> NlStatus {
    if ctx.is_null() || out.is_null() {
        return NlStatus::NullPointer;
    }
    let ctx = unsafe { &*ctx };
    let result = GridCell::new(a, b).and_then(|grid| match Variant::from(variant) {
        Variant::Needle2D => prob_2d_needle(l, &grid),
        Variant::Spherocylinder2D => prob_2d_sc(l, sigma, &grid),
        Variant::Needle3D => prob_3d_needle(l, &grid, &ctx.settings),
        Variant::Spherocylinder3D => prob_3d_sc(l, sigma, &grid, &ctx.settings),
    });
    unsafe { write_prob(out, result) }
}

/// Closed-form intersection probability against a single family of
/// parallel lines with spacing `b` (the infinite-width limit).
///
/// # Safety
/// `ctx` must be a live context and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_prob_single_family(
    ctx: *const NlContext,
    variant: NlVariant,
    l: f64,
    sigma: f64,
    b: f64,
    out: *mut NlProbability,
) -> NlStatus {
    if ctx.is_null() || out.is_null() {
        return NlStatus::NullPointer;
    }
    let ctx = unsafe { &*ctx };
    let result = shape_for(variant, l, sigma).and_then(|shape| {
        prob_bnp(&shape, Variant::from(variant).embedding(), b, &ctx.settings)
    });
    unsafe { write_prob(out, result) }
}

unsafe fn write_sim(out: *mut NlSimResult, result: Result<SimResult, Error>) -> NlStatus {
    match result {
        Ok(sim) => {
            unsafe {
                *out = NlSimResult {
                    n_all: sim.n_all,
                    n_coll: sim.n_coll,
                    p_hat: sim.p_hat,
                    std_err: sim.std_err,
                    seed: sim.seed,
                }
            };
            NlStatus::Ok
        }
        Err(e) => NlStatus::from(&e),
    }
}

/// Monte Carlo estimate with `n` trials. Deterministic for a fixed seed,
/// independent of the context's worker count.
///
/// # Safety
/// `ctx` must be a live context and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_simulate(
    ctx: *const NlContext,
    variant: NlVariant,
    l: f64,
    sigma: f64,
    a: f64,
    b: f64,
    n: u64,
    seed: u64,
    out: *mut NlSimResult,
) -> NlStatus {
    if ctx.is_null() || out.is_null() {
        return NlStatus::NullPointer;
    }
    let ctx = unsafe { &*ctx };
    let result = GridCell::new(a, b).and_then(|grid| {
        let shape = shape_for(variant, l, sigma)?;
        estimate(
            &shape,
            Variant::from(variant).embedding(),
            &grid,
            n,
            RngSpec::new(seed),
            ctx.threads,
        )
    });
    unsafe { write_sim(out, result) }
}

/// Monte Carlo estimate against a single line family with spacing `b`.
///
/// # Safety
/// `ctx` must be a live context and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nl_simulate_single_family(
    ctx: *const NlContext,
    variant: NlVariant,
    l: f64,
    sigma: f64,
    b: f64,
    n: u64,
    seed: u64,
    out: *mut NlSimResult,
) -> NlStatus {
    if ctx.is_null() || out.is_null() {
        return NlStatus::NullPointer;
    }
    let ctx = unsafe { &*ctx };
    let result = shape_for(variant, l, sigma).and_then(|shape| {
        estimate_bnp(
            &shape,
            Variant::from(variant).embedding(),
            b,
            n,
            RngSpec::new(seed),
            ctx.threads,
        )
    });
    unsafe { write_sim(out, result) }
}

/// Static, nul-terminated description of a status code.
#[no_mangle]
pub extern "C" fn nl_status_message(status: NlStatus) -> *const c_char {
    let message: &'static [u8] = match status {
        NlStatus::Ok => b"ok\0",
        NlStatus::NullPointer => b"null pointer argument\0",
        NlStatus::InvalidArgument => b"invalid argument\0",
        NlStatus::NonPositiveDimension => b"dimension must be positive and finite\0",
        NlStatus::NegativeLength => b"length must be nonnegative\0",
        NlStatus::SigmaExceedsCell => b"cap diameter at or above the cell height\0",
        NlStatus::NoConvergence => b"quadrature did not converge\0",
    };
    message.as_ptr().cast()
}
