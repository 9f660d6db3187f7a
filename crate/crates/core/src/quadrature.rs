//! Refined Simpson evaluation of the two tilt integrals that enter every
//! closed form for objects embedded in 3D.
//!
//! Both integrands run over the tilt angle `psi` of the object against the
//! grid normal, with a threshold parameter `t` in [0, 1]:
//!
//! - `integral_f`: integrand `sqrt(sin^2 psi - t^2)`, the excess of the
//!   projected length over the relevant cell span;
//! - `integral_g`: integrand `pi/2 - asin(t / sin psi)`, the in-plane
//!   orientation fraction that still clears that span.
//!
//! The refinement protocol: Simpson sums on `ceil((hi - lo) * n_unit * 2i)`
//! equally spaced intervals for `i = 1, 2, ...`, stopping once successive
//! sums differ by less than `epsilon`. The interval count grows linearly in
//! `i` (not geometrically) on purpose; see the settings docs.

use crate::geometry::{Error, Result};

/// Settings for the refined Simpson scheme.
///
/// `intervals_per_unit` is the base interval density per unit of integration
/// range, and `epsilon` the stopping tolerance on successive refinements.
/// `max_refinements` caps the refinement sequence, which otherwise has no
/// termination guarantee on pathological settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub intervals_per_unit: u32,
    pub epsilon: f64,
    pub max_refinements: u32,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        QuadratureSettings { intervals_per_unit: 10_000, epsilon: 1e-9, max_refinements: 30 }
    }
}

impl QuadratureSettings {
    pub fn validate(&self) -> Result<()> {
        if self.intervals_per_unit == 0 {
            return Err(Error::Domain { what: "intervals_per_unit must be >= 1".into() });
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::Domain {
                what: format!("epsilon must be positive, got {}", self.epsilon),
            });
        }
        if self.max_refinements == 0 {
            return Err(Error::Domain { what: "max_refinements must be >= 1".into() });
        }
        Ok(())
    }
}

/// Composite Simpson sum of `f` over `[lo, hi]` on `n` intervals
/// (`n` even, >= 2).
fn simpson_sum(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, n: u64) -> f64 {
    debug_assert!(n >= 2 && n.is_multiple_of(2));
    let h = (hi - lo) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for k in 1..n {
        let x = lo + h * k as f64;
        if k % 2 == 1 {
            odd += f(x);
        } else {
            even += f(x);
        }
    }
    (h / 3.0) * (f(lo) + f(hi) + 4.0 * odd + 2.0 * even)
}

/// Runs the refinement protocol on an arbitrary integrand.
///
/// Returns the first Simpson sum whose predecessor differs by less than
/// `epsilon`, or `NoConvergence` if the cap is hit first.
pub fn simpson_refine(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    settings.validate()?;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Domain { what: format!("non-finite bounds [{lo}, {hi}]") });
    }
    if hi < lo {
        return Err(Error::Domain { what: format!("inverted bounds [{lo}, {hi}]") });
    }
    if hi == lo {
        return Ok(0.0);
    }
    let base = (hi - lo) * settings.intervals_per_unit as f64;
    let intervals = |i: u32| -> u64 {
        let n = (base * 2.0 * i as f64).ceil() as u64;
        // Simpson needs an even interval count
        (n + n % 2).max(2)
    };
    let mut prev = simpson_sum(&f, lo, hi, intervals(1));
    let mut last_delta = f64::INFINITY;
    for i in 2..=settings.max_refinements {
        let next = simpson_sum(&f, lo, hi, intervals(i));
        last_delta = (next - prev).abs();
        if last_delta < settings.epsilon {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::NoConvergence { refinements: settings.max_refinements, last_delta })
}

/// Checks the common preconditions of the two tilt integrals and clamps the
/// threshold parameter against harmless rounding excursions.
fn check_tilt_bounds(lo: f64, hi: f64, t: f64) -> Result<f64> {
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::Domain { what: format!("invalid tilt range [{lo}, {hi}]") });
    }
    if lo < -1e-12 || hi > std::f64::consts::FRAC_PI_2 + 1e-12 {
        return Err(Error::Domain {
            what: format!("tilt range [{lo}, {hi}] outside [0, pi/2]"),
        });
    }
    if !t.is_finite() || !(-1e-12..=1.0 + 1e-12).contains(&t) {
        return Err(Error::Domain { what: format!("threshold parameter t = {t} outside [0, 1]") });
    }
    let t = t.clamp(0.0, 1.0);
    // The integrands are only real where sin(psi) >= t; the closed forms
    // always pass lo = asin(t), so anything worse than rounding noise means
    // a caller bug. An empty range integrates to zero regardless.
    if lo < hi && lo.sin() < t - 1e-12 {
        return Err(Error::Domain {
            what: format!("integrand not real at lower bound: sin({lo}) < t = {t}"),
        });
    }
    Ok(t)
}

/// `int_lo^hi sqrt(sin^2 psi - t^2) dpsi` under the refinement protocol.
///
/// At `psi = asin(t)` the radicand vanishes with infinite slope; tiny
/// negative radicands produced by rounding near that endpoint are clamped to
/// zero rather than rejected, because every closed-form branch evaluates the
/// integral from exactly that point.
pub fn integral_f(lo: f64, hi: f64, t: f64, settings: &QuadratureSettings) -> Result<f64> {
    let t = check_tilt_bounds(lo, hi, t)?;
    let t2 = t * t;
    simpson_refine(
        move |psi: f64| {
            let s = psi.sin();
            (s * s - t2).max(0.0).sqrt()
        },
        lo,
        hi,
        settings,
    )
}

/// `int_lo^hi (pi/2 - asin(t / sin psi)) dpsi` under the refinement protocol.
///
/// The ratio `t / sin psi` is clamped into [-1, 1] to absorb rounding at the
/// endpoint where `sin psi = t` (the integrand vanishes there).
pub fn integral_g(lo: f64, hi: f64, t: f64, settings: &QuadratureSettings) -> Result<f64> {
    let t = check_tilt_bounds(lo, hi, t)?;
    simpson_refine(
        move |psi: f64| {
            if t == 0.0 {
                return std::f64::consts::FRAC_PI_2;
            }
            let ratio = (t / psi.sin()).clamp(-1.0, 1.0);
            std::f64::consts::FRAC_PI_2 - ratio.asin()
        },
        lo,
        hi,
        settings,
    )
}
