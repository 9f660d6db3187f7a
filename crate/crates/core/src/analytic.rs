//! Closed-form intersection probabilities for the four problem variants
//! (needle / spherocylinder, in-plane / tilted) plus their single-family
//! limits, a per-threshold branch consistency checker, and the corrected
//! comparison against the earlier square-grid result from the literature.
//!
//! Every variant has four branches keyed by [`RegimeKind`]. Spherocylinder
//! branches are the needle branches with spans shrunk by the cap diameter
//! plus the constant cap contribution `sigma/a + sigma/b - sigma^2/(ab)`.
//! Tilted (3D) branches integrate the projected length over the tilt angle,
//! which brings in [`integral_f`] / [`integral_g`].

use crate::geometry::{
    classify_regime, Embedding, Error, GridCell, Probability, RegimeKind, Result, Shape, Variant,
};
use crate::quadrature::{integral_f, integral_g, QuadratureSettings};
use std::f64::consts::{FRAC_PI_2, PI};

/// `asin` with the argument clamped into [-1, 1] to absorb rounding when a
/// ratio like `b / l` sits exactly on a regime threshold.
fn asin_clamped(x: f64) -> f64 {
    debug_assert!(x.abs() <= 1.0 + 1e-12, "asin argument {x} beyond rounding noise");
    x.clamp(-1.0, 1.0).asin()
}

/// `sqrt(1 - x^2)` with the same clamping as [`asin_clamped`].
fn cos_from_sin(x: f64) -> f64 {
    (1.0 - x * x).max(0.0).sqrt()
}

// ---------------------------------------------------------------------------
// In-plane needle
// ---------------------------------------------------------------------------

pub(crate) fn needle_2d_branch(kind: RegimeKind, l: f64, a: f64, b: f64) -> f64 {
    match kind {
        RegimeKind::Short => (2.0 / PI) * (l / a + l / b) - l * l / (PI * a * b),
        RegimeKind::MidB => {
            let r = b / l;
            b / (PI * a)
                + (2.0 / PI) * (l / b) * (1.0 - cos_from_sin(r))
                + (2.0 / PI) * (FRAC_PI_2 - asin_clamped(r))
        }
        RegimeKind::MidA => {
            let big_l = a.hypot(b);
            let ra = a / l;
            let rb = b / l;
            (big_l * big_l + l * l) / (PI * a * b)
                - (2.0 / PI) * ((l / a) * cos_from_sin(ra) + (l / b) * cos_from_sin(rb))
                + (2.0 / PI) * (PI - asin_clamped(ra) - asin_clamped(rb))
        }
        RegimeKind::Long => 1.0,
    }
}

/// Intersection probability of an in-plane needle of length `l` on a
/// canonical grid cell.
pub fn prob_2d_needle(l: f64, grid: &GridCell) -> Result<Probability> {
    let shape = Shape::needle(l)?;
    let regime = classify_regime(&shape, grid)?;
    let p = needle_2d_branch(regime.kind, l, grid.a(), grid.b());
    Ok(Probability::new(p, regime.kind))
}

// ---------------------------------------------------------------------------
// In-plane spherocylinder
// ---------------------------------------------------------------------------

/// Constant contribution of the caps: the probability that a disk of
/// diameter `sigma` alone touches a line.
fn cap_term(sigma: f64, a: f64, b: f64) -> f64 {
    sigma / a + sigma / b - sigma * sigma / (a * b)
}

pub(crate) fn sc_2d_branch(kind: RegimeKind, l: f64, sigma: f64, a: f64, b: f64) -> f64 {
    let u = a - sigma;
    let v = b - sigma;
    let caps = cap_term(sigma, a, b);
    match kind {
        RegimeKind::Short => {
            (2.0 / PI) * (v / b) * (l / a) + (2.0 / PI) * (u / a) * (l / b)
                - l * l / (PI * a * b)
                + caps
        }
        RegimeKind::MidB => {
            let rv = v / l;
            v * v / (PI * a * b)
                + (2.0 / PI) * (u / a) * (l / b) * (1.0 - cos_from_sin(rv))
                + (2.0 / PI) * (u / a) * (v / b) * (FRAC_PI_2 - asin_clamped(rv))
                + caps
        }
        RegimeKind::MidA => {
            let lhat = u.hypot(v);
            let ru = u / l;
            let rv = v / l;
            (lhat * lhat + l * l) / (PI * a * b)
                - (2.0 / PI)
                    * ((v / b) * (l / a) * cos_from_sin(ru) + (u / a) * (l / b) * cos_from_sin(rv))
                + (2.0 / PI) * (u / a) * (v / b) * (PI - asin_clamped(ru) - asin_clamped(rv))
                + caps
        }
        RegimeKind::Long => 1.0,
    }
}

/// Intersection probability of an in-plane spherocylinder (`sigma > 0`).
///
/// A cap diameter at or above the cell height makes every pose intersect,
/// so that case short-circuits to 1 without touching the regime algebra.
pub fn prob_2d_sc(l: f64, sigma: f64, grid: &GridCell) -> Result<Probability> {
    let shape = Shape::spherocylinder(l, sigma)?;
    let Shape::Spherocylinder { .. } = shape else {
        return prob_2d_needle(l, grid); // sigma == 0 degenerates to a needle
    };
    if sigma >= grid.b() {
        return Ok(Probability::new(1.0, RegimeKind::Long));
    }
    let regime = classify_regime(&shape, grid)?;
    let p = sc_2d_branch(regime.kind, l, sigma, grid.a(), grid.b());
    Ok(Probability::new(p, regime.kind))
}

// ---------------------------------------------------------------------------
// Tilted needle
// ---------------------------------------------------------------------------

/// The recurring tilt-averaged span bracket:
/// `(4/pi^2) (l/span) [1 - F(asin(t), hi, t)] + (4/pi^2) g_scale G(...)`
/// where `t = span_limit / l`.
struct TiltBracket {
    lead: f64,
    f_lo: f64,
    f_hi: f64,
    t: f64,
    g_scale: f64,
}

impl TiltBracket {
    fn eval(&self, settings: &QuadratureSettings) -> Result<f64> {
        let f = integral_f(self.f_lo, self.f_hi, self.t, settings)?;
        let g = integral_g(self.f_lo, self.f_hi, self.t, settings)?;
        Ok(self.lead * (1.0 - f) + self.g_scale * g)
    }
}

/// The recurring fully-out correction bracket for a span limit `m` (either
/// `a`-like or `b`-like, possibly sigma-shrunk):
/// `(1/pi^2)(l^2/ab) asin(m/l) + (3/pi^2) w sqrt(1 - (m/l)^2)
///  - (2/pi^2) c (pi/2 - asin(m/l))`.
fn out_bracket(l: f64, m: f64, w: f64, c: f64, ab: f64) -> f64 {
    let r = m / l;
    let pp = PI * PI;
    (l * l / (ab * pp)) * asin_clamped(r) + (3.0 / pp) * w * cos_from_sin(r)
        - (2.0 / pp) * c * (FRAC_PI_2 - asin_clamped(r))
}

pub(crate) fn needle_3d_branch(
    kind: RegimeKind,
    l: f64,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let pp = PI * PI;
    let ab = a * b;
    match kind {
        RegimeKind::Short => Ok((4.0 / pp) * (l / a + l / b) - l * l / (2.0 * PI * ab)),
        RegimeKind::MidB => {
            let tb = TiltBracket {
                lead: (4.0 / pp) * (l / b),
                f_lo: asin_clamped(b / l),
                f_hi: FRAC_PI_2,
                t: b / l,
                g_scale: 4.0 / pp,
            }
            .eval(settings)?;
            let db = out_bracket(l, b, l / a, b / a, ab);
            Ok((4.0 / pp) * (l / a) + tb - db)
        }
        RegimeKind::MidA => {
            let ta = TiltBracket {
                lead: (4.0 / pp) * (l / a),
                f_lo: asin_clamped(a / l),
                f_hi: FRAC_PI_2,
                t: a / l,
                g_scale: 4.0 / pp,
            }
            .eval(settings)?;
            let tb = TiltBracket {
                lead: (4.0 / pp) * (l / b),
                f_lo: asin_clamped(b / l),
                f_hi: FRAC_PI_2,
                t: b / l,
                g_scale: 4.0 / pp,
            }
            .eval(settings)?;
            let da = out_bracket(l, a, l / b, a / b, ab);
            let db = out_bracket(l, b, l / a, b / a, ab);
            Ok(ta + tb - da - db + l * l / (2.0 * PI * ab))
        }
        RegimeKind::Long => {
            let big_l = a.hypot(b);
            let hi = asin_clamped(big_l / l);
            let ta = TiltBracket {
                lead: (4.0 / pp) * (l / a),
                f_lo: asin_clamped(a / l),
                f_hi: hi,
                t: a / l,
                g_scale: 4.0 / pp,
            }
            .eval(settings)?;
            let tb = TiltBracket {
                lead: (4.0 / pp) * (l / b),
                f_lo: asin_clamped(b / l),
                f_hi: hi,
                t: b / l,
                g_scale: 4.0 / pp,
            }
            .eval(settings)?;
            let da = out_bracket(l, a, l / b, a / b, ab);
            let db = out_bracket(l, b, l / a, b / a, ab);
            let rl = big_l / l;
            let diag = (l * l / (ab * pp)) * asin_clamped(rl)
                - (l * big_l / (ab * pp)) * cos_from_sin(rl)
                - (2.0 / pp) * (big_l * big_l / ab) * (FRAC_PI_2 - asin_clamped(rl));
            Ok(ta + tb - da - db + diag + (2.0 / PI) * (FRAC_PI_2 - asin_clamped(rl)))
        }
    }
}

/// Intersection probability of a tilted needle; strictly below 1 for every
/// finite length.
pub fn prob_3d_needle(l: f64, grid: &GridCell, settings: &QuadratureSettings) -> Result<Probability> {
    let shape = Shape::needle(l)?;
    let regime = classify_regime(&shape, grid)?;
    let p = needle_3d_branch(regime.kind, l, grid.a(), grid.b(), settings)?;
    Ok(Probability::new(p, regime.kind))
}

// ---------------------------------------------------------------------------
// Tilted spherocylinder
// ---------------------------------------------------------------------------

pub(crate) fn sc_3d_branch(
    kind: RegimeKind,
    l: f64,
    sigma: f64,
    a: f64,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let pp = PI * PI;
    let ab = a * b;
    let u = a - sigma;
    let v = b - sigma;
    let caps = cap_term(sigma, a, b);
    match kind {
        RegimeKind::Short => Ok((4.0 / pp) * (v / b) * (l / a) + (4.0 / pp) * (u / a) * (l / b)
            - l * l / (2.0 * PI * ab)
            + caps),
        RegimeKind::MidB => {
            let tb = TiltBracket {
                lead: (4.0 / pp) * (u / a) * (l / b),
                f_lo: asin_clamped(v / l),
                f_hi: FRAC_PI_2,
                t: v / l,
                g_scale: (4.0 / pp) * (u / a) * (v / b),
            }
            .eval(settings)?;
            let dv = out_bracket(l, v, (v / b) * (l / a), v * v / ab, ab);
            Ok((4.0 / pp) * (v / b) * (l / a) + tb - dv + caps)
        }
        RegimeKind::MidA => {
            let tu = TiltBracket {
                lead: (4.0 / pp) * (v / b) * (l / a),
                f_lo: asin_clamped(u / l),
                f_hi: FRAC_PI_2,
                t: u / l,
                g_scale: (4.0 / pp) * (u / a) * (v / b),
            }
            .eval(settings)?;
            let tv = TiltBracket {
                lead: (4.0 / pp) * (u / a) * (l / b),
                f_lo: asin_clamped(v / l),
                f_hi: FRAC_PI_2,
                t: v / l,
                g_scale: (4.0 / pp) * (u / a) * (v / b),
            }
            .eval(settings)?;
            let du = out_bracket(l, u, (u / a) * (l / b), u * u / ab, ab);
            let dv = out_bracket(l, v, (v / b) * (l / a), v * v / ab, ab);
            Ok(tu + tv - du - dv + l * l / (2.0 * PI * ab) + caps)
        }
        RegimeKind::Long => {
            let lhat = u.hypot(v);
            let hi = asin_clamped(lhat / l);
            let tu = TiltBracket {
                lead: (4.0 / pp) * (v / b) * (l / a),
                f_lo: asin_clamped(u / l),
                f_hi: hi,
                t: u / l,
                g_scale: (4.0 / pp) * (u / a) * (v / b),
            }
            .eval(settings)?;
            let tv = TiltBracket {
                lead: (4.0 / pp) * (u / a) * (l / b),
                f_lo: asin_clamped(v / l),
                f_hi: hi,
                t: v / l,
                g_scale: (4.0 / pp) * (u / a) * (v / b),
            }
            .eval(settings)?;
            let du = out_bracket(l, u, (u / a) * (l / b), u * u / ab, ab);
            let dv = out_bracket(l, v, (v / b) * (l / a), v * v / ab, ab);
            let rl = lhat / l;
            let diag = (l * l / (ab * pp)) * asin_clamped(rl)
                - (l * lhat / (ab * pp)) * cos_from_sin(rl)
                - (2.0 / pp) * (lhat * lhat / ab) * (FRAC_PI_2 - asin_clamped(rl));
            Ok(tu + tv - du - dv
                + diag
                + (2.0 / PI) * (u / a) * (v / b) * (FRAC_PI_2 - asin_clamped(rl))
                + caps)
        }
    }
}

/// Intersection probability of a tilted spherocylinder (`sigma > 0`);
/// equals 1 only when the caps alone span the cell height.
pub fn prob_3d_sc(
    l: f64,
    sigma: f64,
    grid: &GridCell,
    settings: &QuadratureSettings,
) -> Result<Probability> {
    let shape = Shape::spherocylinder(l, sigma)?;
    let Shape::Spherocylinder { .. } = shape else {
        return prob_3d_needle(l, grid, settings);
    };
    if sigma >= grid.b() {
        return Ok(Probability::new(1.0, RegimeKind::Long));
    }
    let regime = classify_regime(&shape, grid)?;
    let p = sc_3d_branch(regime.kind, l, sigma, grid.a(), grid.b(), settings)?;
    Ok(Probability::new(p, regime.kind))
}

// ---------------------------------------------------------------------------
// Single-family (a -> infinity) limits
// ---------------------------------------------------------------------------

fn bnp_2d_needle(l: f64, b: f64) -> f64 {
    if l <= b {
        (2.0 / PI) * (l / b)
    } else {
        let r = b / l;
        (2.0 / PI) * (l / b) * (1.0 - cos_from_sin(r)) + (2.0 / PI) * (FRAC_PI_2 - asin_clamped(r))
    }
}

fn bnp_2d_sc(l: f64, sigma: f64, b: f64) -> f64 {
    let v = b - sigma;
    if l <= v {
        (2.0 / PI) * (l / b) + sigma / b
    } else {
        let r = v / l;
        (2.0 / PI) * (l / b) * (1.0 - cos_from_sin(r))
            + (2.0 / PI) * (v / b) * (FRAC_PI_2 - asin_clamped(r))
            + sigma / b
    }
}

fn bnp_3d_needle(l: f64, b: f64, settings: &QuadratureSettings) -> Result<f64> {
    let pp = PI * PI;
    if l <= b {
        return Ok((4.0 / pp) * (l / b));
    }
    TiltBracket {
        lead: (4.0 / pp) * (l / b),
        f_lo: asin_clamped(b / l),
        f_hi: FRAC_PI_2,
        t: b / l,
        g_scale: 4.0 / pp,
    }
    .eval(settings)
}

fn bnp_3d_sc(l: f64, sigma: f64, b: f64, settings: &QuadratureSettings) -> Result<f64> {
    let pp = PI * PI;
    let v = b - sigma;
    if l <= v {
        return Ok((4.0 / pp) * (l / b) + sigma / b);
    }
    let bracket = TiltBracket {
        lead: (4.0 / pp) * (l / b),
        f_lo: asin_clamped(v / l),
        f_hi: FRAC_PI_2,
        t: v / l,
        g_scale: (4.0 / pp) * (v / b),
    }
    .eval(settings)?;
    Ok(bracket + sigma / b)
}

/// Intersection probability against a single family of parallel lines with
/// spacing `b`: the limit of the grid problem as the other spacing grows
/// without bound.
pub fn prob_bnp(
    shape: &Shape,
    embedding: Embedding,
    b: f64,
    settings: &QuadratureSettings,
) -> Result<Probability> {
    if !b.is_finite() || b <= 0.0 {
        return Err(Error::NonPositiveDimension { what: "line spacing b", value: b });
    }
    let shape = match *shape {
        Shape::Needle { length } => Shape::needle(length)?,
        Shape::Spherocylinder { length, diameter } => Shape::spherocylinder(length, diameter)?,
    };
    let l = shape.length();
    let sigma = shape.diameter();
    if sigma >= b {
        return Ok(Probability::new(1.0, RegimeKind::Long));
    }
    // Only the height threshold survives; beyond it the relevant branch is
    // the one between the height and the (infinite) width.
    let kind = if l <= b - sigma { RegimeKind::Short } else { RegimeKind::MidB };
    let p = match (embedding, &shape) {
        (Embedding::TwoD, Shape::Needle { .. }) => bnp_2d_needle(l, b),
        (Embedding::TwoD, Shape::Spherocylinder { .. }) => bnp_2d_sc(l, sigma, b),
        (Embedding::ThreeD, Shape::Needle { .. }) => bnp_3d_needle(l, b, settings)?,
        (Embedding::ThreeD, Shape::Spherocylinder { .. }) => bnp_3d_sc(l, sigma, b, settings)?,
    };
    Ok(Probability::new(p, kind))
}

// ---------------------------------------------------------------------------
// Branch consistency at the regime thresholds
// ---------------------------------------------------------------------------

/// One threshold check: the two adjacent branches evaluated at the same
/// boundary length.
#[derive(Debug, Clone)]
pub struct ThresholdCheck {
    pub name: &'static str,
    pub length: f64,
    pub below: f64,
    pub above: f64,
    pub difference: f64,
    pub tolerance: f64,
}

impl ThresholdCheck {
    pub fn passes(&self) -> bool {
        self.difference <= self.tolerance
    }
}

/// Branch agreement report for one (variant, grid, sigma) triple.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub variant: Variant,
    pub checks: Vec<ThresholdCheck>,
}

impl ConsistencyReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(ThresholdCheck::passes)
    }
}

/// Evaluates both branches meeting at each regime threshold and reports
/// their differences.
///
/// The adjacent closed forms agree identically at the thresholds, so any
/// difference beyond float noise (2D, tolerance 1e-12) or quadrature noise
/// (3D, tolerance 1e-6) indicates a transcription bug.
pub fn check_boundary_consistency(
    variant: Variant,
    grid: &GridCell,
    sigma: Option<f64>,
    settings: &QuadratureSettings,
) -> Result<ConsistencyReport> {
    let sigma = if variant.is_spherocylinder() {
        let s = sigma.ok_or_else(|| Error::Domain {
            what: format!("variant {variant} needs a cap diameter"),
        })?;
        if !s.is_finite() || s <= 0.0 {
            return Err(Error::NonPositiveDimension { what: "cap diameter", value: s });
        }
        if s >= grid.b() {
            return Err(Error::SigmaExceedsCell { sigma: s, b: grid.b() });
        }
        s
    } else {
        0.0
    };
    let (a, b) = (grid.a(), grid.b());
    let thresholds = [
        ("height", b - sigma, RegimeKind::Short, RegimeKind::MidB),
        ("width", a - sigma, RegimeKind::MidB, RegimeKind::MidA),
        ("diagonal", grid.shrunken_diagonal(sigma), RegimeKind::MidA, RegimeKind::Long),
    ];
    let tolerance = match variant.embedding() {
        Embedding::TwoD => 1e-12,
        Embedding::ThreeD => 1e-6,
    };
    let eval = |kind: RegimeKind, l: f64| -> Result<f64> {
        match variant {
            Variant::Needle2D => Ok(needle_2d_branch(kind, l, a, b)),
            Variant::Spherocylinder2D => Ok(sc_2d_branch(kind, l, sigma, a, b)),
            Variant::Needle3D => needle_3d_branch(kind, l, a, b, settings),
            Variant::Spherocylinder3D => sc_3d_branch(kind, l, sigma, a, b, settings),
        }
    };
    let mut checks = Vec::with_capacity(3);
    for (name, length, below_kind, above_kind) in thresholds {
        let below = eval(below_kind, length)?;
        let above = eval(above_kind, length)?;
        checks.push(ThresholdCheck {
            name,
            length,
            below,
            above,
            difference: (below - above).abs(),
            tolerance,
        });
    }
    Ok(ConsistencyReport { variant, checks })
}

// ---------------------------------------------------------------------------
// Comparison with the earlier square-grid literature result
// ---------------------------------------------------------------------------

/// Our value, the previously published value, and their difference for a
/// needle on the unit square grid with `1 <= l <= sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorComparison {
    pub ours: f64,
    pub prior: f64,
    pub delta: f64,
}

/// Evaluates the unit-square needle probability in the diagonal regime both
/// as derived here and as previously published, which used coefficient
/// `1/pi` where `2/pi` is correct. The Monte Carlo estimator adjudicates
/// between the two; regression tests pin the corrected form.
///
/// Domain: `1 <= l <= sqrt(2)` (both endpoints evaluate cleanly).
pub fn prior_literature_delta(l: f64) -> Result<PriorComparison> {
    if !l.is_finite() || !(1.0..=std::f64::consts::SQRT_2 + 1e-12).contains(&l) {
        return Err(Error::Domain {
            what: format!("prior-literature comparison needs 1 <= l <= sqrt(2), got {l}"),
        });
    }
    let inv = (1.0 / l).min(1.0);
    let x = inv.asin() - inv.acos() + 2.0 * (l * l - 1.0).max(0.0).sqrt() - l * l / 2.0 - 1.0;
    let ours = 1.0 - (2.0 / PI) * x;
    let prior = 1.0 - (1.0 / PI) * x;
    Ok(PriorComparison { ours, prior, delta: prior - ours })
}
