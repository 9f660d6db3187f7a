//! Parameter sweeps and landscape analysis: probability against length at
//! fixed grids, probability against the cell aspect ratio at fixed cell
//! area, location of landscape minima, and the control-parameter thresholds
//! where the minima structure changes.
//!
//! Everything here works in ratio space. The probabilities depend only on
//! `(l/a, l/b, sigma/a, sigma/b)`, so sweeps fix `b = 1` and move the other
//! parameters through the dimensionless controls `lambda = l^2 / (ab)`,
//! `sigma_l = sigma / l`, and `t = a / b`.

use crate::analytic::{
    needle_2d_branch, prob_2d_needle, prob_2d_sc, prob_3d_needle, prob_3d_sc, prob_bnp,
    sc_2d_branch,
};
use crate::geometry::{Error, GridCell, Probability, RegimeKind, Result, Shape, Variant};
use crate::quadrature::{simpson_refine, QuadratureSettings};
use std::f64::consts::FRAC_PI_2;

/// One sweep sample: the swept abscissa (`l/b` or `t`) and the probability
/// there, with its regime.
#[derive(Debug, Clone, Copy)]
pub struct SweepRow {
    pub abscissa: f64,
    pub p: Probability,
}

/// Evaluates one variant from ratio parameters. An infinite `aspect_ratio`
/// selects the single-line-family limit.
pub fn prob_for_ratios(
    variant: Variant,
    l_over_b: f64,
    sigma_over_b: f64,
    aspect_ratio: f64,
    settings: &QuadratureSettings,
) -> Result<Probability> {
    if aspect_ratio.is_nan() || aspect_ratio <= 0.0 {
        return Err(Error::Domain { what: format!("aspect ratio must be positive, got {aspect_ratio}") });
    }
    let (l, sigma) = (l_over_b, sigma_over_b); // b = 1
    if aspect_ratio.is_infinite() {
        let shape = if variant.is_spherocylinder() {
            Shape::spherocylinder(l, sigma)?
        } else {
            Shape::needle(l)?
        };
        return prob_bnp(&shape, variant.embedding(), 1.0, settings);
    }
    let grid = GridCell::new(aspect_ratio, 1.0)?;
    match variant {
        Variant::Needle2D => prob_2d_needle(l, &grid),
        Variant::Spherocylinder2D => prob_2d_sc(l, sigma, &grid),
        Variant::Needle3D => prob_3d_needle(l, &grid, settings),
        Variant::Spherocylinder3D => prob_3d_sc(l, sigma, &grid, settings),
    }
}

/// Probability versus `l/b` for one grid aspect ratio (possibly infinite).
pub fn sweep_length_curve(
    variant: Variant,
    aspect_ratio: f64,
    sigma_over_b: f64,
    l_over_b: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<SweepRow>> {
    l_over_b
        .iter()
        .map(|&l| {
            let p = prob_for_ratios(variant, l, sigma_over_b, aspect_ratio, settings)?;
            Ok(SweepRow { abscissa: l, p })
        })
        .collect()
}

/// [`sweep_length_curve`] over a list of aspect ratios.
pub fn sweep_length(
    variant: Variant,
    aspect_ratios: &[f64],
    sigma_over_b: f64,
    l_over_b: &[f64],
    settings: &QuadratureSettings,
) -> Result<Vec<(f64, Vec<SweepRow>)>> {
    aspect_ratios
        .iter()
        .map(|&r| Ok((r, sweep_length_curve(variant, r, sigma_over_b, l_over_b, settings)?)))
        .collect()
}

/// Aspect-ratio sweep at fixed cell area, parameterized by
/// `lambda = l^2/(ab)` and `sigma_l = sigma/l`.
///
/// Given `t = a/b`, the ratio parameters are
/// `(l/a, l/b, sigma/a, sigma/b) =
///  (sqrt(lambda/t), sqrt(lambda t), sigma_l sqrt(lambda/t), sigma_l sqrt(lambda t))`.
/// Sweep points where the implied `sigma` reaches the cell height simply
/// report certainty; they are not errors.
#[derive(Debug, Clone, Copy)]
pub struct AspectSweepSpec {
    pub variant: Variant,
    pub lambda: f64,
    pub sigma_over_l: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub t_steps: usize,
}

impl AspectSweepSpec {
    /// Spec with the default sweep window `t in [1, 8]` on 2000 points.
    pub fn new(variant: Variant, lambda: f64, sigma_over_l: f64) -> Self {
        AspectSweepSpec { variant, lambda, sigma_over_l, t_min: 1.0, t_max: 8.0, t_steps: 2000 }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.lambda.is_finite() || self.lambda <= 0.0 {
            return Err(Error::Domain { what: format!("lambda must be positive, got {}", self.lambda) });
        }
        if !self.sigma_over_l.is_finite() || self.sigma_over_l < 0.0 {
            return Err(Error::Domain {
                what: format!("sigma/l must be nonnegative, got {}", self.sigma_over_l),
            });
        }
        if !self.t_min.is_finite() || self.t_min < 1.0 {
            return Err(Error::Domain {
                what: format!("t_min must be >= 1 (canonical a >= b), got {}", self.t_min),
            });
        }
        if !self.t_max.is_finite() || self.t_max <= self.t_min {
            return Err(Error::Domain {
                what: format!("need t_min < t_max, got [{}, {}]", self.t_min, self.t_max),
            });
        }
        if self.t_steps < 2 {
            return Err(Error::Domain { what: "t_steps must be >= 2".into() });
        }
        Ok(())
    }

    /// Probability at one aspect ratio.
    pub fn eval_at(&self, t: f64, settings: &QuadratureSettings) -> Result<Probability> {
        let l_over_b = (self.lambda * t).sqrt();
        let sigma_over_b = self.sigma_over_l * l_over_b;
        prob_for_ratios(self.variant, l_over_b, sigma_over_b, t, settings)
    }
}

/// Probability versus `t = a/b` at fixed cell area.
pub fn sweep_aspect(spec: &AspectSweepSpec, settings: &QuadratureSettings) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let step = (spec.t_max - spec.t_min) / (spec.t_steps - 1) as f64;
    (0..spec.t_steps)
        .map(|i| {
            let t = spec.t_min + step * i as f64;
            Ok(SweepRow { abscissa: t, p: spec.eval_at(t, settings)? })
        })
        .collect()
}

/// One local minimum of the aspect-ratio landscape.
#[derive(Debug, Clone, Copy)]
pub struct Minimum {
    pub t: f64,
    pub p: f64,
}

/// All local minima found on the sweep window, in ascending `t`.
#[derive(Debug, Clone)]
pub struct MinimaReport {
    pub minima: Vec<Minimum>,
    /// Index into `minima` of the global minimum.
    pub global_min: usize,
}

impl MinimaReport {
    pub fn global(&self) -> Minimum {
        self.minima[self.global_min]
    }
}

/// Golden-section refinement of a bracketed minimum down to `tol` in `t`.
fn golden_section(
    f: &impl Fn(f64) -> Result<f64>,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    while hi - lo > tol {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let mid = 0.5 * (lo + hi);
    Ok((mid, f(mid)?))
}

/// Locates every local minimum of `P(t)` on the sweep window: a dense grid
/// scan brackets candidates (the probability is only piecewise smooth, so
/// bracketing beats derivative root-finding here), then golden-section
/// refinement narrows each bracket to `|dt| <= 1e-6`. Window endpoints with
/// a one-sided descent count as minima.
pub fn find_minima(spec: &AspectSweepSpec, settings: &QuadratureSettings) -> Result<MinimaReport> {
    spec.validate()?;
    let n = spec.t_steps;
    let step = (spec.t_max - spec.t_min) / (n - 1) as f64;
    let f = |t: f64| -> Result<f64> { Ok(spec.eval_at(t, settings)?.value()) };
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        values.push(f(spec.t_min + step * i as f64)?);
    }
    let mut minima: Vec<Minimum> = Vec::new();
    if values[0] < values[1] {
        minima.push(Minimum { t: spec.t_min, p: values[0] });
    }
    for i in 1..n - 1 {
        if values[i] < values[i - 1] && values[i] <= values[i + 1] {
            let lo = spec.t_min + step * (i - 1) as f64;
            let hi = spec.t_min + step * (i + 1) as f64;
            let (t, p) = golden_section(&f, lo, hi, 1e-6)?;
            if minima.last().is_none_or(|m| (t - m.t).abs() > 1e-4) {
                minima.push(Minimum { t, p });
            }
        }
    }
    if values[n - 1] < values[n - 2] {
        minima.push(Minimum { t: spec.t_max, p: values[n - 1] });
    }
    if minima.is_empty() {
        return Err(Error::StructureNotFound {
            what: format!("no local minimum on [{}, {}]", spec.t_min, spec.t_max),
        });
    }
    let global_min = minima
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| x.p.total_cmp(&y.p))
        .map(|(i, _)| i)
        .unwrap();
    Ok(MinimaReport { minima, global_min })
}

/// The three control-parameter thresholds where the in-plane needle
/// landscape changes structure.
#[derive(Debug, Clone, Copy)]
pub struct LambdaThresholds {
    /// A second local minimum at `t > 1` appears.
    pub lambda1: f64,
    /// The global minimum hands over from `t = 1` to the second minimum.
    pub lambda2: f64,
    /// The minimum at `t = 1` disappears.
    pub lambda3: f64,
    /// Bisection tolerance in lambda.
    pub tolerance: f64,
}

const LAMBDA_TOL: f64 = 1e-4;

/// Bisects `lambda` over the three structural predicates of the minima
/// scenario. Only the in-plane needle variant is supported; the landscape
/// structure of the other variants is not characterized by these
/// thresholds.
pub fn find_lambda_thresholds(
    variant: Variant,
    settings: &QuadratureSettings,
) -> Result<LambdaThresholds> {
    if variant != Variant::Needle2D {
        return Err(Error::Domain {
            what: format!("lambda thresholds are defined for 2d-needle only, got {variant}"),
        });
    }
    let report = |lambda: f64| -> Result<MinimaReport> {
        find_minima(&AspectSweepSpec::new(variant, lambda, 0.0), settings)
    };
    let at_window_start = |m: &Minimum| m.t <= 1.0 + 1e-3;

    let two_minima = |lambda: f64| -> Result<bool> { Ok(report(lambda)?.minima.len() >= 2) };
    let global_off_one = |lambda: f64| -> Result<bool> { Ok(!at_window_start(&report(lambda)?.global())) };
    let no_min_at_one = |lambda: f64| -> Result<bool> {
        Ok(!report(lambda)?.minima.iter().any(at_window_start))
    };

    let lambda1 = bisect_flip(&two_minima, 0.5, 0.82, "second local minimum")?;
    let lambda2 = bisect_flip(&global_off_one, lambda1, 0.9, "global-minimum handoff")?;
    let lambda3 = bisect_flip(&no_min_at_one, lambda2, 1.2, "loss of the minimum at t = 1")?;
    Ok(LambdaThresholds { lambda1, lambda2, lambda3, tolerance: LAMBDA_TOL })
}

/// Bisects for the smallest `lambda` where `pred` turns true; the predicate
/// must be false at `lo` and true at `hi`.
fn bisect_flip(
    pred: &impl Fn(f64) -> Result<bool>,
    mut lo: f64,
    mut hi: f64,
    what: &str,
) -> Result<f64> {
    if pred(lo)? || !pred(hi)? {
        return Err(Error::StructureNotFound {
            what: format!("{what} does not flip on [{lo}, {hi}]"),
        });
    }
    while hi - lo > LAMBDA_TOL {
        let mid = 0.5 * (lo + hi);
        if pred(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// In-plane probability evaluated without `Result` plumbing; inputs are
/// pre-validated by the caller.
fn p2d_value(l: f64, sigma: f64, grid: &GridCell) -> f64 {
    let (a, b) = (grid.a(), grid.b());
    if sigma >= b {
        return 1.0;
    }
    let t1 = b - sigma;
    let t2 = a - sigma;
    let t3 = grid.shrunken_diagonal(sigma);
    let kind = if l <= t1 {
        RegimeKind::Short
    } else if l <= t2 {
        RegimeKind::MidB
    } else if l <= t3 {
        RegimeKind::MidA
    } else {
        RegimeKind::Long
    };
    if sigma == 0.0 {
        needle_2d_branch(kind, l, a, b)
    } else {
        sc_2d_branch(kind, l, sigma, a, b)
    }
}

/// Independent oracle for the tilted variants: averages the in-plane closed
/// form over the uniform tilt angle,
/// `P_tilted(l) = (2/pi) int_0^{pi/2} P_planar(l sin psi) dpsi`.
///
/// This route never touches the tilt integrals inside the 3D branches, so
/// agreement with `prob_3d_*` re-derives every 3D branch end to end.
pub fn psi_marginal_oracle(
    l: f64,
    sigma: Option<f64>,
    grid: &GridCell,
    settings: &QuadratureSettings,
) -> Result<f64> {
    let sigma = sigma.unwrap_or(0.0);
    if !l.is_finite() || l < 0.0 {
        return Err(Error::NegativeLength { value: l });
    }
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::NonPositiveDimension { what: "cap diameter", value: sigma });
    }
    let integral = simpson_refine(
        |psi: f64| p2d_value(l * psi.sin(), sigma, grid),
        0.0,
        FRAC_PI_2,
        settings,
    )?;
    Ok(integral / FRAC_PI_2)
}
