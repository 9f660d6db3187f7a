//! The self-verification suite behind `needle-lab verify`: branch agreement
//! at every regime threshold, the tilt-marginal cross-route check, the
//! single-family limit check, and a Monte Carlo regression against the
//! corrected square-grid coefficient.

use crate::analytic::{check_boundary_consistency, prior_literature_delta, prob_2d_needle, prob_bnp};
use crate::geometry::{Embedding, GridCell, Result, Shape, Variant};
use crate::landscape::psi_marginal_oracle;
use crate::montecarlo::{estimate, RngSpec};
use crate::quadrature::QuadratureSettings;
use crate::{analytic, RegimeKind};

/// Outcome of one named check: the worst deviation observed and the bound
/// it must stay under.
#[derive(Debug, Clone)]
pub struct CheckRow {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    fn new(name: String, worst: f64, tolerance: f64) -> Self {
        CheckRow { name, worst, tolerance, pass: worst <= tolerance }
    }
}

#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckRow>,
}

impl VerifyReport {
    pub fn passes(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Configuration of the verification run.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// `(a, b, sigma)` triples; sigma is used by the spherocylinder checks.
    pub grids: Vec<(f64, f64, f64)>,
    pub settings: QuadratureSettings,
    /// Trials per Monte Carlo regression point.
    pub mc_trials: u64,
    pub seed: u64,
    pub threads: usize,
    /// Test fixture: evaluate the square-grid regression with the
    /// prior-literature coefficient instead of ours. The regression check
    /// must then fail, which is how the check itself is validated.
    pub inject_prior_coefficient: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            grids: vec![(4.0, 3.0, 0.5), (3.0, 3.0, 0.4), (5.0, 2.0, 0.3), (2.0, 1.5, 0.2)],
            settings: QuadratureSettings::default(),
            mc_trials: 1_000_000,
            seed: 20_260_810,
            threads: 0,
            inject_prior_coefficient: false,
        }
    }
}

const VARIANTS: [Variant; 4] = [
    Variant::Needle2D,
    Variant::Spherocylinder2D,
    Variant::Needle3D,
    Variant::Spherocylinder3D,
];

fn variant_shape(variant: Variant, l: f64, sigma: f64) -> Result<Shape> {
    if variant.is_spherocylinder() {
        Shape::spherocylinder(l, sigma)
    } else {
        Shape::needle(l)
    }
}

/// Worst branch disagreement across thresholds, grids, and variants of one
/// embedding.
fn boundary_check(config: &VerifyConfig, embedding: Embedding) -> Result<CheckRow> {
    let mut worst = 0.0_f64;
    let mut tolerance = f64::INFINITY;
    for &(a, b, sigma) in &config.grids {
        let grid = GridCell::new(a, b)?;
        for variant in VARIANTS.iter().filter(|v| v.embedding() == embedding) {
            let sig = variant.is_spherocylinder().then_some(sigma);
            let report = check_boundary_consistency(*variant, &grid, sig, &config.settings)?;
            for check in &report.checks {
                worst = worst.max(check.difference);
                tolerance = tolerance.min(check.tolerance);
            }
        }
    }
    let name = match embedding {
        Embedding::TwoD => "branch agreement at thresholds (in-plane)",
        Embedding::ThreeD => "branch agreement at thresholds (tilted)",
    };
    Ok(CheckRow::new(name.into(), worst, tolerance))
}

/// Worst disagreement between the 3D closed forms and the tilt-marginal
/// route over a small parameter grid.
fn psi_marginal_check(config: &VerifyConfig) -> Result<CheckRow> {
    let mut worst = 0.0_f64;
    for &(a, b, sigma) in &config.grids {
        let grid = GridCell::new(a, b)?;
        for l_over_b in [0.5, 1.2, 2.0] {
            let l = l_over_b * grid.b();
            let needle = analytic::prob_3d_needle(l, &grid, &config.settings)?.value();
            let oracle = psi_marginal_oracle(l, None, &grid, &config.settings)?;
            worst = worst.max((needle - oracle).abs());
            let sc = analytic::prob_3d_sc(l, sigma, &grid, &config.settings)?.value();
            let oracle = psi_marginal_oracle(l, Some(sigma), &grid, &config.settings)?;
            worst = worst.max((sc - oracle).abs());
        }
    }
    Ok(CheckRow::new("tilt-marginal route agreement".into(), worst, 1e-5))
}

/// Worst gap between the grid probability at `a = 10^6 b` and the
/// single-family closed form.
fn bnp_limit_check(config: &VerifyConfig) -> Result<CheckRow> {
    let mut worst = 0.0_f64;
    let b = 1.0;
    let grid = GridCell::new(1e6 * b, b)?;
    for variant in VARIANTS {
        for l_over_b in [0.5, 1.0, 2.5, 5.0] {
            let l = l_over_b * b;
            let sigma = 0.3 * b;
            let shape = variant_shape(variant, l, sigma)?;
            let wide = match variant {
                Variant::Needle2D => prob_2d_needle(l, &grid)?,
                Variant::Spherocylinder2D => analytic::prob_2d_sc(l, sigma, &grid)?,
                Variant::Needle3D => analytic::prob_3d_needle(l, &grid, &config.settings)?,
                Variant::Spherocylinder3D => {
                    analytic::prob_3d_sc(l, sigma, &grid, &config.settings)?
                }
            };
            let limit = prob_bnp(&shape, variant.embedding(), b, &config.settings)?;
            worst = worst.max((wide.value() - limit.value()).abs());
        }
    }
    Ok(CheckRow::new("single-family limit agreement".into(), worst, 1e-5))
}

/// Monte Carlo regression on the unit square in the diagonal regime: the
/// estimate must agree with our coefficient and, at `l = 1.3`, disagree
/// with the prior-literature coefficient.
fn square_grid_regression(config: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let grid = GridCell::new(1.0, 1.0)?;
    let mut worst_z = 0.0_f64;
    for (i, l) in [1.1, 1.2, 1.3].into_iter().enumerate() {
        let comparison = prior_literature_delta(l)?;
        let ours = if config.inject_prior_coefficient { comparison.prior } else { comparison.ours };
        let sim = estimate(
            &Shape::needle(l)?,
            Embedding::TwoD,
            &grid,
            config.mc_trials,
            RngSpec { seed: config.seed, stream_index: i as u64 },
            config.threads,
        )?;
        let z = (sim.p_hat - ours).abs() / sim.std_err.max(f64::MIN_POSITIVE);
        worst_z = worst_z.max(z);
    }
    let agree = CheckRow::new("square-grid coefficient vs Monte Carlo (|z|)".into(), worst_z, 4.0);

    // The wrong coefficient must be rejected by the same data.
    let l = 1.3;
    let comparison = prior_literature_delta(l)?;
    let wrong = if config.inject_prior_coefficient { comparison.ours } else { comparison.prior };
    let sim = estimate(
        &Shape::needle(l)?,
        Embedding::TwoD,
        &grid,
        config.mc_trials,
        RngSpec { seed: config.seed, stream_index: 2 },
        config.threads,
    )?;
    let z = (sim.p_hat - wrong).abs() / sim.std_err.max(f64::MIN_POSITIVE);
    let reject = CheckRow {
        name: "prior-literature coefficient rejected (|z| > 4)".into(),
        worst: z,
        tolerance: 4.0,
        pass: z > 4.0,
    };
    Ok(vec![agree, reject])
}

/// Runs the whole verification suite.
pub fn run(config: &VerifyConfig) -> Result<VerifyReport> {
    let mut checks = vec![
        boundary_check(config, Embedding::TwoD)?,
        boundary_check(config, Embedding::ThreeD)?,
        psi_marginal_check(config)?,
        bnp_limit_check(config)?,
    ];
    checks.extend(square_grid_regression(config)?);
    Ok(VerifyReport { checks })
}

/// Certainty sanity used by the CLI report: the in-plane forms saturate at
/// the (shrunken) diagonal, the tilted ones never do.
pub fn certainty_check(settings: &QuadratureSettings) -> Result<CheckRow> {
    let grid = GridCell::new(4.0, 3.0)?;
    let mut ok = true;
    ok &= prob_2d_needle(5.5, &grid)?.value() == 1.0;
    ok &= analytic::prob_2d_sc(4.4, 0.5, &grid)?.value() == 1.0;
    ok &= analytic::prob_3d_needle(100.0, &grid, settings)?.value() < 1.0;
    ok &= analytic::prob_3d_sc(100.0, 0.5, &grid, settings)?.value() < 1.0;
    ok &= analytic::prob_2d_sc(1.0, 3.2, &grid)?.regime() == RegimeKind::Long;
    Ok(CheckRow { name: "certainty thresholds".into(), worst: f64::from(u8::from(!ok)), tolerance: 0.0, pass: ok })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fast_config() -> VerifyConfig {
        VerifyConfig {
            grids: vec![(4.0, 3.0, 0.5)],
            mc_trials: 200_000,
            ..VerifyConfig::default()
        }
    }

    #[test]
    fn default_suite_passes() {
        let report = run(&fast_config()).unwrap();
        assert!(report.passes(), "{report:?}");
    }

    #[test]
    fn square_cell_passes_with_empty_mid_regime() {
        let config = VerifyConfig { grids: vec![(3.0, 3.0, 0.4)], mc_trials: 200_000, ..VerifyConfig::default() };
        let report = run(&config).unwrap();
        assert!(report.passes(), "{report:?}");
    }

    #[test]
    fn injected_prior_coefficient_fails() {
        let config = VerifyConfig { inject_prior_coefficient: true, ..fast_config() };
        let report = run(&config).unwrap();
        assert!(!report.passes());
    }
}
