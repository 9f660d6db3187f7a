//! Command-line surface: closed-form probabilities, Monte Carlo estimates,
//! CSV sweeps, the cross-validation suite, and the landscape thresholds.
//!
//! Output contract: single-result commands print one JSON object on stdout;
//! sweeps print CSV. Exit codes: 0 success, 1 verification failure,
//! 2 usage or validation error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use needle_lab::analytic::{prob_2d_needle, prob_2d_sc, prob_3d_needle, prob_3d_sc, prob_bnp};
use needle_lab::landscape::{
    find_lambda_thresholds, prob_for_ratios, AspectSweepSpec, SweepRow,
};
use needle_lab::montecarlo::{estimate, estimate_bnp, RngSpec, SimResult};
use needle_lab::verify::{certainty_check, run as run_verify, VerifyConfig};
use needle_lab::{Error, GridCell, Probability, QuadratureSettings, Shape, Variant};
use serde_json::json;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "needle-lab", version, about = "Intersection probabilities of needles and spherocylinders on a rectangular grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form intersection probability for one parameter set
    Prob(ProbArgs),
    /// Monte Carlo estimate of the same probability
    Simulate(SimulateArgs),
    /// Probability sweep over length or aspect ratio, as CSV
    Sweep(SweepArgs),
    /// Run the cross-validation suite
    Verify(VerifyArgs),
    /// Control-parameter thresholds of the landscape minima
    Thresholds(ThresholdsArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliVariant {
    #[value(name = "2d-needle")]
    Needle2d,
    #[value(name = "2d-sc")]
    Sc2d,
    #[value(name = "3d-needle")]
    Needle3d,
    #[value(name = "3d-sc")]
    Sc3d,
    #[value(name = "bnp-2d-needle")]
    Bnp2dNeedle,
    #[value(name = "bnp-2d-sc")]
    Bnp2dSc,
    #[value(name = "bnp-3d-needle")]
    Bnp3dNeedle,
    #[value(name = "bnp-3d-sc")]
    Bnp3dSc,
}

impl CliVariant {
    fn base(self) -> Variant {
        match self {
            CliVariant::Needle2d | CliVariant::Bnp2dNeedle => Variant::Needle2D,
            CliVariant::Sc2d | CliVariant::Bnp2dSc => Variant::Spherocylinder2D,
            CliVariant::Needle3d | CliVariant::Bnp3dNeedle => Variant::Needle3D,
            CliVariant::Sc3d | CliVariant::Bnp3dSc => Variant::Spherocylinder3D,
        }
    }

    fn is_single_family(self) -> bool {
        matches!(
            self,
            CliVariant::Bnp2dNeedle
                | CliVariant::Bnp2dSc
                | CliVariant::Bnp3dNeedle
                | CliVariant::Bnp3dSc
        )
    }

    fn name(self) -> &'static str {
        match self {
            CliVariant::Needle2d => "2d-needle",
            CliVariant::Sc2d => "2d-sc",
            CliVariant::Needle3d => "3d-needle",
            CliVariant::Sc3d => "3d-sc",
            CliVariant::Bnp2dNeedle => "bnp-2d-needle",
            CliVariant::Bnp2dSc => "bnp-2d-sc",
            CliVariant::Bnp3dNeedle => "bnp-3d-needle",
            CliVariant::Bnp3dSc => "bnp-3d-sc",
        }
    }
}

#[derive(Args, Clone)]
struct QuadArgs {
    /// Simpson intervals per unit of integration range
    #[arg(long = "quad-nunit", default_value_t = 10_000)]
    quad_nunit: u32,
    /// Stopping tolerance on successive refined sums
    #[arg(long = "quad-eps", default_value_t = 1e-9)]
    quad_eps: f64,
}

impl QuadArgs {
    fn settings(&self) -> QuadratureSettings {
        QuadratureSettings {
            intervals_per_unit: self.quad_nunit,
            epsilon: self.quad_eps,
            ..QuadratureSettings::default()
        }
    }
}

#[derive(Args)]
struct ProbArgs {
    #[arg(long, value_enum)]
    variant: CliVariant,
    /// Shape length
    #[arg(long)]
    l: f64,
    /// Cap diameter (spherocylinder variants only)
    #[arg(long)]
    sigma: Option<f64>,
    /// Grid width; `inf` routes to the single-line-family formulas
    #[arg(long)]
    a: Option<f64>,
    /// Grid height (line spacing for bnp variants)
    #[arg(long)]
    b: f64,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    prob: ProbArgs,
    /// Number of trials
    #[arg(long)]
    n: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: NEEDLE_LAB_THREADS or all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepMode {
    Length,
    Aspect,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    mode: SweepMode,
    #[arg(long, value_enum)]
    variant: CliVariant,
    /// Length mode: grid aspect ratio a/b (`inf` for the single-family limit)
    #[arg(long, default_value_t = 1.0)]
    aspect_ratio: f64,
    /// Length mode: cap diameter over cell height
    #[arg(long, default_value_t = 0.0)]
    sigma_over_b: f64,
    #[arg(long, default_value_t = 0.25)]
    lb_min: f64,
    #[arg(long, default_value_t = 3.0)]
    lb_max: f64,
    #[arg(long, default_value_t = 12)]
    lb_steps: usize,
    /// Aspect mode: control parameter l^2/(ab)
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Aspect mode: cap diameter over length
    #[arg(long, default_value_t = 0.0)]
    sigma_over_l: f64,
    #[arg(long, default_value_t = 1.0)]
    t_min: f64,
    #[arg(long, default_value_t = 8.0)]
    t_max: f64,
    #[arg(long, default_value_t = 200)]
    t_steps: usize,
    /// Append Monte Carlo columns with this many trials per row
    #[arg(long)]
    with_mc: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// CSV destination; `-` writes to stdout
    #[arg(long, default_value = "-")]
    out: String,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// CSV of `a,b,sigma` triples replacing the built-in grid matrix
    #[arg(long)]
    grid_list: Option<PathBuf>,
    /// Trials per Monte Carlo regression point
    #[arg(long, default_value_t = 1_000_000)]
    mc_n: u64,
    #[arg(long, default_value_t = 20_260_810)]
    seed: u64,
    #[arg(long)]
    threads: Option<usize>,
    /// Test fixture: swap in the prior-literature coefficient, which must
    /// make the regression check fail
    #[arg(long, hide = true)]
    inject_prior_coefficient: bool,
    #[command(flatten)]
    quad: QuadArgs,
}

#[derive(Args)]
struct ThresholdsArgs {
    #[arg(long, value_enum)]
    variant: CliVariant,
    #[command(flatten)]
    quad: QuadArgs,
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("NEEDLE_LAB_THREADS").ok().and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

/// Shape construction shared by prob/simulate: spherocylinder variants
/// require `--sigma`, needle variants reject it.
fn shape_for(variant: CliVariant, l: f64, sigma: Option<f64>) -> Result<Shape, Error> {
    if variant.base().is_spherocylinder() {
        let sigma = sigma.ok_or_else(|| Error::Domain {
            what: format!("--sigma is required for variant {}", variant.name()),
        })?;
        Shape::spherocylinder(l, sigma)
    } else {
        if sigma.is_some() {
            return Err(Error::Domain {
                what: format!("--sigma does not apply to variant {}", variant.name()),
            });
        }
        Shape::needle(l)
    }
}

/// Route of a prob/simulate invocation: either a finite cell or the
/// single-family limit with spacing `b`.
enum Target {
    Cell(GridCell),
    SingleFamily { b: f64 },
}

fn resolve_target(args: &ProbArgs) -> Result<Target, Error> {
    if args.variant.is_single_family() {
        if args.a.is_some_and(|a| a.is_finite()) {
            return Err(Error::Domain {
                what: format!("variant {} takes --b only (no finite --a)", args.variant.name()),
            });
        }
        return Ok(Target::SingleFamily { b: args.b });
    }
    match args.a {
        Some(a) if a.is_infinite() && a > 0.0 => Ok(Target::SingleFamily { b: args.b }),
        Some(a) => Ok(Target::Cell(GridCell::new(a, args.b)?)),
        None => Err(Error::Domain {
            what: format!("--a is required for variant {} (use `--a inf` for the single-family limit)", args.variant.name()),
        }),
    }
}

fn analytic_probability(args: &ProbArgs) -> Result<Probability, Error> {
    let settings = args.quad.settings();
    let shape = shape_for(args.variant, args.l, args.sigma)?;
    match resolve_target(args)? {
        Target::SingleFamily { b } => prob_bnp(&shape, args.variant.base().embedding(), b, &settings),
        Target::Cell(grid) => match args.variant.base() {
            Variant::Needle2D => prob_2d_needle(args.l, &grid),
            Variant::Spherocylinder2D => prob_2d_sc(args.l, shape.diameter(), &grid),
            Variant::Needle3D => prob_3d_needle(args.l, &grid, &settings),
            Variant::Spherocylinder3D => prob_3d_sc(args.l, shape.diameter(), &grid, &settings),
        },
    }
}

fn inputs_json(args: &ProbArgs) -> serde_json::Value {
    let a = match resolve_target(args) {
        Ok(Target::SingleFamily { .. }) => json!("inf"),
        _ => args.a.map_or(serde_json::Value::Null, |a| json!(a)),
    };
    let mut inputs = json!({
        "variant": args.variant.name(),
        "l": args.l,
        "a": a,
        "b": args.b,
    });
    if let Some(sigma) = args.sigma {
        inputs["sigma"] = json!(sigma);
    }
    inputs
}

fn quad_json(q: &QuadArgs) -> serde_json::Value {
    let s = q.settings();
    json!({
        "n_unit": s.intervals_per_unit,
        "epsilon": s.epsilon,
        "max_refinements": s.max_refinements,
    })
}

fn cmd_prob(args: &ProbArgs) -> Result<(), Error> {
    let p = analytic_probability(args)?;
    let record = json!({
        "p": p.value(),
        "regime": p.regime().to_string(),
        "inputs": inputs_json(args),
        "quad_settings": quad_json(&args.quad),
    });
    println!("{record}");
    Ok(())
}

fn simulate_once(args: &SimulateArgs, stream_index: u64) -> Result<SimResult, Error> {
    let shape = shape_for(args.prob.variant, args.prob.l, args.prob.sigma)?;
    let embedding = args.prob.variant.base().embedding();
    let rng = RngSpec { seed: args.seed, stream_index };
    let threads = resolve_threads(args.threads);
    match resolve_target(&args.prob)? {
        Target::SingleFamily { b } => estimate_bnp(&shape, embedding, b, args.n, rng, threads),
        Target::Cell(grid) => estimate(&shape, embedding, &grid, args.n, rng, threads),
    }
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let sim = simulate_once(args, 0)?;
    let record = json!({
        "p_hat": sim.p_hat,
        "std_err": sim.std_err,
        "n_all": sim.n_all,
        "n_coll": sim.n_coll,
        "seed": sim.seed,
        "rng_algorithm": sim.algorithm,
    });
    println!("{record}");
    Ok(())
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    let h = (hi - lo) / (steps - 1) as f64;
    (0..steps).map(|i| lo + h * i as f64).collect()
}

struct McColumns {
    trials: u64,
    seed: u64,
    threads: usize,
}

/// Per-row Monte Carlo column generator.
type McRowFn<'a> = &'a dyn Fn(u64, &SweepRow) -> Result<SimResult, Error>;

fn sweep_mc(
    variant: Variant,
    l: f64,
    sigma: f64,
    aspect_ratio: f64,
    mc: &McColumns,
    row: u64,
) -> Result<SimResult, Error> {
    let shape = if variant.is_spherocylinder() {
        Shape::spherocylinder(l, sigma)?
    } else {
        Shape::needle(l)?
    };
    let rng = RngSpec { seed: mc.seed, stream_index: row };
    if aspect_ratio.is_infinite() {
        estimate_bnp(&shape, variant.embedding(), 1.0, mc.trials, rng, mc.threads)
    } else {
        let grid = GridCell::new(aspect_ratio, 1.0)?;
        estimate(&shape, variant.embedding(), &grid, mc.trials, rng, mc.threads)
    }
}

fn write_sweep(
    out: &mut dyn Write,
    rows: &[SweepRow],
    mc_for_row: Option<McRowFn<'_>>,
) -> Result<(), Error> {
    let io_err = |e: std::io::Error| Error::Domain { what: format!("write failed: {e}") };
    if mc_for_row.is_some() {
        writeln!(out, "abscissa,p_analytic,p_mc,std_err,regime").map_err(io_err)?;
    } else {
        writeln!(out, "abscissa,p_analytic,regime").map_err(io_err)?;
    }
    for (i, row) in rows.iter().enumerate() {
        match mc_for_row {
            Some(mc) => {
                let sim = mc(i as u64, row)?;
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.abscissa,
                    row.p.value(),
                    sim.p_hat,
                    sim.std_err,
                    row.p.regime()
                )
                .map_err(io_err)?;
            }
            None => {
                writeln!(out, "{},{},{}", row.abscissa, row.p.value(), row.p.regime())
                    .map_err(io_err)?;
            }
        }
    }
    Ok(())
}

fn cmd_sweep(args: &SweepArgs) -> Result<(), Error> {
    let settings = args.quad.settings();
    if args.variant.is_single_family() {
        return Err(Error::Domain {
            what: "sweeps take the base variants; use --aspect-ratio inf for the single-family limit".into(),
        });
    }
    let variant = args.variant.base();
    let mc = args.with_mc.map(|trials| McColumns {
        trials,
        seed: args.seed,
        threads: resolve_threads(args.threads),
    });

    let rows: Vec<SweepRow> = match args.mode {
        SweepMode::Length => linspace(args.lb_min, args.lb_max, args.lb_steps)
            .into_iter()
            .map(|l| {
                let p = prob_for_ratios(variant, l, args.sigma_over_b, args.aspect_ratio, &settings)?;
                Ok(SweepRow { abscissa: l, p })
            })
            .collect::<Result<_, Error>>()?,
        SweepMode::Aspect => {
            let spec = AspectSweepSpec {
                variant,
                lambda: args.lambda,
                sigma_over_l: args.sigma_over_l,
                t_min: args.t_min,
                t_max: args.t_max,
                t_steps: args.t_steps,
            };
            needle_lab::landscape::sweep_aspect(&spec, &settings)?
        }
    };

    let mc_closure = mc.as_ref().map(|mc| {
        let mode = args.mode;
        let aspect_ratio = args.aspect_ratio;
        let sigma_over_b = args.sigma_over_b;
        let lambda = args.lambda;
        let sigma_over_l = args.sigma_over_l;
        move |row: u64, sweep_row: &SweepRow| -> Result<SimResult, Error> {
            match mode {
                SweepMode::Length => {
                    sweep_mc(variant, sweep_row.abscissa, sigma_over_b, aspect_ratio, mc, row)
                }
                SweepMode::Aspect => {
                    let t = sweep_row.abscissa;
                    let l = (lambda * t).sqrt();
                    sweep_mc(variant, l, sigma_over_l * l, t, mc, row)
                }
            }
        }
    });

    let mc_dyn = mc_closure.as_ref().map(|f| f as McRowFn<'_>);
    if args.out == "-" {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        write_sweep(&mut lock, &rows, mc_dyn)
    } else {
        let file = File::create(&args.out)
            .map_err(|e| Error::Domain { what: format!("cannot create {}: {e}", args.out) })?;
        let mut out = BufWriter::new(file);
        write_sweep(&mut out, &rows, mc_dyn)
    }
}

fn parse_grid_list(path: &PathBuf) -> Result<Vec<(f64, f64, f64)>, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Domain { what: format!("cannot read {}: {e}", path.display()) })?;
    let mut grids = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if lineno == 0 && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            continue; // header row
        }
        if fields.len() != 3 {
            return Err(Error::Domain {
                what: format!("{}:{}: expected `a,b,sigma`", path.display(), lineno + 1),
            });
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| Error::Domain {
                what: format!("{}:{}: bad number {s:?}", path.display(), lineno + 1),
            })
        };
        grids.push((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
    }
    if grids.is_empty() {
        return Err(Error::Domain { what: format!("{}: no grids", path.display()) });
    }
    Ok(grids)
}

fn cmd_verify(args: &VerifyArgs) -> Result<bool, Error> {
    let mut config = VerifyConfig {
        settings: args.quad.settings(),
        mc_trials: args.mc_n,
        seed: args.seed,
        threads: resolve_threads(args.threads),
        inject_prior_coefficient: args.inject_prior_coefficient,
        ..VerifyConfig::default()
    };
    if let Some(path) = &args.grid_list {
        config.grids = parse_grid_list(path)?;
    }
    let mut report = run_verify(&config)?;
    report.checks.push(certainty_check(&config.settings)?);

    eprintln!("{:<55} {:>12} {:>10} {:>6}", "check", "worst", "bound", "state");
    for check in &report.checks {
        eprintln!(
            "{:<55} {:>12.3e} {:>10.0e} {:>6}",
            check.name,
            check.worst,
            check.tolerance,
            if check.pass { "ok" } else { "FAIL" }
        );
    }
    let record = json!({
        "pass": report.passes(),
        "checks": report
            .checks
            .iter()
            .map(|c| {
                json!({
                    "name": c.name,
                    "worst": c.worst,
                    "tolerance": c.tolerance,
                    "pass": c.pass,
                })
            })
            .collect::<Vec<_>>(),
    });
    println!("{record}");
    Ok(report.passes())
}

fn cmd_thresholds(args: &ThresholdsArgs) -> Result<(), Error> {
    let thresholds = find_lambda_thresholds(args.variant.base(), &args.quad.settings())?;
    let record = json!({
        "lambda1": thresholds.lambda1,
        "lambda2": thresholds.lambda2,
        "lambda3": thresholds.lambda3,
        "search_tolerance": thresholds.tolerance,
        "variant": args.variant.name(),
    });
    println!("{record}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Prob(args) => cmd_prob(args).map(|()| true),
        Command::Simulate(args) => cmd_simulate(args).map(|()| true),
        Command::Sweep(args) => cmd_sweep(args).map(|()| true),
        Command::Verify(args) => cmd_verify(args),
        Command::Thresholds(args) => cmd_thresholds(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
