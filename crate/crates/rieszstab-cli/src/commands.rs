//! The five subcommands as library functions returning their output text.

use std::sync::Arc;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rieszstab::functionals::{power_fit, quadratic_prefactor};
use rieszstab::kernel::{ball_potential_with_error, gradient_by_difference};
use rieszstab::{
    angular_grid, ball_energy, beta_direct, beta_table, make_family, surgery_reduce, unit_ball_volume,
    unit_sphere_area, AngularGrid, DeficitReport, FamilyKind, FamilyOptions, Functionals, KernelParams, RaySet,
};

use crate::error::{CliError, Result};
use crate::format::{emit_table, rayset_to_json, report_record, Field, Format, Record};

/// Text of a finished command and whether its checks passed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub text: String,
    pub passed: bool,
}

pub const DEFAULT_NODES: usize = 128;
pub const DEFAULT_DEGREE: usize = 64;
pub const DEFAULT_ERROR_FACTOR: f64 = 3.0;
const MULTIPLIER_TOL: f64 = 1e-8;
const GRADIENT_TOL: f64 = 1e-5;
const IDENTITY_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-4;

fn stability_params(n: usize, lambda: f64) -> Result<KernelParams> {
    Ok(KernelParams::for_stability(n, lambda)?)
}

/// ε_min · (ε_max/ε_min)^{j/(steps-1)}, j = 0..steps.
pub fn geometric_grid(min: f64, max: f64, steps: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max <= 0.2 && min < max) || steps < 2 {
        return Err(CliError::Input("need 0 < eps-min < eps-max <= 0.2 and at least two steps".into()));
    }
    let r = (max / min).ln();
    Ok((0..steps).map(|j| if j + 1 == steps { max } else { min * (r * j as f64 / (steps - 1) as f64).exp() }).collect())
}

/// Per-trial seeds drawn from one ChaCha20 stream.
pub fn trial_seeds(seed: u64, count: usize) -> Vec<u64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count).map(|_| rng.next_u64()).collect()
}

fn grid(n: usize, nodes: usize) -> Result<Arc<AngularGrid>> {
    Ok(Arc::new(angular_grid(n, nodes)?))
}

pub fn cmd_multipliers(n: usize, lambda: f64, max_degree: usize, format: Format) -> Result<Output> {
    stability_params(n, lambda)?;
    let t = beta_table(n, lambda, max_degree)?;
    let mut rows = Vec::with_capacity(max_degree + 1);
    let mut worst: f64 = 0.0;
    for k in 0..=max_degree {
        let d = beta_direct(n, lambda, k)?;
        let diff = (t.beta[k] - d).abs();
        worst = worst.max(diff);
        let mut r = Record::new();
        r.int("k", k as i64).num("beta", t.beta[k]).num("beta_direct", d).num("abs_diff", diff);
        rows.push(r);
    }
    let passed = worst < MULTIPLIER_TOL;
    let mut s = Record::new();
    s.int("n", n as i64)
        .num("lambda", lambda)
        .num("max_abs_diff", worst)
        .num("tolerance", MULTIPLIER_TOL)
        .push("pass", Field::Bool(passed));
    Ok(Output { text: emit_table(&rows, &s, format), passed })
}

pub fn cmd_ball(n: usize, lambda: f64, format: Format) -> Result<Output> {
    let p = stability_params(n, lambda)?;
    let t = beta_table(n, lambda, 1)?;
    let (phi1, phi1_err) = ball_potential_with_error(&p, 1.0)?;
    let (phi0, phi0_err) = ball_potential_with_error(&p, 0.0)?;
    let fd = gradient_by_difference(&p, FD_STEP)?;
    let grad_res = (fd + t.beta[1]).abs();
    let ident_res = (phi1 * lambda - (t.beta[0] - t.beta[1])).abs();
    let energy = ball_energy(&p)?;
    let energy_via = 2.0 * phi1 * unit_sphere_area(n) / (n as f64 + lambda);
    let quantity = |name: &str, value: f64, error: f64| {
        let mut r = Record::new();
        r.str("quantity", name).num("value", value).num("error", error);
        r
    };
    let rows = vec![
        quantity("phi_center", phi0, phi0_err),
        quantity("phi_sphere", phi1, phi1_err),
        quantity("gradient_sphere", t.beta[1], grad_res),
        quantity("gradient_fd", -fd, grad_res),
        quantity("energy", energy, (energy - energy_via).abs()),
        quantity("identity_residual", ident_res, phi1_err * lambda),
    ];
    let passed = grad_res < GRADIENT_TOL && ident_res < IDENTITY_TOL;
    let mut s = Record::new();
    s.int("n", n as i64)
        .num("lambda", lambda)
        .num("gradient_residual", grad_res)
        .num("identity_residual", ident_res)
        .push("pass", Field::Bool(passed));
    Ok(Output { text: emit_table(&rows, &s, format), passed })
}

/// Parameters of a family scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub n: usize,
    pub lambda: f64,
    pub family: FamilyKind,
    pub eps: Vec<f64>,
    pub seed: u64,
    pub nodes: usize,
    pub degree: usize,
    /// Multiple of the combined error by which δ may go negative.
    pub error_factor: f64,
    pub format: Format,
}

impl ScanConfig {
    pub fn new(n: usize, lambda: f64, family: FamilyKind) -> ScanConfig {
        ScanConfig {
            n,
            lambda,
            family,
            eps: geometric_grid(0.005, 0.05, 8).expect("default grid"),
            seed: 0,
            nodes: DEFAULT_NODES,
            degree: DEFAULT_DEGREE,
            error_factor: DEFAULT_ERROR_FACTOR,
            format: Format::Csv,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=8).contains(&self.n) {
            return Err(CliError::Input("n must lie in 2..=8".into()));
        }
        if !(self.lambda > 1.0 && self.lambda < self.n as f64) {
            return Err(CliError::Input("lambda must lie in (1, n)".into()));
        }
        if self.eps.is_empty()
            || self.eps.windows(2).any(|w| !(w[0] < w[1]))
            || self.eps.iter().any(|e| !(*e > 0.0 && *e <= 0.2))
        {
            return Err(CliError::Input("the eps grid must be strictly increasing in (0, 0.2]".into()));
        }
        if self.nodes <= self.degree {
            return Err(CliError::Input("nodes must exceed the spectral degree".into()));
        }
        Ok(())
    }
}

/// One family member evaluated, with its tags filled in.
pub fn evaluate(
    f: &Functionals,
    g: &Arc<AngularGrid>,
    kind: FamilyKind,
    eps: f64,
    seed: Option<u64>,
) -> Result<DeficitReport> {
    let opts = FamilyOptions { seed, ..Default::default() };
    let a = make_family(kind, g.clone(), eps, opts)?;
    let mut r = f.deficit(&a)?;
    r.family = kind.name().into();
    r.family_eps = eps;
    r.seed = seed;
    Ok(r)
}

/// Fit of δ against the family parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanFit {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub prefactor: f64,
    /// exp of the mean of log(δ/ε²).
    pub prefactor_fixed2: f64,
    /// Relative standard error of `prefactor_fixed2`.
    pub prefactor_fixed2_rel_stderr: f64,
}

pub fn fit_scan(eps: &[f64], delta: &[f64]) -> Option<ScanFit> {
    if eps.len() < 3 || delta.iter().any(|d| !(*d > 0.0)) {
        return None;
    }
    let (e, c) = power_fit(eps, delta);
    let m = eps.len() as f64;
    let lx: Vec<f64> = eps.iter().map(|x| x.ln()).collect();
    let mx = lx.iter().sum::<f64>() / m;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let rss: f64 = lx.iter().zip(delta).map(|(x, d)| (d.ln() - (c.ln() + e * x)).powi(2)).sum();
    let c2 = quadratic_prefactor(eps, delta);
    let dev: Vec<f64> = eps.iter().zip(delta).map(|(x, d)| (d / (x * x)).ln() - c2.ln()).collect();
    let var2 = dev.iter().map(|v| v * v).sum::<f64>() / (m - 1.0);
    Some(ScanFit {
        exponent: e,
        exponent_stderr: (rss / (m - 2.0) / sxx).sqrt(),
        prefactor: c,
        prefactor_fixed2: c2,
        prefactor_fixed2_rel_stderr: (var2 / m).sqrt(),
    })
}

/// Reports of a scan in ε order, with the fit when every δ is positive.
pub fn run_scan(cfg: &ScanConfig) -> Result<(Vec<DeficitReport>, Option<ScanFit>)> {
    cfg.validate()?;
    let f = Functionals::new(stability_params(cfg.n, cfg.lambda)?, cfg.degree)?;
    let g = grid(cfg.n, cfg.nodes)?;
    let seed = (cfg.family == FamilyKind::RandomZonal).then_some(cfg.seed);
    let reports = cfg.eps.iter().map(|&e| evaluate(&f, &g, cfg.family, e, seed)).collect::<Result<Vec<_>>>()?;
    let delta: Vec<f64> = reports.iter().map(|r| r.delta).collect();
    let fit = fit_scan(&cfg.eps, &delta);
    Ok((reports, fit))
}

pub fn cmd_scan(cfg: &ScanConfig) -> Result<Output> {
    let (reports, fit) = run_scan(cfg)?;
    let negative = reports.iter().filter(|r| r.delta < -cfg.error_factor * r.combined_error()).count();
    let passed = negative == 0;
    let rows: Vec<Record> = reports.iter().map(report_record).collect();
    let nan = f64::NAN;
    let fit = fit.unwrap_or(ScanFit {
        exponent: nan,
        exponent_stderr: nan,
        prefactor: nan,
        prefactor_fixed2: nan,
        prefactor_fixed2_rel_stderr: nan,
    });
    let mut s = Record::new();
    s.int("n", cfg.n as i64)
        .num("lambda", cfg.lambda)
        .str("family", cfg.family.name())
        .num("exponent", fit.exponent)
        .num("exponent_stderr", fit.exponent_stderr)
        .num("prefactor", fit.prefactor)
        .num("prefactor_fixed2", fit.prefactor_fixed2)
        .num("prefactor_fixed2_rel_stderr", fit.prefactor_fixed2_rel_stderr)
        .int("negative_deficits", negative as i64)
        .push("pass", Field::Bool(passed));
    Ok(Output { text: emit_table(&rows, &s, cfg.format), passed })
}

/// Parameters of a stability sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub n: usize,
    pub lambda: f64,
    pub trials: usize,
    pub seed: u64,
    pub eps: Vec<f64>,
    pub nodes: usize,
    pub degree: usize,
    pub error_factor: f64,
    pub format: Format,
}

impl VerifyConfig {
    pub fn new(n: usize, lambda: f64, trials: usize, seed: u64) -> VerifyConfig {
        VerifyConfig {
            n,
            lambda,
            trials,
            seed,
            eps: geometric_grid(0.005, 0.05, 8).expect("default grid"),
            nodes: DEFAULT_NODES,
            degree: DEFAULT_DEGREE,
            error_factor: DEFAULT_ERROR_FACTOR,
            format: Format::Csv,
        }
    }
}

/// Outcome of [`run_verify`].
#[derive(Debug, Clone, PartialEq)]
pub struct VerifySummary {
    pub evaluated: usize,
    pub skipped: usize,
    pub violations: usize,
    /// min δ/α² over the random trials.
    pub min_ratio: f64,
    /// (β_1-β_2)/(4|S^{n-1}|).
    pub bound_constant: f64,
    /// Mean δ/α² over the ring family.
    pub ring_ratio: f64,
    /// Mean δ/|AΔB|² over the ring family.
    pub ring_ratio_symmdiff: f64,
    /// β_1/(2|S^{n-1}|).
    pub ring_target: f64,
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<(Vec<Record>, VerifySummary)> {
    let sc = ScanConfig {
        n: cfg.n,
        lambda: cfg.lambda,
        family: FamilyKind::RandomZonal,
        eps: cfg.eps.clone(),
        seed: cfg.seed,
        nodes: cfg.nodes,
        degree: cfg.degree,
        error_factor: cfg.error_factor,
        format: cfg.format,
    };
    sc.validate()?;
    if cfg.trials == 0 {
        return Err(CliError::Input("need at least one trial".into()));
    }
    let f = Functionals::new(stability_params(cfg.n, cfg.lambda)?, cfg.degree)?;
    let g = grid(cfg.n, cfg.nodes)?;
    let s = unit_sphere_area(cfg.n);
    let bound_constant = (f.beta(1) - f.beta(2)) / (4.0 * s);
    let mut rows = Vec::new();
    let mut sum = VerifySummary {
        evaluated: 0,
        skipped: 0,
        violations: 0,
        min_ratio: f64::INFINITY,
        bound_constant,
        ring_ratio: 0.0,
        ring_ratio_symmdiff: 0.0,
        ring_target: f.beta(1) / (2.0 * s),
    };
    let row = |kind: FamilyKind, trial: usize, r: &DeficitReport, bound: f64, ok: bool| {
        let err = cfg.error_factor * r.combined_error();
        let mut rec = Record::new();
        rec.str("family", kind.name())
            .int("trial", trial as i64)
            .num("eps", r.family_eps)
            .push("seed", Field::Raw(r.seed.map_or("null".into(), |s| s.to_string())))
            .num("alpha", r.alpha)
            .num("delta", r.delta)
            .num("delta_error", err)
            .num("bound", bound)
            .num("margin", r.delta - bound)
            .num("ratio", r.delta / (r.alpha * r.alpha))
            .num("ratio_error", err / (r.alpha * r.alpha))
            .push("ok", Field::Bool(ok));
        rec
    };
    for (t, seed) in trial_seeds(cfg.seed, cfg.trials).into_iter().enumerate() {
        for &e in &cfg.eps {
            let r = evaluate(&f, &g, FamilyKind::RandomZonal, e, Some(seed))?;
            if !(r.alpha > 0.0) {
                sum.skipped += 1;
                continue;
            }
            sum.evaluated += 1;
            let bound = bound_constant * r.alpha * r.alpha;
            let ok = r.delta >= bound - cfg.error_factor * r.combined_error();
            if !ok {
                sum.violations += 1;
            }
            sum.min_ratio = sum.min_ratio.min(r.delta / (r.alpha * r.alpha));
            rows.push(row(FamilyKind::RandomZonal, t, &r, bound, ok));
        }
    }
    let bv = unit_ball_volume(cfg.n);
    for &e in &cfg.eps {
        let a = make_family(FamilyKind::Ring, g.clone(), e, FamilyOptions::default())?.scale_to_unit()?;
        let mut r = f.deficit(&a)?;
        r.family = FamilyKind::Ring.name().into();
        r.family_eps = e;
        let sd = 2.0 * (bv - a.ball_intersection_volume(0.0));
        sum.ring_ratio += r.delta / (r.alpha * r.alpha) / cfg.eps.len() as f64;
        sum.ring_ratio_symmdiff += r.delta / (sd * sd) / cfg.eps.len() as f64;
        let bound = bound_constant * r.alpha * r.alpha;
        rows.push(row(FamilyKind::Ring, 0, &r, bound, r.delta >= bound - cfg.error_factor * r.combined_error()));
    }
    Ok((rows, sum))
}

pub fn cmd_verify(cfg: &VerifyConfig) -> Result<Output> {
    let (rows, s) = run_verify(cfg)?;
    let passed = s.violations == 0;
    let mut r = Record::new();
    r.int("n", cfg.n as i64)
        .num("lambda", cfg.lambda)
        .int("trials", cfg.trials as i64)
        .push("seed", Field::Raw(cfg.seed.to_string()))
        .int("evaluated", s.evaluated as i64)
        .int("skipped", s.skipped as i64)
        .int("violations", s.violations as i64)
        .num("bound_constant", s.bound_constant)
        .num("min_ratio", s.min_ratio)
        .num("ring_ratio", s.ring_ratio)
        .num("ring_ratio_symmdiff", s.ring_ratio_symmdiff)
        .num("ring_target", s.ring_target)
        .push("pass", Field::Bool(passed));
    Ok(Output { text: emit_table(&rows, &r, cfg.format), passed })
}

/// Runs the reduction on `a`; returns the report text and the reduced set as JSON.
pub fn cmd_reduce(a: &RaySet, lambda: f64, c: f64, degree: usize, format: Format) -> Result<(Output, String)> {
    let f = Functionals::new(stability_params(a.dim(), lambda)?, degree)?;
    let rep = surgery_reduce(a, c, &f)?;
    let passed = rep.all_ok();
    let row = |name: &str, value: f64, tol: f64, ok: bool| {
        let mut r = Record::new();
        r.str("quantity", name).num("value", value).num("tolerance", tol).push("ok", Field::Bool(ok));
        r
    };
    let err_before = rep.before.combined_error();
    let err_after = rep.after.combined_error();
    let rows = vec![
        row("delta_before", rep.before.delta, err_before, true),
        row("delta_after", rep.after.delta, err_after, true),
        row("alpha_before", rep.before.alpha, 0.0, true),
        row("alpha_after", rep.after.alpha, 0.0, true),
        row("p1_deficit_increase", rep.p1_residual, rep.p1_tol, rep.p1_ok()),
        row("p2_asymmetry_change", rep.p2_residual, rep.p2_tol, rep.p2_ok()),
        row("p3_annulus_excess", rep.p3_residual, 0.0, rep.p3_ok()),
        row("p4_unit_moment", rep.p4_residual, rep.p4_tol, rep.p4_ok()),
        row("translation_defect", rep.translation_defect, 0.0, true),
    ];
    let mut s = Record::new();
    s.int("n", a.dim() as i64)
        .num("lambda", lambda)
        .num("constant_c", c)
        .num("big_r", rep.big_r)
        .num("rho", rep.rho)
        .num("r_outer", rep.r_outer)
        .num("r_inner", rep.r_inner)
        .num("x0", rep.x0)
        .num("eps", rep.eps)
        .num("c_prime", rep.c_prime)
        .push("pass", Field::Bool(passed));
    Ok((Output { text: emit_table(&rows, &s, format), passed }, rayset_to_json(&rep.reduced)))
}
