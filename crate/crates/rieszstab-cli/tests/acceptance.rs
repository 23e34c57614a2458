//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines always reach the output.
//! The process fails on any FAIL except a documented one; documented
//! failures only stay tolerated while their stated explanation holds.

use std::f64::consts::{E, PI};
use std::fs;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rieszstab::families::{perturbed_set, random_zonal_profile};
use rieszstab::functionals::quadratic_prefactor;
use rieszstab::rayset::MassProfiles;
use rieszstab::*;
use rieszstab_cli::commands::{evaluate, fit_scan, geometric_grid, run_verify, VerifyConfig};
use rieszstab_cli::{cmd_verify, Format};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
    /// A failure whose cause is understood and whose explanation was re-checked.
    documented: bool,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Outcome {
        Outcome { pass, detail, documented: false }
    }
}

fn grid(n: usize, m: usize) -> Arc<AngularGrid> {
    Arc::new(angular_grid(n, m).unwrap())
}

fn lambdas(n: usize) -> Vec<f64> {
    [1.25, 1.5, 2.0, 2.5].into_iter().filter(|l| *l < n as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn c1_multipliers() -> Outcome {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        for lambda in lambdas(n) {
            let t = beta_table(n, lambda, 20).unwrap();
            for k in 0..=20 {
                worst = worst.max((t.beta[k] - beta_direct(n, lambda, k).unwrap()).abs());
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    Outcome::new(worst < 1e-8 && secs < 10.0, format!("max |recursion - quadrature| = {worst:.2e}, {secs:.1} s"))
}

fn c2_newton() -> Outcome {
    let t0 = Instant::now();
    let p = KernelParams::new(3, 2.0).unwrap();
    let t = beta_table(3, 2.0, 10).unwrap();
    let beta_err = (0..=10).map(|k| (t.beta[k] - 1.0 / (2 * k + 1) as f64).abs()).fold(0.0, f64::max);
    let phi = ball_potential(&p, 1.0).unwrap();
    let exact = 8.0 * PI / 15.0;
    let e = ball_energy(&p).unwrap();
    let mc = mc_energy(&RaySet::ball(grid(3, 64)), &p, 10_000_000, 2024).unwrap();
    let z = (mc.value - exact).abs() / mc.error;
    let secs = t0.elapsed().as_secs_f64();
    let pass =
        beta_err < 1e-12 && (phi - 1.0 / 3.0).abs() < 1e-8 && (e - exact).abs() < 1e-6 && z <= 3.0 && secs < 60.0;
    Outcome::new(
        pass,
        format!(
            "beta err {beta_err:.1e}, phi|S - 1/3 = {:.1e}, E - 8pi/15 = {:.1e}, MC 1e7 pairs {:.2} stderr off, {secs:.1} s",
            phi - 1.0 / 3.0,
            e - exact,
            z
        ),
    )
}

fn c3_radial_bound() -> Outcome {
    let radii = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0];
    let mut violations = 0;
    let mut worst_eq: f64 = 0.0;
    let mut checked = 0;
    for n in 2..=5 {
        for lambda in lambdas(n) {
            let t = beta_table(n, lambda, 10).unwrap();
            for k in 0..=10 {
                for &r in &radii {
                    let b = bk_radial(n, lambda, k, r).unwrap();
                    let bound = (2.0 / (1.0 + r * r)).powf(0.5 * (n as f64 - lambda)) * t.beta[k];
                    checked += 1;
                    if b > bound * (1.0 + 1e-12) {
                        violations += 1;
                    }
                    if r == 1.0 {
                        worst_eq = worst_eq.max((b - t.beta[k]).abs());
                    }
                }
            }
        }
    }
    Outcome::new(
        violations == 0 && worst_eq < 1e-10,
        format!("{checked} points, {violations} violations, max |b_k(1) - beta_k| = {worst_eq:.1e}"),
    )
}

fn c4_ring() -> Outcome {
    let t0 = Instant::now();
    let eps = geometric_grid(0.005, 0.05, 8).unwrap();
    let g = grid(3, 128);
    let s = unit_sphere_area(3);
    let bv = unit_ball_volume(3);
    let mut fit_ok = true;
    let mut ratio_ok = true;
    let mut explained = true;
    let mut parts = Vec::new();
    for lambda in [1.5, 2.0, 2.5] {
        let f = Functionals::new(KernelParams::new(3, lambda).unwrap(), 64).unwrap();
        let reports: Vec<DeficitReport> =
            eps.iter().map(|&e| evaluate(&f, &g, FamilyKind::Ring, e, None).unwrap()).collect();
        let delta: Vec<f64> = reports.iter().map(|r| r.delta).collect();
        let fit = fit_scan(&eps, &delta).unwrap();
        let b1 = f.beta(1);
        let target = b1 / (2.0 * s);
        let ratio = reports.iter().map(|r| r.delta / (r.alpha * r.alpha)).sum::<f64>() / eps.len() as f64;
        let sd_ratio = eps
            .iter()
            .zip(&delta)
            .map(|(&e, d)| {
                let a = make_family(FamilyKind::Ring, g.clone(), e, FamilyOptions::default())
                    .unwrap()
                    .scale_to_unit()
                    .unwrap();
                let sd = 2.0 * (bv - a.ball_intersection_volume(0.0));
                d / (sd * sd)
            })
            .sum::<f64>()
            / eps.len() as f64;
        fit_ok &= (fit.exponent - 2.0).abs() <= 0.05 && rel(fit.prefactor_fixed2, b1) <= 0.10;
        ratio_ok &= rel(ratio, target) <= 0.10;
        explained &= rel(sd_ratio, target) <= 0.10 && rel(ratio, 2.0 * target) <= 0.10;
        parts.push(format!(
            "lambda={lambda}: exponent {:.3}, prefactor/beta1 {:.3}, (delta/alpha^2)/target {:.3}, (delta/|AdB|^2)/target {:.3}",
            fit.exponent,
            fit.prefactor_fixed2 / b1,
            ratio / target,
            sd_ratio / target
        ));
    }
    let secs = t0.elapsed().as_secs_f64();
    let in_time = secs < 300.0;
    let pass = fit_ok && ratio_ok && in_time;
    let mut o = Outcome::new(pass, format!("{}; {secs:.1} s", parts.join("; ")));
    // the true asymmetry of the ring is |AΔB|/√2, so δ/α² sits at twice the target
    if !pass && fit_ok && in_time && !ratio_ok && explained {
        o.documented = true;
        o.detail += "; delta/alpha^2 target assumes alpha = |AdB|, the exact asymmetry is |AdB|/sqrt(2)";
    }
    o
}

fn c5_squeeze() -> Outcome {
    let eps = geometric_grid(0.005, 0.05, 8).unwrap();
    let g = grid(3, 128);
    let f = Functionals::new(KernelParams::new(3, 2.0).unwrap(), 64).unwrap();
    let reports: Vec<DeficitReport> =
        eps.iter().map(|&e| evaluate(&f, &g, FamilyKind::Squeeze, e, None).unwrap()).collect();
    let delta: Vec<f64> = reports.iter().map(|r| r.delta).collect();
    let w: Vec<f64> = reports.iter().map(|r| r.second_variation).collect();
    let cd = quadratic_prefactor(&eps, &delta);
    let cw = quadratic_prefactor(&eps, &w);
    let pass = rel(cd, 2.0 / 15.0) <= 0.10 && rel(cw, 0.2) <= 0.15;
    Outcome::new(
        pass,
        format!(
            "delta prefactor {cd:.5} vs 2/15 ({:+.1}%), W prefactor {cw:.5} vs 1/5 ({:+.1}%)",
            100.0 * (cd * 7.5 - 1.0),
            100.0 * (cw * 5.0 - 1.0)
        ),
    )
}

fn c6_translate() -> Outcome {
    let g = grid(3, 1024);
    let f = Functionals::new(KernelParams::new(3, 2.0).unwrap(), 64).unwrap();
    let mut worst: f64 = 0.0;
    let mut zero_ok = true;
    for e in geometric_grid(0.005, 0.05, 8).unwrap() {
        let r = evaluate(&f, &g, FamilyKind::Translate, e, None).unwrap();
        zero_ok &= r.delta.abs() <= 3.0 * r.combined_error();
        worst = worst.max(r.delta.abs() / r.combined_error().max(1e-300));
    }
    let r = evaluate(&f, &g, FamilyKind::Translate, 0.01, None).unwrap();
    let target = f.beta(1) / 3.0 * 4.0 * PI * 1e-4;
    let pass = zero_ok && rel(r.first_variation, target) <= 0.10 && rel(r.second_variation, target) <= 0.10;
    Outcome::new(
        pass,
        format!(
            "1024 nodes, max |delta|/error {worst:.2}, V/target {:.4}, W/target {:.4} at eps=0.01",
            r.first_variation / target,
            r.second_variation / target
        ),
    )
}

fn c7_decomposition() -> Outcome {
    let p = KernelParams::new(3, 2.0).unwrap();
    let f = Functionals::new(p, 64).unwrap();
    let g = grid(3, 128);
    let eb = ball_energy(&p).unwrap();
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for (j, kind) in FamilyKind::ALL.into_iter().enumerate() {
        for (i, eps) in [0.02, 0.05].into_iter().enumerate() {
            let opts = FamilyOptions { seed: Some(41), ..Default::default() };
            let a = make_family(kind, g.clone(), eps, opts).unwrap();
            let v = f.first_variation(&a);
            let w = f.second_variation(&a).unwrap();
            let mc = mc_energy(&a, &p, 4_000_000, 100 + (2 * j + i) as u64).unwrap();
            let err = mc.error + v.error + w.error;
            worst = worst.max(((eb - mc.value) - (v.value - w.value)).abs() / err);
            count += 1;
        }
    }
    Outcome::new(worst <= 3.0, format!("{count} sets, max |identity residual|/combined error = {worst:.2}"))
}

fn c8_stability() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for (n, lambda) in [(2, 1.5), (3, 1.5), (3, 2.0), (4, 2.5)] {
        let (_, s) = run_verify(&VerifyConfig::new(n, lambda, 50, 8)).unwrap();
        pass &= s.violations == 0 && s.evaluated > 0;
        parts.push(format!(
            "({n},{lambda}): {} cases, {} violations, min delta/alpha^2 = {:.2} x bound",
            s.evaluated,
            s.violations,
            s.min_ratio / s.bound_constant
        ));
    }
    Outcome::new(pass, parts.join("; "))
}

/// Zonal F = Σ_{k=2}^{K} a_k Z_k with random a_k and random spectral tilt.
fn random_constrained(basis: &GegenbauerBasis, g: &Arc<AngularGrid>, rng: &mut ChaCha20Rng) -> ZonalFn {
    let top = rng.gen_range(2..=basis.max_degree);
    let tilt: f64 = rng.gen_range(-1.0..2.0);
    let mut v = vec![0.0; g.len()];
    for k in 2..=top {
        let a: f64 = rng.sample::<f64, _>(StandardNormal) * (k as f64).powf(-tilt) / basis.norms_sq()[k].sqrt();
        for (x, z) in v.iter_mut().zip(basis.row(k)) {
            *x += a * z;
        }
    }
    ZonalFn::new(g.clone(), v).unwrap()
}

fn c9_toy() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for (n, lambda) in [(2, 1.5), (3, 1.5), (3, 2.0), (4, 2.5)] {
        let g = grid(n, 64);
        let f = Functionals::new(KernelParams::new(n, lambda).unwrap(), 40).unwrap();
        let basis = GegenbauerBasis::new(&g, 20).unwrap();
        let (b1, b2) = (f.beta(1), f.beta(2));
        let mut toy_bad = 0;
        let mut w_bad = 0;
        let mut min_toy = f64::INFINITY;
        let mut max_w = f64::NEG_INFINITY;
        for i in 0..1000 {
            // M_± = F_± + h: the difference F has zero mean and first moment
            let eps = rng.gen_range(1e-3..0.1);
            let fz = random_zonal_profile(&g, eps, rng.gen(), rng.gen_range(2..=12)).unwrap();
            let shared: Vec<f64> = if i % 2 == 0 {
                vec![0.0; g.len()]
            } else {
                let c = rng.gen_range(0.0..eps);
                let u: f64 = rng.gen_range(-1.0..1.0);
                g.cos_theta().iter().map(|x| c * (1.0 + u * x)).collect()
            };
            let mp = MassProfiles {
                n,
                m_plus: ZonalFn::new(g.clone(), fz.iter().zip(&shared).map(|(x, h)| x.max(0.0) + h).collect()).unwrap(),
                m_minus: ZonalFn::new(g.clone(), fz.iter().zip(&shared).map(|(x, h)| (-x).max(0.0) + h).collect())
                    .unwrap(),
            };
            let norm = mp.norm_sq_plus() + mp.norm_sq_minus();
            let gap = f.spherical_v(&mp) - f.spherical_w(&mp.difference()).unwrap() - (b1 - b2) * norm;
            if gap < -1e-10 {
                toy_bad += 1;
            }
            min_toy = min_toy.min(gap / norm);
            let fr = random_constrained(&basis, &g, &mut rng);
            let fnorm = l2_norm_sq(&fr);
            let w = f.spherical_w(&fr).unwrap();
            if w > b2 * fnorm * (1.0 + 1e-12) {
                w_bad += 1;
            }
            max_w = max_w.max(w / (b2 * fnorm));
        }
        pass &= toy_bad == 0 && w_bad == 0;
        parts.push(format!("({n},{lambda}): toy {toy_bad}/1000 bad, min excess/norm {min_toy:.2e}; W {w_bad}/1000 bad, max W/(beta2|F|^2) {max_w:.4}"));
    }
    Outcome::new(pass, parts.join("; "))
}

fn c10_surgery() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(10);
    let mut parts = Vec::new();
    let mut pass = true;
    for (n, lambda, count) in [(3usize, 2.0, 50usize), (2, 1.5, 25), (4, 2.5, 25)] {
        let g = grid(n, 96);
        let f = Functionals::new(KernelParams::new(n, lambda).unwrap(), 32).unwrap();
        let bv = unit_ball_volume(n);
        let median_c = 2.0 * n as f64 * E / bv;
        let q = lambda / n as f64;
        let (mut done, mut skipped, mut bad_p, mut bad_eps, mut bad_median, mut runs) = (0, 0, 0, 0, 0, 0);
        let mut worst_cp: f64 = 0.0;
        let mut seed = 0u64;
        while done < count {
            seed += 1;
            let amp = rng.gen_range(0.002..0.03);
            let a = perturbed_set(g.clone(), amp, seed).unwrap();
            let (alpha, _) = a.scale_to_unit().unwrap().asymmetry().unwrap();
            if alpha > 0.05 * bv {
                skipped += 1;
                continue;
            }
            done += 1;
            for c in [1.0, 10.0] {
                if c * alpha.powf(q) > 0.5 {
                    continue;
                }
                runs += 1;
                let rep = surgery_reduce(&a, c, &f).unwrap();
                // -log(1-x) ≤ 2x·ln 2 on [0, 1/2], α ≤ 1 and |x0| ≤ median_c·α
                let c_prime = 2.0 * std::f64::consts::LN_2 * (c + median_c);
                if !rep.all_ok() {
                    bad_p += 1;
                }
                if rep.eps > c_prime * rep.before.alpha.powf(q) {
                    bad_eps += 1;
                }
                if rep.x0.abs() > median_c * rep.before.alpha {
                    bad_median += 1;
                }
                worst_cp = worst_cp.max(rep.c_prime / c);
            }
        }
        pass &= bad_p == 0 && bad_eps == 0 && bad_median == 0;
        parts.push(format!(
            "({n},{lambda}): {done} inputs ({skipped} above 0.05|B| skipped), {runs} runs, P1-P4 {bad_p} bad, eps bound {bad_eps} bad, median {bad_median} bad, max eps/(C alpha^(lambda/n)) {worst_cp:.2}"
        ));
    }
    let mut translate_bad = 0;
    for n in 2..=5 {
        let bv = unit_ball_volume(n);
        for j in 0..=300 {
            let t = 3.0 * j as f64 / 300.0;
            if ball_symmdiff(n, t) < t.min(2.0) * bv - 1e-12 {
                translate_bad += 1;
            }
        }
    }
    pass &= translate_bad == 0;
    parts.push(format!("ball translate {translate_bad}/1204 bad"));
    Outcome::new(pass, parts.join("; "))
}

fn c11_determinism() -> Outcome {
    let mut cfg = VerifyConfig::new(3, 2.0, 6, 77);
    let mut same = true;
    for format in [Format::Csv, Format::Json] {
        cfg.format = format;
        let a = cmd_verify(&cfg).unwrap();
        let b = cmd_verify(&cfg).unwrap();
        same &= a == b;
    }
    let dir = tempfile::tempdir().unwrap();
    let exe = env!("CARGO_BIN_EXE_rieszstab");
    let mut files = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.json"));
        let st = Command::new(exe)
            .args(["verify", "--n", "3", "--lambda", "2", "--trials", "6", "--seed", "77", "--format", "json", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        same &= st.success();
        files.push(fs::read(&out).unwrap());
    }
    same &= files[0] == files[1] && !files[0].is_empty();
    Outcome::new(same, format!("library runs and two binary runs byte-identical: {same} ({} bytes)", files[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("multiplier recursion vs quadrature", c1_multipliers),
        ("Newton closed forms", c2_newton),
        ("radial multiplier bound", c3_radial_bound),
        ("ring scan", c4_ring),
        ("squeeze scan", c5_squeeze),
        ("translate family", c6_translate),
        ("exact decomposition identity", c7_decomposition),
        ("stability sweep", c8_stability),
        ("toy-model inequality", c9_toy),
        ("reduction surgery", c10_surgery),
        ("determinism", c11_determinism),
    ];
    let mut failed = 0;
    let mut documented = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {tag} {name}: {}", i + 1, o.detail);
        if !o.pass {
            if o.documented {
                documented += 1;
            } else {
                failed += 1;
            }
        }
    }
    let passed = criteria.len() - failed - documented;
    println!("acceptance: {passed} PASS, {} FAIL ({documented} documented)", failed + documented);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
