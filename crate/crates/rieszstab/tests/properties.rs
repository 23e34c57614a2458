use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use proptest::prelude::*;
use rieszstab::families::{perturbed_set, random_zonal_profile};
use rieszstab::funk_hecke::bk_radial;
use rieszstab::rayset::ball_overlap;
use rieszstab::sphere::{gegenbauer_order, zonal_eval_all};
use rieszstab::*;

fn grid(n: usize, m: usize) -> Arc<AngularGrid> {
    Arc::new(angular_grid(n, m).unwrap())
}

fn newton() -> &'static Functionals {
    static F: OnceLock<Functionals> = OnceLock::new();
    F.get_or_init(|| Functionals::new(KernelParams::new(3, 2.0).unwrap(), 64).unwrap())
}

#[test]
fn orthogonality_matrix_is_diagonal() {
    for n in 2..=6 {
        let k = 24;
        let g = angular_grid(n, 4 * k).unwrap();
        let b = GegenbauerBasis::new(&g, k).unwrap();
        for i in 0..=k {
            for j in 0..i {
                let ip = g.integrate(|q| b.row(i)[q] * b.row(j)[q]);
                let scale = (b.norms_sq()[i] * b.norms_sq()[j]).sqrt();
                assert!(ip.abs() / scale < 1e-10, "n={n} ({i},{j}) {ip}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(n in 2usize..=6, coeffs in prop::collection::vec(-1.0f64..1.0, 1..20)) {
        let k = coeffs.len() - 1;
        let g = grid(n, 64);
        let b = GegenbauerBasis::new(&g, k).unwrap();
        let values: Vec<f64> = (0..g.len()).map(|q| (0..=k).map(|j| coeffs[j] * b.row(j)[q]).sum()).collect();
        let f = ZonalFn::new(g, values).unwrap();
        let c = zonal_expand(&f, k).unwrap();
        let total = l2_norm_sq(&f);
        prop_assume!(total > 1e-12);
        prop_assert!((total - c.energy()).abs() / total < 1e-10);
    }

    #[test]
    fn three_term_recurrence(n in 2usize..=8, k in 1usize..60, t in -1.0f64..1.0) {
        let mut z = vec![0.0; k + 2];
        zonal_eval_all(n, t, &mut z);
        let kf = k as f64;
        let (lhs, scale) = if n == 2 {
            (z[k + 1] - 2.0 * t * z[k] + z[k - 1], 1.0)
        } else {
            let nu = gegenbauer_order(n);
            let l = (kf + 1.0) * z[k + 1] - 2.0 * (kf + nu) * t * z[k] + (kf + 2.0 * nu - 1.0) * z[k - 1];
            (l, (kf + 1.0) * z[k + 1].abs().max(z[k].abs()).max(1.0))
        };
        prop_assert!(lhs.abs() / scale < 1e-12, "{lhs} {scale}");
    }

    #[test]
    fn potential_decreases(n in 2usize..=5, frac in 0.05f64..0.95, r1 in 0.0f64..3.0, dr in 1e-3f64..1.0) {
        let lambda = 1.0 + frac * (n as f64 - 1.0);
        prop_assume!(lambda < n as f64 - 0.05);
        let p = BallPotential::new(KernelParams::new(n, lambda).unwrap()).unwrap();
        prop_assert!(p.phi(r1) > p.phi(r1 + dr));
    }

    #[test]
    fn kernel_sandwich(eps in 0.0f64..0.2, lr in -1.0f64..1.0, ls in -1.0f64..1.0, th in 1e-3f64..PI, n in 2usize..=5, frac in 0.05f64..0.95) {
        let lambda = 1.0 + frac * (n as f64 - 1.0);
        prop_assume!(lambda < n as f64 - 0.05);
        let p = KernelParams::new(n, lambda).unwrap();
        let (r, s) = ((lr * eps).exp(), (ls * eps).exp());
        let a = n as f64 - lambda;
        let d = |x: f64, y: f64| (x * x + y * y - 2.0 * x * y * th.cos()).sqrt();
        let mid = p.phi_of_distance(d(r, s));
        let lo = (-2.0 * a * eps).exp() * p.phi_of_distance(d((-2.0 * eps).exp(), 1.0));
        let hi = (a * eps).exp() * p.phi_of_distance(d(1.0, 1.0));
        prop_assert!(lo <= mid * (1.0 + 1e-14) && mid <= hi * (1.0 + 1e-14), "{lo} {mid} {hi}");
    }

    #[test]
    fn multipliers_of_perturbation_are_positive(n in 2usize..=5, frac in 0.05f64..0.95, eps in 1e-3f64..0.2) {
        let lambda = 1.0 + frac * (n as f64 - 1.0);
        prop_assume!(lambda < n as f64 - 0.05);
        let pm = perturbation_multipliers(n, lambda, eps, 32).unwrap();
        prop_assert!(pm.mu.iter().all(|&m| m > 0.0), "{:?}", pm.mu);
    }

    #[test]
    fn mass_balance_and_median_bound(seed in 0u64..10_000, amp in 0.0005f64..0.004) {
        let g = grid(3, 96);
        let a = perturbed_set(g, amp, seed).unwrap();
        let mp = a.mass_profiles();
        let bv = unit_ball_volume(3);
        prop_assert!((mp.m_plus.integral() - mp.m_minus.integral() - (a.volume() - bv)).abs() < 1e-12);
        // centre on the nearest ball, then the median shift is O(α)
        let a = a.scale_to_unit().unwrap();
        let (alpha, t) = a.asymmetry().unwrap();
        let c = a.translate_axial(-t).unwrap();
        let (alpha_c, _) = c.scale_to_unit().unwrap().asymmetry().unwrap();
        let x0 = c.median_center().unwrap();
        let bound = 2.0 * 3.0 * std::f64::consts::E / bv * alpha_c.max(alpha);
        prop_assert!(x0.abs() <= bound, "{x0} {bound}");
    }

    #[test]
    fn random_zonal_profiles_are_admissible(seed in any::<u64>(), eps in 1e-3f64..0.1) {
        let g = grid(4, 64);
        let m = random_zonal_profile(&g, eps, seed, 8).unwrap();
        let f = ZonalFn::new(g, m).unwrap();
        prop_assert!(f.integral().abs() < 1e-12);
        prop_assert!(f.first_moment().abs() < 1e-12);
        prop_assert!((l2_norm_sq(&f).sqrt() - eps).abs() < 1e-12);
    }
}

#[test]
fn potential_far_field_and_consistency() {
    for n in 2..=5 {
        for lambda in [1.25, 1.5, 2.0, 2.5, 3.5] {
            if lambda >= n as f64 - 0.05 {
                continue;
            }
            let p = KernelParams::new(n, lambda).unwrap();
            let bp = BallPotential::new(p).unwrap();
            let far = bp.phi(100.0) / (unit_ball_volume(n) * p.phi_of_distance(100.0));
            assert!((far - 1.0).abs() < 1e-3, "n={n} λ={lambda} {far}");
            let t = beta_table(n, lambda, 2).unwrap();
            let phi1 = ball_potential(&p, 1.0).unwrap();
            assert!(
                (phi1 - (t.beta[0] - t.beta[1]) / lambda).abs() < 1e-8,
                "n={n} λ={lambda} {phi1} {}",
                (t.beta[0] - t.beta[1]) / lambda
            );
            let e = ball_energy(&p).unwrap();
            let via = 2.0 * phi1 * unit_sphere_area(n) / (n as f64 + lambda);
            assert!((e - via).abs() < 1e-8, "n={n} λ={lambda} {e} {via}");
        }
    }
}

#[test]
fn radial_multiplier_bound_is_monotone() {
    let radii = [0.0, 0.25, 0.5, 0.75, 0.9, 1.0];
    for n in 2..=5 {
        for lambda in [1.25, 1.5, 2.0, 2.5] {
            if lambda >= n as f64 {
                continue;
            }
            let t = beta_table(n, lambda, 10).unwrap();
            let a = 0.5 * (n as f64 - lambda);
            for k in 0..=10 {
                let mut prev = f64::NEG_INFINITY;
                for &r in &radii {
                    let b = bk_radial(n, lambda, k, r).unwrap();
                    let scaled = (1.0 + r * r).powf(a) * b;
                    assert!(scaled >= prev - 1e-12, "n={n} λ={lambda} k={k} r={r}");
                    prev = scaled;
                }
            }
            for k in 0..=10 {
                let b1 = bk_radial(n, lambda, k, 1.0).unwrap();
                assert!((b1 - t.beta[k]).abs() < 1e-10, "n={n} λ={lambda} k={k} {b1} {}", t.beta[k]);
            }
        }
    }
}

#[test]
fn ball_translate_lemma_and_overlap_convexity() {
    for n in 2..=4 {
        let bv = unit_ball_volume(n);
        for j in 0..=300 {
            let t = 3.0 * j as f64 / 300.0;
            assert!(ball_symmdiff(n, t) >= t.min(2.0) * bv - 1e-12, "n={n} t={t}");
        }
        let h = 2.0 / 200.0;
        for j in 1..200 {
            let t = j as f64 * h;
            let d2 = ball_overlap(n, t - h) - 2.0 * ball_overlap(n, t) + ball_overlap(n, t + h);
            assert!(d2 >= -1e-10, "n={n} t={t} {d2}");
        }
    }
}

#[test]
fn schwarz_bound_on_families() {
    let f = newton();
    let g = grid(3, 96);
    for kind in [FamilyKind::Ring, FamilyKind::Squeeze, FamilyKind::RandomZonal, FamilyKind::Dilate] {
        for eps in [0.01, 0.05] {
            let opts = FamilyOptions { seed: Some(3), ..Default::default() };
            let a = make_family(kind, g.clone(), eps, opts).unwrap();
            let r = f.deficit(&a).unwrap();
            assert!(r.schwarz_ok(1e-12), "{kind} {eps} {r:?}");
        }
    }
}

/// |A ∩ (y + B)| for y = (y_1, 0, y_3) in ℝ³ by integrating over the azimuth.
fn off_axis_overlap(a: &RaySet, y1: f64, y3: f64) -> f64 {
    let g = a.grid();
    let naz = 256;
    let mut s = 0.0;
    for (i, ivs) in a.rays().iter().enumerate() {
        let (c, sn) = (g.cos_theta()[i], g.sin_theta()[i]);
        let mut acc = 0.0;
        for q in 0..naz {
            let phi = 2.0 * PI * (q as f64 + 0.5) / naz as f64;
            let d = sn * phi.cos() * y1 + c * y3;
            let disc = d * d - (y1 * y1 + y3 * y3 - 1.0);
            if disc <= 0.0 {
                continue;
            }
            let (lo, hi) = ((d - disc.sqrt()).max(0.0), d + disc.sqrt());
            for &(p, q) in ivs {
                let (p, q) = (p.max(lo), q.min(hi));
                if q > p {
                    acc += (q.powi(3) - p.powi(3)) / 3.0;
                }
            }
        }
        s += g.weights()[i] * acc / naz as f64;
    }
    s
}

#[test]
fn axial_optimum_beats_off_axis_offsets() {
    use rand::{Rng, SeedableRng};
    let g = grid(3, 96);
    let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(11);
    let bv = unit_ball_volume(3);
    for kind in [FamilyKind::Ring, FamilyKind::Squeeze, FamilyKind::RandomZonal] {
        let opts = FamilyOptions { seed: Some(5), ..Default::default() };
        let a = make_family(kind, g.clone(), 0.03, opts).unwrap();
        let (alpha, t) = a.asymmetry().unwrap();
        let axial = 2.0 * bv - 2.0 * off_axis_overlap(&a, 0.0, t);
        assert!((axial - alpha).abs() < 1e-9, "{axial} {alpha}");
        for _ in 0..20 {
            let y1 = rng.gen_range(1e-3..0.05);
            let y3 = t + rng.gen_range(-0.05..0.05);
            let sd = 2.0 * bv - 2.0 * off_axis_overlap(&a, y1, y3);
            assert!(sd >= alpha - 1e-9, "{kind} ({y1}, {y3}) {sd} < {alpha}");
        }
    }
}
