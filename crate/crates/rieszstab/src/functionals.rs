//! First and second variations of the Riesz energy around the unit ball.
//!
//! With g = 1_B - 1_A, 𝓔(B) - 𝓔(A) = 𝓥 - 𝓦 where 𝓥 = 2∫ g Φ_λ and
//! 𝓦 = ∬ g(x) g(y) φ_λ(x - y). Both are evaluated on the cell reading of
//! the set, so the value belongs to an actual set.
//!
//! 𝓦 is computed spectrally. Writing g(e^u ξ) = Σ_k c_k(e^u) Z_k(ξ·e_n) and
//! F_k(u) = c_k(e^u) e^{σu} with σ = (n+λ)/2,
//!
//!   𝓦 = Σ_k ‖Z_k‖² · 2 ∫_0^∞ B_k(p) A_k(p) dp,   A_k(p) = ∫ F_k(v+p) F_k(v) dv,
//!
//! with B_k(p) = e^{-(n-λ)p/2} b_k(e^{-p}). Each c_k is constant between
//! consecutive interval endpoints, so A_k(p) is a finite sum of exponentials.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, expm1, fabs, log};

use crate::error::{invalid, Error, Result};
use crate::funk_hecke::{beta_table, MultiplierTable, RadialMultipliers};
use crate::kernel::{BallPotential, KernelParams};
use crate::quad::{gauss_legendre, GaussRule};
use crate::rayset::{MassProfiles, RaySet};
use crate::sphere::{angular_grid, cell_moments, l2_norm_sq, zonal_expand, GegenbauerBasis, ZonalFn};

/// Default spectral truncation degree.
pub const DEFAULT_DEGREE: usize = 64;

const R_FLOOR: f64 = 1e-6;

/// Signed pieces of g = 1_B - 1_A along one ray: +1 on B \ A, -1 on A \ B.
pub fn signed_pieces(ivs: &[(f64, f64)]) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    let mut cursor = 0.0;
    for &(a, b) in ivs {
        if a > cursor && cursor < 1.0 {
            out.push((cursor, a.min(1.0), 1.0));
        }
        if b > 1.0 {
            out.push((a.max(1.0), b, -1.0));
        }
        cursor = b;
    }
    if cursor < 1.0 {
        out.push((cursor, 1.0, 1.0));
    }
    out
}

/// Precomputed kernel data for repeated evaluations at fixed (n, λ).
#[derive(Debug, Clone)]
pub struct Functionals {
    pub params: KernelParams,
    pub degree: usize,
    pub table: MultiplierTable,
    pub potential: BallPotential,
    radial: RadialMultipliers,
    norms: Vec<f64>,
    gl_hi: GaussRule,
    gl_lo: GaussRule,
}

/// A value with its numerical error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

/// How to evaluate 𝓦.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VariationMethod {
    Quadrature,
    /// Sample pairs until the standard error drops below `target` (relative)
    /// or `budget` pairs are used.
    MonteCarlo {
        budget: u64,
        seed: u64,
        target: f64,
    },
}

impl Functionals {
    /// Needs 1 < λ < n.
    pub fn new(params: KernelParams, degree: usize) -> Result<Functionals> {
        if !(params.lambda > 1.0) {
            return Err(invalid("variations need lambda > 1"));
        }
        let table = beta_table(params.n, params.lambda, degree)?;
        let potential = BallPotential::new(params)?;
        let radial = RadialMultipliers::new(params.n, params.lambda, degree)?;
        let g = angular_grid(params.n, degree + 1)?;
        let norms = GegenbauerBasis::new(&g, degree)?.norms_sq().to_vec();
        Ok(Functionals {
            params,
            degree,
            table,
            potential,
            radial,
            norms,
            gl_hi: gauss_legendre(12),
            gl_lo: gauss_legendre(8),
        })
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn beta(&self, k: usize) -> f64 {
        self.table.beta[k]
    }

    /// 𝓥(A) = 2∫(1_B - 1_A) Φ_λ, exact per ray.
    pub fn first_variation(&self, a: &RaySet) -> Estimate {
        let mut total = 0.0;
        let mut mag = 0.0;
        let w = a.grid().weights();
        for (i, ivs) in a.rays().iter().enumerate() {
            for (lo, hi, s) in signed_pieces(ivs) {
                let v = self.potential.radial_mass(lo, hi);
                total += w[i] * s * v;
                mag += w[i] * fabs(v);
            }
        }
        Estimate { value: 2.0 * total, error: 2.0 * mag * 1e-12 }
    }

    /// 𝓦(A) by the radial-spectral method.
    pub fn second_variation(&self, a: &RaySet) -> Result<Estimate> {
        if a.dim() != self.params.n {
            return Err(invalid("set dimension differs from the kernel's"));
        }
        let k1 = self.degree + 1;
        let grid = a.grid();
        let m = grid.len();
        // slab breakpoints in u = ln r
        let mut pieces: Vec<(usize, f64, f64, f64)> = Vec::new();
        let mut u: Vec<f64> = Vec::new();
        for (i, ivs) in a.rays().iter().enumerate() {
            for (lo, hi, s) in signed_pieces(ivs) {
                let (ua, ub) = (log(lo.max(R_FLOOR)), log(hi.max(R_FLOOR)));
                if ub > ua {
                    pieces.push((i, ua, ub, s));
                    u.push(ua);
                    u.push(ub);
                }
            }
        }
        if pieces.is_empty() {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        u.sort_by(|x, y| x.total_cmp(y));
        u.dedup();
        let ns = u.len() - 1;
        let mom = cell_moments(grid, self.degree);
        let mut c = vec![0.0; (ns + 1) * k1];
        for &(i, ua, ub, s) in &pieces {
            let ja = u.partition_point(|&x| x < ua);
            let jb = u.partition_point(|&x| x < ub);
            for k in 0..k1 {
                let v = s * mom[k * m + i];
                c[ja * k1 + k] += v;
                c[jb * k1 + k] -= v;
            }
        }
        for j in 1..=ns {
            for k in 0..k1 {
                c[j * k1 + k] += c[(j - 1) * k1 + k];
            }
        }
        for j in 0..ns {
            for k in 0..k1 {
                c[j * k1 + k] /= self.norms[k];
            }
        }
        // degrees that carry any weight
        let mut peak = vec![0.0f64; k1];
        for j in 0..ns {
            for k in 0..k1 {
                let v = c[j * k1 + k];
                peak[k] = peak[k].max(v * v * self.norms[k]);
            }
        }
        let top = peak.iter().cloned().fold(0.0, f64::max);
        let active: Vec<usize> = (0..k1).filter(|&k| peak[k] > 1e-28 * top).collect();
        let na = active.len();
        let mut ca = vec![0.0; ns * na];
        for j in 0..ns {
            for (q, &k) in active.iter().enumerate() {
                ca[j * na + q] = c[j * k1 + k];
            }
        }
        // heavy breakpoints: largest jumps of the degree-0 coefficient
        let mut jumps: Vec<(f64, f64)> = (0..=ns)
            .map(|j| {
                let left = if j > 0 { c[(j - 1) * k1] } else { 0.0 };
                let right = if j < ns { c[j * k1] } else { 0.0 };
                (fabs(right - left), u[j])
            })
            .collect();
        jumps.sort_by(|x, y| y.0.total_cmp(&x.0));
        let jmax = jumps[0].0;
        let heavy: Vec<f64> = jumps.iter().take(12).filter(|x| x.0 > 0.01 * jmax).map(|x| x.1).collect();
        let span = u[ns] - u[0];
        let mut edges = vec![0.0];
        let mut p = 1e-12;
        let geo_end = span.min(0.05);
        while p < geo_end {
            edges.push(p);
            p *= 1.5;
        }
        let mut p = geo_end;
        while p < span {
            edges.push(p);
            p += 0.05;
        }
        edges.push(span);
        for x in 0..heavy.len() {
            for y in 0..x {
                let d = fabs(heavy[x] - heavy[y]);
                if d > 0.0 && d < span {
                    edges.push(d);
                }
            }
        }
        edges.sort_by(|x, y| x.total_cmp(y));
        edges.dedup_by(|x, y| fabs(*x - *y) <= 1e-15 * span.max(1e-300));

        let sigma = 0.5 * (self.params.n as f64 + self.params.lambda);
        let mut bk = vec![0.0; k1];
        let mut ak = vec![0.0; na];
        let mut hi_k = vec![0.0; na];
        let mut lo_k = vec![0.0; na];
        for e in edges.windows(2) {
            for (rule, acc) in [(&self.gl_hi, &mut hi_k), (&self.gl_lo, &mut lo_k)] {
                for (p, w) in rule.mapped(e[0], e[1]) {
                    self.radial.eval_all(p, &mut bk);
                    overlap(&u, &ca, na, sigma, p, &mut ak);
                    for (q, &k) in active.iter().enumerate() {
                        acc[q] += w * bk[k] * ak[q];
                    }
                }
            }
        }
        let mut value = 0.0;
        let mut quad_err = 0.0;
        let mut tail = 0.0;
        for (q, &k) in active.iter().enumerate() {
            let t = 2.0 * self.norms[k] * hi_k[q];
            value += t;
            quad_err += 2.0 * self.norms[k] * fabs(hi_k[q] - lo_k[q]);
            if 2 * k > self.degree {
                tail += fabs(t);
            }
        }
        Ok(Estimate { value, error: quad_err + tail + 1e-13 * fabs(value) })
    }

    /// 𝓦 by the requested method.
    pub fn second_variation_with(&self, a: &RaySet, method: VariationMethod) -> Result<Estimate> {
        match method {
            VariationMethod::Quadrature => self.second_variation(a),
            VariationMethod::MonteCarlo { budget, seed, target } => {
                let region = crate::mc::Region::symmetric_difference(a);
                let est = crate::mc::pair_integral(&region, &self.params, budget, seed)?;
                if est.error > target * fabs(est.value) {
                    return Err(Error::BudgetExhausted { estimate: est.value, stderr: est.error });
                }
                Ok(est)
            }
        }
    }

    /// W(M) = Σ_k β_k ‖Y_k‖² over k ≤ min(K, m-1), with the unresolved
    /// remainder ‖M‖² - Σ_k ‖Y_k‖² returned alongside.
    pub fn spherical_w_with_residual(&self, f: &ZonalFn) -> Result<(f64, f64)> {
        let k = self.degree.min(f.grid.len() - 1);
        let c = zonal_expand(f, k)?;
        let mut w = 0.0;
        let mut captured = 0.0;
        for j in 0..=k {
            let y = c.component_norm_sq(j);
            w += self.table.beta[j] * y;
            captured += y;
        }
        Ok((w, (l2_norm_sq(f) - captured).max(0.0)))
    }

    /// W(M); fails when M is not resolved by the expansion.
    pub fn spherical_w(&self, f: &ZonalFn) -> Result<f64> {
        let (w, res) = self.spherical_w_with_residual(f)?;
        let tol = 1e-8 * l2_norm_sq(f).max(1e-300);
        if res > tol {
            return Err(Error::Truncation { residual: res, tol });
        }
        Ok(w)
    }

    /// V(M_+, M_-) = 2Φ|_S (|B| - |A|) + β_1(‖M_+‖² + ‖M_-‖²).
    pub fn spherical_v(&self, mp: &MassProfiles) -> f64 {
        let dv = mp.m_plus.integral() - mp.m_minus.integral();
        -2.0 * self.potential.phi_at_sphere() * dv + self.table.beta[1] * (mp.norm_sq_plus() + mp.norm_sq_minus())
    }

    /// (β_1 - β_2)(‖M_+‖² + ‖M_-‖²), after checking the constraints and
    /// V - W(M_+ - M_-) ≥ that value - tol.
    pub fn toy_bound(&self, mp: &MassProfiles, tol: f64) -> Result<f64> {
        let cr = constraint_check(mp, None);
        if fabs(cr.mass_residual) > tol || fabs(cr.first_moment) > tol {
            return Err(Error::ConstraintViolation(String::from("mass or first-moment constraint")));
        }
        if mp.m_plus.values.iter().chain(&mp.m_minus.values).any(|v| *v < 0.0) {
            return Err(Error::ConstraintViolation(String::from("negative profile")));
        }
        let bound = (self.table.beta[1] - self.table.beta[2]) * (mp.norm_sq_plus() + mp.norm_sq_minus());
        let v = self.spherical_v(mp);
        let w = self.spherical_w(&mp.difference())?;
        if v - w < bound - tol {
            return Err(Error::ConstraintViolation(String::from("toy inequality fails")));
        }
        Ok(bound)
    }

    /// Full report for A after scaling to unit volume.
    pub fn deficit(&self, a: &RaySet) -> Result<DeficitReport> {
        let n = self.params.n;
        let a = a.scale_to_unit()?;
        let (alpha, t_opt) = a.asymmetry()?;
        let v = self.first_variation(&a);
        let w = self.second_variation(&a)?;
        let mp = a.mass_profiles();
        let (sw, sw_res) = self.spherical_w_with_residual(&mp.difference())?;
        let mps = mp.norm_sq_plus();
        let mms = mp.norm_sq_minus();
        Ok(DeficitReport {
            n,
            lambda: self.params.lambda,
            family: String::new(),
            eps: a.annulus_eps(),
            family_eps: f64::NAN,
            alpha,
            t_opt,
            first_variation: v.value,
            second_variation: w.value,
            delta: v.value - w.value,
            m_plus_norm_sq: mps,
            m_minus_norm_sq: mms,
            spherical_v: self.spherical_v(&mp),
            spherical_w: sw,
            spherical_w_residual: sw_res,
            toy_bound: (self.table.beta[1] - self.table.beta[2]) * (mps + mms),
            quad_error: v.error + w.error,
            mc_error: 0.0,
            seed: None,
        })
    }
}

/// A_k(p) for the active degrees: slabs [u_j, u_{j+1}] carry F_k = c_jk e^{σu}.
fn overlap(u: &[f64], c: &[f64], na: usize, sigma: f64, p: f64, out: &mut [f64]) {
    for o in out.iter_mut() {
        *o = 0.0;
    }
    let ns = u.len() - 1;
    let mut j1 = 0;
    let mut j2 = u.partition_point(|&x| x <= u[0] + p).saturating_sub(1);
    let mut v = u[0];
    let two_s = 2.0 * sigma;
    while j1 < ns && j2 < ns {
        let end = u[j1 + 1].min(u[j2 + 1] - p);
        let d = end - v;
        if d > 0.0 {
            let w = exp(sigma * (p + 2.0 * v)) * expm1(two_s * d) / two_s;
            let r1 = &c[j1 * na..(j1 + 1) * na];
            let r2 = &c[j2 * na..(j2 + 1) * na];
            for q in 0..na {
                out[q] += w * r1[q] * r2[q];
            }
        }
        if end >= u[j1 + 1] {
            j1 += 1;
        }
        if end >= u[j2 + 1] - p {
            j2 += 1;
        }
        v = end;
    }
}

/// Mass-balance and moment residuals of (M_+, M_-).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintReport {
    pub mass_plus: f64,
    pub mass_minus: f64,
    /// ∫M_+ - ∫M_-.
    pub mass_residual: f64,
    /// ∫ (ξ·e_n)(M_+ - M_-) dξ.
    pub first_moment: f64,
    /// Whether ∫M_± ≥ α/2, when α is supplied.
    pub half_alpha_ok: Option<bool>,
}

pub fn constraint_check(mp: &MassProfiles, alpha: Option<f64>) -> ConstraintReport {
    let p = mp.m_plus.integral();
    let q = mp.m_minus.integral();
    ConstraintReport {
        mass_plus: p,
        mass_minus: q,
        mass_residual: p - q,
        first_moment: mp.difference().first_moment(),
        half_alpha_ok: alpha.map(|a| p >= 0.5 * a * (1.0 - 1e-9) && q >= 0.5 * a * (1.0 - 1e-9)),
    }
}

/// One evaluated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficitReport {
    pub n: usize,
    pub lambda: f64,
    pub family: String,
    /// Annulus parameter of the scaled set.
    pub eps: f64,
    /// Parameter the set was generated with, if any.
    pub family_eps: f64,
    pub alpha: f64,
    pub t_opt: f64,
    pub first_variation: f64,
    pub second_variation: f64,
    pub delta: f64,
    pub m_plus_norm_sq: f64,
    pub m_minus_norm_sq: f64,
    pub spherical_v: f64,
    pub spherical_w: f64,
    pub spherical_w_residual: f64,
    pub toy_bound: f64,
    pub quad_error: f64,
    pub mc_error: f64,
    pub seed: Option<u64>,
}

impl DeficitReport {
    pub fn combined_error(&self) -> f64 {
        self.quad_error + self.mc_error
    }

    /// ‖M_+‖² + ‖M_-‖² ≥ α²/(2|S^{n-1}|), up to `tol`.
    pub fn schwarz_ok(&self, tol: f64) -> bool {
        let s = crate::sphere::unit_sphere_area(self.n);
        self.m_plus_norm_sq + self.m_minus_norm_sq >= self.alpha * self.alpha / (2.0 * s) - tol
    }
}

/// 𝓥 for a one-off evaluation.
pub fn first_variation(a: &RaySet, params: KernelParams) -> Result<f64> {
    Ok(Functionals::new(params, 2)?.first_variation(a).value)
}

/// 𝓦 for a one-off evaluation.
pub fn second_variation(a: &RaySet, params: KernelParams, method: VariationMethod) -> Result<Estimate> {
    Functionals::new(params, DEFAULT_DEGREE)?.second_variation_with(a, method)
}

/// δ report for a one-off evaluation.
pub fn deficit(a: &RaySet, params: KernelParams) -> Result<DeficitReport> {
    Functionals::new(params, DEFAULT_DEGREE)?.deficit(a)
}

/// W(M) = Σ β_k ‖Y_k‖².
pub fn spherical_w(f: &ZonalFn, params: KernelParams, degree: usize) -> Result<f64> {
    let k = degree.min(f.grid.len() - 1);
    let t = beta_table(params.n, params.lambda, k)?;
    let c = zonal_expand(f, k)?;
    Ok((0..=k).map(|j| t.beta[j] * c.component_norm_sq(j)).sum())
}

/// V(M_+, M_-).
pub fn spherical_v(mp: &MassProfiles, params: KernelParams) -> Result<f64> {
    let t = beta_table(params.n, params.lambda, 1)?;
    let phi_s = (t.beta[0] - t.beta[1]) / params.lambda;
    let dv = mp.m_plus.integral() - mp.m_minus.integral();
    Ok(-2.0 * phi_s * dv + t.beta[1] * (mp.norm_sq_plus() + mp.norm_sq_minus()))
}

/// Log-log least squares fit y ≈ c x^e; returns (e, c).
pub fn power_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| log(*v)).collect();
    let ly: Vec<f64> = y.iter().map(|v| log(*v)).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (a, b) in lx.iter().zip(&ly) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let e = sxy / sxx;
    (e, exp(my - e * mx))
}

/// Least-squares prefactor of y ≈ c x² in log space (geometric mean of y/x²).
pub fn quadratic_prefactor(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    exp(x.iter().zip(y).map(|(a, b)| log(*b / (a * a))).sum::<f64>() / n)
}
