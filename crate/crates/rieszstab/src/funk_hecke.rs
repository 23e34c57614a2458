//! Funk–Hecke multipliers of the Riesz kernel on the sphere.
//!
//! β_k is the eigenvalue of f ↦ ∫ φ_λ(ξ-η) f(η) dη on degree-k harmonics and
//! b_k(r) the eigenvalue of f ↦ ∫ φ_λ(rξ-η) f(η) dη for r ∈ [0, 1].
//! With t = -cos θ the sphere integral at r = 1 becomes a Jacobi-weighted
//! integral with exponents ((n-3)/2, (λ-3)/2) that Gauss–Jacobi handles exactly
//! for the polynomial factor Z_k.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{exp, fabs, pow, sin};

use crate::error::{invalid, Error, Result};
use crate::kernel::riesz_constant;
use crate::quad::{gauss_jacobi, gauss_legendre, graded_edges, ChebTable, GaussRule};
use crate::sphere::{unit_sphere_area, zonal_at_one, zonal_eval_all};

fn require_lambda(n: usize, lambda: f64) -> Result<()> {
    if n < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    if !(lambda > 0.0 && lambda < n as f64) {
        return Err(invalid("lambda must lie in (0, n)"));
    }
    if lambda <= 1.0 {
        return Err(Error::Divergent("sphere multipliers need lambda > 1".into()));
    }
    Ok(())
}

/// Where a table entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Quadrature,
    Recursion,
    ClosedForm,
}

/// β_0..β_K for fixed (n, λ).
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierTable {
    pub n: usize,
    pub lambda: f64,
    pub beta: Vec<f64>,
    pub provenance: Vec<Provenance>,
}

impl MultiplierTable {
    pub fn max_degree(&self) -> usize {
        self.beta.len() - 1
    }

    pub fn get(&self, k: usize) -> f64 {
        self.beta[k]
    }
}

/// Direct quadrature of β_k against Z_k (oracle for the recursion).
pub fn beta_direct(n: usize, lambda: f64, k: usize) -> Result<f64> {
    require_lambda(n, lambda)?;
    let c = riesz_constant(n, lambda)?;
    let m = core::cmp::max(32, k + 8);
    let rule = gauss_jacobi(m, 0.5 * (n as f64 - 3.0), 0.5 * (lambda - 3.0))?;
    let mut z = vec![0.0; k + 1];
    let mut s = 0.0;
    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
        zonal_eval_all(n, -t, &mut z);
        s += w * z[k];
    }
    let pref = unit_sphere_area(n - 1) / (c * pow(2.0, 0.5 * (n as f64 - lambda)) * zonal_at_one(k, n));
    Ok(pref * s)
}

/// β_0 = (1/c_λ) ∫_{S^{n-1}} |e_n - η|^{λ-n} dη (finite only for λ > 1).
pub fn beta0(n: usize, lambda: f64) -> Result<f64> {
    beta_direct(n, lambda, 0)
}

/// β_0 by quadrature, then the two-term recursion in k.
pub fn beta_table(n: usize, lambda: f64, max_degree: usize) -> Result<MultiplierTable> {
    let b0 = beta0(n, lambda)?;
    let mut beta = Vec::with_capacity(max_degree + 1);
    let mut provenance = Vec::with_capacity(max_degree + 1);
    beta.push(b0);
    provenance.push(Provenance::Quadrature);
    let nf = n as f64;
    for k in 0..max_degree {
        let kf = k as f64;
        let ratio = (nf - lambda + 2.0 * kf) / (nf + lambda + 2.0 * kf - 2.0);
        beta.push(beta[k] * ratio);
        provenance.push(Provenance::Recursion);
    }
    Ok(MultiplierTable { n, lambda, beta, provenance })
}

/// Panel partition of [0, π] for the slice integrand at radius r: geometric
/// toward θ = 0 at the scale (1-r)/√r, panels no wider than `hmax`.
fn slice_edges(r: f64, hmax: f64) -> Vec<f64> {
    if r < 0.5 {
        return graded_edges(0.0, PI, 0.6, hmax, true);
    }
    let ts = (1.0 - r) / libm::sqrt(r);
    graded_edges(0.0, PI, (ts / (8.0 * PI)).clamp(1e-15, 0.5), hmax, true)
}

/// b_k(r) for all k ≤ K at once, 0 ≤ r < 1, by graded Gauss–Legendre in θ.
pub fn radial_slice_all(n: usize, lambda: f64, c: f64, r: f64, out: &mut [f64], gl: &GaussRule) {
    let kmax = out.len() - 1;
    for o in out.iter_mut() {
        *o = 0.0;
    }
    if r == 0.0 {
        out[0] = unit_sphere_area(n) / c;
        return;
    }
    let hmax = (4.0 / (kmax as f64 + 1.0)).min(0.5);
    let edges = slice_edges(r, hmax);
    let e = 0.5 * (lambda - n as f64);
    let p = (n - 2) as f64;
    let mut z = vec![0.0; kmax + 1];
    for w2 in edges.windows(2) {
        for (th, w) in gl.mapped(w2[0], w2[1]) {
            let s2 = sin(0.5 * th);
            let d2 = (1.0 - r) * (1.0 - r) + 4.0 * r * s2 * s2;
            let kern = pow(d2, e) * if n == 2 { 1.0 } else { pow(sin(th), p) };
            zonal_eval_all(n, libm::cos(th), &mut z);
            let f = w * kern;
            for (o, zk) in out.iter_mut().zip(&z) {
                *o += f * zk;
            }
        }
    }
    let s = unit_sphere_area(n - 1);
    for (k, o) in out.iter_mut().enumerate() {
        *o *= s / (c * zonal_at_one(k, n));
    }
}

/// b_k(r) by quadrature of Z_k against |r e_n - η|^{λ-n}; b_k(1) = β_k.
pub fn bk_radial(n: usize, lambda: f64, k: usize, r: f64) -> Result<f64> {
    require_lambda(n, lambda)?;
    if !(0.0..=1.0).contains(&r) {
        return Err(invalid("radius must lie in [0, 1]"));
    }
    if r == 1.0 {
        return beta_direct(n, lambda, k);
    }
    let c = riesz_constant(n, lambda)?;
    let mut out = vec![0.0; k + 1];
    radial_slice_all(n, lambda, c, r, &mut out, &gauss_legendre(16));
    Ok(out[k])
}

/// μ_k = e^{(n-λ)ε} β_k - e^{-2(n-λ)ε} b_k(e^{-2ε}), the multipliers of L_{λ,ε}.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationMultipliers {
    pub n: usize,
    pub lambda: f64,
    pub eps: f64,
    pub mu: Vec<f64>,
    pub sup: f64,
}

pub fn perturbation_multipliers(n: usize, lambda: f64, eps: f64, max_degree: usize) -> Result<PerturbationMultipliers> {
    if !(eps >= 0.0) {
        return Err(invalid("eps must be non-negative"));
    }
    let table = beta_table(n, lambda, max_degree)?;
    let a = n as f64 - lambda;
    let r = exp(-2.0 * eps);
    let b: Vec<f64> = if eps == 0.0 {
        table.beta.clone()
    } else if lambda == 2.0 {
        (0..=max_degree).map(|k| table.beta[k] * pow(r, k as f64)).collect()
    } else {
        let mut out = vec![0.0; max_degree + 1];
        radial_slice_all(n, lambda, riesz_constant(n, lambda)?, r, &mut out, &gauss_legendre(16));
        out
    };
    let mu: Vec<f64> = (0..=max_degree)
        .map(|k| if eps == 0.0 { 0.0 } else { exp(a * eps) * table.beta[k] - exp(-2.0 * a * eps) * b[k] })
        .collect();
    let sup = mu.iter().cloned().fold(0.0, f64::max);
    Ok(PerturbationMultipliers { n, lambda, eps, mu, sup })
}

/// sup_k μ_k, with the k > K tail bounded by e^{(n-λ)ε} β_K.
pub fn l_operator_norm(n: usize, lambda: f64, eps: f64, max_degree: usize) -> Result<f64> {
    let pm = perturbation_multipliers(n, lambda, eps, max_degree)?;
    if eps == 0.0 {
        return Ok(0.0);
    }
    let table = beta_table(n, lambda, max_degree)?;
    let tail = exp((n as f64 - lambda) * eps) * table.beta[max_degree];
    if tail > pm.sup {
        return Err(Error::TailDomination { tail, max: pm.sup });
    }
    Ok(pm.sup)
}

/// β_1 - β_2, the spectral gap of the toy model.
pub fn toy_gap(n: usize, lambda: f64) -> Result<f64> {
    let t = beta_table(n, lambda, 2)?;
    let g = t.beta[1] - t.beta[2];
    if !(g > 0.0) {
        return Err(Error::NonPositiveGap(g));
    }
    Ok(g)
}

/// B_k(p) = e^{-(n-λ)p/2} b_k(e^{-p}) tabulated for k ≤ K on p ∈ [0, ∞).
///
/// Piecewise Chebyshev in p, geometric toward p = 0 where B_k has its
/// p^{λ-1} cusp; closed form β_k e^{-(k+(n-2)/2)p} at λ = 2.
#[derive(Debug, Clone)]
pub struct RadialMultipliers {
    pub n: usize,
    pub lambda: f64,
    pub beta: Vec<f64>,
    b0_origin: f64,
    table: Option<ChebTable>,
    first_edge: f64,
    first_vals: Vec<f64>,
}

const P_TAB: f64 = 24.0;

impl RadialMultipliers {
    pub fn new(n: usize, lambda: f64, max_degree: usize) -> Result<RadialMultipliers> {
        let table = beta_table(n, lambda, max_degree)?;
        let c = riesz_constant(n, lambda)?;
        let b0_origin = unit_sphere_area(n) / c;
        let k1 = max_degree + 1;
        if lambda == 2.0 {
            return Ok(RadialMultipliers {
                n,
                lambda,
                beta: table.beta,
                b0_origin,
                table: None,
                first_edge: 0.0,
                first_vals: vec![],
            });
        }
        let gl = gauss_legendre(16);
        let a = 0.5 * (n as f64 - lambda);
        let mut edges = Vec::new();
        let mut x = 1.0;
        while x > 1e-13 {
            edges.push(x);
            x *= 0.5;
        }
        edges.reverse();
        let mut p = 1.0;
        while p < P_TAB {
            p += 0.5;
            edges.push(p);
        }
        let first_edge = edges[0];
        let mut first_vals = vec![0.0; k1];
        radial_slice_all(n, lambda, c, exp(-first_edge), &mut first_vals, &gl);
        for v in first_vals.iter_mut() {
            *v *= exp(-a * first_edge);
        }
        let cheb = ChebTable::build(edges, 20, k1, |p, out| {
            radial_slice_all(n, lambda, c, exp(-p), out, &gl);
            let s = exp(-a * p);
            for o in out.iter_mut() {
                *o *= s;
            }
        });
        Ok(RadialMultipliers { n, lambda, beta: table.beta, b0_origin, table: Some(cheb), first_edge, first_vals })
    }

    pub fn max_degree(&self) -> usize {
        self.beta.len() - 1
    }

    /// B_k(p) for all k ≤ K (p ≥ 0).
    pub fn eval_all(&self, p: f64, out: &mut [f64]) {
        let a = 0.5 * (self.n as f64 - self.lambda);
        match &self.table {
            None => {
                let q = exp(-p);
                let mut f = exp(-a * p);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = self.beta[k] * f;
                    f *= q;
                }
            }
            Some(t) => {
                if p >= t.hi() {
                    for o in out.iter_mut() {
                        *o = 0.0;
                    }
                    out[0] = self.b0_origin * exp(-a * p);
                } else if p <= self.first_edge {
                    let s = p / self.first_edge;
                    for (k, o) in out.iter_mut().enumerate() {
                        *o = (1.0 - s) * self.beta[k] + s * self.first_vals[k];
                    }
                } else {
                    t.eval_all(p, out);
                }
            }
        }
    }
}

/// Σ_k over the tail estimate used by truncated spectral sums.
pub fn tail_ratio(beta: &[f64]) -> f64 {
    let k = beta.len() - 1;
    if k < 2 {
        return 1.0;
    }
    fabs(beta[k] / beta[k / 2])
}
