//! The Riesz kernel, its normalization and the potential of the unit ball.
//!
//! The ball potential is reduced to one-dimensional integrals of the degree-0
//! radial multiplier b_0(ρ) = ∫ φ_λ(ρ e_n - η) dη:
//!
//!   Φ(r) = r^λ ∫_0^1 ρ^{n-1} b_0 dρ + r^λ ∫_r^1 ρ^{-λ-1} b_0 dρ     (r ≤ 1)
//!   Φ(r) = r^λ ∫_0^{1/r} ρ^{n-1} b_0 dρ                             (r ≥ 1)
//!
//! obtained by splitting ∫_0^1 s^{n-1} ∫ φ(r e_n - s η) dη ds at s = r.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{fabs, pow};

use crate::error::{invalid, Error, Result};
use crate::funk_hecke::{beta_table, radial_slice_all};
use crate::quad::{gauss_jacobi, gauss_legendre, graded_edges, ChebTable, GaussRule};
use crate::special::gamma;
use crate::sphere::unit_sphere_area;

/// c_λ = 2^λ π^{n/2} Γ(λ/2)/Γ((n-λ)/2).
pub fn riesz_constant(n: usize, lambda: f64) -> Result<f64> {
    if n < 1 || !(lambda > 0.0 && lambda < n as f64) {
        return Err(invalid("lambda must lie in (0, n)"));
    }
    let nf = n as f64;
    Ok(pow(2.0, lambda) * pow(PI, 0.5 * nf) * gamma(0.5 * lambda) / gamma(0.5 * (nf - lambda)))
}

/// Dimension, exponent and normalization of φ_λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub n: usize,
    pub lambda: f64,
    pub c: f64,
}

impl KernelParams {
    /// Accepts 0.05 ≤ λ ≤ n - 0.05 and 2 ≤ n ≤ 8.
    pub fn new(n: usize, lambda: f64) -> Result<KernelParams> {
        if !(2..=8).contains(&n) {
            return Err(invalid("dimension must lie in 2..=8"));
        }
        if !(lambda >= 0.05 && lambda <= n as f64 - 0.05) {
            return Err(invalid("lambda must lie in [0.05, n - 0.05]"));
        }
        Ok(KernelParams { n, lambda, c: riesz_constant(n, lambda)? })
    }

    /// Same, additionally requiring λ > 1 as the stability pipeline does.
    pub fn for_stability(n: usize, lambda: f64) -> Result<KernelParams> {
        if !(lambda > 1.0) {
            return Err(invalid("the stability pipeline needs lambda > 1"));
        }
        KernelParams::new(n, lambda)
    }

    /// φ_λ at distance d > 0.
    pub fn phi_of_distance(&self, d: f64) -> f64 {
        pow(d, self.lambda - self.n as f64) / self.c
    }
}

/// φ_λ(x) = |x|^{-(n-λ)}/c_λ.
pub fn riesz_eval(params: &KernelParams, x: &[f64]) -> Result<f64> {
    if x.len() != params.n {
        return Err(invalid("point has the wrong dimension"));
    }
    let d2: f64 = x.iter().map(|v| v * v).sum();
    if d2 == 0.0 {
        return Err(invalid("the kernel has a pole at the origin"));
    }
    Ok(params.phi_of_distance(libm::sqrt(d2)))
}

/// Panels on [lo, hi], refined geometrically toward the ends that need it.
fn split_edges(lo: f64, hi: f64, grade_lo: bool, grade_hi: bool, floor: f64) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let mut e =
        if grade_lo { graded_edges(lo, mid, floor, 0.125, true) } else { graded_edges(lo, mid, 1.0, 0.125, true) };
    let right =
        if grade_hi { graded_edges(mid, hi, floor, 0.125, false) } else { graded_edges(mid, hi, 1.0, 0.125, false) };
    e.extend_from_slice(&right[1..]);
    e
}

struct Direct<'a> {
    p: &'a KernelParams,
    slice_rule: GaussRule,
    end_rule: Option<GaussRule>,
    b: Vec<f64>,
}

impl Direct<'_> {
    fn b0(&mut self, rho: f64) -> f64 {
        radial_slice_all(self.p.n, self.p.lambda, self.p.c, rho, &mut self.b[..1], &self.slice_rule);
        self.b[0]
    }

    /// ∫ f(ρ) b_0(ρ) dρ over [lo, hi] ⊂ [0, 1] with the given rule.
    fn integral(&mut self, lo: f64, hi: f64, grade_lo: bool, rule: &GaussRule, f: impl Fn(f64) -> f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let touches_one = hi >= 1.0;
        // panels narrower than 1e-13 would put nodes on ρ = 1 itself
        let floor = 1e-10f64.max(1e-13 / (hi - lo));
        let edges = split_edges(lo, hi, grade_lo, true, floor);
        let last = edges.len() - 2;
        let mut s = 0.0;
        for (j, w2) in edges.windows(2).enumerate() {
            if j == last && touches_one {
                if let Some(er) = self.end_rule.take() {
                    // weight (1-ρ)^{λ-1} absorbs the divergence of b_0 at ρ = 1
                    let h = w2[1] - w2[0];
                    let a = self.p.lambda - 1.0;
                    let mut t = 0.0;
                    for (x, w) in er.nodes.iter().zip(&er.weights) {
                        let rho = w2[0] + 0.5 * h * (1.0 + x);
                        let om = 0.5 * h * (1.0 - x);
                        t += w * f(rho) * self.b0(rho) * pow(om, -a);
                    }
                    s += t * pow(0.5 * h, self.p.lambda);
                    self.end_rule = Some(er);
                    continue;
                }
            }
            for (rho, w) in rule.mapped(w2[0], w2[1]) {
                s += w * f(rho) * self.b0(rho);
            }
        }
        s
    }

    fn potential(&mut self, r: f64, rule: &GaussRule) -> f64 {
        let n = self.p.n as f64;
        let lam = self.p.lambda;
        if r == 0.0 {
            return unit_sphere_area(self.p.n) / (self.p.c * lam);
        }
        if r <= 1.0 {
            let b00 = unit_sphere_area(self.p.n) / self.p.c;
            let i1 = self.integral(0.0, 1.0, false, rule, |rho| pow(rho, n - 1.0));
            // subtract b_0(0) so the integrand stays bounded as r → 0
            let j = self.integral(r, 1.0, r < 0.25, rule, |rho| pow(rho, -lam - 1.0));
            let jc = b00 * (pow(r, -lam) - 1.0) / lam;
            pow(r, lam) * (i1 + j - jc) + b00 * (1.0 - pow(r, lam)) / lam
        } else {
            pow(r, lam) * self.integral(0.0, 1.0 / r, false, rule, |rho| pow(rho, n - 1.0))
        }
    }
}

/// Φ_λ(r) with an error estimate from two Gauss orders.
pub fn ball_potential_with_error(params: &KernelParams, r: f64) -> Result<(f64, f64)> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(invalid("radius must be finite and non-negative"));
    }
    let end_rule = if params.lambda < 1.0 { Some(gauss_jacobi(24, 0.0, params.lambda - 1.0)?) } else { None };
    let mut d = Direct { p: params, slice_rule: gauss_legendre(16), end_rule, b: vec![0.0; 1] };
    let fine = d.potential(r, &gauss_legendre(20));
    let coarse = d.potential(r, &gauss_legendre(14));
    Ok((fine, fabs(fine - coarse)))
}

/// Φ_λ(r) = ∫_{B^n} φ_λ(r e_n - y) dy by nested quadrature.
pub fn ball_potential(params: &KernelParams, r: f64) -> Result<f64> {
    let (v, err) = ball_potential_with_error(params, r)?;
    let tol = 1e-9 * v.abs().max(1.0);
    if !(err <= tol) {
        return Err(Error::NonConvergence("ball potential quadrature".into()));
    }
    Ok(v)
}

/// |∇Φ_λ| on the unit sphere, equal to β_1.
pub fn ball_gradient_at_sphere(params: &KernelParams) -> Result<f64> {
    Ok(beta_table(params.n, params.lambda, 1)?.beta[1])
}

/// Centered difference of Φ_λ across r = 1 with the h^{λ-1} term removed by
/// Richardson extrapolation between h and h/2; returns the slope estimate.
pub fn gradient_by_difference(params: &KernelParams, h: f64) -> Result<f64> {
    let d = |h: f64| -> Result<f64> {
        Ok((ball_potential(params, 1.0 + h)? - ball_potential(params, 1.0 - h)?) / (2.0 * h))
    };
    let d1 = d(h)?;
    let d2 = d(0.5 * h)?;
    let f = pow(2.0, params.lambda - 1.0);
    Ok((f * d2 - d1) / (f - 1.0))
}

/// 𝓔_λ(B^n) = 2(β_0-β_1)|S^{n-1}|/(λ(n+λ)); for λ ≤ 1 via 2Φ(1)|S^{n-1}|/(n+λ).
pub fn ball_energy(params: &KernelParams) -> Result<f64> {
    let s = unit_sphere_area(params.n);
    let nl = params.n as f64 + params.lambda;
    if params.lambda > 1.0 {
        let t = beta_table(params.n, params.lambda, 1)?;
        Ok(2.0 * (t.beta[0] - t.beta[1]) * s / (params.lambda * nl))
    } else {
        Ok(2.0 * ball_potential(params, 1.0)? * s / nl)
    }
}

/// Tabulated Φ_λ and its radial mass ∫ Φ_λ r^{n-1} dr, for λ ∈ (1, n).
#[derive(Debug, Clone)]
pub struct BallPotential {
    pub params: KernelParams,
    pub beta0: f64,
    pub beta1: f64,
    b0: ChebTable,
    b0_end: f64,
    b0_origin: f64,
    i1: f64,
    mass: ChebTable,
    gl: GaussRule,
}

const R_TAB: f64 = 4.0;

impl BallPotential {
    pub fn new(params: KernelParams) -> Result<BallPotential> {
        if !(params.lambda > 1.0) {
            return Err(invalid("tabulated potential needs lambda > 1"));
        }
        let t = beta_table(params.n, params.lambda, 1)?;
        let slice = gauss_legendre(16);
        let mut e: Vec<f64> = vec![0.0, 0.25, 0.5];
        let mut x = 0.5;
        while x > 1.5e-14 {
            x *= 0.5;
            e.push(1.0 - x);
        }
        let b0_end = e[e.len() - 1];
        let mut buf = [0.0];
        let b0 = ChebTable::build(e, 20, 1, |rho, out| {
            radial_slice_all(params.n, params.lambda, params.c, rho, &mut buf, &slice);
            out[0] = buf[0];
        });
        let b0_origin = unit_sphere_area(params.n) / params.c;
        let mut bp = BallPotential {
            params,
            beta0: t.beta[0],
            beta1: t.beta[1],
            b0,
            b0_end,
            b0_origin,
            i1: 0.0,
            mass: ChebTable::build(vec![0.0, 1.0], 1, 1, |_, o| o[0] = 0.0),
            gl: gauss_legendre(20),
        };
        let nf = params.n as f64;
        bp.i1 = bp.b0_integral(0.0, 1.0, false, |rho| pow(rho, nf - 1.0));
        let mut edges = graded_edges(0.0, 1.0, 1e-12, 0.125, false);
        let right = graded_edges(1.0, R_TAB, 1e-12, 0.25, true);
        edges.extend_from_slice(&right[1..]);
        let phi = ChebTable::build(edges, 20, 1, |r, out| {
            out[0] = bp.phi(r) * pow(r, nf - 1.0);
        });
        bp.mass = phi.cumulative();
        Ok(bp)
    }

    fn b0_at(&self, rho: f64) -> f64 {
        if rho >= self.b0_end {
            let s = (rho - self.b0_end) / (1.0 - self.b0_end);
            (1.0 - s) * self.b0.eval(0, self.b0_end) + s * self.beta0
        } else {
            self.b0.eval(0, rho)
        }
    }

    fn b0_integral(&self, lo: f64, hi: f64, grade_lo: bool, f: impl Fn(f64) -> f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let mut edges: Vec<f64> = Vec::new();
        edges.push(lo);
        if grade_lo {
            let mut x = 2.0 * lo;
            while x < 0.25 && x < hi {
                edges.push(x);
                x *= 2.0;
            }
        }
        for &t in self.b0.edges().iter().chain(core::iter::once(&1.0)) {
            if t > *edges.last().unwrap() && t < hi {
                edges.push(t);
            }
        }
        edges.push(hi);
        let mut s = 0.0;
        for w2 in edges.windows(2) {
            for (rho, w) in self.gl.mapped(w2[0], w2[1]) {
                s += w * f(rho) * self.b0_at(rho);
            }
        }
        s
    }

    /// Φ_λ(r).
    pub fn phi(&self, r: f64) -> f64 {
        let nf = self.params.n as f64;
        let lam = self.params.lambda;
        if r <= 0.0 {
            return self.b0_origin / lam;
        }
        if r <= 1.0 {
            let j = self.b0_integral(r, 1.0, r < 0.25, |rho| pow(rho, -lam - 1.0));
            let jc = self.b0_origin * (pow(r, -lam) - 1.0) / lam;
            pow(r, lam) * (self.i1 + j - jc) + self.b0_origin * (1.0 - pow(r, lam)) / lam
        } else {
            pow(r, lam) * self.b0_integral(0.0, 1.0 / r, false, |rho| pow(rho, nf - 1.0))
        }
    }

    /// Φ_λ on the unit sphere, (β_0 - β_1)/λ.
    pub fn phi_at_sphere(&self) -> f64 {
        (self.beta0 - self.beta1) / self.params.lambda
    }

    fn cumulative(&self, r: f64) -> f64 {
        if r <= R_TAB {
            return self.mass.eval(0, r);
        }
        let nf = self.params.n as f64;
        let mut s = self.mass.eval(0, R_TAB);
        let mut a = R_TAB;
        while a < r {
            let b = (2.0 * a).min(r);
            for (x, w) in self.gl.mapped(a, b) {
                s += w * self.phi(x) * pow(x, nf - 1.0);
            }
            a = b;
        }
        s
    }

    /// ∫_a^b Φ_λ(r) r^{n-1} dr.
    pub fn radial_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        self.cumulative(b) - self.cumulative(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((riesz_constant(3, 2.0).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((riesz_constant(2, 1.0).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!(riesz_constant(3, 3.0).is_err());
        let p = KernelParams::new(3, 2.0).unwrap();
        assert!((riesz_eval(&p, &[0.0, 2.0, 0.0]).unwrap() - 1.0 / (8.0 * PI)).abs() < 1e-15);
        assert!(riesz_eval(&p, &[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn newton_potential_closed_form() {
        let p = KernelParams::new(3, 2.0).unwrap();
        let bp = BallPotential::new(p).unwrap();
        for &r in &[0.0, 0.1, 0.5, 0.9, 0.999, 1.0, 1.001, 1.3, 2.0, 3.9, 7.0] {
            let exact = if r <= 1.0 { 0.5 - r * r / 6.0 } else { 1.0 / (3.0 * r) };
            assert!((bp.phi(r) - exact).abs() < 1e-13, "r={r} {}", bp.phi(r));
            if r < 3.0 {
                let d = ball_potential(&p, r).unwrap();
                assert!((d - exact).abs() < 1e-11, "r={r} {d}");
            }
        }
        // ∫_0^1 (1/2 - r²/6) r² dr = 1/6 - 1/30
        assert!((bp.radial_mass(0.0, 1.0) - 2.0 / 15.0).abs() < 1e-14);
        assert!((bp.radial_mass(1.0, 2.0) - 0.5).abs() < 1e-13);
    }

    #[test]
    fn radii_just_inside_the_sphere() {
        for (n, lambda) in [(2usize, 1.5), (3, 2.0), (4, 2.5)] {
            let p = KernelParams::new(n, lambda).unwrap();
            let at = ball_potential(&p, 1.0).unwrap();
            for h in [1e-4, 5e-5, 1e-9] {
                let v = ball_potential(&p, 1.0 - h).unwrap();
                assert!(v > at && v - at < 2.0 * h * ball_gradient_at_sphere(&p).unwrap(), "n={n} h={h} {v} {at}");
            }
        }
    }

    #[test]
    fn small_lambda_direct() {
        let p = KernelParams::new(3, 0.5).unwrap();
        let (v, err) = ball_potential_with_error(&p, 1.0).unwrap();
        assert!(v > 0.0 && err < 1e-9, "{v} {err}");
        let inner = ball_potential(&p, 0.0).unwrap();
        assert!(inner > v);
    }
}
