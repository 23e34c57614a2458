//! Zonal bases, sphere constants and polar-angle quadrature.
//!
//! A zonal function on S^{n-1} depends on the polar angle θ only. Sphere
//! integrals reduce to ∫_0^π f(θ) |S^{n-2}| sin^{n-2}θ dθ, which the
//! [`AngularGrid`] discretizes with a Gauss–Gegenbauer rule in u = cos θ.
//! For n = 2 the measure is dθ on the circle folded onto [0, π] (|S^0| = 2).

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{atan2, cos, fabs, pow, sin, sqrt};

use crate::error::{invalid, Error, Result};
use crate::quad::{gauss_jacobi, gauss_legendre, GaussRule};
use crate::special::gamma;

/// |B^n| = π^{n/2}/Γ(n/2+1).
pub fn unit_ball_volume(n: usize) -> f64 {
    let h = 0.5 * n as f64;
    pow(PI, h) / gamma(h + 1.0)
}

/// |S^{n-1}| = n|B^n|; n = 1 gives the two-point sphere S^0.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

/// Gegenbauer order ν = (n-2)/2.
pub fn gegenbauer_order(n: usize) -> f64 {
    0.5 * (n as f64 - 2.0)
}

/// C_k^ν(t) by the three-term recurrence (ν > 0).
pub fn gegenbauer(k: usize, nu: f64, t: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = 2.0 * nu * t;
    for j in 1..k {
        let jf = j as f64;
        let p2 = (2.0 * (jf + nu) * t * p1 - (jf + 2.0 * nu - 1.0) * p0) / (jf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Zonal harmonic Z_k(t): Gegenbauer C_k^{(n-2)/2} for n ≥ 3, Chebyshev T_k for n = 2.
pub fn zonal_eval(k: usize, n: usize, t: f64) -> f64 {
    let mut out = vec![0.0; k + 1];
    zonal_eval_all(n, t, &mut out);
    out[k]
}

/// Fill `out[k] = Z_k(t)` for k < out.len().
pub fn zonal_eval_all(n: usize, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    if n == 2 {
        out[1] = t;
        for k in 2..out.len() {
            out[k] = 2.0 * t * out[k - 1] - out[k - 2];
        }
        return;
    }
    let nu = gegenbauer_order(n);
    out[1] = 2.0 * nu * t;
    for j in 1..out.len() - 1 {
        let jf = j as f64;
        out[j + 1] = (2.0 * (jf + nu) * t * out[j] - (jf + 2.0 * nu - 1.0) * out[j - 1]) / (jf + 1.0);
    }
}

/// Z_k(1): 1 for n = 2, Γ(n-2+k)/(k! Γ(n-2)) otherwise.
pub fn zonal_at_one(k: usize, n: usize) -> f64 {
    if n == 2 {
        return 1.0;
    }
    // (2ν)_k / k! as a running product
    let a = n as f64 - 2.0;
    let mut v = 1.0;
    for j in 0..k {
        v *= (a + j as f64) / (j as f64 + 1.0);
    }
    v
}

/// Polar-angle quadrature for zonal integrals over S^{n-1}.
///
/// Nodes are sorted by increasing θ. Each node owns a cell [edges[i], edges[i+1]]
/// of sphere measure exactly `weights[i]`; cells give the staircase reading of
/// node-sampled data used for sampling and for spectral cell integrals.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularGrid {
    n: usize,
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    weights: Vec<f64>,
    edges: Vec<f64>,
}

/// Gauss nodes and weights for the polar measure |S^{n-2}| sin^{n-2}θ dθ.
pub fn angular_grid(n: usize, m: usize) -> Result<AngularGrid> {
    if n < 2 {
        return Err(invalid("dimension must be at least 2"));
    }
    if m == 0 {
        return Err(invalid("angular grid needs at least one node"));
    }
    let a = 0.5 * (n as f64 - 3.0);
    let rule = gauss_jacobi(m, a, a)?;
    let s = unit_sphere_area(n - 1);
    // u ascending -> θ descending; reverse so θ ascends
    let mut theta = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for i in (0..m).rev() {
        let u = rule.nodes[i];
        theta.push(atan2(sqrt((1.0 - u) * (1.0 + u)), u));
        weights.push(rule.weights[i] * s);
    }
    AngularGrid::from_parts(n, theta, weights)
}

impl AngularGrid {
    /// Build from explicit nodes and weights (e.g. after deserialization).
    pub fn from_parts(n: usize, theta: Vec<f64>, weights: Vec<f64>) -> Result<AngularGrid> {
        if n < 2 {
            return Err(invalid("dimension must be at least 2"));
        }
        if theta.is_empty() || theta.len() != weights.len() {
            return Err(invalid("nodes and weights must be non-empty and of equal length"));
        }
        for w in theta.windows(2) {
            if !(w[0] < w[1]) {
                return Err(invalid("nodes must be strictly increasing"));
            }
        }
        if !(theta[0] > 0.0 && theta[theta.len() - 1] < PI) {
            return Err(invalid("nodes must lie in (0, pi)"));
        }
        if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return Err(invalid("weights must be positive and finite"));
        }
        let cos_theta = theta.iter().map(|t| cos(*t)).collect();
        let sin_theta = theta.iter().map(|t| sin(*t)).collect();
        let edges = cell_edges(n, &theta, &weights)?;
        Ok(AngularGrid { n, theta, cos_theta, sin_theta, weights, edges })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_theta
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Cell boundaries in θ, length m+1, from 0 to π.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    /// Σ_i w_i f(θ_i) in node order.
    pub fn integrate(&self, mut f: impl FnMut(usize) -> f64) -> f64 {
        let mut s = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            s += w * f(i);
        }
        s
    }

    /// Index of the cell containing polar angle θ.
    pub fn cell_of(&self, theta: f64) -> usize {
        let i = self.edges.partition_point(|&e| e <= theta);
        i.clamp(1, self.len()) - 1
    }

    /// Sphere measure of the polar cap θ' ≤ θ.
    pub fn cap_measure(&self, theta: f64) -> f64 {
        cap_measure(self.n, theta)
    }

    /// Largest degree whose products are still integrated exactly.
    pub fn max_exact_degree(&self) -> usize {
        self.len() - 1
    }
}

/// |S^{n-2}| ∫_0^θ sin^{n-2}.
pub fn cap_measure(n: usize, theta: f64) -> f64 {
    cap_measure_with(n, theta, &gauss_legendre(40))
}

pub(crate) fn cap_measure_with(n: usize, theta: f64, g: &GaussRule) -> f64 {
    if n == 2 {
        return 2.0 * theta;
    }
    let s = unit_sphere_area(n - 1);
    let p = (n - 2) as f64;
    let (t, flip) = if theta > 0.5 * PI { (PI - theta, true) } else { (theta, false) };
    let part = g.integrate(0.0, t, |x| pow(sin(x), p));
    if flip {
        let half = g.integrate(0.0, 0.5 * PI, |x| pow(sin(x), p));
        s * (2.0 * half - part)
    } else {
        s * part
    }
}

fn cell_edges(n: usize, theta: &[f64], weights: &[f64]) -> Result<Vec<f64>> {
    let m = theta.len();
    let mut edges = Vec::with_capacity(m + 1);
    edges.push(0.0);
    let total: f64 = weights.iter().sum();
    let full = unit_sphere_area(n);
    let rule = gauss_legendre(40);
    let mut cum = 0.0;
    for i in 0..m - 1 {
        cum += weights[i];
        let target = cum * full / total;
        let (mut lo, mut hi) = (theta[i], theta[i + 1]);
        let mut x = 0.5 * (lo + hi);
        let mut done = false;
        for _ in 0..100 {
            let fx = cap_measure_with(n, x, &rule) - target;
            if fx == 0.0 {
                done = true;
                break;
            }
            if fx > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = if n == 2 { 2.0 } else { unit_sphere_area(n - 1) * pow(sin(x), (n - 2) as f64) };
            let mut nx = x - fx / d;
            if !(nx > lo && nx < hi) {
                nx = 0.5 * (lo + hi);
            }
            if fabs(nx - x) <= 1e-16 * (1.0 + x) || hi - lo <= 4.0 * f64::EPSILON * hi {
                x = nx;
                done = true;
                break;
            }
            x = nx;
        }
        if !done {
            return Err(Error::NonConvergence("cell edge inversion".into()));
        }
        edges.push(x);
    }
    edges.push(PI);
    Ok(edges)
}

/// A zonal function sampled at the nodes of an [`AngularGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalFn {
    pub grid: Arc<AngularGrid>,
    pub values: Vec<f64>,
}

impl ZonalFn {
    pub fn new(grid: Arc<AngularGrid>, values: Vec<f64>) -> Result<ZonalFn> {
        if values.len() != grid.len() {
            return Err(invalid("sample count does not match grid"));
        }
        Ok(ZonalFn { grid, values })
    }

    pub fn from_fn(grid: Arc<AngularGrid>, mut f: impl FnMut(f64) -> f64) -> ZonalFn {
        let values = grid.theta().iter().map(|t| f(*t)).collect();
        ZonalFn { grid, values }
    }

    pub fn zeros(grid: Arc<AngularGrid>) -> ZonalFn {
        let values = vec![0.0; grid.len()];
        ZonalFn { grid, values }
    }

    /// ∫ f dξ.
    pub fn integral(&self) -> f64 {
        self.grid.integrate(|i| self.values[i])
    }

    /// ∫ f(ξ) (ξ·e_n) dξ.
    pub fn first_moment(&self) -> f64 {
        let c = self.grid.cos_theta();
        self.grid.integrate(|i| self.values[i] * c[i])
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> ZonalFn {
        ZonalFn { grid: self.grid.clone(), values: self.values.iter().map(|v| f(*v)).collect() }
    }

    pub fn sub(&self, other: &ZonalFn) -> ZonalFn {
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        ZonalFn { grid: self.grid.clone(), values }
    }
}

/// ‖f‖² = Σ w_i f(θ_i)².
pub fn l2_norm_sq(f: &ZonalFn) -> f64 {
    f.grid.integrate(|i| f.values[i] * f.values[i])
}

/// Zonal basis Z_0..Z_K tabulated on a grid, with quadrature norms ‖Z_k‖².
#[derive(Debug, Clone)]
pub struct GegenbauerBasis {
    pub n: usize,
    pub nu: f64,
    pub max_degree: usize,
    values: Vec<f64>,
    norms_sq: Vec<f64>,
}

impl GegenbauerBasis {
    pub fn new(grid: &AngularGrid, max_degree: usize) -> Result<GegenbauerBasis> {
        let m = grid.len();
        if max_degree > grid.max_exact_degree() {
            return Err(Error::GridTooCoarse { degree: max_degree, nodes: m });
        }
        let k1 = max_degree + 1;
        let mut values = vec![0.0; k1 * m];
        let mut row = vec![0.0; k1];
        for (i, u) in grid.cos_theta().iter().enumerate() {
            zonal_eval_all(grid.dim(), *u, &mut row);
            for k in 0..k1 {
                values[k * m + i] = row[k];
            }
        }
        let w = grid.weights();
        let norms_sq = (0..k1)
            .map(|k| {
                let z = &values[k * m..(k + 1) * m];
                z.iter().zip(w).map(|(z, w)| w * z * z).sum()
            })
            .collect();
        Ok(GegenbauerBasis { n: grid.dim(), nu: gegenbauer_order(grid.dim()), max_degree, values, norms_sq })
    }

    /// Z_k at all grid nodes.
    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.values.len() / (self.max_degree + 1);
        &self.values[k * m..(k + 1) * m]
    }

    pub fn norms_sq(&self) -> &[f64] {
        &self.norms_sq
    }
}

/// Expansion coefficients f ≈ Σ_k c_k Z_k.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoeffs {
    pub n: usize,
    pub coeffs: Vec<f64>,
    pub norms_sq: Vec<f64>,
}

impl SpectralCoeffs {
    pub fn max_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// ‖Y_k‖² = c_k² ‖Z_k‖².
    pub fn component_norm_sq(&self, k: usize) -> f64 {
        self.coeffs[k] * self.coeffs[k] * self.norms_sq[k]
    }

    pub fn energy(&self) -> f64 {
        (0..self.coeffs.len()).map(|k| self.component_norm_sq(k)).sum()
    }
}

/// Project f onto Z_0..Z_K with the grid's quadrature.
pub fn zonal_expand(f: &ZonalFn, max_degree: usize) -> Result<SpectralCoeffs> {
    let basis = GegenbauerBasis::new(&f.grid, max_degree)?;
    Ok(expand_with(&basis, f))
}

/// Projection with a precomputed basis on the same grid.
pub fn expand_with(basis: &GegenbauerBasis, f: &ZonalFn) -> SpectralCoeffs {
    let w = f.grid.weights();
    let coeffs = (0..=basis.max_degree)
        .map(|k| {
            let z = basis.row(k);
            let mut s = 0.0;
            for i in 0..w.len() {
                s += w[i] * f.values[i] * z[i];
            }
            s / basis.norms_sq()[k]
        })
        .collect();
    SpectralCoeffs { n: basis.n, coeffs, norms_sq: basis.norms_sq().to_vec() }
}

/// Evaluate Σ_k c_k Z_k at the nodes of `grid`.
pub fn zonal_synthesize(c: &SpectralCoeffs, grid: Arc<AngularGrid>) -> ZonalFn {
    let k1 = c.coeffs.len();
    let mut row = vec![0.0; k1];
    let values = grid
        .cos_theta()
        .iter()
        .map(|u| {
            zonal_eval_all(c.n, *u, &mut row);
            row.iter().zip(&c.coeffs).map(|(z, c)| z * c).sum()
        })
        .collect();
    ZonalFn { grid, values }
}

/// Exact cell integrals ∫_{cell i} Z_k dξ for k ≤ K, laid out k-major ((K+1) × m).
///
/// Uses d/du[(1-u²)^{ν+1/2} C^{ν+1}_{k-1}(u)] = -(k(k+2ν)/(2ν)) (1-u²)^{ν-1/2} C^ν_k(u),
/// and ∫cos kθ dθ = sin kθ / k on the circle.
pub fn cell_moments(grid: &AngularGrid, max_degree: usize) -> Vec<f64> {
    let m = grid.len();
    let n = grid.dim();
    let k1 = max_degree + 1;
    let mut out = vec![0.0; k1 * m];
    out[..m].copy_from_slice(grid.weights());
    let edges = grid.edges();
    if n == 2 {
        for k in 1..k1 {
            let kf = k as f64;
            for i in 0..m {
                out[k * m + i] = 2.0 * (sin(kf * edges[i + 1]) - sin(kf * edges[i])) / kf;
            }
        }
        return out;
    }
    let nu = gegenbauer_order(n);
    let s = unit_sphere_area(n - 1);
    // antiderivative in θ (θ increasing, u decreasing)
    let mut prim = vec![0.0; k1 * (m + 1)];
    let mut row = vec![0.0; k1];
    for (e, th) in edges.iter().enumerate() {
        let u = cos(*th);
        let sn = pow(sin(*th), n as f64 - 1.0);
        gegenbauer_all(nu + 1.0, u, &mut row[..k1 - 1]);
        for k in 1..k1 {
            let kf = k as f64;
            let c = 2.0 * nu / (kf * (kf + 2.0 * nu));
            prim[k * (m + 1) + e] = s * c * sn * row[k - 1];
        }
    }
    for k in 1..k1 {
        for i in 0..m {
            out[k * m + i] = prim[k * (m + 1) + i + 1] - prim[k * (m + 1) + i];
        }
    }
    out
}

fn gegenbauer_all(nu: f64, t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = 2.0 * nu * t;
    }
    for j in 1..out.len().saturating_sub(1) {
        let jf = j as f64;
        out[j + 1] = (2.0 * (jf + nu) * t * out[j] - (jf + 2.0 * nu - 1.0) * out[j - 1]) / (jf + 1.0);
    }
}
