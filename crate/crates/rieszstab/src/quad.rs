//! Gauss rules and piecewise Chebyshev tables.

use alloc::vec;
use alloc::vec::Vec;
use libm::{cos, fabs, hypot, pow, sqrt};

use crate::error::{invalid, Error, Result};
use crate::special::gamma;

/// Nodes and weights of a Gauss rule on [-1, 1], nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate f over [lo, hi] after the affine map (only meaningful for unit weight).
    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(c + h * x);
        }
        s * h
    }

    /// Mapped (node, weight) pairs on [lo, hi].
    pub fn mapped(&self, lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let h = 0.5 * (hi - lo);
        let c = 0.5 * (hi + lo);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, w * h))
    }
}

/// Monic three-term recurrence coefficients of the Jacobi weight (1-x)^a (1+x)^b.
fn jacobi_recurrence(m: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let mut alpha = vec![0.0; m + 1];
    let mut beta = vec![0.0; m + 1];
    let ab = a + b;
    for (k, al) in alpha.iter_mut().enumerate() {
        let kf = k as f64;
        *al = if k == 0 { (b - a) / (ab + 2.0) } else { (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0)) };
    }
    for (k, be) in beta.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        *be = if k == 1 {
            4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
        } else {
            let s = 2.0 * kf + ab;
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
        };
    }
    (alpha, beta)
}

/// Eigenvalues of a symmetric tridiagonal matrix and the first component of each
/// normalized eigenvector (implicit QL with Wilkinson-type shifts).
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], z: &mut [f64]) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = fabs(d[m]) + fabs(d[m + 1]);
                if fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NonConvergence("tridiagonal eigen solve".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { fabs(r) } else { -fabs(r) });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let bb = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * bb;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - bb;
                let f2 = z[i + 1];
                z[i + 1] = s * z[i] + c * f2;
                z[i] = c * z[i] - s * f2;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Gauss–Jacobi rule for ∫_{-1}^{1} f(x) (1-x)^a (1+x)^b dx, a, b > -1.
///
/// Golub–Welsch eigenvalues, then one Newton pass on the orthonormal
/// recurrence; weights from the Christoffel function.
pub fn gauss_jacobi(m: usize, a: f64, b: f64) -> Result<GaussRule> {
    if m == 0 {
        return Err(invalid("Gauss rule needs at least one node"));
    }
    if !(a > -1.0 && b > -1.0) {
        return Err(invalid("Jacobi exponents must exceed -1"));
    }
    let (alpha, beta) = jacobi_recurrence(m, a, b);
    let mu0 = pow(2.0, a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0);
    let mut d = alpha[..m].to_vec();
    let mut e: Vec<f64> = (1..=m).map(|k| if k < m { sqrt(beta[k]) } else { 0.0 }).collect();
    let mut z = vec![0.0; m];
    z[0] = 1.0;
    tridiagonal_ql(&mut d, &mut e, &mut z)?;
    let mut idx: Vec<usize> = (0..m).collect();
    idx.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let sb: Vec<f64> = (0..=m).map(|k| if k == 0 { 0.0 } else { sqrt(beta[k]) }).collect();
    let mut nodes = Vec::with_capacity(m);
    let mut weights = Vec::with_capacity(m);
    for &i in &idx {
        let mut x = d[i];
        for _ in 0..3 {
            let (p, dp, _) = orthonormal_eval(x, &alpha, &sb, mu0, m);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            if !(fabs(step) < 1e-6 * (1.0 + fabs(x))) {
                break;
            }
            x -= step;
            if fabs(step) < 1e-17 {
                break;
            }
        }
        let (_, _, sum) = orthonormal_eval(x, &alpha, &sb, mu0, m);
        nodes.push(x);
        weights.push(1.0 / sum);
    }
    Ok(GaussRule { nodes, weights })
}

fn orthonormal_eval(x: f64, alpha: &[f64], sb: &[f64], mu0: f64, m: usize) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut p = 1.0 / sqrt(mu0);
    let mut dp_prev = 0.0;
    let mut dp = 0.0;
    let mut sum = 0.0;
    for k in 0..m {
        sum += p * p;
        let pn = ((x - alpha[k]) * p - sb[k] * p_prev) / sb[k + 1];
        let dpn = (p + (x - alpha[k]) * dp - sb[k] * dp_prev) / sb[k + 1];
        p_prev = p;
        p = pn;
        dp_prev = dp;
        dp = dpn;
    }
    (p, dp, sum)
}

/// Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre(m: usize) -> GaussRule {
    gauss_jacobi(m, 0.0, 0.0).expect("Legendre rule is always well posed")
}

/// Piecewise Chebyshev interpolants of several functions sharing one panel partition.
#[derive(Debug, Clone)]
pub struct ChebTable {
    edges: Vec<f64>,
    deg: usize,
    nfun: usize,
    coef: Vec<f64>,
}

impl ChebTable {
    /// Sample `f(x, out)` at Chebyshev points of each panel; `out` has `nfun` slots.
    pub fn build(edges: Vec<f64>, deg: usize, nfun: usize, mut f: impl FnMut(f64, &mut [f64])) -> Self {
        let np = edges.len() - 1;
        let nn = deg + 1;
        let mut coef = vec![0.0; np * nfun * nn];
        let mut vals = vec![0.0; nn * nfun];
        let mut buf = vec![0.0; nfun];
        let cosm: Vec<f64> = (0..nn * nn)
            .map(|ij| {
                let (k, j) = (ij / nn, ij % nn);
                cos(core::f64::consts::PI * k as f64 * (j as f64 + 0.5) / nn as f64)
            })
            .collect();
        for p in 0..np {
            let (lo, hi) = (edges[p], edges[p + 1]);
            for j in 0..nn {
                let t = cosm[nn + j];
                f(0.5 * (lo + hi) + 0.5 * (hi - lo) * t, &mut buf);
                for q in 0..nfun {
                    vals[q * nn + j] = buf[q];
                }
            }
            for q in 0..nfun {
                let base = (p * nfun + q) * nn;
                for k in 0..nn {
                    let mut s = 0.0;
                    for j in 0..nn {
                        s += vals[q * nn + j] * cosm[k * nn + j];
                    }
                    let scale = if k == 0 { 1.0 } else { 2.0 };
                    coef[base + k] = scale * s / nn as f64;
                }
            }
        }
        ChebTable { edges, deg, nfun, coef }
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn lo(&self) -> f64 {
        self.edges[0]
    }

    pub fn hi(&self) -> f64 {
        self.edges[self.edges.len() - 1]
    }

    fn locate(&self, x: f64) -> usize {
        let np = self.edges.len() - 1;
        let i = self.edges.partition_point(|&e| e <= x);
        i.clamp(1, np) - 1
    }

    fn local(&self, p: usize, x: f64) -> f64 {
        let (lo, hi) = (self.edges[p], self.edges[p + 1]);
        ((2.0 * x - lo - hi) / (hi - lo)).clamp(-1.0, 1.0)
    }

    /// Value of function `q` at x (clamped into the table range).
    pub fn eval(&self, q: usize, x: f64) -> f64 {
        let p = self.locate(x);
        let t = self.local(p, x);
        let nn = self.deg + 1;
        clenshaw(&self.coef[(p * self.nfun + q) * nn..][..nn], t)
    }

    /// Values of all functions at x.
    pub fn eval_all(&self, x: f64, out: &mut [f64]) {
        let p = self.locate(x);
        let t = self.local(p, x);
        let nn = self.deg + 1;
        for (q, o) in out.iter_mut().enumerate().take(self.nfun) {
            *o = clenshaw(&self.coef[(p * self.nfun + q) * nn..][..nn], t);
        }
    }

    /// Replace function values by cumulative integrals from the left edge.
    pub fn cumulative(&self) -> ChebTable {
        let nn = self.deg + 1;
        let np = self.edges.len() - 1;
        let mut out = vec![0.0; np * self.nfun * (nn + 1)];
        let mut offset = vec![0.0; self.nfun];
        for p in 0..np {
            let half = 0.5 * (self.edges[p + 1] - self.edges[p]);
            for q in 0..self.nfun {
                let a = &self.coef[(p * self.nfun + q) * nn..][..nn];
                let dst = &mut out[(p * self.nfun + q) * (nn + 1)..][..nn + 1];
                let at = |k: usize| if k < nn { a[k] } else { 0.0 };
                for (k, d) in dst.iter_mut().enumerate().skip(1) {
                    let v = if k == 1 { at(0) - 0.5 * at(2) } else { (at(k - 1) - at(k + 1)) / (2.0 * k as f64) };
                    *d = v * half;
                }
                let mut left = 0.0;
                for (k, c) in dst.iter().enumerate().skip(1) {
                    left += if k % 2 == 0 { *c } else { -*c };
                }
                dst[0] = offset[q] - left;
                let mut right = 0.0;
                for c in dst.iter() {
                    right += *c;
                }
                offset[q] = right;
            }
        }
        ChebTable { edges: self.edges.clone(), deg: nn, nfun: self.nfun, coef: out }
    }
}

fn clenshaw(c: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

/// Geometric panel edges on [lo, hi] refined toward `lo` (ratio 1/2), stopping at
/// relative width `floor`, followed by uniform panels no wider than `hmax`.
pub fn graded_edges(lo: f64, hi: f64, floor: f64, hmax: f64, toward_lo: bool) -> Vec<f64> {
    let len = hi - lo;
    let mut d = Vec::new();
    let mut x = len;
    loop {
        d.push(x);
        x *= 0.5;
        if x <= floor * len {
            break;
        }
    }
    d.push(0.0);
    d.reverse();
    let mut refined = Vec::with_capacity(d.len() * 2);
    for w in d.windows(2) {
        let k = pieces(w[1] - w[0], hmax);
        for j in 0..k {
            refined.push(w[0] + (w[1] - w[0]) * j as f64 / k as f64);
        }
    }
    refined.push(len);
    if toward_lo {
        refined.iter().map(|t| lo + t).collect()
    } else {
        refined.iter().rev().map(|t| hi - t).collect()
    }
}

fn pieces(len: f64, hmax: f64) -> usize {
    let c = libm::ceil(len / hmax);
    if c < 1.0 {
        1
    } else {
        c as usize
    }
}
