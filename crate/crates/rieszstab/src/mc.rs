//! Monte-Carlo pair integrals ∬ s(x) s(y) φ_λ(x - y) over signed zonal regions.
//!
//! Points are drawn uniformly from the cell reading of a [`RaySet`]. The
//! generator is ChaCha20 seeded from `seed`, with batch b of 2^14 pairs on
//! stream b; batches are reduced in index order, so results depend only on
//! (seed, samples).

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use libm::{pow, sin, sqrt};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Result};
use crate::functionals::{signed_pieces, Estimate};
use crate::kernel::KernelParams;
use crate::rayset::{pown, RaySet};
use crate::sphere::{unit_sphere_area, AngularGrid};

const BATCH: u64 = 1 << 14;
/// Radius of the near-diagonal ball when pair sampling has infinite variance.
pub const NEAR_RADIUS: f64 = 0.25;

/// A signed union of radial pieces, one list per cell.
#[derive(Debug, Clone)]
pub struct Region {
    grid: Arc<AngularGrid>,
    cells: Vec<Vec<(f64, f64, f64)>>,
    flat: Vec<(usize, f64, f64, f64)>,
    cum: Vec<f64>,
    total: f64,
}

impl Region {
    fn from_cells(grid: Arc<AngularGrid>, cells: Vec<Vec<(f64, f64, f64)>>) -> Region {
        let n = grid.dim();
        let mut flat = Vec::new();
        let mut cum = Vec::new();
        let mut total = 0.0;
        for (i, ps) in cells.iter().enumerate() {
            for &(a, b, s) in ps {
                total += grid.weights()[i] * (pown(b, n) - pown(a, n)) / n as f64;
                flat.push((i, a, b, s));
                cum.push(total);
            }
        }
        Region { grid, cells, flat, cum, total }
    }

    /// The set itself with sign +1.
    pub fn set(a: &RaySet) -> Region {
        let cells = a.rays().iter().map(|v| v.iter().map(|&(x, y)| (x, y, 1.0)).collect()).collect();
        Region::from_cells(a.grid().clone(), cells)
    }

    /// B \ A with sign +1 and A \ B with sign -1.
    pub fn symmetric_difference(a: &RaySet) -> Region {
        let cells = a.rays().iter().map(|v| signed_pieces(v)).collect();
        Region::from_cells(a.grid().clone(), cells)
    }

    pub fn volume(&self) -> f64 {
        self.total
    }

    fn sign_at(&self, x: &[f64]) -> f64 {
        let n = x.len();
        let z = x[n - 1];
        let rho2: f64 = x[..n - 1].iter().map(|v| v * v).sum();
        let r = sqrt(rho2 + z * z);
        let th = libm::atan2(sqrt(rho2), z);
        for &(a, b, s) in &self.cells[self.grid.cell_of(th)] {
            if r >= a && r < b {
                return s;
            }
        }
        0.0
    }

    /// Uniform point of the region written into `x`; returns its sign.
    fn sample(&self, rng: &mut ChaCha20Rng, x: &mut [f64]) -> f64 {
        let n = x.len();
        let t = rng.gen::<f64>() * self.total;
        let j = self.cum.partition_point(|&c| c <= t).min(self.flat.len() - 1);
        let (cell, a, b, sign) = self.flat[j];
        let u: f64 = rng.gen();
        let r = pow(pown(a, n) + u * (pown(b, n) - pown(a, n)), 1.0 / n as f64);
        let e = self.grid.edges();
        let (lo, hi) = (e[cell], e[cell + 1]);
        let th = if n == 2 {
            lo + rng.gen::<f64>() * (hi - lo)
        } else {
            let smax = if lo <= 0.5 * core::f64::consts::PI && hi >= 0.5 * core::f64::consts::PI {
                1.0
            } else {
                sin(lo).max(sin(hi))
            };
            loop {
                let th = lo + rng.gen::<f64>() * (hi - lo);
                let acc = pown(sin(th) / smax, n - 2);
                if rng.gen::<f64>() < acc {
                    break th;
                }
            }
        };
        let st = sin(th);
        unit_vector(rng, &mut x[..n - 1]);
        for v in x[..n - 1].iter_mut() {
            *v *= r * st;
        }
        x[n - 1] = r * libm::cos(th);
        sign
    }
}

/// Uniform direction in ℝ^d (d = 1 gives ±1).
fn unit_vector(rng: &mut ChaCha20Rng, out: &mut [f64]) {
    loop {
        let mut s = 0.0;
        for v in out.iter_mut() {
            *v = StandardNormal.sample(rng);
            s += *v * *v;
        }
        if s > 1e-300 {
            let inv = 1.0 / sqrt(s);
            for v in out.iter_mut() {
                *v *= inv;
            }
            return;
        }
    }
}

#[derive(Default, Clone, Copy)]
struct Moments {
    count: f64,
    sum: f64,
    sumsq: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1.0;
        self.sum += v;
        self.sumsq += v * v;
    }

    fn merge(&mut self, o: Moments) {
        self.count += o.count;
        self.sum += o.sum;
        self.sumsq += o.sumsq;
    }

    fn mean_stderr(&self) -> (f64, f64) {
        let m = self.sum / self.count;
        let var = (self.sumsq / self.count - m * m).max(0.0) * self.count / (self.count - 1.0).max(1.0);
        (m, sqrt(var / self.count))
    }
}

fn batches(samples: u64, seed: u64, mut f: impl FnMut(&mut ChaCha20Rng, u64, &mut Moments)) -> Moments {
    let mut total = Moments::default();
    let nb = samples.div_ceil(BATCH);
    for b in 0..nb {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(b);
        let count = BATCH.min(samples - b * BATCH);
        let mut m = Moments::default();
        f(&mut rng, count, &mut m);
        total.merge(m);
    }
    total
}

/// ∬_{R×R} s(x) s(y) φ_λ(x - y) dx dy with its standard error.
///
/// Plain pair sampling when λ > n/2; otherwise pairs closer than
/// [`NEAR_RADIUS`] are replaced by x uniform in R and x + z with z drawn from
/// the normalized kernel on that ball.
pub fn pair_integral(region: &Region, params: &KernelParams, samples: u64, seed: u64) -> Result<Estimate> {
    let n = params.n;
    if region.grid.dim() != n {
        return Err(invalid("region dimension differs from the kernel's"));
    }
    if samples < 2 {
        return Err(invalid("need at least two samples"));
    }
    let d = region.volume();
    if d == 0.0 {
        return Ok(Estimate { value: 0.0, error: 0.0 });
    }
    let split = params.lambda <= 0.5 * n as f64;
    let h = if split { NEAR_RADIUS } else { 0.0 };
    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let far = batches(samples, seed, |rng, count, m| {
        for _ in 0..count {
            let sx = region.sample(rng, &mut x);
            let sy = region.sample(rng, &mut y);
            let dist = sqrt(x.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
            m.push(if dist >= h && dist > 0.0 { sx * sy * params.phi_of_distance(dist) } else { 0.0 });
        }
    });
    let (fm, fs) = far.mean_stderr();
    let mut value = d * d * fm;
    let mut var = (d * d * fs) * (d * d * fs);
    if split {
        let ih = unit_sphere_area(n) * pow(h, params.lambda) / (params.lambda * params.c);
        let mut z = vec![0.0; n];
        let near = batches(samples, seed ^ 0x9e37_79b9_7f4a_7c15, |rng, count, m| {
            for _ in 0..count {
                let sx = region.sample(rng, &mut x);
                let rz = h * pow(rng.gen::<f64>(), 1.0 / params.lambda);
                unit_vector(rng, &mut z);
                for (yv, (xv, zv)) in y.iter_mut().zip(x.iter().zip(&z)) {
                    *yv = xv + rz * zv;
                }
                m.push(sx * region.sign_at(&y));
            }
        });
        let (nm, ns) = near.mean_stderr();
        value += d * ih * nm;
        var += (d * ih * ns) * (d * ih * ns);
    }
    Ok(Estimate { value, error: sqrt(var) })
}

/// 𝓔_λ(A) = ∬_{A×A} φ_λ(x - y) by sampling.
pub fn mc_energy(a: &RaySet, params: &KernelParams, samples: u64, seed: u64) -> Result<Estimate> {
    pair_integral(&Region::set(a), params, samples, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::angular_grid;
    use core::f64::consts::PI;

    #[test]
    fn newton_ball_energy_and_determinism() {
        let p = KernelParams::new(3, 2.0).unwrap();
        let b = RaySet::ball(Arc::new(angular_grid(3, 64).unwrap()));
        let e = mc_energy(&b, &p, 400_000, 5).unwrap();
        assert!((e.value - 8.0 * PI / 15.0).abs() < 4.0 * e.error, "{:?}", e);
        assert_eq!(e, mc_energy(&b, &p, 400_000, 5).unwrap());
    }

    #[test]
    fn split_estimator_small_lambda() {
        // n=3, λ=1.2 uses the near/far split; compare with the closed form
        let p = KernelParams::new(3, 1.2).unwrap();
        let b = RaySet::ball(Arc::new(angular_grid(3, 64).unwrap()));
        let e = mc_energy(&b, &p, 400_000, 9).unwrap();
        let exact = crate::kernel::ball_energy(&p).unwrap();
        assert!((e.value - exact).abs() < 4.0 * e.error, "{:?} {exact}", e);
    }
}
