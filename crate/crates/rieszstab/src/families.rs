//! One-parameter deformations of the unit ball.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;
use libm::{exp, pow, sqrt};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::rayset::RaySet;
use crate::sphere::{unit_sphere_area, AngularGrid, GegenbauerBasis};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Translate,
    Dilate,
    Ring,
    Squeeze,
    RandomZonal,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 5] =
        [FamilyKind::Translate, FamilyKind::Dilate, FamilyKind::Ring, FamilyKind::Squeeze, FamilyKind::RandomZonal];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Translate => "translate",
            FamilyKind::Dilate => "dilate",
            FamilyKind::Ring => "ring",
            FamilyKind::Squeeze => "squeeze",
            FamilyKind::RandomZonal => "random_zonal",
        }
    }
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<FamilyKind> {
        FamilyKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(String::from("unknown family: ") + s))
    }
}

/// Options for [`make_family`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyOptions {
    /// Required for random_zonal.
    pub seed: Option<u64>,
    /// Highest degree of a random_zonal profile.
    pub max_degree: usize,
}

impl Default for FamilyOptions {
    fn default() -> Self {
        FamilyOptions { seed: None, max_degree: 8 }
    }
}

/// c with ‖M_+‖² + ‖M_-‖² = ε² when M_± ≡ cε.
pub fn ring_constant(n: usize) -> f64 {
    1.0 / sqrt(2.0 * unit_sphere_area(n))
}

/// c with ‖cε(n(ξ·e_n)² - 1)‖ = ε.
pub fn squeeze_constant(n: usize) -> f64 {
    let nf = n as f64;
    1.0 / sqrt(2.0 * (nf - 1.0) / (nf + 2.0) * unit_sphere_area(n))
}

/// Star-shaped set whose ray masses are M(θ_i): R = (1 + nM)^{1/n}.
pub fn star_from_profile(grid: Arc<AngularGrid>, m: &[f64]) -> Result<RaySet> {
    let nf = grid.dim() as f64;
    let mut radii = Vec::with_capacity(m.len());
    for &v in m {
        let base = 1.0 + nf * v;
        if !(base > 0.0) {
            return Err(invalid("profile too large: the radial map is not invertible"));
        }
        radii.push(pow(base, 1.0 / nf));
    }
    RaySet::star(grid, &radii)
}

/// Band-limited zonal profile Σ_{k=2}^{K} a_k Z_k with ‖M‖ = ε.
pub fn random_zonal_profile(grid: &AngularGrid, eps: f64, seed: u64, max_degree: usize) -> Result<Vec<f64>> {
    if max_degree < 2 {
        return Err(invalid("random profiles need degree at least 2"));
    }
    let basis = GegenbauerBasis::new(grid, max_degree)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let m = grid.len();
    loop {
        let mut vals = vec![0.0; m];
        for k in 2..=max_degree {
            let g: f64 = StandardNormal.sample(&mut rng);
            let a = g / (sqrt(basis.norms_sq()[k]) * (k as f64 - 1.0));
            for (v, z) in vals.iter_mut().zip(basis.row(k)) {
                *v += a * z;
            }
        }
        let norm = sqrt(grid.integrate(|i| vals[i] * vals[i]));
        if norm > 1e-12 {
            for v in vals.iter_mut() {
                *v *= eps / norm;
            }
            return Ok(vals);
        }
    }
}

/// The deformation `kind` of B^n at parameter ε ∈ [0, 0.2].
pub fn make_family(kind: FamilyKind, grid: Arc<AngularGrid>, eps: f64, opts: FamilyOptions) -> Result<RaySet> {
    if !(0.0..=0.2).contains(&eps) {
        return Err(invalid("eps must lie in [0, 0.2]"));
    }
    let n = grid.dim();
    let nf = n as f64;
    match kind {
        FamilyKind::Translate => {
            // the ball -ε e_n + B^n
            let radii: Vec<f64> = grid
                .cos_theta()
                .iter()
                .zip(grid.sin_theta())
                .map(|(c, s)| -eps * c + sqrt(1.0 - eps * eps * s * s))
                .collect();
            RaySet::star(grid, &radii)
        }
        FamilyKind::Dilate => RaySet::star(grid.clone(), &vec![exp(eps); grid.len()]),
        FamilyKind::Ring => {
            let mass = ring_constant(n) * eps;
            if eps == 0.0 {
                return Ok(RaySet::ball(grid));
            }
            if nf * mass >= 1.0 {
                return Err(invalid("ring too wide"));
            }
            let outer = pow(1.0 + nf * mass, 1.0 / nf);
            let inner = pow(1.0 - nf * mass, 1.0 / nf);
            let m = grid.len();
            RaySet::new(grid, vec![vec![(0.0, inner), (1.0, outer)]; m])
        }
        FamilyKind::Squeeze => {
            let c = squeeze_constant(n) * eps;
            let m: Vec<f64> = grid.cos_theta().iter().map(|u| c * (nf * u * u - 1.0)).collect();
            star_from_profile(grid, &m)
        }
        FamilyKind::RandomZonal => {
            let seed = opts.seed.ok_or_else(|| invalid("random_zonal needs a seed"))?;
            let m = random_zonal_profile(&grid, eps, seed, opts.max_degree)?;
            star_from_profile(grid, &m)
        }
    }
}

/// Ball with a random zonal boundary ripple of size `amp`, a detached piece
/// outside and a hole inside, each over a random polar cap.
pub fn perturbed_set(grid: Arc<AngularGrid>, amp: f64, seed: u64) -> Result<RaySet> {
    use rand::Rng;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let m = random_zonal_profile(&grid, amp, rng.gen(), 6)?;
    let n = grid.dim() as f64;
    let cap_out = rng.gen_range(0.05..0.4);
    let cap_in = rng.gen_range(0.05..0.4);
    let r_out = rng.gen_range(1.15..1.6);
    let w_out = rng.gen_range(0.005..0.03);
    let r_in = rng.gen_range(0.4..0.85);
    let w_in = rng.gen_range(0.005..0.03);
    let north = rng.gen_bool(0.5);
    let rays = grid
        .theta()
        .iter()
        .zip(&m)
        .map(|(&th, &v)| {
            let base = pow((1.0 + n * v).max(0.5), 1.0 / n);
            let polar = if north { th } else { core::f64::consts::PI - th };
            let mut ivs = vec![(0.0, base)];
            if polar < cap_in && r_in + w_in < base {
                ivs = vec![(0.0, r_in), (r_in + w_in, base)];
            }
            if th < cap_out && r_out > base {
                ivs.push((r_out, r_out + w_out));
            }
            ivs
        })
        .collect();
    RaySet::new(grid, rays)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::{angular_grid, unit_ball_volume};

    #[test]
    fn volumes_and_norms() {
        let g = Arc::new(angular_grid(3, 64).unwrap());
        let bv = unit_ball_volume(3);
        let opts = FamilyOptions { seed: Some(7), ..Default::default() };
        for kind in [FamilyKind::Ring, FamilyKind::Squeeze, FamilyKind::RandomZonal] {
            let a = make_family(kind, g.clone(), 0.01, opts).unwrap();
            assert!((a.volume() - bv).abs() < 1e-10, "{kind}");
            let mp = a.mass_profiles();
            let norm = mp.norm_sq_plus() + mp.norm_sq_minus();
            assert!((norm - 1e-4).abs() < 1e-10, "{kind} {norm}");
        }
        let t = make_family(FamilyKind::Translate, g.clone(), 0.05, opts).unwrap();
        assert!((t.volume() - bv).abs() < 1e-12);
        assert!(make_family(FamilyKind::RandomZonal, g, 0.01, FamilyOptions::default()).is_err());
        assert_eq!("squeeze".parse::<FamilyKind>().unwrap(), FamilyKind::Squeeze);
    }
}
