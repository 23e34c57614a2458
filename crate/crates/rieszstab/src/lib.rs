//! Riesz energies of rotationally symmetric sets.
//!
//! The crate evaluates, for the kernel φ_λ(x) = |x|^{-(n-λ)}/c_λ on ℝⁿ, the
//! Funk–Hecke multipliers of φ_λ on the sphere, the potential of the unit
//! ball, the first and second variations of the energy around the ball, the
//! Fraenkel asymmetry, and a mass-moving reduction that squeezes a set into
//! a thin annulus around the unit sphere. Everything is restricted to zonal
//! sets (invariant under rotations fixing e_n), stored as radial intervals
//! along the rays of a polar-angle quadrature grid.
//!
//! `no_std` with `alloc`; elementary functions come from `libm`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod families;
pub mod functionals;
pub mod funk_hecke;
pub mod kernel;
pub mod mc;
pub mod optimize;
pub mod quad;
pub mod rayset;
pub mod special;
pub mod sphere;
pub mod surgery;

pub use error::{Error, Result};
pub use families::{make_family, FamilyKind, FamilyOptions};
pub use functionals::{
    constraint_check, deficit, first_variation, second_variation, spherical_v, spherical_w, DeficitReport, Functionals,
    VariationMethod,
};
pub use funk_hecke::{
    beta0, beta_direct, beta_table, bk_radial, l_operator_norm, perturbation_multipliers, toy_gap, MultiplierTable,
    PerturbationMultipliers,
};
pub use kernel::{
    ball_energy, ball_gradient_at_sphere, ball_potential, riesz_constant, riesz_eval, BallPotential, KernelParams,
};
pub use mc::mc_energy;
pub use rayset::{ball_symmdiff, MassProfiles, RaySet};
pub use sphere::{
    angular_grid, l2_norm_sq, unit_ball_volume, unit_sphere_area, zonal_eval, zonal_expand, zonal_synthesize,
    AngularGrid, GegenbauerBasis, SpectralCoeffs, ZonalFn,
};
pub use surgery::{surgery_reduce, SurgeryReport};
