//! Distortion energies of planar mappings.
//!
//! The crate evaluates functionals of the form `∫ Ψ(𝕂(z,f)) λ(z) dz` for
//! discretized mappings of the unit disk, rectangles and truncated upper
//! half-planes, extracts Ahlfors–Hopf quadratic differentials and tests
//! them for holomorphy, verifies the Reich–Strebel family of inequalities,
//! and carries an ODE-generated family of half-plane diffeomorphisms with
//! constant Ahlfors–Hopf differential that serve as analytic oracles.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the batch
//! front end and anything touching the filesystem live in the companion
//! `quasiextremal-cli` crate.
//!
//! Assumptions that cannot be checked on a finite grid (Sobolev
//! regularity, the Lusin N and N⁻¹ properties, homotopy classes) are taken
//! for granted; verdicts produced here are numerical and carry explicit
//! tolerances.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(
    clippy::too_many_arguments,
    clippy::neg_cmp_op_on_partial_ord,
    clippy::needless_range_loop
)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cayley;
pub mod energy;
mod error;
pub mod fields;
pub mod hopf;
pub mod maps;
pub mod math;
pub mod minimizer;
pub mod ode;
pub mod reich_strebel;
pub mod tolerances;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub mod prelude {
    pub use crate::cayley::{cayley, cayley_derivative, cayley_inv, DiskMobius};
    pub use crate::energy::{ConvexProfile, WeightField};
    pub use crate::fields::grid::{DomainGrid, DomainKind, StencilOrder};
    pub use crate::fields::{MappingField, WirtingerField};
    pub use crate::hopf::QuadraticDifferentialField;
    pub use crate::{Complex64, Error, Result};
}
