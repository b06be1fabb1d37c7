//! Thresholds used by the verifiers and diagnostics.
//!
//! Everything numerical that turns into a yes/no verdict is pinned here.

/// Minimum grid resolution per axis.
pub const MIN_RESOLUTION: usize = 8;

/// Largest admissible fraction of degenerate (J <= 0) nodes for energy and
/// differential evaluation.
pub const MAX_DEGENERATE_FRACTION: f64 = 0.01;

/// Nodes whose weight exceeds this are left out of quadratures and their
/// area is reported instead.
pub const SINGULAR_WEIGHT_CAP: f64 = 1e12;

/// Minimum fraction of interior nodes that must carry a valid value for the
/// ∂̄ residual and the alignment residual.
pub const MIN_COVERAGE: f64 = 0.99;

/// Holomorphy threshold: residual <= this factor times the stencil
/// truncation estimate.
pub const HOLOMORPHY_FACTOR: f64 = 10.0;

/// Relative floor for the truncation estimate (rounding level of a
/// first-derivative stencil).
pub const HOLOMORPHY_ROUNDING: f64 = 1e-11;

/// `|h_w̄| ≤ this · |h_w|` counts as discretely conformal: the rounding
/// level of a finite-difference derivative on grids up to n = 1024.
pub const CONFORMAL_TOL: f64 = 1e-12;

/// Relative cutoff below which φ/|φ| is treated as undefined.
pub const PHI_ZERO_RELATIVE: f64 = 1e-12;

/// Relative accuracy of the bisection used to invert 𝓕.
pub const F_INVERSE_TOL: f64 = 1e-13;

/// Values of 𝓕 above this are classified as an infinite limit.
pub const M_INFINITE: f64 = 1e12;

/// Local error per step of the adaptive RK4 profile solver.
pub const ODE_LOCAL_TOL: f64 = 1e-10;

/// Divergence test on the tail of ∫ 𝓖: successive dyadic increments
/// shrinking by at least this ratio mean the integral converges.
pub const DIVERGENCE_RATIO: f64 = 0.9;

/// Relative growth of 𝕂 over the last dyadic stretch above which the
/// profile is declared not quasiconformal.
pub const QC_TAIL_GROWTH: f64 = 1e-3;

/// Default tolerance of the mutual-inverse check in the change-of-variables
/// comparison.
pub const PAIRING_TOL: f64 = 1e-2;

/// Inequality verdict tolerance: slack >= -tol * max(|lhs|, 1).
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Discretization-aware tolerance `max(floor, C h²)` for the energy-gap
/// verdicts. `C` was calibrated on the identity/perturbed-identity pairs at
/// n = 64, 128, 256.
pub const GAP_TOL_FLOOR: f64 = 1e-8;
pub const GAP_TOL_H2: f64 = 1.0;

/// Default Jacobian floor for accepted descent steps.
pub const J_FLOOR: f64 = 1e-3;

/// Jacobian floor used by the random boundary-identity map generator.
pub const GENERATOR_MIN_J: f64 = 0.1;

/// Half-step of the centered inner-variation derivative.
pub const INNER_DELTA: f64 = 1e-4;
