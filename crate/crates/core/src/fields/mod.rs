//! Mapping fields on grids and their pointwise derivative quantities.
//!
//! Wirtinger derivatives follow `f_z = (f_x − i f_y)/2`, `f_z̄ = (f_x + i f_y)/2`;
//! the Jacobian is `J = |f_z|² − |f_z̄|²`, the Beltrami coefficient
//! `μ = f_z̄ / f_z`, and the distortion
//! `𝕂 = (|f_z|² + |f_z̄|²) / (|f_z|² − |f_z̄|²) = (1 + |μ|²)/(1 − |μ|²)`.

pub mod grid;

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::math::pairwise_sum;
use crate::{Error, Result};
use grid::{DomainGrid, StencilOrder};

const NAN_C: Complex64 = Complex64::new(f64::NAN, f64::NAN);

/// A mapping sampled at the inside nodes of a grid.
///
/// `values` has one entry per lattice node; entries outside the mask are
/// NaN. The boundary trace is a copy of the values at the grid's boundary
/// nodes.
#[derive(Clone, Debug)]
pub struct MappingField {
    grid: Arc<DomainGrid>,
    values: Vec<Complex64>,
    boundary_trace: Vec<Complex64>,
}

impl MappingField {
    pub fn from_fn<F: FnMut(Complex64) -> Complex64>(grid: Arc<DomainGrid>, mut f: F) -> Result<Self> {
        let mut values = vec![NAN_C; grid.len()];
        for &k in grid.nodes() {
            values[k] = f(grid.point(k));
        }
        Self::from_values(grid, values)
    }

    /// Wrap per-node values; entries outside the mask are ignored and
    /// replaced by NaN.
    pub fn from_values(grid: Arc<DomainGrid>, mut values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Data(alloc::format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        let mut bad = 0usize;
        for k in 0..values.len() {
            if grid.is_inside(k) {
                if !(values[k].re.is_finite() && values[k].im.is_finite()) {
                    bad += 1;
                }
            } else {
                values[k] = NAN_C;
            }
        }
        if bad > 0 {
            return Err(Error::Data(alloc::format!("{bad} non-finite value(s) at inside nodes")));
        }
        let boundary_trace = grid.boundary().iter().map(|&k| values[k]).collect();
        Ok(MappingField {
            grid,
            values,
            boundary_trace,
        })
    }

    pub fn identity(grid: Arc<DomainGrid>) -> Self {
        Self::from_fn(grid, |z| z).expect("identity is finite")
    }

    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
    pub fn value(&self, k: usize) -> Complex64 {
        self.values[k]
    }
    pub fn boundary_trace(&self) -> &[Complex64] {
        &self.boundary_trace
    }

    /// Overwrite finite values at inside nodes; callers keep off the boundary.
    pub(crate) fn set_interior(&mut self, nodes: &[usize], values: &[Complex64]) {
        for (&k, &v) in nodes.iter().zip(values) {
            debug_assert!(self.grid.is_inside(k) && v.re.is_finite() && v.im.is_finite());
            self.values[k] = v;
        }
    }

    /// Bicubic sample at an arbitrary point (see [`DomainGrid::sample`]).
    pub fn sample(&self, p: Complex64) -> Option<Complex64> {
        self.grid.sample(&self.values, p)
    }

    /// New field with each inside value replaced by `f(z, value)`.
    pub fn map_values<F: FnMut(Complex64, Complex64) -> Complex64>(&self, mut f: F) -> Result<Self> {
        let mut values = self.values.clone();
        for &k in self.grid.nodes() {
            values[k] = f(self.grid.point(k), self.values[k]);
        }
        Self::from_values(self.grid.clone(), values)
    }

    /// Sup-norm distance to the identity over inside nodes.
    pub fn sup_distance_to_identity(&self) -> f64 {
        self.grid
            .nodes()
            .iter()
            .map(|&k| (self.values[k] - self.grid.point(k)).norm())
            .fold(0.0, f64::max)
    }

    /// Largest difference between two traces on the same grid.
    pub fn boundary_gap(&self, other: &MappingField) -> Result<f64> {
        if self.boundary_trace.len() != other.boundary_trace.len() {
            return Err(Error::Pairing("boundary traces have different lengths".into()));
        }
        Ok(self
            .boundary_trace
            .iter()
            .zip(&other.boundary_trace)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

/// Per-node `f_z`, `f_z̄` and `J`.
#[derive(Clone, Debug)]
pub struct WirtingerField {
    grid: Arc<DomainGrid>,
    pub fz: Vec<Complex64>,
    pub fzbar: Vec<Complex64>,
    pub jac: Vec<f64>,
}

impl WirtingerField {
    /// Assemble from per-node `(f_z, f_z̄)`; `J` is derived here.
    pub fn from_parts(grid: Arc<DomainGrid>, fz: Vec<Complex64>, fzbar: Vec<Complex64>) -> Self {
        let jac = fz
            .iter()
            .zip(&fzbar)
            .map(|(a, b)| a.norm_sqr() - b.norm_sqr())
            .collect();
        WirtingerField { grid, fz, fzbar, jac }
    }

    /// Exact derivatives from a closure returning `(f_z, f_z̄)` at a point.
    pub fn from_fn<F: FnMut(Complex64) -> (Complex64, Complex64)>(grid: Arc<DomainGrid>, mut f: F) -> Self {
        let mut fz = vec![NAN_C; grid.len()];
        let mut fzbar = vec![NAN_C; grid.len()];
        for &k in grid.nodes() {
            let (a, b) = f(grid.point(k));
            fz[k] = a;
            fzbar[k] = b;
        }
        Self::from_parts(grid, fz, fzbar)
    }

    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }

    /// Smallest Jacobian over inside nodes (NaN nodes are skipped).
    pub fn min_jacobian(&self) -> f64 {
        self.grid
            .nodes()
            .iter()
            .map(|&k| self.jac[k])
            .filter(|j| !j.is_nan())
            .fold(f64::INFINITY, f64::min)
    }
}

/// Finite-difference Wirtinger derivatives of `f`.
pub fn wirtinger_derivatives(f: &MappingField, order: StencilOrder) -> WirtingerField {
    let g = f.grid();
    let mut fz = vec![NAN_C; g.len()];
    let mut fzbar = vec![NAN_C; g.len()];
    let i = Complex64::i();
    for &k in g.nodes() {
        let (fx, fy) = g.gradient(f.values(), k, order);
        fz[k] = (fx - i * fy) * 0.5;
        fzbar[k] = (fx + i * fy) * 0.5;
    }
    WirtingerField::from_parts(g.clone(), fz, fzbar)
}

#[derive(Clone, Debug)]
pub struct BeltramiField {
    grid: Arc<DomainGrid>,
    pub mu: Vec<Complex64>,
    /// Inside nodes with `f_z ≠ 0`.
    pub valid: Vec<bool>,
}

impl BeltramiField {
    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }
}

pub fn beltrami(w: &WirtingerField) -> BeltramiField {
    let g = w.grid();
    let mut mu = vec![NAN_C; g.len()];
    let mut valid = vec![false; g.len()];
    for &k in g.nodes() {
        let a = w.fz[k];
        if a.norm_sqr() > 0.0 && a.is_finite() && w.fzbar[k].is_finite() {
            mu[k] = w.fzbar[k] / a;
            valid[k] = true;
        }
    }
    BeltramiField {
        grid: g.clone(),
        mu,
        valid,
    }
}

#[derive(Clone, Debug)]
pub struct DistortionField {
    grid: Arc<DomainGrid>,
    /// `𝕂` per node, NaN where degenerate or outside.
    pub k: Vec<f64>,
    /// Inside nodes where `𝕂` is undefined.
    pub degenerate: Vec<bool>,
}

impl DistortionField {
    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }

    pub fn degenerate_count(&self) -> usize {
        self.grid.nodes().iter().filter(|&&k| self.degenerate[k]).count()
    }

    pub fn degenerate_fraction(&self) -> f64 {
        self.degenerate_count() as f64 / self.grid.nodes().len().max(1) as f64
    }

    /// Largest `𝕂` over nondegenerate nodes.
    pub fn sup(&self) -> f64 {
        self.grid
            .nodes()
            .iter()
            .filter(|&&k| !self.degenerate[k])
            .map(|&k| self.k[k])
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[inline]
pub(crate) fn distortion_at(fz: Complex64, fzbar: Complex64) -> Option<f64> {
    let a = fz.norm_sqr();
    let b = fzbar.norm_sqr();
    let j = a - b;
    if j > 0.0 {
        Some((a + b) / j)
    } else {
        None
    }
}

pub fn distortion(w: &WirtingerField) -> DistortionField {
    let g = w.grid();
    let mut k = vec![f64::NAN; g.len()];
    let mut degenerate = vec![false; g.len()];
    for &n in g.nodes() {
        match distortion_at(w.fz[n], w.fzbar[n]) {
            Some(v) => k[n] = v,
            None => degenerate[n] = true,
        }
    }
    DistortionField {
        grid: g.clone(),
        k,
        degenerate,
    }
}

pub fn distortion_from_beltrami(mu: &BeltramiField) -> DistortionField {
    let g = mu.grid();
    let mut k = vec![f64::NAN; g.len()];
    let mut degenerate = vec![false; g.len()];
    for &n in g.nodes() {
        let m2 = mu.mu[n].norm_sqr();
        if mu.valid[n] && m2 < 1.0 {
            k[n] = (1.0 + m2) / (1.0 - m2);
        } else {
            degenerate[n] = true;
        }
    }
    DistortionField {
        grid: g.clone(),
        k,
        degenerate,
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FiniteDistortionReport {
    pub degenerate_fraction: f64,
    pub degenerate_count: usize,
    /// Midpoint quadrature of `|J|`.
    pub jacobian_l1: f64,
    /// Largest finite `𝕂`; a discrete stand-in for the essential supremum.
    pub k_sup: f64,
    pub finite_distortion: bool,
}

pub fn finite_distortion_report(f: &MappingField, order: StencilOrder) -> FiniteDistortionReport {
    let w = wirtinger_derivatives(f, order);
    let d = distortion(&w);
    let g = f.grid();
    let abs_j: Vec<f64> = g.nodes().iter().map(|&k| w.jac[k].abs()).collect();
    let count = d.degenerate_count();
    FiniteDistortionReport {
        degenerate_fraction: d.degenerate_fraction(),
        degenerate_count: count,
        jacobian_l1: pairwise_sum(&abs_j) * g.cell_area(),
        k_sup: d.sup(),
        finite_distortion: count == 0,
    }
}

/// Distortion of `H = h ∘ ξ⁻¹` from the Beltrami coefficients of `ξ` and `h`
/// at a common point.
pub fn compose_distortion(mu_xi: Complex64, mu_h: Complex64) -> Result<f64> {
    let a = mu_xi.norm_sqr();
    let b = mu_h.norm_sqr();
    if !(a < 1.0) || !(b < 1.0) {
        return Err(Error::Domain("Beltrami coefficient modulus must be below 1".into()));
    }
    let kx = (1.0 + a) / (1.0 - a);
    let kh = (1.0 + b) / (1.0 - b);
    let cross = (mu_xi * mu_h.conj()).re;
    Ok(kx * kh * (1.0 - 4.0 * cross / ((1.0 + a) * (1.0 + b))))
}
