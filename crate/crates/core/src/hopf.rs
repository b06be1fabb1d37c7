//! Ahlfors–Hopf differentials `Φ_h = Ψ′(𝕂(w,h)) h_w \overline{h_w̄} λ(h)`
//! and numerical tests of their holomorphy.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cayley::DiskMobius;
use crate::energy::{ConvexProfile, WeightField};
use crate::fields::grid::{DomainGrid, StencilOrder};
use crate::fields::{distortion_at, wirtinger_derivatives, MappingField, WirtingerField};
use crate::math::pairwise_sum;
use crate::tolerances::{CONFORMAL_TOL, HOLOMORPHY_FACTOR, HOLOMORPHY_ROUNDING, MAX_DEGENERATE_FRACTION, MIN_COVERAGE};
use crate::{Error, Result};

/// Which second factor enters `Φ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum HopfVariant {
    /// `h_w · conj(h_w̄)`; transforms as a quadratic differential.
    #[default]
    Conjugated,
    /// `h_w · h_w̄`.
    Unconjugated,
}

/// A quadratic differential sampled at grid nodes; NaN marks nodes where it
/// is undefined.
#[derive(Clone, Debug)]
pub struct QuadraticDifferentialField {
    grid: Arc<DomainGrid>,
    pub phi: Vec<Complex64>,
    pub weight_tag: String,
}

impl QuadraticDifferentialField {
    pub fn new(grid: Arc<DomainGrid>, mut phi: Vec<Complex64>, weight_tag: String) -> Self {
        for k in 0..phi.len() {
            if !grid.is_inside(k) {
                phi[k] = Complex64::new(f64::NAN, f64::NAN);
            }
        }
        QuadraticDifferentialField { grid, phi, weight_tag }
    }

    pub fn from_fn<F: FnMut(Complex64) -> Complex64>(grid: Arc<DomainGrid>, mut f: F) -> Self {
        let mut phi = vec![Complex64::new(f64::NAN, f64::NAN); grid.len()];
        for &k in grid.nodes() {
            phi[k] = f(grid.point(k));
        }
        Self::new(grid, phi, "closed-form".into())
    }

    pub fn grid(&self) -> &Arc<DomainGrid> {
        &self.grid
    }

    pub fn is_defined(&self, k: usize) -> bool {
        self.phi[k].re.is_finite() && self.phi[k].im.is_finite()
    }

    pub fn max_abs(&self) -> f64 {
        self.grid
            .nodes()
            .iter()
            .filter(|&&k| self.is_defined(k))
            .map(|&k| self.phi[k].norm())
            .fold(0.0, f64::max)
    }

    /// Largest nodewise deviation from the given constant.
    pub fn deviation_from(&self, c: Complex64) -> f64 {
        self.grid
            .nodes()
            .iter()
            .filter(|&&k| self.is_defined(k))
            .map(|&k| (self.phi[k] - c).norm())
            .fold(0.0, f64::max)
    }

    /// Midpoint quadrature of `|Φ|` over defined nodes.
    pub fn l1_norm(&self) -> f64 {
        let v: Vec<f64> = self
            .grid
            .nodes()
            .iter()
            .filter(|&&k| self.is_defined(k))
            .map(|&k| self.phi[k].norm())
            .collect();
        pairwise_sum(&v) * self.grid.cell_area()
    }

    /// Sup-norm difference to another field on the same lattice, over nodes
    /// where both are defined.
    pub fn sup_gap(&self, other: &QuadraticDifferentialField) -> f64 {
        self.grid
            .nodes()
            .iter()
            .filter(|&&k| self.is_defined(k) && other.is_defined(k))
            .map(|&k| (self.phi[k] - other.phi[k]).norm())
            .fold(0.0, f64::max)
    }
}

/// `Φ_h` with fourth-order finite-difference derivatives.
pub fn hopf_differential(
    h: &MappingField,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Result<QuadraticDifferentialField> {
    let w = wirtinger_derivatives(h, StencilOrder::Fourth);
    hopf_from_wirtinger(h, &w, psi, weight, HopfVariant::Conjugated)
}

/// `Φ_h` from supplied derivatives, for either variant.
pub fn hopf_from_wirtinger(
    h: &MappingField,
    w: &WirtingerField,
    psi: &ConvexProfile,
    weight: &WeightField,
    variant: HopfVariant,
) -> Result<QuadraticDifferentialField> {
    let g = w.grid();
    let mut phi = vec![Complex64::new(f64::NAN, f64::NAN); g.len()];
    let mut degenerate = 0usize;
    for &k in g.nodes() {
        let Some(kk) = distortion_at(w.fz[k], w.fzbar[k]) else {
            degenerate += 1;
            continue;
        };
        let second = match variant {
            HopfVariant::Conjugated => w.fzbar[k].conj(),
            HopfVariant::Unconjugated => w.fzbar[k],
        };
        let prod = w.fz[k] * second;
        // Zero where h is discretely conformal, even if the weight is
        // infinite there.
        phi[k] = if w.fzbar[k].norm() <= CONFORMAL_TOL * w.fz[k].norm() {
            Complex64::new(0.0, 0.0)
        } else if prod == Complex64::new(0.0, 0.0) {
            prod
        } else {
            prod * (psi.deriv(kk) * weight.eval(h.value(k)))
        };
    }
    let fraction = degenerate as f64 / g.nodes().len().max(1) as f64;
    if fraction > MAX_DEGENERATE_FRACTION {
        return Err(Error::Degenerate {
            fraction,
            count: degenerate,
        });
    }
    Ok(QuadraticDifferentialField::new(g.clone(), phi, weight.name()))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DbarReport {
    /// `max |∂Φ/∂w̄|` with fourth-order stencils over interior nodes.
    pub max_dbar: f64,
    /// `max |∂̄₄Φ − ∂̄₂Φ|`, a proxy for the stencil truncation error.
    pub truncation_estimate: f64,
    /// `max |Φ(c) − mean of Φ on the 4-point circle of radius 2h|`.
    pub mean_value_gap: f64,
    pub nodes_tested: usize,
    pub holomorphic: bool,
}

/// Discrete holomorphy test of `Φ` over nodes whose centred fourth-order
/// stencil is fully defined.
pub fn dbar_residual(phi: &QuadraticDifferentialField) -> Result<DbarReport> {
    let g = phi.grid();
    let n = g.n();
    let interior: Vec<usize> = g
        .nodes()
        .iter()
        .copied()
        .filter(|&k| g.is_interior(k, StencilOrder::Fourth))
        .collect();
    let i = Complex64::i();
    let mut max_dbar: f64 = 0.0;
    let mut est: f64 = 0.0;
    let mut mv: f64 = 0.0;
    let mut tested = 0usize;
    for &k in &interior {
        let (ci, cj) = (k % n, k / n);
        let nb = [
            g.index(ci - 2, cj),
            g.index(ci - 1, cj),
            k,
            g.index(ci + 1, cj),
            g.index(ci + 2, cj),
            g.index(ci, cj - 2),
            g.index(ci, cj - 1),
            g.index(ci, cj + 1),
            g.index(ci, cj + 2),
        ];
        if !nb.iter().all(|&m| phi.is_defined(m)) {
            continue;
        }
        tested += 1;
        let (fx4, fy4) = g.gradient(&phi.phi, k, StencilOrder::Fourth);
        let (fx2, fy2) = g.gradient(&phi.phi, k, StencilOrder::Second);
        let d4 = (fx4 + i * fy4) * 0.5;
        let d2 = (fx2 + i * fy2) * 0.5;
        max_dbar = max_dbar.max(d4.norm());
        est = est.max((d4 - d2).norm());
        let mean = (phi.phi[nb[0]] + phi.phi[nb[4]] + phi.phi[nb[5]] + phi.phi[nb[8]]) * 0.25;
        mv = mv.max((mean - phi.phi[k]).norm());
    }
    let required = (MIN_COVERAGE * interior.len() as f64).ceil() as usize;
    if interior.is_empty() || tested < required {
        return Err(Error::Coverage {
            valid: tested,
            required: required.max(1),
        });
    }
    let floor = HOLOMORPHY_ROUNDING * phi.max_abs().max(1.0) / g.spacing();
    Ok(DbarReport {
        max_dbar,
        truncation_estimate: est,
        mean_value_gap: mv,
        nodes_tested: tested,
        holomorphic: max_dbar <= HOLOMORPHY_FACTOR * est + floor,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MassVerdict {
    Stable,
    Divergent,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct L1MassReport {
    pub levels: Vec<usize>,
    pub masses: Vec<f64>,
    /// Location of `max |Φ|` on the finest level.
    pub peak: (f64, f64),
    /// Distance in cells from the peak to the nearest masked-out node.
    pub peak_boundary_cells: f64,
    pub verdict: MassVerdict,
}

/// `∫|Φ|` at several resolutions. The mass is declared divergent when the
/// finest level exceeds the coarsest by more than a factor 2 while `|Φ|`
/// peaks within three cells of the boundary.
pub fn l1_mass<F>(levels: &[usize], mut build: F) -> Result<L1MassReport>
where
    F: FnMut(usize) -> Result<QuadraticDifferentialField>,
{
    if levels.len() < 2 {
        return Err(Error::Config("l1_mass needs at least two refinement levels".into()));
    }
    let mut masses = Vec::with_capacity(levels.len());
    let mut last = None;
    for &n in levels {
        let phi = build(n)?;
        masses.push(phi.l1_norm());
        last = Some(phi);
    }
    let phi = last.expect("levels is nonempty");
    let g = phi.grid();
    let peak_k = g
        .nodes()
        .iter()
        .copied()
        .filter(|&k| phi.is_defined(k))
        .max_by(|&a, &b| {
            phi.phi[a]
                .norm()
                .partial_cmp(&phi.phi[b].norm())
                .unwrap_or(core::cmp::Ordering::Equal)
        });
    let (peak, cells) = match peak_k {
        Some(k) => {
            let p = g.point(k);
            ((p.re, p.im), cells_to_boundary(g, k))
        }
        None => ((f64::NAN, f64::NAN), f64::INFINITY),
    };
    let grows = masses[masses.len() - 1] > 2.0 * masses[0];
    Ok(L1MassReport {
        levels: levels.to_vec(),
        masses,
        peak,
        peak_boundary_cells: cells,
        verdict: if grows && cells <= 3.0 {
            MassVerdict::Divergent
        } else {
            MassVerdict::Stable
        },
    })
}

fn cells_to_boundary(g: &DomainGrid, k: usize) -> f64 {
    let n = g.n() as isize;
    let (i, j) = ((k % g.n()) as isize, (k / g.n()) as isize);
    let mut best = f64::INFINITY;
    for r in 1..=4isize {
        for dj in -r..=r {
            for di in -r..=r {
                let (a, b) = (i + di, j + dj);
                let out = a < 0 || b < 0 || a >= n || b >= n || !g.is_inside(g.index(a as usize, b as usize));
                if out {
                    best = best.min(((di * di + dj * dj) as f64).sqrt());
                }
            }
        }
    }
    best
}

/// `sup |Φ_h − Φ_{M∘h}| / max(1, |Φ_h|)` with the hyperbolic disk weight.
///
/// The weight grows like `(1 − |w|²)⁻²` at nodes hugging the circle, where
/// `|Φ|` reaches `1e7` and more; rounding of `M(h)` alone then dominates an
/// absolute gap, hence the per-node scaling.
///
/// The derivatives of `M ∘ h` come from the chain rule,
/// `(M∘h)_w = M′(h) h_w` and `(M∘h)_w̄ = M′(h) h_w̄`, so the comparison
/// isolates the transformation law of `Ψ′(𝕂)`, of the weight and of the
/// derivative product from the finite-difference error of `h`.
pub fn mobius_invariance_gap(h: &MappingField, m: &DiskMobius, psi: &ConvexProfile) -> Result<f64> {
    let weight = WeightField::HypDisk;
    let mut outside = 0usize;
    let mut first = None;
    for &k in h.grid().nodes() {
        if !(h.value(k).norm_sqr() < 1.0) {
            outside += 1;
            first.get_or_insert(h.value(k));
        }
    }
    let mh = h.map_values(|_, v| m.apply(v))?;
    for &k in h.grid().nodes() {
        if !(mh.value(k).norm_sqr() < 1.0) {
            outside += 1;
            first.get_or_insert(mh.value(k));
        }
    }
    if outside > 0 {
        return Err(Error::range("closed unit disk", outside, first.unwrap_or_default()));
    }
    let w = wirtinger_derivatives(h, StencilOrder::Fourth);
    let mut fz = w.fz.clone();
    let mut fzbar = w.fzbar.clone();
    for &k in h.grid().nodes() {
        let d = m.derivative(h.value(k));
        fz[k] *= d;
        fzbar[k] *= d;
    }
    let mw = WirtingerField::from_parts(h.grid().clone(), fz, fzbar);
    let a = hopf_from_wirtinger(h, &w, psi, &weight, HopfVariant::Conjugated)?;
    let b = hopf_from_wirtinger(&mh, &mw, psi, &weight, HopfVariant::Conjugated)?;
    Ok(h.grid()
        .nodes()
        .iter()
        .filter(|&&k| a.is_defined(k) && b.is_defined(k))
        .map(|&k| (a.phi[k] - b.phi[k]).norm() / a.phi[k].norm().max(1.0))
        .fold(0.0, f64::max))
}
