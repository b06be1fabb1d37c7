//! Convex profiles, area weights and distortion energies.
//!
//! The direct energy of `f` is `∫ Ψ(𝕂(z,f)) λ(z) dz`; for `h = f⁻¹` the same
//! number is `∫ Ψ(𝕂(w,h)) λ(h(w)) J(w,h) dw`. Both are midpoint sums over
//! the inside nodes of the grid.

use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::cayley::cayley;
use crate::fields::grid::StencilOrder;
use crate::fields::{distortion_at, wirtinger_derivatives, MappingField, WirtingerField};
use crate::math::{geomspace, pairwise_sum};
use crate::tolerances::{MAX_DEGENERATE_FRACTION, PAIRING_TOL, SINGULAR_WEIGHT_CAP};
use crate::{Error, Result};

/// A convex increasing `Ψ` with `Ψ(t) ≥ t` on `[1, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConvexProfile {
    Linear,
    /// `t^p`, `p ≥ 1`.
    Power(f64),
    /// `e^{pt}`; `e^{pt} ≥ t` for all `t` only when `p ≥ 1/e`.
    Exp(f64),
}

impl ConvexProfile {
    pub fn power(p: f64) -> Result<Self> {
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::Config(alloc::format!("power profile needs p >= 1, got {p}")));
        }
        Ok(ConvexProfile::Power(p))
    }

    pub fn exp(p: f64) -> Result<Self> {
        if !(p >= 1.0 / core::f64::consts::E) || !p.is_finite() {
            return Err(Error::Config(alloc::format!(
                "exponential profile needs p >= 1/e so that e^(pt) >= t, got {p}"
            )));
        }
        Ok(ConvexProfile::Exp(p))
    }

    /// Parse `linear`, `power:p` or `exp:p`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Config(alloc::format!("profile '{name}' needs a parameter")))?
                .parse::<f64>()
                .map_err(|_| Error::Config(alloc::format!("bad profile parameter in '{s}'")))
        };
        match name {
            "linear" if arg.is_none() => Ok(ConvexProfile::Linear),
            "power" => Self::power(num(arg)?),
            "exp" => Self::exp(num(arg)?),
            _ => Err(Error::Config(alloc::format!("unknown profile '{s}'"))),
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            ConvexProfile::Linear => t,
            ConvexProfile::Power(p) => t.powf(p),
            ConvexProfile::Exp(p) => (p * t).exp(),
        }
    }

    #[inline]
    pub fn deriv(&self, t: f64) -> f64 {
        match *self {
            ConvexProfile::Linear => 1.0,
            ConvexProfile::Power(p) => p * t.powf(p - 1.0),
            ConvexProfile::Exp(p) => p * (p * t).exp(),
        }
    }

    #[inline]
    pub fn second(&self, t: f64) -> f64 {
        match *self {
            ConvexProfile::Linear => 0.0,
            ConvexProfile::Power(p) => p * (p - 1.0) * t.powf(p - 2.0),
            ConvexProfile::Exp(p) => p * p * (p * t).exp(),
        }
    }

    /// `t Ψ′(t) / Ψ(t)`, evaluated symbolically so that it stays finite
    /// where `Ψ` itself overflows.
    pub fn elasticity(&self, t: f64) -> f64 {
        match *self {
            ConvexProfile::Linear => 1.0,
            ConvexProfile::Power(p) => p,
            ConvexProfile::Exp(p) => p * t,
        }
    }
}

impl fmt::Display for ConvexProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConvexProfile::Linear => write!(f, "linear"),
            ConvexProfile::Power(p) => write!(f, "power:{p}"),
            ConvexProfile::Exp(p) => write!(f, "exp:{p}"),
        }
    }
}

/// Positive area weights `λ` (or `η` on the half-plane).
#[derive(Clone, Debug)]
pub enum WeightField {
    /// `λ ≡ 1`.
    Unit,
    /// `(1 − |z|²)⁻²` on the disk.
    HypDisk,
    /// `Im(z)⁻²` on the upper half-plane.
    HypHalf,
    /// `4 / |z + 1|⁴`, the pullback of the unit weight by the Cayley map.
    Cayley,
    /// `η(ψ(z)) |ψ′(z)|²` for a half-plane weight `η`.
    Pullback(Box<WeightField>),
    /// Any positive function; the name is used in reports.
    Custom {
        name: &'static str,
        f: fn(Complex64) -> f64,
    },
}

/// Custom weights compare by name.
impl PartialEq for WeightField {
    fn eq(&self, other: &Self) -> bool {
        use WeightField::*;
        match (self, other) {
            (Unit, Unit) | (HypDisk, HypDisk) | (HypHalf, HypHalf) | (Cayley, Cayley) => true,
            (Pullback(a), Pullback(b)) => a == b,
            (Custom { name: a, .. }, Custom { name: b, .. }) => a == b,
            _ => false,
        }
    }
}

impl WeightField {
    /// Parse `unit`, `hyp-disk`, `hyp-half` or `cayley`.
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "unit" => Ok(WeightField::Unit),
            "hyp-disk" => Ok(WeightField::HypDisk),
            "hyp-half" => Ok(WeightField::HypHalf),
            "cayley" => Ok(WeightField::Cayley),
            other => Err(Error::Config(alloc::format!("unknown weight '{other}'"))),
        }
    }

    pub fn name(&self) -> String {
        match self {
            WeightField::Unit => "unit".into(),
            WeightField::HypDisk => "hyp-disk".into(),
            WeightField::HypHalf => "hyp-half".into(),
            WeightField::Cayley => "cayley".into(),
            WeightField::Pullback(inner) => alloc::format!("pullback({})", inner.name()),
            WeightField::Custom { name, .. } => (*name).into(),
        }
    }

    /// Whether the weight is finite and positive at `z`.
    pub fn contains(&self, z: Complex64) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        match self {
            WeightField::Unit => true,
            WeightField::HypDisk => z.norm_sqr() < 1.0,
            WeightField::HypHalf => z.im > 0.0,
            WeightField::Cayley => z != Complex64::new(-1.0, 0.0),
            WeightField::Pullback(inner) => match cayley(z) {
                Ok(w) => inner.contains(w),
                Err(_) => false,
            },
            WeightField::Custom { f, .. } => {
                let v = f(z);
                v.is_finite() && v > 0.0
            }
        }
    }

    #[inline]
    pub fn eval(&self, z: Complex64) -> f64 {
        match self {
            WeightField::Unit => 1.0,
            WeightField::HypDisk => {
                let s = 1.0 - z.norm_sqr();
                1.0 / (s * s)
            }
            WeightField::HypHalf => 1.0 / (z.im * z.im),
            WeightField::Cayley => {
                let s = (z + 1.0).norm_sqr();
                4.0 / (s * s)
            }
            WeightField::Pullback(inner) => {
                let d = z + 1.0;
                let w = Complex64::new(0.0, -1.0) * (z - 1.0) / d;
                let dpsi2 = 4.0 / (d.norm_sqr() * d.norm_sqr());
                inner.eval(w) * dpsi2
            }
            WeightField::Custom { f, .. } => f(z),
        }
    }

    /// `η` as a function of height only, for weights depending on `Im z`
    /// alone.
    pub fn eval_height(&self, v: f64) -> Option<f64> {
        match self {
            WeightField::Unit => Some(1.0),
            WeightField::HypHalf => Some(1.0 / (v * v)),
            _ => None,
        }
    }

    pub fn depends_on_height_only(&self) -> bool {
        matches!(self, WeightField::Unit | WeightField::HypHalf)
    }

    /// Values at the inside nodes of a grid.
    pub fn sample(&self, grid: &crate::fields::grid::DomainGrid) -> Vec<f64> {
        let mut out = alloc::vec![f64::NAN; grid.len()];
        for &k in grid.nodes() {
            out[k] = self.eval(grid.point(k));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyReport {
    pub value: f64,
    pub degenerate_fraction: f64,
    pub degenerate_count: usize,
    /// Area of nodes dropped because the weight exceeded the cap.
    pub excluded_area: f64,
    pub nodes_used: usize,
}

/// Per-node energy densities; NaN marks nodes excluded from the sum.
#[derive(Clone, Debug)]
pub struct EnergyDensity {
    pub density: Vec<f64>,
    pub degenerate_count: usize,
    pub excluded_area: f64,
}

fn check_degenerate(count: usize, total: usize) -> Result<f64> {
    let fraction = count as f64 / total.max(1) as f64;
    if fraction > MAX_DEGENERATE_FRACTION {
        return Err(Error::Degenerate { fraction, count });
    }
    Ok(fraction)
}

/// Node densities `Ψ(𝕂) λ(z)` of the direct energy.
pub fn direct_density(w: &WirtingerField, psi: &ConvexProfile, weight: &WeightField) -> EnergyDensity {
    let g = w.grid();
    let mut density = alloc::vec![f64::NAN; g.len()];
    let mut degenerate = 0;
    let mut excluded = 0usize;
    for &k in g.nodes() {
        let Some(kk) = distortion_at(w.fz[k], w.fzbar[k]) else {
            degenerate += 1;
            continue;
        };
        let lam = weight.eval(g.point(k));
        if !(lam <= SINGULAR_WEIGHT_CAP) {
            excluded += 1;
            continue;
        }
        density[k] = psi.eval(kk) * lam;
    }
    EnergyDensity {
        density,
        degenerate_count: degenerate,
        excluded_area: excluded as f64 * g.cell_area(),
    }
}

/// Node densities `Ψ(𝕂_h) λ(h) J_h` of the inverse-form energy.
pub fn inverse_density(
    h: &MappingField,
    w: &WirtingerField,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Result<EnergyDensity> {
    let g = w.grid();
    let mut density = alloc::vec![f64::NAN; g.len()];
    let mut degenerate = 0;
    let mut excluded = 0usize;
    let mut outside = 0usize;
    let mut first = None;
    for &k in g.nodes() {
        let Some(kk) = distortion_at(w.fz[k], w.fzbar[k]) else {
            degenerate += 1;
            continue;
        };
        let p = h.value(k);
        if !weight.contains(p) {
            outside += 1;
            first.get_or_insert(p);
            continue;
        }
        let lam = weight.eval(p);
        if !(lam <= SINGULAR_WEIGHT_CAP) {
            excluded += 1;
            continue;
        }
        density[k] = psi.eval(kk) * lam * w.jac[k];
    }
    if outside > 0 {
        return Err(Error::range(weight.name(), outside, first.unwrap_or_default()));
    }
    Ok(EnergyDensity {
        density,
        degenerate_count: degenerate,
        excluded_area: excluded as f64 * g.cell_area(),
    })
}

/// Midpoint sum of a density over the nodes accepted by `keep`.
pub fn integrate_density<F: FnMut(usize, Complex64) -> bool>(
    grid: &crate::fields::grid::DomainGrid,
    d: &EnergyDensity,
    mut keep: F,
) -> Result<EnergyReport> {
    let total = grid.nodes().len();
    let fraction = check_degenerate(d.degenerate_count, total)?;
    let vals: Vec<f64> = grid
        .nodes()
        .iter()
        .filter(|&&k| !d.density[k].is_nan() && keep(k, grid.point(k)))
        .map(|&k| d.density[k])
        .collect();
    Ok(EnergyReport {
        value: pairwise_sum(&vals) * grid.cell_area(),
        degenerate_fraction: fraction,
        degenerate_count: d.degenerate_count,
        excluded_area: d.excluded_area,
        nodes_used: vals.len(),
    })
}

/// `∫ Ψ(𝕂(z,f)) λ(z) dz` with fourth-order derivatives.
pub fn energy_direct(f: &MappingField, psi: &ConvexProfile, weight: &WeightField) -> Result<EnergyReport> {
    energy_direct_with(&wirtinger_derivatives(f, StencilOrder::Fourth), psi, weight)
}

pub fn energy_direct_with(w: &WirtingerField, psi: &ConvexProfile, weight: &WeightField) -> Result<EnergyReport> {
    let d = direct_density(w, psi, weight);
    integrate_density(w.grid(), &d, |_, _| true)
}

/// `∫ Ψ(𝕂(w,h)) λ(h(w)) J(w,h) dw` with fourth-order derivatives.
pub fn energy_inverse(h: &MappingField, psi: &ConvexProfile, weight: &WeightField) -> Result<EnergyReport> {
    energy_inverse_with(h, &wirtinger_derivatives(h, StencilOrder::Fourth), psi, weight)
}

pub fn energy_inverse_with(
    h: &MappingField,
    w: &WirtingerField,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Result<EnergyReport> {
    let d = inverse_density(h, w, psi, weight)?;
    integrate_density(w.grid(), &d, |_, _| true)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CovGapReport {
    /// `|E_direct − E_inverse| / E_direct`.
    pub gap: f64,
    pub direct: f64,
    pub inverse: f64,
    /// `sup |f⁻¹(f(z)) − z|` over nodes where the sample exists.
    pub pairing_residual: f64,
}

/// Relative disagreement between the two forms of the energy.
pub fn cov_gap(
    f: &MappingField,
    f_inverse: &MappingField,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Result<CovGapReport> {
    let g = f.grid();
    let mut residual: f64 = 0.0;
    let mut sampled = 0usize;
    for &k in g.nodes() {
        if let Some(back) = f_inverse.sample(f.value(k)) {
            residual = residual.max((back - g.point(k)).norm());
            sampled += 1;
        }
    }
    if sampled * 10 < g.nodes().len() * 9 || !(residual <= PAIRING_TOL) {
        return Err(Error::Pairing(alloc::format!(
            "f and f_inverse are not inverse to each other: residual {residual:.3e} on {sampled} sampled nodes"
        )));
    }
    let direct = energy_direct(f, psi, weight)?.value;
    let inverse = energy_inverse(f_inverse, psi, weight)?.value;
    Ok(CovGapReport {
        gap: (direct - inverse).abs() / direct.abs(),
        direct,
        inverse,
        pairing_residual: residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum GrowthClass {
    Bounded,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GrowthReport {
    /// `(t, tΨ′(t)/Ψ(t))` on a geometric grid over `[1, t_max]`.
    pub samples: Vec<(f64, f64)>,
    pub final_ratio: f64,
    pub class: GrowthClass,
}

/// Trend of `tΨ′(t)/Ψ(t)` on `[1, t_max]`: bounded when the ratio stops
/// growing over the last decade of samples.
pub fn growth_diagnostic(psi: &ConvexProfile, t_max: f64) -> Result<GrowthReport> {
    if !(t_max >= 10.0) {
        return Err(Error::Config("growth diagnostic needs t_max >= 10".into()));
    }
    let ts = geomspace(1.0, t_max, 61);
    let samples: Vec<(f64, f64)> = ts.iter().map(|&t| (t, psi.elasticity(t))).collect();
    let last = samples[samples.len() - 1].1;
    let decade = t_max / 10.0;
    let earlier = psi.elasticity(decade);
    let class = if last > 2.0 * earlier || last > 1.5 * earlier + 1.0 {
        GrowthClass::Unbounded
    } else {
        GrowthClass::Bounded
    };
    Ok(GrowthReport {
        samples,
        final_ratio: last,
        class,
    })
}
