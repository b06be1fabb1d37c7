//! The Cayley map `ψ(z) = −i(z − 1)/(z + 1)` from the disk onto the upper
//! half-plane, disk Möbius maps, and transport of maps, weights and
//! quadratic differentials between the two models.

use alloc::sync::Arc;
use alloc::vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::energy::WeightField;
use crate::fields::grid::DomainGrid;
use crate::fields::MappingField;
use crate::hopf::QuadraticDifferentialField;
use crate::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `ψ(z)`; `ψ(0) = i`, `ψ(1) = 0`, `ψ(−1) = ∞`.
pub fn cayley(z: Complex64) -> Result<Complex64> {
    let d = z + 1.0;
    if d.norm_sqr() == 0.0 {
        return Err(Error::Pole);
    }
    Ok(-I * (z - 1.0) / d)
}

/// `ψ⁻¹(w) = (i − w)/(i + w)`.
pub fn cayley_inv(w: Complex64) -> Result<Complex64> {
    let d = I + w;
    if d.norm_sqr() == 0.0 {
        return Err(Error::Pole);
    }
    Ok((I - w) / d)
}

/// `ψ′(z) = −2i/(z + 1)²`.
pub fn cayley_derivative(z: Complex64) -> Result<Complex64> {
    let d = z + 1.0;
    if d.norm_sqr() == 0.0 {
        return Err(Error::Pole);
    }
    Ok(-2.0 * I / (d * d))
}

/// `(ψ⁻¹)′(w) = −2i/(i + w)²`.
pub fn cayley_inv_derivative(w: Complex64) -> Result<Complex64> {
    let d = I + w;
    if d.norm_sqr() == 0.0 {
        return Err(Error::Pole);
    }
    Ok(-2.0 * I / (d * d))
}

/// Disk automorphism `w ↦ e^{iθ}(w − a)/(1 − āw)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DiskMobius {
    pub a: Complex64,
    pub theta: f64,
}

impl DiskMobius {
    pub fn new(a: Complex64, theta: f64) -> Result<Self> {
        if !(a.norm() < 1.0) {
            return Err(Error::Domain("Möbius parameter must satisfy |a| < 1".into()));
        }
        Ok(DiskMobius { a, theta })
    }

    pub fn identity() -> Self {
        DiskMobius {
            a: Complex64::new(0.0, 0.0),
            theta: 0.0,
        }
    }

    pub fn apply(&self, w: Complex64) -> Complex64 {
        Complex64::from_polar(1.0, self.theta) * (w - self.a) / (1.0 - self.a.conj() * w)
    }

    pub fn derivative(&self, w: Complex64) -> Complex64 {
        let d = 1.0 - self.a.conj() * w;
        Complex64::from_polar(1.0, self.theta) * (1.0 - self.a.norm_sqr()) / (d * d)
    }
}

/// `λ(w) = η(ψ(w)) |ψ′(w)|²`.
///
/// The pullback of the unit weight is `4/|w+1|⁴`. The pullback of
/// `Im⁻²` is `4(1 − |w|²)⁻²`: the Cayley map is an isometry between the
/// curvature −1 metrics, whose disk area element carries the factor 4.
pub fn pullback_weight(eta: &WeightField) -> WeightField {
    match eta {
        WeightField::Unit => WeightField::Cayley,
        other => WeightField::Pullback(alloc::boxed::Box::new(other.clone())),
    }
}

#[derive(Clone, Debug)]
pub struct ConjugateReport {
    /// `ψ⁻¹ ∘ h ∘ ψ` on the disk grid restricted to unmasked nodes.
    pub field: MappingField,
    pub masked: usize,
    pub masked_fraction: f64,
}

/// Fraction of target nodes that may be dropped before conjugation fails.
pub const MAX_MASKED_FRACTION: f64 = 0.1;

/// `g = ψ⁻¹ ∘ h ∘ ψ` for a field `h` on a truncated half-plane, evaluated
/// at the nodes of a disk grid. Nodes whose image `ψ(w)` falls outside the
/// sampled window of `h`, or whose value `h(ψ(w))` is at the pole of `ψ⁻¹`,
/// are removed from the mask.
pub fn conjugate_map(h: &MappingField, disk: &DomainGrid) -> Result<ConjugateReport> {
    conjugate_with(disk, |w| {
        let z = cayley(w).ok()?;
        if !h.grid().contains_box(z) {
            return None;
        }
        let v = h.sample(z)?;
        if !(v.im > 0.0) {
            return None;
        }
        cayley_inv(v).ok()
    })
}

/// `ψ ∘ g ∘ ψ⁻¹` for a disk field `g`, evaluated on a half-plane grid.
pub fn conjugate_to_half_plane(g: &MappingField, half: &DomainGrid) -> Result<ConjugateReport> {
    conjugate_with(half, |z| {
        let w = cayley_inv(z).ok()?;
        if !g.grid().contains_box(w) {
            return None;
        }
        let v = g.sample(w)?;
        if !(v.norm_sqr() < 1.0) {
            return None;
        }
        cayley(v).ok()
    })
}

fn conjugate_with<F: FnMut(Complex64) -> Option<Complex64>>(target: &DomainGrid, mut f: F) -> Result<ConjugateReport> {
    let mut values = vec![Complex64::new(f64::NAN, f64::NAN); target.len()];
    for &k in target.nodes() {
        if let Some(v) = f(target.point(k)) {
            if v.re.is_finite() && v.im.is_finite() {
                values[k] = v;
            }
        }
    }
    let total = target.nodes().len();
    let restricted = Arc::new(target.restrict(|k, _| !values[k].re.is_nan()));
    let masked = total - restricted.nodes().len();
    let fraction = masked as f64 / total as f64;
    if fraction > MAX_MASKED_FRACTION {
        return Err(Error::Truncation { fraction });
    }
    let field = MappingField::from_values(restricted, values)?;
    Ok(ConjugateReport {
        field,
        masked,
        masked_fraction: fraction,
    })
}

/// `Φ_disk(w) = Φ(ψ(w)) ψ′(w)²` for a differential sampled on a half-plane
/// grid. Disk nodes whose image leaves the sampled window are dropped.
pub fn transport_differential(phi: &QuadraticDifferentialField, disk: &Arc<DomainGrid>) -> QuadraticDifferentialField {
    let mut out = vec![Complex64::new(f64::NAN, f64::NAN); disk.len()];
    let src = phi.grid();
    for &k in disk.nodes() {
        let w = disk.point(k);
        let (Ok(z), Ok(d)) = (cayley(w), cayley_derivative(w)) else {
            continue;
        };
        if !src.contains_box(z) {
            continue;
        }
        if let Some(v) = src.sample(&phi.phi, z) {
            out[k] = v * d * d;
        }
    }
    QuadraticDifferentialField::new(disk.clone(), out, alloc::format!("transport({})", phi.weight_tag))
}

/// Transport of a differential given in closed form on the half-plane.
pub fn transport_differential_fn<F: Fn(Complex64) -> Complex64>(
    phi: F,
    disk: &Arc<DomainGrid>,
    tag: &str,
) -> QuadraticDifferentialField {
    let mut out = vec![Complex64::new(f64::NAN, f64::NAN); disk.len()];
    for &k in disk.nodes() {
        let w = disk.point(k);
        if let (Ok(z), Ok(d)) = (cayley(w), cayley_derivative(w)) {
            out[k] = phi(z) * d * d;
        }
    }
    QuadraticDifferentialField::new(disk.clone(), out, alloc::format!("transport({tag})"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::DomainKind;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn anchor_values() {
        assert!((cayley(c(0.0, 0.0)).unwrap() - I).norm() < 1e-15);
        assert!(cayley(c(1.0, 0.0)).unwrap().norm() < 1e-15);
        assert!((cayley(I).unwrap() - 1.0).norm() < 1e-15);
        assert!(matches!(cayley(c(-1.0, 0.0)), Err(Error::Pole)));
        assert!(matches!(cayley_inv(-I), Err(Error::Pole)));
        assert!(matches!(cayley_derivative(c(-1.0, 0.0)), Err(Error::Pole)));
    }

    #[test]
    fn pullback_weights() {
        let lam = pullback_weight(&WeightField::Unit);
        assert_eq!(lam.eval(c(0.0, 0.0)), 4.0);
        let hyp = pullback_weight(&WeightField::HypHalf);
        for w in [c(0.0, 0.0), c(0.5, 0.2), c(-0.7, -0.3), c(0.1, 0.95)] {
            let want = 4.0 / (1.0 - w.norm_sqr()).powi(2);
            assert!((hyp.eval(w) - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn mobius_derivative_matches_difference() {
        let m = DiskMobius::new(c(0.3, 0.0), 1.0).unwrap();
        let w = c(0.2, -0.4);
        let h = 1e-6;
        let fd = (m.apply(w + h) - m.apply(w - h)) / (2.0 * h);
        assert!((fd - m.derivative(w)).norm() < 1e-8);
        assert!(DiskMobius::new(c(1.0, 0.0), 0.0).is_err());
    }

    #[test]
    fn identity_conjugates_to_identity() {
        let half = DomainGrid::new(DomainKind::default_half_plane(), 64).unwrap();
        let h = MappingField::identity(Arc::new(half));
        let disk = DomainGrid::new(DomainKind::UnitDisk, 64).unwrap();
        let r = conjugate_map(&h, &disk).unwrap();
        assert!(r.masked_fraction < 0.1);
        assert!(r.field.sup_distance_to_identity() < 1e-9);
    }

    #[test]
    fn small_window_is_a_truncation_error() {
        let half = DomainGrid::new(
            DomainKind::HalfPlane {
                half_width: 0.5,
                y_min: 0.5,
                y_max: 1.5,
            },
            32,
        )
        .unwrap();
        let h = MappingField::identity(Arc::new(half));
        let disk = DomainGrid::new(DomainKind::UnitDisk, 32).unwrap();
        assert!(matches!(conjugate_map(&h, &disk), Err(Error::Truncation { .. })));
    }

    proptest! {
        #[test]
        fn round_trip(r in 0.0f64..0.999, t in 0.0f64..core::f64::consts::TAU) {
            let z = Complex64::from_polar(r, t);
            prop_assume!((z + 1.0).norm() > 1e-3);
            let w = cayley(z).unwrap();
            prop_assert!(w.im > 0.0);
            prop_assert!((cayley_inv(w).unwrap() - z).norm() <= 1e-14 * (1.0 + w.norm()));
        }

        #[test]
        fn mobius_preserves_disk(r in 0.0f64..0.999, t in 0.0f64..core::f64::consts::TAU, ar in 0.0f64..0.9, th in -3.0f64..3.0) {
            let m = DiskMobius::new(Complex64::from_polar(ar, 0.7), th).unwrap();
            prop_assert!(m.apply(Complex64::from_polar(r, t)).norm() < 1.0 + 1e-12);
        }
    }
}
