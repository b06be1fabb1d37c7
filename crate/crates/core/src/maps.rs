//! Closed-form test mappings with exact Wirtinger derivatives, smooth bump
//! perturbations, and the random boundary-identity map generator.

use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::Rng;

use crate::cayley::{cayley, cayley_derivative, cayley_inv, cayley_inv_derivative};
use crate::fields::grid::DomainGrid;
use crate::fields::{MappingField, WirtingerField};
use crate::tolerances::GENERATOR_MIN_J;
use crate::Result;

/// A mapping known in closed form together with `(f_z, f_z̄)`.
pub trait AnalyticMap {
    fn value(&self, z: Complex64) -> Complex64;
    fn wirtinger(&self, z: Complex64) -> (Complex64, Complex64);

    fn field(&self, grid: &Arc<DomainGrid>) -> Result<MappingField> {
        MappingField::from_fn(grid.clone(), |z| self.value(z))
    }

    fn wirtinger_field(&self, grid: &Arc<DomainGrid>) -> WirtingerField {
        WirtingerField::from_fn(grid.clone(), |z| self.wirtinger(z))
    }

    /// Smallest `J` over the inside nodes of `grid`.
    fn min_jacobian(&self, grid: &DomainGrid) -> f64 {
        grid.nodes()
            .iter()
            .map(|&k| {
                let (a, b) = self.wirtinger(grid.point(k));
                a.norm_sqr() - b.norm_sqr()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Identity;

impl AnalyticMap for Identity {
    fn value(&self, z: Complex64) -> Complex64 {
        z
    }
    fn wirtinger(&self, _: Complex64) -> (Complex64, Complex64) {
        (ONE, ZERO)
    }
}

/// `x + iy ↦ x + iαy`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearStretch {
    pub alpha: f64,
}

impl AnalyticMap for LinearStretch {
    fn value(&self, z: Complex64) -> Complex64 {
        Complex64::new(z.re, self.alpha * z.im)
    }
    fn wirtinger(&self, _: Complex64) -> (Complex64, Complex64) {
        (
            Complex64::new(0.5 * (1.0 + self.alpha), 0.0),
            Complex64::new(0.5 * (1.0 - self.alpha), 0.0),
        )
    }
}

/// `z ↦ a z + b z̄ + c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Affine {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl Affine {
    /// Inverse map; requires `|a| ≠ |b|`.
    pub fn inverse(&self) -> Affine {
        // w = a z + b z̄ + c  ⇒  z = (ā(w−c) − b conj(w−c)) / (|a|² − |b|²)
        let d = self.a.norm_sqr() - self.b.norm_sqr();
        let a = self.a.conj() / d;
        let b = -self.b / d;
        Affine {
            a,
            b,
            c: -(a * self.c + b * self.c.conj()),
        }
    }
}

impl AnalyticMap for Affine {
    fn value(&self, z: Complex64) -> Complex64 {
        self.a * z + self.b * z.conj() + self.c
    }
    fn wirtinger(&self, _: Complex64) -> (Complex64, Complex64) {
        (self.a, self.b)
    }
}

/// `z ↦ z|z|^s`, `s > −1`; fixes the unit circle and has constant
/// distortion `(1 + s + s²/2)/(1 + s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadialPower {
    pub s: f64,
}

impl RadialPower {
    pub fn inverse(&self) -> RadialPower {
        RadialPower {
            s: 1.0 / (1.0 + self.s) - 1.0,
        }
    }
}

impl AnalyticMap for RadialPower {
    fn value(&self, z: Complex64) -> Complex64 {
        z * z.norm().powf(self.s)
    }
    fn wirtinger(&self, z: Complex64) -> (Complex64, Complex64) {
        let r = z.norm();
        if r == 0.0 {
            return (Complex64::new(f64::NAN, 0.0), Complex64::new(f64::NAN, 0.0));
        }
        let h = 0.5 * self.s;
        let rs = r.powf(self.s);
        let phase = z / z.conj();
        (Complex64::new((1.0 + h) * rs, 0.0), phase * (h * rs))
    }
}

/// `z ↦ z + ε(1 − |z|²) z̄`, the identity on the unit circle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RimFixedShear {
    pub eps: f64,
}

impl AnalyticMap for RimFixedShear {
    fn value(&self, z: Complex64) -> Complex64 {
        z + self.eps * (1.0 - z.norm_sqr()) * z.conj()
    }
    fn wirtinger(&self, z: Complex64) -> (Complex64, Complex64) {
        let zb = z.conj();
        (
            ONE - self.eps * zb * zb,
            Complex64::new(self.eps * (1.0 - 2.0 * z.norm_sqr()), 0.0),
        )
    }
}

/// `ψ⁻¹ ∘ h ∘ ψ` for a half-plane map `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CayleyConjugate<M> {
    pub inner: M,
}

impl<M: AnalyticMap> AnalyticMap for CayleyConjugate<M> {
    fn value(&self, w: Complex64) -> Complex64 {
        match cayley(w).and_then(|z| cayley_inv(self.inner.value(z))) {
            Ok(v) => v,
            Err(_) => Complex64::new(f64::NAN, f64::NAN),
        }
    }
    fn wirtinger(&self, w: Complex64) -> (Complex64, Complex64) {
        let nan = Complex64::new(f64::NAN, f64::NAN);
        let (Ok(z), Ok(dpsi)) = (cayley(w), cayley_derivative(w)) else {
            return (nan, nan);
        };
        let Ok(a) = cayley_inv_derivative(self.inner.value(z)) else {
            return (nan, nan);
        };
        let (hz, hzb) = self.inner.wirtinger(z);
        (a * hz * dpsi, a * hzb * dpsi.conj())
    }
}

/// The conjugated linear family `g_α = ψ⁻¹ ∘ (x + iαy) ∘ ψ` on the disk.
pub fn g_alpha(alpha: f64) -> CayleyConjugate<LinearStretch> {
    CayleyConjugate {
        inner: LinearStretch { alpha },
    }
}

/// `β(s) = exp(1 − 1/(1 − s²))` on `|s| < 1`, zero outside; `β(0) = 1`.
#[inline]
pub fn bump_profile(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

#[inline]
pub fn bump_profile_deriv(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        bump_profile(s) * (-2.0 * s / (q * q))
    }
}

/// `max |β′|`, attained at the root of `3s⁴ − 1 = 0`.
pub fn bump_profile_deriv_max() -> f64 {
    bump_profile_deriv(-(1.0f64 / 3.0).powf(0.25))
}

/// `a · β((x − c_x)/r) β((y − c_y)/r)` supported on the square of
/// half-width `r` around `c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: Complex64,
    pub radius: f64,
    pub amplitude: Complex64,
}

impl Bump {
    /// Bump scaled so that the real derivative has operator norm at most
    /// `bound` everywhere.
    pub fn with_gradient_bound(center: Complex64, radius: f64, direction: Complex64, bound: f64) -> Bump {
        let amp = bound * radius / (core::f64::consts::SQRT_2 * bump_profile_deriv_max());
        Bump {
            center,
            radius,
            amplitude: direction / direction.norm() * amp,
        }
    }

    #[inline]
    pub fn contains(&self, z: Complex64) -> bool {
        (z.re - self.center.re).abs() < self.radius && (z.im - self.center.im).abs() < self.radius
    }

    #[inline]
    pub fn value(&self, z: Complex64) -> Complex64 {
        if !self.contains(z) {
            return ZERO;
        }
        let sx = (z.re - self.center.re) / self.radius;
        let sy = (z.im - self.center.im) / self.radius;
        self.amplitude * (bump_profile(sx) * bump_profile(sy))
    }

    #[inline]
    pub fn wirtinger(&self, z: Complex64) -> (Complex64, Complex64) {
        if !self.contains(z) {
            return (ZERO, ZERO);
        }
        let sx = (z.re - self.center.re) / self.radius;
        let sy = (z.im - self.center.im) / self.radius;
        let bx = bump_profile_deriv(sx) * bump_profile(sy) / self.radius;
        let by = bump_profile(sx) * bump_profile_deriv(sy) / self.radius;
        let px = self.amplitude * bx;
        let py = self.amplitude * by;
        let i = Complex64::i();
        ((px - i * py) * 0.5, (px + i * py) * 0.5)
    }

    /// `sup ‖Dφ‖` bound implied by the amplitude.
    pub fn gradient_bound(&self) -> f64 {
        self.amplitude.norm() * core::f64::consts::SQRT_2 * bump_profile_deriv_max() / self.radius
    }
}

/// `z ↦ z + Σ c_i φ_i(z)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BumpPerturbation {
    pub bumps: Vec<Bump>,
}

impl AnalyticMap for BumpPerturbation {
    fn value(&self, z: Complex64) -> Complex64 {
        self.bumps.iter().fold(z, |acc, b| acc + b.value(z))
    }
    fn wirtinger(&self, z: Complex64) -> (Complex64, Complex64) {
        self.bumps.iter().fold((ONE, ZERO), |(a, c), b| {
            let (p, q) = b.wirtinger(z);
            (a + p, c + q)
        })
    }
}

impl BumpPerturbation {
    pub fn scaled(&self, s: f64) -> BumpPerturbation {
        BumpPerturbation {
            bumps: self
                .bumps
                .iter()
                .map(|b| Bump {
                    amplitude: b.amplitude * s,
                    ..*b
                })
                .collect(),
        }
    }
}

/// Random boundary-identity diffeomorphism of the disk: a sum of a few
/// bumps with random centres, widths and coefficients, shrunk by factors
/// of 0.8 until `min J ≥ 0.1` on `grid`.
pub fn random_boundary_identity_map<R: Rng + ?Sized>(rng: &mut R, grid: &DomainGrid) -> BumpPerturbation {
    let count = rng.gen_range(2..=6);
    let mut bumps = Vec::with_capacity(count);
    while bumps.len() < count {
        let radius = rng.gen_range(0.12..0.4);
        let reach = 0.95 - radius * core::f64::consts::SQRT_2;
        let center = Complex64::new(rng.gen_range(-reach..reach), rng.gen_range(-reach..reach));
        if center.norm() > reach {
            continue;
        }
        let dir = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if dir.norm() < 0.05 {
            continue;
        }
        let bound = rng.gen_range(0.3..1.6);
        bumps.push(Bump::with_gradient_bound(center, radius, dir, bound));
    }
    let mut map = BumpPerturbation { bumps };
    while map.min_jacobian(grid) < GENERATOR_MIN_J {
        map = map.scaled(0.8);
    }
    map
}

/// Smooth boundary-identity diffeomorphism: one to three wide bumps with
/// gentle gradients, well resolved from `n = 64` upward.
pub fn random_smooth_diffeomorphism<R: Rng + ?Sized>(rng: &mut R) -> BumpPerturbation {
    let count = rng.gen_range(1..=3);
    let mut bumps = Vec::with_capacity(count);
    while bumps.len() < count {
        let radius = rng.gen_range(0.35..0.6);
        let reach = 0.95 - radius * core::f64::consts::SQRT_2;
        let center = Complex64::new(rng.gen_range(-reach..reach), rng.gen_range(-reach..reach));
        if center.norm() > reach {
            continue;
        }
        let dir = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        if dir.norm() < 0.2 {
            continue;
        }
        let bound = rng.gen_range(0.2..0.6) / count as f64;
        bumps.push(Bump::with_gradient_bound(center, radius, dir, bound));
    }
    BumpPerturbation { bumps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::{DomainKind, StencilOrder};
    use crate::fields::wirtinger_derivatives;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Central differences in x and y as an independent derivative check.
    fn numeric_wirtinger<M: AnalyticMap>(m: &M, z: Complex64) -> (Complex64, Complex64) {
        let h = 1e-6;
        let fx = (m.value(z + h) - m.value(z - h)) / (2.0 * h);
        let fy = (m.value(z + c(0.0, h)) - m.value(z - c(0.0, h))) / (2.0 * h);
        let i = Complex64::i();
        ((fx - i * fy) * 0.5, (fx + i * fy) * 0.5)
    }

    fn check<M: AnalyticMap>(m: &M, z: Complex64, tol: f64) {
        let (a, b) = m.wirtinger(z);
        let (na, nb) = numeric_wirtinger(m, z);
        assert!(
            (a - na).norm() < tol && (b - nb).norm() < tol,
            "{z}: {a} {b} vs {na} {nb}"
        );
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        for z in [c(0.3, 0.2), c(-0.5, 0.4), c(0.1, -0.7)] {
            check(&LinearStretch { alpha: 2.0 }, z, 1e-8);
            check(&RadialPower { s: 0.2 }, z, 1e-7);
            check(&RimFixedShear { eps: 0.1 }, z, 1e-8);
            check(&g_alpha(3.0), z, 1e-6);
            let b = Bump::with_gradient_bound(c(0.1, 0.0), 0.5, c(1.0, 1.0), 0.9);
            check(&BumpPerturbation { bumps: alloc::vec![b] }, z, 1e-7);
        }
    }

    #[test]
    fn affine_inverse() {
        let a = Affine {
            a: c(1.2, 0.3),
            b: c(0.2, -0.1),
            c: c(0.5, 0.5),
        };
        let inv = a.inverse();
        for z in [c(0.3, 0.2), c(-4.0, 1.0)] {
            assert!((inv.value(a.value(z)) - z).norm() < 1e-14);
        }
    }

    #[test]
    fn radial_inverse_and_distortion() {
        let f = RadialPower { s: 0.2 };
        let g = f.inverse();
        let z = c(0.4, -0.3);
        assert!((g.value(f.value(z)) - z).norm() < 1e-14);
        let (a, b) = f.wirtinger(z);
        let k = (a.norm_sqr() + b.norm_sqr()) / (a.norm_sqr() - b.norm_sqr());
        assert!((k - (1.0 + 0.2 + 0.02) / 1.2).abs() < 1e-14);
    }

    #[test]
    fn g_alpha_fixes_circle() {
        let g = g_alpha(2.0);
        for t in [0.3, 1.0, 2.0, 3.0] {
            let w = Complex64::from_polar(1.0, t);
            assert!((g.value(w) - w).norm() < 1e-12);
        }
    }

    #[test]
    fn generator_is_deterministic_and_admissible() {
        let grid = DomainGrid::new(DomainKind::UnitDisk, 64).unwrap();
        let mut r1 = ChaCha8Rng::seed_from_u64(7);
        let mut r2 = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_boundary_identity_map(&mut r1, &grid);
            let b = random_boundary_identity_map(&mut r2, &grid);
            assert_eq!(a, b);
            assert!(a.min_jacobian(&grid) >= GENERATOR_MIN_J);
            for t in 0..16 {
                let w = Complex64::from_polar(0.999, t as f64);
                assert_eq!(a.value(w), w);
            }
        }
    }

    #[test]
    fn finite_differences_agree_with_closed_form() {
        let grid = Arc::new(DomainGrid::new(DomainKind::UnitDisk, 128).unwrap());
        let m = RimFixedShear { eps: 0.1 };
        let w = wirtinger_derivatives(&m.field(&grid).unwrap(), StencilOrder::Fourth);
        let exact = m.wirtinger_field(&grid);
        for &k in grid.nodes() {
            assert!((w.fz[k] - exact.fz[k]).norm() < 1e-10);
            assert!((w.fzbar[k] - exact.fzbar[k]).norm() < 1e-10);
        }
    }

    proptest! {
        #[test]
        fn bump_gradient_bound_holds(x in -1.0f64..1.0, y in -1.0f64..1.0, r in 0.05f64..0.5) {
            let b = Bump::with_gradient_bound(c(0.0, 0.0), r, c(0.6, -0.8), 0.99);
            let z = c(x * r * 1.2, y * r * 1.2);
            let (p, q) = b.wirtinger(z);
            // operator norm of the real derivative is |φ_z| + |φ_z̄|
            prop_assert!(p.norm() + q.norm() < 1.0);
            if !b.contains(z) {
                prop_assert_eq!(b.value(z), ZERO);
            }
        }
    }
}
