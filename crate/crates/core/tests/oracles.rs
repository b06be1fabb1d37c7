use std::sync::Arc;

use proptest::prelude::*;
use quasiextremal::cayley::DiskMobius;
use quasiextremal::energy::energy_inverse;
use quasiextremal::fields::{distortion, wirtinger_derivatives};
use quasiextremal::hopf::{mobius_invariance_gap, QuadraticDifferentialField};
use quasiextremal::maps::{random_smooth_diffeomorphism, Affine, AnalyticMap, RadialPower, RimFixedShear};
use quasiextremal::ode::{harmonic_closed_form, solve_profile, StepControl};
use quasiextremal::prelude::*;
use quasiextremal::reich_strebel::rs_sides;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn disk(n: usize) -> Arc<DomainGrid> {
    Arc::new(DomainGrid::new(DomainKind::UnitDisk, n).unwrap())
}

/// `𝕂` of the real matrix `[[a, b], [c, d]]` as `‖A‖²_F / (2 det A)`.
fn matrix_k(a: f64, b: f64, c: f64, d: f64) -> f64 {
    (a * a + b * b + c * c + d * d) / (2.0 * (a * d - b * c))
}

#[test]
fn radial_power_distortion_is_constant() {
    let g = disk(64);
    for s in [-0.4, 0.3, 1.5] {
        let map = RadialPower { s };
        let k = distortion(&map.wirtinger_field(&g));
        let expected = (1.0 + s + s * s / 2.0) / (1.0 + s);
        for &n in g.nodes() {
            if g.point(n).norm() > 1e-9 {
                assert!((k.k[n] - expected).abs() < 1e-12, "s={s}: {} vs {expected}", k.k[n]);
            }
        }
    }
}

#[test]
fn affine_inverse_energy_matches_matrix_form() {
    let g = disk(96);
    let a = Complex64::new(1.1, 0.1);
    let b = Complex64::new(0.2, -0.15);
    let f = Affine {
        a,
        b,
        c: Complex64::new(0.0, 0.0),
    }
    .field(&g)
    .unwrap();
    let fx = a + b;
    let fy = Complex64::i() * (a - b);
    let k = matrix_k(fx.re, fy.re, fx.im, fy.im);
    let det = fx.re * fy.im - fx.im * fy.re;
    for psi in [
        ConvexProfile::Linear,
        ConvexProfile::Power(2.0),
        ConvexProfile::Exp(1.0),
    ] {
        let r = energy_inverse(&f, &psi, &WeightField::Unit).unwrap();
        let expected = psi.eval(k) * det * r.nodes_used as f64 * g.cell_area();
        assert!(
            (r.value - expected).abs() < 1e-12 * expected,
            "{psi}: {} vs {expected}",
            r.value
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn finite_difference_distortion_matches_matrix_form(
        ar in 0.5f64..2.0, ai in -0.5f64..0.5, br in -0.3f64..0.3, bi in -0.3f64..0.3,
    ) {
        let g = disk(24);
        let a = Complex64::new(ar, ai);
        let b = Complex64::new(br, bi);
        prop_assume!(a.norm() > b.norm() + 0.1);
        let f = Affine { a, b, c: Complex64::new(0.0, 0.0) }.field(&g).unwrap();
        let k = distortion(&wirtinger_derivatives(&f, StencilOrder::Fourth));
        // f_x = a + b, f_y = i(a − b).
        let fx = a + b;
        let fy = Complex64::i() * (a - b);
        let expected = matrix_k(fx.re, fy.re, fx.im, fy.im);
        for &n in g.nodes() {
            prop_assert!((k.k[n] - expected).abs() < 1e-10 * expected);
        }
    }

    #[test]
    fn harmonic_profiles_follow_sinh(lambda in -3.0f64..-0.1) {
        let p = solve_profile(&ConvexProfile::Linear, &WeightField::HypHalf, lambda, 2.0, StepControl::default()).unwrap();
        let cf = harmonic_closed_form(lambda).unwrap();
        for (&y, &u) in p.ys.iter().zip(&p.us) {
            prop_assert!((u - cf.u(y)).abs() <= 1e-7 * (1.0 + cf.u(y)), "y={y}: {u} vs {}", cf.u(y));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn hopf_differential_is_mobius_invariant(
        eps in -0.2f64..0.2, r in 0.0f64..0.5, t in 0.0f64..std::f64::consts::TAU, theta in -3.0f64..3.0,
    ) {
        let h = RimFixedShear { eps }.field(&disk(64)).unwrap();
        let m = DiskMobius::new(Complex64::from_polar(r, t), theta).unwrap();
        let gap = mobius_invariance_gap(&h, &m, &ConvexProfile::Power(2.0)).unwrap();
        prop_assert!(gap < 1e-8, "gap {gap:.2e}");
    }

    #[test]
    fn reich_strebel_holds_for_smooth_maps(seed in 0u64..1000, c0 in -1.0f64..1.0, c2 in -1.0f64..1.0) {
        let g = disk(48);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_smooth_diffeomorphism(&mut rng).field(&g).unwrap();
        let phi = QuadraticDifferentialField::from_fn(g.clone(), |w| c0 + c2 * w * w + w * w * w);
        let r = rs_sides(&f, &phi).unwrap();
        prop_assert!(r.holds, "slack {:.3e}", r.slack);
    }
}
