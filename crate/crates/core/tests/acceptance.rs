//! Acceptance gate: one test per criterion, each printing a single
//! PASS/FAIL line with the measured quantities.

use std::sync::Arc;
use std::time::Instant;

use quasiextremal::energy::{cov_gap, energy_inverse_with, integrate_density, inverse_density};
use quasiextremal::fields::compose_distortion;
use quasiextremal::hopf::{
    hopf_differential, hopf_from_wirtinger, l1_mass, mobius_invariance_gap, HopfVariant, MassVerdict,
};
use quasiextremal::maps::{
    g_alpha, random_boundary_identity_map, random_smooth_diffeomorphism, AnalyticMap, Bump, BumpPerturbation,
    LinearStretch, RimFixedShear,
};
use quasiextremal::minimizer::{minimize, MinimizeOptions};
use quasiextremal::ode::{
    harmonic_closed_form, power2_exponent, quasiconformality, solve_profile, surjectivity_diagnosis, StepControl,
    Surjectivity,
};
use quasiextremal::prelude::*;
use quasiextremal::reich_strebel::{invert_composition, rs_sides};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(n: usize, name: &str, pass: bool, detail: String) {
    println!(
        "criterion {n:>2} [{name}]: {} | {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

fn list(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn disk(n: usize) -> Arc<DomainGrid> {
    Arc::new(DomainGrid::new(DomainKind::UnitDisk, n).unwrap())
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[test]
fn criterion_01_linear_family_exactness() {
    let t0 = Instant::now();
    let grid = Arc::new(DomainGrid::new(DomainKind::default_half_plane(), 256).unwrap());
    let mut worst_exact: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for alpha in [0.5, 2.0, 3.0] {
        let map = LinearStretch { alpha };
        let h = map.field(&grid).unwrap();
        for psi in [ConvexProfile::Linear, ConvexProfile::Power(2.0)] {
            let k = (1.0 + alpha * alpha) / (2.0 * alpha);
            let expected = c(psi.deriv(k) * (1.0 + alpha) * (1.0 - alpha) / 4.0, 0.0);
            let exact = hopf_from_wirtinger(
                &h,
                &map.wirtinger_field(&grid),
                &psi,
                &WeightField::Unit,
                HopfVariant::Conjugated,
            )
            .unwrap();
            let fd = hopf_differential(&h, &psi, &WeightField::Unit).unwrap();
            worst_exact = worst_exact.max(exact.deviation_from(expected));
            worst_fd = worst_fd.max(fd.deviation_from(expected));
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        1,
        "linear family",
        worst_exact <= 1e-12 && worst_fd <= 1e-4 && secs < 10.0,
        format!("analytic dev {worst_exact:.2e}, finite-difference dev {worst_fd:.2e}, {secs:.2}s"),
    );
}

#[test]
fn criterion_02_hyperbolic_harmonic_oracle() {
    let t0 = Instant::now();
    let lambda = -1.0;
    let profile = solve_profile(
        &ConvexProfile::Linear,
        &WeightField::HypHalf,
        lambda,
        10.0,
        StepControl::default(),
    )
    .unwrap();
    let cf = harmonic_closed_form(lambda).unwrap();
    let mut worst: f64 = 0.0;
    for j in 0..=200 {
        let y = 10.0 * j as f64 / 200.0;
        let (u, _) = profile.u_at(y).unwrap();
        let want = cf.u(y);
        let rel = if want == 0.0 {
            u.abs()
        } else {
            (u - want).abs() / want.abs()
        };
        worst = worst.max(rel);
    }
    let zero = solve_profile(
        &ConvexProfile::Linear,
        &WeightField::HypHalf,
        0.0,
        10.0,
        StepControl::default(),
    )
    .unwrap();
    let identity = zero.ys.iter().zip(&zero.us).all(|(y, u)| y == u);
    let mut sups = Vec::new();
    let mut qc_flags = Vec::new();
    for y_max in [1.25, 2.5, 5.0, 10.0] {
        let p = solve_profile(
            &ConvexProfile::Linear,
            &WeightField::HypHalf,
            lambda,
            y_max,
            StepControl::default(),
        )
        .unwrap();
        sups.push(p.distortions().into_iter().fold(0.0, f64::max));
        qc_flags.push(quasiconformality(&p).unwrap().quasiconformal);
    }
    let monotone = sups.windows(2).all(|w| w[1] > 2.0 * w[0]);
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        2,
        "hyperbolic harmonic",
        worst <= 1e-8 && identity && monotone && qc_flags.iter().all(|q| !q) && secs < 5.0,
        format!(
            "max rel err {worst:.2e}, lambda=0 identity {identity}, sup K {}, {secs:.2}s",
            list(&sups)
        ),
    );
}

#[test]
fn criterion_03_power_two_exponents() {
    let t0 = Instant::now();
    let psi = ConvexProfile::Power(2.0);
    let pos = solve_profile(&psi, &WeightField::HypHalf, 1.0, 1e4, StepControl::default()).unwrap();
    let neg = solve_profile(&psi, &WeightField::HypHalf, -1.0, 1e4, StepControl::default()).unwrap();
    let a = power2_exponent(&pos, 1e2, 1e4).unwrap();
    let b = power2_exponent(&neg, 1e2, 1e4).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        3,
        "psi=t^2 exponents",
        (a - 1.0 / 3.0).abs() <= 0.02 && (b - 3.0).abs() <= 0.05 && secs < 10.0,
        format!("lambda>0 slope {a:.4}, lambda<0 slope {b:.4}, {secs:.2}s"),
    );
}

#[test]
fn criterion_04_surjectivity_verdicts() {
    let mut lines = Vec::new();
    let mut pass = true;
    let cases: [(ConvexProfile, f64, Surjectivity); 7] = [
        (ConvexProfile::Power(3.0), 1.0, Surjectivity::Surjective),
        (ConvexProfile::Power(4.0), 1.0, Surjectivity::Surjective),
        (ConvexProfile::Power(2.0), 1.0, Surjectivity::NotSurjective),
        (ConvexProfile::Power(2.0), -1.0, Surjectivity::Surjective),
        (ConvexProfile::Power(3.0), -0.5, Surjectivity::Surjective),
        (ConvexProfile::Linear, -1.0, Surjectivity::Surjective),
        (ConvexProfile::Exp(1.0), -1.0, Surjectivity::Surjective),
    ];
    for (psi, lambda, want) in cases {
        let got = match solve_profile(&psi, &WeightField::HypHalf, lambda, 1e3, StepControl::default()) {
            Ok(p) => surjectivity_diagnosis(&p).map(|r| r.verdict).ok(),
            Err(e) => {
                lines.push(format!("{psi} lambda={lambda}: {e}"));
                None
            }
        };
        pass &= got == Some(want);
        lines.push(format!("{psi} lambda={lambda}: {got:?}"));
    }
    verdict(4, "surjectivity", pass, lines.join("; "));
}

#[test]
fn criterion_05_reich_strebel_battery() {
    let t0 = Instant::now();
    let g = disk(128);
    let phis: Vec<QuadraticDifferentialField> = vec![
        QuadraticDifferentialField::from_fn(g.clone(), |_| c(1.0, 0.0)),
        QuadraticDifferentialField::from_fn(g.clone(), |w| w),
        QuadraticDifferentialField::from_fn(g.clone(), |w| w * w),
        QuadraticDifferentialField::from_fn(g.clone(), |w| 1.0 + w * w * w),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(20240615);
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..200 {
        let f = random_boundary_identity_map(&mut rng, &g).field(&g).unwrap();
        for phi in &phis {
            let r = rs_sides(&f, phi).unwrap();
            let rel = r.slack / r.lhs;
            worst = worst.min(rel);
            if rel < -1e-9 {
                violations += 1;
            }
        }
    }
    let id = MappingField::identity(g.clone());
    let mut eq: f64 = 0.0;
    for phi in &phis {
        let r = rs_sides(&id, phi).unwrap();
        eq = eq.max((r.rhs - r.lhs).abs() / r.lhs);
    }
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        5,
        "reich-strebel battery",
        violations == 0 && eq <= 1e-12 && secs < 120.0,
        format!("800 cases, worst relative slack {worst:.3e}, identity gap {eq:.1e}, {secs:.1}s"),
    );
}

/// Boundary-identity diffeomorphisms of the disk (identity near the rim).
fn smooth_test_set() -> Vec<BumpPerturbation> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut set: Vec<BumpPerturbation> = (0..3).map(|_| random_smooth_diffeomorphism(&mut rng)).collect();
    set.push(BumpPerturbation {
        bumps: vec![Bump::with_gradient_bound(c(0.0, 0.0), 0.6, c(1.0, 0.5), 0.6)],
    });
    set.push(BumpPerturbation {
        bumps: vec![Bump::with_gradient_bound(c(0.0, 0.0), 0.8, c(1.0, 1.0), 0.8)],
    });
    set
}

#[test]
fn criterion_06_change_of_variables() {
    let psi = ConvexProfile::Power(2.0);
    let mut lines = Vec::new();
    let mut pass = true;
    for (m, map) in smooth_test_set().iter().enumerate() {
        let mut gaps = Vec::new();
        for n in [64, 128, 256] {
            let g = disk(n);
            let f = map.field(&g).unwrap();
            let inv = invert_composition(&MappingField::identity(g.clone()), &f).unwrap();
            gaps.push(cov_gap(&f, &inv.xi, &psi, &WeightField::Unit).unwrap().gap);
        }
        let halving = gaps.windows(2).all(|w| w[1] * 2.0 <= w[0]);
        pass &= gaps[2] <= 1e-3 && halving;
        lines.push(format!("map {m}: {}", list(&gaps)));
    }
    verdict(6, "change of variables", pass, lines.join("; "));
}

#[test]
fn criterion_07_l1_necessity() {
    let psi = ConvexProfile::Linear;
    let weight = WeightField::Cayley;
    let g = disk(256);
    let mut lines = Vec::new();
    let mut pass = true;
    for alpha in [2.0, 3.0] {
        let map = g_alpha(alpha);
        let h = map.field(&g).unwrap();
        let wh = map.wirtinger_field(&g);
        let id = MappingField::identity(g.clone());
        let wid = quasiextremal::maps::Identity.wirtinger_field(&g);
        let dh = inverse_density(&h, &wh, &psi, &weight).unwrap();
        let did = inverse_density(&id, &wid, &psi, &weight).unwrap();
        let mut gaps = Vec::new();
        for rho in [0.4, 0.2, 0.1, 0.05] {
            let keep = |_: usize, z: Complex64| (z + 1.0).norm() > rho;
            let eh = integrate_density(&g, &dh, keep).unwrap().value;
            let ei = integrate_density(&g, &did, keep).unwrap().value;
            gaps.push(eh - ei);
        }
        let whole = energy_inverse_with(&h, &wh, &psi, &weight).unwrap().value
            - energy_inverse_with(&id, &wid, &psi, &weight).unwrap().value;
        let positive = gaps.iter().all(|&d| d > 0.0) && whole > 0.0;
        let mass = l1_mass(&[64, 128, 256], |n| {
            hopf_differential(&g_alpha(alpha).field(&disk(n))?, &psi, &weight)
        })
        .unwrap();
        pass &= positive && mass.verdict == MassVerdict::Divergent;
        lines.push(format!(
            "alpha={alpha}: gaps {}, L1 masses {} {:?}",
            list(&gaps),
            list(&mass.masses),
            mass.verdict
        ));
    }
    let phi1 = hopf_differential(&g_alpha(1.0).field(&g).unwrap(), &psi, &weight).unwrap();
    pass &= phi1.max_abs() == 0.0;
    lines.push(format!("alpha=1: max|Phi| {:.1e}", phi1.max_abs()));
    verdict(7, "L1 necessity", pass, lines.join("; "));
}

/// `K = ‖A‖²_F / (2 det A)` for the real matrix of `z ↦ a z + b z̄`.
fn linear_k(a: Complex64, b: Complex64) -> f64 {
    let fx = a + b;
    let fy = Complex64::i() * (a - b);
    let frob = fx.norm_sqr() + fy.norm_sqr();
    let det = fx.re * fy.im - fx.im * fy.re;
    frob / (2.0 * det)
}

#[test]
fn criterion_08_composition_lemma() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let mut disk_pt =
            |r: f64| Complex64::from_polar(r * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
        let (mu_xi, mu_h) = (disk_pt(0.95), disk_pt(0.95));
        let (a, cc) = (disk_pt(3.0) + 0.1, disk_pt(3.0) + 0.1);
        // h(z) = a(z + μ_h z̄), ξ(z) = c(z + μ_ξ z̄); H = h ∘ ξ⁻¹ is linear.
        let (ha, hb) = (a, a * mu_h);
        let (xa, xb) = (cc, cc * mu_xi);
        let j = xa.norm_sqr() - xb.norm_sqr();
        let (ia, ib) = (xa.conj() / j, -xb / j);
        let big_a = ha * ia + hb * ib.conj();
        let big_b = ha * ib + hb * ia.conj();
        let oracle = linear_k(big_a, big_b);
        let lemma = compose_distortion(mu_xi, mu_h).unwrap();
        worst = worst.max((lemma - oracle).abs() / oracle);
    }
    verdict(
        8,
        "composition lemma",
        worst <= 1e-12,
        format!("1000 pairs, max rel err {worst:.2e}"),
    );
}

#[test]
fn criterion_09_minimizer_sanity() {
    let t0 = Instant::now();
    let g = disk(128);
    let bump = BumpPerturbation {
        bumps: vec![Bump::with_gradient_bound(c(0.1, 0.05), 0.4, c(1.0, 1.0), 1.0)],
    }
    .scaled(0.05);
    let start = bump.field(&g).unwrap();
    let psi = ConvexProfile::Power(2.0);
    let boundary = start.boundary_trace().to_vec();
    let (out, trace) = minimize(&boundary, &start, &psi, &WeightField::Unit, &MinimizeOptions::default()).unwrap();
    let strictly = trace.steps.windows(2).all(|w| w[1].energy < w[0].energy)
        && trace.steps.first().is_some_and(|s| s.energy < trace.initial_energy);
    let min_j = trace.steps.iter().map(|s| s.min_j).fold(f64::INFINITY, f64::min);
    let dist = out.sup_distance_to_identity();
    let final_dbar = trace.sweeps.last().map_or(f64::NAN, |s| s.dbar);
    let reduction = trace.initial_dbar / final_dbar;
    let boundary_kept = out.boundary_trace() == boundary.as_slice();
    let secs = t0.elapsed().as_secs_f64();
    verdict(
        9,
        "minimizer sanity",
        strictly && dist <= 1e-3 && reduction >= 10.0 && min_j > 1e-3 && boundary_kept && secs < 300.0,
        format!(
            "{} steps in {} sweeps ({:?}), energy {:.6} -> {:.6}, sup|h-id| {dist:.2e}, dbar {:.2e} -> {final_dbar:.2e} ({reduction:.1}x), min J {min_j:.3}, {secs:.1}s",
            trace.steps.len(),
            trace.sweeps.len(),
            trace.termination,
            trace.initial_energy,
            trace.final_energy(),
            trace.initial_dbar
        ),
    );
}

#[test]
fn criterion_10_mobius_invariance() {
    let g = disk(256);
    let psi = ConvexProfile::Power(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut family = vec![
        RimFixedShear { eps: 0.1 }.field(&g).unwrap(),
        MappingField::from_fn(g.clone(), |z| z * (1.0 + 0.05 * (z.norm_sqr() - 1.0))).unwrap(),
    ];
    for _ in 0..2 {
        family.push(random_boundary_identity_map(&mut rng, &g).field(&g).unwrap());
    }
    let mobius = [
        DiskMobius::new(c(0.3, 0.0), 1.0).unwrap(),
        DiskMobius::new(c(-0.2, 0.4), -0.5).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for h in &family {
        for m in &mobius {
            worst = worst.max(mobius_invariance_gap(h, m, &psi).unwrap());
        }
    }
    verdict(
        10,
        "mobius invariance",
        worst <= 1e-4,
        format!(
            "{} maps x {} Mobius maps, max gap {worst:.2e}",
            family.len(),
            mobius.len()
        ),
    );
}
