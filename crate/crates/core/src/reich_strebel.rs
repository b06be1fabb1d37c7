//! Numerical checks of the Reich–Strebel family of inequalities, the
//! pointwise Teichmüller inequality and the energy-gap decomposition.
//!
//! Throughout, `σ = φ/|φ|` and `D_f = |f_z − σ f_z̄|`. Nodes where
//! `|φ| < 10⁻¹² max|φ|` have no direction `σ`; they are excluded from every
//! term that needs it and their measure is reported.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::energy::{ConvexProfile, WeightField};
use crate::fields::grid::{DomainGrid, DomainKind, StencilOrder};
use crate::fields::{beltrami, compose_distortion, distortion_at, wirtinger_derivatives, MappingField, WirtingerField};
use crate::hopf::{dbar_residual, hopf_from_wirtinger, HopfVariant, QuadraticDifferentialField};
use crate::math::pairwise_sum;
use crate::tolerances::{
    GAP_TOL_FLOOR, GAP_TOL_H2, INEQUALITY_TOL, MAX_DEGENERATE_FRACTION, MIN_COVERAGE, PAIRING_TOL, PHI_ZERO_RELATIVE,
};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InequalityReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub slack: f64,
    /// Intermediate term of a chained inequality, when there is one.
    pub middle: Option<f64>,
    /// Smallest nodewise slack for pointwise inequalities.
    pub worst_node_slack: Option<f64>,
    /// `sup |f − id|` on the boundary (unit circle for disk grids).
    pub boundary_gap: f64,
    /// `max |∂φ/∂w̄|`, NaN when the residual could not be evaluated.
    pub phi_dbar: f64,
    pub phi_l1: f64,
    /// Area of nodes where `φ` is numerically zero.
    pub phi_excluded_area: f64,
    /// Nodes violating a hypothesis of the inequality.
    pub hypothesis_violations: usize,
    /// Nodes where equality is attained (pointwise variants).
    pub equality_nodes: Option<usize>,
    pub holds: bool,
}

impl InequalityReport {
    fn new(name: &str, lhs: f64, rhs: f64, diag: &PhiDiagnostics, boundary_gap: f64) -> Self {
        let slack = rhs - lhs;
        InequalityReport {
            name: name.into(),
            lhs,
            rhs,
            slack,
            middle: None,
            worst_node_slack: None,
            boundary_gap,
            phi_dbar: diag.dbar,
            phi_l1: diag.l1,
            phi_excluded_area: diag.excluded_area,
            hypothesis_violations: 0,
            equality_nodes: None,
            holds: slack >= -INEQUALITY_TOL * lhs.abs().max(1.0),
        }
    }
}

struct PhiDiagnostics {
    dbar: f64,
    l1: f64,
    excluded_area: f64,
    eps: f64,
}

fn phi_diagnostics(phi: &QuadraticDifferentialField) -> PhiDiagnostics {
    let eps = PHI_ZERO_RELATIVE * phi.max_abs();
    let g = phi.grid();
    let small = g
        .nodes()
        .iter()
        .filter(|&&k| phi.phi[k].norm() < eps || phi.phi[k].norm() == 0.0)
        .count();
    PhiDiagnostics {
        dbar: dbar_residual(phi).map(|r| r.max_dbar).unwrap_or(f64::NAN),
        l1: phi.l1_norm(),
        excluded_area: small as f64 * g.cell_area(),
        eps,
    }
}

/// `sup |f − id|` on the unit circle for disk grids, at boundary nodes
/// otherwise.
pub fn boundary_identity_gap(f: &MappingField) -> f64 {
    boundary_gap_between(f, Some)
}

fn boundary_gap_between<F: Fn(Complex64) -> Option<Complex64>>(f: &MappingField, other: F) -> f64 {
    let g = f.grid();
    let mut worst: f64 = 0.0;
    let mut any = false;
    if g.kind() == DomainKind::UnitDisk {
        let m = 4 * g.n();
        for q in 0..m {
            let p = Complex64::from_polar(1.0, core::f64::consts::TAU * (q as f64 + 0.5) / m as f64);
            if let (Some(a), Some(b)) = (f.sample(p), other(p)) {
                worst = worst.max((a - b).norm());
                any = true;
            }
        }
    }
    if !any {
        for &k in g.boundary() {
            if let Some(b) = other(g.point(k)) {
                worst = worst.max((f.value(k) - b).norm());
            }
        }
    }
    worst
}

struct Sides {
    wf: WirtingerField,
    /// `|φ(f(z))|` per node.
    phi_f: Vec<f64>,
    /// `φ(f(z))` per node.
    phi_f_c: Vec<Complex64>,
    /// `D_f` per node, NaN where σ is undefined.
    d: Vec<f64>,
}

fn same_grid(a: &Arc<DomainGrid>, b: &Arc<DomainGrid>) -> bool {
    Arc::ptr_eq(a, b) || (a.kind() == b.kind() && a.n() == b.n() && a.inside_mask() == b.inside_mask())
}

fn sides(f: &MappingField, phi: &QuadraticDifferentialField, eps: f64) -> Result<Sides> {
    let g = f.grid();
    if !same_grid(g, phi.grid()) {
        return Err(Error::Config(
            "mapping and quadratic differential must share a grid".into(),
        ));
    }
    let wf = wirtinger_derivatives(f, StencilOrder::Fourth);
    let bad = g.nodes().iter().filter(|&&k| !(wf.jac[k] > 0.0)).count();
    let fraction = bad as f64 / g.nodes().len().max(1) as f64;
    if fraction > MAX_DEGENERATE_FRACTION {
        return Err(Error::Degenerate { fraction, count: bad });
    }
    let mut phi_f = vec![f64::NAN; g.len()];
    let mut phi_f_c = vec![Complex64::new(f64::NAN, 0.0); g.len()];
    let mut d = vec![f64::NAN; g.len()];
    let mut outside = 0usize;
    let mut first = None;
    for &k in g.nodes() {
        match phi.grid().sample(&phi.phi, f.value(k)) {
            Some(v) if v.is_finite() => {
                phi_f[k] = v.norm();
                phi_f_c[k] = v;
            }
            _ => {
                outside += 1;
                first.get_or_insert(f.value(k));
                continue;
            }
        }
        let p = phi.phi[k];
        if p.norm() >= eps && p.norm() > 0.0 {
            let s = p / p.norm();
            d[k] = (wf.fz[k] - s * wf.fzbar[k]).norm();
        }
    }
    if outside > 0 {
        return Err(Error::range(
            "sampled quadratic differential",
            outside,
            first.unwrap_or_default(),
        ));
    }
    Ok(Sides { wf, phi_f, phi_f_c, d })
}

fn integrate<F: FnMut(usize) -> f64>(g: &DomainGrid, mut f: F) -> f64 {
    let v: Vec<f64> = g.nodes().iter().map(|&k| f(k)).filter(|x| !x.is_nan()).collect();
    pairwise_sum(&v) * g.cell_area()
}

/// Both sides of `∫|φ| ≤ ∫ √|φ(f)| √|φ| |f_z − σ f_z̄|` for a
/// boundary-identity self-map `f` of the disk and `φ` on the same grid.
pub fn rs_sides(f: &MappingField, phi: &QuadraticDifferentialField) -> Result<InequalityReport> {
    let diag = phi_diagnostics(phi);
    let s = sides(f, phi, diag.eps)?;
    let g = f.grid();
    let lhs = integrate(g, |k| phi.phi[k].norm());
    let rhs = integrate(g, |k| {
        if s.d[k].is_nan() {
            0.0
        } else {
            (s.phi_f[k] * phi.phi[k].norm()).sqrt() * s.d[k]
        }
    });
    let mut r = InequalityReport::new("reich-strebel", lhs, rhs, &diag, boundary_identity_gap(f));
    r.hypothesis_violations = g.nodes().iter().filter(|&&k| !(s.wf.jac[k] > 0.0)).count();
    Ok(r)
}

/// The two Cauchy–Schwarz consequences of the Reich–Strebel inequality:
///
/// `∫|φ(f)| D_f² ≥ (∫√|φ(f)|√|φ| D_f)² / ∫|φ| ≥ ∫|φ|` and
/// `∫|φ| D_f²/J_f ≥ (∫√|φ(f)|√|φ| D_f)² / ∫|φ(f)|J_f ≥ ∫|φ|`.
///
/// Each report has `lhs = ∫|φ|`, `rhs` the outer integral and `middle` the
/// quotient; `holds` requires both links of the chain.
pub fn rs_lower_bounds(
    f: &MappingField,
    phi: &QuadraticDifferentialField,
) -> Result<(InequalityReport, InequalityReport)> {
    let diag = phi_diagnostics(phi);
    let s = sides(f, phi, diag.eps)?;
    let g = f.grid();
    let gap = boundary_identity_gap(f);
    let l = integrate(g, |k| phi.phi[k].norm());
    let a = integrate(g, |k| {
        if s.d[k].is_nan() {
            0.0
        } else {
            (s.phi_f[k] * phi.phi[k].norm()).sqrt() * s.d[k]
        }
    });
    let outer2 = integrate(g, |k| {
        if s.d[k].is_nan() {
            0.0
        } else {
            s.phi_f[k] * s.d[k] * s.d[k]
        }
    });
    let outer3 = integrate(g, |k| {
        if s.d[k].is_nan() {
            0.0
        } else {
            phi.phi[k].norm() * s.d[k] * s.d[k] / s.wf.jac[k]
        }
    });
    let pull = integrate(g, |k| s.phi_f[k] * s.wf.jac[k]);
    let chain = |name: &str, outer: f64, middle: f64| {
        let mut r = InequalityReport::new(name, l, outer, &diag, gap);
        r.middle = Some(middle);
        let tol = INEQUALITY_TOL * l.abs().max(1.0);
        r.holds = outer - middle >= -tol && middle - l >= -tol;
        r
    };
    let m2 = if l > 0.0 { a * a / l } else { 0.0 };
    let m3 = if pull > 0.0 { a * a / pull } else { 0.0 };
    Ok((
        chain("cauchy-schwarz-2", outer2, m2),
        chain("cauchy-schwarz-3", outer3, m3),
    ))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AlignmentReport {
    /// `max |μ_h − |μ_h| conj(φ)/|φ||` over valid nodes.
    pub residual: f64,
    pub valid_nodes: usize,
}

/// Alignment of `μ_h` with the direction field of `φ`.
pub fn alignment_residual(h: &MappingField, phi: &QuadraticDifferentialField) -> Result<AlignmentReport> {
    alignment_residual_with(&wirtinger_derivatives(h, StencilOrder::Fourth), phi)
}

pub fn alignment_residual_with(w: &WirtingerField, phi: &QuadraticDifferentialField) -> Result<AlignmentReport> {
    let g = w.grid();
    let eps = PHI_ZERO_RELATIVE * phi.max_abs();
    let mu = beltrami(w);
    let total = g.nodes().len();
    let nonzero = g
        .nodes()
        .iter()
        .filter(|&&k| phi.phi[k].norm() >= eps && phi.phi[k].norm() > 0.0)
        .count();
    let required = (MIN_COVERAGE * total as f64).ceil() as usize;
    if nonzero < required {
        return Err(Error::Coverage {
            valid: nonzero,
            required,
        });
    }
    let mut residual: f64 = 0.0;
    let mut valid = 0;
    for &k in g.nodes() {
        let p = phi.phi[k];
        if !(p.norm() >= eps && p.norm() > 0.0) || !mu.valid[k] {
            continue;
        }
        let m = mu.mu[k];
        residual = residual.max((m - m.norm() * p.conj() / p.norm()).norm());
        valid += 1;
    }
    Ok(AlignmentReport {
        residual,
        valid_nodes: valid,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointwiseTeichReport {
    pub inequality: InequalityReport,
    /// `max |μ_{f⁻¹}(f(z)) − |μ_f| conj(σ(f(z)))|`, the alignment of the
    /// inverse of `f` expressed at the source nodes.
    pub inverse_alignment: f64,
}

/// The chain `|(1−|μ_f|)(g_z conj(f_z) − σ g_z̄ f_z)|²/J_f²
/// ≤ (1−|μ_f|)²(|g_z|+|g_z̄|)²|f_z|²/J_f² = ((1−|μ_f|)(1+|μ_g|))/((1+|μ_f|)(1−|μ_g|)) J_g/J_f
/// ≤ J_g/J_f`, with `σ = φ(f)/|φ(f)|`, checked at every node.
///
/// Nodes with `|μ_g| > |μ_f|` break the last link and are counted as
/// hypothesis violations.
pub fn pointwise_teich(
    f: &MappingField,
    g: &MappingField,
    phi: &QuadraticDifferentialField,
) -> Result<PointwiseTeichReport> {
    let diag = phi_diagnostics(phi);
    let grid = f.grid();
    if !same_grid(grid, g.grid()) {
        return Err(Error::Config("f and g must share a grid".into()));
    }
    let wf = wirtinger_derivatives(f, StencilOrder::Fourth);
    let wg = wirtinger_derivatives(g, StencilOrder::Fourth);
    for w in [&wf, &wg] {
        let bad = grid.nodes().iter().filter(|&&k| !(w.jac[k] > 0.0)).count();
        let fraction = bad as f64 / grid.nodes().len().max(1) as f64;
        if fraction > MAX_DEGENERATE_FRACTION {
            return Err(Error::Degenerate { fraction, count: bad });
        }
    }
    let mut phi_f_c = vec![Complex64::new(f64::NAN, 0.0); grid.len()];
    let mut outside = 0;
    let mut first = None;
    for &k in grid.nodes() {
        match phi.grid().sample(&phi.phi, f.value(k)) {
            Some(v) if v.is_finite() => phi_f_c[k] = v,
            _ => {
                outside += 1;
                first.get_or_insert(f.value(k));
            }
        }
    }
    if outside > 0 {
        return Err(Error::range(
            "sampled quadratic differential",
            outside,
            first.unwrap_or_default(),
        ));
    }
    let s = Sides {
        wf,
        phi_f: Vec::new(),
        phi_f_c,
        d: Vec::new(),
    };
    let mut lhs_v = Vec::new();
    let mut rhs_v = Vec::new();
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    let mut equal = 0;
    let mut align: f64 = 0.0;
    for &k in grid.nodes() {
        let (fz, fzb, gz, gzb) = (s.wf.fz[k], s.wf.fzbar[k], wg.fz[k], wg.fzbar[k]);
        let (jf, jg) = (s.wf.jac[k], wg.jac[k]);
        let pf = s.phi_f_c[k];
        if !(jf > 0.0 && jg > 0.0)
            || !(pf.norm() >= diag.eps && pf.norm() > 0.0)
            || fz.norm() == 0.0
            || gz.norm() == 0.0
        {
            continue;
        }
        let sigma = pf / pf.norm();
        let mf = (fzb / fz).norm();
        let mg = (gzb / gz).norm();
        let lhs = ((1.0 - mf) * (gz * fz.conj() - sigma * gzb * fz) / jf).norm_sqr();
        let middle = (1.0 - mf) * (1.0 + mg) / ((1.0 + mf) * (1.0 - mg)) * jg / jf;
        let rhs = jg / jf;
        if mg > mf * (1.0 + 1e-12) + 1e-14 {
            violations += 1;
        }
        if ((fzb / fz) - (gzb / gz)).norm() <= 1e-8 {
            equal += 1;
        }
        let slack = (rhs - lhs) / rhs.max(1.0);
        let _ = middle;
        worst = worst.min(slack);
        let mu_inv = -(fzb / fz) * fz / fz.conj();
        align = align.max((mu_inv - mf * sigma.conj()).norm());
        lhs_v.push(lhs);
        rhs_v.push(rhs);
    }
    let area = grid.cell_area();
    let lhs = pairwise_sum(&lhs_v) * area;
    let rhs = pairwise_sum(&rhs_v) * area;
    let mut r = InequalityReport::new(
        "pointwise-teichmuller",
        lhs,
        rhs,
        &diag,
        boundary_gap_between(f, |z| g.sample(z)),
    );
    r.worst_node_slack = Some(worst);
    r.hypothesis_violations = violations;
    r.equality_nodes = Some(equal);
    r.holds = worst >= -INEQUALITY_TOL;
    Ok(PointwiseTeichReport {
        inequality: r,
        inverse_alignment: align,
    })
}

/// Middle term of the pointwise chain, exposed for tests:
/// `((1−|μ_f|)(1+|μ_g|))/((1+|μ_f|)(1−|μ_g|)) · J_g/J_f`.
pub fn pointwise_middle(fz: Complex64, fzbar: Complex64, gz: Complex64, gzbar: Complex64) -> f64 {
    let mf = (fzbar / fz).norm();
    let mg = (gzbar / gz).norm();
    let jf = fz.norm_sqr() - fzbar.norm_sqr();
    let jg = gz.norm_sqr() - gzbar.norm_sqr();
    (1.0 - mf) * (1.0 + mg) / ((1.0 + mf) * (1.0 - mg)) * jg / jf
}

/// Nearest-node lookup of mapping values on a uniform bucket grid.
struct ValueLocator {
    x0: f64,
    y0: f64,
    cell: f64,
    m: usize,
    buckets: Vec<Vec<usize>>,
}

impl ValueLocator {
    fn new(f: &MappingField) -> Self {
        let g = f.grid();
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &k in g.nodes() {
            let v = f.value(k);
            x0 = x0.min(v.re);
            x1 = x1.max(v.re);
            y0 = y0.min(v.im);
            y1 = y1.max(v.im);
        }
        let m = g.n().max(1);
        let cell = ((x1 - x0).max(y1 - y0) / m as f64).max(1e-300);
        let mut buckets = vec![Vec::new(); m * m];
        let mut loc = ValueLocator {
            x0,
            y0,
            cell,
            m,
            buckets: Vec::new(),
        };
        for &k in g.nodes() {
            let (i, j) = loc.bucket(f.value(k));
            buckets[j * m + i].push(k);
        }
        loc.buckets = buckets;
        loc
    }

    fn bucket(&self, p: Complex64) -> (usize, usize) {
        let i = ((p.re - self.x0) / self.cell).floor().clamp(0.0, (self.m - 1) as f64) as usize;
        let j = ((p.im - self.y0) / self.cell).floor().clamp(0.0, (self.m - 1) as f64) as usize;
        (i, j)
    }

    fn nearest(&self, f: &MappingField, p: Complex64) -> Option<usize> {
        let (ci, cj) = self.bucket(p);
        let mut best: Option<(f64, usize)> = None;
        for r in 0..self.m as isize {
            for dj in -r..=r {
                for di in -r..=r {
                    if di.abs() != r && dj.abs() != r {
                        continue;
                    }
                    let (i, j) = (ci as isize + di, cj as isize + dj);
                    if i < 0 || j < 0 || i >= self.m as isize || j >= self.m as isize {
                        continue;
                    }
                    for &k in &self.buckets[j as usize * self.m + i as usize] {
                        let d = (f.value(k) - p).norm();
                        if best.is_none_or(|(bd, _)| d < bd) {
                            best = Some((d, k));
                        }
                    }
                }
            }
            if let Some((bd, _)) = best {
                if bd <= (r as f64) * self.cell {
                    break;
                }
            }
        }
        best.map(|(_, k)| k)
    }
}

#[derive(Clone, Debug)]
pub struct Inversion {
    /// `ξ = H⁻¹ ∘ h` on `h`'s grid, restricted to nodes where Newton
    /// converged.
    pub xi: MappingField,
    pub failures: usize,
    /// `max |H(ξ(z)) − h(z)|` over converged nodes.
    pub residual: f64,
}

/// `H⁻¹ ∘ h` by Newton's method on the bicubic interpolants of `H` and of
/// its Wirtinger derivatives, seeded at the node of `H` whose value is
/// nearest to `h(z)`.
pub fn invert_composition(h: &MappingField, big_h: &MappingField) -> Result<Inversion> {
    let wh = wirtinger_derivatives(big_h, StencilOrder::Fourth);
    let hg = big_h.grid();
    let locator = ValueLocator::new(big_h);
    let g = h.grid();
    let mut xi = vec![Complex64::new(f64::NAN, f64::NAN); g.len()];
    let mut failures = 0;
    let mut residual: f64 = 0.0;
    let scale = hg.spacing();
    let newton = |target: Complex64, mut w: Complex64| -> Option<(Complex64, f64)> {
        for _ in 0..40 {
            let v = big_h.sample(w)?;
            let r = v - target;
            if r.norm() <= 1e-13 * (1.0 + target.norm()) {
                return Some((w, r.norm()));
            }
            let a = hg.sample(&wh.fz, w)?;
            let b = hg.sample(&wh.fzbar, w)?;
            let det = a.norm_sqr() - b.norm_sqr();
            if !(det > 0.0) {
                return None;
            }
            let delta = (a.conj() * (-r) - b * (-r).conj()) / det;
            let step = if delta.norm() > scale {
                delta * (scale / delta.norm())
            } else {
                delta
            };
            w += step;
        }
        let v = big_h.sample(w)?;
        let r = (v - target).norm();
        if r <= 1e-10 * (1.0 + target.norm()) {
            Some((w, r))
        } else {
            None
        }
    };
    let mut prev: Option<Complex64> = None;
    for &k in g.nodes() {
        let target = h.value(k);
        let mut found = prev.and_then(|w0| newton(target, w0));
        if found.is_none() {
            if let Some(seed) = locator.nearest(big_h, target) {
                found = newton(target, hg.point(seed));
            }
        }
        match found {
            Some((w, r)) => {
                xi[k] = w;
                residual = residual.max(r);
                prev = Some(w);
            }
            None => failures += 1,
        }
    }
    let total = g.nodes().len();
    if failures as f64 > 0.001 * total as f64 {
        return Err(Error::Invertibility { failures, residual });
    }
    let restricted = Arc::new(g.restrict(|k, _| !xi[k].re.is_nan()));
    Ok(Inversion {
        xi: MappingField::from_values(restricted, xi)?,
        failures,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyGapReport {
    /// `E(H) − E(h)` with `E(H)` pulled back to the domain of `h` through
    /// `ξ = H⁻¹ ∘ h`, using the derivatives of `H` sampled at `ξ`.
    pub gap: f64,
    /// `E(H) − E(h)` from independent quadratures when both maps live on
    /// the same grid.
    pub direct_gap: Option<f64>,
    /// The same gap with `𝕂(ξ, H)` from the composition formula.
    pub lemma_gap: f64,
    /// `2∫(|h_z|−|h_z̄|)²|ξ_z̄|²/J_ξ · Ψ′(𝕂_h) λ(h)`.
    pub term1: f64,
    /// `2∫(|ξ_z − σξ_z̄|²/J_ξ − 1)|φ|` with `φ = Φ_h`.
    pub term2: f64,
    pub energy_h: f64,
    pub tol: f64,
    pub boundary_gap: f64,
    pub inversion_failures: usize,
    pub inversion_residual: f64,
    /// Nodes where `Ψ(y) − Ψ(x) < (y − x)Ψ′(x)` beyond rounding.
    pub convexity_failures: usize,
    /// Nodes where the term-1 density is negative.
    pub negative_term1_nodes: usize,
    pub phi_dbar: f64,
    pub phi_holomorphic: bool,
    pub phi_l1: f64,
    /// Hypotheses met: `Φ_h` numerically holomorphic with finite mass.
    pub certified: bool,
    /// `gap ≥ term1 + term2 − tol` and `gap ≥ −tol`.
    pub bound_holds: bool,
    /// `sup |ξ_z̄|` and `sup |ξ − id|`.
    pub xi_zbar_sup: f64,
    pub xi_distance: f64,
}

fn energy_integrand(psi: &ConvexProfile, k: f64, lam: f64, jac: f64) -> f64 {
    psi.eval(k) * lam * jac
}

/// Energy gap between `h` and a competitor `H` with the same boundary
/// values, with the two terms of its lower bound.
///
/// Convexity gives, node by node, `Ψ(𝕂_H(ξ)) − Ψ(𝕂_h) ≥ Ψ′(𝕂_h)(𝕂_H(ξ) − 𝕂_h)`,
/// and `Ψ′(𝕂_h)(𝕂_H(ξ) − 𝕂_h) λ(h) J_h` equals the sum of the term-1 and
/// term-2 densities exactly.
pub fn energy_gap(
    h: &MappingField,
    big_h: &MappingField,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Result<EnergyGapReport> {
    let g = h.grid();
    let boundary_gap = boundary_gap_between(h, |z| big_h.sample(z));
    let tol = GAP_TOL_FLOOR.max(GAP_TOL_H2 * g.spacing() * g.spacing());
    if !(boundary_gap <= PAIRING_TOL.max(tol)) {
        return Err(Error::Pairing(alloc::format!(
            "boundary traces differ by {boundary_gap:.3e}"
        )));
    }
    let wh = wirtinger_derivatives(h, StencilOrder::Fourth);
    let bad = g.nodes().iter().filter(|&&k| !(wh.jac[k] > 0.0)).count();
    if bad > 0 {
        return Err(Error::Degenerate {
            fraction: bad as f64 / g.nodes().len() as f64,
            count: bad,
        });
    }
    let wbig = wirtinger_derivatives(big_h, StencilOrder::Fourth);
    if big_h.grid().nodes().iter().any(|&k| !(wbig.jac[k] > 0.0)) {
        return Err(Error::Invertibility {
            failures: big_h.grid().nodes().iter().filter(|&&k| !(wbig.jac[k] > 0.0)).count(),
            residual: f64::NAN,
        });
    }
    let inv = invert_composition(h, big_h)?;
    let xg = inv.xi.grid().clone();
    let wx = wirtinger_derivatives(&inv.xi, StencilOrder::Fourth);
    let phi = hopf_from_wirtinger(h, &wh, psi, weight, HopfVariant::Conjugated)?;
    let eps = PHI_ZERO_RELATIVE * phi.max_abs();
    let hgrid = big_h.grid();

    let mut e_h = Vec::new();
    let mut e_big = Vec::new();
    let mut e_lemma = Vec::new();
    let mut t1 = Vec::new();
    let mut t2 = Vec::new();
    let mut convexity_failures = 0;
    let mut negative_term1 = 0;
    let mut xi_zbar: f64 = 0.0;
    let mut xi_dist: f64 = 0.0;
    for &k in xg.nodes() {
        let xi = inv.xi.value(k);
        let (a, b) = (wh.fz[k], wh.fzbar[k]);
        let (c, d) = (wx.fz[k], wx.fzbar[k]);
        let jh = wh.jac[k];
        let jx = wx.jac[k];
        let (Some(kh), Some(_)) = (distortion_at(a, b), distortion_at(c, d)) else {
            continue;
        };
        let (Some(ha), Some(hb)) = (hgrid.sample(&wbig.fz, xi), hgrid.sample(&wbig.fzbar, xi)) else {
            continue;
        };
        let Some(kbig) = distortion_at(ha, hb) else {
            continue;
        };
        let jbig = ha.norm_sqr() - hb.norm_sqr();
        let lam = weight.eval(h.value(k));
        e_h.push(energy_integrand(psi, kh, lam, jh));
        e_big.push(energy_integrand(psi, kbig, lam, jbig * jx));
        let klemma = compose_distortion(d / c, b / a)?;
        e_lemma.push(energy_integrand(psi, klemma, lam, jh));
        let dpsi = psi.deriv(kh);
        let d1 = 2.0 * (a.norm() - b.norm()).powi(2) * d.norm_sqr() / jx * dpsi * lam;
        if d1 < 0.0 {
            negative_term1 += 1;
        }
        t1.push(d1);
        let p = phi.phi[k];
        if p.norm() >= eps && p.norm() > 0.0 {
            let s = p / p.norm();
            t2.push(2.0 * ((c - s * d).norm_sqr() / jx - 1.0) * p.norm());
        }
        let lhs = psi.eval(klemma) - psi.eval(kh);
        let rhs = (klemma - kh) * dpsi;
        if lhs < rhs - 1e-12 * (psi.eval(klemma).abs() + psi.eval(kh).abs() + rhs.abs()) {
            convexity_failures += 1;
        }
        xi_zbar = xi_zbar.max(d.norm());
        xi_dist = xi_dist.max((xi - xg.point(k)).norm());
    }
    debug_assert_eq!(negative_term1, 0);
    let area = g.cell_area();
    let energy_h = pairwise_sum(&e_h) * area;
    let gap = pairwise_sum(&e_big) * area - energy_h;
    let lemma_gap = pairwise_sum(&e_lemma) * area - energy_h;
    let term1 = pairwise_sum(&t1) * area;
    let term2 = pairwise_sum(&t2) * area;

    let direct_gap = if same_grid(g, big_h.grid()) {
        let e = |f: &MappingField, w: &WirtingerField| -> f64 {
            let v: Vec<f64> = f
                .grid()
                .nodes()
                .iter()
                .filter_map(|&k| {
                    distortion_at(w.fz[k], w.fzbar[k])
                        .map(|kk| energy_integrand(psi, kk, weight.eval(f.value(k)), w.jac[k]))
                })
                .collect();
            pairwise_sum(&v) * f.grid().cell_area()
        };
        Some(e(big_h, &wbig) - e(h, &wh))
    } else {
        None
    };

    let dbar = dbar_residual(&phi);
    let (phi_dbar, phi_holomorphic) = match &dbar {
        Ok(r) => (r.max_dbar, r.holomorphic),
        Err(_) => (f64::NAN, false),
    };
    let phi_l1 = phi.l1_norm();
    let certified = phi_holomorphic && phi_l1.is_finite();
    let bound_holds = gap >= term1 + term2 - tol && gap >= -tol;
    Ok(EnergyGapReport {
        gap,
        direct_gap,
        lemma_gap,
        term1,
        term2,
        energy_h,
        tol,
        boundary_gap,
        inversion_failures: inv.failures,
        inversion_residual: inv.residual,
        convexity_failures,
        negative_term1_nodes: negative_term1,
        phi_dbar,
        phi_holomorphic,
        phi_l1,
        certified,
        bound_holds,
        xi_zbar_sup: xi_zbar,
        xi_distance: xi_dist,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Uniqueness {
    /// The maps agree to discretization accuracy.
    Coincide,
    Distinct,
    /// Zero gap without the accompanying conformality of `ξ`.
    Inconsistent,
    /// The hypotheses of the energy-gap bound are not met.
    HypothesesUnmet,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct UniquenessReport {
    pub verdict: Uniqueness,
    pub gap: EnergyGapReport,
}

/// Equality analysis of the energy gap: a vanishing gap must come with a
/// vanishing first term, `ξ_z̄ ≈ 0` and `ξ ≈ id`.
pub fn uniqueness_verdict(
    h: &MappingField,
    big_h: &MappingField,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Result<UniquenessReport> {
    let gap = energy_gap(h, big_h, psi, weight)?;
    let verdict = if !gap.certified {
        Uniqueness::HypothesesUnmet
    } else if gap.gap.abs() <= gap.tol {
        let small = gap.term1 <= gap.tol && gap.xi_zbar_sup <= gap.tol.sqrt() && gap.xi_distance <= gap.tol.sqrt();
        if small {
            Uniqueness::Coincide
        } else {
            Uniqueness::Inconsistent
        }
    } else {
        Uniqueness::Distinct
    };
    Ok(UniquenessReport { verdict, gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maps::{AnalyticMap, RadialPower, RimFixedShear};
    use core::f64::consts::PI;

    fn disk(n: usize) -> Arc<DomainGrid> {
        Arc::new(DomainGrid::new(DomainKind::UnitDisk, n).unwrap())
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_gives_equality() {
        let g = disk(64);
        let id = MappingField::identity(g.clone());
        for phi in [
            QuadraticDifferentialField::from_fn(g.clone(), |_| c(1.0, 0.0)),
            QuadraticDifferentialField::from_fn(g.clone(), |w| w * w),
        ] {
            let r = rs_sides(&id, &phi).unwrap();
            assert!((r.lhs - r.rhs).abs() <= 1e-12 * r.lhs, "{r:?}");
            let (b2, b3) = rs_lower_bounds(&id, &phi).unwrap();
            assert!((b2.rhs - b2.lhs).abs() < 1e-12 * b2.lhs);
            assert!((b3.rhs - b3.lhs).abs() < 1e-12 * b3.lhs);
        }
        let one = QuadraticDifferentialField::from_fn(g.clone(), |_| c(1.0, 0.0));
        let r = rs_sides(&id, &one).unwrap();
        assert!((r.lhs - PI).abs() < 0.02);
    }

    #[test]
    fn radial_stretch_has_positive_slack() {
        let g = disk(128);
        let f = RadialPower { s: 0.2 }.field(&g).unwrap();
        let one = QuadraticDifferentialField::from_fn(g.clone(), |_| c(1.0, 0.0));
        let r = rs_sides(&f, &one).unwrap();
        assert!(r.holds && r.slack > 0.0 && r.rhs >= r.lhs);
        let (b2, b3) = rs_lower_bounds(&f, &one).unwrap();
        assert!(b2.holds && b3.holds);
    }

    #[test]
    fn reflection_is_rejected() {
        let g = disk(32);
        let f = MappingField::from_fn(g.clone(), |z| z.conj()).unwrap();
        let one = QuadraticDifferentialField::from_fn(g, |_| c(1.0, 0.0));
        assert!(matches!(rs_sides(&f, &one), Err(Error::Degenerate { .. })));
    }

    #[test]
    fn alignment_of_synthesized_teichmuller_map() {
        let g = disk(64);
        let k = 0.3;
        // h = Φ + k conj(Φ) with Φ = w²/2, so μ_h = k conj(w)/w = k conj(φ)/|φ| for φ = w².
        let w = WirtingerField::from_fn(g.clone(), |z| (z, k * z.conj()));
        let phi = QuadraticDifferentialField::from_fn(g.clone(), |z| z * z);
        let r = alignment_residual_with(&w, &phi).unwrap();
        assert!(r.residual <= 1e-12, "{}", r.residual);
        let id = MappingField::identity(g.clone());
        assert!(alignment_residual(&id, &phi).unwrap().residual < 1e-12);
        let zero = QuadraticDifferentialField::from_fn(g, |_| c(0.0, 0.0));
        assert!(matches!(alignment_residual(&id, &zero), Err(Error::Coverage { .. })));
    }

    #[test]
    fn pointwise_chain_for_teichmuller_pair() {
        let g = disk(64);
        let k = 0.3;
        // f⁻¹(w) = w + k w̄ has μ = k conj(φ)/|φ| for φ ≡ 1.
        let f = MappingField::from_fn(g.clone(), |z| (z - k * z.conj()) / (1.0 - k * k)).unwrap();
        let wide = Arc::new(
            DomainGrid::new(
                DomainKind::Rectangle {
                    x_min: -2.0,
                    x_max: 2.0,
                    y_min: -2.0,
                    y_max: 2.0,
                },
                64,
            )
            .unwrap(),
        );
        let phi = QuadraticDifferentialField::from_fn(wide, |_| c(1.0, 0.0));
        let same = pointwise_teich(&f, &f, &phi).unwrap();
        assert!(same.inverse_alignment < 1e-12);
        assert!(same.inequality.worst_node_slack.unwrap().abs() < 1e-12);
        assert_eq!(same.inequality.equality_nodes, Some(g.nodes().len()));
        let id = MappingField::identity(g.clone());
        let r = pointwise_teich(&f, &id, &phi).unwrap();
        assert_eq!(r.inequality.hypothesis_violations, 0);
        assert!(r.inequality.worst_node_slack.unwrap() > 0.1);
        assert_eq!(r.inequality.equality_nodes, Some(0));
    }

    #[test]
    fn middle_term_identity() {
        let (fz, fzb, gz, gzb) = (c(1.1, 0.2), c(0.3, -0.1), c(0.9, -0.3), c(0.1, 0.15));
        let jf = fz.norm_sqr() - fzb.norm_sqr();
        let mf = (fzb / fz).norm();
        let direct = (1.0 - mf).powi(2) * (gz.norm() + gzb.norm()).powi(2) * fz.norm_sqr() / (jf * jf);
        assert!((direct - pointwise_middle(fz, fzb, gz, gzb)).abs() < 1e-14);
    }

    #[test]
    fn gap_of_identical_maps_is_zero() {
        let g = disk(48);
        let h = MappingField::identity(g.clone());
        let r = energy_gap(&h, &h, &ConvexProfile::Power(2.0), &WeightField::Unit).unwrap();
        assert!(r.gap.abs() < 1e-12 && r.term1.abs() < 1e-12 && r.term2.abs() < 1e-12);
        assert!(r.certified && r.bound_holds);
        let u = uniqueness_verdict(&h, &h, &ConvexProfile::Power(2.0), &WeightField::Unit).unwrap();
        assert_eq!(u.verdict, Uniqueness::Coincide);
    }

    #[test]
    fn gap_for_rim_fixed_competitor() {
        let g = disk(96);
        let h = MappingField::identity(g.clone());
        let big = RimFixedShear { eps: 0.1 }.field(&g).unwrap();
        let r = energy_gap(&h, &big, &ConvexProfile::Power(2.0), &WeightField::Unit).unwrap();
        assert!(r.certified);
        assert!(r.gap > 10.0 * r.tol, "{r:?}");
        assert!(r.gap >= r.term1 + r.term2 - 1e-6);
        assert_eq!(r.convexity_failures, 0);
        assert!((r.gap - r.lemma_gap).abs() < 1e-4 * r.gap.abs().max(1.0));
        let u = uniqueness_verdict(&h, &big, &ConvexProfile::Power(2.0), &WeightField::Unit).unwrap();
        assert_eq!(u.verdict, Uniqueness::Distinct);
    }

    #[test]
    fn shifted_grid_identity_coincides() {
        let g = disk(48);
        let h = MappingField::identity(g.clone());
        let d = 2.2 / 50.0;
        let shifted = Arc::new(
            DomainGrid::new(
                DomainKind::Rectangle {
                    x_min: -1.1 + 0.37 * d,
                    x_max: 1.1 + 0.37 * d,
                    y_min: -1.1 - 0.21 * d,
                    y_max: 1.1 - 0.21 * d,
                },
                50,
            )
            .unwrap(),
        );
        let big = MappingField::identity(shifted);
        let u = uniqueness_verdict(&h, &big, &ConvexProfile::Power(2.0), &WeightField::Unit).unwrap();
        assert_eq!(u.verdict, Uniqueness::Coincide, "{:?}", u.gap);
    }
}
