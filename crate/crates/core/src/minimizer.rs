//! Descent on the inverse-form energy `∫ Ψ(𝕂(w,h)) λ(h) J(w,h) dw` by inner
//! variations `h ↦ h ∘ (id + tφ)`, with `φ` running over a basis of
//! compactly supported bumps.
//!
//! Values of `h ∘ g^t` are bicubic samples of `h` at `g^t`-images; nodes
//! outside the support of `φ` keep their exact values, so the boundary
//! trace never changes.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::energy::{energy_inverse, ConvexProfile, WeightField};
use crate::fields::grid::{DomainGrid, StencilOrder};
use crate::fields::{distortion_at, MappingField};
use crate::hopf::{dbar_residual, hopf_differential};
use crate::maps::Bump;
use crate::math::pairwise_sum;
use crate::tolerances::{INNER_DELTA, J_FLOOR, SINGULAR_WEIGHT_CAP};
use crate::{Error, Result};

const ORDER: StencilOrder = StencilOrder::Fourth;

/// Finest dyadic level of the default basis. Levels 1 and 2 have no site
/// whose support fits in the disk.
pub const DEFAULT_LEVELS: usize = 5;
pub const MAX_LEVELS: usize = 8;

/// A compactly supported displacement field `φ` for inner variations.
pub trait InnerField {
    /// Whether `z` lies in the open support square.
    fn contains(&self, z: Complex64) -> bool;
    fn value(&self, z: Complex64) -> Complex64;
}

impl InnerField for Bump {
    fn contains(&self, z: Complex64) -> bool {
        Bump::contains(self, z)
    }
    fn value(&self, z: Complex64) -> Complex64 {
        Bump::value(self, z)
    }
}

/// Cubic B-spline stretched to `[−1, 1]` and normalised to `B(0) = 1`.
#[inline]
pub fn spline_profile(s: f64) -> f64 {
    let x = 2.0 * s.abs();
    if x >= 2.0 {
        0.0
    } else if x >= 1.0 {
        (2.0 - x).powi(3) / 4.0
    } else {
        (4.0 - 6.0 * x * x + 3.0 * x * x * x) / 4.0
    }
}

/// `max |B′| = 2`, attained at `|s| = 1/3`.
pub const SPLINE_PROFILE_DERIV_MAX: f64 = 2.0;

/// Tensor-product B-splines on the dyadic levels, two per site (real and
/// imaginary direction).
///
/// Level `ℓ` has spacing `side = 2^{1−ℓ}` with sites at the interior vertices
/// of the dyadic subdivision of `[−1, 1]²`; each element covers the 4 × 4
/// subsquares around its vertex. The splines of one level are refinable
/// into the next, so coordinate sweeps over all levels behave like a
/// multilevel smoother.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BumpBasis {
    pub elements: Vec<BasisElement>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasisElement {
    pub level: usize,
    pub center: Complex64,
    /// Half-width of the square support, `2 · side`.
    pub radius: f64,
    pub amplitude: Complex64,
}

impl BasisElement {
    /// Operator norm bound of the real derivative.
    pub fn gradient_bound(&self) -> f64 {
        self.amplitude.norm() * core::f64::consts::SQRT_2 * SPLINE_PROFILE_DERIV_MAX / self.radius
    }
}

impl InnerField for BasisElement {
    #[inline]
    fn contains(&self, z: Complex64) -> bool {
        (z.re - self.center.re).abs() < self.radius && (z.im - self.center.im).abs() < self.radius
    }
    #[inline]
    fn value(&self, z: Complex64) -> Complex64 {
        if !self.contains(z) {
            return Complex64::new(0.0, 0.0);
        }
        let sx = (z.re - self.center.re) / self.radius;
        let sy = (z.im - self.center.im) / self.radius;
        self.amplitude * (spline_profile(sx) * spline_profile(sy))
    }
}

impl BumpBasis {
    /// Levels `1..=levels`; a site is kept when its support square lies in
    /// the disk of radius `reach`. Every element has `‖Dφ‖ ≤ bound`.
    pub fn dyadic(levels: usize, reach: f64, bound: f64) -> Result<Self> {
        if levels == 0 || levels > MAX_LEVELS {
            return Err(Error::Config(alloc::format!(
                "basis levels must be in 1..={MAX_LEVELS}, got {levels}"
            )));
        }
        if !(bound > 0.0 && bound < 1.0) {
            return Err(Error::Config("basis gradient bound must lie in (0, 1)".into()));
        }
        let mut elements = Vec::new();
        for level in 1..=levels {
            let m = 1usize << level;
            let side = 2.0 / m as f64;
            let r = 2.0 * side;
            let amp = bound * r / (core::f64::consts::SQRT_2 * SPLINE_PROFILE_DERIV_MAX);
            for j in 1..m {
                for i in 1..m {
                    let center = Complex64::new(-1.0 + side * i as f64, -1.0 + side * j as f64);
                    let corner = ((center.re.abs() + r).powi(2) + (center.im.abs() + r).powi(2)).sqrt();
                    if corner > reach {
                        continue;
                    }
                    for dir in [Complex64::new(amp, 0.0), Complex64::new(0.0, amp)] {
                        elements.push(BasisElement {
                            level,
                            center,
                            radius: r,
                            amplitude: dir,
                        });
                    }
                }
            }
        }
        if elements.is_empty() {
            return Err(Error::Config(alloc::format!(
                "no basis site fits inside radius {reach} at {levels} levels"
            )));
        }
        Ok(BumpBasis { elements })
    }

    pub fn default_disk() -> Self {
        BumpBasis::dyadic(DEFAULT_LEVELS, 0.95, 0.5).expect("default basis parameters are valid")
    }

    /// Basis for a disk grid whose supports stay six cells inside the rim,
    /// so every node touched by a variation has centred stencils.
    pub fn for_grid(g: &DomainGrid, levels: usize) -> Result<Self> {
        BumpBasis::dyadic(levels, 0.95f64.min(1.0 - 6.0 * g.spacing()), 0.5)
    }

    /// Level whose spacing matches the grid spacing, so the finest splines
    /// span four cells.
    pub fn grid_levels(g: &DomainGrid) -> usize {
        let n = (2.0 / g.spacing()).round() as usize;
        (usize::BITS - 1 - n.max(2).leading_zeros()).clamp(1, MAX_LEVELS as u32) as usize
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// `h ∘ (id + tφ)` at the nodes of `h`'s grid.
fn composed_values<V: InnerField + ?Sized>(h: &MappingField, phi: &V, t: f64) -> Result<Vec<Complex64>> {
    let g = h.grid();
    let mut values = h.values().to_vec();
    let mut outside = 0;
    let mut first = None;
    for &k in g.nodes() {
        let z = g.point(k);
        if !phi.contains(z) {
            continue;
        }
        let p = z + phi.value(z) * t;
        match h.sample(p) {
            Some(v) => values[k] = v,
            None => {
                outside += 1;
                first.get_or_insert(p);
            }
        }
    }
    if outside > 0 {
        return Err(Error::range("resampled mapping", outside, first.unwrap_or_default()));
    }
    Ok(values)
}

/// `E(h ∘ g^t)` with `g^t = id + tφ`.
pub fn inner_variation_energy<V: InnerField + ?Sized>(
    h: &MappingField,
    phi: &V,
    t: f64,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Result<f64> {
    if !(t.abs() < 1.0) {
        return Err(Error::Domain("inner variation needs |t| < 1".into()));
    }
    if t == 0.0 {
        return Ok(energy_inverse(h, psi, weight)?.value);
    }
    let values = composed_values(h, phi, t)?;
    let f = MappingField::from_values(h.grid().clone(), values)?;
    Ok(energy_inverse(&f, psi, weight)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DerivativeEstimate {
    pub value: f64,
    /// Difference between the extrapolated and the finer centred quotient.
    pub error: f64,
}

/// `d/dt E(h ∘ g^t)` at `t = 0`: centred quotients at `δ` and `δ/2`
/// combined by one Richardson step.
pub fn inner_derivative<V: InnerField + ?Sized>(
    h: &MappingField,
    phi: &V,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Result<DerivativeEstimate> {
    let mut local = LocalEnergy::new(h.clone(), *psi, weight.clone())?;
    let support = Support::new(h.grid(), phi);
    local
        .derivative(phi, &support, INNER_DELTA)
        .map(|(d, _, _)| d)
        .ok_or_else(|| Error::range("resampled mapping", 1, Complex64::default()))
}

/// Node sets touched by one basis element: nodes that move and nodes whose
/// stencils read a moved node.
#[derive(Clone, Debug)]
struct Support {
    moved: Vec<usize>,
    affected: Vec<usize>,
}

impl Support {
    fn new<V: InnerField + ?Sized>(g: &DomainGrid, phi: &V) -> Self {
        let n = g.n();
        let moved: Vec<usize> = g
            .nodes()
            .iter()
            .copied()
            .filter(|&k| phi.contains(g.point(k)))
            .collect();
        let mut affected = Vec::new();
        if let (Some(i0), Some(i1), Some(j0), Some(j1)) = (
            moved.iter().map(|k| k % n).min(),
            moved.iter().map(|k| k % n).max(),
            moved.iter().map(|k| k / n).min(),
            moved.iter().map(|k| k / n).max(),
        ) {
            // One-sided stencils reach four nodes away.
            let pad = ORDER.points() - 1;
            for j in j0.saturating_sub(pad)..=(j1 + pad).min(n - 1) {
                for i in i0.saturating_sub(pad)..=(i1 + pad).min(n - 1) {
                    let k = j * n + i;
                    if g.is_inside(k)
                        && g.stencil_support(k, ORDER)
                            .any(|m| phi.contains(g.point(m)) && g.is_inside(m))
                    {
                        affected.push(k);
                    }
                }
            }
        }
        Support { moved, affected }
    }
}

/// Energy of the current iterate with per-node densities, for cheap local
/// updates under compactly supported inner variations.
struct LocalEnergy {
    h: MappingField,
    psi: ConvexProfile,
    weight: WeightField,
    density: Vec<f64>,
    jac: Vec<f64>,
    scratch: Vec<Complex64>,
}

struct Trial {
    /// `Σ (new − old)` density over affected nodes, times cell area.
    delta: f64,
    min_j: f64,
    moved_values: Vec<Complex64>,
    densities: Vec<(f64, f64)>,
}

impl LocalEnergy {
    fn new(h: MappingField, psi: ConvexProfile, weight: WeightField) -> Result<Self> {
        let g = h.grid().clone();
        let mut density = vec![f64::NAN; g.len()];
        let mut jac = vec![f64::NAN; g.len()];
        let mut bad = 0;
        for &k in g.nodes() {
            match node_density(&g, h.values(), k, &psi, &weight) {
                Some((d, j)) => {
                    density[k] = d;
                    jac[k] = j;
                }
                None => bad += 1,
            }
        }
        if bad > 0 {
            return Err(Error::Degenerate {
                fraction: bad as f64 / g.nodes().len() as f64,
                count: bad,
            });
        }
        let scratch = h.values().to_vec();
        Ok(LocalEnergy {
            h,
            psi,
            weight,
            density,
            jac,
            scratch,
        })
    }

    fn energy(&self) -> f64 {
        let g = self.h.grid();
        let v: Vec<f64> = g.nodes().iter().map(|&k| self.density[k]).collect();
        pairwise_sum(&v) * g.cell_area()
    }

    fn min_jacobian(&self) -> f64 {
        self.h
            .grid()
            .nodes()
            .iter()
            .map(|&k| self.jac[k])
            .fold(f64::INFINITY, f64::min)
    }

    /// Energy change of `h ∘ (id + tφ)`; `None` when a sample leaves the
    /// domain or a node degenerates.
    fn trial<V: InnerField + ?Sized>(&mut self, phi: &V, s: &Support, t: f64) -> Option<Trial> {
        let g = self.h.grid().clone();
        let mut moved_values = Vec::with_capacity(s.moved.len());
        for &k in &s.moved {
            let z = g.point(k);
            moved_values.push(self.h.sample(z + phi.value(z) * t)?);
        }
        for (&k, &v) in s.moved.iter().zip(&moved_values) {
            self.scratch[k] = v;
        }
        let mut densities = Vec::with_capacity(s.affected.len());
        let mut diffs = Vec::with_capacity(s.affected.len());
        let mut min_j = f64::INFINITY;
        let mut ok = true;
        for &k in &s.affected {
            match node_density(&g, &self.scratch, k, &self.psi, &self.weight) {
                Some((d, j)) => {
                    densities.push((d, j));
                    diffs.push(d - self.density[k]);
                    min_j = min_j.min(j);
                }
                None => {
                    ok = false;
                    break;
                }
            }
        }
        for &k in &s.moved {
            self.scratch[k] = self.h.value(k);
        }
        if !ok {
            return None;
        }
        Some(Trial {
            delta: pairwise_sum(&diffs) * g.cell_area(),
            min_j,
            moved_values,
            densities,
        })
    }

    fn accept(&mut self, s: &Support, trial: Trial) {
        self.h.set_interior(&s.moved, &trial.moved_values);
        for (&k, &v) in s.moved.iter().zip(&trial.moved_values) {
            self.scratch[k] = v;
        }
        for (&k, &(d, j)) in s.affected.iter().zip(&trial.densities) {
            self.density[k] = d;
            self.jac[k] = j;
        }
    }

    /// Richardson-refined centred difference, plus the two trials at `±delta`.
    fn derivative<V: InnerField + ?Sized>(
        &mut self,
        phi: &V,
        s: &Support,
        delta: f64,
    ) -> Option<(DerivativeEstimate, Trial, Trial)> {
        let plus = self.trial(phi, s, delta)?;
        let minus = self.trial(phi, s, -delta)?;
        let d1 = (plus.delta - minus.delta) / (2.0 * delta);
        let half = 0.5 * delta;
        let d2 = (self.trial(phi, s, half)?.delta - self.trial(phi, s, -half)?.delta) / (2.0 * half);
        let value = (4.0 * d2 - d1) / 3.0;
        let est = DerivativeEstimate {
            value,
            error: (value - d2).abs(),
        };
        Some((est, plus, minus))
    }
}

/// `(Ψ(𝕂) λ(h) J, J)` at node `k`, or `None` for a degenerate node or a
/// value outside the weight's domain.
fn node_density(
    g: &DomainGrid,
    values: &[Complex64],
    k: usize,
    psi: &ConvexProfile,
    weight: &WeightField,
) -> Option<(f64, f64)> {
    let (fx, fy) = g.gradient(values, k, ORDER);
    let i = Complex64::i();
    let fz = (fx - i * fy) * 0.5;
    let fzbar = (fx + i * fy) * 0.5;
    let kk = distortion_at(fz, fzbar)?;
    let p = values[k];
    if !weight.contains(p) {
        return None;
    }
    let lam = weight.eval(p);
    if !(lam <= SINGULAR_WEIGHT_CAP) {
        return None;
    }
    let j = fz.norm_sqr() - fzbar.norm_sqr();
    Some((psi.eval(kk) * lam * j, j))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MinimizeOptions {
    pub grad_tol: f64,
    pub j_floor: f64,
    /// Maximum number of sweeps over the basis.
    pub max_iter: usize,
    /// Finest basis level; `None` goes down to the grid spacing.
    pub levels: Option<usize>,
    /// Largest trial step `|t|`.
    pub t_max: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        MinimizeOptions {
            grad_tol: 1e-8,
            j_floor: J_FLOOR,
            max_iter: 200,
            levels: None,
            t_max: 0.5,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepRecord {
    pub energy: f64,
    pub step: f64,
    pub basis_index: usize,
    pub min_j: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SweepRecord {
    pub iter: usize,
    pub energy: f64,
    pub min_j: f64,
    pub dbar: f64,
    pub max_derivative: f64,
    pub accepted: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Termination {
    Converged,
    NoProgress,
    MaxIterations,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DescentTrace {
    pub initial_energy: f64,
    pub initial_dbar: f64,
    pub steps: Vec<StepRecord>,
    pub sweeps: Vec<SweepRecord>,
    pub termination: Termination,
    pub reason: String,
}

impl DescentTrace {
    pub fn final_energy(&self) -> f64 {
        self.steps.last().map_or(self.initial_energy, |s| s.energy)
    }

    /// Sweeps that moved the iterate.
    pub fn iterations(&self) -> usize {
        self.sweeps.iter().filter(|s| s.accepted > 0).count()
    }
}

fn dbar_of(h: &MappingField, psi: &ConvexProfile, weight: &WeightField) -> f64 {
    hopf_differential(h, psi, weight)
        .and_then(|phi| dbar_residual(&phi))
        .map_or(f64::NAN, |r| r.max_dbar)
}

/// Coordinate descent over the dyadic bump basis with a Newton-seeded
/// backtracking line search. A step is accepted only if it lowers the
/// energy and keeps every Jacobian above `j_floor`.
pub fn minimize(
    boundary: &[Complex64],
    start: &MappingField,
    psi: &ConvexProfile,
    weight: &WeightField,
    options: &MinimizeOptions,
) -> Result<(MappingField, DescentTrace)> {
    let levels = options.levels.unwrap_or_else(|| BumpBasis::grid_levels(start.grid()));
    let basis = BumpBasis::for_grid(start.grid(), levels)?;
    minimize_with_basis(boundary, start, psi, weight, options, &basis)
}

pub fn minimize_with_basis(
    boundary: &[Complex64],
    start: &MappingField,
    psi: &ConvexProfile,
    weight: &WeightField,
    options: &MinimizeOptions,
    basis: &BumpBasis,
) -> Result<(MappingField, DescentTrace)> {
    let trace0 = start.boundary_trace();
    if trace0.len() != boundary.len() || trace0.iter().zip(boundary).any(|(a, b)| (a - b).norm() > 1e-12) {
        return Err(Error::Pairing(
            "start does not carry the prescribed boundary trace".into(),
        ));
    }
    if !(options.t_max > 0.0 && options.t_max * 0.5 < 1.0) {
        return Err(Error::Config("t_max must keep id + tφ a diffeomorphism".into()));
    }
    let mut state = LocalEnergy::new(start.clone(), *psi, weight.clone())?;
    let supports: Vec<Support> = basis.elements.iter().map(|e| Support::new(start.grid(), e)).collect();
    let mut energy = state.energy();
    let mut trace = DescentTrace {
        initial_energy: energy,
        initial_dbar: dbar_of(start, psi, weight),
        steps: Vec::new(),
        sweeps: Vec::new(),
        termination: Termination::MaxIterations,
        reason: String::new(),
    };
    for iter in 0..options.max_iter {
        let mut max_d: f64 = 0.0;
        let mut accepted = 0;
        for (idx, (e, s)) in basis.elements.iter().zip(&supports).enumerate() {
            let phi = *e;
            let Some((d, p, m)) = state.derivative(&phi, s, INNER_DELTA) else {
                continue;
            };
            max_d = max_d.max(d.value.abs());
            if d.value.abs() <= options.grad_tol {
                continue;
            }
            let curvature = (p.delta + m.delta) / (INNER_DELTA * INNER_DELTA);
            let mut t = if curvature > 0.0 {
                -d.value / curvature
            } else {
                -d.value.signum() * options.t_max
            };
            t = t.clamp(-options.t_max, options.t_max);
            for _ in 0..40 {
                if let Some(trial) = state.trial(&phi, s, t) {
                    if trial.delta < 0.0 && trial.min_j > options.j_floor {
                        let delta = trial.delta;
                        state.accept(s, trial);
                        energy += delta;
                        let min_j = state.min_jacobian();
                        assert!(min_j > options.j_floor, "accepted step left the Jacobian floor");
                        trace.steps.push(StepRecord {
                            energy,
                            step: t,
                            basis_index: idx,
                            min_j,
                        });
                        accepted += 1;
                        break;
                    }
                }
                t *= 0.5;
            }
        }
        if iter == 0 && accepted == 0 && max_d > options.grad_tol {
            return Err(Error::Stall);
        }
        // Re-sum to keep the running total free of drift.
        energy = state.energy();
        trace.sweeps.push(SweepRecord {
            iter,
            energy,
            min_j: state.min_jacobian(),
            dbar: dbar_of(&state.h, psi, weight),
            max_derivative: max_d,
            accepted,
        });
        if max_d <= options.grad_tol {
            trace.termination = Termination::Converged;
            trace.reason = alloc::format!("all inner derivatives below {:.1e}", options.grad_tol);
            break;
        }
        if accepted == 0 {
            trace.termination = Termination::NoProgress;
            trace.reason = "no basis element admits a descent step".into();
            break;
        }
    }
    if trace.termination == Termination::MaxIterations {
        trace.reason = alloc::format!("stopped after {} sweeps", options.max_iter);
    }
    debug_assert!(trace.steps.windows(2).all(|w| w[1].energy < w[0].energy));
    Ok((state.h, trace))
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StationarityReport {
    pub max_derivative: f64,
    /// Basis element attaining `max_derivative`.
    pub argmax: usize,
    pub dbar: f64,
    pub dbar_threshold: f64,
    pub grad_tol: f64,
    pub stationary: bool,
    pub holomorphic: bool,
    /// Both tests agree.
    pub consistent: bool,
}

/// Largest inner derivative over the basis next to the ∂̄ residual of
/// `Φ_h`; the two tests are consistent when they agree.
pub fn stationarity_vs_holomorphy(
    h: &MappingField,
    psi: &ConvexProfile,
    weight: &WeightField,
    basis: &BumpBasis,
    grad_tol: f64,
) -> Result<StationarityReport> {
    let mut local = LocalEnergy::new(h.clone(), *psi, weight.clone())?;
    let mut max_d: f64 = 0.0;
    let mut argmax = 0;
    for (idx, e) in basis.elements.iter().enumerate() {
        let phi = *e;
        let s = Support::new(h.grid(), &phi);
        if let Some((d, _, _)) = local.derivative(&phi, &s, INNER_DELTA) {
            if d.value.abs() > max_d {
                max_d = d.value.abs();
                argmax = idx;
            }
        }
    }
    let phi = hopf_differential(h, psi, weight)?;
    let (dbar, holomorphic, threshold) = match dbar_residual(&phi) {
        Ok(r) => {
            let floor = crate::tolerances::HOLOMORPHY_ROUNDING * phi.max_abs().max(1.0) / h.grid().spacing();
            (
                r.max_dbar,
                r.holomorphic,
                crate::tolerances::HOLOMORPHY_FACTOR * r.truncation_estimate + floor,
            )
        }
        Err(_) => (f64::NAN, false, f64::NAN),
    };
    let stationary = max_d <= grad_tol;
    Ok(StationarityReport {
        max_derivative: max_d,
        argmax,
        dbar,
        dbar_threshold: threshold,
        grad_tol,
        stationary,
        holomorphic,
        consistent: stationary == holomorphic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::grid::DomainKind;
    use crate::maps::{AnalyticMap, BumpPerturbation};
    use alloc::sync::Arc;

    fn disk(n: usize) -> Arc<DomainGrid> {
        Arc::new(DomainGrid::new(DomainKind::UnitDisk, n).unwrap())
    }

    #[test]
    fn basis_is_compactly_supported() {
        let b = BumpBasis::default_disk();
        assert!(b.len() > 60 && b.len().is_multiple_of(2));
        for e in &b.elements {
            assert!(e.gradient_bound() < 1.0);
            let corner = ((e.center.re.abs() + e.radius).powi(2) + (e.center.im.abs() + e.radius).powi(2)).sqrt();
            assert!(corner <= 0.95 + 1e-12);
        }
    }

    #[test]
    fn spline_profile_shape() {
        assert_eq!(spline_profile(0.0), 1.0);
        assert_eq!(spline_profile(1.0), 0.0);
        let h = 1e-6;
        let d = (spline_profile(1.0 / 3.0 + h) - spline_profile(1.0 / 3.0 - h)) / (2.0 * h);
        assert!((d.abs() - SPLINE_PROFILE_DERIV_MAX).abs() < 1e-6);
        // Integer translates at spacing 1/2 sum to 3/2 everywhere.
        for &s in &[0.0, 0.1, 0.37, 0.5] {
            let sum: f64 = (-4..=4).map(|k| spline_profile(s - 0.5 * k as f64)).sum();
            assert!((sum - 1.5).abs() < 1e-12, "{sum}");
        }
    }

    #[test]
    fn zero_step_is_the_energy() {
        let g = disk(48);
        let h = MappingField::identity(g.clone());
        let b = BumpBasis::default_disk().elements[0];
        let psi = ConvexProfile::Power(2.0);
        let e0 = energy_inverse(&h, &psi, &WeightField::Unit).unwrap().value;
        assert_eq!(
            inner_variation_energy(&h, &b, 0.0, &psi, &WeightField::Unit).unwrap(),
            e0
        );
        assert!(inner_variation_energy(&h, &b, 0.3, &psi, &WeightField::Unit).unwrap() >= e0);
    }

    #[test]
    fn identity_is_stationary() {
        let g = disk(64);
        let h = MappingField::identity(g.clone());
        let psi = ConvexProfile::Power(2.0);
        for e in BumpBasis::for_grid(&g, DEFAULT_LEVELS)
            .unwrap()
            .elements
            .iter()
            .step_by(5)
        {
            let d = inner_derivative(&h, e, &psi, &WeightField::Unit).unwrap();
            assert!(d.value.abs() <= 1e-8, "{d:?}");
        }
        let (out, trace) = minimize(
            g.boundary().iter().map(|&k| g.point(k)).collect::<Vec<_>>().as_slice(),
            &h,
            &psi,
            &WeightField::Unit,
            &MinimizeOptions::default(),
        )
        .unwrap();
        assert_eq!(trace.iterations(), 0);
        assert_eq!(trace.termination, Termination::Converged);
        assert!(g.nodes().iter().all(|&k| out.value(k) == h.value(k)));
    }

    #[test]
    fn perturbed_identity_is_not_stationary() {
        let g = disk(128);
        let basis = BumpBasis::for_grid(&g, DEFAULT_LEVELS).unwrap();
        let p = BumpPerturbation {
            bumps: vec![Bump::with_gradient_bound(
                Complex64::new(0.1, 0.05),
                0.55,
                Complex64::new(1.0, 1.0),
                1.0,
            )],
        }
        .scaled(0.1);
        let h = p.field(&g).unwrap();
        let r = stationarity_vs_holomorphy(&h, &ConvexProfile::Power(2.0), &WeightField::Unit, &basis, 1e-6).unwrap();
        assert!(
            r.max_derivative > 1e-3 && !r.stationary && !r.holomorphic && r.consistent,
            "{r:?}"
        );
    }

    #[test]
    fn degenerate_start_is_rejected() {
        let g = disk(32);
        let h = MappingField::from_fn(g.clone(), |z| z.conj()).unwrap();
        let bd: Vec<Complex64> = h.boundary_trace().to_vec();
        let r = minimize(
            &bd,
            &h,
            &ConvexProfile::Power(2.0),
            &WeightField::Unit,
            &MinimizeOptions::default(),
        );
        assert!(matches!(r, Err(Error::Degenerate { .. })));
    }
}
