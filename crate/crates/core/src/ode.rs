//! Half-plane diffeomorphisms `h(x + iy) = x + i u(y)` whose Ahlfors–Hopf
//! differential is constant.
//!
//! With `𝓕(t) = Ψ′((1 + t²)/(2t)) (1 − t²)` the profile solves
//! `𝓕(u′(y)) η(u(y)) = 4λ`, that is `u′ = 𝓖(u) = 𝓕⁻¹(4λ/η(u))` with
//! `u(0) = 0`. `𝓕` decreases strictly from `M = lim_{t→0⁺} 𝓕(t)` through
//! `𝓕(1) = 0` towards `−∞`, so `λ > 0` selects the contracting branch
//! `u′ ∈ (0, 1)` and `λ < 0` the expanding branch `u′ > 1`.
//!
//! The constant `4λ` is the value of `4Φ_h`; the transport convention
//! `Φ_h = λ` differs by exactly that factor 4.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::energy::{ConvexProfile, WeightField};
use crate::fields::grid::{DomainGrid, StencilOrder};
use crate::fields::{distortion_at, wirtinger_derivatives, MappingField, WirtingerField};
use crate::math::{gauss_legendre, geomspace, ls_slope};
use crate::tolerances::{DIVERGENCE_RATIO, F_INVERSE_TOL, M_INFINITE, ODE_LOCAL_TOL, QC_TAIL_GROWTH};
use crate::{Error, Result};

/// Solutions beyond this magnitude are treated as having left every
/// bounded window; integration stops there.
pub const BLOWUP: f64 = 1e100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Branch {
    /// `λ > 0`, `u′ ∈ (0, 1)`.
    Contracting,
    /// `λ < 0`, `u′ > 1`.
    Expanding,
    /// `λ = 0`, `u′ ≡ 1`.
    Identity,
}

impl Branch {
    pub fn of_lambda(lambda: f64) -> Branch {
        if lambda > 0.0 {
            Branch::Contracting
        } else if lambda < 0.0 {
            Branch::Expanding
        } else {
            Branch::Identity
        }
    }
}

#[inline]
fn f_raw(psi: &ConvexProfile, t: f64) -> f64 {
    let k = (1.0 + t * t) / (2.0 * t);
    let s = 1.0 - t * t;
    if s == 0.0 {
        return 0.0;
    }
    psi.deriv(k) * s
}

/// `𝓕(t)`, `t > 0`.
pub fn f_eval(psi: &ConvexProfile, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::Domain(alloc::format!("F is defined for t > 0, got {t}")));
    }
    Ok(f_raw(psi, t))
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MLimit {
    Finite(f64),
    Infinite,
}

impl MLimit {
    pub fn value(&self) -> f64 {
        match *self {
            MLimit::Finite(m) => m,
            MLimit::Infinite => f64::INFINITY,
        }
    }
}

/// `M = lim_{a→0⁺} 𝓕(a)` from the samples `a = 2^{−k}`.
///
/// Infinite when a sample exceeds `10¹²`, or when the increments between
/// successive samples stop shrinking geometrically (slow power-law
/// divergence).
pub fn m_limit(psi: &ConvexProfile) -> MLimit {
    let mut prev = f_raw(psi, 0.5);
    let mut prev_inc = f64::NAN;
    let mut slow = 0;
    for k in 2..1000 {
        let a = 0.5f64.powi(k);
        let v = f_raw(psi, a);
        if !(v <= M_INFINITE) {
            return MLimit::Infinite;
        }
        let inc = v - prev;
        if inc <= f64::EPSILON * v.abs() {
            return MLimit::Finite(v);
        }
        if prev_inc.is_finite() && inc > 0.9 * prev_inc {
            slow += 1;
            if slow >= 8 {
                return MLimit::Infinite;
            }
        } else {
            slow = 0;
        }
        prev = v;
        prev_inc = inc;
    }
    MLimit::Finite(prev)
}

fn range_error(psi: &ConvexProfile, y: f64) -> Error {
    let m = m_limit(psi).value();
    Error::range(alloc::format!("F on its branch (M = {m:e})"), 1, Complex64::new(y, 0.0))
}

/// `𝓕⁻¹(y)` on the given branch by bracketed bisection.
pub fn f_inverse(psi: &ConvexProfile, y: f64, branch: Branch) -> Result<f64> {
    if y == 0.0 {
        return Ok(1.0);
    }
    if !y.is_finite() {
        return Err(range_error(psi, y));
    }
    let (mut lo, mut hi) = match branch {
        Branch::Identity => return Err(range_error(psi, y)),
        Branch::Contracting => {
            if y < 0.0 {
                return Err(range_error(psi, y));
            }
            // 𝓕 decreases: find a with 𝓕(a) ≥ y.
            let mut hi = 1.0;
            let mut a = 0.5;
            loop {
                if f_raw(psi, a) >= y {
                    break;
                }
                hi = a;
                a *= 0.5;
                if a < 1e-300 {
                    return Err(range_error(psi, y));
                }
            }
            (a, hi)
        }
        Branch::Expanding => {
            if y > 0.0 {
                return Err(range_error(psi, y));
            }
            let mut lo = 1.0;
            let mut b = 2.0;
            loop {
                let v = f_raw(psi, b);
                if v <= y {
                    break;
                }
                lo = b;
                b *= 2.0;
                if b > 1e300 {
                    return Err(range_error(psi, y));
                }
            }
            (lo, b)
        }
    };
    // Invariant: 𝓕(lo) ≥ y ≥ 𝓕(hi).
    let tol = F_INVERSE_TOL * (1.0 + y.abs());
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f_raw(psi, mid);
        if v >= y {
            lo = mid;
        } else {
            hi = mid;
        }
        if (v - y).abs() <= tol * 1e-3 {
            return Ok(mid);
        }
    }
    let (vl, vh) = (f_raw(psi, lo), f_raw(psi, hi));
    let t = if (vl - y).abs() <= (vh - y).abs() { lo } else { hi };
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepControl {
    /// Local error bound per step, relative to `max(1, |u|)`.
    pub tol: f64,
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            tol: ODE_LOCAL_TOL,
            h0: 1e-4,
            max_steps: 2_000_000,
        }
    }
}

/// A solved profile with its samples `(y_k, u_k, u′_k)`.
#[derive(Clone, Debug)]
pub struct OdeProfile {
    pub psi: ConvexProfile,
    pub eta: WeightField,
    pub lambda: f64,
    pub branch: Branch,
    pub m: MLimit,
    pub control: StepControl,
    pub ys: Vec<f64>,
    pub us: Vec<f64>,
    pub ups: Vec<f64>,
    /// Set when `|u|` passed [`BLOWUP`] before `y_max`.
    pub blowup_at: Option<f64>,
    pub y_max: f64,
}

struct Rhs<'a> {
    psi: &'a ConvexProfile,
    eta: &'a WeightField,
    target: f64,
    branch: Branch,
}

impl Rhs<'_> {
    fn g(&self, u: f64) -> Result<f64> {
        if self.branch == Branch::Identity {
            return Ok(1.0);
        }
        let eta = self.eta.eval_height(u).unwrap_or(f64::NAN);
        if !(eta > 0.0) {
            return Err(Error::Domain(alloc::format!("weight is not positive at height {u}")));
        }
        f_inverse(self.psi, self.target / eta, self.branch)
    }

    fn rk4(&self, u: f64, h: f64) -> Result<f64> {
        let k1 = self.g(u)?;
        let k2 = self.g(u + 0.5 * h * k1)?;
        let k3 = self.g(u + 0.5 * h * k2)?;
        let k4 = self.g(u + h * k3)?;
        Ok(u + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0)
    }

    /// Adaptive step-doubling RK4 from `(y0, u0)` to `y1`; every accepted
    /// step is passed to `record`. Returns the final `(y, u, h)` and whether
    /// integration stopped at the blow-up cap.
    fn advance<F: FnMut(f64, f64)>(
        &self,
        y0: f64,
        u0: f64,
        y1: f64,
        h0: f64,
        control: &StepControl,
        mut record: F,
    ) -> core::result::Result<(f64, f64, f64, bool), (f64, f64)> {
        let (mut y, mut u, mut h) = (y0, u0, h0);
        let mut steps = 0usize;
        while y < y1 {
            if steps >= control.max_steps {
                return Err((y, u));
            }
            steps += 1;
            let last = h >= y1 - y;
            let hs = if last { y1 - y } else { h };
            let attempt = (|| -> Result<(f64, f64)> {
                let full = self.rk4(u, hs)?;
                let half = self.rk4(u, 0.5 * hs)?;
                let two = self.rk4(half, 0.5 * hs)?;
                Ok((full, two))
            })();
            match attempt {
                Ok((full, two)) => {
                    let err = (two - full).abs() / 15.0;
                    let scale = control.tol * two.abs().max(1.0);
                    if err <= scale && two.is_finite() {
                        y = if last { y1 } else { y + hs };
                        u = two + (two - full) / 15.0;
                        record(y, u);
                        let grow = if err == 0.0 {
                            4.0
                        } else {
                            (0.9 * (scale / err).powf(0.2)).clamp(0.2, 4.0)
                        };
                        if !last {
                            h = hs * grow;
                        }
                        if u.abs() > BLOWUP {
                            return Ok((y, u, h, true));
                        }
                    } else {
                        h = hs * (0.9 * (scale / err).powf(0.2)).clamp(0.1, 0.9);
                    }
                }
                Err(_) => {
                    h = 0.25 * hs;
                }
            }
            if h < 1e-14 * y.abs().max(1.0) {
                return Err((y, u));
            }
        }
        Ok((y, u, h, false))
    }
}

/// Integrate `u′ = 𝓖(u)`, `u(0) = 0`, on `[0, y_max]`.
///
/// `η` must depend on the height only. When `4λ/η(u)` leaves the range of
/// `𝓕` the solution cannot be continued; the partial profile is returned
/// inside [`Error::RangeExhausted`].
pub fn solve_profile(
    psi: &ConvexProfile,
    eta: &WeightField,
    lambda: f64,
    y_max: f64,
    control: StepControl,
) -> Result<OdeProfile> {
    if !eta.depends_on_height_only() {
        return Err(Error::Config(alloc::format!(
            "weight '{}' is not a function of height",
            eta.name()
        )));
    }
    if !(y_max > 0.0) || !y_max.is_finite() || !lambda.is_finite() {
        return Err(Error::Config("profile needs finite lambda and y_max > 0".into()));
    }
    let branch = Branch::of_lambda(lambda);
    let mut profile = OdeProfile {
        psi: *psi,
        eta: eta.clone(),
        lambda,
        branch,
        m: m_limit(psi),
        control,
        ys: vec![0.0],
        us: vec![0.0],
        ups: vec![],
        blowup_at: None,
        y_max,
    };
    if branch == Branch::Identity {
        let ys = geomspace(1e-6, y_max, 200);
        profile.ys.extend_from_slice(&ys);
        profile.us = profile.ys.clone();
        profile.ups = vec![1.0; profile.ys.len()];
        return Ok(profile);
    }
    let rhs = Rhs {
        psi,
        eta,
        target: 4.0 * lambda,
        branch,
    };
    let first = match rhs.g(0.0) {
        Ok(v) => v,
        Err(_) => {
            profile.ups.push(f64::NAN);
            return Err(Error::RangeExhausted {
                y: 0.0,
                u: 0.0,
                partial: alloc::boxed::Box::new(profile),
            });
        }
    };
    profile.ups.push(first);
    let mut ys = vec![];
    let mut us = vec![];
    let result = rhs.advance(0.0, 0.0, y_max, control.h0, &control, |y, u| {
        ys.push(y);
        us.push(u);
    });
    for (y, u) in ys.into_iter().zip(us) {
        // Near exhaustion u creeps below rounding; keep samples strictly increasing.
        if u <= *profile.us.last().expect("seeded") {
            continue;
        }
        profile.ys.push(y);
        profile.us.push(u);
        profile.ups.push(rhs.g(u).unwrap_or(f64::NAN));
    }
    match result {
        Ok((y, _, _, blew)) => {
            if blew {
                profile.blowup_at = Some(y);
            }
            Ok(profile)
        }
        Err((y, u)) => {
            // Drop a trailing sample whose slope could not be evaluated.
            while profile.ups.last().is_some_and(|v| v.is_nan()) && profile.ys.len() > 1 {
                profile.ys.pop();
                profile.us.pop();
                profile.ups.pop();
            }
            Err(Error::RangeExhausted {
                y,
                u,
                partial: alloc::boxed::Box::new(profile),
            })
        }
    }
}

impl OdeProfile {
    fn rhs(&self) -> Rhs<'_> {
        Rhs {
            psi: &self.psi,
            eta: &self.eta,
            target: 4.0 * self.lambda,
            branch: self.branch,
        }
    }

    /// Last height covered by the samples.
    pub fn y_end(&self) -> f64 {
        *self.ys.last().expect("profile has samples")
    }

    pub fn u_end(&self) -> f64 {
        *self.us.last().expect("profile has samples")
    }

    /// `u′ = 𝓖(u)` at a height value `u`.
    pub fn slope_at_height(&self, u: f64) -> Result<f64> {
        self.rhs().g(u)
    }

    /// `(u(y), u′(y))` by integrating from the nearest sample below `y`.
    pub fn u_at(&self, y: f64) -> Result<(f64, f64)> {
        if !(y >= 0.0) || y > self.y_end() {
            return Err(Error::Extent(alloc::format!(
                "height {y} outside the solved range [0, {}]",
                self.y_end()
            )));
        }
        if self.branch == Branch::Identity {
            return Ok((y, 1.0));
        }
        let idx = match self.ys.binary_search_by(|v| v.partial_cmp(&y).expect("finite samples")) {
            Ok(i) => return Ok((self.us[i], self.ups[i])),
            Err(i) => i - 1,
        };
        let (y0, u0) = (self.ys[idx], self.us[idx]);
        let h0 = (y - y0).max(1e-300);
        let rhs = self.rhs();
        let (_, u, _, _) = rhs
            .advance(y0, u0, y, h0, &self.control, |_, _| {})
            .map_err(|(yy, _)| Error::Extent(alloc::format!("could not continue the profile past {yy}")))?;
        Ok((u, rhs.g(u)?))
    }

    /// `𝕂 = (1 + u′²)/(2u′)` at each sample.
    pub fn distortions(&self) -> Vec<f64> {
        self.ups.iter().map(|&p| (1.0 + p * p) / (2.0 * p)).collect()
    }

    /// `|𝓕(u′) − 4λ/η(u)| / (1 + |4λ/η(u)|)` at each sample.
    pub fn residuals(&self) -> Vec<f64> {
        self.us
            .iter()
            .zip(&self.ups)
            .map(|(&u, &p)| {
                let eta = self.eta.eval_height(u).unwrap_or(f64::NAN);
                let target = if self.lambda == 0.0 {
                    0.0
                } else {
                    4.0 * self.lambda / eta
                };
                (f_raw(&self.psi, p) - target).abs() / (1.0 + target.abs())
            })
            .collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals().into_iter().fold(0.0, f64::max)
    }

    /// Branch invariant of the samples (the first slope may equal 1 when
    /// `η(0)` is infinite).
    pub fn branch_consistent(&self) -> bool {
        let mono = self.us.windows(2).all(|w| w[1] > w[0]);
        let slopes = self.ups.iter().enumerate().all(|(k, &p)| match self.branch {
            Branch::Identity => p == 1.0,
            Branch::Contracting => p > 0.0 && (p < 1.0 || (k == 0 && p == 1.0)),
            Branch::Expanding => p > 1.0 || (k == 0 && p == 1.0),
        });
        mono && slopes && self.us[0] == 0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Surjectivity {
    Surjective,
    NotSurjective,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurjectivityReport {
    pub verdict: Surjectivity,
    /// `∫₀^x 𝓖(t) dt` at the last block end `x`.
    pub integral: f64,
    pub x: f64,
    /// Ratio of the last two dyadic block increments.
    pub tail_ratio: f64,
    /// Extrapolated limit of the integral when it converges.
    pub limit_estimate: Option<f64>,
    /// `u(y_end)` of the solved profile.
    pub u_end: f64,
    /// `min η(s)Ψ′(s)` over the last dyadic block ends.
    pub liminf_proxy: f64,
    /// `𝓖` ran out of range before `x`.
    pub exhausted: bool,
}

/// Surjectivity of `x + iu(y)` onto the upper half-plane, decided by
/// whether `∫₀^∞ 𝓖(t) dt` diverges.
///
/// The integral is accumulated over the blocks `[0,1]` and `[2^k, 2^{k+1}]`
/// up to `y_max`; when the last two block increments shrink by a ratio
/// `r ≤ 0.9` the tail is geometric, the integral converges to about
/// `I + d·r/(1 − r)`, and the map is not surjective.
pub fn surjectivity_diagnosis(profile: &OdeProfile) -> Result<SurjectivityReport> {
    if profile.y_max < 1e3 {
        return Err(Error::Extent("surjectivity diagnosis needs y_max >= 1e3".into()));
    }
    let proxy_at = |s: f64| profile.eta.eval_height(s).unwrap_or(f64::NAN) * profile.psi.deriv(s);
    if profile.branch == Branch::Identity {
        return Ok(SurjectivityReport {
            verdict: Surjectivity::Surjective,
            integral: profile.y_max,
            x: profile.y_max,
            tail_ratio: 1.0,
            limit_estimate: None,
            u_end: profile.u_end(),
            liminf_proxy: proxy_at(profile.y_max),
            exhausted: false,
        });
    }
    let rhs = profile.rhs();
    let mut ends = vec![0.0, 1.0];
    while ends[ends.len() - 1] * 2.0 <= profile.y_max {
        let last = ends[ends.len() - 1];
        ends.push(last * 2.0);
    }
    let mut incs = Vec::new();
    let mut failed = false;
    for w in ends.windows(2) {
        let mut bad = false;
        let d = gauss_legendre(
            |t| match rhs.g(t) {
                Ok(v) => v,
                Err(_) => {
                    bad = true;
                    0.0
                }
            },
            w[0],
            w[1],
            8,
        );
        if bad {
            failed = true;
            break;
        }
        incs.push(d);
    }
    let integral: f64 = incs.iter().sum();
    let x = ends[incs.len()];
    let tail_ratio = if incs.len() >= 2 {
        incs[incs.len() - 1] / incs[incs.len() - 2]
    } else {
        f64::NAN
    };
    let liminf_proxy = ends[ends.len().saturating_sub(4)..]
        .iter()
        .filter(|&&s| s > 0.0)
        .map(|&s| proxy_at(s))
        .fold(f64::INFINITY, f64::min);
    let (verdict, limit) = if failed {
        (Surjectivity::NotSurjective, None)
    } else if tail_ratio <= DIVERGENCE_RATIO {
        let d = incs[incs.len() - 1];
        (
            Surjectivity::NotSurjective,
            Some(integral + d * tail_ratio / (1.0 - tail_ratio)),
        )
    } else {
        (Surjectivity::Surjective, None)
    };
    Ok(SurjectivityReport {
        verdict,
        integral,
        x,
        tail_ratio,
        limit_estimate: limit,
        u_end: profile.u_end(),
        liminf_proxy,
        exhausted: failed,
    })
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QcReport {
    pub quasiconformal: bool,
    /// `𝕂` at the end of the solved range and one decade earlier.
    pub k_end: f64,
    pub k_decade: f64,
}

/// Whether `𝕂` has levelled off over the last decade of the profile.
pub fn quasiconformality(profile: &OdeProfile) -> Result<QcReport> {
    let y1 = profile.y_end();
    let (_, p1) = profile.u_at(y1)?;
    let (_, p0) = profile.u_at(0.1 * y1)?;
    let k = |p: f64| (1.0 + p * p) / (2.0 * p);
    let (k_end, k_decade) = (k(p1), k(p0));
    Ok(QcReport {
        quasiconformal: profile.blowup_at.is_none() && k_end <= k_decade * (1.0 + QC_TAIL_GROWTH),
        k_end,
        k_decade,
    })
}

/// `h(x + iy) = x + i u(y)` on the nodes of a half-plane or rectangle grid.
pub fn build_half_plane_map(profile: &OdeProfile, grid: &Arc<DomainGrid>) -> Result<MappingField> {
    let rows = profile_rows(profile, grid)?;
    let n = grid.n();
    MappingField::from_fn(grid.clone(), |z| {
        let j = row_of(grid, z, n);
        Complex64::new(z.re, rows[j].0)
    })
}

/// Exact Wirtinger derivatives `h_z = (1 + u′)/2`, `h_z̄ = (1 − u′)/2`.
pub fn half_plane_wirtinger(profile: &OdeProfile, grid: &Arc<DomainGrid>) -> Result<WirtingerField> {
    let rows = profile_rows(profile, grid)?;
    let n = grid.n();
    Ok(WirtingerField::from_fn(grid.clone(), |z| {
        let p = rows[row_of(grid, z, n)].1;
        (
            Complex64::new(0.5 * (1.0 + p), 0.0),
            Complex64::new(0.5 * (1.0 - p), 0.0),
        )
    }))
}

fn row_of(grid: &DomainGrid, z: Complex64, n: usize) -> usize {
    let (_, _, y0, _) = grid.kind().bounds();
    (((z.im - y0) / grid.dy() - 0.5).round() as usize).min(n - 1)
}

fn profile_rows(profile: &OdeProfile, grid: &DomainGrid) -> Result<Vec<(f64, f64)>> {
    let (_, _, y0, y1) = grid.kind().bounds();
    if y0 < 0.0 || y1 > profile.y_end() {
        return Err(Error::Extent(alloc::format!(
            "grid heights [{y0}, {y1}] not covered by the profile [0, {}]",
            profile.y_end()
        )));
    }
    (0..grid.n())
        .map(|j| profile.u_at(y0 + (j as f64 + 0.5) * grid.dy()))
        .collect()
}

/// `max |4Ψ′(𝕂) h_z conj(h_z̄) η(Im h) − 4λ|` with fourth-order derivatives.
pub fn ah_residual(h: &MappingField, psi: &ConvexProfile, eta: &WeightField, lambda: f64) -> f64 {
    ah_residual_with(h, &wirtinger_derivatives(h, StencilOrder::Fourth), psi, eta, lambda)
}

pub fn ah_residual_with(
    h: &MappingField,
    w: &WirtingerField,
    psi: &ConvexProfile,
    eta: &WeightField,
    lambda: f64,
) -> f64 {
    let g = w.grid();
    let mut worst: f64 = 0.0;
    for &k in g.nodes() {
        let Some(kk) = distortion_at(w.fz[k], w.fzbar[k]) else {
            return f64::INFINITY;
        };
        let prod = w.fz[k] * w.fzbar[k].conj();
        let phi4 = if prod == Complex64::new(0.0, 0.0) {
            prod
        } else {
            prod * (4.0 * psi.deriv(kk) * eta.eval(h.value(k)))
        };
        worst = worst.max((phi4 - 4.0 * lambda).norm());
    }
    worst
}

/// Closed form of the hyperbolic harmonic profile (`Ψ = t`, `η = Im⁻²`,
/// `λ ≤ 0`): with `c = 2√|λ|`, `u(y) = sinh(cy)/c` solves
/// `u′ = √(1 − 4λu²)`, `u′(y) = cosh(cy)`, and at target height `v`
/// the distortion is `(1 + 2|λ|v²)/√(1 + 4|λ|v²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HarmonicClosedForm {
    pub lambda: f64,
}

pub fn harmonic_closed_form(lambda: f64) -> Result<HarmonicClosedForm> {
    if !(lambda <= 0.0) {
        return Err(Error::Domain(alloc::format!(
            "the closed form covers the expanding branch lambda <= 0, got {lambda}"
        )));
    }
    Ok(HarmonicClosedForm { lambda })
}

impl HarmonicClosedForm {
    fn c(&self) -> f64 {
        2.0 * (-self.lambda).sqrt()
    }

    pub fn u(&self, y: f64) -> f64 {
        let c = self.c();
        if c == 0.0 {
            y
        } else {
            (c * y).sinh() / c
        }
    }

    pub fn u_prime(&self, y: f64) -> f64 {
        (self.c() * y).cosh()
    }

    /// Inverse of `u`: the height `y` with `u(y) = v`.
    pub fn y_of_u(&self, v: f64) -> f64 {
        let c = self.c();
        if c == 0.0 {
            v
        } else {
            (c * v).asinh() / c
        }
    }

    /// `𝕂` at source height `y`.
    pub fn k_at(&self, y: f64) -> f64 {
        let p = self.u_prime(y);
        (1.0 + p * p) / (2.0 * p)
    }

    /// `𝕂` at target height `v = u(y)`.
    pub fn k_at_height(&self, v: f64) -> f64 {
        let l = -self.lambda;
        (1.0 + 2.0 * l * v * v) / (1.0 + 4.0 * l * v * v).sqrt()
    }
}

/// Least-squares slope of `log u` against `log s` over `[s_min, s_max]`.
pub fn power2_exponent(profile: &OdeProfile, s_min: f64, s_max: f64) -> Result<f64> {
    if profile.psi != ConvexProfile::Power(2.0) || profile.eta != WeightField::HypHalf {
        return Err(Error::Config(
            "the exponent fit applies to psi = t^2 with the hyperbolic half-plane weight".into(),
        ));
    }
    if !(s_min > 0.0) || !(s_max > s_min * 1.5) || s_max > profile.y_end() {
        return Err(Error::Extent(alloc::format!(
            "fit range [{s_min}, {s_max}] invalid or beyond the solved range [0, {}]",
            profile.y_end()
        )));
    }
    let ss = geomspace(s_min, s_max, 41);
    let mut lx = Vec::with_capacity(ss.len());
    let mut ly = Vec::with_capacity(ss.len());
    for &s in &ss {
        let (u, _) = profile.u_at(s)?;
        lx.push(s.ln());
        ly.push(u.ln());
    }
    Ok(ls_slope(&lx, &ly))
}

/// Parsed `psi=<name>;eta=<name>;lambda=<f>;ymax=<f>`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileSpec {
    pub psi: ConvexProfile,
    pub eta: WeightField,
    pub lambda: f64,
    pub y_max: f64,
}

impl Default for ProfileSpec {
    fn default() -> Self {
        ProfileSpec {
            psi: ConvexProfile::Linear,
            eta: WeightField::Unit,
            lambda: 0.0,
            y_max: 1e3,
        }
    }
}

impl ProfileSpec {
    /// Missing keys take the defaults `linear`, `unit`, `0`, `1000`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut spec = ProfileSpec::default();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(alloc::format!("expected key=value in profile spec, got '{part}'")))?;
            let num = |v: &str| -> Result<f64> {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(alloc::format!("bad number '{v}' for '{k}'")))
            };
            match k.trim() {
                "psi" => spec.psi = ConvexProfile::parse(v)?,
                "eta" => spec.eta = WeightField::parse(v)?,
                "lambda" => spec.lambda = num(v)?,
                "ymax" => spec.y_max = num(v)?,
                other => return Err(Error::Config(alloc::format!("unknown profile key '{other}'"))),
            }
        }
        Ok(spec)
    }

    pub fn solve(&self, control: StepControl) -> Result<OdeProfile> {
        solve_profile(&self.psi, &self.eta, self.lambda, self.y_max, control)
    }

    pub fn to_spec_string(&self) -> String {
        alloc::format!(
            "psi={};eta={};lambda={};ymax={}",
            self.psi,
            self.eta.name(),
            self.lambda,
            self.y_max
        )
    }
}
