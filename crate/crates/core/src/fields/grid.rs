//! Uniform cell-centred grids with an inside mask.
//!
//! Nodes sit at cell centres of an `n × n` lattice over the bounding box of
//! the domain and are numbered row-major (`j * n + i`, `j` along `y`). The
//! unit disk keeps the nodes whose centre lies strictly inside the circle.
//! Every node carries a first-derivative stencil per axis: centred when the
//! full stencil fits inside the mask, otherwise the same number of points
//! shifted to one side of the node.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::math::{cubic_weights, derivative_weights};
use crate::tolerances::MIN_RESOLUTION;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "kebab-case"))]
pub enum DomainKind {
    UnitDisk,
    /// `{ x ∈ [-half_width, half_width], y ∈ [y_min, y_max] }`.
    HalfPlane {
        half_width: f64,
        y_min: f64,
        y_max: f64,
    },
    Rectangle {
        x_min: f64,
        x_max: f64,
        y_min: f64,
        y_max: f64,
    },
}

impl DomainKind {
    /// Bounding box `(x_min, x_max, y_min, y_max)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            DomainKind::UnitDisk => (-1.0, 1.0, -1.0, 1.0),
            DomainKind::HalfPlane {
                half_width,
                y_min,
                y_max,
            } => (-half_width, half_width, y_min, y_max),
            DomainKind::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => (x_min, x_max, y_min, y_max),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        match *self {
            DomainKind::UnitDisk => Ok(()),
            DomainKind::HalfPlane {
                half_width,
                y_min,
                y_max,
            } => {
                if !(half_width > 0.0) || !half_width.is_finite() {
                    return bad("half-plane half width must be positive");
                }
                if !(y_min >= 0.0) {
                    return bad("half-plane truncation needs y_min >= 0");
                }
                if !(y_min < y_max) || !y_max.is_finite() {
                    return bad("half-plane truncation needs y_min < y_max");
                }
                Ok(())
            }
            DomainKind::Rectangle {
                x_min,
                x_max,
                y_min,
                y_max,
            } => {
                if !(x_min < x_max) || !(y_min < y_max) || !(x_max - x_min).is_finite() || !(y_max - y_min).is_finite()
                {
                    return bad("rectangle extents must be finite with min < max");
                }
                Ok(())
            }
        }
    }

    /// Default truncation of the upper half-plane used for Cayley
    /// conjugation.
    pub fn default_half_plane() -> Self {
        DomainKind::HalfPlane {
            half_width: 20.0,
            y_min: 1e-3,
            y_max: 20.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StencilOrder {
    Second,
    Fourth,
}

impl StencilOrder {
    pub fn points(self) -> usize {
        match self {
            StencilOrder::Second => 3,
            StencilOrder::Fourth => 5,
        }
    }

    fn slot(self) -> usize {
        match self {
            StencilOrder::Second => 0,
            StencilOrder::Fourth => 1,
        }
    }

    pub fn from_usize(k: usize) -> Result<Self> {
        match k {
            2 => Ok(StencilOrder::Second),
            4 => Ok(StencilOrder::Fourth),
            _ => Err(Error::Config(alloc::format!("stencil order must be 2 or 4, got {k}"))),
        }
    }
}

/// First-derivative stencil along one axis, in units of the spacing.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil {
    /// Axis index of the first stencil point.
    pub start: u32,
    /// Number of points; 0 marks a node whose run is a single point.
    pub len: u8,
    pub w: [f64; 5],
}

impl Stencil {
    const EMPTY: Stencil = Stencil {
        start: 0,
        len: 0,
        w: [0.0; 5],
    };
}

#[derive(Clone, Debug)]
struct OrderTables {
    sx: Vec<Stencil>,
    sy: Vec<Stencil>,
    /// Centred stencil available along both axes.
    interior: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct DomainGrid {
    kind: DomainKind,
    n: usize,
    x_min: f64,
    y_min: f64,
    dx: f64,
    dy: f64,
    inside: Vec<bool>,
    nodes: Vec<usize>,
    boundary: Vec<usize>,
    row_runs: Vec<Vec<(usize, usize)>>,
    tables: [OrderTables; 2],
}

/// Build a grid of `n × n` cells over the domain.
pub fn build_grid(kind: DomainKind, n: usize) -> Result<DomainGrid> {
    DomainGrid::new(kind, n)
}

impl DomainGrid {
    pub fn new(kind: DomainKind, n: usize) -> Result<Self> {
        if n < MIN_RESOLUTION {
            return Err(Error::Config(alloc::format!(
                "resolution must be at least {MIN_RESOLUTION}, got {n}"
            )));
        }
        kind.validate()?;
        let (x0, x1, y0, y1) = kind.bounds();
        let dx = (x1 - x0) / n as f64;
        let dy = (y1 - y0) / n as f64;
        let mut inside = vec![false; n * n];
        for j in 0..n {
            for i in 0..n {
                let on = match kind {
                    DomainKind::UnitDisk => {
                        let x = x0 + (i as f64 + 0.5) * dx;
                        let y = y0 + (j as f64 + 0.5) * dy;
                        x * x + y * y < 1.0
                    }
                    _ => true,
                };
                inside[j * n + i] = on;
            }
        }
        Ok(Self::assemble(kind, n, inside))
    }

    /// Rebuild a grid from an explicit inside mask (used when loading
    /// fields and when restricting).
    pub fn from_mask(kind: DomainKind, n: usize, inside: Vec<bool>) -> Result<Self> {
        if n < MIN_RESOLUTION {
            return Err(Error::Config(alloc::format!(
                "resolution must be at least {MIN_RESOLUTION}"
            )));
        }
        kind.validate()?;
        if inside.len() != n * n {
            return Err(Error::Config("mask length does not match n²".into()));
        }
        Ok(Self::assemble(kind, n, inside))
    }

    /// Same lattice with the nodes failing `keep` removed from the mask.
    pub fn restrict<F: FnMut(usize, Complex64) -> bool>(&self, mut keep: F) -> DomainGrid {
        let mut inside = self.inside.clone();
        for &k in &self.nodes {
            if !keep(k, self.point(k)) {
                inside[k] = false;
            }
        }
        Self::assemble(self.kind, self.n, inside)
    }

    fn assemble(kind: DomainKind, n: usize, inside: Vec<bool>) -> Self {
        let (x0, x1, y0, y1) = kind.bounds();
        let dx = (x1 - x0) / n as f64;
        let dy = (y1 - y0) / n as f64;
        let nodes: Vec<usize> = (0..n * n).filter(|&k| inside[k]).collect();
        let at = |i: isize, j: isize| -> bool {
            i >= 0 && j >= 0 && (i as usize) < n && (j as usize) < n && inside[j as usize * n + i as usize]
        };
        let boundary: Vec<usize> = nodes
            .iter()
            .copied()
            .filter(|&k| {
                let (i, j) = ((k % n) as isize, (k / n) as isize);
                !(at(i - 1, j) && at(i + 1, j) && at(i, j - 1) && at(i, j + 1))
            })
            .collect();

        let row_runs: Vec<Vec<(usize, usize)>> = (0..n).map(|j| runs((0..n).map(|i| inside[j * n + i]))).collect();
        let col_runs: Vec<Vec<(usize, usize)>> = (0..n).map(|i| runs((0..n).map(|j| inside[j * n + i]))).collect();

        let tables = [StencilOrder::Second, StencilOrder::Fourth].map(|order| {
            let m = order.points();
            let half = (m / 2) as isize;
            let mut sx = vec![Stencil::EMPTY; n * n];
            let mut sy = vec![Stencil::EMPTY; n * n];
            let mut interior = vec![false; n * n];
            for (j, rr) in row_runs.iter().enumerate() {
                for &(a, b) in rr {
                    for i in a..=b {
                        sx[j * n + i] = axis_stencil(i, a, b, m);
                    }
                }
            }
            for (i, cr) in col_runs.iter().enumerate() {
                for &(a, b) in cr {
                    for j in a..=b {
                        sy[j * n + i] = axis_stencil(j, a, b, m);
                    }
                }
            }
            for &k in &nodes {
                let (i, j) = ((k % n) as isize, (k / n) as isize);
                interior[k] = (-half..=half).all(|d| at(i + d, j) && at(i, j + d));
            }
            OrderTables { sx, sy, interior }
        });

        DomainGrid {
            kind,
            n,
            x_min: x0,
            y_min: y0,
            dx,
            dy,
            inside,
            nodes,
            boundary,
            row_runs,
            tables,
        }
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    pub fn dy(&self) -> f64 {
        self.dy
    }
    /// Characteristic spacing `max(dx, dy)`.
    pub fn spacing(&self) -> f64 {
        self.dx.max(self.dy)
    }
    pub fn cell_area(&self) -> f64 {
        self.dx * self.dy
    }
    pub fn len(&self) -> usize {
        self.n * self.n
    }
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
    pub fn is_inside(&self, k: usize) -> bool {
        self.inside[k]
    }
    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }
    /// Inside nodes in row-major order.
    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }
    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }
    /// Nodes whose centred stencil of the given order fits in the mask.
    pub fn is_interior(&self, k: usize, order: StencilOrder) -> bool {
        self.tables[order.slot()].interior[k]
    }
    /// Inside nodes that need a one-sided stencil at the given order.
    pub fn is_boundary_adjacent(&self, k: usize, order: StencilOrder) -> bool {
        self.inside[k] && !self.is_interior(k, order)
    }
    pub fn masked_area(&self) -> f64 {
        self.nodes.len() as f64 * self.cell_area()
    }

    #[inline]
    pub fn point(&self, k: usize) -> Complex64 {
        let (i, j) = (k % self.n, k / self.n);
        Complex64::new(
            self.x_min + (i as f64 + 0.5) * self.dx,
            self.y_min + (j as f64 + 0.5) * self.dy,
        )
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    /// Whether `p` lies in the closed bounding box of the domain.
    pub fn contains_box(&self, p: Complex64) -> bool {
        let (x0, x1, y0, y1) = self.kind.bounds();
        p.re >= x0 && p.re <= x1 && p.im >= y0 && p.im <= y1
    }

    /// `∂/∂x` and `∂/∂y` of `values` at node `k`.
    #[inline]
    pub fn gradient<T>(&self, values: &[T], k: usize, order: StencilOrder) -> (T, T)
    where
        T: Copy + Zero + Add<Output = T> + Mul<f64, Output = T>,
    {
        let t = &self.tables[order.slot()];
        let (i, j) = (k % self.n, k / self.n);
        let sx = &t.sx[k];
        let sy = &t.sy[k];
        let nan = T::zero() * f64::NAN;
        let gx = if sx.len == 0 {
            nan
        } else {
            let mut acc = T::zero();
            for (q, w) in sx.w[..sx.len as usize].iter().enumerate() {
                acc = acc + values[j * self.n + sx.start as usize + q] * *w;
            }
            acc * (1.0 / self.dx)
        };
        let gy = if sy.len == 0 {
            nan
        } else {
            let mut acc = T::zero();
            for (q, w) in sy.w[..sy.len as usize].iter().enumerate() {
                acc = acc + values[(sy.start as usize + q) * self.n + i] * *w;
            }
            acc * (1.0 / self.dy)
        };
        (gx, gy)
    }

    /// Nodes read by the stencils of node `k`.
    pub(crate) fn stencil_support(&self, k: usize, order: StencilOrder) -> impl Iterator<Item = usize> + '_ {
        let t = &self.tables[order.slot()];
        let (i, j) = (k % self.n, k / self.n);
        let sx = t.sx[k];
        let sy = t.sy[k];
        let n = self.n;
        (0..sx.len as usize)
            .map(move |q| j * n + sx.start as usize + q)
            .chain((0..sy.len as usize).map(move |q| (sy.start as usize + q) * n + i))
    }

    /// Bicubic Lagrange sample of node values at an arbitrary point.
    ///
    /// Each of four consecutive rows is interpolated along `x` on its own
    /// window of four consecutive inside nodes, then the four row values are
    /// interpolated along `y`. Windows shift sideways near the mask edge, so
    /// points up to two cells outside the node hull are extrapolated. The
    /// result is exact for polynomials of degree ≤ 3 in each variable.
    /// Returns `None` when no admissible window exists.
    pub fn sample<T>(&self, values: &[T], p: Complex64) -> Option<T>
    where
        T: Copy + Zero + Add<Output = T> + Mul<f64, Output = T>,
    {
        let fx = (p.re - self.x_min) / self.dx - 0.5;
        let fy = (p.im - self.y_min) / self.dy - 0.5;
        if !(fx.is_finite() && fy.is_finite()) {
            return None;
        }
        let n = self.n as isize;
        if fx < -2.0 || fy < -2.0 || fx > (n + 1) as f64 || fy > (n + 1) as f64 {
            return None;
        }
        if fx == fx.round() && fy == fy.round() && fx >= 0.0 && fy >= 0.0 && fx < n as f64 && fy < n as f64 {
            let k = self.index(fx as usize, fy as usize);
            if self.inside[k] {
                return Some(values[k]);
            }
        }
        let jb = fy.floor() as isize;
        for dj in [-1isize, -2, 0, -3, 1] {
            let j0 = jb + dj;
            if j0 < 0 || j0 + 3 >= n {
                continue;
            }
            if (fy - (j0 as f64 + 1.5)).abs() > 2.5 {
                continue;
            }
            let mut starts = [0usize; 4];
            let mut ok = true;
            for (r, s) in starts.iter_mut().enumerate() {
                match self.row_window(j0 as usize + r, fx) {
                    Some(i0) => *s = i0,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            let mut rows = [T::zero(); 4];
            for r in 0..4 {
                let j = j0 as usize + r;
                let i0 = starts[r];
                let w = cubic_weights(fx - i0 as f64);
                let base = j * self.n + i0;
                rows[r] =
                    values[base] * w[0] + values[base + 1] * w[1] + values[base + 2] * w[2] + values[base + 3] * w[3];
            }
            let w = cubic_weights(fy - j0 as f64);
            return Some(rows[0] * w[0] + rows[1] * w[1] + rows[2] * w[2] + rows[3] * w[3]);
        }
        None
    }

    fn row_window(&self, j: usize, fx: f64) -> Option<usize> {
        let ib = fx.floor() as isize;
        let mut best: Option<(f64, usize)> = None;
        for &(a, b) in &self.row_runs[j] {
            if b - a + 1 < 4 {
                continue;
            }
            let i0 = (ib - 1).clamp(a as isize, b as isize - 3) as usize;
            let dist = (fx - (i0 as f64 + 1.5)).abs();
            if dist <= 2.5 && best.is_none_or(|(d, _)| dist < d) {
                best = Some((dist, i0));
            }
        }
        best.map(|(_, i0)| i0)
    }
}

fn runs<I: Iterator<Item = bool>>(flags: I) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut last = 0;
    for (i, f) in flags.enumerate() {
        match (f, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                out.push((s, i - 1));
                start = None;
            }
            _ => {}
        }
        last = i;
    }
    if let Some(s) = start {
        out.push((s, last));
    }
    out
}

fn axis_stencil(i: usize, a: usize, b: usize, m: usize) -> Stencil {
    let run = b - a + 1;
    if run < 2 {
        return Stencil::EMPTY;
    }
    let m = m.min(run);
    let half = m / 2;
    let start = (i as isize - half as isize).clamp(a as isize, (b + 1 - m) as isize) as usize;
    let offsets: Vec<f64> = (0..m).map(|q| (start + q) as f64 - i as f64).collect();
    let wv = derivative_weights(&offsets);
    let mut w = [0.0; 5];
    w[..m].copy_from_slice(&wv);
    Stencil {
        start: start as u32,
        len: m as u8,
        w,
    }
}
