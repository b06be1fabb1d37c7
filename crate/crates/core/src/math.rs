//! Small numerical kernels shared by the field and ODE code.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

/// Pairwise (cascade) summation with a fixed split, so a given slice always
/// reduces in the same order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        let mut s = 0.0;
        for &x in xs {
            s += x;
        }
        return s;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// First-derivative finite-difference weights at offset 0 for the given
/// (distinct) node offsets, in units of the grid spacing. Exact for
/// polynomials of degree `offsets.len() - 1`.
pub fn derivative_weights(offsets: &[f64]) -> Vec<f64> {
    let m = offsets.len();
    let mut w = Vec::with_capacity(m);
    for j in 0..m {
        // L_j'(0) = sum_{k != j} 1/(a_j - a_k) * prod_{l != j,k} (0 - a_l)/(a_j - a_l)
        let mut s = 0.0;
        for k in 0..m {
            if k == j {
                continue;
            }
            let mut p = 1.0 / (offsets[j] - offsets[k]);
            for l in 0..m {
                if l == j || l == k {
                    continue;
                }
                p *= -offsets[l] / (offsets[j] - offsets[l]);
            }
            s += p;
        }
        w.push(s);
    }
    w
}

/// Cubic Lagrange weights on nodes 0, 1, 2, 3 evaluated at `t`.
#[inline]
pub fn cubic_weights(t: f64) -> [f64; 4] {
    let t1 = t - 1.0;
    let t2 = t - 2.0;
    let t3 = t - 3.0;
    [
        -t1 * t2 * t3 / 6.0,
        t * t2 * t3 / 2.0,
        -t * t1 * t3 / 2.0,
        t * t1 * t2 / 6.0,
    ]
}

/// 8-point Gauss–Legendre rule on [-1, 1].
const GL8_NODES: [f64; 8] = [
    -0.960_289_856_497_536_3,
    -0.796_666_477_413_626_7,
    -0.525_532_409_916_329,
    -0.183_434_642_495_649_8,
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL8_WEIGHTS: [f64; 8] = [
    0.101_228_536_290_376_26,
    0.222_381_034_453_374_47,
    0.313_706_645_877_887_3,
    0.362_683_783_378_362,
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_47,
    0.101_228_536_290_376_26,
];

/// Composite 8-point Gauss–Legendre quadrature of `f` over `[a, b]` with
/// `pieces` equal subintervals.
pub fn gauss_legendre<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, pieces: usize) -> f64 {
    let h = (b - a) / pieces as f64;
    let mut parts = Vec::with_capacity(pieces);
    for p in 0..pieces {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in GL8_NODES.iter().zip(GL8_WEIGHTS.iter()) {
            s += w * f(mid + 0.5 * h * x);
        }
        parts.push(0.5 * h * s);
    }
    pairwise_sum(&parts)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = pairwise_sum(xs) / n;
    let my = pairwise_sum(ys) / n;
    let sxy: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).collect();
    let sxx: Vec<f64> = xs.iter().map(|x| (x - mx) * (x - mx)).collect();
    pairwise_sum(&sxy) / pairwise_sum(&sxx)
}

/// `n` points spaced geometrically between `a` and `b` (both > 0).
pub fn geomspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|k| {
            if k == 0 {
                a
            } else if k + 1 == n {
                b
            } else {
                (la + (lb - la) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}
