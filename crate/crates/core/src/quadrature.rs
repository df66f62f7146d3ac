//! Fixed and adaptive quadrature rules used by the projections and by the
//! integral representation of the Mittag-Leffler function.

use std::collections::BinaryHeap;

/// Five-point Gauss-Legendre nodes on [-1, 1].
pub const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683_1,
    0.0,
    0.538_469_310_105_683_1,
    0.906_179_845_938_664,
];

pub const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189_1,
    0.478_628_670_499_366_5,
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_5,
    0.236_926_885_056_189_1,
];

/// Nodes and weights of a composite 5-point Gauss-Legendre rule with
/// `panels` equal panels on `[a, b]`.
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(5 * panels);
    let mut weights = Vec::with_capacity(5 * panels);
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for (x, w) in GL5_NODES.iter().zip(GL5_WEIGHTS.iter()) {
            nodes.push(mid + 0.5 * h * x);
            weights.push(0.5 * h * w);
        }
    }
    (nodes, weights)
}

// Kronrod abscissae (descending), shared with the embedded 7-point Gauss rule
// at odd positions.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// The interval is first split into `initial` pieces. The piece with the
/// largest error estimate is bisected until the summed estimate falls under
/// `max(abs_tol, rel_tol * |total|)` or the subdivision budget runs out.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    initial: usize,
) -> f64 {
    const MAX_PIECES: usize = 1000;
    let n = initial.max(1);
    let h = (b - a) / n as f64;
    let mut heap = BinaryHeap::with_capacity(2 * n + 64);
    let (mut total, mut err) = (0.0, 0.0);
    for i in 0..n {
        let lo = a + i as f64 * h;
        let hi = if i + 1 == n { b } else { lo + h };
        let (val, e) = gk15(&f, lo, hi);
        total += val;
        err += e;
        heap.push(Piece { lo, hi, val, err: e });
    }
    while heap.len() < MAX_PIECES && err > abs_tol.max(rel_tol * total.abs()) {
        let Some(p) = heap.pop() else { break };
        let mid = 0.5 * (p.lo + p.hi);
        if !(mid > p.lo && mid < p.hi) {
            // no room left to bisect
            heap.push(Piece { err: 0.0, ..p });
            err -= p.err;
            continue;
        }
        let (v1, e1) = gk15(&f, p.lo, mid);
        let (v2, e2) = gk15(&f, mid, p.hi);
        total += v1 + v2 - p.val;
        err += e1 + e2 - p.err;
        heap.push(Piece { lo: p.lo, hi: mid, val: v1, err: e1 });
        heap.push(Piece { lo: mid, hi: p.hi, val: v2, err: e2 });
    }
    // resum to shed the drift of the running updates
    heap.iter().map(|p| p.val).sum()
}

struct Piece {
    lo: f64,
    hi: f64,
    val: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err).is_eq()
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = composite_gauss_legendre(0.0, 2.0, 3);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(9)).sum();
        assert!((s - 2f64.powi(10) / 10.0).abs() < 1e-10);
    }

    #[test]
    fn adaptive_handles_endpoint_singularity() {
        // ∫_0^1 √x dx = 2/3
        let v = integrate_adaptive(|x| x.sqrt(), 0.0, 1.0, 1e-15, 1e-15, 4);
        assert!((v - 2.0 / 3.0).abs() < 1e-13, "{v}");
        let v = integrate_adaptive(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-14, 1e-14, 1);
        assert!((v - 2.0).abs() < 1e-13);
    }
}
