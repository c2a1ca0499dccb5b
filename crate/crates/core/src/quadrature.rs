//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration on intervals.

use alloc::vec::Vec;

use crate::math;

/// Gauss–Legendre rule on `[0, 1]`: `(nodes, weights)`, nodes ascending.
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "a Gauss rule needs at least one point");
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // Newton on P_n starting from the Chebyshev-like guess.
        let mut x = math::cos(math::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if math::abs(dx) < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes.push(0.5 * (1.0 - x));
        weights.push(0.5 * w);
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

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
    (kronrod * h, math::abs((kronrod - gauss) * h))
}

/// Outcome of [`integrate_adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Adaptive G7/K15 integration with global bisection of the worst interval.
/// Stops once the summed error estimate drops below
/// `max(abs_tol, rel_tol * |value|)` or the interval budget is spent.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> AdaptiveResult {
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut pieces: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, v, e)];
    loop {
        let value: f64 = pieces.iter().map(|p| p.2).sum();
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        let target = if abs_tol > rel_tol * math::abs(value) {
            abs_tol
        } else {
            rel_tol * math::abs(value)
        };
        if err <= target || pieces.len() >= MAX_INTERVALS {
            return AdaptiveResult {
                value,
                error_estimate: err,
                intervals: pieces.len(),
            };
        }
        let worst = pieces.iter().enumerate().fold(
            0,
            |best, (i, p)| if p.3 > pieces[best].3 { i } else { best },
        );
        let (lo, hi, _, _) = pieces.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_integrates_polynomials_exactly() {
        for n in 1..=8 {
            let (x, w) = gauss_legendre_unit(n);
            for deg in 0..(2 * n) {
                let approx: f64 = x
                    .iter()
                    .zip(&w)
                    .map(|(xi, wi)| wi * xi.powi(deg as i32))
                    .sum();
                let exact = 1.0 / (deg as f64 + 1.0);
                assert!(
                    (approx - exact).abs() < 1e-14,
                    "n={n} deg={deg}: {approx} vs {exact}"
                );
            }
        }
    }

    #[test]
    fn gauss_nodes_are_inside_and_sorted() {
        let (x, w) = gauss_legendre_unit(6);
        assert!(x.windows(2).all(|p| p[0] < p[1]));
        assert!(x.iter().all(|&t| t > 0.0 && t < 1.0));
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_handles_high_degree_monomials() {
        for p in [1, 11, 101, 401] {
            let r = integrate_adaptive(|x| x.powi(p), 0.0, 1.0, 1e-13, 1e-300);
            let exact = 1.0 / (p as f64 + 1.0);
            assert!(
                ((r.value - exact) / exact).abs() < 1e-12,
                "p={p}: {}",
                r.value
            );
        }
    }

    #[test]
    fn adaptive_smooth_transcendental() {
        let r = integrate_adaptive(|x| x.sin(), 0.0, core::f64::consts::PI, 1e-13, 1e-15);
        assert!((r.value - 2.0).abs() < 1e-13);
    }
}
