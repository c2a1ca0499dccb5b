//! Fractional seminorm oracles on boundary curves: the Gagliardo double
//! integral and the finite-difference Besov integral, each evaluated on a
//! refinement sequence and classified as finite or divergent.

use alloc::vec::Vec;

use crate::error::invalid;
use crate::fit::{fit_line, LineFit};
use crate::geometry::{BoundaryNode, BoundaryParam};
use crate::quadrature::integrate_adaptive;
use crate::{math, Result};

/// Behaviour of an estimate under refinement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Limit {
    /// Increments shrink geometrically; the value is the extrapolated limit.
    Finite(f64),
    /// Estimates grow linearly in the log of the grid size (good fit).
    Divergent,
    Undecided,
}

/// Estimates of a seminorm integral (the `p`-th power of the seminorm) on a
/// sequence of grids.
#[derive(Debug, Clone, PartialEq)]
pub struct SeminormEstimate {
    /// `(number of samples, estimate)` for every level, strictly refining.
    pub levels: Vec<(usize, f64)>,
    pub limit: Limit,
    /// Fit of the estimate against `ln(samples)`.
    pub growth: Option<LineFit>,
    /// Ratio of the last two increments.
    pub increment_ratio: Option<f64>,
}

impl SeminormEstimate {
    pub fn is_divergent(&self) -> bool {
        self.limit == Limit::Divergent
    }

    /// The seminorm itself, `integral^{1/p}`, when finite.
    pub fn seminorm(&self, p: f64) -> Option<f64> {
        match self.limit {
            Limit::Finite(v) => Some(math::powf(v.max(0.0), 1.0 / p)),
            _ => None,
        }
    }
}

const CONVERGED_RATIO: f64 = 0.75;
const DIVERGENT_R2: f64 = 0.95;

/// Classify values taken on refining levels with abscissae `x` (log scale):
/// geometrically shrinking increments mean a finite limit; otherwise a
/// linear fit with slope above `min_slope` and good quality means divergence.
pub(crate) fn classify_levels(
    x: &[f64],
    values: &[f64],
    min_slope: f64,
) -> (Limit, Option<LineFit>, Option<f64>) {
    let scale = values.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    let growth = fit_line(x, values);
    if values.is_empty() {
        return (Limit::Undecided, None, None);
    }
    let last = values[values.len() - 1];
    if scale <= 1e-280 {
        return (Limit::Finite(0.0), growth, None);
    }
    if values.len() < 3 {
        return (Limit::Undecided, growth, None);
    }
    let d: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let n = d.len();
    if math::abs(d[n - 1]) <= 1e-12 * math::abs(last) {
        return (Limit::Finite(last), growth, Some(0.0));
    }
    let ratio = |i: usize| {
        if d[i - 1] != 0.0 {
            d[i] / d[i - 1]
        } else {
            f64::INFINITY
        }
    };
    let r = ratio(n - 1);
    let shrinking = |q: f64| (0.0..CONVERGED_RATIO).contains(&q);
    let geometric = shrinking(r) && (n < 3 || shrinking(ratio(n - 2)));
    if geometric {
        return (
            Limit::Finite(last + d[n - 1] * r / (1.0 - r)),
            growth,
            Some(r),
        );
    }
    let diverging = growth.is_some_and(|f| f.slope > min_slope && f.r_squared > DIVERGENT_R2);
    (
        if diverging {
            Limit::Divergent
        } else {
            Limit::Undecided
        },
        growth,
        Some(r),
    )
}

fn check_order(s: f64, p: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(invalid("smoothness s must lie in (0, 1)"));
    }
    if !(p >= 1.0) {
        return Err(invalid("exponent p must be at least 1"));
    }
    Ok(())
}

/// `Σ_{i≠j} w_i w_j |g_i − g_j|^p / |x_i − x_j|^{sp+1}`, chordal distances.
pub fn gagliardo_sum(param: &BoundaryParam, values: &[f64], s: f64, p: f64) -> Result<f64> {
    check_order(s, p)?;
    if values.len() != param.len() {
        return Err(crate::Error::BasisMismatch(
            "sample count differs from the boundary nodes".into(),
        ));
    }
    let nodes = &param.nodes;
    let row = |i: usize| -> f64 {
        let a = &nodes[i];
        let mut acc = 0.0;
        for (j, b) in nodes.iter().enumerate() {
            if j == i {
                continue;
            }
            let diff = math::abs(values[i] - values[j]);
            if diff == 0.0 {
                continue;
            }
            let dist = a.point.dist(b.point);
            acc += b.weight * math::powf(diff, p) / math::powf(dist, s * p + 1.0);
        }
        a.weight * acc
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<f64> = {
        use rayon::prelude::*;
        (0..nodes.len()).into_par_iter().map(row).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<f64> = (0..nodes.len()).map(row).collect();
    Ok(rows.iter().sum())
}

/// Gagliardo integral of `g` on a refining family of boundary samplings.
pub fn gagliardo_seminorm(
    params: &[BoundaryParam],
    g: impl Fn(&BoundaryNode) -> f64,
    s: f64,
    p: f64,
) -> Result<SeminormEstimate> {
    check_refining(params.iter().map(BoundaryParam::len))?;
    let mut levels = Vec::with_capacity(params.len());
    for param in params {
        let values: Vec<f64> = param.nodes.iter().map(&g).collect();
        levels.push((param.len(), gagliardo_sum(param, &values, s, p)?));
    }
    Ok(estimate(levels))
}

fn check_refining(sizes: impl Iterator<Item = usize>) -> Result<()> {
    let sizes: Vec<usize> = sizes.collect();
    if sizes.is_empty() {
        return Err(invalid("at least one level is needed"));
    }
    if sizes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("levels must be strictly refining"));
    }
    Ok(())
}

pub(crate) fn estimate(levels: Vec<(usize, f64)>) -> SeminormEstimate {
    let x: Vec<f64> = levels.iter().map(|l| math::ln(l.0 as f64)).collect();
    let v: Vec<f64> = levels.iter().map(|l| l.1).collect();
    let (limit, growth, increment_ratio) = classify_levels(&x, &v, 0.0);
    SeminormEstimate {
        levels,
        limit,
        growth,
        increment_ratio,
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `‖Δ_h^σ g‖_p^p` over one period for the shift `h = m` grid steps.
fn difference_norm(values: &[f64], m: usize, order: usize, p: f64, dx: f64) -> f64 {
    let n = values.len();
    let mut acc = 0.0;
    for i in 0..n {
        let mut d = 0.0;
        for j in 0..=order {
            let sign = if (order - j).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            d += sign * binomial(order, j) * values[(i + j * m) % n];
        }
        acc += math::powf(math::abs(d), p);
    }
    acc * dx
}

/// `∫_ℝ |2 sin(u/2)|^{σp} / |u|^{1+sp} du`: the factor by which the
/// difference integral of `e^{iu}` exceeds `|ξ|^{sp}`. Dividing by it makes
/// the result independent of the difference order for `p = 2`.
pub fn difference_normalization(s: f64, p: f64, order: usize) -> f64 {
    let q = order as f64 * p;
    let e = 1.0 + s * p;
    let f = |u: f64| math::powf(math::abs(2.0 * math::sin(0.5 * u)), q) / math::powf(u, e);
    let periods = 64.0;
    let mut head = 0.0;
    for k in 0..periods as usize {
        let a = math::TAU * k as f64;
        head += integrate_adaptive(f, a.max(0.0), a + math::TAU, 1e-12, 1e-15).value;
    }
    let mean = integrate_adaptive(
        |u| math::powf(math::abs(2.0 * math::sin(0.5 * u)), q),
        0.0,
        math::TAU,
        1e-12,
        1e-15,
    )
    .value
        / math::TAU;
    let tail = mean * math::powf(periods * math::TAU, -s * p) / (s * p);
    2.0 * (head + tail)
}

/// Finite-difference Besov integral `∫_ℝ ‖Δ_h^σ g‖_p^p / |h|^{1+sp} dh` for
/// uniform samples of an `period`-periodic function, normalized by
/// [`difference_normalization`]. Shifts run over several periods; the
/// remaining tail uses the mean of `‖Δ_h^σ g‖_p^p` over one period.
pub fn besov_diff_sum(values: &[f64], period: f64, s: f64, p: f64, order: usize) -> Result<f64> {
    check_order(s, p)?;
    if order == 0 || order > 2 {
        return Err(invalid("difference order must be 1 or 2"));
    }
    if (order as f64) <= s {
        return Err(invalid("difference order must exceed s"));
    }
    let n = values.len();
    if n < 4 {
        return Err(invalid("at least four samples are needed"));
    }
    let dx = period / n as f64;
    let periods = 8;
    let norms: Vec<f64> = (0..n)
        .map(|m| difference_norm(values, m, order, p, dx))
        .collect();
    let e = 1.0 + s * p;
    // [0, dx] from the value at dx, then the trapezoid rule on the grid
    let mut acc = norms[1 % n] / math::powf(dx, e) * dx;
    let kernel = |m: usize| norms[m % n] / math::powf(m as f64 * dx, e);
    let total_steps = periods * n;
    for m in 1..total_steps {
        acc += 0.5 * (kernel(m) + kernel(m + 1)) * dx;
    }
    let mean = norms.iter().sum::<f64>() / n as f64;
    acc += mean * math::powf(total_steps as f64 * dx, -s * p) / (s * p);
    Ok(2.0 * acc / difference_normalization(s, p, order))
}

/// [`besov_diff_sum`] of `g` sampled with each of the given sizes.
pub fn besov_diff_seminorm(
    g: impl Fn(f64) -> f64,
    period: f64,
    s: f64,
    p: f64,
    order: usize,
    sizes: &[usize],
) -> Result<SeminormEstimate> {
    check_refining(sizes.iter().copied())?;
    let mut levels = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let values: Vec<f64> = (0..n).map(|i| g(period * i as f64 / n as f64)).collect();
        levels.push((n, besov_diff_sum(&values, period, s, p, order)?));
    }
    Ok(estimate(levels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_disk;

    fn circles(sizes: &[usize]) -> Vec<BoundaryParam> {
        sizes
            .iter()
            .map(|&n| build_disk(1.0, n).unwrap().1)
            .collect()
    }

    #[test]
    fn constant_has_zero_seminorm() {
        let e = gagliardo_seminorm(&circles(&[32, 64, 128]), |_| 3.0, 0.5, 2.0).unwrap();
        assert_eq!(e.limit, Limit::Finite(0.0));
        let b = besov_diff_seminorm(|_| 3.0, 1.0, 0.5, 2.0, 1, &[32, 64]).unwrap();
        assert_eq!(b.limit, Limit::Finite(0.0));
    }

    #[test]
    fn step_diverges_and_cosine_converges() {
        let sizes = [64, 128, 256, 512, 1024];
        let step = |nd: &BoundaryNode| if nd.point.y >= 0.0 { 1.0 } else { 0.0 };
        assert!(gagliardo_seminorm(&circles(&sizes), step, 0.5, 2.0)
            .unwrap()
            .is_divergent());
        let cos = gagliardo_seminorm(&circles(&sizes), |nd| nd.point.x, 0.5, 2.0).unwrap();
        assert!(matches!(cos.limit, Limit::Finite(v) if v > 0.0));
    }

    #[test]
    fn difference_orders_agree() {
        let g = |t: f64| math::sin(math::TAU * t / 3.0);
        let sizes = [64, 128, 256, 512];
        let a = besov_diff_seminorm(g, 3.0, 0.5, 2.0, 1, &sizes).unwrap();
        let b = besov_diff_seminorm(g, 3.0, 0.5, 2.0, 2, &sizes).unwrap();
        let (Limit::Finite(x), Limit::Finite(y)) = (a.limit, b.limit) else {
            panic!("{a:?} {b:?}")
        };
        assert!((x / y - 1.0).abs() < 0.15, "{x} {y}");
        assert!(besov_diff_sum(&[0.0; 8], 1.0, 1.5, 2.0, 1).is_err());
    }

    #[test]
    fn step_difference_integral_diverges() {
        let step = |t: f64| if t < 0.5 { 1.0 } else { 0.0 };
        let e = besov_diff_seminorm(step, 1.0, 0.5, 2.0, 1, &[64, 128, 256, 512, 1024]).unwrap();
        assert!(e.is_divergent(), "{e:?}");
    }
}
