//! Power-law fits `σ_j ≈ C j^e` of computed spectra and the reweighted
//! sequence views `(j^e s_j) ∈ ℓ²`.

use alloc::format;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::fit::fit_line;
use crate::trace_spaces::{
    classify_membership, MembershipRules, MembershipVerdict, TraceCoefficients, WeightScheme,
};
use crate::{math, Result, Spectrum};

/// Default number of leading eigenvalues left out of a fit.
pub const DEFAULT_J_MIN: usize = 10;
/// Fewest positive eigenvalues a fit accepts.
pub const MIN_FIT_POINTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylFit {
    pub exponent: f64,
    /// `C` in `σ_j ≈ C j^e`.
    pub constant: f64,
    /// `C |∂Ω|^e`, the constant of `σ_j ≈ C' (j / |∂Ω|)^e`.
    pub normalized_constant: f64,
    /// 1-based, inclusive.
    pub fit_range: (usize, usize),
    pub r_squared: f64,
}

/// Least-squares fit of `ln σ_j` against `ln j` for `j_min ≤ j ≤ j_max`
/// (1-based). Zero eigenvalues are skipped.
pub fn weyl_fit_values(
    values: &[f64],
    perimeter: f64,
    j_min: usize,
    j_max: usize,
) -> Result<WeylFit> {
    if j_min == 0 || j_max < j_min {
        return Err(invalid("fit range must satisfy 1 ≤ j_min ≤ j_max"));
    }
    if !(perimeter > 0.0) {
        return Err(invalid("boundary length must be positive"));
    }
    let j_max = j_max.min(values.len());
    let (x, y): (Vec<f64>, Vec<f64>) = (j_min..=j_max)
        .filter(|&j| values[j - 1] > 0.0)
        .map(|j| (math::ln(j as f64), math::ln(values[j - 1])))
        .unzip();
    if x.len() < MIN_FIT_POINTS {
        return Err(invalid(format!(
            "{} positive eigenvalues in range, at least {MIN_FIT_POINTS} needed",
            x.len()
        )));
    }
    let f = fit_line(&x, &y).ok_or_else(|| invalid("degenerate fit range"))?;
    let constant = math::exp(f.intercept);
    Ok(WeylFit {
        exponent: f.slope,
        constant,
        normalized_constant: constant * math::powf(perimeter, f.slope),
        fit_range: (j_min, j_max),
        r_squared: f.r_squared,
    })
}

/// [`weyl_fit_values`] on a computed spectrum, up to its last eigenvalue.
pub fn weyl_fit(spectrum: &Spectrum, j_min: usize) -> Result<WeylFit> {
    weyl_fit_values(
        &spectrum.eigenvalues,
        spectrum.boundary().total_length,
        j_min,
        spectrum.len(),
    )
}

/// Planar harmonic law `σ_j ≈ (2π / ω_1) (j / |∂Ω|)`, `ω_1 = 2`.
pub fn harmonic_weyl_law(j: f64, perimeter: f64) -> f64 {
    math::PI * j / perimeter
}

/// `(j^e s_j) ∈ ℓ²` for coefficients in basis order.
pub fn sequence_view(
    c: &TraceCoefficients,
    exponent: f64,
    rules: MembershipRules,
) -> Result<MembershipVerdict> {
    sequence_view_values(&c.coeffs, exponent, rules)
}

pub fn sequence_view_values(
    s: &[f64],
    exponent: f64,
    rules: MembershipRules,
) -> Result<MembershipVerdict> {
    classify_membership(
        |j| math::powf(j as f64, exponent) * s[j - 1],
        |_| 0.0,
        WeightScheme::HsA(0.0),
        s.len(),
        rules,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace_spaces::Verdict;
    use alloc::vec;

    fn disk_values(n: usize) -> Vec<f64> {
        (0..n).map(|j| j.div_ceil(2) as f64).collect()
    }

    #[test]
    fn harmonic_disk_law() {
        let f = weyl_fit_values(&disk_values(200), math::TAU, 10, 200).unwrap();
        assert!((f.exponent - 1.0).abs() < 0.02, "{f:?}");
        assert!((f.constant - 0.5).abs() < 0.05, "{f:?}");
        assert!((f.normalized_constant - math::PI).abs() < 0.3);
        assert_eq!(harmonic_weyl_law(200.0, math::TAU), 100.0);
    }

    #[test]
    fn flat_and_scaled_spectra() {
        let f = weyl_fit_values(&vec![5.0; 60], 1.0, 10, 60).unwrap();
        assert!(f.exponent.abs() < 1e-12);
        assert!((f.constant - 5.0).abs() < 1e-10);
        let base = disk_values(300);
        let scaled: Vec<f64> = base.iter().map(|v| 7.0 * v).collect();
        let (a, b) = (
            weyl_fit_values(&base, 1.0, 10, 300).unwrap(),
            weyl_fit_values(&scaled, 1.0, 10, 300).unwrap(),
        );
        assert!((a.exponent - b.exponent).abs() < 1e-12);
        assert!((b.constant / a.constant - 7.0).abs() < 1e-9);
    }

    #[test]
    fn wider_range_tightens_the_exponent() {
        let v = disk_values(3200);
        let errs: Vec<f64> = [50, 200, 800, 3200]
            .iter()
            .map(|&m| (weyl_fit_values(&v, math::TAU, 10, m).unwrap().exponent - 1.0).abs())
            .collect();
        assert!(errs.windows(2).all(|w| w[1] <= w[0]), "{errs:?}");
    }

    #[test]
    fn too_few_values() {
        assert!(weyl_fit_values(&disk_values(25), 1.0, 10, 25).is_err());
        assert!(weyl_fit_values(&disk_values(25), 1.0, 0, 25).is_err());
    }

    #[test]
    fn sequence_views() {
        let r = MembershipRules::default();
        let had: Vec<f64> = (1..=10_000).map(|j| math::powf(j as f64, -0.75)).collect();
        assert_eq!(
            sequence_view_values(&had, 0.5, r).unwrap().verdict,
            Verdict::Out
        );
        let sq: Vec<f64> = (1..=10_000).map(|j| 1.0 / (j * j) as f64).collect();
        assert_eq!(
            sequence_view_values(&sq, 0.5, r).unwrap().verdict,
            Verdict::In
        );
        assert_eq!(
            sequence_view_values(&[0.0; 64], 0.5, r).unwrap().verdict,
            Verdict::In
        );
    }
}
