//! Steklov expansions of fields and boundary data, weighted trace norms, the
//! extension operator and truncated membership tests.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::invalid;
use crate::fit::{fit_line, LineFit};
use crate::geometry::BoundarySamples;
use crate::spectrum::Trig;
use crate::{math, Error, Result, Spectrum};

/// Coefficients `(g_1, …, g_N)` with respect to the basis of one spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceCoefficients {
    /// Id of the [`Spectrum`] providing the basis.
    pub basis: String,
    pub coeffs: Vec<f64>,
}

impl TraceCoefficients {
    pub fn new(spectrum: &Spectrum, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() > spectrum.len() {
            return Err(invalid(format!(
                "{} coefficients for a basis of {} functions",
                coeffs.len(),
                spectrum.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coefficients must be finite"));
        }
        Ok(Self {
            basis: spectrum.id.clone(),
            coeffs,
        })
    }

    pub fn zeros(spectrum: &Spectrum, n: usize) -> Result<Self> {
        Self::new(spectrum, alloc::vec![0.0; n])
    }

    pub fn truncation(&self) -> usize {
        self.coeffs.len()
    }

    /// Fails unless the coefficients belong to `spectrum`.
    pub fn check_basis(&self, spectrum: &Spectrum) -> Result<()> {
        if self.basis != spectrum.id {
            return Err(Error::BasisMismatch(format!(
                "coefficients for `{}` used with `{}`",
                self.basis, spectrum.id
            )));
        }
        if self.coeffs.len() > spectrum.len() {
            return Err(Error::BasisMismatch(format!(
                "{} coefficients exceed the {} basis functions",
                self.coeffs.len(),
                spectrum.len()
            )));
        }
        Ok(())
    }
}

/// Weight applied to `g_j²` in a trace norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightScheme {
    /// `(1 + σ_j)^{2s}`; `s = 0` is the `L²(∂Ω)` norm.
    HsA(f64),
    /// `(1 + σ_j)`, the first power, used for the traces of `H^k`.
    HkA,
}

impl WeightScheme {
    pub fn weight(&self, sigma: f64) -> f64 {
        match *self {
            WeightScheme::HsA(s) => math::powf(1.0 + sigma, 2.0 * s),
            WeightScheme::HkA => 1.0 + sigma,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            WeightScheme::HsA(s) if !(s >= 0.0) => Err(invalid("HsA needs s ≥ 0")),
            _ => Ok(()),
        }
    }
}

fn check_truncation(spectrum: &Spectrum, n: usize) -> Result<()> {
    if n > spectrum.len() {
        return Err(invalid(format!(
            "truncation {n} exceeds the {} available eigenpairs",
            spectrum.len()
        )));
    }
    Ok(())
}

/// `a_j = ⟨u, u_j⟩` in the spectrum's inner product, `j < n`.
pub fn steklov_expand(u: &[f64], spectrum: &Spectrum, n: usize) -> Result<TraceCoefficients> {
    check_truncation(spectrum, n)?;
    if u.len() != spectrum.discretization.dofs {
        return Err(Error::BasisMismatch(format!(
            "field has {} unknowns, the discretization {}",
            u.len(),
            spectrum.discretization.dofs
        )));
    }
    let coeffs = (0..n)
        .map(|j| spectrum.inner(u, &spectrum.eigenvectors[j]))
        .collect();
    Ok(TraceCoefficients {
        basis: spectrum.id.clone(),
        coeffs,
    })
}

/// `Σ a_j u_j`.
pub fn reconstruct(c: &TraceCoefficients, spectrum: &Spectrum) -> Result<Vec<f64>> {
    c.check_basis(spectrum)?;
    let mut u = alloc::vec![0.0; spectrum.discretization.dofs];
    for (a, v) in c.coeffs.iter().zip(&spectrum.eigenvectors) {
        u.iter_mut().zip(v).for_each(|(x, y)| *x += a * y);
    }
    Ok(u)
}

/// `g_j = ⟨g, û_j⟩_{L²(∂Ω)}` by boundary quadrature, `j < n`.
pub fn boundary_expand(
    g: &BoundarySamples,
    spectrum: &Spectrum,
    n: usize,
) -> Result<TraceCoefficients> {
    check_truncation(spectrum, n)?;
    let boundary = spectrum.boundary();
    g.check(boundary)?;
    let coeffs = (0..n)
        .map(|j| boundary.l2_inner(&g.values, &spectrum.normalized_trace(j)))
        .collect();
    Ok(TraceCoefficients {
        basis: spectrum.id.clone(),
        coeffs,
    })
}

/// `Σ g_j û_j` sampled at the boundary nodes.
pub fn boundary_synthesize(c: &TraceCoefficients, spectrum: &Spectrum) -> Result<BoundarySamples> {
    c.check_basis(spectrum)?;
    let mut values = alloc::vec![0.0; spectrum.boundary().len()];
    for (j, g) in c.coeffs.iter().enumerate() {
        if *g != 0.0 {
            values
                .iter_mut()
                .zip(spectrum.normalized_trace(j))
                .for_each(|(x, y)| *x += g * y);
        }
    }
    BoundarySamples::new(spectrum.boundary(), values)
}

/// Truncated partial sums `Σ_{j<N} w(σ_j) g_j²` for `N = 1..=len`.
pub fn weighted_partial_sums(
    c: &TraceCoefficients,
    spectrum: &Spectrum,
    w: WeightScheme,
) -> Result<Vec<f64>> {
    c.check_basis(spectrum)?;
    w.validate()?;
    let mut acc = 0.0;
    Ok(c.coeffs
        .iter()
        .zip(&spectrum.eigenvalues)
        .map(|(g, s)| {
            acc += w.weight(*s) * g * g;
            acc
        })
        .collect())
}

/// `(Σ w(σ_j) g_j²)^{1/2}` over the stored coefficients.
pub fn weighted_norm(c: &TraceCoefficients, spectrum: &Spectrum, w: WeightScheme) -> Result<f64> {
    Ok(math::sqrt(
        weighted_partial_sums(c, spectrum, w)?
            .last()
            .copied()
            .unwrap_or(0.0),
    ))
}

/// `E g = Σ sqrt(1 + σ_j) g_j u_j`, a right inverse of the selected trace.
pub fn extend(c: &TraceCoefficients, spectrum: &Spectrum) -> Result<Vec<f64>> {
    c.check_basis(spectrum)?;
    let mut u = alloc::vec![0.0; spectrum.discretization.dofs];
    for (j, g) in c.coeffs.iter().enumerate() {
        let a = math::sqrt(1.0 + spectrum.eigenvalues[j]) * g;
        if a != 0.0 {
            u.iter_mut()
                .zip(&spectrum.eigenvectors[j])
                .for_each(|(x, y)| *x += a * y);
        }
    }
    Ok(u)
}

/// Three-way outcome of a truncated summability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    In,
    Out,
    Undecided,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::In => "in",
            Verdict::Out => "out",
            Verdict::Undecided => "undecided",
        }
    }
}

/// Evidence thresholds for [`classify_membership`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MembershipRules {
    /// `S_N − S_{N/2} ≤ tail_tol · max(1, S_N)` proves convergence.
    pub tail_tol: f64,
    pub min_exponent: f64,
    pub min_r_squared: f64,
}

impl Default for MembershipRules {
    fn default() -> Self {
        Self {
            tail_tol: 1e-10,
            min_exponent: 0.1,
            min_r_squared: 0.99,
        }
    }
}

/// Partial sums at dyadic checkpoints and the verdict drawn from them.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    pub checkpoints: Vec<usize>,
    pub partial_sums: Vec<f64>,
    /// `S_N − S_{N/2}` at the last checkpoint.
    pub tail: f64,
    /// Fit of `log S_N` against `log N` (divergence exponent).
    pub growth: Option<LineFit>,
    /// Fit of `log(S_{2N} − S_N)` against `log N` (decay of dyadic blocks).
    pub block_decay: Option<LineFit>,
    pub reason: String,
}

impl MembershipVerdict {
    pub fn growth_exponent(&self) -> Option<f64> {
        self.growth.map(|f| f.slope)
    }
}

/// Decide whether `Σ_j w(σ_j) g_j²` converges, from the terms `j = 1..=n_max`.
///
/// In order: a Cauchy tail below tolerance gives "in"; partial sums growing
/// like a power `N^a` (`a` above threshold, good fit) give "out"; dyadic
/// block sums decaying like a power give "in"; block sums that do not
/// shrink (at least four blocks, the later half never below half the earlier
/// maximum) give "out" (logarithmic divergence); anything else is undecided.
pub fn classify_membership(
    g: impl Fn(usize) -> f64,
    sigma: impl Fn(usize) -> f64,
    w: WeightScheme,
    n_max: usize,
    rules: MembershipRules,
) -> Result<MembershipVerdict> {
    w.validate()?;
    if n_max == 0 {
        return Err(invalid("n_max must be at least 1"));
    }
    let mut cumulative = Vec::with_capacity(n_max + 1);
    cumulative.push(0.0);
    let mut acc = 0.0;
    for j in 1..=n_max {
        let gj = g(j);
        let term = w.weight(sigma(j)) * gj * gj;
        if !term.is_finite() {
            return Err(invalid(format!("term {j} is not finite")));
        }
        acc += term;
        cumulative.push(acc);
    }
    let mut checkpoints = Vec::new();
    let mut n = 1;
    while n <= n_max {
        checkpoints.push(n);
        n *= 2;
    }
    if *checkpoints.last().unwrap_or(&0) != n_max {
        checkpoints.push(n_max);
    }
    let partial_sums: Vec<f64> = checkpoints.iter().map(|&n| cumulative[n]).collect();
    let total = cumulative[n_max];
    let tail = total - cumulative[n_max / 2];

    // growth of S_N over the upper checkpoints
    let lower = (n_max / 256).max(8);
    let (gx, gy): (Vec<f64>, Vec<f64>) = checkpoints
        .iter()
        .filter(|&&n| n >= lower)
        .map(|&n| (math::ln(n as f64), cumulative[n]))
        .filter(|(_, s)| *s > 0.0)
        .map(|(x, s)| (x, math::ln(s)))
        .unzip();
    let growth = if gx.len() >= 3 {
        fit_line(&gx, &gy)
    } else {
        None
    };

    // dyadic blocks (2^{i-1}, 2^i]
    let blocks: Vec<(usize, f64)> = checkpoints
        .windows(2)
        .filter(|w| w[1] == 2 * w[0])
        .map(|w| (w[1], cumulative[w[1]] - cumulative[w[0]]))
        .collect();
    let (bx, by): (Vec<f64>, Vec<f64>) = blocks
        .iter()
        .filter(|(n, b)| *n >= 8 && *b > 0.0)
        .map(|(n, b)| (math::ln(*n as f64), math::ln(*b)))
        .unzip();
    let block_decay = if bx.len() >= 3 && bx.len() == blocks.iter().filter(|(n, _)| *n >= 8).count()
    {
        fit_line(&bx, &by)
    } else {
        None
    };

    let (verdict, reason) = if tail <= rules.tail_tol * total.max(1.0) {
        (
            Verdict::In,
            format!("Cauchy tail {tail:.3e} below tolerance"),
        )
    } else if let Some(f) =
        growth.filter(|f| f.slope > rules.min_exponent && f.r_squared > rules.min_r_squared)
    {
        (
            Verdict::Out,
            format!(
                "partial sums grow like N^{:.3} (R² = {:.4})",
                f.slope, f.r_squared
            ),
        )
    } else if let Some(f) =
        block_decay.filter(|f| f.slope < -rules.min_exponent && f.r_squared > rules.min_r_squared)
    {
        (
            Verdict::In,
            format!(
                "dyadic blocks decay like N^{:.3} (R² = {:.4})",
                f.slope, f.r_squared
            ),
        )
    } else if blocks_do_not_decay(&blocks) {
        (
            Verdict::Out,
            String::from("dyadic blocks do not decay (logarithmic growth)"),
        )
    } else {
        (
            Verdict::Undecided,
            String::from("evidence below both thresholds"),
        )
    };
    Ok(MembershipVerdict {
        verdict,
        checkpoints,
        partial_sums,
        tail,
        growth,
        block_decay,
        reason,
    })
}

fn blocks_do_not_decay(blocks: &[(usize, f64)]) -> bool {
    let b: Vec<f64> = blocks
        .iter()
        .filter(|(n, _)| *n >= 8)
        .map(|x| x.1)
        .collect();
    if b.len() < 4 {
        return false;
    }
    let half = b.len() / 2;
    let early = b[..half].iter().fold(0.0f64, |m, x| m.max(*x));
    let late = b[half..].iter().fold(f64::INFINITY, |m, x| m.min(*x));
    early > 0.0 && late >= 0.5 * early
}

/// Membership test for stored coefficients against the spectrum's eigenvalues.
pub fn classify_coefficients(
    c: &TraceCoefficients,
    spectrum: &Spectrum,
    w: WeightScheme,
    rules: MembershipRules,
) -> Result<MembershipVerdict> {
    c.check_basis(spectrum)?;
    classify_membership(
        |j| c.coeffs[j - 1],
        |j| spectrum.eigenvalues[j - 1],
        w,
        c.coeffs.len(),
        rules,
    )
}

/// Hadamard's sequence: `n^{-3/4}` on the `cos nθ` modes, `n = 1..=n_modes`.
pub fn hadamard_value(n: usize) -> f64 {
    math::powf(n as f64, -0.75)
}

/// [`hadamard_value`] placed on the cosine modes of a harmonic disk spectrum.
pub fn hadamard_coefficients(n_modes: usize, spectrum: &Spectrum) -> Result<TraceCoefficients> {
    if spectrum.problem.order() != 1 || spectrum.discretization.modal_blocks().is_none() {
        return Err(invalid(
            "Hadamard coefficients live on the harmonic disk basis",
        ));
    }
    let mut coeffs = alloc::vec![0.0; spectrum.len()];
    let mut last = 0;
    let mut found = 0;
    for (j, c) in coeffs.iter_mut().enumerate() {
        if let Some((n, Trig::Cos)) = spectrum.mode_of(j) {
            if (1..=n_modes).contains(&n) {
                *c = hadamard_value(n);
                last = j + 1;
                found += 1;
            }
        }
    }
    if found < n_modes {
        return Err(invalid(format!(
            "spectrum resolves {found} of the {n_modes} requested modes"
        )));
    }
    coeffs.truncate(last);
    TraceCoefficients::new(spectrum, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disk_spectral::laplace_steklov_disk;

    #[test]
    fn geometric_sequence_is_in() {
        let v = classify_membership(
            |j| math::exp(-(j as f64)),
            |j| j as f64,
            WeightScheme::HkA,
            256,
            MembershipRules::default(),
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::In);
    }

    #[test]
    fn hadamard_verdicts() {
        let sigma = |j: usize| j as f64;
        let out = classify_membership(
            hadamard_value,
            sigma,
            WeightScheme::HsA(0.5),
            10_000,
            MembershipRules::default(),
        )
        .unwrap();
        assert_eq!(out.verdict, Verdict::Out);
        assert!((out.growth_exponent().unwrap() - 0.5).abs() < 0.1);
        let l2 = classify_membership(
            hadamard_value,
            sigma,
            WeightScheme::HsA(0.0),
            10_000,
            MembershipRules::default(),
        )
        .unwrap();
        assert_eq!(l2.verdict, Verdict::In);
    }

    #[test]
    fn harmonic_series_diverges_logarithmically() {
        let v = classify_membership(
            |j| 1.0 / math::sqrt(j as f64),
            |_| 0.0,
            WeightScheme::HsA(0.0),
            1 << 14,
            MembershipRules::default(),
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::Out);
    }

    #[test]
    fn too_short_is_undecided() {
        let v = classify_membership(
            |j| 1.0 / j as f64,
            |_| 0.0,
            WeightScheme::HsA(0.0),
            6,
            MembershipRules::default(),
        )
        .unwrap();
        assert_eq!(v.verdict, Verdict::Undecided);
    }

    #[test]
    fn hadamard_on_disk_basis() {
        let s = laplace_steklov_disk(1.0, 8).unwrap();
        let c = hadamard_coefficients(8, &s).unwrap();
        let nonzero = c.coeffs.iter().filter(|x| **x != 0.0).count();
        assert_eq!(nonzero, 8);
        assert_eq!(c.coeffs[1], 1.0);
        assert!(hadamard_coefficients(9, &s).is_err());
    }
}
