//! Steklov spectra on a disk by separation of variables.
//!
//! Each angular mode `n` and trigonometric factor contributes a small block:
//! one radial function `(r/R)^n` for `k = 1`, and the pair
//! `(r/R)^n`, `(r/R)^n((r/R)^2 - 1)` for `k = 2` (the span of `r^n, r^{n+2}`,
//! the biharmonic solutions regular at the centre). The block forms are
//! integrated in the radial variable with adaptive quadrature and every block
//! is solved as a dense generalized eigenproblem.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::invalid;
use crate::geometry::{build_disk, BoundaryParam};
use crate::linalg::{solve_definite_pencil, symmetric_eigen, TripletBuilder};
use crate::quadrature::integrate_adaptive;
use crate::spectrum::{Constraint, Layout, ModeBlock, SolveDiagnostics, Trig};
use crate::{math, Discretization, Error, ProblemKind, Result, Spectrum, SteklovProblemSpec};

const RADIAL_TOL: f64 = 1e-12;
/// Modes past the cutoff that must all lie above it before a sweep stops.
const SWEEP_MARGIN: usize = 5;

/// Polynomial in `ρ = r/R` with integer (possibly negative) powers.
#[derive(Debug, Clone, Default, PartialEq)]
struct RadialPoly {
    terms: Vec<(i32, f64)>,
}

impl RadialPoly {
    fn monomial(p: i32, c: f64) -> Self {
        let mut out = Self::default();
        out.push(p, c);
        out
    }

    fn push(&mut self, p: i32, c: f64) {
        match self.terms.iter_mut().find(|t| t.0 == p) {
            Some(t) => t.1 += c,
            None => self.terms.push((p, c)),
        }
        self.terms.retain(|t| t.1 != 0.0);
    }

    fn add(&self, o: &Self, s: f64) -> Self {
        let mut out = self.clone();
        for &(p, c) in &o.terms {
            out.push(p, s * c);
        }
        out
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = Self::default();
        for &(p, c) in &self.terms {
            for &(q, d) in &o.terms {
                out.push(p + q, c * d);
            }
        }
        out
    }

    /// `d/dr` of the function of `r`.
    fn diff(&self, radius: f64) -> Self {
        let mut out = Self::default();
        for &(p, c) in &self.terms {
            out.push(p - 1, c * p as f64 / radius);
        }
        out
    }

    /// Division by `r`.
    fn over_r(&self, radius: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .map(|&(p, c)| (p - 1, c / radius))
                .collect(),
        }
    }

    fn scale(&self, s: f64) -> Self {
        let mut out = Self::default();
        for &(p, c) in &self.terms {
            out.push(p, s * c);
        }
        out
    }

    fn eval(&self, rho: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(p, c)| c * math::powi(rho, p))
            .sum()
    }

    fn at_boundary(&self) -> f64 {
        self.terms.iter().map(|t| t.1).sum()
    }
}

fn radial_basis(order: usize, n: usize) -> Vec<RadialPoly> {
    let n = n as i32;
    let a = RadialPoly::monomial(n, 1.0);
    match order {
        1 => vec![a],
        _ => {
            let b = RadialPoly::monomial(n + 2, 1.0).add(&a, -1.0);
            vec![a, b]
        }
    }
}

/// Radial factors whose products, integrated against `r dr` and the angular
/// factor, give the volume form for angular mode `n`.
fn volume_terms(order: usize, n: usize, f: &RadialPoly, radius: f64) -> Vec<RadialPoly> {
    let nf = n as f64;
    let d1 = f.diff(radius);
    match order {
        1 => vec![d1, f.over_r(radius).scale(nf)],
        _ => {
            let d2 = d1.diff(radius);
            let f_r = d1.over_r(radius);
            let f_rr = f.over_r(radius).over_r(radius);
            vec![
                d2,
                f_r.add(&f_rr, -nf * nf),
                f_r.add(&f_rr, -1.0).scale(math::SQRT_2 * nf),
            ]
        }
    }
}

fn angular_factor(n: usize) -> f64 {
    if n == 0 {
        math::TAU
    } else {
        math::PI
    }
}

/// Dense forms of one angular mode (identical for the cosine and sine factor).
#[derive(Debug, Clone)]
pub struct ModeForms {
    pub n: usize,
    pub volume: DMatrix<f64>,
    /// `boundary[m]` is the boundary mass of the `m`-th radial derivative.
    pub boundary: Vec<DMatrix<f64>>,
    /// `trace_values[m][p]`: `m`-th radial derivative of basis function `p` at `r = R`.
    pub trace_values: Vec<Vec<f64>>,
}

/// Radial forms for mode `n` of the order-`order` problem on the disk of radius `radius`.
pub fn mode_forms(order: usize, n: usize, radius: f64) -> Result<ModeForms> {
    if order == 0 || order > 2 {
        return Err(invalid(format!(
            "disk blocks exist for k = 1, 2 only (got {order})"
        )));
    }
    let basis = radial_basis(order, n);
    let d = basis.len();
    let theta = angular_factor(n);
    let terms: Vec<Vec<RadialPoly>> = basis
        .iter()
        .map(|f| volume_terms(order, n, f, radius))
        .collect();
    let mut volume = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut integrand = RadialPoly::default();
            for (ti, tj) in terms[i].iter().zip(&terms[j]) {
                integrand = integrand.add(&ti.mul(tj), 1.0);
            }
            // r dr = R^2 ρ dρ
            let integrand = integrand.mul(&RadialPoly::monomial(1, radius * radius));
            if integrand.terms.iter().any(|t| t.0 < 0) {
                return Err(Error::Solver(format!(
                    "mode {n}: radial integrand is singular at the centre"
                )));
            }
            let v = integrate_adaptive(|rho| integrand.eval(rho), 0.0, 1.0, RADIAL_TOL, 1e-300)
                .value
                * theta;
            volume[(i, j)] = v;
            volume[(j, i)] = v;
        }
    }
    let mut trace_values = Vec::with_capacity(order);
    let mut derivs = basis.clone();
    for _ in 0..order {
        trace_values.push(
            derivs
                .iter()
                .map(RadialPoly::at_boundary)
                .collect::<Vec<f64>>(),
        );
        derivs = derivs.iter().map(|f| f.diff(radius)).collect();
    }
    let boundary = trace_values
        .iter()
        .map(|t| DMatrix::from_fn(d, d, |i, j| theta * radius * t[i] * t[j]))
        .collect();
    Ok(ModeForms {
        n,
        volume,
        boundary,
        trace_values,
    })
}

/// Eigenpairs of one block, or an empty list when the right-hand side vanishes
/// on the admissible subspace.
fn solve_block(forms: &ModeForms, problem: &ProblemKind) -> Result<Vec<(f64, DVector<f64>)>> {
    let d = forms.volume.nrows();
    let mut a = forms.volume.clone();
    if let ProblemKind::Steklov(s) = problem {
        for j in 0..s.k {
            if j != s.ell {
                a += &forms.boundary[j] * s.beta(j);
            }
        }
    }
    let b = &forms.boundary[problem.rhs_trace()];
    // admissible subspace
    let z = match problem.constrained_trace() {
        None => DMatrix::identity(d, d),
        Some(l) => {
            let c = DVector::from_column_slice(&forms.trace_values[l]);
            null_space(&(&c * c.transpose()))
        }
    };
    if z.ncols() == 0 {
        return Ok(Vec::new());
    }
    let az = z.transpose() * &a * &z;
    let bz = z.transpose() * b * &z;
    let (bvals, bvecs) = symmetric_eigen(&bz);
    let bmax = bvals.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
    if bmax == 0.0 {
        return Ok(Vec::new());
    }
    let range: Vec<usize> = (0..bvals.len())
        .filter(|&i| bvals[i] > 1e-12 * bmax)
        .collect();
    let kernel: Vec<usize> = (0..bvals.len())
        .filter(|&i| bvals[i] <= 1e-12 * bmax)
        .collect();
    let qr = bvecs.select_columns(&range);
    let qn = bvecs.select_columns(&kernel);
    let label = format!("disk mode {}", forms.n);
    let arr = qr.transpose() * &az * &qr;
    let mass = qr.transpose() * &bz * &qr;
    let (schur, recover) = if kernel.is_empty() {
        (arr, DMatrix::zeros(0, range.len()))
    } else {
        let ann = qn.transpose() * &az * &qn;
        let anr = qn.transpose() * &az * &qr;
        let chol = nalgebra::Cholesky::new(ann).ok_or_else(|| Error::NotPositiveDefinite {
            block: label.clone(),
            detail: String::from("left-hand side is singular on the kernel of the right-hand side"),
        })?;
        let x = chol.solve(&anr);
        (arr - anr.transpose() * &x, -x)
    };
    let sol = solve_definite_pencil(&schur, &mass, &label)?;
    let mut out = Vec::with_capacity(sol.values.len());
    for (i, sigma) in sol.values.iter().enumerate() {
        let y = sol.vectors.column(i).into_owned();
        let mut w = &qr * &y;
        if !kernel.is_empty() {
            w += &qn * (&recover * &y);
        }
        out.push((*sigma, &z * w));
    }
    Ok(out)
}

/// Orthonormal basis of the null space of a small symmetric PSD matrix.
fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let (vals, vecs) = symmetric_eigen(m);
    let scale = vals.iter().fold(0.0f64, |s, v| s.max(math::abs(*v)));
    let cols: Vec<usize> = (0..vals.len())
        .filter(|&i| math::abs(vals[i]) <= 1e-12 * scale)
        .collect();
    if scale == 0.0 {
        return DMatrix::identity(m.nrows(), m.nrows());
    }
    vecs.select_columns(&cols)
}

fn compute_modes(
    order: usize,
    modes: core::ops::Range<usize>,
    radius: f64,
) -> Result<Vec<ModeForms>> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        modes
            .into_par_iter()
            .map(|n| mode_forms(order, n, radius))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        modes.map(|n| mode_forms(order, n, radius)).collect()
    }
}

/// Smallest admissible boundary sample count for modes up to `n_max`:
/// the uniform rule must integrate products of two modes exactly.
pub fn default_boundary_samples(n_max: usize) -> usize {
    (4 * n_max + 8).max(64)
}

fn assemble_modal(
    order: usize,
    radius: f64,
    modes: &[ModeForms],
    boundary: BoundaryParam,
) -> Result<Discretization> {
    let n_max = modes.last().map_or(0, |m| m.n);
    if boundary.len() <= 2 * n_max {
        return Err(invalid(format!(
            "{} boundary samples cannot resolve angular modes up to {n_max}",
            boundary.len()
        )));
    }
    let mut blocks = Vec::new();
    let mut offset = 0;
    for m in modes {
        let len = m.volume.nrows();
        blocks.push(ModeBlock {
            n: m.n,
            trig: Trig::Cos,
            offset,
            len,
        });
        offset += len;
        if m.n > 0 {
            blocks.push(ModeBlock {
                n: m.n,
                trig: Trig::Sin,
                offset,
                len,
            });
            offset += len;
        }
    }
    let dofs = offset;
    let nodes = boundary.len();
    let mut volume = TripletBuilder::new(dofs, dofs);
    let mut masses: Vec<TripletBuilder> = (0..order)
        .map(|_| TripletBuilder::new(dofs, dofs))
        .collect();
    let mut traces: Vec<TripletBuilder> = (0..order)
        .map(|_| TripletBuilder::new(nodes, dofs))
        .collect();
    let angles: Vec<f64> = boundary.nodes.iter().map(|nd| nd.s / radius).collect();
    for block in &blocks {
        let m = &modes[block.n];
        for i in 0..block.len {
            for j in 0..block.len {
                volume.push(block.offset + i, block.offset + j, m.volume[(i, j)]);
                for (t, mass) in masses.iter_mut().enumerate() {
                    mass.push(block.offset + i, block.offset + j, m.boundary[t][(i, j)]);
                }
            }
        }
        for (node, th) in angles.iter().enumerate() {
            let arg = block.n as f64 * th;
            let trig = match block.trig {
                Trig::Cos => math::cos(arg),
                Trig::Sin => math::sin(arg),
            };
            for (t, tr) in traces.iter_mut().enumerate() {
                for p in 0..block.len {
                    tr.push(node, block.offset + p, m.trace_values[t][p] * trig);
                }
            }
        }
    }
    Ok(Discretization {
        label: format!("disk(R={radius},modes={n_max},samples={nodes})"),
        order,
        dofs,
        boundary,
        volume: volume.build(),
        boundary_mass: masses.into_iter().map(TripletBuilder::build).collect(),
        trace_ops: traces.into_iter().map(TripletBuilder::build).collect(),
        layout: Layout::Modal { radius, blocks },
    })
}

/// Modal discretization of order `order` with angular modes `0..=n_max`
/// sampled at `samples` uniform boundary nodes.
pub fn disk_discretization(
    radius: f64,
    order: usize,
    n_max: usize,
    samples: usize,
) -> Result<Discretization> {
    let (_, boundary) = build_disk(radius, samples)?;
    let modes = compute_modes(order, 0..n_max + 1, radius)?;
    assemble_modal(order, radius, &modes, boundary)
}

/// All eigenpairs of `problem` on a modal disk discretization.
pub fn solve_disk(disc: Arc<Discretization>, problem: ProblemKind) -> Result<Spectrum> {
    disc.check_problem(&problem)?;
    let (radius, blocks) = match &disc.layout {
        Layout::Modal { radius, blocks } => (*radius, blocks.clone()),
        Layout::Nodal { .. } => {
            return Err(invalid("solve_disk needs a modal disk discretization"))
        }
    };
    let n_max = blocks.last().map_or(0, |b| b.n);
    let modes = compute_modes(disc.order, 0..n_max + 1, radius)?;
    let mut pairs = Vec::new();
    let mut constraints = Vec::new();
    let mut diagnostics = SolveDiagnostics::default();
    for block in &blocks {
        let forms = &modes[block.n];
        let sol = solve_block(forms, &problem)?;
        if sol.is_empty() && block.trig == Trig::Cos {
            diagnostics.modes_without_eigenvalue.push(block.n);
        }
        for (sigma, v) in sol {
            let mut full = vec![0.0; disc.dofs];
            full[block.range()].copy_from_slice(v.as_slice());
            pairs.push((sigma, full));
        }
        if let Some(l) = problem.constrained_trace() {
            let c: Constraint = forms.trace_values[l]
                .iter()
                .enumerate()
                .map(|(p, v)| (block.offset + p, *v))
                .filter(|(_, v)| *v != 0.0)
                .collect();
            if !c.is_empty() {
                diagnostics.constrained_dim += 1;
                constraints.push(c);
            }
        }
    }
    diagnostics.reduced_dim = pairs.len();
    diagnostics.certified = pairs.len();
    Spectrum::assemble(disc, problem, pairs, constraints, diagnostics)
}

/// Harmonic Steklov spectrum of the disk of radius `radius` with angular modes
/// `0..=n_modes`: `0` and `n/R` twice for every `n ≥ 1`.
pub fn laplace_steklov_disk(radius: f64, n_modes: usize) -> Result<Spectrum> {
    if n_modes == 0 {
        return Err(invalid("n_modes must be at least 1"));
    }
    let disc = disk_discretization(radius, 1, n_modes, default_boundary_samples(n_modes))?;
    solve_disk(
        Arc::new(disc),
        ProblemKind::Steklov(SteklovProblemSpec::new(1, 0)?),
    )
}

/// Smallest `n_eigs` eigenvalues (extended to complete the last multiplicity
/// group) of a biharmonic problem on the disk. Modes are added until every
/// mode past the last one used lies above the cutoff for several consecutive
/// modes.
pub fn sweep_disk(radius: f64, problem: ProblemKind, n_eigs: usize) -> Result<Spectrum> {
    if n_eigs == 0 {
        return Err(invalid("n_eigs must be at least 1"));
    }
    let order = problem.order();
    let cap = 4 * n_eigs + 64;
    let mut modes: Vec<ModeForms> = Vec::new();
    let mut values: Vec<(usize, f64)> = Vec::new();
    let mut n_cut = None;
    while n_cut.is_none() {
        let n = modes.len();
        if n > cap {
            return Err(Error::Solver(format!(
                "mode sweep did not certify {n_eigs} eigenvalues within {cap} modes"
            )));
        }
        let forms = mode_forms(order, n, radius)?;
        let mult = if n == 0 { 1 } else { 2 };
        for (sigma, _) in solve_block(&forms, &problem)? {
            for _ in 0..mult {
                values.push((n, sigma));
            }
        }
        modes.push(forms);
        n_cut = certified_cutoff(&values, n_eigs, n);
    }
    let n_cut = n_cut.unwrap_or(0);
    modes.truncate(n_cut + 1);
    let (_, boundary) = build_disk(radius, default_boundary_samples(n_cut))?;
    let disc = Arc::new(assemble_modal(order, radius, &modes, boundary)?);
    let mut spectrum = solve_disk(disc, problem)?;
    let keep = spectrum
        .groups
        .iter()
        .find(|g| g.contains(&(n_eigs - 1)))
        .map_or(spectrum.len(), |g| g.end);
    spectrum.truncate(keep);
    spectrum.diagnostics.certified = keep;
    Ok(spectrum)
}

/// Highest mode needed once the modes `last - SWEEP_MARGIN + 1 ..= last` all
/// sit above the `n_eigs`-th smallest eigenvalue of the earlier modes.
fn certified_cutoff(values: &[(usize, f64)], n_eigs: usize, last: usize) -> Option<usize> {
    if last < SWEEP_MARGIN {
        return None;
    }
    let first_tail = last + 1 - SWEEP_MARGIN;
    let mut head: Vec<f64> = values
        .iter()
        .filter(|v| v.0 < first_tail)
        .map(|v| v.1)
        .collect();
    if head.len() < n_eigs {
        return None;
    }
    head.sort_by(f64::total_cmp);
    let cutoff = head[n_eigs - 1];
    let tail_min = values
        .iter()
        .filter(|v| v.0 >= first_tail)
        .map(|v| v.1)
        .fold(f64::INFINITY, f64::min);
    let tail_monotone = (first_tail..last).all(|n| {
        let lo = values
            .iter()
            .filter(|v| v.0 == n)
            .map(|v| v.1)
            .fold(f64::INFINITY, f64::min);
        let hi = values
            .iter()
            .filter(|v| v.0 == n + 1)
            .map(|v| v.1)
            .fold(f64::INFINITY, f64::min);
        hi >= lo
    });
    if tail_min > cutoff && tail_monotone {
        let used = values
            .iter()
            .filter(|v| v.1 <= cutoff)
            .map(|v| v.0)
            .max()
            .unwrap_or(0);
        Some(used.max(first_tail - 1))
    } else {
        None
    }
}

/// Biharmonic Steklov problem (`k = 2`) on the disk of radius `radius`.
pub fn biharmonic_steklov_disk(
    spec: &SteklovProblemSpec,
    radius: f64,
    n_eigs: usize,
) -> Result<Spectrum> {
    if spec.k != 2 {
        return Err(invalid("biharmonic_steklov_disk needs k = 2"));
    }
    sweep_disk(radius, ProblemKind::Steklov(spec.clone()), n_eigs)
}

/// Auxiliary problem `(ℓ, m)` on the disk: eigenvalues `η^{ℓ,m}`.
pub fn disk_auxiliary(radius: f64, ell: usize, m: usize, n_eigs: usize) -> Result<Spectrum> {
    sweep_disk(radius, ProblemKind::auxiliary(ell, m)?, n_eigs)
}

/// Polynomial `Σ c x^a y^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    pub terms: Vec<(u32, u32, f64)>,
}

impl Polynomial {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| c * math::powi(x, a as i32) * math::powi(y, b as i32))
            .sum()
    }

    /// `j`-th radial derivative at the point `R(cos θ, sin θ)` (origin-centred circle).
    fn radial_derivative(&self, j: usize, radius: f64, theta: f64) -> f64 {
        let (c, s) = (math::cos(theta), math::sin(theta));
        self.terms
            .iter()
            .map(|&(a, b, coef)| {
                let p = (a + b) as usize;
                if j > p {
                    return 0.0;
                }
                let falling: f64 = (0..j).map(|i| (p - i) as f64).product();
                coef * falling
                    * math::powi(radius, (p - j) as i32)
                    * math::powi(c, a as i32)
                    * math::powi(s, b as i32)
            })
            .sum()
    }
}

impl core::fmt::Display for Polynomial {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let mut first = true;
        for &(a, b, c) in &self.terms {
            if math::abs(c) < 1e-14 {
                continue;
            }
            if !first {
                f.write_str(if c < 0.0 { " - " } else { " + " })?;
            } else if c < 0.0 {
                f.write_str("-")?;
            }
            first = false;
            write!(f, "{:.6}", math::abs(c))?;
            match a {
                0 => {}
                1 => f.write_str("*x")?,
                _ => write!(f, "*x^{a}")?,
            }
            match b {
                0 => {}
                1 => f.write_str("*y")?,
                _ => write!(f, "*y^{b}")?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// Result of [`polynomial_kernel_check`].
#[derive(Debug, Clone)]
pub struct KernelReport {
    /// Orthonormal (in coefficient space) basis of polynomials on which the
    /// left-hand side form vanishes, with their residuals.
    pub kernel: Vec<(Polynomial, f64)>,
    /// `2 - |x|^2` evaluated for `k = 3, ℓ = 1`, reported for diagnosis only.
    pub reference_example: Option<(Polynomial, f64)>,
}

fn monomials(max_degree: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for d in 0..=max_degree as u32 {
        for a in (0..=d).rev() {
            out.push((a, d - a));
        }
    }
    out
}

/// Boundary part of the left-hand side form, `Σ_{j≠ℓ} β_j ∫_∂ (∂ʲ_ν u)²`,
/// for a polynomial `u`; the volume part vanishes for degree below `k`.
pub fn kernel_form_residual(
    poly: &Polynomial,
    k: usize,
    ell: usize,
    radius: f64,
    beta: &[f64],
) -> f64 {
    let samples = 64 * (k + 1);
    let dtheta = math::TAU / samples as f64;
    let mut volume_free = true;
    for &(a, b, _) in &poly.terms {
        volume_free &= ((a + b) as usize) < k;
    }
    debug_assert!(volume_free, "polynomial degree must stay below k");
    let mut total = 0.0;
    for j in (0..k).filter(|&j| j != ell) {
        let s: f64 = (0..samples)
            .map(|i| {
                let d = poly.radial_derivative(j, radius, i as f64 * dtheta);
                d * d
            })
            .sum();
        total += beta[j] * s * dtheta * radius;
    }
    total
}

/// Polynomials of degree `≤ k − 1` in the kernel of the left-hand side form of
/// the order-`k` problem on the disk of radius `radius` (these are exactly the
/// eigenfunctions for `σ^{(ℓ)} = 0` within that class).
pub fn polynomial_kernel_check(
    k: usize,
    ell: usize,
    radius: f64,
    beta: &[f64],
) -> Result<KernelReport> {
    if k == 0 || k > 4 {
        return Err(invalid("the kernel checker supports 1 ≤ k ≤ 4"));
    }
    let spec = SteklovProblemSpec::with_beta(k, ell, beta.to_vec())?;
    crate::DiskDomain::new(radius)?;
    let basis = monomials(k - 1);
    let d = basis.len();
    let mono = |i: usize, c: f64| Polynomial {
        terms: vec![(basis[i].0, basis[i].1, c)],
    };
    let mut gram = DMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            // polarization of the quadratic form
            let sum = Polynomial {
                terms: vec![(basis[i].0, basis[i].1, 1.0), (basis[j].0, basis[j].1, 1.0)],
            };
            let q = kernel_form_residual(&sum, k, ell, radius, spec.betas());
            let qi = kernel_form_residual(&mono(i, 1.0), k, ell, radius, spec.betas());
            let qj = kernel_form_residual(&mono(j, 1.0), k, ell, radius, spec.betas());
            let v = if i == j { qi } else { 0.5 * (q - qi - qj) };
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let (vals, vecs) = symmetric_eigen(&gram);
    let mut kernel = Vec::new();
    for (c, _) in vals
        .iter()
        .enumerate()
        .filter(|(_, v)| math::abs(**v) < 1e-10)
    {
        let col = vecs.column(c);
        // fix the sign by the first significant coefficient
        let lead = col
            .iter()
            .find(|v| math::abs(**v) > 1e-8)
            .copied()
            .unwrap_or(1.0);
        let s = if lead < 0.0 { -1.0 } else { 1.0 };
        let poly = Polynomial {
            terms: (0..d)
                .filter(|&i| math::abs(col[i]) > 1e-12)
                .map(|i| (basis[i].0, basis[i].1, s * col[i]))
                .collect(),
        };
        let residual = kernel_form_residual(&poly, k, ell, radius, spec.betas());
        if residual < 1e-10 {
            kernel.push((poly, residual));
        }
    }
    let reference_example = (k == 3 && ell == 1).then(|| {
        let poly = Polynomial {
            terms: vec![(0, 0, 2.0), (2, 0, -1.0), (0, 2, -1.0)],
        };
        let r = kernel_form_residual(&poly, k, ell, radius, spec.betas());
        (poly, r)
    });
    Ok(KernelReport {
        kernel,
        reference_example,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn laplace_blocks_are_closed_form() {
        for n in 0..6 {
            let f = mode_forms(1, n, 2.0).unwrap();
            let theta = if n == 0 { math::TAU } else { math::PI };
            // ∫|∇(ρⁿ cos nθ)|² = πn, independent of R
            assert_relative_eq!(
                f.volume[(0, 0)],
                math::PI * n as f64,
                max_relative = 1e-12,
                epsilon = 1e-14
            );
            assert_relative_eq!(f.boundary[0][(0, 0)], theta * 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn biharmonic_block_by_hand() {
        // f = ρ²−1 on the unit disk: D²u = 2I, ∫|D²u|² = 8π
        let f = mode_forms(2, 0, 1.0).unwrap();
        assert_relative_eq!(f.volume[(1, 1)], 8.0 * math::PI, max_relative = 1e-12);
        assert_relative_eq!(f.volume[(0, 0)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(f.trace_values[1][1], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn laplace_spectrum_unit_disk() {
        let s = laplace_steklov_disk(1.0, 3).unwrap();
        let expect = [0.0, 1.0, 1.0, 2.0, 2.0, 3.0, 3.0];
        assert_eq!(s.len(), 7);
        for (a, b) in s.eigenvalues.iter().zip(expect) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
        assert_eq!(s.groups.len(), 4);
        assert!(s.gram_deviation(7) < 1e-8);
        assert!(s.trace_gram_deviation(7) < 1e-8);
    }

    #[test]
    fn dirichlet_auxiliary_values() {
        let s = disk_auxiliary(1.0, 0, 1, 5).unwrap();
        for (a, b) in s.eigenvalues.iter().zip([1.0, 3.0, 3.0, 5.0, 5.0]) {
            assert_relative_eq!(*a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn kernel_checker_cases() {
        let r = polynomial_kernel_check(2, 0, 1.0, &[1.0, 1.0]).unwrap();
        assert_eq!(r.kernel.len(), 1);
        assert_eq!(r.kernel[0].0.terms.len(), 1);
        assert_eq!((r.kernel[0].0.terms[0].0, r.kernel[0].0.terms[0].1), (0, 0));
        assert!(polynomial_kernel_check(2, 1, 1.0, &[1.0, 1.0])
            .unwrap()
            .kernel
            .is_empty());
        let r = polynomial_kernel_check(3, 1, 2.0, &[1.0, 1.0, 1.0]).unwrap();
        let (_, res) = r.reference_example.unwrap();
        assert_relative_eq!(res, 32.0 * math::PI, max_relative = 1e-12);
    }

    #[test]
    fn polynomial_display() {
        let p = Polynomial {
            terms: vec![(0, 0, 2.0), (2, 0, -1.0), (0, 2, -1.0)],
        };
        assert_eq!(format!("{p}"), "2.000000 - 1.000000*x^2 - 1.000000*y^2");
    }
}
