//! The acceptance runs, shared by `steklov-trace reproduce` and the
//! `acceptance` test target. Each criterion returns pass/fail plus the
//! numbers it was judged on; failures are collected, not fail-fast.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use steklov_core::asymptotics::{harmonic_weyl_law, weyl_fit_values};
use steklov_core::besov::{gagliardo_seminorm, Limit};
use steklov_core::compatibility::{
    check_pair, disk_bases, route_residual, CompatibilityBases, Route, TracePair,
};
use steklov_core::disk_spectral::{biharmonic_steklov_disk, disk_auxiliary, laplace_steklov_disk};
use steklov_core::fem::{solve_auxiliary, solve_steklov};
use steklov_core::geometry::{build_disk, build_polygon_disk_mesh, build_rect_mesh};
use steklov_core::trace_spaces::{
    boundary_expand, classify_coefficients, classify_membership, extend, hadamard_value,
    weighted_norm, MembershipRules, TraceCoefficients, Verdict, WeightScheme,
};
use steklov_core::{BoundarySamples, ElementType, Mesh2D, Spectrum, SteklovProblemSpec};

pub const ANALYTIC_TOL: f64 = 1e-12;
pub const FEM_DISK_REL_TOL: f64 = 0.02;
pub const FEM_DISK_REFINEMENT: usize = 4;
pub const RUNTIME_LIMIT_SECS: f64 = 10.0;
pub const KERNEL_TOL: f64 = 1e-8;
pub const GRAM_TOL: f64 = 1e-8;
pub const GRAM_MODES: usize = 20;
pub const ROUND_TRIP_TOL: f64 = 1e-8;
pub const ROUND_TRIP_SAMPLES: usize = 100;
pub const ROUND_TRIP_MODES: usize = 10;
pub const WEYL_RANGE: (usize, usize) = (10, 200);
pub const HADAMARD_N: usize = 10_000;
pub const HADAMARD_EXPONENT: (f64, f64) = (0.5, 0.1);
pub const NORM_BAND: f64 = 20.0;
pub const NORM_MAX_MODE: usize = 20;
pub const COMPAT_MODES: usize = 256;
pub const COMPAT_RESIDUAL_TOL: f64 = 1e-6;
pub const AUX_TOL: f64 = 1e-6;
pub const AUX_MAX_MODE: usize = 10;

#[derive(Debug, Clone, Serialize)]
pub struct CriterionOutcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionOutcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {:>2} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

type Check = anyhow::Result<(bool, String)>;

fn outcome(id: usize, name: &'static str, run: fn() -> Check) -> CriterionOutcome {
    let start = Instant::now();
    let r = run();
    let secs = start.elapsed().as_secs_f64();
    log::info!("criterion {id} took {secs:.2} s");
    match r {
        Ok((passed, detail)) => CriterionOutcome {
            id,
            name,
            passed,
            detail,
            seconds: secs,
        },
        Err(e) => CriterionOutcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e:#}"),
            seconds: secs,
        },
    }
}

/// Run every criterion in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    let mut out = vec![
        outcome(1, "disk harmonic spectrum", disk_laplace),
        outcome(2, "biharmonic kernel facts", kernel_facts),
        outcome(3, "Hilbert-basis Gram matrices", gram_matrices),
        outcome(4, "extension round trip", extension_round_trip),
        outcome(5, "Weyl exponents", weyl_exponents),
        outcome(6, "Hadamard counterexample", hadamard),
        outcome(7, "norm equivalence with Gagliardo", norm_equivalence),
        outcome(8, "pair compatibility", compatibility),
        outcome(9, "auxiliary disk spectrum", auxiliary_disk),
    ];
    let covered: Vec<usize> = [3, 4, 7, 8]
        .into_iter()
        .filter(|id| out.iter().any(|o| o.id == *id && o.passed))
        .collect();
    out.push(CriterionOutcome {
        id: 10,
        name: "single-trace equalities (finite surrogates)",
        passed: covered.len() == 4,
        detail: format!("surrogate criteria passing: {covered:?} of [3, 4, 7, 8]"),
        seconds: 0.0,
    });
    out
}

fn harmonic_disk_exact(j: usize, radius: f64) -> f64 {
    j.div_ceil(2) as f64 / radius
}

pub fn disk_laplace() -> Check {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for radius in [1.0, 0.5, 2.0] {
        let s = laplace_steklov_disk(radius, 50)?;
        anyhow::ensure!(s.len() == 101, "expected 101 eigenvalues, got {}", s.len());
        for (j, v) in s.eigenvalues.iter().enumerate() {
            worst = worst.max((v - harmonic_disk_exact(j, radius)).abs());
        }
    }
    let spec = SteklovProblemSpec::new(1, 0)?;
    let (mesh, _) = build_polygon_disk_mesh(1.0, FEM_DISK_REFINEMENT)?;
    let fem = solve_steklov(&spec, &mesh, 7)?;
    let fem_err = fem
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, v)| {
            (v - harmonic_disk_exact(j, 1.0)).abs() / harmonic_disk_exact(j, 1.0).max(1.0)
        })
        .fold(0.0f64, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Ok((
        worst <= ANALYTIC_TOL && fem_err <= FEM_DISK_REL_TOL && secs < RUNTIME_LIMIT_SECS,
        format!("modal max |σ − n/R| = {worst:.2e} (n ≤ 50, R ∈ {{1, 0.5, 2}}); polygon-disk r = {FEM_DISK_REFINEMENT} first 7 max rel err = {fem_err:.4}; {secs:.2} s"),
    ))
}

fn unit_square_c1(n: usize) -> anyhow::Result<Mesh2D> {
    Ok(build_rect_mesh(1.0, 1.0, n, n, ElementType::C1Rectangle)?.0)
}

/// `(σ_1 / σ_2 before the zero clamp, spread of γ0 u_1 relative to its size, size of γ1 u_1, multiplicity of σ_1)`.
fn kernel_stats(s: &Spectrum) -> (f64, f64, f64, usize) {
    let t0 = &s.traces[0][0];
    let (lo, hi) = t0
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(*v), b.max(*v))
        });
    let scale = hi.abs().max(lo.abs());
    let t1 = s.traces[1][0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    (
        s.diagnostics.raw_eigenvalues[0].abs() / s.eigenvalues[1],
        (hi - lo) / scale,
        t1 / scale,
        s.groups[0].len(),
    )
}

pub fn kernel_facts() -> Check {
    let value = SteklovProblemSpec::new(2, 0)?;
    let normal = SteklovProblemSpec::new(2, 1)?;
    let square = unit_square_c1(8)?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s0, s1) in [
        (
            "disk",
            biharmonic_steklov_disk(&value, 1.0, 8)?,
            biharmonic_steklov_disk(&normal, 1.0, 8)?,
        ),
        (
            "square",
            solve_steklov(&value, &square, 8)?,
            solve_steklov(&normal, &square, 8)?,
        ),
    ] {
        let (ratio, spread, slope, mult) = kernel_stats(&s0);
        let pass = ratio <= KERNEL_TOL
            && spread <= KERNEL_TOL
            && slope <= KERNEL_TOL
            && mult == 1
            && s1.eigenvalues[0] > 0.0;
        ok &= pass;
        parts.push(format!(
            "{name}: σ1/σ2 = {ratio:.1e}, γ0 u1 spread {spread:.1e}, |γ1 u1| {slope:.1e}, multiplicity {mult}, ℓ=1 σ1 = {:.4}",
            s1.eigenvalues[0]
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn square_spectra(n: usize, count: usize) -> anyhow::Result<Vec<(String, Spectrum)>> {
    let p1 = build_rect_mesh(1.0, 1.0, n, n, ElementType::P1Triangle)?.0;
    let c1 = unit_square_c1(n / 2)?;
    Ok(vec![
        (
            "square k=1".into(),
            solve_steklov(&SteklovProblemSpec::new(1, 0)?, &p1, count)?,
        ),
        (
            "square k=2 ℓ=0".into(),
            solve_steklov(&SteklovProblemSpec::new(2, 0)?, &c1, count)?,
        ),
        (
            "square k=2 ℓ=1".into(),
            solve_steklov(&SteklovProblemSpec::new(2, 1)?, &c1, count)?,
        ),
        (
            "square aux (0,1)".into(),
            solve_auxiliary(&c1, 0, 1, count)?,
        ),
        (
            "square aux (1,0)".into(),
            solve_auxiliary(&c1, 1, 0, count)?,
        ),
    ])
}

fn disk_spectra(count: usize) -> anyhow::Result<Vec<(String, Spectrum)>> {
    Ok(vec![
        ("disk k=1".into(), laplace_steklov_disk(1.0, count)?),
        (
            "disk k=2 ℓ=0".into(),
            biharmonic_steklov_disk(&SteklovProblemSpec::new(2, 0)?, 1.0, count)?,
        ),
        (
            "disk k=2 ℓ=1".into(),
            biharmonic_steklov_disk(&SteklovProblemSpec::new(2, 1)?, 1.0, count)?,
        ),
        ("disk aux (0,1)".into(), disk_auxiliary(1.0, 0, 1, count)?),
        ("disk aux (1,0)".into(), disk_auxiliary(1.0, 1, 0, count)?),
    ])
}

pub fn gram_matrices() -> Check {
    let mut all = disk_spectra(GRAM_MODES)?;
    all.extend(square_spectra(16, GRAM_MODES)?);
    let mut worst: f64 = 0.0;
    let mut which = String::new();
    for (name, s) in &all {
        anyhow::ensure!(s.len() >= GRAM_MODES, "{name}: only {} eigenpairs", s.len());
        let d = s.trace_gram_deviation(GRAM_MODES);
        if d >= worst {
            worst = d;
            which = name.clone();
        }
    }
    Ok((
        worst <= GRAM_TOL,
        format!(
            "max |G − I| over {} bases, first {GRAM_MODES} modes = {worst:.2e} ({which})",
            all.len()
        ),
    ))
}

pub fn extension_round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_601);
    let mut bases = disk_spectra(ROUND_TRIP_MODES)?;
    bases.truncate(3);
    bases.extend(square_spectra(12, ROUND_TRIP_MODES)?.into_iter().take(3));
    let mut worst: f64 = 0.0;
    for (_, s) in &bases {
        let ell = s.problem.rhs_trace();
        for _ in 0..ROUND_TRIP_SAMPLES {
            let coeffs: Vec<f64> = (0..ROUND_TRIP_MODES)
                .map(|_| rng.gen_range(-1.0..1.0))
                .collect();
            let c = TraceCoefficients::new(s, coeffs.clone())?;
            let u = extend(&c, s)?;
            let g = BoundarySamples::new(s.boundary(), s.discretization.trace(ell, &u))?;
            let back = boundary_expand(&g, s, ROUND_TRIP_MODES)?;
            for (a, b) in coeffs.iter().zip(&back.coeffs) {
                worst = worst.max((a - b).abs());
            }
        }
    }
    Ok((
        worst <= ROUND_TRIP_TOL,
        format!("{ROUND_TRIP_SAMPLES} random vectors × {} bases (disk and square; k=1, k=2 ℓ=0,1): max error {worst:.2e}", bases.len()),
    ))
}

pub fn weyl_exponents() -> Check {
    let (j0, j1) = WEYL_RANGE;
    let h = laplace_steklov_disk(1.0, j1 / 2)?;
    let k1 = weyl_fit_values(&h.eigenvalues, h.boundary().total_length, j0, j1)?;
    let v = biharmonic_steklov_disk(&SteklovProblemSpec::new(2, 0)?, 1.0, j1)?;
    let n = biharmonic_steklov_disk(&SteklovProblemSpec::new(2, 1)?, 1.0, j1)?;
    let fv = weyl_fit_values(&v.eigenvalues, v.boundary().total_length, j0, j1)?;
    let fn_ = weyl_fit_values(&n.eigenvalues, n.boundary().total_length, j0, j1)?;
    let law = harmonic_weyl_law(1.0, 2.0 * std::f64::consts::PI);
    let ok = (k1.exponent - 1.0).abs() <= 0.05
        && (fv.exponent - 3.0).abs() <= 0.3
        && (fn_.exponent - 1.0).abs() <= 0.1
        && (k1.constant / law - 1.0).abs() <= 0.1;
    Ok((
        ok,
        format!(
            "j = {j0}..{j1}: k=1 e = {:.4}, C = {:.4} (law {law:.4}); k=2 ℓ=0 e = {:.4} (C = {:.4}); k=2 ℓ=1 e = {:.4} (C = {:.4})",
            k1.exponent, k1.constant, fv.exponent, fv.constant, fn_.exponent, fn_.constant
        ),
    ))
}

/// Coefficient `j` (1-based) of Hadamard's function in the unit-disk harmonic
/// basis and the eigenvalue it pairs with: cosine modes carry `n^{-3/4}`.
fn hadamard_term(j: usize) -> (f64, f64) {
    let n = j / 2;
    let g = if j >= 2 && j.is_multiple_of(2) {
        hadamard_value(n)
    } else {
        0.0
    };
    (g, n as f64)
}

pub fn hadamard() -> Check {
    let rules = MembershipRules::default();
    let n = 2 * HADAMARD_N + 1;
    let l2 = classify_membership(
        |j| hadamard_term(j).0,
        |j| hadamard_term(j).1,
        WeightScheme::HsA(0.0),
        n,
        rules,
    )?;
    let h12 = classify_membership(
        |j| hadamard_term(j).0,
        |j| hadamard_term(j).1,
        WeightScheme::HsA(0.5),
        n,
        rules,
    )?;
    let e = h12.growth_exponent().unwrap_or(f64::NAN);
    // the same test on a computed basis, at a size the dense traces allow
    let s = laplace_steklov_disk(1.0, 512)?;
    let c = steklov_core::trace_spaces::hadamard_coefficients(512, &s)?;
    let small = classify_coefficients(&c, &s, WeightScheme::HsA(0.5), rules)?;
    let small_l2 = classify_coefficients(&c, &s, WeightScheme::HsA(0.0), rules)?;
    let ok = l2.verdict == Verdict::In
        && h12.verdict == Verdict::Out
        && (e - HADAMARD_EXPONENT.0).abs() <= HADAMARD_EXPONENT.1
        && small.verdict == Verdict::Out
        && small_l2.verdict == Verdict::In;
    Ok((
        ok,
        format!(
            "N = {HADAMARD_N}: L² {} (tail {:.3e}), H^1/2_A {} with exponent {e:.3}; computed basis N = 512: L² {}, H^1/2_A {} ({:.3})",
            l2.verdict.as_str(),
            l2.tail,
            h12.verdict.as_str(),
            small_l2.verdict.as_str(),
            small.verdict.as_str(),
            small.growth_exponent().unwrap_or(f64::NAN)
        ),
    ))
}

pub fn norm_equivalence() -> Check {
    let s = laplace_steklov_disk(1.0, 64)?;
    let params: Vec<_> = [256, 512, 1024]
        .iter()
        .map(|&n| build_disk(1.0, n).map(|d| d.1))
        .collect::<Result<_, _>>()?;
    let mut ratios = Vec::new();
    for n in 0..=NORM_MAX_MODE {
        for sine in [false, true] {
            if n == 0 && sine {
                continue;
            }
            let f = move |th: f64| {
                if sine {
                    (n as f64 * th).sin()
                } else {
                    (n as f64 * th).cos()
                }
            };
            let g = BoundarySamples::from_fn(s.boundary(), |nd| f(nd.s));
            let c = boundary_expand(&g, &s, s.len())?;
            let hs = weighted_norm(&c, &s, WeightScheme::HsA(0.5))?;
            let gag = gagliardo_seminorm(&params, |nd| f(nd.s), 0.5, 2.0)?;
            let semi = match gag.limit {
                Limit::Finite(v) => v,
                other => anyhow::bail!("Gagliardo integral of mode {n} classified {other:?}"),
            };
            let l2 = g.l2_norm(s.boundary());
            ratios.push(hs / (l2 * l2 + semi).sqrt());
        }
    }
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    // a step function on both sides
    let step = |th: f64| if th < std::f64::consts::PI { 1.0 } else { 0.0 };
    let big = laplace_steklov_disk(1.0, 512)?;
    let g = BoundarySamples::from_fn(big.boundary(), |nd| step(nd.s));
    let c = boundary_expand(&g, &big, big.len())?;
    let spectral =
        classify_coefficients(&c, &big, WeightScheme::HsA(0.5), MembershipRules::default())?;
    let steps: Vec<_> = [64, 128, 256, 512, 1024]
        .iter()
        .map(|&n| build_disk(1.0, n).map(|d| d.1))
        .collect::<Result<_, _>>()?;
    let gag = gagliardo_seminorm(&steps, |nd| step(nd.s), 0.5, 2.0)?;
    let ok = hi / lo <= NORM_BAND && spectral.verdict == Verdict::Out && gag.is_divergent();
    Ok((
        ok,
        format!(
            "‖·‖_HsA(1/2) / ‖·‖_W^(1/2,2) over {} trig modes in [{lo:.4}, {hi:.4}], band {:.3}; step: spectral {}, Gagliardo {:?}",
            ratios.len(),
            hi / lo,
            spectral.verdict.as_str(),
            gag.limit
        ),
    ))
}

/// `Σ_{n=1}^{N} a n^{-p} trig(n θ + φ)` sampled on the circle of radius `radius`.
fn rough_series(
    samples: &BoundarySamples,
    param: &steklov_core::BoundaryParam,
    radius: f64,
    p: f64,
    phase: f64,
    n_max: usize,
) -> BoundarySamples {
    let mut out = samples.clone();
    for (v, nd) in out.values.iter_mut().zip(&param.nodes) {
        let th = nd.s / radius;
        *v += (1..=n_max)
            .map(|n| (n as f64).powf(-p) * (n as f64 * th + phase).cos())
            .sum::<f64>();
    }
    out
}

pub fn compatibility() -> Check {
    let bases = disk_bases(1.0, COMPAT_MODES)?;
    let b = CompatibilityBases::from_array(&bases);
    let (value, normal) = (&bases[0], &bases[1]);
    let rules = MembershipRules::default();
    let param = value.boundary();
    let disc = &value.discretization;

    let mut smooth = vec![TracePair::zeros(param)];
    // each eigenfunction pair has zero residual along the route of its own basis
    let mut matched: f64 = 0.0;
    for j in 0..10 {
        for (s, route) in [
            (value, Route::ValueExtension),
            (normal, Route::NormalExtension),
        ] {
            let pair = TracePair::of_field(disc, &s.eigenvectors[j])?;
            matched = matched.max(route_residual(&pair, &b, route)?.l2_norm(param));
            smooth.push(pair);
        }
    }
    let mut passed = 0;
    let mut contradictions = 0;
    for pair in &smooth {
        let r = check_pair(pair, &b, rules)?;
        passed += usize::from(
            r.verdict == Verdict::In && r.routes.iter().all(|x| x.verdict.verdict == Verdict::In),
        );
        contradictions += usize::from(!r.consistent);
    }

    let zero = BoundarySamples::zeros(param);
    let n = COMPAT_MODES - 8;
    let rough = [
        (zero.clone(), rough_series(&zero, param, 1.0, 0.6, 0.0, n)),
        (zero.clone(), rough_series(&zero, param, 1.0, 0.7, 0.3, n)),
        (rough_series(&zero, param, 1.0, 1.2, 0.0, n), zero.clone()),
        (
            rough_series(&zero, param, 1.0, 1.3, 1.1, n),
            rough_series(&zero, param, 1.0, 2.5, 0.0, n),
        ),
        (
            rough_series(&zero, param, 1.0, 3.0, 0.0, n),
            rough_series(&zero, param, 1.0, 0.65, 0.7, n),
        ),
    ];
    let mut failed = 0;
    for (g0, g1) in rough {
        let r = check_pair(&TracePair { g0, g1 }, &b, rules)?;
        failed += usize::from(r.verdict == Verdict::Out);
        contradictions += usize::from(!r.consistent);
    }
    Ok((
        passed == smooth.len() && failed == 5 && contradictions == 0 && matched <= COMPAT_RESIDUAL_TOL,
        format!(
            "smooth pairs accepted {passed}/{}; matched-route residual ≤ {matched:.2e}; rough pairs rejected {failed}/5; route contradictions {contradictions}",
            smooth.len()
        ),
    ))
}

pub fn auxiliary_disk() -> Check {
    let s = disk_auxiliary(1.0, 0, 1, 2 * AUX_MAX_MODE + 1)?;
    let mut worst: f64 = 0.0;
    let mut seen = 0;
    for j in 0..s.len() {
        if let Some((n, _)) = s.mode_of(j) {
            if n <= AUX_MAX_MODE {
                worst = worst.max((s.eigenvalues[j] - (2 * n + 1) as f64).abs());
                seen += 1;
            }
        }
    }
    Ok((
        worst <= AUX_TOL && seen == 2 * AUX_MAX_MODE + 1,
        format!("{seen} eigenvalues with n ≤ {AUX_MAX_MODE}: max |η − (2n + 1)| = {worst:.2e}"),
    ))
}
