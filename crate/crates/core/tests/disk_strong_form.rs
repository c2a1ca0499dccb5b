#![allow(clippy::needless_range_loop)]

//! Disk spectra checked against the classical boundary conditions of the
//! biharmonic problems, solved independently for `u = (a ρⁿ + b ρⁿ⁺²) cos nθ`.

use steklov_core::disk_spectral::{biharmonic_steklov_disk, disk_auxiliary};
use steklov_core::SteklovProblemSpec;

/// Radial derivatives `f, f', f'', f'''` at `r = R` of `ρ^p`.
fn derivs(p: i32, r: f64) -> [f64; 4] {
    let p = p as f64;
    [
        1.0,
        p / r,
        p * (p - 1.0) / (r * r),
        p * (p - 1.0) * (p - 2.0) / (r * r * r),
    ]
}

/// `−div_∂(D²u·ν)_∂ − ∂_ν Δu` for the mode-`n` radial profile, as a
/// coefficient of `cos nθ`.
fn third_order_operator(f: [f64; 4], n: f64, r: f64) -> f64 {
    let tangential = n * n / r * (f[1] / r - f[0] / (r * r));
    let d_laplace = f[3] + f[2] / r - f[1] / (r * r) - n * n * f[1] / (r * r)
        + 2.0 * n * n * f[0] / (r * r * r);
    tangential - d_laplace
}

/// Solve the 2×2 strong-form problem: `row(f) · (a, b) = 0` fixes the
/// profile, `value(f)` then gives the eigenvalue.
fn strong_eigenvalue(
    n: usize,
    r: f64,
    row: impl Fn([f64; 4]) -> f64,
    value: impl Fn([f64; 4]) -> f64,
) -> f64 {
    let fa = derivs(n as i32, r);
    let fb = derivs(n as i32 + 2, r);
    let (ra, rb) = (row(fa), row(fb));
    // (a, b) ∝ (rb, −ra)
    let f: [f64; 4] = core::array::from_fn(|i| rb * fa[i] - ra * fb[i]);
    value(f)
}

fn sorted_modes(per_mode: impl Fn(usize) -> f64, count: usize) -> Vec<f64> {
    let mut v = vec![per_mode(0)];
    for n in 1..count {
        let s = per_mode(n);
        v.push(s);
        v.push(s);
    }
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn normal_trace_problem_matches_strong_form() {
    for (r, beta0) in [(1.0, 1.0), (1.5, 2.0)] {
        let spec = SteklovProblemSpec::with_beta(2, 1, vec![beta0, 1.0]).unwrap();
        let s = biharmonic_steklov_disk(&spec, r, 12).unwrap();
        // third-order condition with μ = −β0, then σ = f''/f'
        let expect = sorted_modes(
            |n| {
                let nf = n as f64;
                strong_eigenvalue(
                    n,
                    r,
                    |f| third_order_operator(f, nf, r) + beta0 * f[0],
                    |f| f[2] / f[1],
                )
            },
            12,
        );
        for j in 0..12 {
            let rel = (s.eigenvalues[j] - expect[j]).abs() / expect[j].abs().max(1.0);
            assert!(
                rel < 1e-8,
                "R={r} j={j}: {} vs {}",
                s.eigenvalues[j],
                expect[j]
            );
        }
    }
}

#[test]
fn value_trace_problem_matches_strong_form() {
    let (r, beta1) = (1.0, 1.0);
    let spec = SteklovProblemSpec::new(2, 0).unwrap();
    let s = biharmonic_steklov_disk(&spec, r, 12).unwrap();
    // f'' + β1 f' = 0, then σ f = third-order operator
    let expect = sorted_modes(
        |n| {
            let nf = n as f64;
            if n == 0 {
                return 0.0;
            }
            strong_eigenvalue(
                n,
                r,
                |f| f[2] + beta1 * f[1],
                |f| third_order_operator(f, nf, r) / f[0],
            )
        },
        12,
    );
    for j in 0..12 {
        assert!(
            (s.eigenvalues[j] - expect[j]).abs() < 1e-8 * expect[j].max(1.0),
            "j={j}: {} vs {}",
            s.eigenvalues[j],
            expect[j]
        );
    }
}

#[test]
fn neumann_auxiliary_matches_strong_form() {
    let r = 1.0;
    let s = disk_auxiliary(r, 1, 0, 10).unwrap();
    let expect = sorted_modes(
        |n| {
            if n == 0 {
                return 0.0;
            }
            strong_eigenvalue(
                n,
                r,
                |f| f[1],
                |f| third_order_operator(f, n as f64, r) / f[0],
            )
        },
        10,
    );
    for j in 0..10 {
        assert!(
            (s.eigenvalues[j] - expect[j]).abs() < 1e-8 * expect[j].max(1.0),
            "j={j}: {} vs {}",
            s.eigenvalues[j],
            expect[j]
        );
    }
}
