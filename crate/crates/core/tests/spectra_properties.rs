use std::sync::Arc;

use proptest::prelude::*;
use steklov_core::disk_spectral::{
    biharmonic_steklov_disk, disk_auxiliary, disk_discretization, laplace_steklov_disk, solve_disk,
};
use steklov_core::fem::{discretize, solve_steklov};
use steklov_core::geometry::{build_polygon_disk_mesh, build_rect_mesh};
use steklov_core::{ElementType, ProblemKind, Spectrum, SteklovProblemSpec};

fn check_pairs(s: &Spectrum) {
    for (j, r) in s.weak_residuals().iter().enumerate() {
        assert!(*r <= 1e-8, "{}: residual {r:e} at {j}", s.id);
    }
    for j in 0..s.len() {
        let q = s.rayleigh_quotient(j);
        let sigma = s.eigenvalues[j];
        assert!(
            (q - sigma).abs() <= 1e-8 * sigma.max(1.0),
            "{}: quotient {q} vs {sigma}",
            s.id
        );
    }
    assert!(s.gram_deviation(20) <= 1e-8, "{}", s.id);
    assert!(s.trace_gram_deviation(20) <= 1e-8, "{}", s.id);
}

#[test]
fn weak_equation_and_rayleigh_quotients() {
    let square_p1 = build_rect_mesh(1.0, 2.0, 5, 8, ElementType::P1Triangle)
        .unwrap()
        .0;
    let square_c1 = build_rect_mesh(1.0, 1.0, 5, 5, ElementType::C1Rectangle)
        .unwrap()
        .0;
    let disk = build_polygon_disk_mesh(1.0, 3).unwrap().0;
    let spectra = [
        laplace_steklov_disk(1.3, 12).unwrap(),
        biharmonic_steklov_disk(&SteklovProblemSpec::new(2, 0).unwrap(), 1.0, 20).unwrap(),
        biharmonic_steklov_disk(
            &SteklovProblemSpec::with_beta(2, 1, vec![3.0, 1.0]).unwrap(),
            0.7,
            20,
        )
        .unwrap(),
        disk_auxiliary(1.0, 1, 0, 20).unwrap(),
        solve_steklov(&SteklovProblemSpec::new(1, 0).unwrap(), &square_p1, 12).unwrap(),
        solve_steklov(&SteklovProblemSpec::new(1, 0).unwrap(), &disk, 12).unwrap(),
        solve_steklov(&SteklovProblemSpec::new(2, 0).unwrap(), &square_c1, 12).unwrap(),
        solve_steklov(
            &SteklovProblemSpec::with_beta(2, 1, vec![0.5, 1.0]).unwrap(),
            &square_c1,
            12,
        )
        .unwrap(),
        steklov_core::fem::solve_auxiliary(&square_c1, 0, 1, 12).unwrap(),
    ];
    for s in &spectra {
        check_pairs(s);
    }
}

#[test]
fn mode_completeness() {
    for problem in [
        ProblemKind::Steklov(SteklovProblemSpec::new(2, 1).unwrap()),
        ProblemKind::auxiliary(0, 1).unwrap(),
    ] {
        let small = solve_disk(
            Arc::new(disk_discretization(1.0, 2, 10, 64).unwrap()),
            problem.clone(),
        )
        .unwrap();
        let large = solve_disk(
            Arc::new(disk_discretization(1.0, 2, 15, 64).unwrap()),
            problem,
        )
        .unwrap();
        // below everything the added modes contribute, both lists coincide
        let cutoff = (0..large.len())
            .filter(|&j| large.mode_of(j).is_some_and(|(n, _)| n > 10))
            .map(|j| large.eigenvalues[j])
            .fold(f64::INFINITY, f64::min);
        let a: Vec<f64> = small
            .eigenvalues
            .iter()
            .copied()
            .filter(|v| *v < cutoff)
            .collect();
        let b: Vec<f64> = large
            .eigenvalues
            .iter()
            .copied()
            .filter(|v| *v < cutoff)
            .collect();
        assert!(a.len() > 10);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-10 * x.max(1.0), "{x} vs {y}");
        }
    }
}

#[test]
fn refinement_lowers_eigenvalues() {
    for (element, spec, sizes) in [
        (
            ElementType::P1Triangle,
            SteklovProblemSpec::new(1, 0).unwrap(),
            [2, 4, 8],
        ),
        (
            ElementType::C1Rectangle,
            SteklovProblemSpec::new(2, 1).unwrap(),
            [2, 4, 8],
        ),
        (
            ElementType::C1Rectangle,
            SteklovProblemSpec::new(2, 0).unwrap(),
            [2, 4, 8],
        ),
    ] {
        let spectra: Vec<Spectrum> = sizes
            .iter()
            .map(|&n| {
                solve_steklov(
                    &spec,
                    &build_rect_mesh(1.0, 1.0, n, n, element).unwrap().0,
                    6,
                )
                .unwrap()
            })
            .collect();
        for w in spectra.windows(2) {
            for (coarse, fine) in w[0].eigenvalues.iter().zip(&w[1].eigenvalues) {
                assert!(*fine <= coarse * (1.0 + 1e-10) + 1e-12, "{fine} > {coarse}");
            }
        }
    }
}

#[test]
fn assembly_is_cell_order_invariant() {
    for element in [ElementType::P1Triangle, ElementType::C1Rectangle] {
        let mesh = build_rect_mesh(1.0, 1.5, 3, 4, element).unwrap().0;
        let n = mesh.cells().len();
        let order: Vec<usize> = (0..n).map(|i| (7 * i + 3) % n).collect();
        assert!({
            let mut o = order.clone();
            o.sort();
            o == (0..n).collect::<Vec<_>>()
        });
        let shuffled = mesh.with_cell_order(&order).unwrap();
        let order_k = if element == ElementType::P1Triangle {
            1
        } else {
            2
        };
        let (a, b) = (
            discretize(&mesh, order_k).unwrap(),
            discretize(&shuffled, order_k).unwrap(),
        );
        let mats = |d: &steklov_core::Discretization| {
            let mut m = vec![d.volume.clone()];
            m.extend(d.boundary_mass.iter().cloned());
            m
        };
        for (x, y) in mats(&a).iter().zip(&mats(&b)) {
            for r in 0..x.rows() {
                for c in 0..x.cols() {
                    assert!((x.get(r, c) - y.get(r, c)).abs() <= 1e-14 * x.max_abs().max(1.0));
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn harmonic_disk_scales_as_inverse_radius(r in 0.1f64..10.0) {
        let unit = laplace_steklov_disk(1.0, 12).unwrap();
        let s = laplace_steklov_disk(r, 12).unwrap();
        for (a, b) in unit.eigenvalues.iter().zip(&s.eigenvalues) {
            prop_assert!((a / r - b).abs() <= 1e-12 * a.max(1.0) / r);
        }
    }

    #[test]
    fn larger_beta_never_lowers_eigenvalues(b0 in 0.05f64..4.0, factor in 1.0f64..5.0, disk in any::<bool>()) {
        let weak = SteklovProblemSpec::with_beta(2, 1, vec![b0, 1.0]).unwrap();
        let strong = SteklovProblemSpec::with_beta(2, 1, vec![b0 * factor, 1.0]).unwrap();
        let (a, b) = if disk {
            // the same modal space for both
            let disc = Arc::new(disk_discretization(1.0, 2, 12, 64).unwrap());
            (solve_disk(disc.clone(), ProblemKind::Steklov(weak)).unwrap(), solve_disk(disc, ProblemKind::Steklov(strong)).unwrap())
        } else {
            let mesh = build_rect_mesh(1.0, 1.0, 3, 3, ElementType::C1Rectangle).unwrap().0;
            (solve_steklov(&weak, &mesh, 8).unwrap(), solve_steklov(&strong, &mesh, 8).unwrap())
        };
        for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
            prop_assert!(*y >= x * (1.0 - 1e-10) - 1e-12, "{} < {}", y, x);
        }
    }
}
