use proptest::prelude::*;
use steklov_core::besov::{besov_diff_seminorm, gagliardo_seminorm, gagliardo_sum, Limit};
use steklov_core::compatibility::{
    check_pair, disk_bases, route_residual, CompatibilityBases, Route, TracePair,
};
use steklov_core::disk_spectral::laplace_steklov_disk;
use steklov_core::geometry::build_disk;
use steklov_core::trace_spaces::{
    boundary_expand, boundary_synthesize, classify_coefficients, weighted_norm, MembershipRules,
    TraceCoefficients, Verdict, WeightScheme,
};
use steklov_core::{BoundarySamples, Spectrum};

fn harmonic() -> Spectrum {
    laplace_steklov_disk(1.0, 16).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn bessel_inequality(values in prop::collection::vec(-1.0f64..1.0, 72)) {
        let s = harmonic();
        prop_assume!(s.boundary().len() == values.len());
        let g = BoundarySamples::new(s.boundary(), values).unwrap();
        let c = boundary_expand(&g, &s, 12).unwrap();
        let sum: f64 = c.coeffs.iter().map(|x| x * x).sum();
        let norm = g.l2_norm(s.boundary());
        prop_assert!(sum <= norm * norm * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn parseval_in_the_span(coeffs in prop::collection::vec(-1.0f64..1.0, 20)) {
        let s = harmonic();
        let c = TraceCoefficients::new(&s, coeffs.clone()).unwrap();
        let g = boundary_synthesize(&c, &s).unwrap();
        let back = boundary_expand(&g, &s, 20).unwrap();
        let norm = g.l2_norm(s.boundary());
        let sum: f64 = coeffs.iter().map(|x| x * x).sum();
        prop_assert!((sum - norm * norm).abs() <= 1e-8 * sum.max(1.0));
        for (a, b) in coeffs.iter().zip(&back.coeffs) {
            prop_assert!((a - b).abs() <= 1e-8);
        }
    }

    #[test]
    fn weights_are_monotone(coeffs in prop::collection::vec(-1.0f64..1.0, 30), s1 in 0.0f64..2.0, ds in 0.0f64..2.0) {
        let s = harmonic();
        let c = TraceCoefficients::new(&s, coeffs).unwrap();
        let a = weighted_norm(&c, &s, WeightScheme::HsA(s1)).unwrap();
        let b = weighted_norm(&c, &s, WeightScheme::HsA(s1 + ds)).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-14));
    }

    #[test]
    fn gagliardo_scales_and_ignores_orientation(c in -5.0f64..5.0, n in 1usize..8) {
        let (_, param) = build_disk(1.0, 96).unwrap();
        let g: Vec<f64> = param.nodes.iter().map(|nd| (n as f64 * nd.s).cos() + 0.3 * nd.point.x * nd.point.x).collect();
        let scaled: Vec<f64> = g.iter().map(|v| c * v).collect();
        let reversed: Vec<f64> = (0..g.len()).map(|i| g[(g.len() - i) % g.len()]).collect();
        for p in [2.0, 3.0] {
            let base = gagliardo_sum(&param, &g, 0.5, p).unwrap();
            let sc = gagliardo_sum(&param, &scaled, 0.5, p).unwrap();
            prop_assert!((sc - c.abs().powf(p) * base).abs() <= 1e-12 * sc.abs().max(1.0));
            let rev = gagliardo_sum(&param, &reversed, 0.5, p).unwrap();
            prop_assert!((rev - base).abs() <= 1e-12 * base.max(1.0));
        }
    }
}

#[test]
fn oracles_agree_on_trig_family() {
    let params: Vec<_> = [64, 128, 256]
        .iter()
        .map(|&n| build_disk(1.0, n).unwrap().1)
        .collect();
    for n in 0..=20usize {
        for sine in [false, true] {
            let f = move |t: f64| {
                if sine {
                    (n as f64 * t).sin()
                } else {
                    (n as f64 * t).cos()
                }
            };
            let g = gagliardo_seminorm(&params, |nd| f(nd.s), 0.5, 2.0).unwrap();
            let b = besov_diff_seminorm(f, std::f64::consts::TAU, 0.5, 2.0, 1, &[64, 128, 256])
                .unwrap();
            assert!(
                matches!(g.limit, Limit::Finite(_)) && matches!(b.limit, Limit::Finite(_)),
                "{n} {sine}: {g:?} {b:?}"
            );
        }
    }
}

#[test]
fn residual_is_linear_in_the_pair() {
    let bases = disk_bases(1.0, 24).unwrap();
    let b = CompatibilityBases::from_array(&bases);
    let param = bases[0].boundary();
    let p1 = TracePair::new(
        param,
        param.nodes.iter().map(|n| n.point.x.powi(3)).collect(),
        param.nodes.iter().map(|n| n.point.y).collect(),
    )
    .unwrap();
    let p2 = TracePair::new(
        param,
        param.nodes.iter().map(|n| (3.0 * n.s).sin()).collect(),
        param.nodes.iter().map(|n| n.s.cos()).collect(),
    )
    .unwrap();
    let sum = p1.scaled_sum(2.0, &p2, -0.5);
    for route in [Route::ValueExtension, Route::NormalExtension] {
        let (r1, r2, rs) = (
            route_residual(&p1, &b, route).unwrap(),
            route_residual(&p2, &b, route).unwrap(),
            route_residual(&sum, &b, route).unwrap(),
        );
        for i in 0..rs.values.len() {
            assert!((rs.values[i] - (2.0 * r1.values[i] - 0.5 * r2.values[i])).abs() <= 1e-10);
        }
    }
}

#[test]
fn fast_decaying_random_pairs_are_compatible() {
    use rand::{Rng, SeedableRng};
    let bases = disk_bases(1.0, 96).unwrap();
    let b = CompatibilityBases::from_array(&bases);
    let param = bases[0].boundary();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let a: Vec<(f64, f64, f64, f64)> = (1..=40)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )
            })
            .collect();
        let series = |which: usize| -> Vec<f64> {
            param
                .nodes
                .iter()
                .map(|nd| {
                    a.iter()
                        .enumerate()
                        .map(|(k, c)| {
                            let n = (k + 1) as f64;
                            let (x, y) = if which == 0 { (c.0, c.1) } else { (c.2, c.3) };
                            (x * (n * nd.s).cos() + y * (n * nd.s).sin()) * n.powi(-5)
                        })
                        .sum()
                })
                .collect()
        };
        let pair = TracePair::new(param, series(0), series(1)).unwrap();
        let r = check_pair(&pair, &b, MembershipRules::default()).unwrap();
        assert_eq!(
            r.verdict,
            Verdict::In,
            "{}",
            steklov_core::compatibility::summarize(&r)
        );
    }
}

#[test]
fn traces_of_fields_have_both_single_memberships() {
    let bases = disk_bases(1.0, 48).unwrap();
    let b = CompatibilityBases::from_array(&bases);
    let disc = &bases[0].discretization;
    for j in [0, 3, 7, 15] {
        let u: Vec<f64> = bases[0].eigenvectors[j]
            .iter()
            .zip(&bases[1].eigenvectors[j])
            .map(|(x, y)| x - 2.0 * y)
            .collect();
        let pair = TracePair::of_field(disc, &u).unwrap();
        let r = check_pair(&pair, &b, MembershipRules::default()).unwrap();
        assert!(r.single.iter().all(|m| m.verdict == Verdict::In));
        assert!(r.routes.iter().all(|m| m.verdict.verdict == Verdict::In));
        let c0 = boundary_expand(&pair.g0, &bases[0], bases[0].len()).unwrap();
        assert_eq!(
            classify_coefficients(
                &c0,
                &bases[0],
                WeightScheme::HkA,
                MembershipRules::default()
            )
            .unwrap()
            .verdict,
            Verdict::In
        );
    }
}
