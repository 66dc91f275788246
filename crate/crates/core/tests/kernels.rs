use std::sync::Arc;

use nonlocal_core::kernels::{
    check_condition_j, first_moment, truncate, FirstMoment, SamplingSpec, KNOWN_FAMILIES,
};
use nonlocal_core::{Dispersal, Error, Kernel, Kernel32, Kernel64};
use proptest::prelude::*;

/// Composite trapezoid of J(x)e^{-νx} on [-r, r].
fn trapezoid_moment(k: &Kernel<f64>, nu: f64, r: f64, n: usize) -> f64 {
    let h = 2.0 * r / n as f64;
    let f = |x: f64| k.density(x) * (-nu * x).exp();
    let mut s = 0.5 * (f(-r) + f(r));
    for i in 1..n {
        s += f(-r + i as f64 * h);
    }
    s * h
}

fn shipped() -> Vec<Kernel<f64>> {
    vec![
        Kernel64::truncated_gaussian(1.0, 3.0).unwrap(),
        Kernel64::laplace(2.0).unwrap(),
        Kernel64::mollified_interval(0.8, 0.02).unwrap(),
        Kernel64::two_sided_exponential(1.5, 3.0).unwrap(),
        Kernel64::fat_right_tail(3.0, 3.0).unwrap(),
        Kernel64::power_law(3.0).unwrap(),
    ]
}

#[test]
fn symmetric_bump_has_unit_moment_at_zero() {
    let k = Kernel64::truncated_gaussian(1.0, 3.0).unwrap();
    assert!((k.exp_moment(0.0) - 1.0).abs() < 1e-12);
}

#[test]
fn laplace_moment_matches_quadrature_oracle() {
    let k = Kernel64::laplace(2.0).unwrap();
    let oracle = trapezoid_moment(&k, 1.0, 40.0, 800_000);
    assert!((oracle - 4.0 / 3.0).abs() < 1e-8);
    assert!((k.exp_moment(1.0) - oracle).abs() < 1e-8);
    assert!(k.exp_moment(2.5).is_infinite());
}

#[test]
fn numeric_moments_of_compact_kernels_match_trapezoid() {
    let k = Kernel64::truncated_gaussian(1.0, 3.0).unwrap();
    for nu in [-2.0, -0.5, 0.7, 3.0] {
        let oracle = trapezoid_moment(&k, nu, 3.0, 600_000);
        assert!((k.exp_moment(nu) - oracle).abs() < 1e-9 * oracle, "nu={nu}");
    }
}

#[test]
fn divergent_tails_return_infinity() {
    let fat = Kernel64::fat_right_tail(3.0, 3.0).unwrap();
    assert!(fat.exp_moment(-0.1).is_infinite());
    assert!(fat.exp_moment(1.0).is_finite());
    let pl = Kernel64::power_law(3.0).unwrap();
    assert!(pl.exp_moment(0.05).is_infinite());
    assert!(pl.exp_moment(-0.05).is_infinite());
}

#[test]
fn truncation_examples() {
    let k = Kernel64::laplace(2.0).unwrap();
    let t = truncate(&k, 5).unwrap();
    assert_eq!(t.density(3.0), k.density(3.0));
    assert_eq!(t.density(12.0), 0.0);
    let v = t.density(7.0);
    assert!(v > 0.0 && v < k.density(7.0));
    assert_eq!(t.support_radius(), Some(10.0));
    assert!(matches!(truncate(&k, 0), Err(Error::InvalidArgument(_))));
}

#[test]
fn condition_report_cases() {
    let k = Kernel64::laplace(2.0).unwrap();
    let r = check_condition_j(&k, SamplingSpec::for_kernel(&k));
    assert!(r.pass && r.mass_deviation < 1e-8);

    let doubled = Kernel64::custom(
        "doubled",
        Arc::new(|x: f64| 2.0 * (-2.0 * x.abs()).exp()),
        None,
        vec![0.0],
        0.5,
    );
    let r = check_condition_j(&doubled, SamplingSpec::for_kernel(&doubled));
    assert!(!r.pass && (r.mass - 2.0).abs() < 1e-6);

    // unit mass but vanishing at the origin
    let hollow = Kernel64::custom(
        "hollow",
        Arc::new(|x: f64| 2.0 * x * x * (-2.0 * x.abs()).exp()),
        None,
        vec![0.0],
        0.5,
    );
    let r = check_condition_j(&hollow, SamplingSpec::for_kernel(&hollow));
    assert!(r.mass_deviation < 1e-8);
    assert!(!r.pass && r.j0 == 0.0);
}

#[test]
fn first_moment_cases() {
    let g = Kernel64::truncated_gaussian(1.0, 3.0).unwrap();
    assert!(first_moment(&g).value().unwrap().abs() < 1e-9);
    let l = Kernel64::laplace(2.0).unwrap();
    assert!(first_moment(&l).value().unwrap().abs() < 1e-9);
    // a symmetric mollifier leaves the mean of the indicator unchanged
    let i = Kernel64::mollified_interval(0.8, 0.02).unwrap();
    assert!((first_moment(&i).value().unwrap() - 0.3).abs() < 1e-8);
}

#[test]
fn first_moment_by_truncation_for_heavy_symmetric_tails() {
    // ∫|x|J diverges for tails (1+|x|)^{-1.8}; symmetric truncations have zero mean
    let k = Kernel64::custom(
        "heavy",
        Arc::new(|x: f64| 0.4 * (1.0 + x.abs()).powf(-1.8)),
        None,
        vec![0.0],
        1.0,
    );
    match first_moment(&k) {
        FirstMoment::TruncationLimit(v) => assert!(v.abs() < 1e-9),
        other => panic!("expected a truncation limit, got {other:?}"),
    }
}

#[test]
fn parse_round_trips_and_rejects_unknown_names() {
    let k = Kernel64::parse("laplace:beta=2").unwrap();
    assert_eq!(k.exp_moment(1.0), Kernel64::laplace(2.0).unwrap().exp_moment(1.0));
    let k = Kernel64::parse("interval a=0.8 mollify=0.02").unwrap();
    assert!((k.exp_moment(0.0) - 1.0).abs() < 1e-10);
    match Kernel64::parse("cauchy:gamma=1") {
        Err(Error::UnknownFamily { known, .. }) => {
            assert!(KNOWN_FAMILIES.iter().all(|f| known.contains(f)))
        }
        other => panic!("expected unknown family, got {other:?}"),
    }
    assert!(Kernel64::parse("laplace:gamma=1").is_err());
}

#[test]
fn single_precision_kernels_work() {
    let k = Kernel32::laplace(2.0).unwrap();
    assert!((k.exp_moment(1.0) - 4.0 / 3.0).abs() < 1e-6);
    let g = Kernel32::truncated_gaussian(1.0, 3.0).unwrap();
    assert!((g.exp_moment(0.0) - 1.0).abs() < 1e-5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn unit_mass_for_every_family(sigma in 0.3f64..3.0, beta in 0.5f64..4.0, a in 0.0f64..1.0,
                                  r1 in 0.5f64..4.0, r2 in 0.5f64..4.0, p in 2.2f64..5.0) {
        let ks = [
            Kernel64::truncated_gaussian(sigma, 3.0 * sigma).unwrap(),
            Kernel64::laplace(beta).unwrap(),
            Kernel64::mollified_interval(a, 0.05).unwrap(),
            Kernel64::two_sided_exponential(r1, r2).unwrap(),
            Kernel64::fat_right_tail(p, r1).unwrap(),
            Kernel64::power_law(p).unwrap(),
        ];
        for k in &ks {
            prop_assert!((k.exp_moment(0.0) - 1.0).abs() < 1e-8, "{}", k.label());
        }
    }

    #[test]
    fn moment_is_convex(idx in 0usize..6, a in -3.0f64..3.0, gap1 in 0.01f64..2.0, gap2 in 0.01f64..2.0) {
        let k = &shipped()[idx];
        let (n1, n3) = (a, a + gap1 + gap2);
        let n2 = a + gap1;
        let (m1, m2, m3) = (k.exp_moment(n1), k.exp_moment(n2), k.exp_moment(n3));
        if m1.is_finite() && m3.is_finite() {
            let w = gap1 / (gap1 + gap2);
            let chord = (1.0 - w) * m1 + w * m3;
            prop_assert!(m2 <= chord * (1.0 + 1e-10), "{} at {n2}: {m2} > {chord}", k.label());
        }
    }

    #[test]
    fn truncations_increase_to_the_kernel(idx in 0usize..6, x in -30.0f64..30.0, n in 1u32..20) {
        let k = &shipped()[idx];
        let a = truncate(k, n).unwrap().density(x);
        let b = truncate(k, n + 1).unwrap().density(x);
        prop_assert!(a <= b && b <= k.density(x));
    }

    #[test]
    fn truncated_moments_are_finite_and_smaller(idx in 0usize..6, nu in -3.0f64..3.0, n in 1u32..8) {
        let k = &shipped()[idx];
        let t = truncate(k, n).unwrap();
        let mt = t.exp_moment(nu);
        prop_assert!(mt.is_finite());
        let m = k.exp_moment(nu);
        prop_assert!(mt <= m * (1.0 + 1e-10) || m.is_infinite());
    }
}
