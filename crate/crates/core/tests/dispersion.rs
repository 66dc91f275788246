mod common;

use common::grid_scan_min;
use nonlocal_core::dispersion::{
    classify_c, lambda_infinity, lambda_infinity_full, nu_stability_check, spreading_speeds,
    thin_tail_flags, Sign, ZERO_TOL,
};
use nonlocal_core::{Dispersal, Error, Kernel64};
use proptest::prelude::*;

fn laplace() -> Kernel64 {
    Kernel64::laplace(2.0).unwrap()
}

#[test]
fn thin_tail_flags_by_family() {
    assert_eq!(thin_tail_flags(&laplace()), (true, true));
    let g = Kernel64::truncated_gaussian(1.0, 3.0).unwrap();
    assert_eq!(thin_tail_flags(&g), (true, true));
    let fat = Kernel64::fat_right_tail(3.0, 3.0).unwrap();
    assert_eq!(thin_tail_flags(&fat), (false, true));
    let pl = Kernel64::power_law(3.0).unwrap();
    assert_eq!(thin_tail_flags(&pl), (false, false));
}

#[test]
fn symmetric_kernel_limit_is_one_at_zero() {
    let g = Kernel64::truncated_gaussian(1.0, 3.0).unwrap();
    let r = lambda_infinity(&g, 0.0).unwrap();
    assert!((r.lambda_inf - 1.0).abs() < 1e-12);
    assert!(r.nu0.unwrap().abs() < 1e-10);
}

#[test]
fn laplace_with_drift_matches_fine_scan() {
    // analytic objective 4/(4−ν²) + 0.5ν on |ν| < 2, scanned at step 1e-6 near the optimum
    let g = |nu: f64| 4.0 / (4.0 - nu * nu) + 0.5 * nu;
    let coarse = grid_scan_min(g, -1.999, 1.999, 4000);
    let mut best = coarse;
    let mut nu = coarse.0 - 0.01;
    while nu <= coarse.0 + 0.01 {
        let v = g(nu);
        if v < best.1 {
            best = (nu, v);
        }
        nu += 1e-6;
    }
    let r = lambda_infinity(&laplace(), 0.5).unwrap();
    assert!((r.lambda_inf - best.1).abs() < 1e-11);
    assert!((r.nu0.unwrap() - best.0).abs() < 2e-6);
    assert!(!r.boundary_minimizer);
}

#[test]
fn example_interval_kernels_match_analytic_infimum() {
    let mut prev = f64::INFINITY;
    for a in [0.5, 0.6, 0.7, 0.8, 0.9] {
        let k = Kernel64::mollified_interval(a, 0.02).unwrap();
        let lam = lambda_infinity(&k, 0.0).unwrap().lambda_inf;
        let analytic = |nu: f64| {
            if nu.abs() < 1e-12 {
                1.0
            } else {
                (nu.exp() - 1.0) / nu * (-nu * a).exp()
            }
        };
        let (_, oracle) = grid_scan_min(analytic, -30.0, 30.0, 6000);
        assert!((lam - oracle).abs() < 5e-3, "a={a}: {lam} vs {oracle}");
        assert!(lam <= prev);
        prev = lam;
    }
}

#[test]
fn doubly_fat_kernel_reports_unit_limit() {
    let pl = Kernel64::power_law(3.0).unwrap();
    let r = lambda_infinity(&pl, 0.7).unwrap();
    assert_eq!(r.lambda_inf, 1.0);
    assert_eq!(r.nu0, Some(0.0));
    assert!(!r.thin_plus && !r.thin_minus);
}

#[test]
fn laplace_speeds_match_closed_form_scan() {
    let s = spreading_speeds(&laplace(), 1.0, 1.0).unwrap();
    let q = |nu: f64| 4.0 / (nu * (4.0 - nu * nu));
    let (nu, v) = grid_scan_min(q, 1e-3, 1.999, 4000);
    assert!((s.c_plus - v).abs() < 1e-10);
    assert!((s.c_minus + v).abs() < 1e-10);
    // stationarity of ν(4 − ν²) gives ν = 2/√3
    assert!((nu - 2.0 / 3f64.sqrt()).abs() < 1e-6);
    assert!((s.c_plus - 0.75 * 3f64.sqrt()).abs() < 1e-10);
}

#[test]
fn symmetric_speeds_are_opposite() {
    for (d, f0) in [(1.0, 1.0), (0.5, 2.0), (3.0, 0.2)] {
        let g = Kernel64::truncated_gaussian(1.0, 3.0).unwrap();
        let s = spreading_speeds(&g, d, f0).unwrap();
        assert!(s.c_plus > 0.0);
        assert!((s.c_plus + s.c_minus).abs() < 1e-9 * s.c_plus);
    }
}

#[test]
fn fat_right_tail_has_infinite_right_speed() {
    let fat = Kernel64::fat_right_tail(3.0, 3.0).unwrap();
    let s = spreading_speeds(&fat, 1.0, 1.0).unwrap();
    assert_eq!(s.c_plus, f64::INFINITY);
    assert!(s.c_minus.is_finite() && s.c_minus < 0.0);
}

#[test]
fn speed_arguments_validated() {
    assert!(matches!(spreading_speeds(&laplace(), 0.0, 1.0), Err(Error::InvalidArgument(_))));
    assert!(matches!(spreading_speeds(&laplace(), 1.0, -1.0), Err(Error::InvalidArgument(_))));
}

#[test]
fn speeds_are_ordered_for_thin_kernels() {
    let ks = [
        Kernel64::truncated_gaussian(1.0, 3.0).unwrap(),
        laplace(),
        Kernel64::mollified_interval(0.8, 0.02).unwrap(),
        Kernel64::two_sided_exponential(1.5, 3.0).unwrap(),
    ];
    for k in &ks {
        let s = spreading_speeds(k, 1.0, 1.0).unwrap();
        assert!(s.c_minus < s.c_plus, "{}", k.label());
    }
}

#[test]
fn sign_trichotomy() {
    let k = laplace();
    let s = spreading_speeds(&k, 1.0, 1.0).unwrap();
    let inside = classify_c(&k, 1.0, 1.0, 0.5 * s.c_plus, ZERO_TOL).unwrap();
    assert_eq!(inside.sign, Sign::Positive);
    let edge = classify_c(&k, 1.0, 1.0, s.c_plus, 1e-6).unwrap();
    assert_eq!(edge.sign, Sign::Zero, "value {}", edge.value);
    let left_edge = classify_c(&k, 1.0, 1.0, s.c_minus, 1e-6).unwrap();
    assert_eq!(left_edge.sign, Sign::Zero);
    let outside = classify_c(&k, 1.0, 1.0, s.c_plus + 1.0, ZERO_TOL).unwrap();
    assert_eq!(outside.sign, Sign::Negative);
}

#[test]
fn truncation_stability() {
    let k = laplace();
    let rows = nu_stability_check(&k, 0.0, &[2, 5, 10, 20]).unwrap();
    let last = rows.last().unwrap();
    assert!(last.nu_n.abs() < 1e-8 && (last.value - 1.0).abs() < 1e-8);

    let rows = nu_stability_check(&k, 0.5, &[1, 2, 5, 10, 20]).unwrap();
    for w in rows.windows(2) {
        assert!(w[1].value >= w[0].value - 1e-12);
        assert!(w[1].value_gap <= w[0].value_gap + 1e-12);
    }
    assert!(rows[4].value_gap < rows[0].value_gap);
    assert!(rows[4].value_gap < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_relation_matches_direct_minimization(d in 0.2f64..3.0, c in -2.0f64..2.0, f0 in 0.1f64..2.0) {
        let k = laplace();
        let direct = lambda_infinity_full(&k, d, f0, c).unwrap();
        let scaled = classify_c(&k, d, f0, c, ZERO_TOL).unwrap().value;
        prop_assert!((direct - scaled).abs() < 1e-10, "{direct} vs {scaled}");
    }

    #[test]
    fn infimum_lies_below_every_probe(c in -2.0f64..2.0, nu in -1.99f64..1.99) {
        let k = laplace();
        let r = lambda_infinity(&k, c).unwrap();
        prop_assert!(r.lambda_inf <= k.exp_moment(nu) + c * nu + 1e-12);
    }

    #[test]
    fn objective_is_convex(c in -2.0f64..2.0, a in -1.9f64..1.0, gap in 0.01f64..0.45) {
        let k = Kernel64::two_sided_exponential(1.5, 3.0).unwrap();
        let g = |nu: f64| k.exp_moment(nu) + c * nu;
        let (x1, x3) = (a, a + 2.0 * gap);
        let (g1, g2, g3) = (g(x1), g(a + gap), g(x3));
        if g1.is_finite() && g3.is_finite() {
            prop_assert!(g2 <= 0.5 * (g1 + g3) + 1e-12);
        }
    }
}
