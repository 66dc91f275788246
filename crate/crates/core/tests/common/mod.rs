//! Independent reference constructions shared by the integration tests.
#![allow(dead_code)]

use nalgebra::DMatrix;
use nonlocal_core::Dispersal;

/// Dense discrete operator built from scratch: normalized trapezoid weights,
/// half weights at the grid ends and upwind drift with the inflow node removed.
pub fn dense_operator(k: &dyn Dispersal<f64>, c: f64, l: f64, h: f64) -> DMatrix<f64> {
    let steps = (2.0 * l / h).round() as usize;
    let mass: f64 = {
        let mut s = h * k.density(0.0);
        let mut i = 1usize;
        loop {
            let x = i as f64 * h;
            let v = h * (k.density(x) + k.density(-x));
            s += v;
            if (v < 1e-18 * s && x > 10.0 * k.length_scale()) || i > 10_000_000 {
                break;
            }
            i += 1;
        }
        s
    };
    let g = |off: isize| h * k.density(off as f64 * h) / mass;
    let (lo, hi) = if c > 0.0 {
        (0, steps - 1)
    } else if c < 0.0 {
        (1, steps)
    } else {
        (0, steps)
    };
    let n = hi - lo + 1;
    let mut a = DMatrix::zeros(n, n);
    for r in 0..n {
        let i = r + lo;
        for s in 0..n {
            let j = s + lo;
            let w = if j == 0 || j == steps { 0.5 } else { 1.0 };
            a[(r, s)] = w * g(i as isize - j as isize);
        }
        if c > 0.0 {
            a[(r, r)] -= c / h;
            if r + 1 < n {
                a[(r, r + 1)] += c / h;
            }
        } else if c < 0.0 {
            a[(r, r)] += c / h;
            if r >= 1 {
                a[(r, r - 1)] -= c / h;
            }
        }
    }
    a
}

/// Largest real part over the spectrum.
pub fn max_real_eigenvalue(a: &DMatrix<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Minimum of f over a uniform grid on [lo, hi], refined three times around the best point.
pub fn grid_scan_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, points: usize) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut best = (f64::NAN, f64::INFINITY);
    for _ in 0..4 {
        let step = (b - a) / points as f64;
        for i in 0..=points {
            let x = a + step * i as f64;
            let v = f(x);
            if v < best.1 {
                best = (x, v);
            }
        }
        a = best.0 - 2.0 * step;
        b = best.0 + 2.0 * step;
    }
    best
}
