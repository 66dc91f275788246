//! One-dimensional minimization of convex functions that may take the value +∞.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Result of a one-dimensional minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
    /// The minimizer sits at the edge of the finiteness interval.
    pub at_boundary: bool,
    pub evaluations: usize,
}

/// Options for [`minimize_convex`].
#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions<T> {
    /// Exclusive lower limit of the search domain.
    pub lower: Option<T>,
    /// Exclusive upper limit of the search domain.
    pub upper: Option<T>,
    pub x_tol: T,
    pub initial_step: T,
}

impl<T: Scalar> Default for MinimizeOptions<T> {
    fn default() -> Self {
        Self {
            lower: None,
            upper: None,
            x_tol: T::lit(1e-12),
            initial_step: T::one(),
        }
    }
}

struct Counted<'a, T> {
    f: &'a dyn Fn(T) -> T,
    n: usize,
}

impl<T: Scalar> Counted<'_, T> {
    fn eval(&mut self, x: T) -> T {
        self.n += 1;
        let v = (self.f)(x);
        if v.is_nan() {
            T::infinity()
        } else {
            v
        }
    }
}

/// Expands from `start` in direction `dir` until the objective stops decreasing.
fn expand<T: Scalar>(
    g: &mut Counted<'_, T>,
    start: T,
    f_start: T,
    dir: T,
    step: T,
    limit: Option<T>,
) -> Result<T> {
    let mut prev_val = f_start;
    let mut s = step;
    for _ in 0..200 {
        let mut x = start + dir * s;
        if let Some(lim) = limit {
            if (x - lim) * dir >= T::zero() {
                // land strictly inside the open domain
                x = lim;
                return Ok(x);
            }
        }
        let v = g.eval(x);
        if !v.is_finite() || v >= prev_val {
            return Ok(x);
        }
        prev_val = v;
        s = s + s;
    }
    Err(Error::NoConvergence {
        iterations: 200,
        detail: "objective decreases without bound".into(),
    })
}

/// Minimizes a convex (or quasi-convex) extended-real function.
///
/// `start` must have a finite value. The minimum is bracketed by doubling steps
/// from `start`, then located by golden-section search to `x_tol`. When `df` is
/// supplied and changes sign across the golden-section estimate, the location is
/// refined by bisection on its sign, which is exact to rounding where the
/// function itself is too flat to resolve.
pub fn minimize_convex<T: Scalar>(
    f: &dyn Fn(T) -> T,
    df: Option<&dyn Fn(T) -> T>,
    start: T,
    opts: MinimizeOptions<T>,
) -> Result<Minimum<T>> {
    let mut g = Counted { f, n: 0 };
    let f0 = g.eval(start);
    if !f0.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "objective not finite at start point {start}"
        )));
    }
    let mut hi = expand(&mut g, start, f0, T::one(), opts.initial_step, opts.upper)?;
    let mut lo = expand(&mut g, start, f0, -T::one(), opts.initial_step, opts.lower)?;

    let inv_phi = T::lit(0.618_033_988_749_894_9);
    let mut best = (start, f0);
    let eval_in = |g: &mut Counted<'_, T>, x: T, best: &mut (T, T)| {
        let v = g.eval(x);
        if v < best.1 {
            *best = (x, v);
        }
        v
    };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut v1 = eval_in(&mut g, x1, &mut best);
    let mut v2 = eval_in(&mut g, x2, &mut best);
    let mut iters = 0;
    while hi - lo > opts.x_tol * (T::one() + best.0.abs()) && iters < 400 {
        iters += 1;
        let go_left = if v1.is_infinite() && v2.is_infinite() {
            best.0 < x1
        } else {
            // ties move toward smaller x
            v1 <= v2
        };
        if go_left {
            hi = x2;
            x2 = x1;
            v2 = v1;
            x1 = hi - inv_phi * (hi - lo);
            v1 = eval_in(&mut g, x1, &mut best);
        } else {
            lo = x1;
            x1 = x2;
            v1 = v2;
            x2 = lo + inv_phi * (hi - lo);
            v2 = eval_in(&mut g, x2, &mut best);
        }
    }
    let (mut x, mut value) = best;

    if let Some(df) = df {
        let inside = |t: T| {
            opts.lower.is_none_or(|l| t > l) && opts.upper.is_none_or(|u| t < u)
        };
        // widen until the derivative changes sign across [a, b]
        let mut w = T::lit(1e-10) * (T::one() + x.abs());
        let (mut a, mut b) = (x - w, x + w);
        for _ in 0..40 {
            if !(inside(a) && inside(b)) {
                break;
            }
            let (da, db) = (df(a), df(b));
            if !(da.is_finite() && db.is_finite()) || (da < T::zero() && db > T::zero()) {
                break;
            }
            w = w + w;
            a = x - w;
            b = x + w;
        }
        if inside(a) && inside(b) {
            let (da, db) = (df(a), df(b));
            if da.is_finite() && db.is_finite() && da < T::zero() && db > T::zero() {
                for _ in 0..200 {
                    let m = (a + b) * T::half();
                    if m <= a || m >= b {
                        break;
                    }
                    if df(m) > T::zero() {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                let m = (a + b) * T::half();
                let vm = g.eval(m);
                if vm.is_finite() && vm <= value + T::lit(1e-14) * (T::one() + value.abs()) {
                    x = m;
                    value = vm;
                }
            }
        }
    }

    let probe = T::lit(1e-6) * (T::one() + x.abs());
    let at_boundary = [x - probe, x + probe].iter().any(|&p| {
        let outside = opts.lower.is_some_and(|l| p <= l) || opts.upper.is_some_and(|u| p >= u);
        outside || !g.eval(p).is_finite()
    });
    Ok(Minimum {
        x,
        value,
        at_boundary,
        evaluations: g.n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_minimum() {
        let f = |x: f64| (x - 0.3).powi(2) + 1.0;
        let m = minimize_convex(&f, None, 0.0, MinimizeOptions::default()).unwrap();
        assert!((m.x - 0.3).abs() < 1e-6);
        assert!(!m.at_boundary);
    }

    #[test]
    fn derivative_polish_reaches_rounding() {
        let f = |x: f64| (x - 0.3).powi(2) + 1.0;
        let df = |x: f64| 2.0 * (x - 0.3);
        let m = minimize_convex(&f, Some(&df), 0.0, MinimizeOptions::default()).unwrap();
        assert!((m.x - 0.3).abs() < 1e-14);
    }

    #[test]
    fn infinite_region_handled() {
        // finite only on (-inf, 2); minimum at 1.5
        let f = |x: f64| if x < 2.0 { (x - 1.5).powi(2) } else { f64::INFINITY };
        let m = minimize_convex(&f, None, -3.0, MinimizeOptions::default()).unwrap();
        assert!((m.x - 1.5).abs() < 1e-6);
    }

    #[test]
    fn boundary_minimum_flagged() {
        // decreasing up to the finiteness edge at 0
        let f = |x: f64| if x <= 0.0 { -x } else { f64::INFINITY };
        let m = minimize_convex(&f, None, -1.0, MinimizeOptions::default()).unwrap();
        assert!(m.x.abs() < 1e-9);
        assert!(m.at_boundary);
    }

    #[test]
    fn open_lower_limit() {
        let f = |x: f64| 1.0 / x + x;
        let opts = MinimizeOptions {
            lower: Some(0.0),
            ..Default::default()
        };
        let m = minimize_convex(&f, None, 0.5, opts).unwrap();
        assert!((m.x - 1.0).abs() < 1e-6);
    }

    #[test]
    fn rejects_infinite_start() {
        let f = |_x: f64| f64::INFINITY;
        assert!(minimize_convex(&f, None, 0.0, MinimizeOptions::default()).is_err());
    }
}
