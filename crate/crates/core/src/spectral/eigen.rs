use crate::error::{Error, Result};
use crate::optimize::{minimize_convex, MinimizeOptions};
use crate::scalar::Scalar;

use super::banded::{BandedLu, BandedMatrix};
use super::operator::DiscreteOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenMethod {
    /// Shift-and-invert with the Collatz–Wielandt upper bound as shift.
    Noda,
    /// Power iteration on A + sI with s = |min diagonal| + 1.
    ShiftedPower,
}

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions<T> {
    /// Width of the Collatz–Wielandt bracket at which iteration stops.
    pub tol: T,
    pub max_iter: usize,
    pub method: EigenMethod,
    /// Conjugate by diag(e^{νx}) with ν minimizing the discrete symbol.
    pub balance: bool,
}

impl<T: Scalar> Default for EigenOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10),
            max_iter: 1_000_000,
            method: EigenMethod::Noda,
            balance: true,
        }
    }
}

/// Principal eigenvalue with a positive eigenvector on the full grid.
#[derive(Debug, Clone)]
pub struct EigenPair<T> {
    /// Midpoint of the final bracket.
    pub lambda: T,
    /// Collatz–Wielandt bracket: lower ≤ λ_p ≤ upper.
    pub lower: T,
    pub upper: T,
    /// Eigenvector on all grid nodes, sup-norm 1, zero at the pinned endpoint.
    pub phi: Vec<T>,
    /// log φ on the unknowns; finite even where `phi` underflows.
    pub log_phi: Vec<T>,
    /// sup |Aφ − λφ| with φ as stored.
    pub residual: T,
    pub iterations: usize,
    /// Exponent of the balancing similarity (0 when disabled).
    pub nu_balance: T,
}

/// Collatz–Wielandt bounds min/max of (Ax)_i/x_i for x > 0.
pub fn collatz_wielandt<T: Scalar>(a: &BandedMatrix<T>, x: &[T]) -> (T, T) {
    let ax = a.matvec(x);
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for (v, xi) in ax.iter().zip(x) {
        let r = *v / *xi;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

/// Collatz–Wielandt bounds for a probe given through its logarithm.
pub fn collatz_wielandt_log<T: Scalar>(a: &BandedMatrix<T>, log_x: &[T]) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for i in 0..a.n() {
        let r = a.row_range(i);
        let mut s = T::zero();
        for (v, lx) in a.row(i).iter().zip(&log_x[r]) {
            s += *v * (*lx - log_x[i]).exp();
        }
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (lo, hi)
}

/// Minimizer of the discrete symbol, used as balancing exponent.
pub fn symbol_minimizer<T: Scalar>(op: &DiscreteOperator<T>) -> T {
    let f = |nu: T| op.symbol(nu);
    let opts = MinimizeOptions {
        x_tol: T::lit(1e-8),
        ..Default::default()
    };
    match minimize_convex(&f, None, T::zero(), opts) {
        Ok(m) if m.x.is_finite() => m.x,
        _ => T::zero(),
    }
}

fn balanced<T: Scalar>(op: &DiscreteOperator<T>, nu: T) -> BandedMatrix<T> {
    let mut b = op.matrix.clone();
    if nu != T::zero() {
        let h = op.h;
        b.map_entries(|i, j, v| v * (nu * h * (T::from_usize_lossy(j) - T::from_usize_lossy(i))).exp());
    }
    b
}

struct Iterate<T> {
    x: Vec<T>,
    lo: T,
    hi: T,
    iterations: usize,
}

fn normalize<T: Scalar>(y: &mut [T]) -> bool {
    let m = y.iter().copied().fold(T::zero(), T::max);
    if !(m > T::zero()) || !m.is_finite() {
        return false;
    }
    for v in y.iter_mut() {
        *v /= m;
    }
    y.iter().all(|v| *v > T::zero())
}

fn shifted_lu<T: Scalar>(b: &BandedMatrix<T>, s: T) -> Option<BandedLu<T>> {
    let mut m = b.clone();
    m.map_entries(|i, j, v| if i == j { s - v } else { -v });
    m.lu().ok()
}

/// Contraction of the bracket width below which a factorization is kept.
const REUSE_RATIO: f64 = 0.25;

fn noda<T: Scalar>(b: &BandedMatrix<T>, opts: &EigenOptions<T>) -> Result<Iterate<T>> {
    let n = b.n();
    let mut x = vec![T::one(); n];
    let (mut lo, mut hi) = collatz_wielandt(b, &x);
    let max_iter = opts.max_iter.min(1000);
    // any shift above λ_p keeps (sI − B)^{-1} positive, so a factorization stays
    // usable while it still contracts the bracket fast enough
    let mut kept: Option<BandedLu<T>> = None;
    for it in 0..max_iter {
        if hi - lo <= opts.tol {
            return Ok(Iterate {
                x,
                lo,
                hi,
                iterations: it,
            });
        }
        let width = hi - lo;
        if let Some(lu) = &kept {
            let mut y = lu.solve(&x);
            if normalize(&mut y) {
                let (l2, h2) = collatz_wielandt(b, &y);
                if l2.is_finite() && h2.is_finite() {
                    x = y;
                    lo = lo.max(l2);
                    hi = hi.min(h2);
                    if hi - lo > width * T::lit(REUSE_RATIO) {
                        kept = None;
                    }
                    continue;
                }
            }
            kept = None;
        }
        let mut eta = (width * T::lit(1e-3)).max(T::lit(1e-13) * (T::one() + hi.abs()));
        let mut accepted = false;
        for _ in 0..8 {
            if let Some(lu) = shifted_lu(b, hi + eta) {
                let mut y = lu.solve(&x);
                if normalize(&mut y) {
                    let (l2, h2) = collatz_wielandt(b, &y);
                    if l2.is_finite() && h2.is_finite() {
                        x = y;
                        // the bracket of any positive vector is valid; keep the tighter ends
                        lo = lo.max(l2);
                        hi = hi.min(h2);
                        kept = Some(lu);
                        accepted = true;
                        break;
                    }
                }
            }
            eta = eta * T::lit(10.0);
        }
        if !accepted {
            return Err(Error::NoConvergence {
                iterations: it,
                detail: format!("shift-invert step lost positivity; bracket [{lo}, {hi}]"),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        detail: format!("bracket [{lo}, {hi}] wider than {}", opts.tol),
    })
}

fn shifted_power<T: Scalar>(b: &BandedMatrix<T>, opts: &EigenOptions<T>) -> Result<Iterate<T>> {
    let n = b.n();
    let dmin = b.diagonal().into_iter().fold(T::infinity(), T::min);
    let s = dmin.abs() + T::one();
    let mut x = vec![T::one(); n];
    let mut y = vec![T::zero(); n];
    let mut lo = T::neg_infinity();
    let mut hi = T::infinity();
    for it in 0..opts.max_iter {
        b.matvec_into(&x, &mut y);
        let mut l2 = T::infinity();
        let mut h2 = T::neg_infinity();
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi += s * *xi;
            let r = *yi / *xi - s;
            l2 = l2.min(r);
            h2 = h2.max(r);
        }
        lo = lo.max(l2);
        hi = hi.min(h2);
        if hi - lo <= opts.tol {
            return Ok(Iterate {
                x,
                lo,
                hi,
                iterations: it + 1,
            });
        }
        if !normalize(&mut y) {
            return Err(Error::NonFinite(format!("power iterate at step {it}")));
        }
        std::mem::swap(&mut x, &mut y);
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iter,
        detail: format!("bracket [{lo}, {hi}] wider than {}", opts.tol),
    })
}

/// Principal eigenvalue of the discrete operator with Collatz–Wielandt bounds.
pub fn principal_eigen<T: Scalar>(
    op: &DiscreteOperator<T>,
    opts: &EigenOptions<T>,
) -> Result<EigenPair<T>> {
    let nu = if opts.balance {
        symbol_minimizer(op)
    } else {
        T::zero()
    };
    let b = balanced(op, nu);
    let it = match opts.method {
        EigenMethod::Noda => noda(&b, opts)?,
        EigenMethod::ShiftedPower => shifted_power(&b, opts)?,
    };
    let xs = op.unknown_nodes();
    let mut log_phi: Vec<T> = it
        .x
        .iter()
        .zip(xs)
        .map(|(v, x)| v.ln() + nu * *x)
        .collect();
    let lmax = log_phi.iter().copied().fold(T::neg_infinity(), T::max);
    for v in log_phi.iter_mut() {
        *v -= lmax;
    }
    let inner: Vec<T> = log_phi.iter().map(|v| v.exp()).collect();
    let lambda = (it.lo + it.hi) * T::half();
    let ax = op.matrix.matvec(&inner);
    let residual = ax
        .iter()
        .zip(&inner)
        .map(|(a, p)| (*a - lambda * *p).abs())
        .fold(T::zero(), T::max);
    Ok(EigenPair {
        lambda,
        lower: it.lo,
        upper: it.hi,
        phi: op.extend(&inner),
        log_phi,
        residual,
        iterations: it.iterations,
        nu_balance: nu,
    })
}
