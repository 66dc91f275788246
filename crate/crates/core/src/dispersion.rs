//! The limit value λ∞^c, spreading speeds and the sign of the principal
//! eigenvalue at infinity.

use crate::error::{invalid, Result};
use crate::kernels::{truncate, Dispersal};
use crate::optimize::{minimize_convex, MinimizeOptions};
use crate::scalar::Scalar;

/// Default threshold below which [`classify_c`] reports zero.
pub const ZERO_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionResult<T> {
    /// inf_ν [∫J(x)e^{-νx}dx + cν].
    pub lambda_inf: T,
    /// Minimizer; `None` never occurs for kernels satisfying the mass condition,
    /// it is kept for callers that post-process truncated searches.
    pub nu0: Option<T>,
    pub c: T,
    pub thin_plus: bool,
    pub thin_minus: bool,
    /// The infimum sits on the edge of the finiteness interval of the moment.
    pub boundary_minimizer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedPair<T> {
    /// Leftward speed; -∞ without a thin left tail.
    pub c_minus: T,
    /// Rightward speed; +∞ without a thin right tail.
    pub c_plus: T,
    pub d: T,
    pub f0: T,
    /// Minimizing exponents of the two speed quotients, when finite.
    pub nu_plus: Option<T>,
    pub nu_minus: Option<T>,
}

/// Probe exponents for the thin-tail flags: 4, 2, 1, ..., 2^-20.
fn ladder<T: Scalar>() -> impl Iterator<Item = T> {
    (0..23).map(|k| T::lit(4.0) * T::lit(0.5).powi(k))
}

/// Largest probe ν > 0 with finite ∫J(x)e^{sνx}dx, where s = +1 probes the right tail.
fn finite_probe<T: Scalar, K: Dispersal<T> + ?Sized>(k: &K, side: T) -> Option<T> {
    ladder::<T>().find(|&nu| k.exp_moment(-side * nu).is_finite())
}

/// `(thin_plus, thin_minus)`: whether ∫_0^∞ J(x)e^{λx}dx, resp. ∫_{-∞}^0 J(x)e^{-λx}dx,
/// is finite for some λ > 0.
pub fn thin_tail_flags<T: Scalar, K: Dispersal<T> + ?Sized>(k: &K) -> (bool, bool) {
    if k.support_radius().is_some() {
        return (true, true);
    }
    (
        finite_probe(k, T::one()).is_some(),
        finite_probe(k, -T::one()).is_some(),
    )
}

/// Minimizes G(ν) = x·M(ν) + c·ν + shift over ν, with `x` the diffusion weight.
fn minimize_moment_line<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    weight: T,
    c: T,
    shift: T,
) -> Result<(T, T, bool)> {
    let g = |nu: T| weight * k.exp_moment(nu) + c * nu + shift;
    let dg = |nu: T| weight * k.exp_moment_derivative(nu) + c;
    let m = minimize_convex(&g, Some(&dg), T::zero(), MinimizeOptions::default())?;
    Ok((m.value, m.x, m.at_boundary))
}

/// λ∞^c = inf_ν [∫J(x)e^{-νx}dx + cν] and its minimizer.
///
/// Without either thin tail the moment is finite only at ν = 0, so the result
/// is (1, 0).
pub fn lambda_infinity<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
) -> Result<DispersionResult<T>> {
    let (thin_plus, thin_minus) = thin_tail_flags(k);
    if !thin_plus && !thin_minus {
        return Ok(DispersionResult {
            lambda_inf: T::one(),
            nu0: Some(T::zero()),
            c,
            thin_plus,
            thin_minus,
            boundary_minimizer: true,
        });
    }
    let (value, nu, boundary) = minimize_moment_line(k, T::one(), c, T::zero())?;
    Ok(DispersionResult {
        lambda_inf: value,
        nu0: Some(nu),
        c,
        thin_plus,
        thin_minus,
        boundary_minimizer: boundary,
    })
}

/// inf_ν [d·M(ν) − d + f0 + cν]: the limit for the full operator
/// d(J∗φ − φ) + cφ' + f0·φ, minimized directly rather than through rescaling.
pub fn lambda_infinity_full<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    d: T,
    f0: T,
    c: T,
) -> Result<T> {
    check_rates(d, f0)?;
    let (thin_plus, thin_minus) = thin_tail_flags(k);
    if !thin_plus && !thin_minus {
        return Ok(f0);
    }
    Ok(minimize_moment_line(k, d, c, f0 - d)?.0)
}

fn check_rates<T: Scalar>(d: T, f0: T) -> Result<()> {
    if !(d > T::zero()) {
        return invalid(format!("diffusion rate d must be positive, got {d}"));
    }
    if !(f0 > T::zero()) {
        return invalid(format!("f'(0) must be positive, got {f0}"));
    }
    Ok(())
}

/// inf_{ν>0} (d·∫J(x)e^{sνx}dx − d + f0)/ν for side s = ±1.
fn speed_quotient<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    d: T,
    f0: T,
    side: T,
) -> Result<Option<(T, T)>> {
    let Some(start) = finite_probe(k, side) else {
        return Ok(None);
    };
    let q = |nu: T| (d * k.exp_moment(-side * nu) - d + f0) / nu;
    let dq = |nu: T| {
        let num = d * k.exp_moment(-side * nu) - d + f0;
        let dnum = -side * d * k.exp_moment_derivative(-side * nu);
        (dnum * nu - num) / (nu * nu)
    };
    let opts = MinimizeOptions {
        lower: Some(T::zero()),
        initial_step: start * T::lit(0.25),
        ..Default::default()
    };
    let m = minimize_convex(&q, Some(&dq), start * T::half(), opts)?;
    Ok(Some((m.value, m.x)))
}

/// Rightward and leftward KPP spreading speeds.
pub fn spreading_speeds<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    d: T,
    f0: T,
) -> Result<SpeedPair<T>> {
    check_rates(d, f0)?;
    let plus = speed_quotient(k, d, f0, T::one())?;
    let minus = speed_quotient(k, d, f0, -T::one())?;
    Ok(SpeedPair {
        c_plus: plus.map_or(T::infinity(), |p| p.0),
        c_minus: minus.map_or(T::neg_infinity(), |p| -p.0),
        d,
        f0,
        nu_plus: plus.map(|p| p.1),
        nu_minus: minus.map(|p| p.1),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Positive,
    Zero,
    Negative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Classification<T> {
    pub sign: Sign,
    /// d·λ∞^{c/d} + f0 − d.
    pub value: T,
}

/// Sign of the principal eigenvalue at infinity of d(J∗φ − φ) + cφ' + f0·φ,
/// obtained by rescaling the drift; |value| < `zero_tol` counts as zero.
pub fn classify_c<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    d: T,
    f0: T,
    c: T,
    zero_tol: T,
) -> Result<Classification<T>> {
    check_rates(d, f0)?;
    let value = d * lambda_infinity(k, c / d)?.lambda_inf + f0 - d;
    let sign = if value.abs() < zero_tol {
        Sign::Zero
    } else if value > T::zero() {
        Sign::Positive
    } else {
        Sign::Negative
    };
    Ok(Classification { sign, value })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityRow<T> {
    pub n: u32,
    pub nu_n: T,
    pub value: T,
    pub nu_gap: T,
    pub value_gap: T,
}

/// Minimizers and minima for truncations J_n against those of J.
pub fn nu_stability_check<T: Scalar, K: Dispersal<T>>(
    k: &K,
    c: T,
    n_list: &[u32],
) -> Result<Vec<StabilityRow<T>>> {
    let full = lambda_infinity(k, c)?;
    let nu0 = full.nu0.unwrap_or(T::zero());
    n_list
        .iter()
        .map(|&n| {
            let tk = truncate(k, n)?;
            let r = lambda_infinity(&tk, c)?;
            let nu_n = r.nu0.unwrap_or(T::zero());
            Ok(StabilityRow {
                n,
                nu_n,
                value: r.lambda_inf,
                nu_gap: (nu_n - nu0).abs(),
                value_gap: (full.lambda_inf - r.lambda_inf).abs(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    #[test]
    fn doubly_fat_tail_returns_unit_limit() {
        let k = Kernel::<f64>::power_law(3.0).unwrap();
        assert_eq!(thin_tail_flags(&k), (false, false));
        let r = lambda_infinity(&k, 0.7).unwrap();
        assert_eq!(r.lambda_inf, 1.0);
        assert_eq!(r.nu0, Some(0.0));
    }

    #[test]
    fn one_sided_tail_minimizes_on_finite_half_line() {
        let k = Kernel::<f64>::fat_right_tail(3.0, 3.0).unwrap();
        assert_eq!(thin_tail_flags(&k), (false, true));
        // G is finite only for ν ≥ 0; a positive drift pushes the minimum to ν = 0
        let r = lambda_infinity(&k, 1.0).unwrap();
        assert!(r.boundary_minimizer);
        assert!(r.nu0.unwrap().abs() < 1e-6);
        assert!((r.lambda_inf - 1.0).abs() < 1e-6);
        // a negative drift gives an interior minimum
        let r = lambda_infinity(&k, -1.0).unwrap();
        assert!(!r.boundary_minimizer);
        assert!(r.nu0.unwrap() > 0.0 && r.lambda_inf < 1.0);
    }

    #[test]
    fn speed_errors() {
        let k = Kernel::<f64>::laplace(2.0).unwrap();
        assert!(spreading_speeds(&k, 0.0, 1.0).is_err());
        assert!(spreading_speeds(&k, 1.0, -1.0).is_err());
        assert!(classify_c(&k, -1.0, 1.0, 0.0, 1e-9).is_err());
    }

    #[test]
    fn fat_right_tail_has_infinite_right_speed() {
        let k = Kernel::<f64>::fat_right_tail(3.0, 3.0).unwrap();
        let s = spreading_speeds(&k, 1.0, 1.0).unwrap();
        assert!(s.c_plus.is_infinite() && s.c_plus > 0.0);
        assert!(s.c_minus.is_finite());
    }
}
