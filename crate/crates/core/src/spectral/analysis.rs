use rayon::prelude::*;

use crate::dispersion::lambda_infinity;
use crate::error::{invalid, Result};
use crate::kernels::Dispersal;
use crate::scalar::Scalar;

use super::eigen::{principal_eigen, symbol_minimizer, EigenOptions};
use super::operator::{build_operator_at, DiscreteOperator};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveRow<T> {
    pub l: T,
    /// λ_p on (−l, l).
    pub lambda: T,
    /// λ_p on the translate (0, 2l).
    pub lambda_translated: T,
    pub lower: T,
    pub upper: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LambdaCurve<T> {
    pub rows: Vec<CurveRow<T>>,
    /// Nondecreasing in l up to the eigenvalue tolerance.
    pub monotone: bool,
    pub max_translation_deviation: T,
    /// Largest drop λ(l_i) − λ(l_{i+1}); negative when strictly increasing.
    pub max_decrease: T,
}

/// λ_p over an increasing ladder of half-widths, each point solved in parallel.
pub fn lambda_curve<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
    l_list: &[T],
    h: T,
    opts: &EigenOptions<T>,
) -> Result<LambdaCurve<T>> {
    if l_list.windows(2).any(|w| !(w[1] > w[0])) {
        return invalid("l ladder must be strictly increasing");
    }
    let rows: Vec<CurveRow<T>> = l_list
        .par_iter()
        .map(|&l| {
            let p = principal_eigen(&build_operator_at(k, c, l, h, -l)?, opts)?;
            let q = principal_eigen(&build_operator_at(k, c, l, h, T::zero())?, opts)?;
            Ok(CurveRow {
                l,
                lambda: p.lambda,
                lambda_translated: q.lambda,
                lower: p.lower,
                upper: p.upper,
            })
        })
        .collect::<Result<_>>()?;
    let max_translation_deviation = rows
        .iter()
        .map(|r| (r.lambda - r.lambda_translated).abs())
        .fold(T::zero(), T::max);
    let max_decrease = rows
        .windows(2)
        .map(|w| w[0].lambda - w[1].lambda)
        .fold(T::neg_infinity(), T::max);
    Ok(LambdaCurve {
        monotone: rows.len() < 2 || max_decrease <= opts.tol,
        rows,
        max_translation_deviation,
        max_decrease,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport<T> {
    pub lambda_inf: T,
    /// inf_ν of the discrete symbol: the l → ∞ limit of the discretization itself.
    pub discrete_limit: T,
    pub l_values: Vec<T>,
    pub lambdas: Vec<T>,
    /// λ∞ − λ_p(l) for each l.
    pub gaps: Vec<T>,
    /// λ∞ − λ_p(l_max).
    pub gap: T,
    /// The signed gap decreases along the ladder.
    pub gap_decreasing: bool,
    /// Aitken extrapolation of the last three λ_p, when defined.
    pub extrapolated: Option<T>,
    /// discrete_limit − λ_p(l_max).
    pub discrete_gap: T,
}

/// Limit check on the ladder {l_max/4, l_max/2, l_max}.
pub fn limit_check<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
    l_max: T,
    h: T,
    opts: &EigenOptions<T>,
) -> Result<LimitReport<T>> {
    let q = l_max * T::lit(0.25);
    limit_check_ladder(k, c, &[q, q + q, l_max], h, opts)
}

/// Gap between λ∞^c and λ_p on each half-width of `l_values`.
pub fn limit_check_ladder<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
    l_values: &[T],
    h: T,
    opts: &EigenOptions<T>,
) -> Result<LimitReport<T>> {
    if l_values.is_empty() {
        return invalid("empty l ladder");
    }
    let lambda_inf = lambda_infinity(k, c)?.lambda_inf;
    let ops: Vec<DiscreteOperator<T>> = l_values
        .iter()
        .map(|&l| build_operator_at(k, c, l, h, -l))
        .collect::<Result<_>>()?;
    let lambdas: Vec<T> = ops
        .par_iter()
        .map(|op| principal_eigen(op, opts).map(|p| p.lambda))
        .collect::<Result<_>>()?;
    let last = ops.last().expect("nonempty");
    let discrete_limit = last.symbol(symbol_minimizer(last));
    let gaps: Vec<T> = lambdas.iter().map(|l| lambda_inf - *l).collect();
    let n = lambdas.len();
    let extrapolated = if n >= 3 {
        let (a, b, c3) = (lambdas[n - 3], lambdas[n - 2], lambdas[n - 1]);
        let d1 = b - a;
        let d2 = c3 - b;
        let den = d2 - d1;
        if den != T::zero() && den.is_finite() {
            Some(c3 - d2 * d2 / den)
        } else {
            None
        }
    } else {
        None
    };
    Ok(LimitReport {
        lambda_inf,
        discrete_limit,
        gap: gaps[n - 1],
        gap_decreasing: gaps.windows(2).all(|w| w[1] < w[0]),
        gaps,
        extrapolated,
        discrete_gap: discrete_limit - lambdas[n - 1],
        l_values: l_values.to_vec(),
        lambdas,
    })
}
