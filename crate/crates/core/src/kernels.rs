//! Dispersal kernels, their truncations and exponential moments.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_line, GaussLegendre, LineLayout};
use crate::scalar::Scalar;

/// Tolerance on the total mass of a valid kernel.
pub const MASS_TOL: f64 = 1e-8;

const GL_ORDER: usize = 16;

/// A dispersal density on the real line.
pub trait Dispersal<T: Scalar>: Send + Sync {
    fn density(&self, x: T) -> T;

    /// Smallest R with J = 0 outside [-R, R]; `None` for unbounded support.
    fn support_radius(&self) -> Option<T>;

    /// Points where the density is not smooth, plus support edges.
    fn breakpoints(&self) -> Vec<T>;

    /// Typical length over which the density varies.
    fn length_scale(&self) -> T;

    fn label(&self) -> String;

    /// Closed-form `(M(ν), M'(ν))` where M(ν) = ∫J(x)e^{-νx}dx, if known.
    /// Outside the finiteness interval M is +∞.
    fn analytic_moment(&self, _nu: T) -> Option<(T, T)> {
        None
    }

    /// ∫J(x)e^{-νx}dx, or +∞ when the integral diverges.
    fn exp_moment(&self, nu: T) -> T {
        if let Some((m, _)) = self.analytic_moment(nu) {
            return m;
        }
        numeric_moment(self, nu, |x, j| j * (-nu * x).exp())
    }

    /// d/dν of [`Dispersal::exp_moment`] = -∫xJ(x)e^{-νx}dx, NaN where undefined.
    fn exp_moment_derivative(&self, nu: T) -> T {
        if let Some((_, d)) = self.analytic_moment(nu) {
            return d;
        }
        let v = numeric_moment(self, nu, |x, j| -x * j * (-nu * x).exp());
        if v.is_finite() {
            v
        } else {
            T::nan()
        }
    }
}

fn line_layout<T: Scalar, K: Dispersal<T> + ?Sized>(k: &K, nu: T) -> LineLayout<T> {
    let ls = k.length_scale();
    let panel = (ls / T::lit(8.0)).min(T::half() / (nu.abs() + T::lit(1e-12)));
    let support = k.support_radius().map(|r| (-r, r));
    LineLayout {
        breakpoints: k.breakpoints(),
        support,
        core: ls * T::lit(8.0),
        panel,
    }
}

/// Integral of `g(x, J(x))` over the kernel's line layout at exponent `nu`.
fn numeric_moment<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    nu: T,
    g: impl Fn(T, T) -> T,
) -> T {
    let rule = GaussLegendre::<T>::new(GL_ORDER);
    let layout = line_layout(k, nu);
    let f = |x: T| {
        let j = k.density(x);
        if j == T::zero() {
            T::zero()
        } else {
            g(x, j)
        }
    };
    integrate_line(&rule, &f, &layout).value()
}

/// Numerically integrated mass, ignoring any analytic shortcut.
pub fn numeric_mass<T: Scalar, K: Dispersal<T> + ?Sized>(k: &K) -> T {
    numeric_moment(k, T::zero(), |_, j| j)
}

/// ∫_lo^hi |y|^p J(y)e^{-νy}dy for p ∈ {0, 1} on a finite interval.
pub fn partial_moment<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    lo: T,
    hi: T,
    nu: T,
    power: u32,
) -> T {
    if hi <= lo {
        return T::zero();
    }
    let rule = GaussLegendre::<T>::new(GL_ORDER);
    let panel = (k.length_scale() / T::lit(8.0)).min(T::half() / (nu.abs() + T::lit(1e-12)));
    let mut pts = vec![lo];
    pts.extend(k.breakpoints().into_iter().filter(|&b| b > lo && b < hi));
    pts.push(hi);
    let f = |y: T| {
        let j = k.density(y);
        if j == T::zero() {
            T::zero()
        } else {
            y.abs().powi(power as i32) * j * (-nu * y).exp()
        }
    };
    pts.windows(2)
        .map(|w| {
            let panels = ((w[1] - w[0]) / panel).ceil().to_usize().unwrap_or(1).max(1);
            rule.integrate(&f, w[0], w[1], panels)
        })
        .sum()
}

/// Custom density supplied by the caller.
pub type DensityFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Shipped kernel families.
#[derive(Clone)]
pub enum KernelFamily<T> {
    /// Gaussian shifted down to vanish at `radius`, renormalized.
    TruncatedGaussian { sigma: T, radius: T },
    /// (β/2)e^{-β|x|}.
    Laplace { beta: T },
    /// Indicator of [a-1, a] convolved with a biweight bump of half-width `width`.
    MollifiedInterval { a: T, width: T },
    /// A e^{-r₊x} for x ≥ 0 and A e^{r₋x} for x < 0.
    TwoSidedExponential { right_rate: T, left_rate: T },
    /// A(1+x)^{-p} for x ≥ 0 and A e^{rx} for x < 0.
    FatRightTail { power: T, left_rate: T },
    /// (p-1)/2 (1+|x|)^{-p}.
    PowerLaw { power: T },
    Custom {
        f: DensityFn<T>,
        support_radius: Option<T>,
        breakpoints: Vec<T>,
        length_scale: T,
    },
}

impl<T: fmt::Debug> fmt::Debug for KernelFamily<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::TruncatedGaussian { sigma, radius } => f
                .debug_struct("TruncatedGaussian")
                .field("sigma", sigma)
                .field("radius", radius)
                .finish(),
            Self::Laplace { beta } => f.debug_struct("Laplace").field("beta", beta).finish(),
            Self::MollifiedInterval { a, width } => f
                .debug_struct("MollifiedInterval")
                .field("a", a)
                .field("width", width)
                .finish(),
            Self::TwoSidedExponential {
                right_rate,
                left_rate,
            } => f
                .debug_struct("TwoSidedExponential")
                .field("right_rate", right_rate)
                .field("left_rate", left_rate)
                .finish(),
            Self::FatRightTail { power, left_rate } => f
                .debug_struct("FatRightTail")
                .field("power", power)
                .field("left_rate", left_rate)
                .finish(),
            Self::PowerLaw { power } => f.debug_struct("PowerLaw").field("power", power).finish(),
            Self::Custom { support_radius, .. } => f
                .debug_struct("Custom")
                .field("support_radius", support_radius)
                .finish_non_exhaustive(),
        }
    }
}

/// Names accepted by [`Kernel::parse`].
pub const KNOWN_FAMILIES: &[&str] = &[
    "gaussian",
    "laplace",
    "interval",
    "two-sided",
    "fat-right",
    "power-law",
];

/// A dispersal kernel from one of the shipped families or a custom density.
#[derive(Debug, Clone)]
pub struct Kernel<T> {
    family: KernelFamily<T>,
    norm: T,
    label: String,
}

/// CDF of the biweight density (15/16)(1-u²)² on [-1, 1].
fn biweight_cdf<T: Scalar>(u: T) -> T {
    if u <= -T::one() {
        return T::zero();
    }
    if u >= T::one() {
        return T::one();
    }
    let u2 = u * u;
    T::half() + T::lit(15.0 / 16.0) * u * (T::one() - T::lit(2.0 / 3.0) * u2 + T::lit(0.2) * u2 * u2)
}

impl<T: Scalar> Kernel<T> {
    fn build(family: KernelFamily<T>, label: String, normalize: bool) -> Self {
        let mut k = Kernel {
            family,
            norm: T::one(),
            label,
        };
        if normalize {
            k.norm = T::one() / numeric_mass(&k);
        }
        k
    }

    pub fn truncated_gaussian(sigma: T, radius: T) -> Result<Self> {
        if !(sigma > T::zero() && radius > T::zero()) {
            return invalid("gaussian needs sigma > 0 and radius > 0");
        }
        Ok(Self::build(
            KernelFamily::TruncatedGaussian { sigma, radius },
            format!("gaussian:sigma={sigma},radius={radius}"),
            true,
        ))
    }

    pub fn laplace(beta: T) -> Result<Self> {
        if !(beta > T::zero()) {
            return invalid("laplace needs beta > 0");
        }
        Ok(Self::build(
            KernelFamily::Laplace { beta },
            format!("laplace:beta={beta}"),
            false,
        ))
    }

    /// Requires 0 inside the support so that J(0) > 0.
    pub fn mollified_interval(a: T, width: T) -> Result<Self> {
        if !(width > T::zero() && width < T::half()) {
            return invalid("interval needs 0 < mollify < 0.5");
        }
        if !(a > -width && a < T::one() + width) {
            return invalid("interval needs J(0) > 0, i.e. -mollify < a < 1 + mollify");
        }
        Ok(Self::build(
            KernelFamily::MollifiedInterval { a, width },
            format!("interval:a={a},mollify={width}"),
            true,
        ))
    }

    pub fn two_sided_exponential(right_rate: T, left_rate: T) -> Result<Self> {
        if !(right_rate > T::zero() && left_rate > T::zero()) {
            return invalid("two-sided needs positive rates");
        }
        Ok(Self::build(
            KernelFamily::TwoSidedExponential {
                right_rate,
                left_rate,
            },
            format!("two-sided:right={right_rate},left={left_rate}"),
            false,
        ))
    }

    pub fn fat_right_tail(power: T, left_rate: T) -> Result<Self> {
        if !(power > T::one() + T::one() && left_rate > T::zero()) {
            return invalid("fat-right needs power > 2 and left > 0");
        }
        Ok(Self::build(
            KernelFamily::FatRightTail { power, left_rate },
            format!("fat-right:power={power},left={left_rate}"),
            false,
        ))
    }

    pub fn power_law(power: T) -> Result<Self> {
        if !(power > T::one() + T::one()) {
            return invalid("power-law needs power > 2");
        }
        Ok(Self::build(
            KernelFamily::PowerLaw { power },
            format!("power-law:power={power}"),
            false,
        ))
    }

    /// A caller-supplied density. It is checked by [`check_condition_j`], never rescaled.
    pub fn custom(
        label: impl Into<String>,
        f: DensityFn<T>,
        support_radius: Option<T>,
        breakpoints: Vec<T>,
        length_scale: T,
    ) -> Self {
        Self::build(
            KernelFamily::Custom {
                f,
                support_radius,
                breakpoints,
                length_scale,
            },
            label.into(),
            false,
        )
    }

    pub fn family(&self) -> &KernelFamily<T> {
        &self.family
    }

    /// Parses `family:key=v,key=v` or `family key=v key=v`.
    pub fn parse(spec: &str) -> Result<Self> {
        let spec = spec.trim();
        let (name, rest) = match spec.find([':', ' ']) {
            Some(i) => (&spec[..i], &spec[i + 1..]),
            None => (spec, ""),
        };
        let mut params: Vec<(String, T)> = Vec::new();
        for tok in rest.split([',', ' ']).filter(|t| !t.is_empty()) {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("expected key=value, got `{tok}`")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad number `{v}` for `{k}`")))?;
            params.push((k.trim().to_string(), T::lit(v)));
        }
        let take = |key: &str, default: Option<f64>| -> Result<T> {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .or(default.map(T::lit))
                .ok_or_else(|| Error::InvalidArgument(format!("kernel `{name}` needs `{key}`")))
        };
        let allowed: &[&str] = match name {
            "gaussian" => &["sigma", "radius"],
            "laplace" => &["beta"],
            "interval" => &["a", "mollify"],
            "two-sided" => &["right", "left"],
            "fat-right" => &["power", "left"],
            "power-law" => &["power"],
            _ => {
                return Err(Error::UnknownFamily {
                    kind: "kernel",
                    name: name.to_string(),
                    known: KNOWN_FAMILIES.join(", "),
                })
            }
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return invalid(format!("kernel `{name}` has no parameter `{k}`"));
        }
        match name {
            "gaussian" => {
                let sigma = take("sigma", Some(1.0))?;
                let radius = take("radius", None).unwrap_or(sigma * T::lit(3.0));
                Self::truncated_gaussian(sigma, radius)
            }
            "laplace" => Self::laplace(take("beta", Some(1.0))?),
            "interval" => Self::mollified_interval(take("a", None)?, take("mollify", Some(0.02))?),
            "two-sided" => Self::two_sided_exponential(take("right", None)?, take("left", None)?),
            "fat-right" => Self::fat_right_tail(take("power", Some(3.0))?, take("left", Some(3.0))?),
            _ => Self::power_law(take("power", Some(3.0))?),
        }
    }
}

impl<T: Scalar> Dispersal<T> for Kernel<T> {
    fn density(&self, x: T) -> T {
        let raw = match &self.family {
            KernelFamily::TruncatedGaussian { sigma, radius } => {
                if x.abs() >= *radius {
                    T::zero()
                } else {
                    let s2 = T::two() * *sigma * *sigma;
                    (-(x * x) / s2).exp() - (-(*radius * *radius) / s2).exp()
                }
            }
            KernelFamily::Laplace { beta } => *beta * T::half() * (-*beta * x.abs()).exp(),
            KernelFamily::MollifiedInterval { a, width } => {
                biweight_cdf((x - *a + T::one()) / *width) - biweight_cdf((x - *a) / *width)
            }
            KernelFamily::TwoSidedExponential {
                right_rate,
                left_rate,
            } => {
                let amp = *right_rate * *left_rate / (*right_rate + *left_rate);
                if x >= T::zero() {
                    amp * (-*right_rate * x).exp()
                } else {
                    amp * (*left_rate * x).exp()
                }
            }
            KernelFamily::FatRightTail { power, left_rate } => {
                let amp = T::one() / (T::one() / (*power - T::one()) + T::one() / *left_rate);
                if x >= T::zero() {
                    amp * (T::one() + x).powf(-*power)
                } else {
                    amp * (*left_rate * x).exp()
                }
            }
            KernelFamily::PowerLaw { power } => {
                (*power - T::one()) * T::half() * (T::one() + x.abs()).powf(-*power)
            }
            KernelFamily::Custom { f, .. } => f(x),
        };
        raw * self.norm
    }

    fn support_radius(&self) -> Option<T> {
        match &self.family {
            KernelFamily::TruncatedGaussian { radius, .. } => Some(*radius),
            KernelFamily::MollifiedInterval { a, width } => {
                Some((*a - T::one() - *width).abs().max(*a + *width))
            }
            KernelFamily::Custom { support_radius, .. } => *support_radius,
            _ => None,
        }
    }

    fn breakpoints(&self) -> Vec<T> {
        match &self.family {
            KernelFamily::TruncatedGaussian { radius, .. } => vec![-*radius, T::zero(), *radius],
            KernelFamily::MollifiedInterval { a, width } => {
                let lo = *a - T::one();
                vec![lo - *width, lo + *width, *a - *width, *a + *width]
            }
            KernelFamily::Custom { breakpoints, .. } => breakpoints.clone(),
            _ => vec![T::zero()],
        }
    }

    fn length_scale(&self) -> T {
        match &self.family {
            KernelFamily::TruncatedGaussian { sigma, radius } => sigma.min(*radius),
            KernelFamily::Laplace { beta } => T::one() / *beta,
            KernelFamily::MollifiedInterval { .. } => T::one(),
            KernelFamily::TwoSidedExponential {
                right_rate,
                left_rate,
            } => T::one() / right_rate.min(*left_rate),
            KernelFamily::FatRightTail { left_rate, .. } => T::one().max(T::one() / *left_rate),
            KernelFamily::PowerLaw { .. } => T::one(),
            KernelFamily::Custom { length_scale, .. } => *length_scale,
        }
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn analytic_moment(&self, nu: T) -> Option<(T, T)> {
        match &self.family {
            KernelFamily::Laplace { beta } => {
                let b2 = *beta * *beta;
                if nu.abs() >= *beta {
                    Some((T::infinity(), T::nan()))
                } else {
                    let q = b2 - nu * nu;
                    Some((b2 / q, T::two() * b2 * nu / (q * q)))
                }
            }
            KernelFamily::TwoSidedExponential {
                right_rate,
                left_rate,
            } => {
                let amp = *right_rate * *left_rate / (*right_rate + *left_rate);
                if nu <= -*right_rate || nu >= *left_rate {
                    Some((T::infinity(), T::nan()))
                } else {
                    let p = *right_rate + nu;
                    let q = *left_rate - nu;
                    Some((amp / p + amp / q, -amp / (p * p) + amp / (q * q)))
                }
            }
            _ => None,
        }
    }
}

/// Smoothstep cutoff: 1 on [-1, 1], 0 outside [-2, 2], C¹ and monotone between.
pub fn cutoff<T: Scalar>(x: T) -> T {
    let a = x.abs();
    if a <= T::one() {
        T::one()
    } else if a >= T::two() {
        T::zero()
    } else {
        let t = T::two() - a;
        t * t * (T::lit(3.0) - T::two() * t)
    }
}

/// J_n(x) = J(x)·cutoff(x/n).
#[derive(Debug, Clone)]
pub struct TruncatedKernel<K> {
    pub base: K,
    pub n: u32,
}

/// Truncates `k` to support [-2n, 2n]; `n` must be at least 1.
pub fn truncate<K>(k: K, n: u32) -> Result<TruncatedKernel<K>> {
    if n < 1 {
        return invalid("truncation index n must be >= 1");
    }
    Ok(TruncatedKernel { base: k, n })
}

impl<T: Scalar, K: Dispersal<T>> Dispersal<T> for TruncatedKernel<K> {
    fn density(&self, x: T) -> T {
        let n = T::from_u32(self.n).expect("u32 representable");
        let c = cutoff(x / n);
        if c == T::zero() {
            T::zero()
        } else {
            self.base.density(x) * c
        }
    }

    fn support_radius(&self) -> Option<T> {
        let r = T::two() * T::from_u32(self.n).expect("u32 representable");
        Some(self.base.support_radius().map_or(r, |b| b.min(r)))
    }

    fn breakpoints(&self) -> Vec<T> {
        let n = T::from_u32(self.n).expect("u32 representable");
        let r = self.support_radius().unwrap_or(n);
        let mut b: Vec<T> = self
            .base
            .breakpoints()
            .into_iter()
            .filter(|x| x.abs() <= r)
            .collect();
        b.extend([-n - n, -n, n, n + n]);
        b.retain(|x| x.abs() <= r);
        b.sort_by(|p, q| p.partial_cmp(q).expect("finite breakpoints"));
        b.dedup();
        b
    }

    fn length_scale(&self) -> T {
        self.base.length_scale()
    }

    fn label(&self) -> String {
        format!("{}|n={}", self.base.label(), self.n)
    }
}

impl<T: Scalar, K: Dispersal<T> + ?Sized> Dispersal<T> for &K {
    fn density(&self, x: T) -> T {
        (**self).density(x)
    }
    fn support_radius(&self) -> Option<T> {
        (**self).support_radius()
    }
    fn breakpoints(&self) -> Vec<T> {
        (**self).breakpoints()
    }
    fn length_scale(&self) -> T {
        (**self).length_scale()
    }
    fn label(&self) -> String {
        (**self).label()
    }
    fn analytic_moment(&self, nu: T) -> Option<(T, T)> {
        (**self).analytic_moment(nu)
    }
    fn exp_moment(&self, nu: T) -> T {
        (**self).exp_moment(nu)
    }
    fn exp_moment_derivative(&self, nu: T) -> T {
        (**self).exp_moment_derivative(nu)
    }
}

/// Uniform sample points for [`check_condition_j`].
#[derive(Debug, Clone, Copy)]
pub struct SamplingSpec<T> {
    pub lo: T,
    pub hi: T,
    pub points: usize,
}

impl<T: Scalar> SamplingSpec<T> {
    /// Covers the support, or 20 length scales when the support is unbounded.
    pub fn for_kernel<K: Dispersal<T> + ?Sized>(k: &K) -> Self {
        let r = k
            .support_radius()
            .unwrap_or_else(|| k.length_scale() * T::lit(20.0));
        Self {
            lo: -r,
            hi: r,
            points: 4001,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport<T> {
    pub mass: T,
    pub mass_deviation: T,
    pub min_sampled: T,
    pub max_sampled: T,
    pub j0: T,
    pub pass: bool,
    pub failures: Vec<String>,
}

/// Checks nonnegativity, boundedness, J(0) > 0 and unit mass.
pub fn check_condition_j<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    grid: SamplingSpec<T>,
) -> ConditionReport<T> {
    let mut min_s = T::infinity();
    let mut max_s = -T::infinity();
    let mut nonfinite = false;
    let steps = grid.points.max(2) - 1;
    for i in 0..=steps {
        let x = grid.lo + (grid.hi - grid.lo) * T::from_usize_lossy(i) / T::from_usize_lossy(steps);
        let v = k.density(x);
        if !v.is_finite() {
            nonfinite = true;
        }
        min_s = min_s.min(v);
        max_s = max_s.max(v);
    }
    let mass = numeric_mass(k);
    let j0 = k.density(T::zero());
    let mass_deviation = (mass - T::one()).abs();
    let mut failures = Vec::new();
    if nonfinite {
        failures.push("density not finite at some sample".to_string());
    }
    if min_s < T::zero() {
        failures.push(format!("negative density {min_s}"));
    }
    if !(j0 > T::zero()) {
        failures.push(format!("J(0) = {j0} is not positive"));
    }
    // NaN deviation fails as well
    if !(mass_deviation <= T::lit(MASS_TOL)) {
        failures.push(format!("mass {mass} differs from 1"));
    }
    ConditionReport {
        mass,
        mass_deviation,
        min_sampled: min_s,
        max_sampled: max_s,
        j0,
        pass: failures.is_empty(),
        failures,
    }
}

/// How a first moment was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FirstMoment<T> {
    /// ∫|x|J converges; plain quadrature.
    Direct(T),
    /// Limit of ∫xJ_n over truncations n = 2^k.
    TruncationLimit(T),
    Unavailable,
}

impl<T: Scalar> FirstMoment<T> {
    pub fn value(self) -> Option<T> {
        match self {
            FirstMoment::Direct(v) | FirstMoment::TruncationLimit(v) => Some(v),
            FirstMoment::Unavailable => None,
        }
    }
}

/// ∫xJ(x)dx, directly or through truncations when ∫|x|J diverges.
pub fn first_moment<T: Scalar, K: Dispersal<T>>(k: &K) -> FirstMoment<T> {
    let abs = numeric_moment(k, T::zero(), |x, j| x.abs() * j);
    if abs.is_finite() {
        return FirstMoment::Direct(numeric_moment(k, T::zero(), |x, j| x * j));
    }
    let mut prev: Option<T> = None;
    for p in 0..30u32 {
        let tk = TruncatedKernel { base: k, n: 1 << p };
        let v = numeric_moment(&tk, T::zero(), |x, j| x * j);
        if !v.is_finite() {
            return FirstMoment::Unavailable;
        }
        if let Some(pv) = prev {
            if (v - pv).abs() <= T::lit(1e-10) * (T::one() + v.abs()) {
                return FirstMoment::TruncationLimit(v);
            }
        }
        prev = Some(v);
    }
    FirstMoment::Unavailable
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplace_moment_closed_form() {
        let k = Kernel::<f64>::laplace(2.0).unwrap();
        assert!((k.exp_moment(1.0) - 4.0 / 3.0).abs() < 1e-15);
        assert!(k.exp_moment(2.5).is_infinite());
        let num = numeric_moment(&k, 1.0, |x, j| j * (-x).exp());
        assert!((num - 4.0 / 3.0).abs() < 1e-10, "{num}");
    }

    #[test]
    fn numeric_divergence_detected() {
        let k = Kernel::<f64>::laplace(2.0).unwrap();
        assert!(numeric_moment(&k, 2.5, |x, j| j * (-2.5 * x).exp()).is_infinite());
        let fat = Kernel::<f64>::fat_right_tail(3.0, 3.0).unwrap();
        assert!(fat.exp_moment(-0.1).is_infinite());
        assert!(fat.exp_moment(0.5).is_finite());
    }

    #[test]
    fn shipped_kernels_have_unit_mass() {
        let ks: Vec<Kernel<f64>> = vec![
            Kernel::truncated_gaussian(1.0, 3.0).unwrap(),
            Kernel::laplace(2.0).unwrap(),
            Kernel::mollified_interval(0.8, 0.02).unwrap(),
            Kernel::two_sided_exponential(1.5, 3.0).unwrap(),
            Kernel::fat_right_tail(3.0, 3.0).unwrap(),
            Kernel::power_law(3.0).unwrap(),
        ];
        for k in &ks {
            let m = numeric_mass(k);
            assert!((m - 1.0).abs() < 1e-10, "{}: {m}", k.label());
            assert!((k.exp_moment(0.0) - 1.0).abs() < 1e-10);
            assert!(check_condition_j(k, SamplingSpec::for_kernel(k)).pass);
        }
    }

    #[test]
    fn cutoff_values() {
        assert_eq!(cutoff(0.6f64), 1.0);
        assert_eq!(cutoff(2.4f64), 0.0);
        assert!((cutoff(1.4f64) - 0.648).abs() < 1e-15);
        assert!((cutoff(-1.4f64) - 0.648).abs() < 1e-15);
    }

    #[test]
    fn truncation_rejects_zero() {
        let k = Kernel::<f64>::laplace(2.0).unwrap();
        assert!(truncate(k, 0).is_err());
    }

    #[test]
    fn parse_forms() {
        let a = Kernel::<f64>::parse("laplace:beta=2").unwrap();
        let b = Kernel::<f64>::parse("laplace beta=2").unwrap();
        assert_eq!(a.density(0.3), b.density(0.3));
        let i = Kernel::<f64>::parse("interval a=0.8 mollify=0.02").unwrap();
        assert_eq!(i.support_radius(), Some(0.8200000000000001f64.max(0.22)));
        let g = Kernel::<f64>::parse("gaussian:sigma=2").unwrap();
        assert_eq!(g.support_radius(), Some(6.0));
        match Kernel::<f64>::parse("cauchy:s=1") {
            Err(Error::UnknownFamily { known, .. }) => assert!(known.contains("laplace")),
            other => panic!("{other:?}"),
        }
        assert!(Kernel::<f64>::parse("laplace:gamma=1").is_err());
        assert!(Kernel::<f64>::parse("laplace:beta=x").is_err());
    }

    #[test]
    fn custom_kernels_are_checked_not_fixed() {
        let f: DensityFn<f64> = Arc::new(|x: f64| (-x.abs()).exp());
        let k = Kernel::custom("twice-laplace", f, None, vec![0.0], 1.0);
        let r = check_condition_j(&k, SamplingSpec::for_kernel(&k));
        assert!(!r.pass);
        assert!((r.mass - 2.0).abs() < 1e-8);
    }

    #[test]
    fn f32_kernels_work() {
        let k = Kernel::<f32>::laplace(2.0).unwrap();
        assert!((k.exp_moment(1.0) - 4.0 / 3.0).abs() < 1e-6);
        let g = Kernel::<f32>::truncated_gaussian(1.0, 3.0).unwrap();
        assert!((g.exp_moment(0.0) - 1.0).abs() < 1e-5);
    }
}
