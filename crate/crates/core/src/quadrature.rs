//! Composite Gauss–Legendre quadrature with geometric tail shells.

use crate::scalar::Scalar;

/// Gauss–Legendre rule on [-1, 1], nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    pub nodes: Vec<T>,
    pub weights: Vec<T>,
}

impl<T: Scalar> GaussLegendre<T> {
    /// Nodes by Newton iteration on P_n, computed in f64.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        if n == 1 {
            return Self {
                nodes: vec![T::zero()],
                weights: vec![T::two()],
            };
        }
        let mut nodes = vec![0.0f64; n];
        let mut weights = vec![0.0f64; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0f64, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self {
            nodes: nodes.into_iter().map(T::lit).collect(),
            weights: weights.into_iter().map(T::lit).collect(),
        }
    }

    /// Integral of `f` over [a, b] using `panels` equal panels.
    pub fn integrate<F: Fn(T) -> T>(&self, f: &F, a: T, b: T, panels: usize) -> T {
        if b <= a {
            return T::zero();
        }
        let w = (b - a) / T::from_usize_lossy(panels);
        let half = w * T::half();
        let mut total = T::zero();
        for p in 0..panels {
            let mid = a + w * T::from_usize_lossy(p) + half;
            let mut s = T::zero();
            for (x, wt) in self.nodes.iter().zip(&self.weights) {
                s += *wt * f(mid + half * *x);
            }
            total += s * half;
        }
        total
    }
}

/// Outcome of a line integral that may diverge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LineIntegral<T> {
    Finite(T),
    Divergent,
}

impl<T: Scalar> LineIntegral<T> {
    pub fn value(self) -> T {
        match self {
            LineIntegral::Finite(v) => v,
            LineIntegral::Divergent => T::infinity(),
        }
    }
}

/// Partial sums beyond this are declared divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Layout of an integrand on the real line.
#[derive(Debug, Clone)]
pub struct LineLayout<T> {
    /// Sorted breakpoints (kinks and support edges) inside the core.
    pub breakpoints: Vec<T>,
    /// Finite support [-r, r] when known; otherwise tails are added in shells.
    pub support: Option<(T, T)>,
    /// Half-width of the core window for infinite support.
    pub core: T,
    /// Target panel width.
    pub panel: T,
}

/// Integrates `f` over the line described by `layout`.
///
/// Infinite tails are summed over shells [R, 2R], [2R, 4R], ...; the sum stops
/// once a shell contributes less than 1e-16 of the running total and less than
/// its predecessor, and is declared divergent past `DIVERGENCE_THRESHOLD`.
pub fn integrate_line<T: Scalar, F: Fn(T) -> T>(
    rule: &GaussLegendre<T>,
    f: &F,
    layout: &LineLayout<T>,
) -> LineIntegral<T> {
    let threshold = T::lit(DIVERGENCE_THRESHOLD);
    let (lo, hi) = layout.support.unwrap_or((-layout.core, layout.core));
    let mut pts: Vec<T> = vec![lo];
    pts.extend(layout.breakpoints.iter().copied().filter(|&b| b > lo && b < hi));
    pts.push(hi);
    let mut total = T::zero();
    for win in pts.windows(2) {
        let (a, b) = (win[0], win[1]);
        let panels = ((b - a) / layout.panel).ceil().to_usize().unwrap_or(1).clamp(1, 100_000);
        total += rule.integrate(f, a, b, panels);
    }
    if !total.is_finite() || total.abs() > threshold {
        return LineIntegral::Divergent;
    }
    if layout.support.is_some() {
        return LineIntegral::Finite(total);
    }
    for side in [T::one(), -T::one()] {
        let mut r = layout.core;
        let mut prev = T::infinity();
        let mut converged = false;
        for _ in 0..200 {
            let g = |x: T| f(side * x);
            let shell = rule.integrate(&g, r, r + r, 64);
            if !shell.is_finite() {
                return LineIntegral::Divergent;
            }
            total += shell;
            if total.abs() > threshold {
                return LineIntegral::Divergent;
            }
            let mag = shell.abs();
            if mag <= T::lit(1e-16) * total.abs().max(T::min_positive_value()) && mag <= prev {
                converged = true;
                break;
            }
            prev = mag;
            r = r + r;
            if !r.is_finite() {
                break;
            }
        }
        if !converged {
            return LineIntegral::Divergent;
        }
    }
    LineIntegral::Finite(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exact_for_polynomials() {
        let rule = GaussLegendre::<f64>::new(8);
        let wsum: f64 = rule.weights.iter().sum();
        assert!((wsum - 2.0).abs() < 1e-14);
        // degree 15 integrated exactly
        let v = rule.integrate(&|x: f64| x.powi(14) + x.powi(15), -1.0, 1.0, 1);
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn odd_and_single_point_rules() {
        let r1 = GaussLegendre::<f64>::new(1);
        assert_eq!(r1.nodes, vec![0.0]);
        assert_eq!(r1.weights, vec![2.0]);
        let r5 = GaussLegendre::<f64>::new(5);
        assert!(r5.nodes[2].abs() < 1e-15);
        let v = r5.integrate(&|x: f64| x.powi(8), 0.0, 1.0, 1);
        assert!((v - 1.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn tails_converge_and_diverge() {
        let rule = GaussLegendre::<f64>::new(16);
        let layout = LineLayout {
            breakpoints: vec![0.0],
            support: None,
            core: 4.0,
            panel: 0.25,
        };
        let v = integrate_line(&rule, &|x: f64| (-x.abs()).exp(), &layout);
        assert!((v.value() - 2.0).abs() < 1e-13);
        let d = integrate_line(&rule, &|x: f64| (-x.abs() + 1.1 * x).exp(), &layout);
        assert_eq!(d, LineIntegral::Divergent);
    }
}
