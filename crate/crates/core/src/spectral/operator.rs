use crate::error::{invalid, Result};
use crate::kernels::Dispersal;
use crate::scalar::Scalar;

use super::banded::BandedMatrix;

/// Weights below this fraction of the largest are dropped from the stencil.
const DROP_REL: f64 = 1e-17;
const MAX_MASS_TERMS: usize = 10_000_000;

/// Convolution weights g_k ≈ h·J(kh), scaled so that Σ_k g_k = 1 over the line.
///
/// Scaling by the discrete mass instead of the exact one keeps constants fixed
/// by the discrete convolution, so the discrete dynamics inherit the bound u ≤ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStencil<T> {
    pub h: T,
    /// Weights for offsets k = -radius..=radius, index k + radius.
    pub weights: Vec<T>,
    pub radius: usize,
    /// Σ_k h·J(kh) before scaling.
    pub discrete_mass: T,
}

impl<T: Scalar> KernelStencil<T> {
    /// Stencil truncated to offsets |k| ≤ `max_offset`.
    pub fn new<K: Dispersal<T> + ?Sized>(k: &K, h: T, max_offset: usize) -> Result<Self> {
        if !(h > T::zero()) {
            return invalid("grid step h must be positive");
        }
        let j0 = k.density(T::zero());
        let cutoff = T::lit(DROP_REL) * j0.max(T::min_positive_value());
        // full-line discrete mass
        let mut mass = h * j0;
        let full = k
            .support_radius()
            .map(|r| (r / h).floor().to_usize().unwrap_or(0));
        let mut m = 1usize;
        loop {
            if full.is_some_and(|f| m > f) || m > MAX_MASS_TERMS {
                break;
            }
            let x = h * T::from_usize_lossy(m);
            let v = k.density(x) + k.density(-x);
            if full.is_none() && v < cutoff && x > k.length_scale() * T::lit(4.0) {
                break;
            }
            mass += h * v;
            m += 1;
        }
        if !(mass > T::zero()) || !mass.is_finite() {
            return invalid(format!("discrete kernel mass {mass} is not positive"));
        }
        let limit = max_offset.min(m);
        let mut w: Vec<T> = (0..=2 * limit)
            .map(|i| {
                let off = T::from_usize_lossy(i) - T::from_usize_lossy(limit);
                h * k.density(off * h) / mass
            })
            .collect();
        let wmax = w.iter().copied().fold(T::zero(), T::max);
        let mut radius = limit;
        while radius > 0
            && w[limit - radius] <= T::lit(DROP_REL) * wmax
            && w[limit + radius] <= T::lit(DROP_REL) * wmax
        {
            radius -= 1;
        }
        w = w[limit - radius..=limit + radius].to_vec();
        Ok(Self {
            h,
            weights: w,
            radius,
            discrete_mass: mass,
        })
    }

    #[inline]
    pub fn weight(&self, offset: isize) -> T {
        let r = self.radius as isize;
        if offset.abs() > r {
            T::zero()
        } else {
            self.weights[(offset + r) as usize]
        }
    }

    /// Σ_k g_k e^{-νkh}.
    pub fn symbol(&self, nu: T) -> T {
        let r = self.radius as isize;
        self.weights
            .iter()
            .enumerate()
            .map(|(i, g)| *g * (-nu * self.h * T::lit((i as isize - r) as f64)).exp())
            .sum()
    }
}

/// Endpoint carrying the homogeneous condition φ = 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// c > 0: φ(a + 2l) = 0.
    Right,
    /// c < 0: φ(a) = 0.
    Left,
    None,
}

/// Quadrature-plus-upwind discretization of φ ↦ ∫J(x−y)φ(y)dy + cφ'(x) on (a, a+2l).
///
/// Grid nodes are x_i = a + ih, i = 0..=N with N = 2l/h. The pinned endpoint is
/// eliminated, so the matrix acts on the remaining nodes only.
#[derive(Debug, Clone)]
pub struct DiscreteOperator<T> {
    pub l: T,
    pub a: T,
    pub h: T,
    pub c: T,
    /// All grid nodes including the pinned one.
    pub nodes: Vec<T>,
    /// Index in `nodes` of the first unknown.
    pub offset: usize,
    pub bc: Boundary,
    pub stencil: KernelStencil<T>,
    pub matrix: BandedMatrix<T>,
    pub warnings: Vec<String>,
}

/// Operator on (−l, l).
pub fn build_operator<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
    l: T,
    h: T,
) -> Result<DiscreteOperator<T>> {
    build_operator_at(k, c, l, h, -l)
}

/// Number of steps of size `h` across `width`; `h` must divide it within rounding.
pub fn grid_steps<T: Scalar>(width: T, h: T) -> Result<usize> {
    if !(width > T::zero()) || !(h > T::zero()) {
        return invalid(format!("need positive width and step, got {width} and {h}"));
    }
    let nf = (width / h).round();
    let n = nf.to_usize().unwrap_or(0);
    if n == 0 || (nf * h - width).abs() > T::lit(1e-9) * width.max(T::one()) {
        return invalid(format!("step {h} does not divide width {width}"));
    }
    Ok(n)
}

/// Operator on (a, a + 2l).
pub fn build_operator_at<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
    l: T,
    h: T,
    a: T,
) -> Result<DiscreteOperator<T>> {
    if !(l > T::zero()) {
        return invalid(format!("half-width l must be positive, got {l}"));
    }
    let steps = grid_steps(l + l, h)?;
    let mut warnings = Vec::new();
    if h > k.length_scale() * T::half() {
        let msg = format!(
            "step {h} exceeds half the kernel length scale {}; kernel is under-resolved",
            k.length_scale()
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let stencil = KernelStencil::new(k, h, steps)?;
    let nodes: Vec<T> = (0..=steps)
        .map(|i| a + h * T::from_usize_lossy(i))
        .collect();
    let (bc, offset, n) = if c > T::zero() {
        (Boundary::Right, 0, steps)
    } else if c < T::zero() {
        (Boundary::Left, 1, steps)
    } else {
        (Boundary::None, 0, steps + 1)
    };
    let b = stencil.radius;
    let lower = if c < T::zero() { b.max(1) } else { b };
    let upper = if c > T::zero() { b.max(1) } else { b };
    let mut m = BandedMatrix::zeros(n, lower, upper);
    let half = T::half();
    for r in 0..n {
        let i = r + offset;
        for s in m.row_range(r) {
            let j = s + offset;
            let mut w = stencil.weight(i as isize - j as isize);
            if j == 0 || j == steps {
                w *= half;
            }
            if w != T::zero() {
                m.set(r, s, w);
            }
        }
        let ch = c / h;
        if c > T::zero() {
            m.add(r, r, -ch);
            if r + 1 < n {
                m.add(r, r + 1, ch);
            }
        } else if c < T::zero() {
            m.add(r, r, ch);
            if r >= 1 {
                m.add(r, r - 1, -ch);
            }
        }
    }
    Ok(DiscreteOperator {
        l,
        a,
        h,
        c,
        nodes,
        offset,
        bc,
        stencil,
        matrix: m,
        warnings,
    })
}

impl<T: Scalar> DiscreteOperator<T> {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// Coordinates of the unknowns.
    pub fn unknown_nodes(&self) -> &[T] {
        &self.nodes[self.offset..self.offset + self.n()]
    }

    /// Σ_k g_k e^{-νkh} plus the upwind drift applied to e^{νx}.
    ///
    /// Its infimum over ν is the l → ∞ limit of the discrete principal eigenvalue.
    pub fn symbol(&self, nu: T) -> T {
        discrete_symbol(&self.stencil, self.c, nu)
    }

    /// Expands values on the unknowns to all nodes, with 0 at the pinned endpoint.
    pub fn extend(&self, v: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.nodes.len()];
        out[self.offset..self.offset + v.len()].copy_from_slice(v);
        out
    }
}

/// Discrete symbol for stencil `s` and drift `c`.
pub fn discrete_symbol<T: Scalar>(s: &KernelStencil<T>, c: T, nu: T) -> T {
    let h = s.h;
    let drift = if c > T::zero() {
        c * ((nu * h).exp() - T::one()) / h
    } else if c < T::zero() {
        c * (T::one() - (-nu * h).exp()) / h
    } else {
        T::zero()
    };
    s.symbol(nu) + drift
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    #[test]
    fn shapes_follow_boundary_rule() {
        let k = Kernel::<f64>::laplace(2.0).unwrap();
        assert_eq!(build_operator(&k, 0.0, 1.0, 0.1).unwrap().n(), 21);
        let p = build_operator(&k, 0.5, 1.0, 0.1).unwrap();
        assert_eq!((p.n(), p.bc, p.offset), (20, Boundary::Right, 0));
        let m = build_operator(&k, -0.5, 1.0, 0.1).unwrap();
        assert_eq!((m.n(), m.bc, m.offset), (20, Boundary::Left, 1));
    }

    #[test]
    fn upwind_entries_nonnegative() {
        let k = Kernel::<f64>::laplace(2.0).unwrap();
        let op = build_operator(&k, 0.5, 2.0, 0.1).unwrap();
        let g1 = op.stencil.weight(-1);
        assert!((op.matrix.get(3, 4) - (5.0 + g1)).abs() < 1e-14);
        for i in 0..op.n() {
            for j in 0..op.n() {
                if i != j {
                    assert!(op.matrix.get(i, j) >= 0.0);
                }
            }
        }
    }

    #[test]
    fn rejects_bad_grids() {
        let k = Kernel::<f64>::laplace(2.0).unwrap();
        assert!(build_operator(&k, 0.0, -1.0, 0.1).is_err());
        assert!(build_operator(&k, 0.0, 1.0, 0.0).is_err());
        assert!(build_operator(&k, 0.0, 1.0, 0.3).is_err());
    }

    #[test]
    fn coarse_grid_warns() {
        let k = Kernel::<f64>::laplace(4.0).unwrap();
        assert!(!build_operator(&k, 0.0, 1.0, 0.5).unwrap().warnings.is_empty());
    }

    #[test]
    fn stencil_mass_is_one() {
        let k = Kernel::<f64>::laplace(2.0).unwrap();
        let s = KernelStencil::new(&k, 0.1, 10_000).unwrap();
        let total: f64 = s.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14);
        // Laplace trapezoid mass at h = 0.1 is (βh/2)coth(βh/2)
        let expected = 0.1 / (0.1f64).tanh();
        assert!((s.discrete_mass - expected).abs() < 1e-12);
    }
}
