use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::kernels::Dispersal;
use crate::scalar::Scalar;
use crate::spectral::{grid_steps, KernelStencil};

use super::reaction::Reaction;

/// Grid function on uniform nodes x_i = x_lo + i·h.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T> {
    pub x_lo: T,
    pub h: T,
    pub values: Vec<T>,
    pub time: T,
}

impl<T: Scalar> Field<T> {
    pub fn new(x_lo: T, h: T, values: Vec<T>) -> Self {
        Self {
            x_lo,
            h,
            values,
            time: T::zero(),
        }
    }

    /// Samples `f` on [x_lo, x_hi].
    pub fn from_fn(x_lo: T, x_hi: T, h: T, f: impl Fn(T) -> T) -> Result<Self> {
        let n = grid_steps(x_hi - x_lo, h)?;
        let values = (0..=n)
            .map(|i| f(x_lo + h * T::from_usize_lossy(i)))
            .collect();
        Ok(Self::new(x_lo, h, values))
    }

    #[inline]
    pub fn x(&self, i: usize) -> T {
        self.x_lo + self.h * T::from_usize_lossy(i)
    }

    pub fn nodes(&self) -> Vec<T> {
        (0..self.values.len()).map(|i| self.x(i)).collect()
    }

    pub fn sup(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn inf(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    /// Index of the node nearest to x, clamped to the grid.
    pub fn index_of(&self, x: T) -> usize {
        let i = ((x - self.x_lo) / self.h).round();
        i.max(T::zero())
            .to_usize()
            .unwrap_or(0)
            .min(self.values.len() - 1)
    }

    pub fn sup_distance(&self, other: &Field<T>) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), T::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowBoundary {
    /// Values outside the window are 0 and the two edge nodes are held at 0.
    Dirichlet,
    /// Node i and node i + n are identified.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeScheme {
    /// Positivity and comparison preserving under the step bound.
    Euler,
    /// Classical fourth order; no comparison guarantee.
    Rk4,
}

/// u_t = d(J∗u − u) + f(u) on a truncated window.
#[derive(Debug, Clone)]
pub struct CauchyProblem<T> {
    pub stencil: KernelStencil<T>,
    pub d: T,
    pub reaction: Reaction<T>,
    pub boundary: WindowBoundary,
    pub scheme: TimeScheme,
}

impl<T: Scalar> CauchyProblem<T> {
    /// `window_nodes` bounds the stencil radius.
    pub fn new<K: Dispersal<T> + ?Sized>(
        k: &K,
        d: T,
        reaction: Reaction<T>,
        h: T,
        window_nodes: usize,
        boundary: WindowBoundary,
    ) -> Result<Self> {
        if !(d > T::zero()) {
            return invalid("diffusion rate d must be positive");
        }
        Ok(Self {
            stencil: KernelStencil::new(k, h, window_nodes)?,
            d,
            reaction,
            boundary,
            scheme: TimeScheme::Euler,
        })
    }

    /// 0.9/(d + L_f) with L_f = max |f'| on [0, max(1, sup u)].
    pub fn dt_max(&self, sup: T) -> T {
        T::lit(0.9) / (self.d + self.reaction.lipschitz(sup))
    }

    fn convolve(&self, u: &[T]) -> Vec<T> {
        let n = u.len();
        let r = self.stencil.radius;
        let w = &self.stencil.weights;
        let periodic = self.boundary == WindowBoundary::Periodic;
        (0..n)
            .into_par_iter()
            .with_min_len(256)
            .map(|i| {
                let mut s = T::zero();
                if periodic {
                    for (idx, g) in w.iter().enumerate() {
                        // node j = i − (idx − r) mod n
                        let j = (i + n * (r / n + 1) + r - idx) % n;
                        s += *g * u[j];
                    }
                } else {
                    let lo = i.saturating_sub(r);
                    let hi = (i + r).min(n - 1);
                    for j in lo..=hi {
                        s += w[i + r - j] * u[j];
                    }
                }
                s
            })
            .collect()
    }

    /// d(J∗u − u) + f(u).
    pub fn rhs(&self, u: &[T]) -> Vec<T> {
        let conv = self.convolve(u);
        let mut out: Vec<T> = conv
            .iter()
            .zip(u)
            .map(|(k, v)| self.d * (*k - *v) + self.reaction.f(*v))
            .collect();
        if self.boundary == WindowBoundary::Dirichlet {
            let n = out.len();
            out[0] = T::zero();
            out[n - 1] = T::zero();
        }
        out
    }
}

fn check_finite<T: Scalar>(v: &[T]) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("value at node {i}")));
    }
    Ok(())
}

/// One explicit step of size `dt`.
pub fn step_cauchy<T: Scalar>(u: &Field<T>, p: &CauchyProblem<T>, dt: T) -> Result<Field<T>> {
    let mut out = u.clone();
    step_cauchy_in_place(&mut out, p, dt)?;
    Ok(out)
}

pub fn step_cauchy_in_place<T: Scalar>(u: &mut Field<T>, p: &CauchyProblem<T>, dt: T) -> Result<()> {
    if !(dt > T::zero()) {
        return invalid("dt must be positive");
    }
    if p.scheme == TimeScheme::Euler {
        let bound = p.dt_max(u.sup());
        if dt > bound {
            return invalid(format!("dt = {dt} exceeds the positivity bound {bound}"));
        }
    }
    match p.scheme {
        TimeScheme::Euler => {
            let k1 = p.rhs(&u.values);
            for (v, k) in u.values.iter_mut().zip(&k1) {
                *v += dt * *k;
            }
        }
        TimeScheme::Rk4 => {
            let stage = |base: &[T], k: &[T], a: T| -> Vec<T> {
                base.iter().zip(k).map(|(b, kk)| *b + a * *kk).collect()
            };
            let h2 = dt * T::half();
            let k1 = p.rhs(&u.values);
            let k2 = p.rhs(&stage(&u.values, &k1, h2));
            let k3 = p.rhs(&stage(&u.values, &k2, h2));
            let k4 = p.rhs(&stage(&u.values, &k3, dt));
            let six = T::lit(6.0);
            for i in 0..u.values.len() {
                u.values[i] += dt / six * (k1[i] + T::two() * (k2[i] + k3[i]) + k4[i]);
            }
        }
    }
    check_finite(&u.values)?;
    u.time += dt;
    Ok(())
}

/// Snapshots of a simulation.
#[derive(Debug, Clone, Default)]
pub struct Trajectory<T> {
    pub snapshots: Vec<Field<T>>,
}

/// Integrates to `t_end` keeping every `stride`-th state (and the initial one).
pub fn simulate_cauchy<T: Scalar>(
    u0: Field<T>,
    p: &CauchyProblem<T>,
    dt: T,
    t_end: T,
    stride: usize,
) -> Result<Trajectory<T>> {
    let steps = (t_end / dt).round().to_usize().unwrap_or(0);
    let stride = stride.max(1);
    let mut u = u0;
    let mut traj = Trajectory {
        snapshots: vec![u.clone()],
    };
    for s in 1..=steps {
        step_cauchy_in_place(&mut u, p, dt)?;
        if s % stride == 0 || s == steps {
            traj.snapshots.push(u.clone());
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    fn problem(boundary: WindowBoundary) -> CauchyProblem<f64> {
        let k = Kernel::laplace(2.0).unwrap();
        CauchyProblem::new(&k, 1.0, Reaction::logistic(), 0.1, 400, boundary).unwrap()
    }

    #[test]
    fn zero_and_one_are_fixed() {
        let p = problem(WindowBoundary::Periodic);
        let zero = Field::from_fn(-20.0, 20.0, 0.1, |_| 0.0).unwrap();
        assert_eq!(step_cauchy(&zero, &p, 0.1).unwrap().values, zero.values);
        let one = Field::from_fn(-20.0, 19.9, 0.1, |_| 1.0).unwrap();
        let s = step_cauchy(&one, &p, 0.1).unwrap();
        assert!(s.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
    }

    #[test]
    fn dt_bound_enforced() {
        let p = problem(WindowBoundary::Dirichlet);
        let u = Field::from_fn(-5.0, 5.0, 0.1, |_| 0.5).unwrap();
        assert!(step_cauchy(&u, &p, 0.5).is_err());
        assert!(step_cauchy(&u, &p, 0.4).is_ok());
    }

    #[test]
    fn periodic_wrap_matches_direct_sum() {
        let p = problem(WindowBoundary::Periodic);
        let n = 37;
        let u: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).sin().abs()).collect();
        let conv = p.convolve(&u);
        let r = p.stencil.radius as isize;
        for i in 0..n {
            let mut s = 0.0;
            for k in -r..=r {
                let j = (i as isize - k).rem_euclid(n as isize) as usize;
                s += p.stencil.weight(k) * u[j];
            }
            assert!((s - conv[i]).abs() < 1e-13);
        }
    }
}
