//! Lower bounds for the principal eigenvalue from piecewise-exponential test
//! functions, via the sup-inf characterization.

use crate::dispersion::lambda_infinity;
use crate::error::{invalid, Error, Result};
use crate::kernels::{partial_moment, Dispersal};
use crate::quadrature::GaussLegendre;
use crate::scalar::Scalar;

use super::eigen::{collatz_wielandt_log, principal_eigen, EigenOptions};
use super::operator::build_operator;

#[derive(Debug, Clone, Copy)]
pub struct CertifyOptions<T> {
    pub h: T,
    /// σ ladder step in units of 1/M.
    pub sigma_step: T,
    pub sigma_steps: usize,
    /// Evaluation points per grid step near segment joints.
    pub fine_factor: usize,
    pub eigen: EigenOptions<T>,
    /// Also solve for λ_p on the certificate domain.
    pub solve_eigen: bool,
}

impl<T: Scalar> Default for CertifyOptions<T> {
    fn default() -> Self {
        Self {
            h: T::lit(0.2),
            sigma_step: T::lit(0.05),
            sigma_steps: 4000,
            fine_factor: 10,
            eigen: EigenOptions::default(),
            solve_eigen: true,
        }
    }
}

/// Constants of the test function, fixed before the domain is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificatePlan<T> {
    pub lambda_inf: T,
    pub nu0: T,
    pub c: T,
    /// Support radius.
    pub m: T,
    pub sigma: T,
    /// min of the two one-sided moments at ν₀ ∓ σ.
    pub mu_sigma: T,
    /// Largest of the full moment at ν₀ and the two one-sided moments.
    pub moment_bound: T,
    /// Number of decrement steps on each side.
    pub k: usize,
    /// Smallest admissible half-width is strictly above 4M(k+1).
    pub required_l: T,
}

#[derive(Debug, Clone)]
pub struct Certificate<T> {
    pub plan: CertificatePlan<T>,
    pub l: T,
    /// Half-width of the domain the test function lives on: l, or 2l with drift.
    pub domain_half_width: T,
    /// min over grid nodes of (Aφ)_i/φ_i for the discrete operator A.
    pub achieved_inf: T,
    pub lower_bound: T,
    /// min of (Lφ)/φ for the continuous operator, sampled finely near joints.
    pub continuum_inf: T,
    /// Bracket of the discrete λ_p on the same domain, when solved.
    pub lambda_bracket: Option<(T, T)>,
    pub nodes: Vec<T>,
    /// log φ at `nodes` (φ spans too many orders of magnitude to store directly).
    pub log_phi_test: Vec<T>,
}

/// Chooses σ (smallest ladder value meeting the large-σ conditions) and k.
pub fn certificate_plan<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
    epsilon: T,
    opts: &CertifyOptions<T>,
) -> Result<CertificatePlan<T>> {
    if !(epsilon > T::zero()) {
        return invalid("epsilon must be positive");
    }
    let Some(m) = k.support_radius() else {
        return invalid("certificate needs a compactly supported kernel");
    };
    let disp = lambda_infinity(k, c)?;
    let nu0 = disp.nu0.unwrap_or(T::zero());
    let lam = disp.lambda_inf;
    let ac = c.abs();
    for step in 1..=opts.sigma_steps {
        let sigma = opts.sigma_step * T::from_usize_lossy(step) / m;
        let right = partial_moment(k, T::zero(), m, nu0 - sigma, 0);
        let left = partial_moment(k, -m, T::zero(), nu0 + sigma, 0);
        let mu = right.min(left);
        let ok = if c == T::zero() {
            mu > T::one()
        } else {
            let ry = partial_moment(k, T::zero(), m, nu0 - sigma, 1);
            let ly = partial_moment(k, -m, T::zero(), nu0 + sigma, 1);
            mu > ac * (nu0.abs() + sigma) + lam + ac / m && ry.min(ly) > ac
        };
        if !ok {
            continue;
        }
        let bound = k.exp_moment(nu0).max(right).max(left);
        let kk = if epsilon >= bound {
            1
        } else {
            let q = -(T::one() - epsilon / bound).ln();
            (sigma * m / q).floor().to_usize().unwrap_or(usize::MAX - 1) + 1
        };
        return Ok(CertificatePlan {
            lambda_inf: lam,
            nu0,
            c,
            m,
            sigma,
            mu_sigma: mu,
            moment_bound: bound,
            k: kk,
            required_l: T::lit(4.0) * m * T::from_usize_lossy(kk + 1),
        });
    }
    Err(Error::Infeasible(format!(
        "no σ up to {} satisfies the large-σ conditions for c = {c}",
        opts.sigma_step * T::from_usize_lossy(opts.sigma_steps) / m
    )))
}

/// Piecewise-exponential test function given in log form.
struct TestFunction<T> {
    nu0: T,
    delta: T,
    seg: T,
    l: T,
    k: usize,
    c_sign: i8,
}

impl<T: Scalar> TestFunction<T> {
    fn new(p: &CertificatePlan<T>, l: T) -> Self {
        let kf = T::from_usize_lossy(p.k);
        Self {
            nu0: p.nu0,
            delta: p.sigma / kf,
            seg: l / (kf + T::one()),
            l,
            k: p.k,
            c_sign: if p.c > T::zero() {
                1
            } else if p.c < T::zero() {
                -1
            } else {
                0
            },
        }
    }

    fn segment(&self, ax: T) -> usize {
        (ax / self.seg).floor().to_usize().unwrap_or(0).min(self.k)
    }

    /// (log φ, slope of the exponential part) at x; `right` selects the one-sided
    /// branch at a joint.
    fn eval(&self, x: T, right: bool) -> (T, T) {
        let kf = T::from_usize_lossy(self.k);
        let outer = kf * T::half() * self.delta * self.l;
        let on_right = if x == self.l { right } else { x > self.l };
        let on_left = if x == -self.l { !right } else { x < -self.l };
        if on_right {
            let s = self.nu0 - kf * self.delta;
            let mut v = s * x + outer;
            if self.c_sign > 0 {
                v += ((self.l + self.l - x) / self.l).ln();
            }
            return (v, s);
        }
        if on_left {
            let s = self.nu0 + kf * self.delta;
            let mut v = s * x + outer;
            if self.c_sign < 0 {
                v += ((self.l + self.l + x) / self.l).ln();
            }
            return (v, s);
        }
        let ax = x.abs();
        let mut j = self.segment(ax);
        // at a joint the left/right branch decides the segment
        let at_joint = j > 0 && T::from_usize_lossy(j) * self.seg == ax;
        if at_joint && ((x > T::zero()) != right) {
            j -= 1;
        }
        let jf = T::from_usize_lossy(j);
        let sum = self.delta * jf * (jf + T::one()) * T::half() * self.seg;
        if x >= T::zero() {
            let s = self.nu0 - jf * self.delta;
            (s * x + sum, s)
        } else {
            let s = self.nu0 + jf * self.delta;
            (s * x + sum, s)
        }
    }

    fn log_phi(&self, x: T) -> T {
        self.eval(x, true).0
    }

    /// φ'/φ, taking the smaller one-sided value.
    fn log_derivative_min(&self, x: T) -> T {
        let two_l = self.l + self.l;
        let taper = |x: T, right: bool| -> T {
            let beyond_r = if x == self.l { right } else { x > self.l };
            let beyond_l = if x == -self.l { !right } else { x < -self.l };
            if self.c_sign > 0 && beyond_r {
                -T::one() / (two_l - x)
            } else if self.c_sign < 0 && beyond_l {
                T::one() / (two_l + x)
            } else {
                T::zero()
            }
        };
        let (_, sr) = self.eval(x, true);
        let (_, sl) = self.eval(x, false);
        (sr + taper(x, true)).min(sl + taper(x, false))
    }

    fn joints(&self) -> Vec<T> {
        let mut v = Vec::new();
        for j in 1..=self.k {
            let p = T::from_usize_lossy(j) * self.seg;
            v.push(p);
            v.push(-p);
        }
        v.push(self.l);
        v.push(-self.l);
        v
    }
}

/// Builds the test function on a domain of half-width l (no drift) or 2l, then
/// evaluates its Collatz–Wielandt lower bound for the discrete operator.
pub fn certify_lower_bound<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
    l: T,
    epsilon: T,
    opts: &CertifyOptions<T>,
) -> Result<Certificate<T>> {
    let plan = certificate_plan(k, c, epsilon, opts)?;
    if !(l > plan.required_l) {
        return invalid(format!(
            "l = {l} must exceed 4M(k+1) = {} for k = {}",
            plan.required_l, plan.k
        ));
    }
    let tf = TestFunction::new(&plan, l);
    let dom = if c == T::zero() { l } else { l + l };
    let op = build_operator(k, c, dom, opts.h)?;
    let nodes = op.unknown_nodes().to_vec();
    let log_phi: Vec<T> = nodes.iter().map(|&x| tf.log_phi(x)).collect();
    let (achieved_inf, _) = collatz_wielandt_log(&op.matrix, &log_phi);

    let continuum_inf = continuum_infimum(k, c, &tf, dom, &nodes, opts);

    let lambda_bracket = if opts.solve_eigen {
        let p = principal_eigen(&op, &opts.eigen)?;
        Some((p.lower, p.upper))
    } else {
        None
    };
    Ok(Certificate {
        plan,
        l,
        domain_half_width: dom,
        achieved_inf,
        lower_bound: achieved_inf,
        continuum_inf,
        lambda_bracket,
        nodes,
        log_phi_test: log_phi,
    })
}

fn continuum_infimum<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    c: T,
    tf: &TestFunction<T>,
    dom: T,
    nodes: &[T],
    opts: &CertifyOptions<T>,
) -> T {
    let rule = GaussLegendre::<T>::new(16);
    let m = k.support_radius().expect("compact support checked");
    let joints = tf.joints();
    let kb = k.breakpoints();
    let panel = k.length_scale() / T::lit(4.0);
    let eval = |x: T| -> T {
        let lphi = tf.log_phi(x);
        let lo = (-m).max(x - dom);
        let hi = m.min(x + dom);
        let mut pts = vec![lo, hi];
        pts.extend(kb.iter().copied().filter(|&b| b > lo && b < hi));
        pts.extend(
            joints
                .iter()
                .map(|&j| x - j)
                .filter(|&b| b > lo && b < hi),
        );
        pts.sort_by(|p, q| p.partial_cmp(q).expect("finite"));
        let f = |y: T| {
            let j = k.density(y);
            if j == T::zero() {
                T::zero()
            } else {
                j * (tf.log_phi(x - y) - lphi).exp()
            }
        };
        let mut s = T::zero();
        for w in pts.windows(2) {
            let panels = ((w[1] - w[0]) / panel).ceil().to_usize().unwrap_or(1).max(1);
            s += rule.integrate(&f, w[0], w[1], panels);
        }
        s + c * tf.log_derivative_min(x)
    };
    let mut best = T::infinity();
    for &x in nodes {
        best = best.min(eval(x));
    }
    let h = opts.h;
    let ff = opts.fine_factor.max(1);
    for &j in &joints {
        for i in 0..=2 * ff {
            let x = j - h + h * T::from_usize_lossy(i) / T::from_usize_lossy(ff);
            if x > -dom && x < dom {
                best = best.min(eval(x));
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::Kernel;

    #[test]
    fn test_function_is_continuous() {
        let k = Kernel::<f64>::truncated_gaussian(1.0, 3.0).unwrap();
        let opts = CertifyOptions::default();
        for c in [0.0, 0.5, -0.5] {
            let plan = certificate_plan(&k, c, 0.2, &opts).unwrap();
            let l = plan.required_l * 1.1;
            let tf = TestFunction::new(&plan, l);
            for j in tf.joints() {
                let a = tf.eval(j, false).0;
                let b = tf.eval(j, true).0;
                assert!((a - b).abs() < 1e-9 * (1.0 + a.abs()), "c={c} joint {j}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_small_domains_and_unbounded_support() {
        let k = Kernel::<f64>::truncated_gaussian(1.0, 3.0).unwrap();
        let opts = CertifyOptions::default();
        assert!(certify_lower_bound(&k, 0.0, 10.0, 0.05, &opts).is_err());
        let lap = Kernel::<f64>::laplace(2.0).unwrap();
        assert!(certificate_plan(&lap, 0.0, 0.05, &opts).is_err());
    }
}
