use crate::error::{invalid, Error, Result};
use crate::kernels::Dispersal;
use crate::scalar::Scalar;
use crate::spectral::{build_operator, principal_eigen, Boundary, DiscreteOperator, EigenOptions};

use super::cauchy::{Field, Trajectory};
use super::reaction::Reaction;

/// V_t = d∫_{−l}^{l}J(x−y)V(y)dy − dV + cV_x + f(V) on [−l, l], V = 0 at the inflow end.
///
/// The spatial operator is d·A where A discretizes ∫J(x−y)φ(y)dy + (c/d)φ'.
#[derive(Debug, Clone)]
pub struct FrameProblem<T> {
    pub op: DiscreteOperator<T>,
    pub d: T,
    pub c: T,
    pub reaction: Reaction<T>,
}

impl<T: Scalar> FrameProblem<T> {
    pub fn new<K: Dispersal<T> + ?Sized>(
        k: &K,
        d: T,
        c: T,
        reaction: Reaction<T>,
        l: T,
        h: T,
    ) -> Result<Self> {
        if !(d > T::zero()) {
            return invalid("diffusion rate d must be positive");
        }
        Ok(Self {
            op: build_operator(k, c / d, l, h)?,
            d,
            c,
            reaction,
        })
    }

    pub fn h(&self) -> T {
        self.op.h
    }

    pub fn l(&self) -> T {
        self.op.l
    }

    /// 0.9/(d + L_f + |c|/h).
    pub fn dt_max(&self, sup: T) -> T {
        T::lit(0.9) / (self.d + self.reaction.lipschitz(sup) + self.c.abs() / self.op.h)
    }

    /// Field on all nodes of [−l, l].
    pub fn field(&self, values: Vec<T>) -> Field<T> {
        Field::new(self.op.nodes[0], self.op.h, values)
    }

    pub fn field_from_fn(&self, f: impl Fn(T) -> T) -> Field<T> {
        let mut v: Vec<T> = self.op.nodes.iter().map(|&x| f(x)).collect();
        self.pin(&mut v);
        self.field(v)
    }

    fn pin(&self, v: &mut [T]) {
        match self.op.bc {
            Boundary::Right => *v.last_mut().expect("nonempty") = T::zero(),
            Boundary::Left => v[0] = T::zero(),
            Boundary::None => {}
        }
    }

    fn unknowns<'a>(&self, v: &'a [T]) -> &'a [T] {
        &v[self.op.offset..self.op.offset + self.op.n()]
    }

    /// Right-hand side on the unknowns.
    fn rhs(&self, v: &[T]) -> Vec<T> {
        let inner = self.unknowns(v);
        let av = self.op.matrix.matvec(inner);
        av.iter()
            .zip(inner)
            .map(|(a, u)| self.d * *a - self.d * *u + self.reaction.f(*u))
            .collect()
    }

    /// Kernel term ∫_{−l}^{l}J(e−y)V(y)dy at the inflow endpoint e, with the
    /// trapezoid weights of the operator.
    pub fn endpoint_integral(&self, v: &[T]) -> T {
        let n = self.op.nodes.len() - 1;
        let e = match self.op.bc {
            Boundary::Left => 0,
            _ => n,
        };
        let mut s = T::zero();
        for (j, vj) in v.iter().enumerate() {
            let mut w = self.op.stencil.weight(e as isize - j as isize);
            if j == 0 || j == n {
                w *= T::half();
            }
            s += w * *vj;
        }
        s
    }

    /// V'(e) + (d/c)∫J(e−y)V(y)dy at the inflow endpoint e, with a second-order
    /// one-sided difference; 0 for admissible data. Zero when c = 0.
    pub fn compatibility_residual(&self, v: &[T]) -> T {
        let h = self.op.h;
        let n = v.len() - 1;
        let three = T::lit(3.0);
        let four = T::lit(4.0);
        let deriv = match self.op.bc {
            Boundary::Right => (three * v[n] - four * v[n - 1] + v[n - 2]) / (h + h),
            Boundary::Left => (-three * v[0] + four * v[1] - v[2]) / (h + h),
            Boundary::None => return T::zero(),
        };
        deriv + self.d / self.c * self.endpoint_integral(v)
    }
}

/// One explicit Euler step; the inflow endpoint stays pinned at 0.
pub fn step_frame<T: Scalar>(v: &Field<T>, p: &FrameProblem<T>, dt: T) -> Result<Field<T>> {
    let mut out = v.clone();
    step_frame_in_place(&mut out, p, dt)?;
    Ok(out)
}

pub fn step_frame_in_place<T: Scalar>(v: &mut Field<T>, p: &FrameProblem<T>, dt: T) -> Result<()> {
    if !(dt > T::zero()) {
        return invalid("dt must be positive");
    }
    let bound = p.dt_max(v.sup());
    if dt > bound {
        return invalid(format!("dt = {dt} exceeds the positivity bound {bound}"));
    }
    let r = p.rhs(&v.values);
    let off = p.op.offset;
    for (i, ri) in r.iter().enumerate() {
        v.values[off + i] += dt * *ri;
    }
    if let Some(i) = v.values.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!("frame value at node {i}")));
    }
    p.pin(&mut v.values);
    v.time += dt;
    Ok(())
}

pub fn simulate_frame<T: Scalar>(
    v0: Field<T>,
    p: &FrameProblem<T>,
    dt: T,
    t_end: T,
    stride: usize,
) -> Result<Trajectory<T>> {
    let steps = (t_end / dt).round().to_usize().unwrap_or(0);
    let stride = stride.max(1);
    let mut v = v0;
    let mut traj = Trajectory {
        snapshots: vec![v.clone()],
    };
    for s in 1..=steps {
        step_frame_in_place(&mut v, p, dt)?;
        if s % stride == 0 || s == steps {
            traj.snapshots.push(v.clone());
        }
    }
    Ok(traj)
}

/// Initial data satisfying the endpoint compatibility condition.
#[derive(Debug, Clone)]
pub struct AdmissibleInitial<T> {
    pub field: Field<T>,
    pub c: T,
    /// Coefficient of the corrector φ_δ.
    pub m: T,
    pub delta: T,
    pub residual: T,
    /// sup |V₀ − u₀|.
    pub distance: T,
}

/// |residual| below which data counts as already admissible.
const ADMISSIBLE_TOL: f64 = 1e-10;

/// Corrects `u0` (values on all nodes, 0 at the inflow end) into admissible data
/// within sup-distance `eps`: V₀ = Ṽ₀ + mφ_δ, where Ṽ₀ = u₀ with its last three
/// nodes flattened to 0 and φ_δ(x) = ψ(dist(x, e)/(2δ)), ψ(t) = t(2 − t) on [0, 1]
/// and 1 beyond, so φ_δ'(e) = ∓1/δ. δ is halved until |m| < eps/2.
pub fn make_admissible<T: Scalar>(
    u0: &Field<T>,
    p: &FrameProblem<T>,
    eps: T,
) -> Result<AdmissibleInitial<T>> {
    if !(eps > T::zero()) {
        return invalid("eps must be positive");
    }
    let n = u0.values.len();
    if n != p.op.nodes.len() {
        return invalid("initial data does not match the frame grid");
    }
    if u0.values.iter().any(|v| *v < T::zero()) {
        return invalid("initial data must be nonnegative");
    }
    let passthrough = |residual: T| AdmissibleInitial {
        field: u0.clone(),
        c: p.c,
        m: T::zero(),
        delta: T::zero(),
        residual,
        distance: T::zero(),
    };
    let right = match p.op.bc {
        Boundary::None => return Ok(passthrough(T::zero())),
        Boundary::Right => true,
        Boundary::Left => false,
    };
    let end = if right { n - 1 } else { 0 };
    if u0.values[end] != T::zero() {
        return invalid("initial data must vanish at the inflow endpoint");
    }
    let r0 = p.compatibility_residual(&u0.values);
    if r0.abs() <= T::lit(ADMISSIBLE_TOL) {
        return Ok(passthrough(r0));
    }
    // distance from the inflow endpoint, in nodes
    let dist = |i: usize| if right { n - 1 - i } else { i };
    let mut base = u0.values.clone();
    for (i, v) in base.iter_mut().enumerate() {
        if dist(i) < 3 {
            *v = T::zero();
        }
    }
    let a = p.compatibility_residual(&base);
    let h = p.h();
    let mut delta = T::one();
    while delta >= h {
        let corr: Vec<T> = (0..n)
            .map(|i| {
                let t = h * T::from_usize_lossy(dist(i)) / (delta + delta);
                if t >= T::one() {
                    T::one()
                } else {
                    t * (T::two() - t)
                }
            })
            .collect();
        let b = p.compatibility_residual(&corr);
        let m = -a / b;
        if m.is_finite() && m >= T::zero() && m < eps * T::half() {
            let vals: Vec<T> = base.iter().zip(&corr).map(|(x, y)| *x + m * *y).collect();
            let distance = vals
                .iter()
                .zip(&u0.values)
                .map(|(x, y)| (*x - *y).abs())
                .fold(T::zero(), T::max);
            if distance < eps {
                let residual = p.compatibility_residual(&vals);
                return Ok(AdmissibleInitial {
                    field: Field::new(u0.x_lo, u0.h, vals),
                    c: p.c,
                    m,
                    delta,
                    residual,
                    distance,
                });
            }
        }
        delta = delta * T::half();
    }
    Err(Error::Infeasible(format!(
        "no δ ≥ {h} brings the correction below eps = {eps}"
    )))
}

#[derive(Debug, Clone, Copy)]
pub struct StationaryOptions<T> {
    /// Time-1 displacement at which the run counts as converged.
    pub tol: T,
    pub t_max: T,
    /// Seed amplitude on the principal eigenfunction.
    pub seed: T,
    /// Fraction of the positivity bound used as time step.
    pub dt_fraction: T,
    pub eigen: EigenOptions<T>,
}

impl<T: Scalar> Default for StationaryOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-8),
            t_max: T::lit(1e4),
            seed: T::lit(0.01),
            dt_fraction: T::one(),
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub enum StationaryOutcome<T> {
    /// λ_p ≤ 0: every solution decays to 0.
    Extinct { lambda_p: T },
    Persistent {
        field: Field<T>,
        lambda_p: T,
        /// Seed amplitude actually used.
        seed: T,
        /// Largest decrease of any node over one step (0 for a monotone run).
        max_decrease: T,
        displacement: T,
    },
}

/// λ_p of d(J∗φ − φ) + cφ' + f'(0)φ on the discrete frame.
pub fn frame_lambda<T: Scalar>(p: &FrameProblem<T>, opts: &EigenOptions<T>) -> Result<(T, Vec<T>)> {
    let e = principal_eigen(&p.op, opts)?;
    Ok((p.d * e.lambda + p.reaction.f0() - p.d, e.phi))
}

/// Integrates until the time-1 displacement drops below `tol`.
pub fn relax<T: Scalar>(
    v0: Field<T>,
    p: &FrameProblem<T>,
    opts: &StationaryOptions<T>,
    mut on_step: impl FnMut(&Field<T>, &Field<T>),
) -> Result<(Field<T>, T)> {
    let dt = p.dt_max(v0.sup().max(T::one())) * opts.dt_fraction;
    let per_unit = (T::one() / dt).ceil().to_usize().unwrap_or(1).max(1);
    let dt = T::one() / T::from_usize_lossy(per_unit);
    let mut v = v0;
    let mut t = T::zero();
    let mut disp = T::infinity();
    while t < opts.t_max {
        let start = v.clone();
        for _ in 0..per_unit {
            let prev = v.clone();
            step_frame_in_place(&mut v, p, dt)?;
            on_step(&prev, &v);
        }
        t += T::one();
        disp = v.sup_distance(&start);
        if disp < opts.tol {
            return Ok((v, disp));
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.t_max.to_usize().unwrap_or(0),
        detail: format!("time-1 displacement {disp} at t_max; last sup {}", v.sup()),
    })
}

/// Positive stationary state of the frame problem, or extinction when λ_p ≤ 0.
pub fn stationary_state<T: Scalar>(
    p: &FrameProblem<T>,
    opts: &StationaryOptions<T>,
) -> Result<StationaryOutcome<T>> {
    let (lambda_p, phi) = frame_lambda(p, &opts.eigen)?;
    if lambda_p <= T::zero() {
        return Ok(StationaryOutcome::Extinct { lambda_p });
    }
    // halve the seed until δφ is a lower solution at every node
    let mut seed = opts.seed;
    let v0 = loop {
        let v = p.field(phi.iter().map(|x| *x * seed).collect());
        if p.rhs(&v.values).iter().all(|r| *r >= T::zero()) {
            break v;
        }
        seed = seed * T::half();
        if seed < T::lit(1e-12) {
            return Err(Error::Infeasible("no small multiple of φ is a lower solution".into()));
        }
    };
    let mut max_decrease = T::zero();
    let (field, displacement) = relax(v0, p, opts, |prev, next| {
        for (a, b) in prev.values.iter().zip(&next.values) {
            max_decrease = max_decrease.max(*a - *b);
        }
    })?;
    Ok(StationaryOutcome::Persistent {
        field,
        lambda_p,
        seed,
        max_decrease,
        displacement,
    })
}

#[derive(Debug, Clone)]
pub struct UniquenessReport<T> {
    pub lambda_p: T,
    pub from_below: Field<T>,
    pub from_above: Field<T>,
    pub distance: T,
}

/// Relaxes a small eigenfunction multiple and admissible data of height 2 (see
/// [`compatible_ramp`]), and
/// compares the two long-time states.
pub fn uniqueness_probe<T: Scalar>(
    p: &FrameProblem<T>,
    opts: &StationaryOptions<T>,
) -> Result<UniquenessReport<T>> {
    let (lambda_p, phi) = frame_lambda(p, &opts.eigen)?;
    let seed = opts.seed;
    let below = p.field(phi.iter().map(|x| *x * seed).collect());
    let above = make_admissible(&compatible_ramp(p, T::two()), p, T::lit(0.1))?.field;
    let (a, _) = relax_or_decay(below, p, opts, lambda_p)?;
    let (b, _) = relax_or_decay(above, p, opts, lambda_p)?;
    Ok(UniquenessReport {
        lambda_p,
        distance: a.sup_distance(&b),
        from_below: a,
        from_above: b,
    })
}

/// Plateau of the given height reaching 0 at the inflow end through the layer
/// height·(t² + α(t − t²)), t = dist/w < 1. Slope and kernel integral are both
/// linear in α, so α is solved from the compatibility condition; w doubles from 1
/// until α ∈ [0, 1]. The quadratic is exact for the one-sided difference.
pub fn compatible_ramp<T: Scalar>(p: &FrameProblem<T>, height: T) -> Field<T> {
    let l = p.l();
    let dist = |x: T| match p.op.bc {
        Boundary::Right => l - x,
        Boundary::Left => x + l,
        Boundary::None => l + l,
    };
    let layer = |w: T, alpha: T| {
        p.field_from_fn(|x| {
            let t = (dist(x) / w).max(T::zero());
            if t >= T::one() {
                height
            } else {
                height * (t * t + alpha * (t - t * t))
            }
        })
    };
    if p.op.bc == Boundary::None {
        return layer(T::one(), T::zero());
    }
    let k = p.d / p.c.abs();
    let mut w = T::one();
    while w <= l {
        let i0 = p.endpoint_integral(&layer(w, T::zero()).values);
        let i1 = p.endpoint_integral(&layer(w, T::one()).values) - i0;
        let alpha = k * i0 / (height / w - k * i1);
        if alpha >= T::zero() && alpha <= T::one() {
            return layer(w, alpha);
        }
        w = w + w;
    }
    layer(l, T::one())
}

fn relax_or_decay<T: Scalar>(
    v0: Field<T>,
    p: &FrameProblem<T>,
    opts: &StationaryOptions<T>,
    lambda_p: T,
) -> Result<(Field<T>, T)> {
    if lambda_p > T::zero() {
        relax(v0, p, opts, |_, _| {})
    } else {
        let traj = super::simulate_frame(v0, p, p.dt_max(T::two()), T::lit(200.0), usize::MAX)?;
        let last = traj.snapshots.last().expect("nonempty").clone();
        Ok((last, T::zero()))
    }
}
