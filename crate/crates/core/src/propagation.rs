//! Level-set tracking of simulated fronts and spreading-speed estimates.

use crate::dispersion::{spreading_speeds, SpeedPair};
use crate::error::{invalid, Result};
use crate::evolution::{step_cauchy_in_place, CauchyProblem, Field, Reaction, WindowBoundary};
use crate::kernels::Dispersal;
use crate::scalar::Scalar;
use crate::spectral::grid_steps;

/// Positions of the outermost crossings of level θ over time.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontTrace<T> {
    pub times: Vec<T>,
    /// Largest x with u(x) ≥ θ; `None` when the level set is empty.
    pub x_right: Vec<Option<T>>,
    /// Smallest x with u(x) ≥ θ.
    pub x_left: Vec<Option<T>>,
    pub theta: T,
}

impl<T: Scalar> FrontTrace<T> {
    pub fn new(theta: T) -> Result<Self> {
        if !(theta > T::zero() && theta < T::one()) {
            return invalid(format!("level θ must lie in (0, 1), got {theta}"));
        }
        Ok(Self {
            times: Vec::new(),
            x_right: Vec::new(),
            x_left: Vec::new(),
            theta,
        })
    }

    /// Appends the crossings of one snapshot.
    pub fn record(&mut self, u: &Field<T>) {
        let (l, r) = crossings(u, self.theta);
        self.times.push(u.time);
        self.x_left.push(l);
        self.x_right.push(r);
    }

    /// Largest backward step of either front after `t0` (outward motion positive).
    pub fn max_retreat(&self, t0: T) -> T {
        let mut worst = T::zero();
        let mut prev: Option<(T, T)> = None;
        for ((t, l), r) in self.times.iter().zip(&self.x_left).zip(&self.x_right) {
            if *t < t0 {
                continue;
            }
            if let (Some(l), Some(r)) = (l, r) {
                if let Some((pl, pr)) = prev {
                    worst = worst.max(pr - *r).max(*l - pl);
                }
                prev = Some((*l, *r));
            }
        }
        worst
    }
}

/// Outermost crossings of level θ, linearly interpolated between nodes.
fn crossings<T: Scalar>(u: &Field<T>, theta: T) -> (Option<T>, Option<T>) {
    let v = &u.values;
    let Some(ir) = v.iter().rposition(|x| *x >= theta) else {
        return (None, None);
    };
    let il = v.iter().position(|x| *x >= theta).expect("nonempty level set");
    let right = if ir + 1 < v.len() {
        u.x(ir) + u.h * (v[ir] - theta) / (v[ir] - v[ir + 1])
    } else {
        u.x(ir)
    };
    let left = if il > 0 {
        u.x(il) - u.h * (v[il] - theta) / (v[il] - v[il - 1])
    } else {
        u.x(il)
    };
    (Some(left), Some(right))
}

/// Crossings of level θ for every snapshot.
pub fn track_fronts<T: Scalar>(snapshots: &[Field<T>], theta: T) -> Result<FrontTrace<T>> {
    let mut ft = FrontTrace::new(theta)?;
    if let Some(first) = snapshots.first() {
        let n = first.values.len();
        if snapshots
            .iter()
            .any(|s| s.values.len() != n || s.x_lo != first.x_lo || s.h != first.h)
        {
            return invalid("snapshots do not share one grid");
        }
    }
    for s in snapshots {
        ft.record(s);
    }
    Ok(ft)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate<T> {
    /// Least-squares slope of front position against time.
    pub speed: T,
    pub stderr: T,
    pub window: (T, T),
    pub samples: usize,
}

/// Minimum post-burn-in samples for a regression.
pub const MIN_SAMPLES: usize = 10;

/// Least-squares slope of (t, x) pairs.
pub fn fit_line<T: Scalar>(pts: &[(T, T)]) -> Result<SpeedEstimate<T>> {
    if pts.len() < MIN_SAMPLES {
        return invalid(format!(
            "{} samples after burn-in; need at least {MIN_SAMPLES}",
            pts.len()
        ));
    }
    let n = T::from_usize_lossy(pts.len());
    let tm = pts.iter().map(|p| p.0).sum::<T>() / n;
    let xm = pts.iter().map(|p| p.1).sum::<T>() / n;
    let sxx: T = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let sxy: T = pts.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    if !(sxx > T::zero()) {
        return invalid("samples span no time");
    }
    let slope = sxy / sxx;
    let icpt = xm - slope * tm;
    let ssr: T = pts
        .iter()
        .map(|p| {
            let e = p.1 - icpt - slope * p.0;
            e * e
        })
        .sum();
    let stderr = (ssr / (n - T::two()) / sxx).sqrt();
    Ok(SpeedEstimate {
        speed: slope,
        stderr,
        window: (pts[0].0, pts[pts.len() - 1].0),
        samples: pts.len(),
    })
}

/// `(right, left)` front speeds from samples with t ≥ `burn_in`.
pub fn estimate_speeds<T: Scalar>(
    ft: &FrontTrace<T>,
    burn_in: T,
) -> Result<(SpeedEstimate<T>, SpeedEstimate<T>)> {
    let pick = |xs: &[Option<T>]| -> Vec<(T, T)> {
        ft.times
            .iter()
            .zip(xs)
            .filter(|(t, _)| **t >= burn_in)
            .filter_map(|(t, x)| x.map(|x| (*t, x)))
            .collect()
    };
    Ok((fit_line(&pick(&ft.x_right))?, fit_line(&pick(&ft.x_left))?))
}

/// Burn-in default: 10 time units or 10% of the horizon, whichever is larger.
pub fn default_burn_in<T: Scalar>(t_end: T) -> T {
    T::lit(10.0).max(t_end * T::lit(0.1))
}

/// Settings of a spreading experiment on the truncated line.
#[derive(Debug, Clone, Copy)]
pub struct SpreadingConfig<T> {
    pub window: (T, T),
    pub h: T,
    pub dt: T,
    pub t_end: T,
    /// Added to c₊ (subtracted from c₋) for the exterior check.
    pub margin: T,
    pub theta: T,
    /// `None` selects [`default_burn_in`].
    pub burn_in: Option<T>,
    /// Interior interval [f·c₋, f·c₊].
    pub interior_fraction: T,
    pub interior_level: T,
    pub exterior_level: T,
    /// Relative speed tolerance.
    pub speed_tol: T,
    /// Initial data cos²(πx/2w) on |x| < w.
    pub bump_half_width: T,
    /// Time between recorded front positions.
    pub record_every: T,
}

impl<T: Scalar> Default for SpreadingConfig<T> {
    fn default() -> Self {
        Self {
            window: (T::lit(-250.0), T::lit(250.0)),
            h: T::lit(0.1),
            dt: T::lit(0.01),
            t_end: T::lit(80.0),
            margin: T::lit(0.3),
            theta: T::half(),
            burn_in: Some(T::lit(20.0)),
            interior_fraction: T::half(),
            interior_level: T::lit(0.95),
            exterior_level: T::lit(0.05),
            speed_tol: T::lit(0.05),
            bump_half_width: T::lit(5.0),
            record_every: T::half(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check<T> {
    pub name: String,
    pub value: T,
    pub threshold: T,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct SpreadingReport<T> {
    pub speeds: SpeedPair<T>,
    pub right: SpeedEstimate<T>,
    pub left: SpeedEstimate<T>,
    /// (measured − formula)/|formula|; `None` for an infinite formula speed.
    pub rel_err_right: Option<T>,
    pub rel_err_left: Option<T>,
    pub interior: (T, T),
    pub interior_min: T,
    pub exterior_right_max: Option<T>,
    pub exterior_left_max: Option<T>,
    pub trace: FrontTrace<T>,
    pub final_state: Field<T>,
    pub checks: Vec<Check<T>>,
    /// Sides skipped because the formula speed is infinite.
    pub notes: Vec<String>,
    pub pass: bool,
}

/// Runs the Cauchy problem from a compact bump and checks invasion inside the
/// speed interval, decay outside it and the measured front speeds.
pub fn verify_spreading<T: Scalar, K: Dispersal<T> + ?Sized>(
    k: &K,
    d: T,
    f: &Reaction<T>,
    cfg: &SpreadingConfig<T>,
) -> Result<SpreadingReport<T>> {
    let speeds = spreading_speeds(k, d, f.f0())?;
    let (lo, hi) = cfg.window;
    let nodes = grid_steps(hi - lo, cfg.h)?;
    let p = CauchyProblem::new(k, d, f.clone(), cfg.h, nodes, WindowBoundary::Dirichlet)?;
    let w = cfg.bump_half_width;
    let half_pi = T::FRAC_PI_2();
    let mut u = Field::from_fn(lo, hi, cfg.h, |x| {
        if x.abs() < w {
            let c = (half_pi * x / w).cos();
            c * c
        } else {
            T::zero()
        }
    })?;
    let mut trace = FrontTrace::new(cfg.theta)?;
    trace.record(&u);
    let steps = (cfg.t_end / cfg.dt).round().to_usize().unwrap_or(0);
    let every = (cfg.record_every / cfg.dt).round().to_usize().unwrap_or(1).max(1);
    for s in 1..=steps {
        step_cauchy_in_place(&mut u, &p, cfg.dt)?;
        if s % every == 0 || s == steps {
            trace.record(&u);
        }
    }
    let burn_in = cfg.burn_in.unwrap_or_else(|| default_burn_in(cfg.t_end));
    let (right, left) = estimate_speeds(&trace, burn_in)?;
    let t = u.time;

    let mut checks = Vec::new();
    let mut notes = Vec::new();
    let fr = cfg.interior_fraction;
    let finite_or = |v: T, alt: T| if v.is_finite() { v } else { alt };
    let a1 = fr * finite_or(speeds.c_minus, -speeds.c_plus.abs().min(T::one()));
    let b1 = fr * finite_or(speeds.c_plus, speeds.c_minus.abs().min(T::one()));
    let (ia, ib) = (a1 * t, b1 * t);
    let interior_min = u
        .nodes()
        .iter()
        .zip(&u.values)
        .filter(|(x, _)| **x >= ia && **x <= ib)
        .map(|(_, v)| *v)
        .fold(T::infinity(), T::min);
    checks.push(Check {
        name: format!("interior min u on [{ia}, {ib}]"),
        value: interior_min,
        threshold: cfg.interior_level,
        pass: interior_min >= cfg.interior_level,
    });

    let outside_max = |pred: &dyn Fn(T) -> bool| {
        u.nodes()
            .iter()
            .zip(&u.values)
            .filter(|(x, _)| pred(**x))
            .map(|(_, v)| *v)
            .fold(T::zero(), T::max)
    };
    let mut rel_err_right = None;
    let mut exterior_right_max = None;
    if speeds.c_plus.is_finite() {
        let edge = (speeds.c_plus + cfg.margin) * t;
        let m = outside_max(&|x| x >= edge);
        exterior_right_max = Some(m);
        checks.push(Check {
            name: format!("max u beyond x = {edge}"),
            value: m,
            threshold: cfg.exterior_level,
            pass: m <= cfg.exterior_level,
        });
        let e = (right.speed - speeds.c_plus) / speeds.c_plus.abs();
        rel_err_right = Some(e);
        checks.push(Check {
            name: "right speed relative error".into(),
            value: e.abs(),
            threshold: cfg.speed_tol,
            pass: e.abs() <= cfg.speed_tol,
        });
    } else {
        notes.push("c_plus = inf".into());
    }
    let mut rel_err_left = None;
    let mut exterior_left_max = None;
    if speeds.c_minus.is_finite() {
        let edge = (speeds.c_minus - cfg.margin) * t;
        let m = outside_max(&|x| x <= edge);
        exterior_left_max = Some(m);
        checks.push(Check {
            name: format!("max u below x = {edge}"),
            value: m,
            threshold: cfg.exterior_level,
            pass: m <= cfg.exterior_level,
        });
        let e = (left.speed - speeds.c_minus) / speeds.c_minus.abs();
        rel_err_left = Some(e);
        checks.push(Check {
            name: "left speed relative error".into(),
            value: e.abs(),
            threshold: cfg.speed_tol,
            pass: e.abs() <= cfg.speed_tol,
        });
    } else {
        notes.push("c_minus = -inf".into());
    }
    let pass = checks.iter().all(|c| c.pass);
    Ok(SpreadingReport {
        speeds,
        right,
        left,
        rel_err_right,
        rel_err_left,
        interior: (ia, ib),
        interior_min,
        exterior_right_max,
        exterior_left_max,
        trace,
        final_state: u,
        checks,
        notes,
        pass,
    })
}
