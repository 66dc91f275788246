use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Args;
use log::info;
use nonlocal_core::dispersion::{lambda_infinity, spreading_speeds};
use nonlocal_core::evolution::{
    make_admissible, simulate_cauchy, simulate_frame, stationary_state, step_cauchy, CauchyProblem,
    Field, FrameProblem, StationaryOptions, StationaryOutcome, Trajectory, WindowBoundary,
};
use nonlocal_core::propagation::{
    estimate_speeds, track_fronts, verify_spreading, SpreadingConfig, SpreadingReport,
};
use nonlocal_core::spectral::{
    build_operator, certificate_plan, certify_lower_bound, lambda_curve, principal_eigen,
    CertifyOptions, EigenMethod, EigenOptions,
};
use nonlocal_core::{Dispersal, Field64, Kernel64, Reaction64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{usage, Settings};
use crate::output::{RunDir, Summary};

pub struct Outcome {
    pub summary: Summary,
    pub pass: bool,
}

fn kernel(cfg: &Settings, flag: &Option<String>) -> Result<Kernel64> {
    let spec: String = cfg.required("kernel", flag.clone())?;
    Ok(Kernel64::parse(&spec)?)
}

fn reaction(cfg: &Settings, flag: &Option<String>) -> Result<Reaction64> {
    let name = cfg.get("reaction", flag.clone(), "logistic".to_string())?;
    Ok(Reaction64::parse(&name)?)
}

fn eigen_options(cfg: &Settings, tol: Option<f64>, method: &Option<String>) -> Result<EigenOptions<f64>> {
    let mut opts = EigenOptions::default();
    opts.tol = cfg.positive("tol", tol, opts.tol)?;
    opts.method = match cfg.get("method", method.clone(), "noda".to_string())?.as_str() {
        "noda" => EigenMethod::Noda,
        "power" => EigenMethod::ShiftedPower,
        other => return usage(format!("unknown method `{other}`; known: noda, power")),
    };
    Ok(opts)
}

/// cos²(πx/2w) on |x| < w.
fn bump(w: f64) -> impl Fn(f64) -> f64 {
    move |x: f64| {
        if x.abs() < w {
            (std::f64::consts::FRAC_PI_2 * x / w).cos().powi(2)
        } else {
            0.0
        }
    }
}

#[derive(Args, Debug)]
pub struct EigArgs {
    /// Kernel spec, e.g. laplace:beta=2
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Half-width of the interval (−l, l)
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Bracket width at which the eigensolver stops
    #[arg(long)]
    tol: Option<f64>,
    /// noda or power
    #[arg(long)]
    method: Option<String>,
    /// Comma-separated increasing half-widths; replaces --l
    #[arg(long)]
    l_ladder: Option<String>,
    /// Also write eigenfunction.csv (x, phi)
    #[arg(long)]
    csv: bool,
}

pub fn eig(a: &EigArgs, cfg: &Settings, dir: &RunDir) -> Result<Outcome> {
    let k = kernel(cfg, &a.kernel)?;
    let c = cfg.get("c", a.c, 0.0)?;
    let h = cfg.positive("h", a.h, 0.05)?;
    let opts = eigen_options(cfg, a.tol, &a.method)?;
    let mut s = Summary::new();
    s.str("kernel", &k.label()).num("c", c).num("h", h);
    if let Some(ls) = cfg.ladder("l-ladder", a.l_ladder.clone())? {
        info!("solving λ_p on {} half-widths", ls.len());
        let curve = lambda_curve(&k, c, &ls, h, &opts)?;
        let col = |f: fn(&nonlocal_core::spectral::CurveRow<f64>) -> f64| -> Vec<f64> {
            curve.rows.iter().map(f).collect()
        };
        s.nums("l", &ls)
            .nums("lambda", &col(|r| r.lambda))
            .nums("lower", &col(|r| r.lower))
            .nums("upper", &col(|r| r.upper))
            .bool("monotone", curve.monotone)
            .num("max_decrease", curve.max_decrease);
        return Ok(Outcome {
            summary: s,
            pass: curve.monotone,
        });
    }
    let l = cfg.positive("l", a.l, 10.0)?;
    let op = build_operator(&k, c, l, h)?;
    let e = principal_eigen(&op, &opts)?;
    s.num("l", l)
        .num("lambda", e.lambda)
        .num("lower", e.lower)
        .num("upper", e.upper)
        .num("residual", e.residual)
        .int("iterations", e.iterations as u64)
        .num("nu_balance", e.nu_balance)
        .strs("warnings", &op.warnings);
    if cfg.flag("csv", a.csv)? {
        let rows: Vec<Vec<f64>> = op.nodes.iter().zip(&e.phi).map(|(x, p)| vec![*x, *p]).collect();
        dir.write_csv("eigenfunction.csv", &["x", "phi"], &rows)?;
    }
    Ok(Outcome { summary: s, pass: true })
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Half-width; defaults to ceil(1.02 × the smallest admissible value)
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
}

pub fn certify(a: &CertifyArgs, cfg: &Settings, _dir: &RunDir) -> Result<Outcome> {
    let k = kernel(cfg, &a.kernel)?;
    let c = cfg.get("c", a.c, 0.0)?;
    let eps = cfg.positive("epsilon", a.epsilon, 0.05)?;
    let opts = CertifyOptions {
        h: cfg.positive("h", a.h, 0.2)?,
        ..CertifyOptions::default()
    };
    let plan = certificate_plan(&k, c, eps, &opts)?;
    let l = match cfg.opt("l", a.l)? {
        Some(l) => l,
        None => (plan.required_l * 1.02).ceil(),
    };
    info!("certifying on l = {l} (needs > {})", plan.required_l);
    let cert = certify_lower_bound(&k, c, l, eps, &opts)?;
    let bracket = cert.lambda_bracket;
    let pass = cert.achieved_inf >= plan.lambda_inf - eps
        && bracket.map_or(true, |(_, hi)| cert.achieved_inf <= hi + 1e-8);
    let mut s = Summary::new();
    s.str("kernel", &k.label())
        .num("c", c)
        .num("epsilon", eps)
        .num("l", l)
        .num("lower_bound", cert.lower_bound)
        .num("achieved_inf", cert.achieved_inf)
        .num("continuum_inf", cert.continuum_inf)
        .num("lambda_inf", plan.lambda_inf)
        .int("k", plan.k as u64)
        .num("sigma", plan.sigma)
        .num("M", plan.m)
        .num("required_l", plan.required_l)
        .opt_num("lambda_lower", bracket.map(|b| b.0))
        .opt_num("lambda_upper", bracket.map(|b| b.1))
        .bool("pass", pass);
    Ok(Outcome { summary: s, pass })
}

#[derive(Args, Debug)]
pub struct DispersionArgs {
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long)]
    f0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Comma-separated increasing drifts evaluated in addition to --c
    #[arg(long, allow_hyphen_values = true)]
    c_ladder: Option<String>,
}

pub fn dispersion(a: &DispersionArgs, cfg: &Settings, _dir: &RunDir) -> Result<Outcome> {
    let k = kernel(cfg, &a.kernel)?;
    let d = cfg.positive("d", a.d, 1.0)?;
    let f0 = cfg.positive("f0", a.f0, 1.0)?;
    let c = cfg.get("c", a.c, 0.0)?;
    let r = lambda_infinity(&k, c)?;
    let sp = spreading_speeds(&k, d, f0)?;
    let mut s = Summary::new();
    s.str("kernel", &k.label())
        .num("c", c)
        .num("d", d)
        .num("f0", f0)
        .num("lambda_inf", r.lambda_inf)
        .opt_num("nu0", r.nu0)
        .bool("boundary_minimizer", r.boundary_minimizer)
        .num("c_minus", sp.c_minus)
        .num("c_plus", sp.c_plus)
        .bool("thin_plus", r.thin_plus)
        .bool("thin_minus", r.thin_minus);
    if let Some(cs) = cfg.ladder("c-ladder", a.c_ladder.clone())? {
        let lams = cs
            .iter()
            .map(|&c| Ok(lambda_infinity(&k, c)?.lambda_inf))
            .collect::<Result<Vec<f64>>>()?;
        s.nums("c_ladder", &cs).nums("lambda_inf_ladder", &lams);
    }
    Ok(Outcome { summary: s, pass: true })
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[arg(long)]
    kernel: Option<String>,
    /// logistic or saturating
    #[arg(long)]
    reaction: Option<String>,
    #[arg(long)]
    d: Option<f64>,
    /// Drift of the frame problem on (−l, l)
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    /// Solve the frame problem on (−l, l); otherwise the line problem on [−window, window]
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Time step; defaults to the positivity bound
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Steps between written snapshots
    #[arg(long)]
    stride: Option<usize>,
    /// Half-width of the initial bump cos²(πx/2w)
    #[arg(long)]
    bump: Option<f64>,
    /// Sup-distance allowed when making frame data admissible
    #[arg(long)]
    eps: Option<f64>,
}

/// Largest step not above `dt_max` that divides `t_end`.
fn fitted_dt(dt_max: f64, t_end: f64) -> f64 {
    t_end / (t_end / dt_max).ceil()
}

fn snapshot_rows(traj: &Trajectory<f64>) -> Vec<Vec<f64>> {
    traj.snapshots
        .iter()
        .flat_map(|s| {
            s.nodes()
                .into_iter()
                .zip(&s.values)
                .map(|(x, u)| vec![s.time, x, *u])
                .collect::<Vec<_>>()
        })
        .collect()
}

pub fn simulate(a: &SimulateArgs, cfg: &Settings, dir: &RunDir) -> Result<Outcome> {
    let k = kernel(cfg, &a.kernel)?;
    let f = reaction(cfg, &a.reaction)?;
    let d = cfg.positive("d", a.d, 1.0)?;
    let h = cfg.positive("h", a.h, 0.1)?;
    let t_end = cfg.positive("t-end", a.t_end, 10.0)?;
    let stride = cfg.get("stride", a.stride, 10)?.max(1);
    let w = cfg.positive("bump", a.bump, 5.0)?;
    let mut s = Summary::new();
    s.str("kernel", &k.label()).str("reaction", f.label()).num("d", d).num("h", h);

    let (traj, dt) = if let Some(l) = cfg.opt("l", a.l)? {
        let c = cfg.get("c", a.c, 0.0)?;
        let eps = cfg.positive("eps", a.eps, 0.05)?;
        let p = FrameProblem::new(&k, d, c, f, l, h)?;
        let init = make_admissible(&p.field_from_fn(bump(w.min(l))), &p, eps)?;
        let dt = cfg.positive("dt", a.dt, fitted_dt(p.dt_max(init.field.sup().max(1.0)), t_end))?;
        let (lambda_p, _) = nonlocal_core::evolution::frame_lambda(&p, &EigenOptions::default())?;
        let traj = simulate_frame(init.field, &p, dt, t_end, stride)?;
        let last = traj.snapshots.last().expect("initial snapshot");
        s.str("mode", "frame")
            .num("c", c)
            .num("l", l)
            .num("lambda_p", lambda_p)
            .num("admissible_distance", init.distance)
            .num("compatibility_residual", p.compatibility_residual(&last.values));
        (traj, dt)
    } else {
        let half = cfg.positive("window", a.window, 50.0)?;
        let u0 = Field::from_fn(-half, half, h, bump(w))?;
        let p = CauchyProblem::new(&k, d, f, h, u0.values.len() - 1, WindowBoundary::Dirichlet)?;
        let dt = cfg.positive("dt", a.dt, fitted_dt(p.dt_max(u0.sup().max(1.0)), t_end))?;
        s.str("mode", "line").num("window", half);
        (simulate_cauchy(u0, &p, dt, t_end, stride)?, dt)
    };
    let last = traj.snapshots.last().expect("initial snapshot");
    let finite = last.values.iter().all(|v| v.is_finite());
    let nonnegative = last.inf() >= 0.0;
    s.num("dt", dt)
        .num("t_end", last.time)
        .int("snapshots", traj.snapshots.len() as u64)
        .num("sup_final", last.sup())
        .num("inf_final", last.inf())
        .bool("nonnegative", nonnegative);
    dir.write_csv("snapshots.csv", &["t", "x", "u"], &snapshot_rows(&traj))?;
    Ok(Outcome {
        summary: s,
        pass: finite && nonnegative,
    })
}

#[derive(Args, Debug)]
pub struct StationaryArgs {
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    reaction: Option<String>,
    #[arg(long)]
    d: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    /// Time-1 displacement at which the run counts as converged
    #[arg(long)]
    tol: Option<f64>,
}

pub fn stationary(a: &StationaryArgs, cfg: &Settings, dir: &RunDir) -> Result<Outcome> {
    let k = kernel(cfg, &a.kernel)?;
    let f = reaction(cfg, &a.reaction)?;
    let d = cfg.positive("d", a.d, 1.0)?;
    let c = cfg.get("c", a.c, 0.0)?;
    let l = cfg.positive("l", a.l, 20.0)?;
    let h = cfg.positive("h", a.h, 0.1)?;
    let opts = StationaryOptions {
        tol: cfg.positive("tol", a.tol, 1e-8)?,
        ..StationaryOptions::default()
    };
    let p = FrameProblem::new(&k, d, c, f, l, h)?;
    let mut s = Summary::new();
    s.str("kernel", &k.label()).num("c", c).num("l", l).num("h", h);
    let (profile, pass) = match stationary_state(&p, &opts)? {
        StationaryOutcome::Extinct { lambda_p } => {
            s.str("outcome", "extinct").num("lambda_p", lambda_p);
            (p.field(vec![0.0; p.op.nodes.len()]), true)
        }
        StationaryOutcome::Persistent {
            field,
            lambda_p,
            seed,
            max_decrease,
            displacement,
        } => {
            let monotone = max_decrease <= 1e-12;
            s.str("outcome", "persistent")
                .num("lambda_p", lambda_p)
                .num("seed", seed)
                .num("max_decrease", max_decrease)
                .num("displacement", displacement)
                .num("sup", field.sup())
                .num("v_at_0", field.values[field.index_of(0.0)])
                .num("compatibility_residual", p.compatibility_residual(&field.values))
                .bool("monotone", monotone);
            (field, monotone)
        }
    };
    let rows: Vec<Vec<f64>> = profile
        .nodes()
        .into_iter()
        .zip(&profile.values)
        .map(|(x, u)| vec![x, *u])
        .collect();
    dir.write_csv("profile.csv", &["x", "u"], &rows)?;
    Ok(Outcome { summary: s, pass })
}

#[derive(Args, Debug)]
pub struct SpreadArgs {
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    reaction: Option<String>,
    #[arg(long)]
    d: Option<f64>,
    /// Symmetric window [−window, window]
    #[arg(long)]
    window: Option<f64>,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// Level tracked as the front
    #[arg(long)]
    theta: Option<f64>,
    /// Front samples before this time are dropped from the fit
    #[arg(long)]
    burn_in: Option<f64>,
    /// Relative speed tolerance
    #[arg(long)]
    speed_tol: Option<f64>,
    /// Read fronts from a snapshot CSV (t, x, u) or a directory holding snapshots.csv
    #[arg(long)]
    snapshots: Option<PathBuf>,
}

fn spreading_config(a: &SpreadArgs, cfg: &Settings) -> Result<SpreadingConfig<f64>> {
    let base = SpreadingConfig::<f64>::default();
    let half = cfg.positive("window", a.window, base.window.1)?;
    let theta = cfg.get("theta", a.theta, base.theta)?;
    if !(theta > 0.0 && theta < 1.0) {
        return usage(format!("--theta must lie in (0, 1), got {theta}"));
    }
    Ok(SpreadingConfig {
        window: (-half, half),
        h: cfg.positive("h", a.h, base.h)?,
        dt: cfg.positive("dt", a.dt, base.dt)?,
        t_end: cfg.positive("t-end", a.t_end, base.t_end)?,
        theta,
        burn_in: cfg.opt("burn-in", a.burn_in)?.or(base.burn_in),
        speed_tol: cfg.positive("speed-tol", a.speed_tol, base.speed_tol)?,
        ..base
    })
}

/// Snapshots grouped by time from a `t, x, u` CSV.
fn read_snapshots(path: &Path) -> Result<Vec<Field64>> {
    let file = if path.is_dir() {
        path.join("snapshots.csv")
    } else {
        path.to_path_buf()
    };
    let mut rdr = csv::Reader::from_path(&file).with_context(|| format!("reading {}", file.display()))?;
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["t", "x", "u"] {
        return usage(format!("{}: expected header t,x,u", file.display()));
    }
    let mut groups: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().with_context(|| format!("bad number `{}`", &rec[i]))
        };
        let (t, x, u) = (num(0)?, num(1)?, num(2)?);
        match groups.last_mut() {
            Some((gt, g)) if *gt == t => g.push((x, u)),
            _ => groups.push((t, vec![(x, u)])),
        }
    }
    groups
        .into_iter()
        .map(|(t, g)| {
            if g.len() < 2 {
                return usage("each snapshot needs at least two nodes");
            }
            let mut f = Field::new(g[0].0, g[1].0 - g[0].0, g.iter().map(|p| p.1).collect());
            f.time = t;
            Ok(f)
        })
        .collect()
}

fn rel_err(v: f64, c: f64) -> Option<f64> {
    c.is_finite().then(|| (v - c) / c.abs())
}

pub fn speeds(a: &SpreadArgs, cfg: &Settings, _dir: &RunDir) -> Result<Outcome> {
    let k = kernel(cfg, &a.kernel)?;
    let f = reaction(cfg, &a.reaction)?;
    let d = cfg.positive("d", a.d, 1.0)?;
    let sc = spreading_config(a, cfg)?;
    let sp = spreading_speeds(&k, d, f.f0())?;
    let (right, left, source) = match cfg.opt::<PathBuf>("snapshots", a.snapshots.clone())? {
        Some(path) => {
            let snaps = read_snapshots(&path)?;
            let t_end = snaps.last().map_or(0.0, |s| s.time);
            let burn = a.burn_in.unwrap_or_else(|| nonlocal_core::propagation::default_burn_in(t_end));
            let ft = track_fronts(&snaps, sc.theta)?;
            let (r, l) = estimate_speeds(&ft, burn)?;
            (r, l, "snapshots")
        }
        None => {
            let rep = verify_spreading(&k, d, &f, &sc)?;
            (rep.right, rep.left, "inline")
        }
    };
    let (er, el) = (rel_err(right.speed, sp.c_plus), rel_err(left.speed, sp.c_minus));
    let pass = [er, el].iter().flatten().all(|e| e.abs() <= sc.speed_tol);
    let mut s = Summary::new();
    s.str("kernel", &k.label())
        .str("source", source)
        .num("right_speed", right.speed)
        .num("right_stderr", right.stderr)
        .num("left_speed", left.speed)
        .num("left_stderr", left.stderr)
        .num("c_plus", sp.c_plus)
        .num("c_minus", sp.c_minus)
        .opt_num("rel_err_right", er)
        .opt_num("rel_err_left", el)
        .num("speed_tol", sc.speed_tol)
        .bool("pass", pass);
    Ok(Outcome { summary: s, pass })
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    spread: SpreadArgs,
    /// Random ordered pairs for the comparison probe
    #[arg(long)]
    probes: Option<usize>,
}

/// Evolves seeded pairs u₀ ≤ v₀ and returns the largest violation of u ≤ v.
fn comparison_probe(k: &Kernel64, d: f64, f: &Reaction64, n: usize, seed: u64) -> Result<f64> {
    let h = 0.1;
    let p = CauchyProblem::new(k, d, f.clone(), h, 400, WindowBoundary::Dirichlet)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = p.dt_max(1.5);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let lo: Vec<f64> = (0..401).map(|_| rng.gen_range(0.0..1.0)).collect();
        let hi: Vec<f64> = lo.iter().map(|v| v + rng.gen_range(0.0..0.5)).collect();
        let (mut u, mut v) = (Field::new(-20.0, h, lo), Field::new(-20.0, h, hi));
        for _ in 0..20 {
            u = step_cauchy(&u, &p, dt)?;
            v = step_cauchy(&v, &p, dt)?;
            for (a, b) in u.values.iter().zip(&v.values) {
                worst = worst.max(a - b);
            }
        }
    }
    Ok(worst)
}

pub fn verify(a: &VerifyArgs, cfg: &Settings, seed: u64, _dir: &RunDir) -> Result<Outcome> {
    let k = kernel(cfg, &a.spread.kernel)?;
    let f = reaction(cfg, &a.spread.reaction)?;
    let d = cfg.positive("d", a.spread.d, 1.0)?;
    let sc = spreading_config(&a.spread, cfg)?;
    let rep: SpreadingReport<f64> = verify_spreading(&k, d, &f, &sc)?;
    let probes = cfg.get("probes", a.probes, 20)?;
    let violation = comparison_probe(&k, d, &f, probes, seed)?;
    let mut checks: Vec<Summary> = rep
        .checks
        .iter()
        .map(|c| {
            let mut s = Summary::new();
            s.str("name", &c.name).num("value", c.value).num("threshold", c.threshold).bool("pass", c.pass);
            s
        })
        .collect();
    let probe_ok = violation <= 1e-12;
    let mut pc = Summary::new();
    pc.str("name", "comparison probe max(u - v)")
        .num("value", violation)
        .num("threshold", 1e-12)
        .bool("pass", probe_ok);
    checks.push(pc);
    let pass = rep.pass && probe_ok;
    let passed = rep.checks.iter().filter(|c| c.pass).count() + usize::from(probe_ok);
    let mut s = Summary::new();
    s.str("kernel", &k.label())
        .num("c_plus", rep.speeds.c_plus)
        .num("c_minus", rep.speeds.c_minus)
        .num("right_speed", rep.right.speed)
        .num("left_speed", rep.left.speed)
        .opt_num("rel_err_right", rep.rel_err_right)
        .opt_num("rel_err_left", rep.rel_err_left)
        .num("interior_min", rep.interior_min)
        .opt_num("exterior_right_max", rep.exterior_right_max)
        .opt_num("exterior_left_max", rep.exterior_left_max)
        .int("seed", seed)
        .int("probes", probes as u64)
        .int("checks_passed", passed as u64)
        .int("checks_failed", (checks.len() - passed) as u64)
        .objects("checks", &checks)
        .strs("notes", &rep.notes)
        .bool("pass", pass);
    Ok(Outcome { summary: s, pass })
}
