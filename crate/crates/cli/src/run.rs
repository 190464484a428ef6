//! The `check`, `simulate` and `describe` commands.

use std::fmt::{self, Write as _};
use std::sync::Mutex;
use std::time::Instant;

use algebroid_core::dynamics::{
    el2_field, hamiltonian_field, hamiltonian_field_from_gradient, noether_check, noether_integral, LegendreTransform,
    PhaseFunction,
};
use algebroid_core::expr::{coords, Expr};
use algebroid_core::integrate::{drift_report, integrate, Aborted, Monitor, Trajectory};
use algebroid_core::lifts::bundle_names;
use algebroid_core::models::{gtilde_pushforward, MetricHamiltonian};
use algebroid_core::{CheckReport, Error, PhasePoint, VelocityPoint};

use crate::config::{ConfigError, Family, Model, Start};

/// Why a command did not finish normally.
#[derive(Debug)]
pub enum Failure {
    Config(ConfigError),
    Compute(Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(e) => e.fmt(f),
            Failure::Compute(e) => e.fmt(f),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Compute(e)
    }
}

pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DEGENERATE: i32 = 3;
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => exit::CONFIG,
            Failure::Compute(e) if e.is_degeneracy() => exit::DEGENERATE,
            Failure::Compute(_) => exit::CHECK_FAILED,
        }
    }
}

/// Outcome of a command: checks, drifts and timings.
#[derive(Debug, Clone, Default)]
pub struct RunReport {
    pub checks: Vec<CheckReport>,
    /// `(monitor, max abs drift, relative drift)`.
    pub drifts: Vec<(String, f64, f64)>,
    pub timings: Vec<(String, f64)>,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            exit::OK
        } else {
            exit::CHECK_FAILED
        }
    }
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{c}")?;
        }
        for (name, abs, rel) in &self.drifts {
            writeln!(f, "drift {name}: max {abs:e} (relative {rel:e})")?;
        }
        for (name, secs) in &self.timings {
            writeln!(f, "time {name}: {secs:.3}s")?;
        }
        Ok(())
    }
}

fn timed<T>(report: &mut RunReport, name: &str, f: impl FnOnce() -> T) -> T {
    let start = Instant::now();
    let out = f();
    report.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
    out
}

pub fn cmd_check(model: &Model) -> Result<RunReport, Failure> {
    let spec = &model.check;
    let a = &model.algebroid;
    let base = spec.base_samples();
    let mut report = RunReport::default();
    for name in &spec.checks {
        let r = timed(&mut report, name, || -> Result<CheckReport, Failure> {
            Ok(match name.as_str() {
                "skew" => a.check_skew(&base, spec.tolerance)?,
                "lie" => a.check_lie(&base, spec.tolerance)?,
                "noether" => {
                    let (x, f) = model.noether.as_ref().expect("validated");
                    let l = model.lagrangian.as_ref().expect("validated");
                    noether_check(a, l, x, f, &spec.bundle_samples(), spec.tolerance)?
                }
                "metric" => {
                    let g = match &model.family {
                        Family::Geodesic(geo) => geo.metric().clone(),
                        Family::Wong(w) => w.setup().product_metric()?,
                        Family::Plain => unreachable!("validated"),
                    };
                    let worst = match g.check_positive_definite(&base) {
                        Ok(()) => None,
                        Err(e) => Some(e.to_string()),
                    };
                    CheckReport {
                        name: "metric positive definite".into(),
                        passed: worst.is_none(),
                        max_residual: if worst.is_none() { 0.0 } else { 1.0 },
                        tolerance: spec.tolerance,
                        worst,
                        samples: base.len(),
                    }
                }
                "gamma" => gamma_check(model, spec.tolerance)?,
                other => unreachable!("unknown check {other} survived validation"),
            })
        })?;
        report.checks.push(r);
    }
    Ok(report)
}

/// The `xi xi` block of the pushed-forward lifted metric against `-2 Gamma`.
fn gamma_check(model: &Model, tol: f64) -> Result<CheckReport, Failure> {
    let geo = match &model.family {
        Family::Geodesic(geo) => geo,
        _ => return Err(Failure::Config(ConfigError { path: "check.checks".into(), message: "gamma needs the geodesic preset".into() })),
    };
    let a = &model.algebroid;
    let m = a.rank();
    let t = gtilde_pushforward(a, geo.metric())?;
    let spec = &model.check;
    let fibers = spec.fiber_box.sample(spec.count, spec.seed.wrapping_add(1));
    let (mut worst, mut at) = (0.0f64, None);
    for (x, xi) in spec.base_samples().iter().zip(&fibers) {
        let mat = t.eval_at(x, xi)?;
        let gam = geo.gamma().at(x)?;
        for i in 0..m {
            for j in 0..m {
                let expected = -2.0 * (0..m).map(|l| gam.get(l, i, j) * xi[l]).sum::<f64>();
                let r = (mat[(i, j)] - expected).abs();
                if !(r <= worst) {
                    worst = r;
                    at = Some(format!("({i}, {j}) at x = {x:?}, xi = {xi:?}"));
                }
            }
        }
    }
    Ok(CheckReport::from_max("lifted metric vs -2 Gamma", worst, at, tol, spec.count))
}

/// Result of `simulate`: the CSV (possibly of a partial run) and the error
/// that stopped it, if any.
#[derive(Debug)]
pub struct SimulateOutcome {
    pub csv: String,
    pub report: RunReport,
    pub error: Option<Error>,
}

impl SimulateOutcome {
    pub fn exit_code(&self) -> i32 {
        match &self.error {
            None => exit::OK,
            Some(e) if e.is_degeneracy() => exit::DEGENERATE,
            Some(_) => exit::CHECK_FAILED,
        }
    }
}

type Field<'a> = Box<dyn FnMut(f64, &[f64]) -> algebroid_core::Result<Vec<f64>> + 'a>;

fn concat(a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
    a.into_iter().chain(b).collect()
}

pub fn cmd_simulate(model: &Model) -> Result<SimulateOutcome, Failure> {
    let spec = model.simulate.as_ref().ok_or_else(|| ConfigError { path: "simulate".into(), message: "missing `simulate` block".into() })?;
    let a = &model.algebroid;
    let (n, m) = (a.base_dim(), a.rank());
    let mut report = RunReport::default();
    let (state0, labels, field, energy): (Vec<f64>, Vec<String>, Field<'_>, Monitor<'_>) = match &spec.start {
        Start::Velocity(y) => {
            let l = model.lagrangian.as_ref().expect("validated");
            let field: Field<'_> = match &model.family {
                Family::Geodesic(geo) => Box::new(move |_t, s| geo.field(&VelocityPoint::split(s, n)).map(|(x, y)| concat(x, y))),
                Family::Wong(w) => Box::new(move |_t, s| w.el_field(&VelocityPoint::split(s, n)).map(|(x, y)| concat(x, y))),
                Family::Plain => Box::new(move |_t, s| el2_field(a, l, &VelocityPoint::split(s, n)).map(|(x, y)| concat(x, y))),
            };
            let energy = l.energy().compile(&bundle_names(n, m)).map_err(Error::from)?;
            (concat(spec.x.clone(), y.clone()), bundle_names(n, m), field, Monitor::new("H", move |_t, s| Ok(energy.eval(s)?)))
        }
        Start::Phase(xi) => {
            let (field, h): (Field<'_>, Box<dyn PhaseFunction + Send + Sync>) = match (&model.family, &model.hamiltonian) {
                (Family::Geodesic(geo), None) => (
                    Box::new(move |_t, s| geo.hamiltonian_field(&PhasePoint::split(s, n)).map(|(x, y)| concat(x, y))),
                    Box::new(MetricHamiltonian { metric: geo.metric().clone() }),
                ),
                (Family::Wong(w), None) => (
                    Box::new(move |_t, s| w.phase_field(&PhasePoint::split(s, n)).map(|(x, y)| concat(x, y))),
                    Box::new(w.hamiltonian()?),
                ),
                (_, Some(h)) => (
                    Box::new(move |_t, s| hamiltonian_field(a, h, &PhasePoint::split(s, n)).map(|(x, y)| concat(x, y))),
                    Box::new(h.clone()),
                ),
                (Family::Plain, None) => {
                    let legendre = LegendreTransform::new(model.lagrangian.clone().expect("validated"));
                    let guess = Mutex::new(xi.clone());
                    let field: Field<'_> = {
                        let legendre = legendre.clone();
                        Box::new(move |_t, s| {
                            let p = PhasePoint::split(s, n);
                            let mut g = guess.lock().expect("guess lock");
                            let e = legendre.evaluate_from(&p, &g)?;
                            g.clone_from(&e.y);
                            hamiltonian_field_from_gradient(a, &p, &e.dh_dx, &e.y).map(|(x, y)| concat(x, y))
                        })
                    };
                    (field, Box::new(legendre))
                }
            };
            let mut labels = coords::x_names(n);
            labels.extend(coords::xi_names(m));
            let energy = Monitor::new("H", move |_t, s| h.value(&PhasePoint::split(s, n)));
            (concat(spec.x.clone(), xi.clone()), labels, field, energy)
        }
    };
    let mut monitors = vec![energy];
    for name in &spec.monitors {
        monitors.push(monitor(model, name, matches!(spec.start, Start::Phase(_)))?);
    }
    let result = timed(&mut report, "integrate", || integrate(field, &state0, spec.t0, spec.t1, spec.h, labels, &monitors));
    let (traj, error) = match result {
        Ok(t) => (t, None),
        Err(aborted) => {
            let Aborted { trajectory, error } = *aborted;
            (trajectory, Some(error))
        }
    };
    for mon in &monitors {
        let name = &mon.name;
        if let Ok((abs, rel)) = drift_report(&traj, name) {
            report.drifts.push((name.to_string(), abs, rel));
        }
    }
    Ok(SimulateOutcome { csv: traj.to_csv(), report, error })
}

fn monitor<'a>(model: &'a Model, name: &str, phase: bool) -> Result<Monitor<'a>, Failure> {
    let a = &model.algebroid;
    let (n, m) = (a.base_dim(), a.rank());
    Ok(match name {
        // |xi|^2, with xi the Legendre image in the velocity picture
        "momentum_norm" => {
            if phase {
                Monitor::new(name, move |_t, s| Ok(s[n..].iter().map(|v| v * v).sum()))
            } else {
                let l = model.lagrangian.as_ref().expect("validated");
                Monitor::new(name, move |_t, s| Ok(l.dl_dy_at(&VelocityPoint::split(s, n))?.iter().map(|v| v * v).sum()))
            }
        }
        // h^ij v_i v_j, or h_ij vbar^i vbar^j
        "charge_norm" => {
            let Family::Wong(w) = &model.family else { unreachable!("validated") };
            let h = w.setup().h.clone();
            let hinv = algebroid_core::linalg::checked_inverse(&h, "algebra metric")?;
            let base = w.setup().base_dim();
            let form = if phase { hinv } else { h };
            Monitor::new(name, move |_t, s| {
                let v = &s[n + base..];
                Ok((0..v.len()).map(|i| (0..v.len()).map(|j| form[(i, j)] * v[i] * v[j]).sum::<f64>()).sum())
            })
        }
        "noether" => {
            let (x, f) = model.noether.as_ref().expect("validated");
            let names = coords::x_names(n);
            let coeffs = algebroid_core::expr::compile_all(&x.coeffs, &names).map_err(Error::from)?;
            let f = f.compile(&names).map_err(Error::from)?;
            if phase {
                Monitor::new(name, move |_t, s| {
                    let c = algebroid_core::expr::eval_all(&coeffs, &s[..n])?;
                    Ok(c.iter().zip(&s[n..]).map(|(a, b)| a * b).sum::<f64>() - f.eval(&s[..n])?)
                })
            } else {
                let l = model.lagrangian.as_ref().expect("validated");
                let integral = noether_integral(l, x, &Expr::zero())?.compile(&bundle_names(n, m)).map_err(Error::from)?;
                Monitor::new(name, move |_t, s| Ok(integral.eval(s)? - f.eval(&s[..n])?))
            }
        }
        other => unreachable!("unknown monitor {other} survived validation"),
    })
}

/// Human-readable derivation dump.
pub fn cmd_describe(model: &Model) -> Result<String, Failure> {
    let a = &model.algebroid;
    let (n, m) = (a.base_dim(), a.rank());
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(w, "algebroid: base dimension {n}, rank {m} ({})", a.classify_anchors());
    let _ = writeln!(w, "anchors:");
    for b in 0..n {
        for i in 0..m {
            let _ = writeln!(w, "  rho^{}_{} = {}", b + 1, i + 1, a.rho()[b][i]);
        }
    }
    for b in 0..n {
        for i in 0..m {
            let _ = writeln!(w, "  sigma^{}_{} = {}", b + 1, i + 1, a.sigma()[b][i]);
        }
    }
    let lam = a.lambda_symbolic();
    let _ = writeln!(w, "linear tensor on E*:");
    for i in 0..m {
        for j in 0..m {
            let _ = writeln!(w, "  {{xi{}, xi{}}} = {}", i + 1, j + 1, lam.xi_xi[i][j].simplify());
        }
    }
    for i in 0..m {
        for b in 0..n {
            let _ = writeln!(w, "  {{xi{}, x{}}} = {}", i + 1, b + 1, lam.xi_x[i][b].simplify());
        }
    }
    for b in 0..n {
        for j in 0..m {
            let _ = writeln!(w, "  {{x{}, xi{}}} = {}", b + 1, j + 1, lam.x_xi[b][j].simplify());
        }
    }
    if let Some(l) = &model.lagrangian {
        let _ = writeln!(w, "Lagrangian: L = {}", l.expr());
        let _ = writeln!(w, "Euler-Lagrange equations:");
        for line in el2_symbolic(a, l) {
            let _ = writeln!(w, "  {line}");
        }
    }
    if let Some(h) = &model.hamiltonian {
        let _ = writeln!(w, "Hamiltonian: H = {}", h.expr());
    }
    match &model.family {
        Family::Geodesic(geo) => {
            let gamma = geo.gamma();
            match gamma.raised() {
                Some(raised) => {
                    let _ = writeln!(w, "Gamma symbols:");
                    for l in 0..m {
                        for i in 0..m {
                            for j in 0..m {
                                let _ = writeln!(w, "  Gamma^{}_{}{} = {}", l + 1, i + 1, j + 1, raised[l][i][j]);
                            }
                        }
                    }
                }
                None => {
                    let _ = writeln!(w, "Gamma symbols, lowered (raise with the numeric inverse metric):");
                    for k in 0..m {
                        for i in 0..m {
                            for j in 0..m {
                                let _ = writeln!(w, "  Gamma_{},{}{} = {}", k + 1, i + 1, j + 1, gamma.lowered()[k][i][j]);
                            }
                        }
                    }
                }
            }
        }
        Family::Wong(wong) => {
            let _ = writeln!(w, "curvature:");
            let f = wong.curvature();
            for (l, fl) in f.iter().enumerate() {
                for a in 0..n {
                    for b in a + 1..n {
                        let _ = writeln!(w, "  F^{}_{}{} = {}", l + 1, a + 1, b + 1, fl[a][b]);
                    }
                }
            }
        }
        Family::Plain => {}
    }
    Ok(out)
}

/// `xdot^a = rho^a_k y^k` and the second-order equation, solved for `ydot`
/// when the fiber Hessian is diagonal and written implicitly otherwise.
fn el2_symbolic(a: &algebroid_core::Algebroid, l: &algebroid_core::Lagrangian) -> Vec<String> {
    let (n, m) = (a.base_dim(), a.rank());
    let y: Vec<Expr> = coords::y_names(m).iter().map(Expr::var).collect();
    let xdot: Vec<Expr> = (0..n).map(|b| Expr::sum((0..m).map(|k| Expr::mul(a.rho()[b][k].clone(), y[k].clone()))).simplify()).collect();
    let mut lines: Vec<String> = xdot.iter().enumerate().map(|(b, e)| format!("xdot{} = {e}", b + 1)).collect();
    let (ly, lx, hyy, hyx) = (l.dl_dy(), l.dl_dx(), l.hessian_yy(), l.hessian_yx());
    let c = a.c();
    let rhs: Vec<Expr> = (0..m)
        .map(|j| {
            let bracket = Expr::sum((0..m).flat_map(|i| (0..m).map(move |k| (i, k))).map(|(i, k)| {
                Expr::mul(c[k][i][j].clone(), Expr::mul(y[i].clone(), ly[k].clone()))
            }));
            let anchor = Expr::sum((0..n).map(|b| Expr::mul(a.sigma()[b][j].clone(), lx[b].clone())));
            let mixed = Expr::sum((0..n).map(|b| Expr::mul(hyx[j][b].clone(), xdot[b].clone())));
            Expr::sub(Expr::add(bracket, anchor), mixed).simplify()
        })
        .collect();
    let diagonal = (0..m).all(|i| (0..m).all(|j| i == j || hyy[i][j].simplify().is_zero()));
    for j in 0..m {
        if diagonal {
            lines.push(format!("ydot{} = {}", j + 1, Expr::div(rhs[j].clone(), hyy[j][j].clone()).simplify()));
        } else {
            let lhs: Vec<String> = (0..m).map(|k| format!("({})*ydot{}", hyy[j][k].simplify(), k + 1)).collect();
            lines.push(format!("{} = {}", lhs.join(" + "), rhs[j]));
        }
    }
    lines
}

/// Trajectory CSV; re-exported for callers that integrate themselves.
pub fn to_csv(t: &Trajectory) -> String {
    t.to_csv()
}
