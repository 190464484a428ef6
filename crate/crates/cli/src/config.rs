//! JSON configuration and its validation into a ready-to-run [`Model`].

use std::fmt;

use algebroid_core::algebroid::{sl2_constants, so3_constants};
use algebroid_core::dynamics::phase_names;
use algebroid_core::expr::{coords, Expr};
use algebroid_core::lifts::bundle_names;
use algebroid_core::models::{metric_lagrangian, Geodesics, Metric, Wong, WongSetup};
use algebroid_core::sample::{SampleBox, DEFAULT_COUNT, DEFAULT_SEED, DEFAULT_TOLERANCE};
use algebroid_core::{Algebroid, Hamiltonian, Lagrangian, Section};
use serde::Deserialize;

/// A configuration problem, located by a path into the document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config: {}: {}", self.path, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn err(path: impl Into<String>, message: impl fmt::Display) -> ConfigError {
    ConfigError { path: path.into(), message: message.to_string() }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub base_dim: usize,
    pub fiber_rank: usize,
    pub structure: Option<Structure>,
    pub preset: Option<Preset>,
    pub lagrangian: Option<String>,
    pub hamiltonian: Option<String>,
    pub simulate: Option<Simulate>,
    pub check: Option<Check>,
    pub noether: Option<Noether>,
}

/// Explicit structure functions: `rho[a][i]`, `sigma[a][i]`, `c[k][i][j]`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Structure {
    pub rho: Vec<Vec<String>>,
    pub sigma: Vec<Vec<String>>,
    pub c: Vec<Vec<Vec<String>>>,
}

/// A Lie algebra by name (`so3`, `sl2`) or by constants `C^k_ij`.
#[derive(Debug, Clone, Copy)]
struct AlgebraSpec<'a> {
    algebra: &'a Option<String>,
    structure_constants: &'a Option<Vec<Vec<Vec<f64>>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Preset {
    TangentBundle,
    LieAlgebra {
        algebra: Option<String>,
        structure_constants: Option<Vec<Vec<Vec<f64>>>>,
        /// Default Lagrangian `1/2 sum I_i (y^i)^2`.
        inertia: Option<Vec<f64>>,
    },
    /// A metric on `TM`, or on a Lie algebra when one is given.
    Geodesic {
        algebra: Option<String>,
        structure_constants: Option<Vec<Vec<Vec<f64>>>>,
        metric: Vec<Vec<String>>,
        metric_inverse: Option<Vec<Vec<String>>>,
    },
    Wong {
        algebra: Option<String>,
        structure_constants: Option<Vec<Vec<Vec<f64>>>>,
        metric: Vec<Vec<String>>,
        metric_inverse: Option<Vec<Vec<String>>>,
        algebra_metric: Vec<Vec<f64>>,
        /// `connection[i][a] = A^i_a`.
        connection: Vec<Vec<String>>,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Simulate {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
    pub x: Vec<f64>,
    pub y: Option<Vec<f64>>,
    pub xi: Option<Vec<f64>>,
    #[serde(default)]
    pub monitors: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    #[serde(rename = "box")]
    pub base_box: Option<BoxSpec>,
    pub fiber_box: Option<BoxSpec>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub checks: Option<Vec<String>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noether {
    pub section: Vec<String>,
    #[serde(default = "zero_string")]
    pub f: String,
}

fn zero_string() -> String {
    "0".into()
}

/// The preset-specific solvers carried along with the algebroid.
#[derive(Debug, Clone)]
pub enum Family {
    Plain,
    Geodesic(Box<Geodesics>),
    Wong(Box<Wong>),
}

/// Which flow to integrate.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Velocity(Vec<f64>),
    Phase(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct SimulateSpec {
    pub t0: f64,
    pub t1: f64,
    pub h: f64,
    pub x: Vec<f64>,
    pub start: Start,
    pub monitors: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct CheckSpec {
    pub base_box: SampleBox,
    pub fiber_box: SampleBox,
    pub count: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub checks: Vec<String>,
}

impl CheckSpec {
    pub fn base_samples(&self) -> Vec<Vec<f64>> {
        self.base_box.sample(self.count, self.seed)
    }

    /// Points `(x, y)` of `E`.
    pub fn bundle_samples(&self) -> Vec<Vec<f64>> {
        let fibers = self.fiber_box.sample(self.count, self.seed.wrapping_add(1));
        self.base_samples().into_iter().zip(fibers).map(|(x, y)| x.into_iter().chain(y).collect()).collect()
    }
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct Model {
    pub algebroid: Algebroid,
    pub family: Family,
    pub lagrangian: Option<Lagrangian>,
    pub hamiltonian: Option<Hamiltonian>,
    pub noether: Option<(Section, Expr)>,
    pub simulate: Option<SimulateSpec>,
    pub check: CheckSpec,
}

/// Monitor names accepted in `simulate.monitors`.
pub const MONITORS: &[&str] = &["momentum_norm", "charge_norm", "noether"];

/// Checks accepted in `check.checks`.
pub const CHECKS: &[&str] = &["skew", "lie", "noether", "metric", "gamma"];

pub fn parse_config(text: &str) -> Result<Config, ConfigError> {
    serde_json::from_str(text).map_err(|e| err("", format!("invalid JSON at line {}, column {}: {e}", e.line(), e.column())))
}

fn expr(path: &str, src: &str) -> Result<Expr, ConfigError> {
    src.parse::<Expr>().map(|e| e.simplify()).map_err(|e| err(path, e))
}

fn exprs_2(path: &str, rows: &[Vec<String>]) -> Result<Vec<Vec<Expr>>, ConfigError> {
    rows.iter()
        .enumerate()
        .map(|(i, r)| r.iter().enumerate().map(|(j, s)| expr(&format!("{path}[{i}][{j}]"), s)).collect())
        .collect()
}

fn shape_2<T>(path: &str, rows: &[Vec<T>], r: usize, c: usize) -> Result<(), ConfigError> {
    if rows.len() != r {
        return Err(err(path, format!("expected {r} rows, got {}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(err(format!("{path}[{i}]"), format!("expected {c} entries, got {}", row.len())));
        }
    }
    Ok(())
}

fn vars_in(path: &str, e: &Expr, allowed: &[String]) -> Result<(), ConfigError> {
    match e.variables().into_iter().find(|v| !allowed.contains(v)) {
        Some(v) => Err(err(path, format!("variable {v:?} is not allowed here (allowed: {})", allowed.join(", ")))),
        None => Ok(()),
    }
}

fn constants(path: &str, spec: AlgebraSpec<'_>) -> Result<Vec<Vec<Vec<f64>>>, ConfigError> {
    match (spec.algebra, spec.structure_constants) {
        (Some(_), Some(_)) => Err(err(path, "give either `algebra` or `structure_constants`, not both")),
        (Some(name), None) => match name.as_str() {
            "so3" => Ok(so3_constants()),
            "sl2" => Ok(sl2_constants()),
            other => Err(err(format!("{path}.algebra"), format!("unknown algebra {other:?} (known: so3, sl2)"))),
        },
        (None, Some(c)) => {
            let m = c.len();
            for (k, ck) in c.iter().enumerate() {
                shape_2(&format!("{path}.structure_constants[{k}]"), ck, m, m)?;
            }
            if c.iter().flatten().flatten().any(|v| !v.is_finite()) {
                return Err(err(format!("{path}.structure_constants"), "entries must be finite"));
            }
            Ok(c.clone())
        }
        (None, None) => Err(err(path, "missing `algebra` or `structure_constants`")),
    }
}

fn core_err(path: &str) -> impl Fn(algebroid_core::Error) -> ConfigError + '_ {
    move |e| err(path, e)
}

fn sample_box(path: &str, spec: Option<&BoxSpec>, dim: usize) -> Result<SampleBox, ConfigError> {
    match spec {
        None => Ok(SampleBox::cube(dim, -1.0, 1.0)),
        Some(b) => {
            if b.lo.len() != dim || b.hi.len() != dim {
                return Err(err(path, format!("bounds must have length {dim}")));
            }
            SampleBox::new(b.lo.clone(), b.hi.clone()).map_err(core_err(path))
        }
    }
}

fn metric(path: &str, n: usize, rank: usize, g: &[Vec<String>], inv: Option<&Vec<Vec<String>>>, samples: &[Vec<f64>]) -> Result<Metric, ConfigError> {
    shape_2(path, g, rank, rank)?;
    let metric = Metric::new(n, exprs_2(path, g)?).map_err(core_err(path))?;
    let metric = match inv {
        Some(inv) => {
            let ipath = path.replace("metric", "metric_inverse");
            shape_2(&ipath, inv, rank, rank)?;
            metric.with_inverse(exprs_2(&ipath, inv)?, samples).map_err(core_err(&ipath))?
        }
        None => metric,
    };
    metric.check_positive_definite(samples).map_err(core_err(path))?;
    Ok(metric)
}

impl Config {
    /// Validates everything and builds the model. Nothing is computed from
    /// an invalid document.
    pub fn build(&self) -> Result<Model, ConfigError> {
        let (n, m) = (self.base_dim, self.fiber_rank);
        let check = self.check_spec()?;
        let samples = check.base_samples();
        let (algebroid, family, default_l) = match (&self.structure, &self.preset) {
            (Some(_), Some(_)) => return Err(err("", "give either `structure` or `preset`, not both")),
            (None, None) => return Err(err("", "missing `structure` or `preset`")),
            (Some(s), None) => {
                shape_2("structure.rho", &s.rho, n, m)?;
                shape_2("structure.sigma", &s.sigma, n, m)?;
                if s.c.len() != m {
                    return Err(err("structure.c", format!("expected {m} blocks, got {}", s.c.len())));
                }
                for (k, ck) in s.c.iter().enumerate() {
                    shape_2(&format!("structure.c[{k}]"), ck, m, m)?;
                }
                let names = coords::x_names(n);
                let rho = exprs_2("structure.rho", &s.rho)?;
                let sigma = exprs_2("structure.sigma", &s.sigma)?;
                let c: Vec<Vec<Vec<Expr>>> =
                    s.c.iter().enumerate().map(|(k, ck)| exprs_2(&format!("structure.c[{k}]"), ck)).collect::<Result<_, _>>()?;
                for (what, block) in [("rho", &rho), ("sigma", &sigma)] {
                    for (a, row) in block.iter().enumerate() {
                        for (i, e) in row.iter().enumerate() {
                            vars_in(&format!("structure.{what}[{a}][{i}]"), e, &names)?;
                        }
                    }
                }
                for (k, ck) in c.iter().enumerate() {
                    for (i, row) in ck.iter().enumerate() {
                        for (j, e) in row.iter().enumerate() {
                            vars_in(&format!("structure.c[{k}][{i}][{j}]"), e, &names)?;
                        }
                    }
                }
                (Algebroid::new(n, m, rho, sigma, c).map_err(core_err("structure"))?, Family::Plain, None)
            }
            (None, Some(p)) => self.build_preset(p, &samples)?,
        };
        let lagrangian = match &self.lagrangian {
            Some(src) => {
                let e = expr("lagrangian", src)?;
                vars_in("lagrangian", &e, &bundle_names(n, m))?;
                Some(Lagrangian::new(n, m, e).map_err(core_err("lagrangian"))?)
            }
            None => default_l,
        };
        let hamiltonian = match &self.hamiltonian {
            Some(src) => {
                let e = expr("hamiltonian", src)?;
                vars_in("hamiltonian", &e, &phase_names(n, m))?;
                Some(Hamiltonian::new(n, m, e).map_err(core_err("hamiltonian"))?)
            }
            None => None,
        };
        let noether = match &self.noether {
            Some(nb) => {
                if nb.section.len() != m {
                    return Err(err("noether.section", format!("expected {m} coefficients, got {}", nb.section.len())));
                }
                let names = coords::x_names(n);
                let coeffs: Vec<Expr> =
                    nb.section.iter().enumerate().map(|(i, s)| expr(&format!("noether.section[{i}]"), s)).collect::<Result<_, _>>()?;
                for (i, e) in coeffs.iter().enumerate() {
                    vars_in(&format!("noether.section[{i}]"), e, &names)?;
                }
                let f = expr("noether.f", &nb.f)?;
                vars_in("noether.f", &f, &names)?;
                if lagrangian.is_none() {
                    return Err(err("noether", "needs a Lagrangian"));
                }
                Some((Section::new(coeffs), f))
            }
            None => None,
        };
        let simulate = match &self.simulate {
            Some(s) => Some(self.simulate_spec(s, &family, lagrangian.is_some(), hamiltonian.is_some(), noether.is_some())?),
            None => None,
        };
        for (i, c) in check.checks.iter().enumerate() {
            let path = format!("check.checks[{i}]");
            match c.as_str() {
                "noether" if noether.is_none() => return Err(err(path, "the noether check needs a `noether` block")),
                "metric" if matches!(family, Family::Plain) => return Err(err(path, "the metric check needs the geodesic or wong preset")),
                "gamma" if !matches!(family, Family::Geodesic(_)) => return Err(err(path, "the gamma check needs the geodesic preset")),
                _ => {}
            }
        }
        Ok(Model { algebroid, family, lagrangian, hamiltonian, noether, simulate, check })
    }

    fn build_preset(&self, p: &Preset, samples: &[Vec<f64>]) -> Result<(Algebroid, Family, Option<Lagrangian>), ConfigError> {
        let (n, m) = (self.base_dim, self.fiber_rank);
        let lie = |path: &str, spec: AlgebraSpec<'_>| -> Result<Algebroid, ConfigError> {
            let c = constants(path, spec)?;
            if n != 0 {
                return Err(err("base_dim", "a Lie algebra lives over a point: base_dim must be 0"));
            }
            if c.len() != m {
                return Err(err("fiber_rank", format!("the algebra has dimension {}, fiber_rank is {m}", c.len())));
            }
            Algebroid::lie_algebra(&c).map_err(core_err(path))
        };
        match p {
            Preset::TangentBundle => {
                if m != n {
                    return Err(err("fiber_rank", format!("the tangent bundle needs fiber_rank = base_dim = {n}")));
                }
                Ok((Algebroid::tangent_bundle(n), Family::Plain, None))
            }
            Preset::LieAlgebra { algebra, structure_constants, inertia } => {
                let a = lie("preset", AlgebraSpec { algebra, structure_constants })?;
                let l = match inertia {
                    Some(i) => {
                        if i.len() != m {
                            return Err(err("preset.inertia", format!("expected {m} moments, got {}", i.len())));
                        }
                        if i.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
                            return Err(err("preset.inertia", "moments must be positive"));
                        }
                        let terms = i.iter().enumerate().map(|(k, v)| format!("{v}*y{}^2", k + 1)).collect::<Vec<_>>().join(" + ");
                        Some(Lagrangian::new(0, m, expr("preset.inertia", &format!("0.5*({terms})"))?).map_err(core_err("preset.inertia"))?)
                    }
                    None => None,
                };
                Ok((a, Family::Plain, l))
            }
            Preset::Geodesic { algebra, structure_constants, metric: g, metric_inverse } => {
                let a = if algebra.is_none() && structure_constants.is_none() {
                    if m != n {
                        return Err(err("fiber_rank", format!("a metric on the tangent bundle needs fiber_rank = base_dim = {n}")));
                    }
                    Algebroid::tangent_bundle(n)
                } else {
                    lie("preset", AlgebraSpec { algebra, structure_constants })?
                };
                let g = metric("preset.metric", n, m, g, metric_inverse.as_ref(), samples)?;
                let geo = Geodesics::new(&a, &g).map_err(core_err("preset.metric"))?;
                Ok((a, Family::Geodesic(Box::new(geo)), Some(metric_lagrangian(&g))))
            }
            Preset::Wong { algebra, structure_constants, metric: g, metric_inverse, algebra_metric, connection } => {
                let c = constants("preset", AlgebraSpec { algebra, structure_constants })?;
                let mg = c.len();
                if m != n + mg {
                    return Err(err("fiber_rank", format!("Wong systems need fiber_rank = base_dim + algebra dimension = {}", n + mg)));
                }
                let g = metric("preset.metric", n, n, g, metric_inverse.as_ref(), samples)?;
                shape_2("preset.algebra_metric", algebra_metric, mg, mg)?;
                let h = nalgebra::DMatrix::from_fn(mg, mg, |i, j| algebra_metric[i][j]);
                shape_2("preset.connection", connection, mg, n)?;
                let conn = exprs_2("preset.connection", connection)?;
                let names = coords::x_names(n);
                for (i, row) in conn.iter().enumerate() {
                    for (b, e) in row.iter().enumerate() {
                        vars_in(&format!("preset.connection[{i}][{b}]"), e, &names)?;
                    }
                }
                let setup = WongSetup::new(g, c, h, conn).map_err(core_err("preset"))?;
                let wong = Wong::new(setup, samples).map_err(core_err("preset"))?;
                let l = wong.lagrangian().map_err(core_err("preset"))?;
                Ok((wong.deformed().clone(), Family::Wong(Box::new(wong)), Some(l)))
            }
        }
    }

    fn check_spec(&self) -> Result<CheckSpec, ConfigError> {
        let c = self.check.clone().unwrap_or_default();
        let tolerance = c.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance.is_finite() && tolerance > 0.0) {
            return Err(err("check.tolerance", "must be positive"));
        }
        let count = c.count.unwrap_or(DEFAULT_COUNT);
        if count == 0 {
            return Err(err("check.count", "must be at least 1"));
        }
        let mut checks = c.checks.clone().unwrap_or_default();
        for (i, name) in checks.iter().enumerate() {
            if !CHECKS.contains(&name.as_str()) {
                return Err(err(format!("check.checks[{i}]"), format!("unknown check {name:?} (known: {})", CHECKS.join(", "))));
            }
        }
        if c.checks.is_none() {
            checks.push("lie".into());
            if self.noether.is_some() {
                checks.push("noether".into());
            }
            if matches!(self.preset, Some(Preset::Geodesic { .. } | Preset::Wong { .. })) {
                checks.push("metric".into());
            }
        }
        Ok(CheckSpec {
            base_box: sample_box("check.box", c.base_box.as_ref(), self.base_dim)?,
            fiber_box: sample_box("check.fiber_box", c.fiber_box.as_ref(), self.fiber_rank)?,
            count,
            seed: c.seed.unwrap_or(DEFAULT_SEED),
            tolerance,
            checks,
        })
    }

    fn simulate_spec(&self, s: &Simulate, family: &Family, has_l: bool, has_h: bool, has_noether: bool) -> Result<SimulateSpec, ConfigError> {
        let (n, m) = (self.base_dim, self.fiber_rank);
        if !(s.h.is_finite() && s.h > 0.0) {
            return Err(err("simulate.h", "must be positive"));
        }
        if !(s.t0.is_finite() && s.t1.is_finite() && s.t1 > s.t0) {
            return Err(err("simulate.t1", "must exceed t0"));
        }
        if s.x.len() != n {
            return Err(err("simulate.x", format!("expected {n} entries, got {}", s.x.len())));
        }
        let start = match (&s.y, &s.xi) {
            (Some(y), None) => Start::Velocity(y.clone()),
            (None, Some(xi)) => Start::Phase(xi.clone()),
            _ => return Err(err("simulate", "give exactly one of `y` (Lagrangian flow) or `xi` (Hamiltonian flow)")),
        };
        let (which, v) = match &start {
            Start::Velocity(v) => ("simulate.y", v),
            Start::Phase(v) => ("simulate.xi", v),
        };
        if v.len() != m {
            return Err(err(which, format!("expected {m} entries, got {}", v.len())));
        }
        if s.x.iter().chain(v).any(|v| !v.is_finite()) {
            return Err(err("simulate", "initial state must be finite"));
        }
        match start {
            Start::Velocity(_) if !has_l => return Err(err("simulate.y", "the Lagrangian flow needs a Lagrangian")),
            Start::Phase(_) if !has_l && !has_h => return Err(err("simulate.xi", "the Hamiltonian flow needs a Lagrangian or a Hamiltonian")),
            _ => {}
        }
        for (i, name) in s.monitors.iter().enumerate() {
            let path = format!("simulate.monitors[{i}]");
            match name.as_str() {
                "charge_norm" if !matches!(family, Family::Wong(_)) => return Err(err(path, "charge_norm needs the wong preset")),
                "noether" if !has_noether => return Err(err(path, "the noether monitor needs a `noether` block")),
                n if MONITORS.contains(&n) => {}
                other => return Err(err(path, format!("unknown monitor {other:?} (known: {})", MONITORS.join(", ")))),
            }
        }
        Ok(SimulateSpec { t0: s.t0, t1: s.t1, h: s.h, x: s.x.clone(), start, monitors: s.monitors.clone() })
    }
}

/// Reads and validates a configuration file.
pub fn load(path: &std::path::Path) -> Result<Model, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| err("", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)?.build()
}
