//! Lagrangian and Hamiltonian dynamics on an algebroid.
//!
//! A Lagrangian lives on `E` (variables `x1..xn, y1..ym`), a Hamiltonian on
//! `E*` (variables `x1..xn, xi1..xim`). The phase dynamics of a Lagrangian is
//! the image of `dL` under the algebroid's `epsilon`; when the Legendre map
//! is invertible it is the Hamiltonian vector field of the energy.

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebroid::{anchor_apply, Algebroid, CheckReport, CotangentPoint, Residuals, Section, TangentDualPoint};
use crate::error::{Error, Result};
use crate::expr::{compile_all, coords, eval_all, CompiledExpr, Expr};
use crate::integrate::Trajectory;
use crate::lifts::{bundle_names, complete_lift_function, complete_lift_section};
use crate::linalg;

/// Newton iteration limit for the inverse Legendre map.
pub const NEWTON_MAX_ITER: usize = 50;
/// Newton stops once `|dL/dy - xi|` is below this times `max(1, |xi|)`.
pub const NEWTON_TOL: f64 = 1e-12;

/// A point `(x, y)` of `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

/// A point `(x, xi)` of `E*`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

impl VelocityPoint {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        VelocityPoint { x, y }
    }

    /// `x` followed by `y`.
    pub fn concat(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn split(state: &[f64], n: usize) -> Self {
        VelocityPoint { x: state[..n].to_vec(), y: state[n..].to_vec() }
    }
}

impl PhasePoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        PhasePoint { x, xi }
    }

    /// `x` followed by `xi`.
    pub fn concat(&self) -> Vec<f64> {
        self.x.iter().chain(&self.xi).copied().collect()
    }

    pub fn split(state: &[f64], n: usize) -> Self {
        PhasePoint { x: state[..n].to_vec(), xi: state[n..].to_vec() }
    }
}

fn check_vars(e: &Expr, n: usize, m: usize, fiber: &str, what: &str) -> Result<()> {
    for name in e.variables() {
        match coords::classify(&name) {
            Some(("x", a)) if a <= n => {}
            Some((p, i)) if p == fiber && i <= m => {}
            _ => {
                return Err(Error::StrayVariable {
                    what: what.to_string(),
                    allowed: format!("x1..x{n}, {fiber}1..{fiber}{m}"),
                    name,
                })
            }
        }
    }
    Ok(())
}

fn check_dims(what: &str, x: &[f64], fiber: &[f64], n: usize, m: usize) -> Result<()> {
    if x.len() != n || fiber.len() != m {
        return Err(Error::Shape(format!("{what} has dimensions ({}, {}), expected ({n}, {m})", x.len(), fiber.len())));
    }
    Ok(())
}

/// A Lagrangian `L(x, y)` with its first and second derivatives cached.
#[derive(Debug, Clone)]
pub struct Lagrangian {
    n: usize,
    m: usize,
    expr: Expr,
    dy: Vec<Expr>,
    dx: Vec<Expr>,
    /// `d^2L/dy^j dy^l`
    hess_yy: Vec<Vec<Expr>>,
    /// `d^2L/dy^j dx^a`
    hess_yx: Vec<Vec<Expr>>,
    compiled: Arc<CompiledLagrangian>,
}

#[derive(Debug)]
struct CompiledLagrangian {
    value: CompiledExpr,
    dy: Vec<CompiledExpr>,
    dx: Vec<CompiledExpr>,
    hess_yy: Vec<CompiledExpr>,
    hess_yx: Vec<CompiledExpr>,
}

impl Lagrangian {
    pub fn new(n: usize, m: usize, expr: Expr) -> Result<Self> {
        check_vars(&expr, n, m, "y", "Lagrangian")?;
        let xs = coords::x_names(n);
        let ys = coords::y_names(m);
        let dy: Vec<Expr> = ys.iter().map(|v| expr.differentiate(v)).collect();
        let dx: Vec<Expr> = xs.iter().map(|v| expr.differentiate(v)).collect();
        let hess_yy: Vec<Vec<Expr>> = dy.iter().map(|d| ys.iter().map(|v| d.differentiate(v)).collect()).collect();
        let hess_yx: Vec<Vec<Expr>> = dy.iter().map(|d| xs.iter().map(|v| d.differentiate(v)).collect()).collect();
        let slots = bundle_names(n, m);
        let flat = |v: &[Vec<Expr>]| -> Vec<Expr> { v.iter().flatten().cloned().collect() };
        let compiled = CompiledLagrangian {
            value: expr.compile(&slots)?,
            dy: compile_all(&dy, &slots)?,
            dx: compile_all(&dx, &slots)?,
            hess_yy: compile_all(&flat(&hess_yy), &slots)?,
            hess_yx: compile_all(&flat(&hess_yx), &slots)?,
        };
        Ok(Lagrangian { n, m, expr, dy, dx, hess_yy, hess_yx, compiled: Arc::new(compiled) })
    }

    pub fn parse(n: usize, m: usize, src: &str) -> Result<Self> {
        Lagrangian::new(n, m, crate::expr::parse(src)?.simplify())
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dl_dy(&self) -> &[Expr] {
        &self.dy
    }

    pub fn dl_dx(&self) -> &[Expr] {
        &self.dx
    }

    pub fn hessian_yy(&self) -> &[Vec<Expr>] {
        &self.hess_yy
    }

    pub fn hessian_yx(&self) -> &[Vec<Expr>] {
        &self.hess_yx
    }

    /// Liouville derivative `y^i dL/dy^i`.
    pub fn liouville(&self) -> Expr {
        let ys = coords::y_names(self.m);
        Expr::sum(ys.iter().zip(&self.dy).map(|(y, d)| Expr::mul(Expr::var(y), d.clone())))
    }

    /// `y^i dL/dy^i - L`, the energy on `E`.
    pub fn energy(&self) -> Expr {
        Expr::sub(self.liouville(), self.expr.clone())
    }

    fn point(&self, v: &VelocityPoint) -> Result<Vec<f64>> {
        check_dims("velocity point", &v.x, &v.y, self.n, self.m)?;
        Ok(v.concat())
    }

    pub fn value(&self, v: &VelocityPoint) -> Result<f64> {
        Ok(self.compiled.value.eval(&self.point(v)?)?)
    }

    pub fn dl_dy_at(&self, v: &VelocityPoint) -> Result<Vec<f64>> {
        Ok(eval_all(&self.compiled.dy, &self.point(v)?)?)
    }

    pub fn dl_dx_at(&self, v: &VelocityPoint) -> Result<Vec<f64>> {
        Ok(eval_all(&self.compiled.dx, &self.point(v)?)?)
    }

    pub fn hessian_yy_at(&self, v: &VelocityPoint) -> Result<DMatrix<f64>> {
        let vals = eval_all(&self.compiled.hess_yy, &self.point(v)?)?;
        Ok(DMatrix::from_row_slice(self.m, self.m, &vals))
    }

    pub fn hessian_yx_at(&self, v: &VelocityPoint) -> Result<DMatrix<f64>> {
        let vals = eval_all(&self.compiled.hess_yx, &self.point(v)?)?;
        Ok(DMatrix::from_row_slice(self.m, self.n, &vals))
    }
}

/// A function on `E*` that can report its value and gradient.
///
/// Implemented by symbolic [`Hamiltonian`]s and by [`LegendreTransform`],
/// which evaluates the energy through a numerical inverse Legendre map.
pub trait PhaseFunction {
    fn dims(&self) -> (usize, usize);
    fn value(&self, p: &PhasePoint) -> Result<f64>;
    /// `(dH/dx, dH/dxi)`.
    fn gradient(&self, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)>;
}

/// A Hamiltonian `H(x, xi)` with cached first derivatives.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    n: usize,
    m: usize,
    expr: Expr,
    dx: Vec<Expr>,
    dxi: Vec<Expr>,
    compiled: Arc<(CompiledExpr, Vec<CompiledExpr>, Vec<CompiledExpr>)>,
}

/// Variable order on `E*`: `x1..xn, xi1..xim`.
pub fn phase_names(n: usize, m: usize) -> Vec<String> {
    let mut names = coords::x_names(n);
    names.extend(coords::xi_names(m));
    names
}

impl Hamiltonian {
    pub fn new(n: usize, m: usize, expr: Expr) -> Result<Self> {
        check_vars(&expr, n, m, "xi", "Hamiltonian")?;
        let dx: Vec<Expr> = coords::x_names(n).iter().map(|v| expr.differentiate(v)).collect();
        let dxi: Vec<Expr> = coords::xi_names(m).iter().map(|v| expr.differentiate(v)).collect();
        let slots = phase_names(n, m);
        let compiled = (expr.compile(&slots)?, compile_all(&dx, &slots)?, compile_all(&dxi, &slots)?);
        Ok(Hamiltonian { n, m, expr, dx, dxi, compiled: Arc::new(compiled) })
    }

    pub fn parse(n: usize, m: usize, src: &str) -> Result<Self> {
        Hamiltonian::new(n, m, crate::expr::parse(src)?.simplify())
    }

    /// `H = (y dL/dy - L)` with `y` replaced by `inverse[i]`, a closed-form
    /// inverse Legendre map `y^i = phi^i(x, xi)`.
    pub fn from_lagrangian(l: &Lagrangian, inverse: &[Expr]) -> Result<Self> {
        let (n, m) = l.dims();
        if inverse.len() != m {
            return Err(Error::Shape(format!("inverse Legendre map has {} components, expected {m}", inverse.len())));
        }
        for (i, e) in inverse.iter().enumerate() {
            check_vars(e, n, m, "xi", &format!("inverse Legendre map [{i}]"))?;
        }
        let energy = l.energy();
        let h = energy.substitute_with(&|name| match coords::classify(name) {
            Some(("y", i)) => Some(inverse[i - 1].clone()),
            _ => None,
        });
        Hamiltonian::new(n, m, h)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn dh_dx(&self) -> &[Expr] {
        &self.dx
    }

    pub fn dh_dxi(&self) -> &[Expr] {
        &self.dxi
    }
}

impl PhaseFunction for Hamiltonian {
    fn dims(&self) -> (usize, usize) {
        (self.n, self.m)
    }

    fn value(&self, p: &PhasePoint) -> Result<f64> {
        check_dims("phase point", &p.x, &p.xi, self.n, self.m)?;
        Ok(self.compiled.0.eval(&p.concat())?)
    }

    fn gradient(&self, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
        check_dims("phase point", &p.x, &p.xi, self.n, self.m)?;
        let pt = p.concat();
        Ok((eval_all(&self.compiled.1, &pt)?, eval_all(&self.compiled.2, &pt)?))
    }
}

/// `(x, dL/dy(x, y))`.
pub fn legendre_map(l: &Lagrangian, v: &VelocityPoint) -> Result<PhasePoint> {
    Ok(PhasePoint { x: v.x.clone(), xi: l.dl_dy_at(v)? })
}

/// Solves `dL/dy(x, y) = xi` for `y` by Newton's method from `y_guess`.
///
/// Fails with [`Error::Singular`] if the fiber Hessian is numerically
/// singular and with [`Error::NoConvergence`] after [`NEWTON_MAX_ITER`]
/// iterations; both mean the Lagrangian is not hyperregular near `p`.
pub fn legendre_inverse(l: &Lagrangian, p: &PhasePoint, y_guess: &[f64]) -> Result<VelocityPoint> {
    let (n, m) = l.dims();
    check_dims("phase point", &p.x, &p.xi, n, m)?;
    if y_guess.len() != m {
        return Err(Error::Shape(format!("initial guess has length {}, expected {m}", y_guess.len())));
    }
    let tol = NEWTON_TOL * p.xi.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
    let mut v = VelocityPoint { x: p.x.clone(), y: y_guess.to_vec() };
    let residual = |v: &VelocityPoint| -> Result<(Vec<f64>, f64)> {
        let r: Vec<f64> = l.dl_dy_at(v)?.iter().zip(&p.xi).map(|(a, b)| a - b).collect();
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok((r, norm))
    };
    let (mut r, mut norm) = residual(&v)?;
    for _ in 0..NEWTON_MAX_ITER {
        if norm < tol {
            return Ok(polish(l, v, &r, norm, &residual));
        }
        let step = linalg::solve(&l.hessian_yy_at(&v)?, &r, "Lagrangian fiber Hessian")?;
        // halve the step while the residual grows; plain Newton near the root
        let mut scale = 1.0;
        loop {
            let trial = VelocityPoint { x: v.x.clone(), y: v.y.iter().zip(&step).map(|(y, s)| y - scale * s).collect() };
            match residual(&trial) {
                Ok((r2, n2)) if n2 < norm || scale < 1.0 / 64.0 => {
                    (v, r, norm) = (trial, r2, n2);
                    break;
                }
                Err(e) if scale < 1.0 / 64.0 => return Err(e),
                _ => scale *= 0.5,
            }
        }
    }
    if norm < tol {
        return Ok(polish(l, v, &r, norm, &residual));
    }
    Err(Error::NoConvergence { iterations: NEWTON_MAX_ITER, residual: norm })
}

/// One more full Newton step from a converged iterate, kept only if it does
/// not increase the residual. The stopping test bounds the residual, not the
/// error in `y`, which can be larger by the inverse Hessian.
fn polish(
    l: &Lagrangian,
    v: VelocityPoint,
    r: &[f64],
    norm: f64,
    residual: &dyn Fn(&VelocityPoint) -> Result<(Vec<f64>, f64)>,
) -> VelocityPoint {
    if norm == 0.0 {
        return v;
    }
    let Ok(step) = l.hessian_yy_at(&v).and_then(|h| linalg::solve(&h, r, "Lagrangian fiber Hessian")) else {
        return v;
    };
    let trial = VelocityPoint { x: v.x.clone(), y: v.y.iter().zip(&step).map(|(y, s)| y - s).collect() };
    match residual(&trial) {
        Ok((_, n2)) if n2 <= norm => trial,
        _ => v,
    }
}

/// Phase dynamics at `v`: `epsilon(x, y, dL/dx, dL/dy)`.
pub fn dynamics_d(a: &Algebroid, l: &Lagrangian, v: &VelocityPoint) -> Result<TangentDualPoint> {
    let q = CotangentPoint { x: v.x.clone(), y: v.y.clone(), p: l.dl_dx_at(v)?, pi: l.dl_dy_at(v)? };
    a.epsilon_map(&q)
}

/// The explicit Euler-Lagrange field on `E`:
/// `xdot = rho y` and `H_yy ydot = c^k_ij y^i L_k + sigma^a_j L_a - L_ya xdot^a`.
pub fn el2_field(a: &Algebroid, l: &Lagrangian, v: &VelocityPoint) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (a.base_dim(), a.rank());
    if l.dims() != (n, m) {
        return Err(Error::Shape(format!("Lagrangian dimensions {:?} do not match algebroid ({n}, {m})", l.dims())));
    }
    let s = a.at(&v.x)?;
    let xdot = anchor_apply(&s.rho, &v.y);
    let ly = l.dl_dy_at(v)?;
    let lx = l.dl_dx_at(v)?;
    let mixed = l.hessian_yx_at(v)?;
    let rhs: Vec<f64> = (0..m)
        .map(|j| {
            let mut r = 0.0;
            for i in 0..m {
                for k in 0..m {
                    r += s.c(k, i, j) * v.y[i] * ly[k];
                }
            }
            for b in 0..n {
                r += s.sigma[(b, j)] * lx[b] - mixed[(j, b)] * xdot[b];
            }
            r
        })
        .collect();
    let ydot = linalg::solve(&l.hessian_yy_at(v)?, &rhs, "Lagrangian fiber Hessian")?;
    Ok((xdot, ydot))
}

/// Centered difference of a series on a possibly non-uniform grid, at
/// interior index `k`.
fn centered(times: &[f64], values: &[f64], k: usize) -> f64 {
    (values[k + 1] - values[k - 1]) / (times[k + 1] - times[k - 1])
}

/// Residual of the weak Euler-Lagrange equations along `gamma = (x, y)`
/// with companion path `y0`:
/// `max |xdot - rho y0|, |d/dt dL/dy(x, y) - c y0 dL/dy(x, y0) - sigma dL/dx(x, y0)|`
/// over interior grid points, with time derivatives by centered differences.
pub fn el1_residual(a: &Algebroid, l: &Lagrangian, gamma: &Trajectory, y0: &Trajectory) -> Result<f64> {
    let (n, m) = (a.base_dim(), a.rank());
    if gamma.times != y0.times {
        return Err(Error::Precondition("gamma and y0 must share their time grid".into()));
    }
    let len = gamma.len();
    if len < 3 {
        return Err(Error::Precondition("need at least three samples for centered differences".into()));
    }
    let mut xs = Vec::with_capacity(len);
    let mut momenta = Vec::with_capacity(len);
    for (k, (s, s0)) in gamma.states.iter().zip(&y0.states).enumerate() {
        if s.len() != n + m || s0.len() != n + m {
            return Err(Error::Shape(format!("trajectory rows must have width {}", n + m)));
        }
        if linalg::max_abs_diff(&s[..n], &s0[..n]) > 1e-12 {
            return Err(Error::Precondition(format!("x paths differ at sample {k}")));
        }
        let (v, v0) = (VelocityPoint::split(s, n), VelocityPoint::split(s0, n));
        let (xi, xi0) = (l.dl_dy_at(&v)?, l.dl_dy_at(&v0)?);
        let gap = linalg::max_abs_diff(&xi, &xi0);
        if gap > 1e-10 {
            return Err(Error::Precondition(format!("Legendre images of y and y0 differ by {gap:e} at sample {k}")));
        }
        xs.push(v.x);
        momenta.push(xi);
    }
    let mut worst: f64 = 0.0;
    for k in 1..len - 1 {
        let v0 = VelocityPoint::split(&y0.states[k], n);
        let s = a.at(&v0.x)?;
        let rho_y0 = anchor_apply(&s.rho, &v0.y);
        for b in 0..n {
            let series: Vec<f64> = (k - 1..=k + 1).map(|q| xs[q][b]).collect();
            let xdot = (series[2] - series[0]) / (gamma.times[k + 1] - gamma.times[k - 1]);
            worst = worst.max((xdot - rho_y0[b]).abs());
        }
        let (ly0, lx0) = (l.dl_dy_at(&v0)?, l.dl_dx_at(&v0)?);
        for j in 0..m {
            let series: Vec<f64> = momenta.iter().map(|p| p[j]).collect();
            let dp = centered(&gamma.times, &series, k);
            let mut rhs = 0.0;
            for i in 0..m {
                for kk in 0..m {
                    rhs += s.c(kk, i, j) * v0.y[i] * ly0[kk];
                }
            }
            for b in 0..n {
                rhs += s.sigma[(b, j)] * lx0[b];
            }
            worst = worst.max((dp - rhs).abs());
        }
    }
    Ok(worst)
}

/// Contraction of the algebroid tensor with `dH` in the first slot:
/// `xdot^b = rho^b_i dH/dxi_i`, `xidot_j = c^k_ij xi_k dH/dxi_i - sigma^a_j dH/dx^a`.
pub fn hamiltonian_field<H: PhaseFunction + ?Sized>(a: &Algebroid, h: &H, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (a.base_dim(), a.rank());
    if h.dims() != (n, m) {
        return Err(Error::Shape(format!("Hamiltonian dimensions {:?} do not match algebroid ({n}, {m})", h.dims())));
    }
    let (hx, hxi) = h.gradient(p)?;
    hamiltonian_field_from_gradient(a, p, &hx, &hxi)
}

/// [`hamiltonian_field`] for a gradient computed elsewhere.
pub fn hamiltonian_field_from_gradient(
    a: &Algebroid,
    p: &PhasePoint,
    hx: &[f64],
    hxi: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, m) = (a.base_dim(), a.rank());
    let s = a.at(&p.x)?;
    let xdot = anchor_apply(&s.rho, hxi);
    let xidot = (0..m)
        .map(|j| {
            let mut r = 0.0;
            for i in 0..m {
                for k in 0..m {
                    r += s.c(k, i, j) * p.xi[k] * hxi[i];
                }
            }
            for b in 0..n {
                r -= s.sigma[(b, j)] * hx[b];
            }
            r
        })
        .collect();
    Ok((xdot, xidot))
}

/// The energy of `L` expressed on `E*` through a numerical inverse Legendre
/// map. Its gradient uses `dH/dxi = y` and `dH/dx = -dL/dx(x, y)`.
#[derive(Debug, Clone)]
pub struct LegendreTransform {
    pub lagrangian: Lagrangian,
}

/// Value and gradient of a [`LegendreTransform`] at one phase point.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreEval {
    pub value: f64,
    pub dh_dx: Vec<f64>,
    /// The velocity solving the inverse Legendre map; equals `dH/dxi`.
    pub y: Vec<f64>,
}

impl LegendreTransform {
    pub fn new(lagrangian: Lagrangian) -> Self {
        LegendreTransform { lagrangian }
    }

    /// Solves the inverse Legendre map from `guess`, so integrators can
    /// warm-start with the previous velocity.
    pub fn evaluate_from(&self, p: &PhasePoint, guess: &[f64]) -> Result<LegendreEval> {
        let v = legendre_inverse(&self.lagrangian, p, guess)?;
        let ly = self.lagrangian.dl_dy_at(&v)?;
        let value = v.y.iter().zip(&ly).map(|(a, b)| a * b).sum::<f64>() - self.lagrangian.value(&v)?;
        let dh_dx = self.lagrangian.dl_dx_at(&v)?.iter().map(|d| -d).collect();
        Ok(LegendreEval { value, dh_dx, y: v.y })
    }
}

impl PhaseFunction for LegendreTransform {
    fn dims(&self) -> (usize, usize) {
        self.lagrangian.dims()
    }

    fn value(&self, p: &PhasePoint) -> Result<f64> {
        Ok(self.evaluate_from(p, &vec![0.0; self.lagrangian.m])?.value)
    }

    fn gradient(&self, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let e = self.evaluate_from(p, &vec![0.0; self.lagrangian.m])?;
        Ok((e.dh_dx, e.y))
    }
}

/// `H(x, xi) = y dL/dy - L` at `y = legendre_inverse(x, xi)`.
pub fn hamiltonian_from_lagrangian(l: &Lagrangian, p: &PhasePoint, y_guess: &[f64]) -> Result<f64> {
    Ok(LegendreTransform::new(l.clone()).evaluate_from(p, y_guess)?.value)
}

/// Compares `L` differentiated along the complete lift of `X` with the
/// complete lift of `f` at sample points `(x, y)` of `E`.
pub fn noether_check(
    a: &Algebroid,
    l: &Lagrangian,
    x: &Section,
    f: &Expr,
    samples: &[Vec<f64>],
    tol: f64,
) -> Result<CheckReport> {
    let (n, m) = (a.base_dim(), a.rank());
    let lhs = complete_lift_section(a, x)?.apply(l.expr());
    let rhs = complete_lift_function(a, f)?;
    let mut r = Residuals::new(bundle_names(n, m));
    r.push("Lie derivative of L minus lift of f", Expr::sub(lhs, rhs));
    r.check("noether", samples, tol)
}

/// `X^i dL/dy^i - f`, conserved along Euler-Lagrange trajectories when
/// [`noether_check`] passes.
pub fn noether_integral(l: &Lagrangian, x: &Section, f: &Expr) -> Result<Expr> {
    let (n, m) = l.dims();
    if x.rank() != m {
        return Err(Error::Shape(format!("section has {} coefficients, expected {m}", x.rank())));
    }
    crate::algebroid::check_base_expr(f, n, "Noether function")?;
    let pairing = Expr::sum(x.coeffs.iter().zip(l.dl_dy()).map(|(c, d)| Expr::mul(c.clone(), d.clone())));
    Ok(Expr::sub(pairing, f.clone()))
}
