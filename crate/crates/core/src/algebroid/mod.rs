//! General algebroids in a single chart.
//!
//! An [`Algebroid`] is the triple of structure functions `(rho, sigma, c)`.
//! It determines the double vector bundle morphism `T*E -> TE*`
//! ([`Algebroid::epsilon_map`]), the fiberwise-linear 2-tensor on `E*`
//! ([`Algebroid::lambda_matrix`]) and the bracket of sections
//! ([`Algebroid::bracket`]). Functions on `E*` are bracketed with the tensor
//! in the first slot: `{F, G} = Lambda(dF, dG)`.

mod check;

use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::expr::{coords, CompiledExpr, Expr};
use crate::sample::DEFAULT_TOLERANCE;

pub use check::{CheckReport, Residuals};

/// Index order of [`Algebroid::c`]: `c[k][i][j]` is the coefficient of `e_k`
/// in `[e_i, e_j]`.
pub type StructureConstants = Vec<Vec<Vec<Expr>>>;

#[derive(Debug, Clone)]
pub struct Algebroid {
    n: usize,
    m: usize,
    rho: Vec<Vec<Expr>>,
    sigma: Vec<Vec<Expr>>,
    c: StructureConstants,
    compiled: Arc<Compiled>,
}

#[derive(Debug)]
struct Compiled {
    x_names: Vec<String>,
    rho: Vec<CompiledExpr>,
    sigma: Vec<CompiledExpr>,
    c: Vec<CompiledExpr>,
}

/// Structure functions evaluated at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureValues {
    pub n: usize,
    pub m: usize,
    /// `n x m`, entry `(a, i)` is `rho^a_i`.
    pub rho: DMatrix<f64>,
    /// `n x m`, entry `(a, j)` is `sigma^a_j`.
    pub sigma: DMatrix<f64>,
    c: Vec<f64>,
}

impl StructureValues {
    #[inline]
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[(k * self.m + i) * self.m + j]
    }
}

/// A point `(x, y, p, pi)` of `T*E`.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub p: Vec<f64>,
    pub pi: Vec<f64>,
}

/// A point `(x, xi, xdot, xidot)` of `TE*`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentDualPoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    pub xdot: Vec<f64>,
    pub xidot: Vec<f64>,
}

/// A section `X = f^i(x) e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Section {
    pub coeffs: Vec<Expr>,
}

impl Section {
    pub fn new(coeffs: Vec<Expr>) -> Self {
        Section { coeffs }
    }

    pub fn parse(coeffs: &[&str]) -> Result<Self> {
        Ok(Section { coeffs: coeffs.iter().map(|s| crate::expr::parse(s).map(|e| e.simplify())).collect::<Result<_, _>>()? })
    }

    /// The basis section `e_i` (0-based).
    pub fn basis(m: usize, i: usize) -> Self {
        Section { coeffs: (0..m).map(|k| if k == i { Expr::one() } else { Expr::zero() }).collect() }
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    pub fn scaled(&self, f: &Expr) -> Section {
        Section { coeffs: self.coeffs.iter().map(|c| Expr::mul(f.clone(), c.clone())).collect() }
    }

    pub fn plus(&self, other: &Section) -> Section {
        Section { coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| Expr::add(a.clone(), b.clone())).collect() }
    }

    /// Coefficients evaluated at a base point with coordinates `x1..xn`.
    pub fn eval_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        let names = coords::x_names(x.len());
        self.coeffs.iter().map(|c| Ok(c.compile(&names)?.eval(x)?)).collect()
    }
}

/// Which anchor, if any, vanishes identically.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnchorClass {
    /// Right anchor zero: the bracket is a left connection.
    LeftConnection,
    /// Left anchor zero.
    RightConnection,
    /// Both anchors zero: the bracket is tensorial.
    Tensorial,
    General,
}

impl std::fmt::Display for AnchorClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AnchorClass::LeftConnection => "left connection",
            AnchorClass::RightConnection => "right connection",
            AnchorClass::Tensorial => "tensorial bracket",
            AnchorClass::General => "general algebroid",
        })
    }
}

/// Rejects expressions with variables outside `x1..xn`.
pub(crate) fn check_base_expr(e: &Expr, n: usize, what: &str) -> Result<()> {
    for name in e.variables() {
        match coords::classify(&name) {
            Some(("x", a)) if a <= n => {}
            _ => {
                return Err(Error::StrayVariable {
                    what: what.to_string(),
                    allowed: if n == 0 { "constants".into() } else { format!("x1..x{n}") },
                    name,
                })
            }
        }
    }
    Ok(())
}

pub(crate) fn shape_2(v: &[Vec<Expr>], rows: usize, cols: usize, what: &str) -> Result<()> {
    if v.len() != rows || v.iter().any(|r| r.len() != cols) {
        let got: Vec<usize> = v.iter().map(Vec::len).collect();
        return Err(Error::Shape(format!("{what} must be {rows}x{cols}, got {} rows of lengths {got:?}", v.len())));
    }
    Ok(())
}

impl Algebroid {
    /// Validates shapes and variable usage and builds the algebroid.
    pub fn new(n: usize, m: usize, rho: Vec<Vec<Expr>>, sigma: Vec<Vec<Expr>>, c: StructureConstants) -> Result<Self> {
        shape_2(&rho, n, m, "rho")?;
        shape_2(&sigma, n, m, "sigma")?;
        if c.len() != m {
            return Err(Error::Shape(format!("c must have {m} upper-index slices, got {}", c.len())));
        }
        for (k, ck) in c.iter().enumerate() {
            shape_2(ck, m, m, &format!("c[{k}]"))?;
        }
        for (a, row) in rho.iter().enumerate() {
            for (i, e) in row.iter().enumerate() {
                check_base_expr(e, n, &format!("rho[{a}][{i}]"))?;
                check_base_expr(&sigma[a][i], n, &format!("sigma[{a}][{i}]"))?;
            }
        }
        for (k, ck) in c.iter().enumerate() {
            for (i, row) in ck.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    check_base_expr(e, n, &format!("c[{k}][{i}][{j}]"))?;
                }
            }
        }
        let x_names = coords::x_names(n);
        let compile_all = |rows: &mut dyn Iterator<Item = &Expr>| -> Result<Vec<CompiledExpr>> {
            rows.map(|e| Ok(e.compile(&x_names)?)).collect()
        };
        let compiled = Compiled {
            rho: compile_all(&mut rho.iter().flatten())?,
            sigma: compile_all(&mut sigma.iter().flatten())?,
            c: compile_all(&mut c.iter().flatten().flatten())?,
            x_names: x_names.clone(),
        };
        Ok(Algebroid { n, m, rho, sigma, c, compiled: Arc::new(compiled) })
    }

    /// Parses string arrays; see [`Algebroid::new`].
    pub fn from_strings(n: usize, m: usize, rho: &[Vec<&str>], sigma: &[Vec<&str>], c: &[Vec<Vec<&str>>]) -> Result<Self> {
        let p = |s: &&str| crate::expr::parse(s).map(|e| e.simplify());
        let grid = |v: &[Vec<&str>]| -> Result<Vec<Vec<Expr>>> {
            v.iter().map(|r| r.iter().map(p).collect::<Result<Vec<_>, _>>().map_err(Error::from)).collect()
        };
        let c = c.iter().map(|ck| grid(ck)).collect::<Result<Vec<_>>>()?;
        Algebroid::new(n, m, grid(rho)?, grid(sigma)?, c)
    }

    /// The canonical Lie algebroid `TM` in adapted coordinates.
    pub fn tangent_bundle(n: usize) -> Self {
        let id = |a: usize, i: usize| if a == i { Expr::one() } else { Expr::zero() };
        let rho: Vec<Vec<Expr>> = (0..n).map(|a| (0..n).map(|i| id(a, i)).collect()).collect();
        let c = vec![vec![vec![Expr::zero(); n]; n]; n];
        Algebroid::new(n, n, rho.clone(), rho, c).expect("tangent bundle is well formed")
    }

    /// An algebra over a point, from constants `c[k][i][j]`.
    pub fn lie_algebra(c: &[Vec<Vec<f64>>]) -> Result<Self> {
        let m = c.len();
        let c = c.iter().map(|ck| ck.iter().map(|r| r.iter().map(|&v| Expr::num(v)).collect()).collect()).collect();
        Algebroid::new(0, m, vec![], vec![], c)
    }

    /// `so(3)`: `[e_i, e_j] = eps_ijk e_k`.
    pub fn so3() -> Self {
        Algebroid::lie_algebra(&so3_constants()).expect("so(3) is well formed")
    }

    /// `sl(2, R)` in the basis `(h, e, f)`: `[h,e] = 2e`, `[h,f] = -2f`, `[e,f] = h`.
    pub fn sl2() -> Self {
        Algebroid::lie_algebra(&sl2_constants()).expect("sl(2) is well formed")
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.m
    }

    pub fn rho(&self) -> &[Vec<Expr>] {
        &self.rho
    }

    pub fn sigma(&self) -> &[Vec<Expr>] {
        &self.sigma
    }

    pub fn c(&self) -> &StructureConstants {
        &self.c
    }

    /// Left and right anchor matrices, `(rho, sigma)`.
    pub fn anchors(&self) -> (&[Vec<Expr>], &[Vec<Expr>]) {
        (&self.rho, &self.sigma)
    }

    pub fn classify_anchors(&self) -> AnchorClass {
        let zero = |v: &[Vec<Expr>]| v.iter().flatten().all(|e| e.simplify().is_zero());
        match (zero(&self.rho), zero(&self.sigma)) {
            (true, true) => AnchorClass::Tensorial,
            (false, true) => AnchorClass::LeftConnection,
            (true, false) => AnchorClass::RightConnection,
            (false, false) => AnchorClass::General,
        }
    }

    pub fn x_names(&self) -> &[String] {
        &self.compiled.x_names
    }

    fn check_len(&self, what: &str, v: &[f64], want: usize) -> Result<()> {
        if v.len() != want {
            return Err(Error::Shape(format!("{what} has length {}, expected {want}", v.len())));
        }
        Ok(())
    }

    /// Evaluates all structure functions at `x`.
    pub fn at(&self, x: &[f64]) -> Result<StructureValues> {
        self.check_len("x", x, self.n)?;
        let (n, m) = (self.n, self.m);
        let eval = |v: &[CompiledExpr]| -> Result<Vec<f64>> { v.iter().map(|e| Ok(e.eval(x)?)).collect() };
        Ok(StructureValues {
            n,
            m,
            rho: DMatrix::from_row_slice(n, m, &eval(&self.compiled.rho)?),
            sigma: DMatrix::from_row_slice(n, m, &eval(&self.compiled.sigma)?),
            c: eval(&self.compiled.c)?,
        })
    }

    /// `epsilon(x, y, p, pi) = (x, pi, rho^b_k y^k, c^k_ij y^i pi_k + sigma^a_j p_a)`.
    pub fn epsilon_map(&self, q: &CotangentPoint) -> Result<TangentDualPoint> {
        self.check_len("y", &q.y, self.m)?;
        self.check_len("p", &q.p, self.n)?;
        self.check_len("pi", &q.pi, self.m)?;
        let s = self.at(&q.x)?;
        Ok(TangentDualPoint {
            x: q.x.clone(),
            xi: q.pi.clone(),
            xdot: anchor_apply(&s.rho, &q.y),
            xidot: (0..self.m)
                .map(|j| {
                    let bracket: f64 = (0..self.m)
                        .flat_map(|i| (0..self.m).map(move |k| (i, k)))
                        .map(|(i, k)| s.c(k, i, j) * q.y[i] * q.pi[k])
                        .sum();
                    let core: f64 = (0..self.n).map(|a| s.sigma[(a, j)] * q.p[a]).sum();
                    bracket + core
                })
                .collect(),
        })
    }

    /// Matrix of the linear tensor on `E*` in coordinate order
    /// `(xi_1..xi_m, x^1..x^n)`.
    pub fn lambda_matrix(&self, x: &[f64], xi: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len("xi", xi, self.m)?;
        let s = self.at(x)?;
        Ok(lambda_from_values(&s, xi))
    }

    /// Symbolic blocks of the linear tensor, in `x1..xn, xi1..xim`.
    pub fn lambda_symbolic(&self) -> LambdaBlocks {
        let (n, m) = (self.n, self.m);
        let xi: Vec<Expr> = coords::xi_names(m).iter().map(Expr::var).collect();
        LambdaBlocks {
            xi_xi: (0..m)
                .map(|i| (0..m).map(|j| Expr::sum((0..m).map(|k| Expr::mul(self.c[k][i][j].clone(), xi[k].clone())))).collect())
                .collect(),
            xi_x: (0..m).map(|i| (0..n).map(|b| self.rho[b][i].clone()).collect()).collect(),
            x_xi: (0..n).map(|a| (0..m).map(|j| Expr::neg(self.sigma[a][j].clone())).collect()).collect(),
        }
    }

    /// `[X, Y]^k = c^k_ij f^i g^j + rho^a_i f^i dg^k/dx^a - sigma^a_j g^j df^k/dx^a`.
    pub fn bracket(&self, x: &Section, y: &Section) -> Result<Section> {
        for (what, s) in [("X", x), ("Y", y)] {
            if s.rank() != self.m {
                return Err(Error::Shape(format!("section {what} has {} coefficients, rank is {}", s.rank(), self.m)));
            }
            for (i, e) in s.coeffs.iter().enumerate() {
                check_base_expr(e, self.n, &format!("section {what}[{i}]"))?;
            }
        }
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &Section, y: &Section) -> Section {
        let (n, m) = (self.n, self.m);
        let names = &self.compiled.x_names;
        let (f, g) = (&x.coeffs, &y.coeffs);
        let df: Vec<Vec<Expr>> = f.iter().map(|fk| names.iter().map(|v| fk.differentiate(v)).collect()).collect();
        let dg: Vec<Vec<Expr>> = g.iter().map(|gk| names.iter().map(|v| gk.differentiate(v)).collect()).collect();
        // rho(X)^a and sigma(Y)^a as base vector fields
        let rho_x: Vec<Expr> = (0..n).map(|a| Expr::sum((0..m).map(|i| Expr::mul(self.rho[a][i].clone(), f[i].clone())))).collect();
        let sigma_y: Vec<Expr> =
            (0..n).map(|a| Expr::sum((0..m).map(|j| Expr::mul(self.sigma[a][j].clone(), g[j].clone())))).collect();
        let coeffs = (0..m)
            .map(|k| {
                let algebraic = Expr::sum(
                    (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| {
                        Expr::mul(self.c[k][i][j].clone(), Expr::mul(f[i].clone(), g[j].clone()))
                    }),
                );
                let left = Expr::sum((0..n).map(|a| Expr::mul(rho_x[a].clone(), dg[k][a].clone())));
                let right = Expr::sum((0..n).map(|a| Expr::mul(sigma_y[a].clone(), df[k][a].clone())));
                Expr::sub(Expr::add(algebraic, left), right)
            })
            .collect();
        Section { coeffs }
    }

    /// The algebroid of the transposed tensor:
    /// `c+^k_ij = c^k_ji`, `rho+ = -sigma`, `sigma+ = -rho`.
    pub fn adjoint(&self) -> Algebroid {
        let neg = |v: &[Vec<Expr>]| v.iter().map(|r| r.iter().map(|e| Expr::neg(e.clone())).collect()).collect();
        let m = self.m;
        let c = (0..m).map(|k| (0..m).map(|i| (0..m).map(|j| self.c[k][j][i].clone()).collect()).collect()).collect();
        Algebroid::new(self.n, m, neg(&self.sigma), neg(&self.rho), c).expect("adjoint preserves shapes")
    }

    /// Skew symmetry: `c^k_ij = -c^k_ji` and `rho = sigma` at every sample.
    pub fn check_skew(&self, samples: &[Vec<f64>], tol: f64) -> Result<CheckReport> {
        self.skew_residuals().check("skew", samples, tol)
    }

    fn skew_residuals(&self) -> Residuals {
        let m = self.m;
        let mut r = Residuals::new(self.compiled.x_names.clone());
        for k in 0..m {
            for i in 0..m {
                for j in i..m {
                    r.push(format!("c[{k}][{i}][{j}] + c[{k}][{j}][{i}]"), Expr::add(self.c[k][i][j].clone(), self.c[k][j][i].clone()));
                }
            }
        }
        for a in 0..self.n {
            for i in 0..m {
                r.push(format!("rho[{a}][{i}] - sigma[{a}][{i}]"), Expr::sub(self.rho[a][i].clone(), self.sigma[a][i].clone()));
            }
        }
        r
    }

    /// Lie algebroid conditions: skew symmetry, vanishing Jacobiator on
    /// basis sections, and the anchor as a bracket homomorphism.
    pub fn check_lie(&self, samples: &[Vec<f64>], tol: f64) -> Result<CheckReport> {
        let mut r = self.skew_residuals();
        for (label, expr) in self.jacobiator_residuals() {
            r.push(label, expr);
        }
        for (label, expr) in self.anchor_homomorphism_residuals() {
            r.push(label, expr);
        }
        r.check("lie", samples, tol)
    }

    /// Coefficients of `[[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]`.
    pub fn jacobiator(&self, i: usize, j: usize, k: usize) -> Section {
        let e = |t: usize| Section::basis(self.m, t);
        let term = |a: usize, b: usize, c: usize| self.bracket_unchecked(&self.bracket_unchecked(&e(a), &e(b)), &e(c));
        term(i, j, k).plus(&term(j, k, i)).plus(&term(k, i, j))
    }

    fn jacobiator_residuals(&self) -> Vec<(String, Expr)> {
        let m = self.m;
        let mut out = Vec::new();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for (l, coeff) in self.jacobiator(i, j, k).coeffs.into_iter().enumerate() {
                        out.push((format!("Jacobiator(e{}, e{}, e{})^{}", i + 1, j + 1, k + 1, l + 1), coeff));
                    }
                }
            }
        }
        out
    }

    /// `rho([e_i,e_j])^a - [rho(e_i), rho(e_j)]^a` for all `i, j, a`.
    fn anchor_homomorphism_residuals(&self) -> Vec<(String, Expr)> {
        let (n, m) = (self.n, self.m);
        let names = &self.compiled.x_names;
        let mut out = Vec::new();
        for i in 0..m {
            for j in 0..m {
                for a in 0..n {
                    let image = Expr::sum((0..m).map(|k| Expr::mul(self.rho[a][k].clone(), self.c[k][i][j].clone())));
                    let commutator = Expr::sum((0..n).map(|b| {
                        Expr::sub(
                            Expr::mul(self.rho[b][i].clone(), self.rho[a][j].differentiate(&names[b])),
                            Expr::mul(self.rho[b][j].clone(), self.rho[a][i].differentiate(&names[b])),
                        )
                    }));
                    out.push((format!("anchor homomorphism (e{}, e{})^x{}", i + 1, j + 1, a + 1), Expr::sub(image, commutator)));
                }
            }
        }
        out
    }

    /// Transports the structure along a bundle automorphism `phi` (columns
    /// are the images of basis sections). The result `A'` satisfies
    /// `[phi X, phi Y]' = phi [X, Y]` and `rho' phi = rho`, `sigma' phi = sigma`.
    pub fn transport(&self, phi: &[Vec<Expr>], phi_inv: &[Vec<Expr>], samples: &[Vec<f64>]) -> Result<Algebroid> {
        let (n, m) = (self.n, self.m);
        shape_2(phi, m, m, "phi")?;
        shape_2(phi_inv, m, m, "phi_inv")?;
        for (what, mat) in [("phi", phi), ("phi_inv", phi_inv)] {
            for (i, row) in mat.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    check_base_expr(e, n, &format!("{what}[{i}][{j}]"))?;
                }
            }
        }
        let product: Vec<Vec<Expr>> = (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let entry = Expr::sum((0..m).map(|k| Expr::mul(phi[i][k].clone(), phi_inv[k][j].clone())));
                        if i == j {
                            Expr::sub(entry, Expr::one())
                        } else {
                            entry
                        }
                    })
                    .collect()
            })
            .collect();
        let mut r = Residuals::new(self.compiled.x_names.clone());
        for (i, row) in product.into_iter().enumerate() {
            for (j, e) in row.into_iter().enumerate() {
                r.push(format!("(phi*phi_inv - I)[{i}][{j}]"), e);
            }
        }
        let report = r.check("phi inverse", samples, 1e-10)?;
        if !report.passed {
            return Err(Error::Precondition(format!("phi_inv is not the inverse of phi: {report}")));
        }
        let matmul = |a: &[Vec<Expr>], rows: usize| -> Vec<Vec<Expr>> {
            (0..rows)
                .map(|r| (0..m).map(|j| Expr::sum((0..m).map(|k| Expr::mul(a[r][k].clone(), phi_inv[k][j].clone())))).collect())
                .collect()
        };
        let rho = matmul(&self.rho, n);
        let sigma = matmul(&self.sigma, n);
        let pulled: Vec<Section> = (0..m).map(|i| Section::new((0..m).map(|k| phi_inv[k][i].clone()).collect())).collect();
        let mut c = vec![vec![vec![Expr::zero(); m]; m]; m];
        for i in 0..m {
            for j in 0..m {
                let b = self.bracket_unchecked(&pulled[i], &pulled[j]);
                for (k, ck) in c.iter_mut().enumerate() {
                    ck[i][j] = Expr::sum((0..m).map(|l| Expr::mul(phi[k][l].clone(), b.coeffs[l].clone())));
                }
            }
        }
        Algebroid::new(n, m, rho, sigma, c)
    }

    /// Default tolerance for checks by evaluation.
    pub const TOLERANCE: f64 = DEFAULT_TOLERANCE;
}

/// `rho^b_k y^k`.
pub(crate) fn anchor_apply(anchor: &DMatrix<f64>, y: &[f64]) -> Vec<f64> {
    (0..anchor.nrows()).map(|b| (0..anchor.ncols()).map(|k| anchor[(b, k)] * y[k]).sum()).collect()
}

pub(crate) fn lambda_from_values(s: &StructureValues, xi: &[f64]) -> DMatrix<f64> {
    let (n, m) = (s.n, s.m);
    let mut lam = DMatrix::zeros(n + m, n + m);
    for i in 0..m {
        for j in 0..m {
            lam[(i, j)] = (0..m).map(|k| s.c(k, i, j) * xi[k]).sum();
        }
        for b in 0..n {
            lam[(i, m + b)] = s.rho[(b, i)];
            lam[(m + b, i)] = -s.sigma[(b, i)];
        }
    }
    lam
}

/// Symbolic blocks of the linear tensor; the `x`-`x` block is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaBlocks {
    /// `[i][j]`: `c^k_ij xi_k`.
    pub xi_xi: Vec<Vec<Expr>>,
    /// `[i][b]`: `rho^b_i`.
    pub xi_x: Vec<Vec<Expr>>,
    /// `[a][j]`: `-sigma^a_j`.
    pub x_xi: Vec<Vec<Expr>>,
}

/// `eps_ijk` as `c[k][i][j]`.
pub fn so3_constants() -> Vec<Vec<Vec<f64>>> {
    let eps = |i: usize, j: usize, k: usize| -> f64 {
        match (i, j, k) {
            (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
            (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
            _ => 0.0,
        }
    };
    (0..3).map(|k| (0..3).map(|i| (0..3).map(|j| eps(i, j, k)).collect()).collect()).collect()
}

pub fn sl2_constants() -> Vec<Vec<Vec<f64>>> {
    let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
    let mut set = |k: usize, i: usize, j: usize, v: f64| {
        c[k][i][j] = v;
        c[k][j][i] = -v;
    };
    set(1, 0, 1, 2.0);
    set(2, 0, 2, -2.0);
    set(0, 1, 2, 1.0);
    c
}

#[cfg(test)]
mod tests;
