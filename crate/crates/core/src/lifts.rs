//! Vertical and complete lifts from the base to the total space of `E`.
//!
//! Lifted objects live on `E` in coordinates `(x1..xn, y1..ym)` and keep
//! symbolic components, so they can be differentiated again.

use crate::algebroid::{check_base_expr, Algebroid, Section};
use crate::error::{Error, Result};
use crate::expr::{coords, CompiledExpr, Expr};

/// A 2-contravariant tensor field `K = K^ij(x) e_i (x) e_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorField2 {
    pub coeffs: Vec<Vec<Expr>>,
    pub symmetric: bool,
}

impl TensorField2 {
    /// Validates shape and that coefficients depend on `x1..xn` only.
    pub fn new(n: usize, coeffs: Vec<Vec<Expr>>) -> Result<Self> {
        let m = coeffs.len();
        if coeffs.iter().any(|r| r.len() != m) {
            return Err(Error::Shape(format!("tensor coefficients must be square, got {m} rows")));
        }
        for (i, row) in coeffs.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                check_base_expr(e, n, &format!("K[{i}][{j}]"))?;
            }
        }
        Ok(TensorField2 { coeffs, symmetric: false })
    }

    /// Like [`TensorField2::new`], and checks `K^ij = K^ji` at `samples`.
    pub fn symmetric(n: usize, coeffs: Vec<Vec<Expr>>, samples: &[Vec<f64>], tol: f64) -> Result<Self> {
        let mut k = TensorField2::new(n, coeffs)?;
        let names = coords::x_names(n);
        let m = k.rank();
        for i in 0..m {
            for j in i + 1..m {
                let d = Expr::sub(k.coeffs[i][j].clone(), k.coeffs[j][i].clone()).compile(&names)?;
                for x in samples {
                    let v = d.eval(x)?;
                    if !(v.abs() <= tol) {
                        return Err(Error::Precondition(format!("K[{i}][{j}] - K[{j}][{i}] = {v:e} at {x:?}")));
                    }
                }
            }
        }
        k.symmetric = true;
        Ok(k)
    }

    pub fn rank(&self) -> usize {
        self.coeffs.len()
    }

    /// The decomposable tensor `X (x) Y`.
    pub fn outer(x: &Section, y: &Section) -> TensorField2 {
        let coeffs = x
            .coeffs
            .iter()
            .map(|f| y.coeffs.iter().map(|g| Expr::mul(f.clone(), g.clone())).collect())
            .collect();
        TensorField2 { coeffs, symmetric: false }
    }
}

/// Variable order on `E`: `x1..xn, y1..ym`.
pub fn bundle_names(n: usize, m: usize) -> Vec<String> {
    let mut names = coords::x_names(n);
    names.extend(coords::y_names(m));
    names
}

/// A vector field on `E`: components over `d/dx^a` and `d/dy^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedVector {
    pub x: Vec<Expr>,
    pub y: Vec<Expr>,
}

impl LiftedVector {
    pub fn zero(n: usize, m: usize) -> Self {
        LiftedVector { x: vec![Expr::zero(); n], y: vec![Expr::zero(); m] }
    }

    fn components(&self) -> impl Iterator<Item = &Expr> {
        self.x.iter().chain(&self.y)
    }

    /// The field acting as a derivation on a function of `(x, y)`.
    pub fn apply(&self, f: &Expr) -> Expr {
        let names = bundle_names(self.x.len(), self.y.len());
        Expr::sum(self.components().zip(&names).map(|(v, name)| Expr::mul(v.clone(), f.differentiate(name))))
    }

    /// Commutator `[V, W]` of vector fields on `E`.
    pub fn commutator(&self, other: &LiftedVector) -> LiftedVector {
        let comp = |w: &Expr, v: &Expr| Expr::sub(self.apply(w), other.apply(v));
        LiftedVector {
            x: other.x.iter().zip(&self.x).map(|(w, v)| comp(w, v)).collect(),
            y: other.y.iter().zip(&self.y).map(|(w, v)| comp(w, v)).collect(),
        }
    }

    pub fn scaled(&self, f: &Expr) -> LiftedVector {
        let s = |v: &Vec<Expr>| v.iter().map(|e| Expr::mul(f.clone(), e.clone())).collect();
        LiftedVector { x: s(&self.x), y: s(&self.y) }
    }

    pub fn plus(&self, other: &LiftedVector) -> LiftedVector {
        let s = |a: &Vec<Expr>, b: &Vec<Expr>| a.iter().zip(b).map(|(u, v)| Expr::add(u.clone(), v.clone())).collect();
        LiftedVector { x: s(&self.x, &other.x), y: s(&self.y, &other.y) }
    }

    /// Components at a point `(x, y)`, x-part first.
    pub fn eval_at(&self, point: &[f64]) -> Result<Vec<f64>> {
        let names = bundle_names(self.x.len(), self.y.len());
        self.components().map(|e| Ok(e.compile(&names)?.eval(point)?)).collect()
    }
}

/// A 2-contravariant tensor field on `E`, split into its four blocks.
/// `xy[a][i]` is the coefficient of `d/dx^a (x) d/dy^i`, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedTensor2 {
    pub xx: Vec<Vec<Expr>>,
    pub xy: Vec<Vec<Expr>>,
    pub yx: Vec<Vec<Expr>>,
    pub yy: Vec<Vec<Expr>>,
}

impl LiftedTensor2 {
    /// All `(n + m)^2` components as one matrix in `(x, y)` order.
    pub fn blocks(&self) -> Vec<Vec<Expr>> {
        let top = self.xx.iter().zip(&self.xy).map(|(a, b)| a.iter().chain(b).cloned().collect());
        let bottom = self.yx.iter().zip(&self.yy).map(|(a, b)| a.iter().chain(b).cloned().collect());
        top.chain(bottom).collect()
    }

    pub fn eval_at(&self, point: &[f64]) -> Result<nalgebra::DMatrix<f64>> {
        let (n, m) = (self.xx.len(), self.yy.len());
        let names = bundle_names(n, m);
        let b = self.blocks();
        let mut out = nalgebra::DMatrix::zeros(n + m, n + m);
        for (r, row) in b.iter().enumerate() {
            for (c, e) in row.iter().enumerate() {
                out[(r, c)] = e.compile(&names)?.eval(point)?;
            }
        }
        Ok(out)
    }
}

/// `f(x)` regarded as a function on `E`.
pub fn vertical_lift_function(f: &Expr) -> Expr {
    f.clone()
}

/// `f^i e_i -> f^i d/dy^i`.
pub fn vertical_lift_section(n: usize, x: &Section) -> LiftedVector {
    LiftedVector { x: vec![Expr::zero(); n], y: x.coeffs.clone() }
}

/// `K^ij e_i (x) e_j -> K^ij d/dy^i (x) d/dy^j`.
pub fn vertical_lift_tensor2(n: usize, k: &TensorField2) -> LiftedTensor2 {
    let m = k.rank();
    LiftedTensor2 {
        xx: vec![vec![Expr::zero(); n]; n],
        xy: vec![vec![Expr::zero(); m]; n],
        yx: vec![vec![Expr::zero(); n]; m],
        yy: k.coeffs.clone(),
    }
}

fn base_gradient(a: &Algebroid, f: &Expr) -> Vec<Expr> {
    a.x_names().iter().map(|v| f.differentiate(v)).collect()
}

/// `y^i rho^a_i(x) df/dx^a`.
pub fn complete_lift_function(a: &Algebroid, f: &Expr) -> Result<Expr> {
    check_base_expr(f, a.base_dim(), "function")?;
    Ok(lift_function_unchecked(a, f))
}

fn lift_function_unchecked(a: &Algebroid, f: &Expr) -> Expr {
    let (n, m) = (a.base_dim(), a.rank());
    let df = base_gradient(a, f);
    let y = coords::y_names(m);
    Expr::sum((0..m).flat_map(|i| (0..n).map(move |b| (i, b))).map(|(i, b)| {
        Expr::mul(Expr::mul(Expr::var(&y[i]), a.rho()[b][i].clone()), df[b].clone())
    }))
}

/// `f^i sigma^a_i d/dx^a + (y^i rho^a_i df^k/dx^a + c^k_ij y^i f^j) d/dy^k`.
pub fn complete_lift_section(a: &Algebroid, x: &Section) -> Result<LiftedVector> {
    let (n, m) = (a.base_dim(), a.rank());
    if x.rank() != m {
        return Err(Error::Shape(format!("section has {} coefficients, rank is {m}", x.rank())));
    }
    for (i, e) in x.coeffs.iter().enumerate() {
        check_base_expr(e, n, &format!("section[{i}]"))?;
    }
    let y = coords::y_names(m);
    let xs = (0..n)
        .map(|b| Expr::sum((0..m).map(|i| Expr::mul(x.coeffs[i].clone(), a.sigma()[b][i].clone()))))
        .collect();
    let ys = (0..m)
        .map(|k| {
            let transport = lift_function_unchecked(a, &x.coeffs[k]);
            let algebraic = Expr::sum((0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| {
                Expr::mul(Expr::mul(a.c()[k][i][j].clone(), Expr::var(&y[i])), x.coeffs[j].clone())
            }));
            Expr::add(transport, algebraic)
        })
        .collect();
    Ok(LiftedVector { x: xs, y: ys })
}

/// Complete lift of a 2-tensor by the derivation rule
/// `d(K1 (x) K2) = dK1 (x) v(K2) + v(K1) (x) dK2`, written out in components:
///
/// ```text
/// xy[a][j] = K^ij sigma^a_i,  yx[k][a] = K^kj sigma^a_j,  xx = 0,
/// yy[k][l] = y^i rho^a_i dK^kl/dx^a + c^k_ip y^i K^pl + c^l_ip y^i K^kp.
/// ```
pub fn complete_lift_tensor2(a: &Algebroid, k: &TensorField2) -> Result<LiftedTensor2> {
    let (n, m) = (a.base_dim(), a.rank());
    if k.rank() != m {
        return Err(Error::Shape(format!("tensor has rank {}, algebroid rank is {m}", k.rank())));
    }
    for row in &k.coeffs {
        for e in row {
            check_base_expr(e, n, "tensor")?;
        }
    }
    let kk = &k.coeffs;
    let sigma = a.sigma();
    let c = a.c();
    let y: Vec<Expr> = coords::y_names(m).iter().map(Expr::var).collect();
    let xy = (0..n)
        .map(|b| (0..m).map(|j| Expr::sum((0..m).map(|i| Expr::mul(kk[i][j].clone(), sigma[b][i].clone())))).collect())
        .collect();
    let yx = (0..m)
        .map(|r| (0..n).map(|b| Expr::sum((0..m).map(|j| Expr::mul(kk[r][j].clone(), sigma[b][j].clone())))).collect())
        .collect();
    // c^k_ip y^i as an m x m matrix in (k, p)
    let cy: Vec<Vec<Expr>> = (0..m)
        .map(|r| (0..m).map(|p| Expr::sum((0..m).map(|i| Expr::mul(c[r][i][p].clone(), y[i].clone())))).collect())
        .collect();
    let yy = (0..m)
        .map(|r| {
            (0..m)
                .map(|l| {
                    let along = lift_function_unchecked(a, &kk[r][l]);
                    let left = Expr::sum((0..m).map(|p| Expr::mul(cy[r][p].clone(), kk[p][l].clone())));
                    let right = Expr::sum((0..m).map(|p| Expr::mul(cy[l][p].clone(), kk[r][p].clone())));
                    Expr::add(along, Expr::add(left, right))
                })
                .collect()
        })
        .collect();
    Ok(LiftedTensor2 { xx: vec![vec![Expr::zero(); n]; n], xy, yx, yy })
}

/// Largest `|d^2 F / dy^i dy^j|` over `samples` for each component `F`;
/// zero for fields that are fiberwise linear.
pub fn max_second_fiber_derivative<'a>(
    components: impl IntoIterator<Item = &'a Expr>,
    n: usize,
    m: usize,
    samples: &[Vec<f64>],
) -> Result<f64> {
    let names = bundle_names(n, m);
    let ys = coords::y_names(m);
    let mut worst: f64 = 0.0;
    for comp in components {
        for i in 0..m {
            let d1 = comp.differentiate(&ys[i]);
            for j in i..m {
                let d2: CompiledExpr = d1.differentiate(&ys[j]).compile(&names)?;
                if d2.is_zero() {
                    continue;
                }
                for p in samples {
                    worst = worst.max(d2.eval(p)?.abs());
                }
            }
        }
    }
    Ok(worst)
}
