use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebroid::{check_base_expr, shape_2};
use crate::error::{Error, Result};
use crate::expr::{compile_all, coords, eval_all, CompiledExpr, Expr};
use crate::linalg::{checked_inverse, is_positive_definite};

/// A fiber metric `g_ij(x)` on a bundle of rank `m` over an `n`-dimensional
/// chart.
///
/// The inverse `g^ij` is symbolic when it is known in closed form (diagonal
/// and constant metrics, or a user-supplied inverse) and is otherwise
/// computed by LU at each point.
#[derive(Debug, Clone)]
pub struct Metric {
    n: usize,
    g: Vec<Vec<Expr>>,
    ginv: Option<Vec<Vec<Expr>>>,
    compiled: Arc<Compiled>,
}

#[derive(Debug)]
struct Compiled {
    g: Vec<CompiledExpr>,
    /// `[a][i][j]` flattened: `d g_ij / dx^a`.
    dg: Vec<CompiledExpr>,
    ginv: Option<Vec<CompiledExpr>>,
}

fn compile(n: usize, g: &[Vec<Expr>], ginv: Option<&[Vec<Expr>]>) -> Result<Compiled> {
    let names = coords::x_names(n);
    let flat: Vec<Expr> = g.iter().flatten().cloned().collect();
    let dg: Vec<Expr> = names.iter().flat_map(|x| flat.iter().map(move |e| e.differentiate(x))).collect();
    Ok(Compiled {
        g: compile_all(&flat, &names)?,
        dg: compile_all(&dg, &names)?,
        ginv: match ginv {
            Some(inv) => Some(compile_all(&inv.iter().flatten().cloned().collect::<Vec<_>>(), &names)?),
            None => None,
        },
    })
}

impl Metric {
    /// Requires a square matrix in `x1..xn` with `g[i][j]` and `g[j][i]`
    /// structurally equal. Diagonal metrics get the symbolic inverse
    /// `1/g_ii`.
    pub fn new(n: usize, g: Vec<Vec<Expr>>) -> Result<Self> {
        let m = g.len();
        shape_2(&g, m, m, "metric")?;
        for (i, row) in g.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                check_base_expr(e, n, &format!("g[{i}][{j}]"))?;
                if j > i && e.simplify() != g[j][i].simplify() {
                    return Err(Error::Precondition(format!("metric is not symmetric: g[{i}][{j}] = {e}, g[{j}][{i}] = {}", g[j][i])));
                }
            }
        }
        let diagonal = (0..m).all(|i| (0..m).all(|j| i == j || g[i][j].is_zero()));
        let ginv = if diagonal {
            Some((0..m).map(|i| (0..m).map(|j| if i == j { Expr::div(Expr::one(), g[i][i].clone()) } else { Expr::zero() }).collect()).collect())
        } else if g.iter().flatten().all(|e| e.as_num().is_some()) {
            let values = DMatrix::from_fn(m, m, |i, j| g[i][j].as_num().unwrap_or(0.0));
            let inv = checked_inverse(&values, "metric")?;
            Some((0..m).map(|i| (0..m).map(|j| Expr::num(inv[(i, j)])).collect()).collect())
        } else {
            None
        };
        let compiled = Arc::new(compile(n, &g, ginv.as_deref())?);
        Ok(Metric { n, g, ginv, compiled })
    }

    pub fn from_strings(n: usize, g: &[Vec<&str>]) -> Result<Self> {
        let g = g.iter().map(|r| r.iter().map(|s| s.parse::<Expr>()).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
        Metric::new(n, g)
    }

    pub fn identity(n: usize, m: usize) -> Self {
        let g = (0..m).map(|i| (0..m).map(|j| if i == j { Expr::one() } else { Expr::zero() }).collect()).collect();
        Metric::new(n, g).expect("identity metric is valid")
    }

    /// A constant metric over an `n`-dimensional base.
    pub fn constant(n: usize, values: &DMatrix<f64>) -> Result<Self> {
        let g = (0..values.nrows()).map(|i| (0..values.ncols()).map(|j| Expr::num(values[(i, j)])).collect()).collect();
        Metric::new(n, g)
    }

    /// Replaces the inverse by `ginv` after checking `g ginv = I` at
    /// `samples` to `1e-12`.
    pub fn with_inverse(mut self, ginv: Vec<Vec<Expr>>, samples: &[Vec<f64>]) -> Result<Self> {
        let m = self.rank();
        shape_2(&ginv, m, m, "metric inverse")?;
        for (i, row) in ginv.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                check_base_expr(e, self.n, &format!("ginv[{i}][{j}]"))?;
            }
        }
        let compiled = compile(self.n, &self.g, Some(&ginv))?;
        for x in samples {
            let g = values(&compiled.g, m, x)?;
            let inv = values(compiled.ginv.as_ref().expect("inverse compiled"), m, x)?;
            let err = (g * inv - DMatrix::identity(m, m)).abs().max();
            if !(err <= 1e-12) {
                return Err(Error::Precondition(format!("supplied inverse fails g*ginv = I by {err:e} at {x:?}")));
            }
        }
        self.ginv = Some(ginv);
        self.compiled = Arc::new(compiled);
        Ok(self)
    }

    /// `diag(a, b)` over the same base.
    pub fn block_diagonal(a: &Metric, b: &Metric) -> Result<Self> {
        if a.n != b.n {
            return Err(Error::Shape(format!("block metrics live over bases of dimension {} and {}", a.n, b.n)));
        }
        let (p, q) = (a.rank(), b.rank());
        let block = |ga: &[Vec<Expr>], gb: &[Vec<Expr>]| -> Vec<Vec<Expr>> {
            (0..p + q)
                .map(|i| {
                    (0..p + q)
                        .map(|j| match (i < p, j < p) {
                            (true, true) => ga[i][j].clone(),
                            (false, false) => gb[i - p][j - p].clone(),
                            _ => Expr::zero(),
                        })
                        .collect()
                })
                .collect()
        };
        let g = block(&a.g, &b.g);
        let ginv = match (&a.ginv, &b.ginv) {
            (Some(ia), Some(ib)) => Some(block(ia, ib)),
            _ => None,
        };
        let compiled = Arc::new(compile(a.n, &g, ginv.as_deref())?);
        Ok(Metric { n: a.n, g, ginv, compiled })
    }

    pub fn base_dim(&self) -> usize {
        self.n
    }

    pub fn rank(&self) -> usize {
        self.g.len()
    }

    pub fn entries(&self) -> &[Vec<Expr>] {
        &self.g
    }

    /// The symbolic inverse, when one is known.
    pub fn inverse(&self) -> Option<&[Vec<Expr>]> {
        self.ginv.as_deref()
    }

    pub fn at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        values(&self.compiled.g, self.rank(), x)
    }

    pub fn inverse_at(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        match &self.compiled.ginv {
            Some(inv) => values(inv, self.rank(), x),
            None => checked_inverse(&values(&self.compiled.g, self.rank(), x)?, "metric"),
        }
    }

    /// `d g / dx^a` for each `a`.
    pub fn derivative_at(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        self.check_point(x)?;
        let m = self.rank();
        self.compiled.dg.chunks(m * m).map(|chunk| values(chunk, m, x)).collect()
    }

    /// `d g^-1 / dx^a = -g^-1 (d g / dx^a) g^-1` for each `a`.
    pub fn inverse_derivative_at(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let inv = self.inverse_at(x)?;
        Ok(self.derivative_at(x)?.into_iter().map(|d| -(&inv * d * &inv)).collect())
    }

    /// Fails unless Cholesky succeeds at every sample.
    pub fn check_positive_definite(&self, samples: &[Vec<f64>]) -> Result<()> {
        for x in samples {
            if !is_positive_definite(&self.at(x)?) {
                return Err(Error::Precondition(format!("metric is not positive definite at {x:?}")));
            }
        }
        Ok(())
    }

    /// `g(u, v)` at `x`.
    pub fn pair(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64> {
        let g = self.at(x)?;
        Ok((0..u.len()).map(|i| (0..v.len()).map(|j| g[(i, j)] * u[i] * v[j]).sum::<f64>()).sum())
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::Shape(format!("base point has length {}, expected {}", x.len(), self.n)));
        }
        Ok(())
    }
}

fn values(compiled: &[CompiledExpr], m: usize, x: &[f64]) -> Result<DMatrix<f64>> {
    Ok(DMatrix::from_row_slice(m, m, &eval_all(compiled, x)?))
}
