use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebroid::{check_base_expr, shape_2, Algebroid, Section};
use crate::dynamics::{Lagrangian, PhasePoint, VelocityPoint};
use crate::error::{Error, Result};
use crate::expr::{compile_all, coords, eval_all, CompiledExpr, Expr};
use crate::linalg::{checked_inverse, is_positive_definite};

use super::{metric_lagrangian, Metric, MetricHamiltonian};

/// Data of a Wong system on `TM x g`: a base metric `g_ab(x)`, structure
/// constants `C^l_ij` of the algebra, a constant algebra metric `h_ij` and
/// connection coefficients `A^i_a(x)`.
#[derive(Debug, Clone)]
pub struct WongSetup {
    pub g: Metric,
    /// `c[l][i][j] = C^l_ij`.
    pub c: Vec<Vec<Vec<f64>>>,
    pub h: DMatrix<f64>,
    /// `a[i][a] = A^i_a`.
    pub a: Vec<Vec<Expr>>,
}

impl WongSetup {
    pub fn new(g: Metric, c: Vec<Vec<Vec<f64>>>, h: DMatrix<f64>, a: Vec<Vec<Expr>>) -> Result<Self> {
        let n = g.base_dim();
        if g.rank() != n {
            return Err(Error::Shape(format!("base metric has rank {}, base dimension is {n}", g.rank())));
        }
        let mg = c.len();
        if c.iter().any(|ck| ck.len() != mg || ck.iter().any(|r| r.len() != mg)) {
            return Err(Error::Shape(format!("structure constants must be {mg}x{mg}x{mg}")));
        }
        if h.nrows() != mg || h.ncols() != mg {
            return Err(Error::Shape(format!("algebra metric must be {mg}x{mg}, got {}x{}", h.nrows(), h.ncols())));
        }
        if (&h - h.transpose()).abs().max() > 0.0 {
            return Err(Error::Precondition("algebra metric h is not symmetric".into()));
        }
        if !is_positive_definite(&h) {
            return Err(Error::Precondition("algebra metric h is not positive definite".into()));
        }
        shape_2(&a, mg, n, "connection coefficients A")?;
        for (i, row) in a.iter().enumerate() {
            for (b, e) in row.iter().enumerate() {
                check_base_expr(e, n, &format!("A[{i}][{b}]"))?;
            }
        }
        Ok(WongSetup { g, c, h, a })
    }

    pub fn base_dim(&self) -> usize {
        self.g.base_dim()
    }

    pub fn algebra_dim(&self) -> usize {
        self.c.len()
    }

    /// `A-bar = A o pr1 + I o pr2` as a block matrix acting on `(xdot, w)`.
    pub fn connection_map(&self) -> Vec<Vec<Expr>> {
        self.abar(false)
    }

    /// The inverse of [`WongSetup::connection_map`].
    pub fn connection_map_inverse(&self) -> Vec<Vec<Expr>> {
        self.abar(true)
    }

    fn abar(&self, inverse: bool) -> Vec<Vec<Expr>> {
        let (n, mg) = (self.base_dim(), self.algebra_dim());
        (0..n + mg)
            .map(|k| {
                (0..n + mg)
                    .map(|l| {
                        if k == l {
                            Expr::one()
                        } else if k >= n && l < n {
                            let e = self.a[k - n][l].clone();
                            if inverse {
                                Expr::neg(e)
                            } else {
                                e
                            }
                        } else {
                            Expr::zero()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    /// `diag(g, h)`.
    pub fn product_metric(&self) -> Result<Metric> {
        Metric::block_diagonal(&self.g, &Metric::constant(self.base_dim(), &self.h)?)
    }

    /// The metric `g_A = [[g + A^T h A, -A^T h], [-h A, h]]` on `TM x g`.
    /// Its inverse is symbolic when that of `g` is.
    pub fn metric_ga(&self, samples: &[Vec<f64>]) -> Result<Metric> {
        let (n, mg) = (self.base_dim(), self.algebra_dim());
        let gb = self.g.entries();
        let h = |i: usize, j: usize| Expr::num(self.h[(i, j)]);
        let ha = |i: usize, b: usize| Expr::sum((0..mg).map(|j| Expr::mul(h(i, j), self.a[j][b].clone())));
        let mut ga = vec![vec![Expr::zero(); n + mg]; n + mg];
        for r in 0..n + mg {
            for s in r..n + mg {
                let e = match (r < n, s < n) {
                    (true, true) => Expr::add(gb[r][s].clone(), Expr::sum((0..mg).map(|i| Expr::mul(self.a[i][r].clone(), ha(i, s))))),
                    (true, false) => Expr::neg(ha(s - n, r)),
                    _ => h(r - n, s - n),
                }
                .simplify();
                ga[r][s] = e.clone();
                ga[s][r] = e;
            }
        }
        let metric = Metric::new(n, ga)?;
        let Some(ginv) = self.g.inverse() else { return Ok(metric) };
        let hinv = checked_inverse(&self.h, "algebra metric")?;
        // A-bar diag(g^-1, h^-1) A-bar^T
        let abar = self.connection_map();
        let d = |k: usize, l: usize| -> Expr {
            match (k < n, l < n) {
                (true, true) => ginv[k][l].clone(),
                (false, false) => Expr::num(hinv[(k - n, l - n)]),
                _ => Expr::zero(),
            }
        };
        let inv: Vec<Vec<Expr>> = (0..n + mg)
            .map(|r| {
                (0..n + mg)
                    .map(|s| {
                        Expr::sum((0..n + mg).flat_map(|k| {
                            let abar = &abar;
                            (0..n + mg).map(move |l| Expr::mul(abar[r][k].clone(), Expr::mul(d(k, l), abar[s][l].clone())))
                        }))
                        .simplify()
                    })
                    .collect()
            })
            .collect();
        metric.with_inverse(inv, samples)
    }
}

/// `TM x g` with both anchors the projection to `TM` and the algebra
/// bracket on the `g` block. `c` is `C^l_ij`.
pub fn wong_product_algebroid(n: usize, c: &[Vec<Vec<f64>>]) -> Result<Algebroid> {
    let mg = c.len();
    let m = n + mg;
    let anchor: Vec<Vec<Expr>> = (0..n).map(|a| (0..m).map(|i| if a == i { Expr::one() } else { Expr::zero() }).collect()).collect();
    let mut cc = vec![vec![vec![Expr::zero(); m]; m]; m];
    for (l, cl) in c.iter().enumerate() {
        if cl.len() != mg || cl.iter().any(|r| r.len() != mg) {
            return Err(Error::Shape(format!("structure constants must be {mg}x{mg}x{mg}")));
        }
        for i in 0..mg {
            for j in 0..mg {
                cc[n + l][n + i][n + j] = Expr::num(cl[i][j]);
            }
        }
    }
    Algebroid::new(n, m, anchor.clone(), anchor, cc)
}

/// The product structure transported so that `A-bar` becomes a morphism
/// onto it: `[X, Y]_A = A-bar^-1 [A-bar X, A-bar Y]`.
pub fn wong_deformed(product: &Algebroid, w: &WongSetup, samples: &[Vec<f64>]) -> Result<Algebroid> {
    product.transport(&w.connection_map_inverse(), &w.connection_map(), samples)
}

/// `F^l_ab = dA^l_b/dx^a - dA^l_a/dx^b + A^i_a A^j_b C^l_ij`, as `f[l][a][b]`.
pub fn curvature(w: &WongSetup) -> Vec<Vec<Vec<Expr>>> {
    let (n, mg) = (w.base_dim(), w.algebra_dim());
    let names = coords::x_names(n);
    (0..mg)
        .map(|l| {
            (0..n)
                .map(|a| {
                    (0..n)
                        .map(|b| {
                            let d = Expr::sub(w.a[l][b].differentiate(&names[a]), w.a[l][a].differentiate(&names[b]));
                            let quad = Expr::sum((0..mg).flat_map(|i| {
                                (0..mg).map(move |j| Expr::scale(w.c[l][i][j], Expr::mul(w.a[i][a].clone(), w.a[j][b].clone())))
                            }));
                            Expr::add(d, quad).simplify()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `F(X, Y) = [A X, A Y] - A [X, Y]` on coordinate fields, computed with the
/// product bracket; `g`-components as `f[l][a][b]`.
pub fn curvature_from_bracket(product: &Algebroid, w: &WongSetup) -> Result<Vec<Vec<Vec<Expr>>>> {
    let (n, mg) = (w.base_dim(), w.algebra_dim());
    let abar = w.connection_map();
    let lifted: Vec<Section> = (0..n).map(|a| Section::new((0..n + mg).map(|k| abar[k][a].clone()).collect())).collect();
    let mut f = vec![vec![vec![Expr::zero(); n]; n]; mg];
    for a in 0..n {
        for b in 0..n {
            let top = product.bracket(&lifted[a], &lifted[b])?;
            let base = product.bracket(&Section::basis(n + mg, a), &Section::basis(n + mg, b))?;
            for (l, fl) in f.iter_mut().enumerate() {
                let image = Expr::sum((0..n + mg).map(|k| Expr::mul(abar[n + l][k].clone(), base.coeffs[k].clone())));
                fl[a][b] = Expr::sub(top.coeffs[n + l].clone(), image).simplify();
            }
        }
    }
    Ok(f)
}

/// A Wong system with the deformed algebroid and compiled coefficient
/// functions.
///
/// Phase points are `(x, (p, v))` and velocity points `(x, (xdot, vbar))`,
/// with the base block first.
#[derive(Debug, Clone)]
pub struct Wong {
    setup: WongSetup,
    product: Algebroid,
    deformed: Algebroid,
    curvature: Vec<Vec<Vec<Expr>>>,
    hinv: DMatrix<f64>,
    compiled: Arc<(Vec<CompiledExpr>, Vec<CompiledExpr>)>,
}

struct Point {
    ginv: DMatrix<f64>,
    /// `a[i][b] = A^i_b`
    a: Vec<Vec<f64>>,
    /// `f[l][a][b]`
    f: Vec<Vec<Vec<f64>>>,
}

impl Wong {
    /// `samples` are base points where `A-bar A-bar^-1 = I` is checked.
    pub fn new(setup: WongSetup, samples: &[Vec<f64>]) -> Result<Self> {
        let n = setup.base_dim();
        let product = wong_product_algebroid(n, &setup.c)?;
        let deformed = wong_deformed(&product, &setup, samples)?;
        let curvature = curvature(&setup);
        let names = coords::x_names(n);
        let a_flat: Vec<Expr> = setup.a.iter().flatten().cloned().collect();
        let f_flat: Vec<Expr> = curvature.iter().flatten().flatten().cloned().collect();
        let compiled = Arc::new((compile_all(&a_flat, &names)?, compile_all(&f_flat, &names)?));
        let hinv = checked_inverse(&setup.h, "algebra metric")?;
        Ok(Wong { setup, product, deformed, curvature, hinv, compiled })
    }

    pub fn setup(&self) -> &WongSetup {
        &self.setup
    }

    pub fn product(&self) -> &Algebroid {
        &self.product
    }

    pub fn deformed(&self) -> &Algebroid {
        &self.deformed
    }

    /// `curvature()[l][a][b] = F^l_ab`.
    pub fn curvature(&self) -> &[Vec<Vec<Expr>>] {
        &self.curvature
    }

    /// `L = 1/2 (h_ij vbar^i vbar^j + g_ab xdot^a xdot^b)` on the deformed
    /// algebroid.
    pub fn lagrangian(&self) -> Result<Lagrangian> {
        Ok(metric_lagrangian(&self.setup.product_metric()?))
    }

    /// `H = 1/2 (g^ab p_a p_b + h^ij v_i v_j)`.
    pub fn hamiltonian(&self) -> Result<MetricHamiltonian> {
        Ok(MetricHamiltonian { metric: self.setup.product_metric()? })
    }

    fn point(&self, x: &[f64]) -> Result<Point> {
        let (n, mg) = (self.setup.base_dim(), self.setup.algebra_dim());
        let a = eval_all(&self.compiled.0, x)?;
        let f = eval_all(&self.compiled.1, x)?;
        Ok(Point {
            ginv: self.setup.g.inverse_at(x)?,
            a: a.chunks(n).map(<[f64]>::to_vec).collect(),
            f: (0..mg).map(|l| (0..n).map(|b| f[(l * n + b) * n..(l * n + b + 1) * n].to_vec()).collect()).collect(),
        })
    }

    fn split<'a>(&self, what: &str, x: &[f64], fiber: &'a [f64]) -> Result<(&'a [f64], &'a [f64])> {
        let (n, mg) = (self.setup.base_dim(), self.setup.algebra_dim());
        if x.len() != n || fiber.len() != n + mg {
            return Err(Error::Shape(format!("{what} must have base length {n} and fiber length {}", n + mg)));
        }
        Ok(fiber.split_at(n))
    }

    /// `u^j = h^ji v_i`.
    fn raise(&self, v: &[f64]) -> Vec<f64> {
        (0..v.len()).map(|j| (0..v.len()).map(|i| self.hinv[(j, i)] * v[i]).sum()).collect()
    }

    /// `xdot^a = g^ab p_b`,
    /// `pdot_a = F^l_ba xdot^b v_l - 1/2 dg^bc/dx^a p_b p_c + A^s_a C^l_js h^ji v_l v_i`,
    /// `vdot_i = A^j_a C^l_ji xdot^a v_l + C^l_ji h^js v_l v_s`.
    pub fn phase_field(&self, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
        self.phase_field_with(p, true)
    }

    /// The phase field without the two `C h` terms, which vanish when `h`
    /// is invariant:
    /// `pdot_a = F^l_ba xdot^b v_l - 1/2 dg^bc/dx^a p_b p_c`,
    /// `vdot_i = A^j_a C^l_ji xdot^a v_l`.
    pub fn classical_field(&self, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
        self.phase_field_with(p, false)
    }

    fn phase_field_with(&self, p: &PhasePoint, full: bool) -> Result<(Vec<f64>, Vec<f64>)> {
        let (n, mg) = (self.setup.base_dim(), self.setup.algebra_dim());
        let (mom, v) = self.split("phase point", &p.x, &p.xi)?;
        let pt = self.point(&p.x)?;
        let c = &self.setup.c;
        let dginv = self.setup.g.inverse_derivative_at(&p.x)?;
        let xdot: Vec<f64> = (0..n).map(|a| (0..n).map(|b| pt.ginv[(a, b)] * mom[b]).sum()).collect();
        let u = self.raise(v);
        let mut xidot = vec![0.0; n + mg];
        for a in 0..n {
            let mut r = 0.0;
            for b in 0..n {
                for l in 0..mg {
                    r += pt.f[l][b][a] * xdot[b] * v[l];
                }
                for cc in 0..n {
                    r -= 0.5 * dginv[a][(b, cc)] * mom[b] * mom[cc];
                }
            }
            if full {
                for s in 0..mg {
                    for j in 0..mg {
                        for l in 0..mg {
                            r += pt.a[s][a] * c[l][j][s] * u[j] * v[l];
                        }
                    }
                }
            }
            xidot[a] = r;
        }
        for i in 0..mg {
            let mut r = 0.0;
            for l in 0..mg {
                for j in 0..mg {
                    let along: f64 = (0..n).map(|a| pt.a[j][a] * xdot[a]).sum();
                    r += c[l][j][i] * along * v[l];
                    if full {
                        r += c[l][j][i] * u[j] * v[l];
                    }
                }
            }
            xidot[n + i] = r;
        }
        Ok((xdot, xidot))
    }

    /// `C^l_ji h^js v_l v_s` for each `i`; zero for invariant `h`.
    pub fn invariance_defect(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mg = self.setup.algebra_dim();
        if v.len() != mg {
            return Err(Error::Shape(format!("v has length {}, expected {mg}", v.len())));
        }
        let u = self.raise(v);
        let c = &self.setup.c;
        Ok((0..mg).map(|i| (0..mg).map(|l| (0..mg).map(|j| c[l][j][i] * u[j] * v[l]).sum::<f64>()).sum()).collect())
    }

    /// The Euler-Lagrange form in velocities `(xdot, vbar)`, `v_l = h_ls vbar^s`:
    ///
    /// ```text
    /// xddot^d = g^da (F^l_ba xdot^b v_l + A^s_a C^l_js v_l vbar^j
    ///                 - 1/2 (dg_ac/dx^b + dg_ab/dx^c - dg_bc/dx^a) xdot^b xdot^c),
    /// vbardot^k = h^ki (A^j_a C^l_ji xdot^a v_l + C^l_ji vbar^j v_l).
    /// ```
    pub fn el_field(&self, vp: &VelocityPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let (n, mg) = (self.setup.base_dim(), self.setup.algebra_dim());
        let (xdot, vbar) = self.split("velocity point", &vp.x, &vp.y)?;
        let pt = self.point(&vp.x)?;
        let c = &self.setup.c;
        let dg = self.setup.g.derivative_at(&vp.x)?;
        let v: Vec<f64> = (0..mg).map(|l| (0..mg).map(|s| self.setup.h[(l, s)] * vbar[s]).sum()).collect();
        let force: Vec<f64> = (0..n)
            .map(|a| {
                let mut r = 0.0;
                for l in 0..mg {
                    for b in 0..n {
                        r += pt.f[l][b][a] * xdot[b] * v[l];
                    }
                    for s in 0..mg {
                        for j in 0..mg {
                            r += pt.a[s][a] * c[l][j][s] * v[l] * vbar[j];
                        }
                    }
                }
                for b in 0..n {
                    for cc in 0..n {
                        r -= 0.5 * (dg[b][(a, cc)] + dg[cc][(a, b)] - dg[a][(b, cc)]) * xdot[b] * xdot[cc];
                    }
                }
                r
            })
            .collect();
        let mut ydot: Vec<f64> = (0..n).map(|d| (0..n).map(|a| pt.ginv[(d, a)] * force[a]).sum()).collect();
        let rhs: Vec<f64> = (0..mg)
            .map(|i| {
                let mut r = 0.0;
                for l in 0..mg {
                    for j in 0..mg {
                        let along: f64 = (0..n).map(|a| pt.a[j][a] * xdot[a]).sum();
                        r += c[l][j][i] * (along + vbar[j]) * v[l];
                    }
                }
                r
            })
            .collect();
        ydot.extend(self.raise(&rhs));
        Ok((xdot.to_vec(), ydot))
    }
}

/// One-shot form of [`Wong::phase_field`].
pub fn wong_phase_field(w: &WongSetup, p: &PhasePoint, samples: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    Wong::new(w.clone(), samples)?.phase_field(p)
}

/// One-shot form of [`Wong::el_field`].
pub fn wong_el_field(w: &WongSetup, v: &VelocityPoint, samples: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    Wong::new(w.clone(), samples)?.el_field(v)
}
