use std::sync::Arc;

use nalgebra::DMatrix;

use crate::algebroid::{anchor_apply, Algebroid, CheckReport, Section};
use crate::dynamics::{Hamiltonian, Lagrangian, PhaseFunction, PhasePoint, VelocityPoint};
use crate::error::{Error, Result};
use crate::expr::{compile_all, coords, eval_all, CompiledExpr, Expr};
use crate::lifts::{complete_lift_tensor2, TensorField2};

use super::Metric;

fn check_compatible(a: &Algebroid, g: &Metric) -> Result<()> {
    if (a.base_dim(), a.rank()) != (g.base_dim(), g.rank()) {
        return Err(Error::Shape(format!(
            "metric is over ({}, {}), algebroid is ({}, {})",
            g.base_dim(),
            g.rank(),
            a.base_dim(),
            a.rank()
        )));
    }
    Ok(())
}

/// `L = 1/2 g_ij(x) y^i y^j`.
pub fn metric_lagrangian(g: &Metric) -> Lagrangian {
    let m = g.rank();
    let y: Vec<Expr> = coords::y_names(m).iter().map(Expr::var).collect();
    let quad = quadratic(g.entries(), &y);
    Lagrangian::new(g.base_dim(), m, Expr::scale(0.5, quad).simplify()).expect("metric Lagrangian uses chart variables only")
}

/// `H = 1/2 g^ij(x) xi_i xi_j`, when the inverse is known symbolically.
pub fn metric_hamiltonian(g: &Metric) -> Option<Hamiltonian> {
    let inv = g.inverse()?;
    let xi: Vec<Expr> = coords::xi_names(g.rank()).iter().map(Expr::var).collect();
    let h = Expr::scale(0.5, quadratic(inv, &xi)).simplify();
    Some(Hamiltonian::new(g.base_dim(), g.rank(), h).expect("metric Hamiltonian uses chart variables only"))
}

fn quadratic(g: &[Vec<Expr>], v: &[Expr]) -> Expr {
    Expr::sum((0..v.len()).flat_map(|i| (0..v.len()).map(move |j| (i, j))).map(|(i, j)| {
        Expr::mul(g[i][j].clone(), Expr::mul(v[i].clone(), v[j].clone()))
    }))
}

/// `H = 1/2 g^ij xi_i xi_j` with the inverse metric evaluated per point.
#[derive(Debug, Clone)]
pub struct MetricHamiltonian {
    pub metric: Metric,
}

impl PhaseFunction for MetricHamiltonian {
    fn dims(&self) -> (usize, usize) {
        (self.metric.base_dim(), self.metric.rank())
    }

    fn value(&self, p: &PhasePoint) -> Result<f64> {
        let inv = self.metric.inverse_at(&p.x)?;
        Ok(0.5 * quad_form(&inv, &p.xi))
    }

    fn gradient(&self, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let inv = self.metric.inverse_at(&p.x)?;
        let dinv = self.metric.inverse_derivative_at(&p.x)?;
        Ok((dinv.iter().map(|d| 0.5 * quad_form(d, &p.xi)).collect(), mat_vec(&inv, &p.xi)))
    }
}

fn quad_form(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    (0..v.len()).map(|i| (0..v.len()).map(|j| m[(i, j)] * v[i] * v[j]).sum::<f64>()).sum()
}

fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows()).map(|i| (0..v.len()).map(|j| m[(i, j)] * v[j]).sum()).collect()
}

/// The symbols `Gamma^l_ij` of a metric on an algebroid.
///
/// The lowered form
/// `Gamma_k,ij = 1/2 (rho^a_j dg_ik/dx^a + rho^a_i dg_jk/dx^a - sigma^a_k dg_ij/dx^a - c^s_ik g_sj - c^s_jk g_si)`
/// is always symbolic; `Gamma^l_ij = g^kl Gamma_k,ij` is symbolic only when
/// the metric inverse is.
#[derive(Debug, Clone)]
pub struct GammaSymbols {
    metric: Metric,
    lowered: Vec<Vec<Vec<Expr>>>,
    raised: Option<Vec<Vec<Vec<Expr>>>>,
    compiled: Arc<Vec<CompiledExpr>>,
}

/// `Gamma^l_ij` at one base point.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaValues {
    m: usize,
    data: Vec<f64>,
}

impl GammaValues {
    #[inline]
    pub fn get(&self, l: usize, i: usize, j: usize) -> f64 {
        self.data[(l * self.m + i) * self.m + j]
    }

    pub fn rank(&self) -> usize {
        self.m
    }
}

pub fn gamma_symbols(a: &Algebroid, g: &Metric) -> Result<GammaSymbols> {
    check_compatible(a, g)?;
    let (n, m) = (a.base_dim(), a.rank());
    let names = coords::x_names(n);
    let gg = g.entries();
    let dg: Vec<Vec<Vec<Expr>>> = names.iter().map(|x| gg.iter().map(|r| r.iter().map(|e| e.differentiate(x)).collect()).collect()).collect();
    let (rho, sigma, c) = (a.rho(), a.sigma(), a.c());
    let along = |anchor: &[Vec<Expr>], i: usize, p: usize, q: usize| {
        Expr::sum((0..n).map(|b| Expr::mul(anchor[b][i].clone(), dg[b][p][q].clone())))
    };
    let lowered: Vec<Vec<Vec<Expr>>> = (0..m)
        .map(|k| {
            (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            let plus = Expr::add(along(rho, j, i, k), along(rho, i, j, k));
                            let minus = Expr::sum(
                                std::iter::once(along(sigma, k, i, j)).chain((0..m).flat_map(|s| {
                                    [Expr::mul(c[s][i][k].clone(), gg[s][j].clone()), Expr::mul(c[s][j][k].clone(), gg[s][i].clone())]
                                })),
                            );
                            Expr::scale(0.5, Expr::sub(plus, minus)).simplify()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let raised = g.inverse().map(|inv| {
        (0..m)
            .map(|l| {
                (0..m)
                    .map(|i| (0..m).map(|j| Expr::sum((0..m).map(|k| Expr::mul(inv[k][l].clone(), lowered[k][i][j].clone()))).simplify()).collect())
                    .collect()
            })
            .collect()
    });
    let flat: Vec<Expr> = lowered.iter().flatten().flatten().cloned().collect();
    let compiled = Arc::new(compile_all(&flat, &names)?);
    Ok(GammaSymbols { metric: g.clone(), lowered, raised, compiled })
}

impl GammaSymbols {
    pub fn rank(&self) -> usize {
        self.lowered.len()
    }

    /// `lowered()[k][i][j] = Gamma_k,ij`.
    pub fn lowered(&self) -> &[Vec<Vec<Expr>>] {
        &self.lowered
    }

    /// `raised()[l][i][j] = Gamma^l_ij`, when the metric inverse is symbolic.
    pub fn raised(&self) -> Option<&[Vec<Vec<Expr>>]> {
        self.raised.as_deref()
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn at(&self, x: &[f64]) -> Result<GammaValues> {
        let m = self.rank();
        let inv = self.metric.inverse_at(x)?;
        let low = eval_all(&self.compiled, x)?;
        let mut data = vec![0.0; m * m * m];
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    data[(l * m + i) * m + j] = (0..m).map(|k| inv[(k, l)] * low[(k * m + i) * m + j]).sum();
                }
            }
        }
        Ok(GammaValues { m, data })
    }
}

/// Precomputed generalized geodesic flow of a metric on an algebroid.
#[derive(Debug, Clone)]
pub struct Geodesics {
    algebroid: Algebroid,
    gamma: GammaSymbols,
}

impl Geodesics {
    pub fn new(a: &Algebroid, g: &Metric) -> Result<Self> {
        Ok(Geodesics { algebroid: a.clone(), gamma: gamma_symbols(a, g)? })
    }

    pub fn algebroid(&self) -> &Algebroid {
        &self.algebroid
    }

    pub fn metric(&self) -> &Metric {
        &self.gamma.metric
    }

    pub fn gamma(&self) -> &GammaSymbols {
        &self.gamma
    }

    /// `xdot^a = rho^a_k y^k`, `ydot^l = -Gamma^l_ij y^i y^j`.
    pub fn field(&self, v: &VelocityPoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let m = self.gamma.rank();
        check_len("y", &v.y, m)?;
        let s = self.algebroid.at(&v.x)?;
        let gam = self.gamma.at(&v.x)?;
        let ydot = (0..m)
            .map(|l| -(0..m).map(|i| (0..m).map(|j| gam.get(l, i, j) * v.y[i] * v.y[j]).sum::<f64>()).sum::<f64>())
            .collect();
        Ok((anchor_apply(&s.rho, &v.y), ydot))
    }

    /// `xdot^a = rho^a_i g^ij xi_j`,
    /// `xidot_i = (c^l_ji g^js - 1/2 sigma^a_i dg^sl/dx^a) xi_s xi_l`.
    pub fn hamiltonian_field(&self, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
        let (n, m) = (self.algebroid.base_dim(), self.algebroid.rank());
        check_len("xi", &p.xi, m)?;
        let s = self.algebroid.at(&p.x)?;
        let g = self.metric();
        let inv = g.inverse_at(&p.x)?;
        let dinv = g.inverse_derivative_at(&p.x)?;
        let up = mat_vec(&inv, &p.xi);
        let xdot = anchor_apply(&s.rho, &up);
        let xidot = (0..m)
            .map(|i| {
                let mut r = 0.0;
                for j in 0..m {
                    for l in 0..m {
                        r += s.c(l, j, i) * up[j] * p.xi[l];
                    }
                }
                for (a, d) in dinv.iter().enumerate().take(n) {
                    r -= 0.5 * s.sigma[(a, i)] * quad_form(d, &p.xi);
                }
                r
            })
            .collect();
        Ok((xdot, xidot))
    }
}

fn check_len(what: &str, v: &[f64], want: usize) -> Result<()> {
    if v.len() != want {
        return Err(Error::Shape(format!("{what} has length {}, expected {want}", v.len())));
    }
    Ok(())
}

/// One-shot form of [`Geodesics::field`].
pub fn geodesic_field(a: &Algebroid, g: &Metric, v: &VelocityPoint) -> Result<(Vec<f64>, Vec<f64>)> {
    Geodesics::new(a, g)?.field(v)
}

/// One-shot form of [`Geodesics::hamiltonian_field`].
pub fn geodesic_hamiltonian_field(a: &Algebroid, g: &Metric, p: &PhasePoint) -> Result<(Vec<f64>, Vec<f64>)> {
    Geodesics::new(a, g)?.hamiltonian_field(p)
}

/// A 2-contravariant tensor on `E*` in coordinates `(x1..xn, xi1..xim)`.
/// `xi_x[i][a]` is the coefficient of `d/dxi_i (x) d/dx^a`, and so on.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTensor2 {
    pub xi_xi: Vec<Vec<Expr>>,
    pub xi_x: Vec<Vec<Expr>>,
    pub x_xi: Vec<Vec<Expr>>,
    pub x_x: Vec<Vec<Expr>>,
}

impl PhaseTensor2 {
    /// Matrix in coordinate order `(xi_1..xi_m, x^1..x^n)`.
    pub fn eval_at(&self, x: &[f64], xi: &[f64]) -> Result<DMatrix<f64>> {
        let (n, m) = (self.x_x.len(), self.xi_xi.len());
        check_len("x", x, n)?;
        check_len("xi", xi, m)?;
        let names = crate::dynamics::phase_names(n, m);
        let point: Vec<f64> = x.iter().chain(xi).copied().collect();
        let mut out = DMatrix::zeros(m + n, m + n);
        let blocks = [(&self.xi_xi, 0, 0), (&self.xi_x, 0, m), (&self.x_xi, m, 0), (&self.x_x, m, m)];
        for (block, r0, c0) in blocks {
            for (r, row) in block.iter().enumerate() {
                for (c, e) in row.iter().enumerate() {
                    out[(r0 + r, c0 + c)] = e.compile(&names)?.eval(&point)?;
                }
            }
        }
        Ok(out)
    }
}

/// Pushes the complete lift of `G = g^ij e_i (x) e_j` for the adjoint
/// algebroid forward along `xi = g(x) y`.
///
/// Needs the symbolic inverse of `g`.
pub fn gtilde_pushforward(a: &Algebroid, g: &Metric) -> Result<PhaseTensor2> {
    check_compatible(a, g)?;
    let (n, m) = (a.base_dim(), a.rank());
    let inv = g
        .inverse()
        .ok_or_else(|| Error::Precondition("the pushforward of the lifted metric needs a symbolic inverse metric".into()))?;
    let lift = complete_lift_tensor2(&a.adjoint(), &TensorField2::new(n, inv.to_vec())?)?;
    let gg = g.entries();
    let names = coords::x_names(n);
    let y: Vec<Expr> = coords::y_names(m).iter().map(Expr::var).collect();
    // dxi_i/dx^a = dg_ik/dx^a y^k
    let dxi_dx: Vec<Vec<Expr>> = (0..m)
        .map(|i| names.iter().map(|x| Expr::sum((0..m).map(|k| Expr::mul(gg[i][k].differentiate(x), y[k].clone())))).collect())
        .collect();
    let g_times = |i: usize, col: &dyn Fn(usize) -> Expr| Expr::sum((0..m).map(|k| Expr::mul(gg[i][k].clone(), col(k))));
    let xi_x: Vec<Vec<Expr>> = (0..m).map(|i| (0..n).map(|b| g_times(i, &|k| lift.yx[k][b].clone())).collect()).collect();
    let x_xi: Vec<Vec<Expr>> = (0..n).map(|b| (0..m).map(|j| g_times(j, &|l| lift.xy[b][l].clone())).collect()).collect();
    let xi_xi: Vec<Vec<Expr>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let yy = Expr::sum((0..m).map(|k| Expr::mul(gg[i][k].clone(), g_times(j, &|l| lift.yy[k][l].clone()))));
                    let yx = Expr::sum((0..n).map(|b| Expr::mul(xi_x[i][b].clone(), dxi_dx[j][b].clone())));
                    let xy = Expr::sum((0..n).map(|b| Expr::mul(dxi_dx[i][b].clone(), x_xi[b][j].clone())));
                    Expr::add(yy, Expr::add(yx, xy))
                })
                .collect()
        })
        .collect();
    // y = g^-1 xi
    let xi: Vec<Expr> = coords::xi_names(m).iter().map(Expr::var).collect();
    let y_of_xi: Vec<Expr> = (0..m).map(|k| Expr::sum((0..m).map(|j| Expr::mul(inv[k][j].clone(), xi[j].clone())))).collect();
    let to_phase = |block: Vec<Vec<Expr>>| -> Vec<Vec<Expr>> {
        block
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|e| {
                        e.substitute_with(&|name| match coords::classify(name) {
                            Some(("y", k)) => Some(y_of_xi[k - 1].clone()),
                            _ => None,
                        })
                        .simplify()
                    })
                    .collect()
            })
            .collect()
    };
    Ok(PhaseTensor2 {
        xi_xi: to_phase(xi_xi),
        xi_x: to_phase(xi_x),
        x_xi: to_phase(x_xi),
        x_x: vec![vec![Expr::zero(); n]; n],
    })
}

/// The connection `nabla_X Y = 1/2([X, Y] - G~(X, Y))`.
///
/// On basis sections its coefficients are
/// `omega^l_ij = 1/2 c^l_ij + Gamma^l_ij`, and for general sections
/// `nabla_X Y = omega(X, Y) + rho(X)(Y) + 1/2 (rho - sigma)(Y)(X)`.
#[derive(Debug, Clone)]
pub struct Connection {
    algebroid: Algebroid,
    gamma: GammaSymbols,
    coefficients: Option<Vec<Vec<Section>>>,
}

pub fn lc_connection(a: &Algebroid, g: &Metric) -> Result<Connection> {
    let gamma = gamma_symbols(a, g)?;
    let m = a.rank();
    let c = a.c();
    let coefficients = gamma.raised().map(|raised| {
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| Section::new((0..m).map(|l| Expr::add(Expr::scale(0.5, c[l][i][j].clone()), raised[l][i][j].clone()).simplify()).collect()))
                    .collect()
            })
            .collect()
    });
    Ok(Connection { algebroid: a.clone(), gamma, coefficients })
}

/// `omega^l_ij` at one point; `get(l, i, j)` is the `e_l` coefficient of
/// `nabla_{e_i} e_j`.
pub type ConnectionValues = GammaValues;

impl Connection {
    /// `coefficients()[i][j] = nabla_{e_i} e_j`, when symbolic.
    pub fn coefficients(&self) -> Option<&[Vec<Section>]> {
        self.coefficients.as_deref()
    }

    pub fn gamma(&self) -> &GammaSymbols {
        &self.gamma
    }

    pub fn at(&self, x: &[f64]) -> Result<ConnectionValues> {
        let m = self.algebroid.rank();
        let s = self.algebroid.at(x)?;
        let mut vals = self.gamma.at(x)?;
        for l in 0..m {
            for i in 0..m {
                for j in 0..m {
                    vals.data[(l * m + i) * m + j] += 0.5 * s.c(l, i, j);
                }
            }
        }
        Ok(vals)
    }

    /// `nabla_X Y` at `x`.
    pub fn covariant_derivative(&self, xs: &Section, ys: &Section, x: &[f64]) -> Result<Vec<f64>> {
        let (n, m) = (self.algebroid.base_dim(), self.algebroid.rank());
        if xs.rank() != m || ys.rank() != m {
            return Err(Error::Shape(format!("sections must have rank {m}")));
        }
        let s = self.algebroid.at(x)?;
        let w = self.at(x)?;
        let f = xs.eval_at(x)?;
        let g = ys.eval_at(x)?;
        let names = coords::x_names(n);
        let grad = |sec: &Section| -> Result<Vec<Vec<f64>>> {
            sec.coeffs.iter().map(|e| names.iter().map(|v| Ok(e.differentiate(v).compile(&names)?.eval(x)?)).collect()).collect()
        };
        let (df, dg) = (grad(xs)?, grad(ys)?);
        let rho_f = anchor_apply(&s.rho, &f);
        let skew_g: Vec<f64> = (0..n).map(|b| (0..m).map(|j| (s.rho[(b, j)] - s.sigma[(b, j)]) * g[j]).sum()).collect();
        Ok((0..m)
            .map(|l| {
                let mut r: f64 = (0..m).map(|i| (0..m).map(|j| w.get(l, i, j) * f[i] * g[j]).sum::<f64>()).sum();
                r += (0..n).map(|b| rho_f[b] * dg[l][b] + 0.5 * skew_g[b] * df[l][b]).sum::<f64>();
                r
            })
            .collect())
    }

    /// Largest `|rho(e_i)(g_jk) - g(nabla_i e_j, e_k) - g(e_j, nabla_i e_k)|`
    /// over `samples`.
    pub fn metric_compatibility(&self, samples: &[Vec<f64>], tol: f64) -> Result<CheckReport> {
        let (n, m) = (self.algebroid.base_dim(), self.algebroid.rank());
        let metric = self.gamma.metric();
        let (mut worst, mut at) = (0.0f64, None);
        for x in samples {
            let s = self.algebroid.at(x)?;
            let g = metric.at(x)?;
            let dg = metric.derivative_at(x)?;
            let w = self.at(x)?;
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let lhs: f64 = (0..n).map(|a| s.rho[(a, i)] * dg[a][(j, k)]).sum();
                        let rhs: f64 = (0..m).map(|l| w.get(l, i, j) * g[(l, k)] + w.get(l, i, k) * g[(j, l)]).sum();
                        let r = (lhs - rhs).abs();
                        if !(r <= worst) {
                            worst = r;
                            at = Some(format!("(i, j, k) = ({i}, {j}, {k}) at {x:?}"));
                        }
                    }
                }
            }
        }
        Ok(CheckReport::from_max("metric compatibility", worst, at, tol, samples.len()))
    }

    /// Largest `|1/2 (omega^l_ij + omega^l_ji) - Gamma^l_ij|` over `samples`.
    pub fn symmetrization_defect(&self, samples: &[Vec<f64>]) -> Result<f64> {
        let m = self.algebroid.rank();
        let mut worst = 0.0f64;
        for x in samples {
            let w = self.at(x)?;
            let gam = self.gamma.at(x)?;
            for l in 0..m {
                for i in 0..m {
                    for j in 0..m {
                        worst = worst.max((0.5 * (w.get(l, i, j) + w.get(l, j, i)) - gam.get(l, i, j)).abs());
                    }
                }
            }
        }
        Ok(worst)
    }
}
