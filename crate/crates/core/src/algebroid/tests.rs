use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;
use crate::expr::parse;
use crate::sample::SampleBox;

fn e(s: &str) -> Expr {
    parse(s).unwrap().simplify()
}

/// A non-skew algebroid over a 2-dimensional base with x-dependent data.
fn general_2d() -> Algebroid {
    Algebroid::from_strings(
        2,
        2,
        &[vec!["1", "x2"], vec!["0", "x1"]],
        &[vec!["x1", "0"], vec!["1", "1 + x2^2"]],
        &[
            vec![vec!["x2", "1"], vec!["sin(x1)", "0"]],
            vec![vec!["0", "x1*x2"], vec!["-2", "cos(x2)"]],
        ],
    )
    .unwrap()
}

fn samples(n: usize, count: usize) -> Vec<Vec<f64>> {
    SampleBox::cube(n, -1.5, 1.5).sample(count, 7)
}

#[test]
fn constructs_canonical_examples() {
    let tb = Algebroid::tangent_bundle(3);
    assert_eq!((tb.base_dim(), tb.rank()), (3, 3));
    assert_eq!(tb.rho()[1][1], Expr::one());
    assert_eq!(tb.sigma()[0][2], Expr::zero());
    let so3 = Algebroid::so3();
    assert_eq!((so3.base_dim(), so3.rank()), (0, 3));
    let (left, right) = so3.anchors();
    assert!(left.is_empty() && right.is_empty());
}

#[test]
fn rejects_bad_shapes_and_fiber_variables() {
    let rho = vec![vec![Expr::one(), Expr::zero()]];
    let sigma = vec![vec![Expr::one()]];
    let c = vec![vec![vec![Expr::zero()]]];
    let err = Algebroid::new(1, 1, rho, sigma.clone(), c.clone()).unwrap_err();
    assert!(matches!(err, Error::Shape(_)), "{err}");
    let err = Algebroid::new(1, 1, vec![vec![e("y1")]], sigma.clone(), c.clone()).unwrap_err();
    assert!(matches!(err, Error::StrayVariable { ref name, .. } if name == "y1"), "{err}");
    let err = Algebroid::new(1, 1, sigma.clone(), sigma, vec![vec![vec![e("xi1*x1")]]]).unwrap_err();
    assert!(matches!(err, Error::StrayVariable { ref name, .. } if name == "xi1"), "{err}");
}

#[test]
fn epsilon_on_tangent_line() {
    let tb = Algebroid::tangent_bundle(1);
    let q = CotangentPoint { x: vec![0.0], y: vec![2.0], p: vec![5.0], pi: vec![3.0] };
    let out = tb.epsilon_map(&q).unwrap();
    assert_eq!(out, TangentDualPoint { x: vec![0.0], xi: vec![3.0], xdot: vec![2.0], xidot: vec![5.0] });
}

#[test]
fn epsilon_vanishes_without_velocity_and_momentum() {
    let a = general_2d();
    let q = CotangentPoint { x: vec![0.3, -0.7], y: vec![0.0; 2], p: vec![0.0; 2], pi: vec![1.2, -0.4] };
    let out = a.epsilon_map(&q).unwrap();
    assert_eq!(out.xdot, vec![0.0; 2]);
    assert_eq!(out.xidot, vec![0.0; 2]);
}

#[test]
fn epsilon_on_so3_matches_index_sum() {
    let c = so3_constants();
    let y = [1.0, 0.0, 0.0];
    let pi = [0.0, 1.0, 0.0];
    let mut oracle = [0.0; 3];
    for (j, o) in oracle.iter_mut().enumerate() {
        for i in 0..3 {
            for (k, ck) in c.iter().enumerate() {
                *o += ck[i][j] * y[i] * pi[k];
            }
        }
    }
    // only the third component is supported; its sign is c^2_{13} = -1
    assert_eq!(oracle, [0.0, 0.0, -1.0]);
    let q = CotangentPoint { x: vec![], y: y.to_vec(), p: vec![], pi: pi.to_vec() };
    assert_eq!(Algebroid::so3().epsilon_map(&q).unwrap().xidot, oracle.to_vec());
}

#[test]
fn lambda_examples() {
    let tb = Algebroid::tangent_bundle(1);
    let lam = tb.lambda_matrix(&[0.4], &[-2.0]).unwrap();
    assert_eq!(lam, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]));

    let lam = Algebroid::so3().lambda_matrix(&[], &[0.0, 0.0, 1.0]).unwrap();
    let expected = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    assert_eq!(lam, expected);

    let a = general_2d();
    let lam = a.lambda_matrix(&[0.2, 0.9], &[0.0, 0.0]).unwrap();
    assert!(lam.view((0, 0), (2, 2)).iter().all(|v| *v == 0.0));
}

#[test]
fn lambda_symbolic_matches_numeric() {
    let a = general_2d();
    let blocks = a.lambda_symbolic();
    let names: Vec<String> = ["x1", "x2", "xi1", "xi2"].iter().map(|s| s.to_string()).collect();
    for p in samples(4, 10) {
        let lam = a.lambda_matrix(&p[..2], &p[2..]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let v = blocks.xi_xi[i][j].compile(&names).unwrap().eval(&p).unwrap();
                assert!((v - lam[(i, j)]).abs() < 1e-14);
            }
            for b in 0..2 {
                assert!((blocks.xi_x[i][b].compile(&names).unwrap().eval(&p).unwrap() - lam[(i, 2 + b)]).abs() < 1e-14);
                assert!((blocks.x_xi[b][i].compile(&names).unwrap().eval(&p).unwrap() - lam[(2 + b, i)]).abs() < 1e-14);
            }
        }
    }
}

/// `{F, G} = dF^T Lambda dG` for functions on E* given by their gradients.
fn poisson(lam: &DMatrix<f64>, df: &[f64], dg: &[f64]) -> f64 {
    let n = df.len();
    (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| df[i] * lam[(i, j)] * dg[j]).sum()
}

#[test]
fn basis_brackets_match_lambda() {
    let a = general_2d();
    let (n, m) = (2, 2);
    for p in samples(n, 20) {
        let lam_at = |xi: &[f64]| a.lambda_matrix(&p, xi).unwrap();
        for i in 0..m {
            for j in 0..m {
                let b = a.bracket(&Section::basis(m, i), &Section::basis(m, j)).unwrap();
                let coeffs = b.eval_at(&p).unwrap();
                // iota(e_k) = xi_k, so {xi_i, xi_j} at xi = e_k reads off the k-th coefficient
                for k in 0..m {
                    let mut xi = vec![0.0; m];
                    xi[k] = 1.0;
                    let mut di = vec![0.0; n + m];
                    di[i] = 1.0;
                    let mut dj = vec![0.0; n + m];
                    dj[j] = 1.0;
                    let expected = poisson(&lam_at(&xi), &di, &dj);
                    assert!((coeffs[k] - expected).abs() < 1e-14);
                }
            }
        }
    }
}

#[test]
fn bracket_of_general_sections_matches_poisson_bracket_of_linear_functions() {
    let a = general_2d();
    let x = Section::parse(&["x1*x2", "sin(x2)"]).unwrap();
    let y = Section::parse(&["1 + x1^2", "x2"]).unwrap();
    let b = a.bracket(&x, &y).unwrap();
    let names = crate::expr::coords::x_names(2);
    for p in samples(2, 20) {
        let xi = [0.7, -1.1];
        let lam = a.lambda_matrix(&p, &xi).unwrap();
        // gradient of iota(X) = f^k(x) xi_k in order (xi, x)
        let grad = |s: &Section| -> Vec<f64> {
            let mut g: Vec<f64> = s.eval_at(&p).unwrap();
            for v in &names {
                let d: f64 = s.coeffs.iter().zip(&xi).map(|(c, w)| c.differentiate(v).compile(&names).unwrap().eval(&p).unwrap() * w).sum();
                g.push(d);
            }
            g
        };
        let expected = poisson(&lam, &grad(&x), &grad(&y));
        let got: f64 = b.eval_at(&p).unwrap().iter().zip(&xi).map(|(c, w)| c * w).sum();
        assert!((got - expected).abs() < 1e-12, "{got} vs {expected}");
    }
}

#[test]
fn self_bracket_vanishes_for_skew_algebroid() {
    let tb = Algebroid::tangent_bundle(2);
    let x = Section::parse(&["x1^2*x2", "cos(x1)"]).unwrap();
    let b = tb.bracket(&x, &x).unwrap();
    for p in samples(2, 10) {
        assert!(b.eval_at(&p).unwrap().iter().all(|v| v.abs() < 1e-14));
    }
}

#[test]
fn leibniz_rule_holds() {
    // [fX, gY] = f rho(X)(g) Y - g sigma(Y)(f) X + f g [X, Y]
    let a = general_2d();
    let (f, g) = (e("x1"), e("sin(x1)"));
    let x = Section::basis(2, 0);
    let y = Section::parse(&["0", "x1"]).unwrap();
    let lhs = a.bracket(&x.scaled(&f), &y.scaled(&g)).unwrap();
    let names = crate::expr::coords::x_names(2);
    let along = |anchor: &[Vec<Expr>], s: &Section, h: &Expr| -> Expr {
        Expr::sum((0..2).map(|b| {
            let comp = Expr::sum((0..2).map(|i| Expr::mul(anchor[b][i].clone(), s.coeffs[i].clone())));
            Expr::mul(comp, h.differentiate(&names[b]))
        }))
    };
    let rhs = y
        .scaled(&Expr::mul(f.clone(), along(a.rho(), &x, &g)))
        .plus(&x.scaled(&Expr::neg(Expr::mul(g.clone(), along(a.sigma(), &y, &f)))))
        .plus(&a.bracket(&x, &y).unwrap().scaled(&Expr::mul(f, g)));
    for p in samples(2, 20) {
        let (l, r) = (lhs.eval_at(&p).unwrap(), rhs.eval_at(&p).unwrap());
        assert!(crate::linalg::max_abs_diff(&l, &r) < 1e-13, "{l:?} vs {r:?}");
    }
}

#[test]
fn anchors_and_connection_classes() {
    let tb = Algebroid::tangent_bundle(2);
    let (l, r) = tb.anchors();
    assert_eq!(l, r);
    assert_eq!(tb.classify_anchors(), AnchorClass::General);
    assert_eq!(Algebroid::so3().classify_anchors(), AnchorClass::Tensorial);
    let left = Algebroid::from_strings(1, 1, &[vec!["1"]], &[vec!["0"]], &[vec![vec!["x1"]]]).unwrap();
    assert_eq!(left.classify_anchors(), AnchorClass::LeftConnection);
    assert_eq!(left.classify_anchors().to_string(), "left connection");
    assert_eq!(left.adjoint().classify_anchors(), AnchorClass::RightConnection);
}

#[test]
fn adjoint_is_transpose() {
    let a = general_2d();
    let adj = a.adjoint();
    for p in samples(4, 50) {
        let lam = a.lambda_matrix(&p[..2], &p[2..]).unwrap();
        let lam_adj = adj.lambda_matrix(&p[..2], &p[2..]).unwrap();
        assert_eq!(lam_adj, lam.transpose());
    }
}

#[test]
fn adjoint_of_skew_is_negative_and_adjoint_is_involutive() {
    let so3 = Algebroid::so3();
    let xi = [0.3, -1.2, 0.8];
    assert_eq!(so3.adjoint().lambda_matrix(&[], &xi).unwrap(), -so3.lambda_matrix(&[], &xi).unwrap());
    let tb = Algebroid::tangent_bundle(2);
    let lam = tb.lambda_matrix(&[0.1, 0.2], &[1.0, 2.0]).unwrap();
    assert_eq!(tb.adjoint().lambda_matrix(&[0.1, 0.2], &[1.0, 2.0]).unwrap(), -lam);

    let a = general_2d();
    let back = a.adjoint().adjoint();
    for p in samples(4, 20) {
        assert_eq!(back.lambda_matrix(&p[..2], &p[2..]).unwrap(), a.lambda_matrix(&p[..2], &p[2..]).unwrap());
    }
}

#[test]
fn skew_check() {
    let pts = samples(2, 30);
    assert!(Algebroid::tangent_bundle(2).check_skew(&pts, 1e-12).unwrap().passed);
    assert!(Algebroid::so3().check_skew(&[vec![]], 1e-12).unwrap().passed);
    let mut c = vec![vec![vec![0.0; 2]; 2]; 2];
    c[0][0][0] = 1.0;
    let bad = Algebroid::lie_algebra(&c).unwrap();
    let report = bad.check_skew(&[vec![]], 1e-12).unwrap();
    assert!(!report.passed);
    assert_eq!(report.max_residual, 2.0);
    assert!(report.worst.as_deref().unwrap().starts_with("c[0][0][0]"), "{report}");
}

/// Brute-force Jacobiator of constant structure constants.
fn jacobiator_oracle(c: &[Vec<Vec<f64>>]) -> f64 {
    let m = c.len();
    let br = |u: &[f64], v: &[f64]| -> Vec<f64> {
        (0..m).map(|k| (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| c[k][i][j] * u[i] * v[j]).sum()).collect()
    };
    let basis = |i: usize| -> Vec<f64> { (0..m).map(|k| if k == i { 1.0 } else { 0.0 }).collect() };
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let (a, b, d) = (basis(i), basis(j), basis(k));
                let t1 = br(&br(&a, &b), &d);
                let t2 = br(&br(&b, &d), &a);
                let t3 = br(&br(&d, &a), &b);
                for l in 0..m {
                    worst = worst.max((t1[l] + t2[l] + t3[l]).abs());
                }
            }
        }
    }
    worst
}

pub(crate) fn non_jacobi_constants() -> Vec<Vec<Vec<f64>>> {
    let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
    for (k, i, j) in [(2, 0, 1), (0, 1, 2), (0, 0, 2)] {
        c[k][i][j] = 1.0;
        c[k][j][i] = -1.0;
    }
    c
}

#[test]
fn lie_check_on_canonical_examples() {
    for n in 1..=4 {
        let pts = samples(n, 30);
        let report = Algebroid::tangent_bundle(n).check_lie(&pts, 1e-12).unwrap();
        assert!(report.passed, "TM n={n}: {report}");
    }
    assert_eq!(jacobiator_oracle(&so3_constants()), 0.0);
    assert_eq!(jacobiator_oracle(&sl2_constants()), 0.0);
    assert!(Algebroid::so3().check_lie(&[vec![]], 1e-12).unwrap().passed);
    assert!(Algebroid::sl2().check_lie(&[vec![]], 1e-12).unwrap().passed);
}

#[test]
fn lie_check_rejects_non_jacobi_algebra() {
    let c = non_jacobi_constants();
    let oracle = jacobiator_oracle(&c);
    assert!(oracle > 0.5, "fixture must violate Jacobi, oracle {oracle}");
    let a = Algebroid::lie_algebra(&c).unwrap();
    assert!(a.check_skew(&[vec![]], 1e-12).unwrap().passed);
    let report = a.check_lie(&[vec![]], 1e-12).unwrap();
    assert!(!report.passed);
    assert_eq!(report.max_residual, oracle);
    assert!(report.worst.unwrap().starts_with("Jacobiator"));
}

#[test]
fn lie_check_detects_anchor_failure() {
    // skew, Jacobi trivially (m = 1), but rho([e1,e1]) = 0 while the anchor
    // field commutes with itself; use m = 2 with a bracket the anchor ignores
    let a = Algebroid::from_strings(
        1,
        2,
        &[vec!["1", "x1"]],
        &[vec!["1", "x1"]],
        &[vec![vec!["0", "0"], vec!["0", "0"]], vec![vec!["0", "0"], vec!["0", "0"]]],
    )
    .unwrap();
    // [rho(e1), rho(e2)] = d/dx(x) = 1 but rho([e1,e2]) = 0
    let report = a.check_lie(&samples(1, 5), 1e-12).unwrap();
    assert!(!report.passed);
    assert!(report.worst.unwrap().starts_with("anchor homomorphism"));
}

#[test]
fn transport_by_identity_is_identity() {
    let a = general_2d();
    let id = vec![vec![Expr::one(), Expr::zero()], vec![Expr::zero(), Expr::one()]];
    let t = a.transport(&id, &id, &samples(2, 5)).unwrap();
    for p in samples(4, 10) {
        assert_eq!(t.lambda_matrix(&p[..2], &p[2..]).unwrap(), a.lambda_matrix(&p[..2], &p[2..]).unwrap());
    }
}

#[test]
fn transport_rejects_wrong_inverse() {
    let a = general_2d();
    let phi = vec![vec![Expr::one(), e("x1")], vec![Expr::zero(), Expr::one()]];
    let err = a.transport(&phi, &phi, &samples(2, 5)).unwrap_err();
    assert!(matches!(err, Error::Precondition(_)), "{err}");
}

#[test]
fn transport_satisfies_its_contract() {
    let a = general_2d();
    let phi = vec![vec![e("1"), e("x1")], vec![e("0"), e("exp(x2)")]];
    let phi_inv = vec![vec![e("1"), e("-x1*exp(-x2)")], vec![e("0"), e("exp(-x2)")]];
    let t = a.transport(&phi, &phi_inv, &samples(2, 10)).unwrap();
    let apply = |s: &Section| -> Section {
        Section::new((0..2).map(|k| Expr::sum((0..2).map(|l| Expr::mul(phi[k][l].clone(), s.coeffs[l].clone())))).collect())
    };
    let x = Section::parse(&["x2", "1 + x1^2"]).unwrap();
    let y = Section::parse(&["sin(x1)", "x1*x2"]).unwrap();
    let lhs = t.bracket(&apply(&x), &apply(&y)).unwrap();
    let rhs = apply(&a.bracket(&x, &y).unwrap());
    for p in samples(2, 20) {
        let (l, r) = (lhs.eval_at(&p).unwrap(), rhs.eval_at(&p).unwrap());
        assert!(crate::linalg::max_abs_diff(&l, &r) < 1e-12, "{l:?} vs {r:?}");
        // anchors: rho' phi = rho, sigma' phi = sigma
        let (s, s2) = (t.at(&p).unwrap(), a.at(&p).unwrap());
        let phi_num = DMatrix::from_fn(2, 2, |i, j| phi[i][j].compile(t.x_names()).unwrap().eval(&p).unwrap());
        assert!((&s.rho * &phi_num - &s2.rho).abs().max() < 1e-13);
        assert!((&s.sigma * &phi_num - &s2.sigma).abs().max() < 1e-13);
    }
}

#[test]
fn constant_transport_conjugates_structure_constants() {
    let so3 = Algebroid::so3();
    let phi_num = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 0.0, 1.0, -1.0, 1.0, 0.0, 1.0]);
    let inv_num = phi_num.clone().try_inverse().unwrap();
    let to_expr = |m: &DMatrix<f64>| -> Vec<Vec<Expr>> { (0..3).map(|i| (0..3).map(|j| Expr::num(m[(i, j)])).collect()).collect() };
    let c = so3_constants();
    let br = |u: &[f64], v: &[f64]| -> Vec<f64> {
        (0..3).map(|k| (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| c[k][i][j] * u[i] * v[j]).sum()).collect()
    };
    let col = |m: &DMatrix<f64>, i: usize| -> Vec<f64> { m.column(i).iter().copied().collect() };
    let mul = |m: &DMatrix<f64>, v: Vec<f64>| -> Vec<f64> { (m * nalgebra::DVector::from_vec(v)).as_slice().to_vec() };
    // contract: c'_ij = phi [phi^-1 e_i, phi^-1 e_j]
    let t = so3.transport(&to_expr(&phi_num), &to_expr(&inv_num), &[vec![]]).unwrap();
    // and the reverse transport gives phi^-1 [phi e_i, phi e_j]
    let r = so3.transport(&to_expr(&inv_num), &to_expr(&phi_num), &[vec![]]).unwrap();
    let (st, sr) = (t.at(&[]).unwrap(), r.at(&[]).unwrap());
    for i in 0..3 {
        for j in 0..3 {
            let forward = mul(&phi_num, br(&col(&inv_num, i), &col(&inv_num, j)));
            let backward = mul(&inv_num, br(&col(&phi_num, i), &col(&phi_num, j)));
            for k in 0..3 {
                assert!((st.c(k, i, j) - forward[k]).abs() < 1e-12);
                assert!((sr.c(k, i, j) - backward[k]).abs() < 1e-12);
            }
        }
    }
    assert!(t.check_lie(&[vec![]], 1e-12).unwrap().passed);
}

proptest! {
    #[test]
    fn lambda_blocks_are_linear_in_xi(
        x in prop::array::uniform2(-2.0f64..2.0),
        xi1 in prop::array::uniform2(-2.0f64..2.0),
        xi2 in prop::array::uniform2(-2.0f64..2.0),
        s in -3.0f64..3.0,
        t in -3.0f64..3.0,
    ) {
        let a = general_2d();
        let combo: Vec<f64> = (0..2).map(|i| s * xi1[i] + t * xi2[i]).collect();
        let l1 = a.lambda_matrix(&x, &xi1).unwrap();
        let l2 = a.lambda_matrix(&x, &xi2).unwrap();
        let lc = a.lambda_matrix(&x, &combo).unwrap();
        let l0 = a.lambda_matrix(&x, &[0.0, 0.0]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((lc[(i, j)] - (s * l1[(i, j)] + t * l2[(i, j)])).abs() < 1e-12);
            }
        }
        // off-diagonal blocks do not depend on xi
        for i in 0..4 {
            for j in 0..4 {
                if i >= 2 || j >= 2 {
                    prop_assert_eq!(lc[(i, j)], l0[(i, j)]);
                }
            }
        }
    }

    #[test]
    fn bracket_is_antisymmetric_on_skew_algebroids(
        x in prop::array::uniform2(-2.0f64..2.0),
        a1 in -2.0f64..2.0, a2 in -2.0f64..2.0, b1 in -2.0f64..2.0,
    ) {
        let tb = Algebroid::tangent_bundle(2);
        let u = Section::new(vec![Expr::mul(Expr::num(a1), e("x1*x2")), Expr::add(Expr::num(a2), e("x1^2"))]);
        let v = Section::new(vec![e("sin(x2)"), Expr::mul(Expr::num(b1), e("x2"))]);
        let s = tb.bracket(&u, &v).unwrap().plus(&tb.bracket(&v, &u).unwrap());
        for c in s.eval_at(&x).unwrap() {
            prop_assert!(c.abs() < 1e-12);
        }
    }
}
