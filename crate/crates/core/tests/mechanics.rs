//! End-to-end mechanics through the public API.

use algebroid_core::dynamics::{el2_field, noether_check, noether_integral};
use algebroid_core::integrate::{drift_report, integrate, Monitor};
use algebroid_core::lifts::bundle_names;
use algebroid_core::models::{metric_lagrangian, Geodesics, Metric, Wong, WongSetup};
use algebroid_core::sample::SampleBox;
use algebroid_core::{Algebroid, Expr, Lagrangian, Result, Section, VelocityPoint};

fn el2<'a>(a: &'a Algebroid, l: &'a Lagrangian) -> impl FnMut(f64, &[f64]) -> Result<Vec<f64>> + 'a {
    let n = a.base_dim();
    move |_t, s: &[f64]| {
        let (xdot, ydot) = el2_field(a, l, &VelocityPoint::split(s, n))?;
        Ok(xdot.into_iter().chain(ydot).collect())
    }
}

fn energy_monitor(l: &Lagrangian) -> Monitor<'static> {
    let (n, m) = l.dims();
    let e = l.energy().compile(&bundle_names(n, m)).unwrap();
    Monitor::new("H", move |_t, s: &[f64]| Ok(e.eval(s)?))
}

fn sphere() -> (Algebroid, Metric) {
    (Algebroid::tangent_bundle(2), Metric::from_strings(2, &[vec!["1", "0"], vec!["0", "sin(x1)^2"]]).unwrap())
}

#[test]
fn rigid_body_energy_is_conserved() {
    let so3 = Algebroid::so3();
    let l = Lagrangian::parse(0, 3, "0.5*(y1^2 + 2*y2^2 + 3*y3^2)").unwrap();
    let tr = integrate(el2(&so3, &l), &[1.0, 1.0, 1.0], 0.0, 10.0, 1e-3, bundle_names(0, 3), &[energy_monitor(&l)]).unwrap();
    assert_eq!(tr.len(), 10001);
    assert!(drift_report(&tr, "H").unwrap().0 < 1e-8);
}

#[test]
fn free_particle_moves_in_a_straight_line() {
    let tb = Algebroid::tangent_bundle(2);
    let l = Lagrangian::parse(2, 2, "0.5*(y1^2 + y2^2)").unwrap();
    let tr = integrate(el2(&tb, &l), &[1.0, -2.0, 0.5, 0.25], 0.0, 3.0, 0.01, bundle_names(2, 2), &[]).unwrap();
    for (t, s) in tr.times.iter().zip(&tr.states) {
        assert!((s[0] - (1.0 + 0.5 * t)).abs() < 1e-12 && (s[1] - (-2.0 + 0.25 * t)).abs() < 1e-12);
    }
}

#[test]
fn sphere_equator_is_a_geodesic_and_sign_flip_is_detected() {
    let (a, g) = sphere();
    let l = metric_lagrangian(&g);
    let state0 = [std::f64::consts::FRAC_PI_2, 0.0, 0.0, 1.0];
    let tr = integrate(el2(&a, &l), &state0, 0.0, 10.0, 1e-3, bundle_names(2, 2), &[]).unwrap();
    let theta = tr.column("x1").unwrap();
    assert!(theta.iter().all(|t| (t - std::f64::consts::FRAC_PI_2).abs() < 1e-8));

    // ydot = +Gamma y y instead of -Gamma y y breaks energy conservation
    let geo = Geodesics::new(&a, &g).unwrap();
    let wrong = |_t: f64, s: &[f64]| -> Result<Vec<f64>> {
        let (xdot, ydot) = geo.field(&VelocityPoint::split(s, 2))?;
        Ok(xdot.into_iter().chain(ydot.into_iter().map(|v| -v)).collect())
    };
    let start = [1.0, 0.0, 0.3, 1.0];
    let tr = integrate(wrong, &start, 0.0, 2.0, 1e-3, bundle_names(2, 2), &[energy_monitor(&l)]).unwrap();
    assert!(drift_report(&tr, "H").unwrap().0 > 1e-3);
}

#[test]
fn isotropic_rigid_body_has_a_noether_integral() {
    let so3 = Algebroid::so3();
    let iso = Lagrangian::parse(0, 3, "0.5*(y1^2 + y2^2 + y3^2)").unwrap();
    let aniso = Lagrangian::parse(0, 3, "0.5*(y1^2 + 2*y2^2 + 3*y3^2)").unwrap();
    let e3 = Section::basis(3, 2);
    let samples = SampleBox::cube(3, -2.0, 2.0).sample(30, 7);
    assert!(noether_check(&so3, &iso, &e3, &Expr::zero(), &samples, 1e-12).unwrap().passed);
    let r = noether_check(&so3, &aniso, &e3, &Expr::zero(), &samples, 1e-12).unwrap();
    assert!(!r.passed && r.max_residual > 1e-3);

    let integral = noether_integral(&iso, &e3, &Expr::zero()).unwrap().compile(&bundle_names(0, 3)).unwrap();
    let mon = Monitor::new("J3", move |_t, s: &[f64]| Ok(integral.eval(s)?));
    let tr = integrate(el2(&so3, &iso), &[0.3, -1.0, 0.8], 0.0, 10.0, 1e-3, bundle_names(0, 3), &[mon]).unwrap();
    assert!(drift_report(&tr, "J3").unwrap().0 < 1e-8);
}

#[test]
fn lie_classification_of_standard_examples() {
    for n in 1..=4 {
        let samples = SampleBox::cube(n, -1.0, 1.0).sample(10, 1);
        assert!(Algebroid::tangent_bundle(n).check_lie(&samples, 1e-12).unwrap().passed);
    }
    assert!(Algebroid::so3().check_lie(&[vec![]], 1e-12).unwrap().passed);
    assert!(Algebroid::sl2().check_lie(&[vec![]], 1e-12).unwrap().passed);
}

#[test]
fn wong_charge_and_energy_are_conserved_with_invariant_metric() {
    let g = Metric::from_strings(2, &[vec!["1", "0"], vec!["0", "1 + x1^2"]]).unwrap();
    let conn: Vec<Vec<Expr>> = [["x2", "0"], ["0", "x1"], ["x1*x2", "sin(x1)"]]
        .iter()
        .map(|r| r.iter().map(|s| s.parse::<Expr>().unwrap()).collect())
        .collect();
    let c = algebroid_core::algebroid::so3_constants();
    let setup = WongSetup::new(g, c, nalgebra::DMatrix::identity(3, 3), conn).unwrap();
    let w = Wong::new(setup, &SampleBox::cube(2, -1.0, 1.0).sample(20, 3)).unwrap();
    let l = w.lagrangian().unwrap();
    let field = |_t: f64, s: &[f64]| -> Result<Vec<f64>> {
        let (xdot, ydot) = w.el_field(&VelocityPoint::split(s, 2))?;
        Ok(xdot.into_iter().chain(ydot).collect())
    };
    let charge = Monitor::new("charge", |_t, s: &[f64]| Ok(s[4..].iter().map(|v| v * v).sum()));
    let start = [0.1, 0.2, 0.3, -0.2, 1.0, 0.5, -0.4];
    let tr = integrate(field, &start, 0.0, 5.0, 1e-3, bundle_names(2, 5), &[energy_monitor(&l), charge]).unwrap();
    assert!(drift_report(&tr, "H").unwrap().0 < 1e-8);
    assert!(drift_report(&tr, "charge").unwrap().0 < 1e-8);
}
