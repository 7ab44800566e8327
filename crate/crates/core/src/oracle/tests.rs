use super::*;
use crate::error::Error;
use crate::scalar::Scalar;
use crate::numkernel::Point;
use crate::problems::NesterovFunction;

type Answered = (Point<f64>, f64, Point<f64>);

fn gd_on_state(state: &mut ResistingState<f64>, steps: usize) -> (Vec<Answered>, Point<f64>) {
    let step = 1.0 / state.chain().l();
    let mut x = Point::zeros(state.dim());
    let mut log = Vec::new();
    for _ in 0..steps {
        let (v, g) = state.query(&x).unwrap();
        log.push((x.clone(), v, g.clone()));
        x.axpy(-step, &g);
    }
    (log, x)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn first_query_at_origin() {
    let mut s = ResistingState::<f64>::new(1.0, 100.0, 2.0, 256).unwrap();
    let (v, g) = s.query(&Point::zeros(256)).unwrap();
    assert_eq!(v, 0.0);
    assert_eq!(s.family().len(), 1);
    let v0 = s.family().member(0);
    let expected = v0.scaled(-(100.0 - 1.0) * 2.0 / 4.0);
    assert!(g.distance(&expected) <= 1e-14);
}

#[test]
fn repeated_query_gives_identical_answers() {
    let mut s = ResistingState::<f64>::new(1.0, 100.0, 1.0, 256).unwrap();
    let (_, x) = gd_on_state(&mut s, 5);
    let a = s.query(&x).unwrap();
    let b = s.query(&x).unwrap();
    assert!(a.0.bit_eq(b.0));
    assert!(a.1.bit_eq(&b.1));
}

#[test]
fn span_growth_and_gradients_in_span() {
    let mut s = ResistingState::<f64>::new(1.0, 100.0, 1.0, 256).unwrap();
    let (log, _) = gd_on_state(&mut s, 30);
    for (k, &size) in s.span_sizes().iter().enumerate() {
        assert!(size <= 2 * k + 2, "|S_{k}| = {size}");
    }
    assert!(s.family().orthonormality_defect() <= 1e-10);
    for (k, (_, _, g)) in log.iter().enumerate() {
        let prefix = s.family().prefix(s.span_sizes()[k]);
        let d = prefix.dist_to_span(g).unwrap();
        assert!(d <= 1e-10 * g.norm().max(1.0), "gradient {k} off span by {d}");
    }
}

#[test]
fn finalized_function_reproduces_every_answer() {
    let mut s = ResistingState::<f64>::new(1.0, 100.0, 1.0, 256).unwrap();
    let (log, x) = gd_on_state(&mut s, 25);
    let cert = resist_finalize(&s, &x).unwrap();
    for (k, (xi, yi, gi)) in log.iter().enumerate() {
        let (v, g) = cert.problem.value_grad(xi).unwrap();
        assert!(rel_close(v, *yi, 1e-9) || (v - yi).abs() <= 1e-12, "value {k}: {v} vs {yi}");
        assert!(g.distance(gi) <= 1e-9 * gi.norm().max(1e-3), "gradient {k}");
    }
}

#[test]
fn mirror_about_span_preserves_answers() {
    let mut s = ResistingState::<f64>::new(1.0, 50.0, 1.0, 200).unwrap();
    let (log, x) = gd_on_state(&mut s, 15);
    let cert = resist_finalize(&s, &x).unwrap();
    let p = s.family();
    for (xi, yi, gi) in &log {
        let m = p.mirror(xi).unwrap();
        let (v, g) = cert.problem.value_grad(&m).unwrap();
        // The mirror is its own adjoint, so the chain rule maps g back through it.
        let g_back = p.mirror(&g).unwrap();
        assert!((v - yi).abs() <= 1e-9 * yi.abs().max(1.0));
        assert!(g_back.distance(gi) <= 1e-9 * gi.norm().max(1.0));
    }
}

#[test]
fn single_certificate_for_zero_output() {
    let mut s = ResistingState::<f64>::new(1.0, 100.0, 1.0, 256).unwrap();
    let _ = gd_on_state(&mut s, 10);
    let cert = resist_finalize(&s, &Point::zeros(256)).unwrap();
    assert!(cert.summary.observed.log_value.abs() < 1e-12);
    assert!(cert.summary.holds);
    let q: f64 = 9.0 / 11.0;
    assert!((cert.summary.bound.log_value - 20.0 * q.ln()).abs() < 1e-9);
    assert!(cert.summary.components[0].distance_ok);
}

#[test]
fn no_queries_gives_trivial_certificate() {
    let s = ResistingState::<f64>::new(1.0, 100.0, 1.0, 256).unwrap();
    let x = Point::from_fn(256, |i| 0.5f64.powi(i as i32 + 1));
    let cert = resist_finalize(&s, &x).unwrap();
    assert_eq!(cert.summary.bound.log_value, 0.0);
    assert!(cert.summary.observed.log_value >= -1e-12);
    assert!(cert.minimizer.dot(&x) <= 0.0);
}

#[test]
fn capacity_error_instead_of_degradation() {
    // q = 9/11 needs 138 guard coordinates, leaving room for a handful of queries.
    let mut s = ResistingState::<f64>::new(1.0, 100.0, 1.0, 146).unwrap();
    let mut x = Point::zeros(146);
    let mut err = None;
    for _ in 0..10 {
        match s.query(&x) {
            Ok((_, g)) => x.axpy(-0.01, &g),
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    assert!(matches!(err, Some(Error::Capacity { .. })));
}

#[test]
fn components_are_independent() {
    let mut a = ResistingIfo::<f64>::new(3, 1.0, 20.0, 1.0, 200, 100).unwrap();
    let x = Point::from_fn(600, |i| (i as f64 * 0.37).sin());
    a.query(0, &x).unwrap();
    let before: Vec<_> = a.states()[1..].iter().map(|s| s.family().clone()).collect();
    a.query(0, &x.scaled(2.0)).unwrap();
    a.query(2, &x).unwrap();
    assert_eq!(a.states()[1].family(), &before[0]);
    assert_eq!(a.states()[1].queries(), 0);
    assert_eq!(a.states()[2].queries(), 1);
}

#[test]
fn single_component_ifo_matches_single_state() {
    let mut ifo = ResistingIfo::<f64>::single(1.0, 100.0, 1.0, 256, 10).unwrap();
    let mut st = ResistingState::<f64>::with_gamma(1.0, 100.0, 1.0, 256).unwrap();
    let mut x = Point::zeros(256);
    for _ in 0..10 {
        let (v1, g1) = ifo.query(0, &x).unwrap();
        let (v2, g2) = st.query(&x).unwrap();
        // The IFO returns N - (mu/2)||x||^2, the single oracle returns N.
        assert!((v1 + 0.5 * x.norm_sq() - v2).abs() <= 1e-12 * v2.abs().max(1.0));
        assert!(g1.add(&x).distance(&g2) <= 1e-12 * g2.norm().max(1.0));
        x.axpy(-0.01, &g2);
    }
}

#[test]
fn fewer_calls_than_components_leave_full_distance() {
    let n = 5;
    let mut adv = ResistingIfo::<f64>::new(n, 1.0, 30.0, 2.0, 200, n - 1).unwrap();
    // Good answers on the queried components cannot help.
    let mut x = Point::zeros(n * 200);
    for i in 0..n - 1 {
        let (_, g) = adv.query(i, &x).unwrap();
        x.axpy(-0.05, &g);
    }
    let cert = adv.finalize(&x).unwrap();
    assert_eq!(cert.summary.unqueried_assigned, Some(n - 1));
    assert_eq!(cert.summary.bound.log_value, 0.0);
    assert!(cert.summary.holds);
    assert!((cert.minimizer.norm() - 2.0).abs() < 1e-9);
    let err = cert.minimizer.distance(&x);
    assert!(err >= 2.0 * (1.0 - 1e-9));
}

#[test]
fn equal_budgets_make_the_aggregate_tight() {
    let n = 4;
    let mut adv = ResistingIfo::<f64>::new(n, 1.0, 41.0, 1.0, 200, 4 * n).unwrap();
    let mut x = Point::zeros(n * 200);
    for _ in 0..4 {
        let mut g_sum = Point::zeros(n * 200);
        for i in 0..n {
            let (_, g) = adv.query(i, &x).unwrap();
            g_sum.axpy(1.0, &g);
        }
        x.axpy(-0.01, &g_sum);
    }
    let cert = adv.finalize(&x).unwrap();
    let s = &cert.summary;
    assert_eq!(s.per_component_calls, vec![4; n]);
    assert!((s.aggregate_bound.log_value - s.bound.log_value).abs() < 1e-9);
    for c in &s.components {
        assert!(c.distance_ok);
    }
}

#[test]
fn randomized_status_is_not_asserted() {
    let adv = ResistingIfo::<f64>::new(2, 1.0, 10.0, 1.0, 100, 10).unwrap();
    let mut cert = adv.finalize(&Point::zeros(200)).unwrap();
    assert_eq!(cert.assess(false), CertificateStatus::NotAsserted);
    assert_eq!(cert.assess(true), CertificateStatus::Pass);
    let json = cert.to_json();
    assert!(json.contains("\"status\": \"pass\""));
}

#[test]
fn finalized_components_use_their_own_parameters() {
    let adv = ResistingIfo::<f64>::new(4, 1.0, 101.0, 1.0, 300, 8).unwrap();
    let (c_mu, c_l) = crate::problems::component_params(4, 1.0, 101.0);
    assert_eq!((c_mu, c_l), (4.0, 104.0));
    let expected = NesterovFunction::new(c_mu, c_l, 0.0, 300).unwrap().q();
    assert!((adv.q() - expected).abs() < 1e-14);
    assert!((crate::analysis::component_kappa(101.0, 4) - 26.0f64).abs() < 1e-12);
}
