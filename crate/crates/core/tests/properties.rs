use finsum_bounds::analysis::{lower_bound_curve, rate_q};
use finsum_bounds::numkernel::{q_embed, q_restrict, Point};
use finsum_bounds::oracle::{
    resist_finalize, transcript_replay_check, CertificateStatus, ComponentOracle, Ifo, ResistingIfo,
    ResistingState,
};
use finsum_bounds::problems::{build_hard_instance, chain_rate, guarded_dim};
use finsum_bounds::solvers::{run, SolverConfig, SolverKind};
use proptest::prelude::*;

fn vec_strategy(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, len)
}

/// An IFO algorithm whose component choices are fixed in advance and whose
/// iterates depend only on the answers it received.
fn scripted<O: ComponentOracle<f64>>(
    ifo: &mut Ifo<f64, O>,
    script: &[usize],
    kappa: f64,
) -> finsum_bounds::Result<Point<f64>> {
    let mut x = Point::zeros(ifo.dim());
    for &c in script {
        let (v, g) = ifo.query(c % ifo.n(), &x)?;
        x.axpy(-1.0 / (kappa + v.abs()), &g);
    }
    Ok(x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn embed_restrict_round_trip(n in 1usize..9, i_frac in 0.0f64..1.0, x in vec_strategy(23)) {
        let i = ((i_frac * n as f64) as usize).min(n - 1);
        let x = Point::from(x);
        let e = q_embed(i, n, &x).unwrap();
        prop_assert_eq!(e.dim(), n * 23);
        prop_assert!(q_restrict(i, n, &e).unwrap().bit_eq(&x));
        prop_assert!((e.norm_sq() - x.norm_sq()).abs() <= 1e-12 * (1.0 + x.norm_sq()));
    }

    #[test]
    fn resisting_answers_are_consistent_with_the_finalized_function(
        kappa in 2.0f64..20.0,
        queries in prop::collection::vec(vec_strategy(8), 1..20),
        along_gradient in prop::collection::vec(any::<bool>(), 20),
    ) {
        let dim = 160;
        let mut state = ResistingState::with_gamma(1.0, kappa, 1.0, dim).unwrap();
        let mut log = Vec::new();
        let mut x = Point::zeros(dim);
        for (k, head) in queries.iter().enumerate() {
            // Either a gradient step or a jump to an arbitrary point.
            if !along_gradient[k] {
                x = Point::from_fn(dim, |j| if j < head.len() { head[j] } else { 0.0 });
            }
            let (v, g) = state.query(&x).unwrap();
            prop_assert!(state.family().len() <= 2 * k + 2);
            let in_span = state.family().dist_to_span(&g).unwrap();
            prop_assert!(in_span <= 1e-10 * g.norm().max(1.0));
            log.push((x.clone(), v, g.clone()));
            x.axpy(-1.0 / kappa, &g);
        }
        let cert = resist_finalize(&state, &x).unwrap();
        for (xi, yi, gi) in &log {
            let (v, g) = cert.problem.value_grad(xi).unwrap();
            let scale = yi.abs() + xi.norm_sq() + 1.0;
            prop_assert!((v - yi).abs() <= 1e-9 * scale, "value {} vs {}", v, yi);
            prop_assert!(g.distance(gi) <= 1e-9 * (gi.norm() + xi.norm() + 1.0));
        }
        prop_assert!(cert.summary.holds);
    }

    #[test]
    fn scripted_algorithm_replays_bitwise(
        n in 1usize..5,
        kappa in 2.0f64..60.0,
        script in prop::collection::vec(0usize..100, 1..40),
    ) {
        let q = rate_q(kappa, n).unwrap();
        let dim = guarded_dim(q) + 2 * script.len() + 4;
        let adv = ResistingIfo::new(n, 1.0, kappa, 1.0, dim, script.len()).unwrap();
        let mut ifo = Ifo::new(adv);
        let x_k = scripted(&mut ifo, &script, kappa).unwrap();
        let (adv, transcript) = ifo.into_parts();
        let per: usize = transcript.per_component_calls().iter().sum();
        prop_assert_eq!(per, transcript.total_calls());
        let cert = adv.finalize(&x_k).unwrap();
        prop_assert!(cert.summary.holds);
        let outcome = transcript_replay_check(|ifo| scripted(ifo, &script, kappa), &cert, &transcript).unwrap();
        prop_assert!(outcome.reproduced, "diverged at {:?}", outcome.first_divergence);
    }

    #[test]
    fn deterministic_solvers_never_beat_the_bound(
        n in 1usize..5,
        kappa in 2.0f64..80.0,
        budget in 1usize..60,
        kind_idx in 0usize..3,
    ) {
        let kind = [SolverKind::Gd, SolverKind::Agm, SolverKind::Cg][kind_idx];
        let q = rate_q(kappa, n).unwrap();
        let dim = guarded_dim(q) + 2 * budget.div_ceil(n) + 4;
        let adv = ResistingIfo::new(n, 1.0, kappa, 1.0, dim, budget).unwrap();
        let mut ifo = Ifo::new(adv);
        let trace = run(&SolverConfig::new(kind, budget), &mut ifo).unwrap();
        prop_assert_eq!(trace.calls, ifo.transcript().total_calls());
        let (adv, _) = ifo.into_parts();
        let mut cert = adv.finalize(&trace.output).unwrap();
        prop_assert_eq!(cert.assess(true), CertificateStatus::Pass);
        for c in &cert.summary.components {
            prop_assert!(c.distance_ok);
        }
        prop_assert!(cert.summary.aggregate_bound.log_value >= cert.summary.bound.log_value - 1e-9);
    }

    #[test]
    fn call_accounting_matches_transcript(
        budget in 1usize..200,
        kind_idx in 0usize..7,
        seed in any::<u64>(),
    ) {
        let kind = SolverKind::ALL[kind_idx];
        let p = build_hard_instance(3, 1.0, 10.0, 1.0, 60).unwrap();
        let mut ifo = Ifo::new(&p);
        let trace = run(&SolverConfig::new(kind, budget).with_seed(seed), &mut ifo).unwrap();
        prop_assert!(trace.calls <= budget);
        prop_assert_eq!(trace.calls, ifo.transcript().total_calls());
        prop_assert!(trace.samples.windows(2).all(|w| w[0].k_calls < w[1].k_calls));
        prop_assert_eq!(trace.samples.last().map(|s| s.k_calls), Some(trace.calls));
    }

    #[test]
    fn bound_curve_is_non_increasing(kappa in 1.0f64..1e4, n in 1usize..50, k in 0usize..5000) {
        let a = lower_bound_curve(1.0, kappa, n, k).unwrap().log_value;
        let b = lower_bound_curve(1.0, kappa, n, k + 1).unwrap().log_value;
        prop_assert!(b <= a);
        prop_assert_eq!(rate_q(kappa, 1).unwrap(), chain_rate(kappa));
        let q = rate_q(kappa, n).unwrap();
        prop_assert!((0.0..1.0).contains(&q));
    }
}
