//! Generate data from known parameters, refit, compare.

mod common;

use ktbench::baselines::{
    bkt_fit_em, irt_fit, irt_gradient_max_norm, pfa_fit, BktFitOptions, BktParams, IrtFitOptions,
    IrtObservation, PfaFitOptions, PfaParams,
};
use ktbench::math::pearson;

#[test]
fn bkt_recovers_generating_parameters() {
    let truth = BktParams {
        l0: 0.3,
        t: 0.2,
        g: 0.15,
        s: 0.05,
    };
    let data = common::bkt_sample(&truth, 500, 20, 11);
    let fit = bkt_fit_em(&data, BktFitOptions::default(), 5);
    let p = fit.params;
    for (name, got, want) in [("l0", p.l0, truth.l0), ("t", p.t, truth.t), ("g", p.g, truth.g), ("s", p.s, truth.s)] {
        assert!((got - want).abs() <= 0.05, "{name}: {got} vs {want}");
    }
    assert!(fit.loglik.windows(2).all(|w| w[1] >= w[0] - 1e-9));
}

#[test]
fn bkt_loglik_never_decreases() {
    let mut r = common::rng(3);
    use rand::Rng;
    for d in 0..20 {
        let truth = BktParams {
            l0: r.gen_range(0.05..0.95),
            t: r.gen_range(0.02..0.5),
            g: r.gen_range(0.05..0.4),
            s: r.gen_range(0.02..0.3),
        };
        let data = common::bkt_sample(&truth, r.gen_range(5..60), r.gen_range(2..15), d);
        let fit = bkt_fit_em(&data, BktFitOptions::default(), d);
        for w in fit.loglik.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "dataset {d}: {} -> {}", w[0], w[1]);
        }
    }
}

#[test]
fn irt_recovers_abilities() {
    let g = common::irt_grid(200, 50, 21);
    let obs: Vec<IrtObservation<'_>> = g
        .answers
        .iter()
        .map(|&(s, i, c)| IrtObservation {
            student: &g.students[s],
            item: &g.items[i],
            correct: c,
        })
        .collect();
    let fit = irt_fit(&obs, IrtFitOptions::default()).unwrap();
    assert!(fit.converged);
    assert!(irt_gradient_max_norm(&obs, &fit.params) < 1e-4);
    let est: Vec<f64> = g.students.iter().map(|s| fit.params.theta_of(s)).collect();
    let r = pearson(&g.theta, &est);
    assert!(r > 0.8, "correlation {r}");
}

#[test]
fn pfa_recovers_generating_parameters() {
    let truth = PfaParams {
        beta: vec![-0.4, 0.3, -0.2, 0.5],
        gamma: vec![0.25, 0.15, 0.3, 0.1],
        rho: vec![-0.15, 0.1, -0.1, -0.2],
    };
    let obs = common::pfa_sample(&truth, 50_000, 40, 4);
    let fit = pfa_fit(&obs, 4, PfaFitOptions::default());
    let p = &fit.params;
    for k in 0..4 {
        for (name, got, want) in [
            ("beta", p.beta[k], truth.beta[k]),
            ("gamma", p.gamma[k], truth.gamma[k]),
            ("rho", p.rho[k], truth.rho[k]),
        ] {
            assert_eq!(got.signum(), want.signum(), "{name}[{k}]: {got} vs {want}");
            assert!((got - want).abs() <= 0.1, "{name}[{k}]: {got} vs {want}");
        }
    }
    assert!(fit.objective.last() < fit.objective.first());
}

#[test]
fn pfa_success_weight_exceeds_failure_weight() {
    let truth = PfaParams {
        beta: vec![0.0, -0.3],
        gamma: vec![0.3, 0.3],
        rho: vec![0.0, 0.0],
    };
    let obs = common::pfa_sample(&truth, 50_000, 40, 9);
    let fit = pfa_fit(&obs, 2, PfaFitOptions::default());
    for k in 0..2 {
        assert!(fit.params.gamma[k] > fit.params.rho[k], "{:?}", fit.params);
    }
}
