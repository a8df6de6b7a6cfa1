//! Data generators shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use ktbench::baselines::{BktParams, PfaCounters, PfaObservation, PfaParams};
use ktbench::math::sigmoid;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Answer sequences sampled from the two-state mastery chain.
pub fn bkt_sample(p: &BktParams, n_seq: usize, len: usize, seed: u64) -> Vec<Vec<bool>> {
    let mut r = rng(seed);
    (0..n_seq)
        .map(|_| {
            let mut mastered = r.gen_bool(p.l0);
            (0..len)
                .map(|_| {
                    let correct = if mastered { !r.gen_bool(p.s) } else { r.gen_bool(p.g) };
                    if !mastered && r.gen_bool(p.t) {
                        mastered = true;
                    }
                    correct
                })
                .collect()
        })
        .collect()
}

/// One answer per (student, item) pair with standard normal abilities and
/// difficulties. Returns true abilities, student ids, item ids and answers.
pub struct IrtGrid {
    pub theta: Vec<f64>,
    pub students: Vec<String>,
    pub items: Vec<String>,
    pub answers: Vec<(usize, usize, bool)>,
}

pub fn irt_grid(n_students: usize, n_items: usize, seed: u64) -> IrtGrid {
    let mut r = rng(seed);
    let theta: Vec<f64> = (0..n_students).map(|_| StandardNormal.sample(&mut r)).collect();
    let beta: Vec<f64> = (0..n_items).map(|_| StandardNormal.sample(&mut r)).collect();
    let mut answers = Vec::new();
    for (s, t) in theta.iter().enumerate() {
        for (i, b) in beta.iter().enumerate() {
            answers.push((s, i, r.gen_bool(sigmoid(t - b))));
        }
    }
    IrtGrid {
        theta,
        students: (0..n_students).map(|s| format!("s{s}")).collect(),
        items: (0..n_items).map(|i| format!("i{i}")).collect(),
        answers,
    }
}

/// Count features and answers drawn from known per-skill parameters, in
/// sequences of `len` attempts on uniformly chosen skills.
pub fn pfa_sample(p: &PfaParams, n_samples: usize, len: usize, seed: u64) -> Vec<PfaObservation> {
    let mut r = rng(seed);
    let n = p.n_skills();
    let mut out = Vec::with_capacity(n_samples);
    while out.len() < n_samples {
        let mut c = PfaCounters::new(n);
        for _ in 0..len.min(n_samples - out.len()) {
            let k = r.gen_range(0..n);
            let (s, f) = (c.success[k] as f64, c.failure[k] as f64);
            let correct = r.gen_bool(sigmoid(p.beta[k] + p.gamma[k] * s + p.rho[k] * f));
            out.push(PfaObservation {
                features: vec![(k, s, f)],
                correct,
            });
            c.observe(&[k], correct);
        }
    }
    out
}
