//! Bayesian knowledge tracing: a two-state hidden Markov model per skill
//! with guess/slip emissions and no forgetting, fitted by Baum-Welch.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PROB_FLOOR: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BktParams {
    /// Initial probability of mastery.
    pub l0: f64,
    /// Probability of learning after each opportunity.
    pub t: f64,
    /// Probability of answering correctly without mastery.
    pub g: f64,
    /// Probability of answering incorrectly despite mastery.
    pub s: f64,
}

impl Default for BktParams {
    /// Used for skills with too little data to fit.
    fn default() -> Self {
        BktParams {
            l0: 0.5,
            t: 0.1,
            g: 0.2,
            s: 0.1,
        }
    }
}

impl BktParams {
    fn clamped(self, caps: Option<(f64, f64)>) -> Self {
        let c = |p: f64| p.clamp(PROB_FLOOR, 1.0 - PROB_FLOOR);
        let (g_cap, s_cap) = caps.unwrap_or((1.0, 1.0));
        BktParams {
            l0: c(self.l0),
            t: c(self.t),
            g: c(self.g.min(g_cap)),
            s: c(self.s.min(s_cap)),
        }
    }

    fn emission(&self, mastered: bool, correct: bool) -> f64 {
        match (mastered, correct) {
            (true, true) => 1.0 - self.s,
            (true, false) => self.s,
            (false, true) => self.g,
            (false, false) => 1.0 - self.g,
        }
    }
}

/// Probability of a correct answer given mastery probability `l`.
#[inline]
pub fn bkt_predict(l: f64, p: &BktParams) -> f64 {
    l * (1.0 - p.s) + (1.0 - l) * p.g
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BktUpdate {
    /// Mastery probability conditioned on the answer, before learning.
    pub posterior: f64,
    /// Mastery probability for the next opportunity.
    pub next: f64,
    /// The answer had zero probability; the state was left unchanged.
    pub degenerate: bool,
}

/// Conditions mastery on one answer, then applies the learning transition.
pub fn bkt_update(l: f64, correct: bool, p: &BktParams) -> BktUpdate {
    let (num, den) = if correct {
        let num = l * (1.0 - p.s);
        (num, num + (1.0 - l) * p.g)
    } else {
        let num = l * p.s;
        (num, num + (1.0 - l) * (1.0 - p.g))
    };
    if den <= 0.0 || !den.is_finite() {
        return BktUpdate {
            posterior: l,
            next: l,
            degenerate: true,
        };
    }
    let posterior = num / den;
    BktUpdate {
        posterior,
        next: posterior + (1.0 - posterior) * p.t,
        degenerate: false,
    }
}

/// Predicted probability of each answer given the answers before it.
pub fn bkt_filter(p: &BktParams, answers: &[bool]) -> Vec<f64> {
    let mut l = p.l0;
    answers
        .iter()
        .map(|&a| {
            let pred = bkt_predict(l, p);
            l = bkt_update(l, a, p).next;
            pred
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BktFitOptions {
    pub max_iters: usize,
    /// Stop once the log-likelihood gains less than this.
    pub tol: f64,
    /// Optional upper bounds on (guess, slip).
    pub caps: Option<(f64, f64)>,
}

impl Default for BktFitOptions {
    fn default() -> Self {
        BktFitOptions {
            max_iters: 200,
            tol: 1e-6,
            caps: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BktSkillFit {
    pub params: BktParams,
    /// Too few observations; defaults were used.
    pub fallback: bool,
    pub iterations: usize,
    /// Log-likelihood at the start of every iteration and after the last one.
    pub loglik: Vec<f64>,
}

/// Log-likelihood of all sequences plus expected sufficient statistics.
struct Expectations {
    loglik: f64,
    first_mastered: f64,
    n_sequences: f64,
    learn: f64,
    unmastered_before_last: f64,
    unmastered_correct: f64,
    unmastered: f64,
    mastered_wrong: f64,
    mastered: f64,
}

fn e_step(p: &BktParams, sequences: &[Vec<bool>]) -> Expectations {
    let mut e = Expectations {
        loglik: 0.0,
        first_mastered: 0.0,
        n_sequences: 0.0,
        learn: 0.0,
        unmastered_before_last: 0.0,
        unmastered_correct: 0.0,
        unmastered: 0.0,
        mastered_wrong: 0.0,
        mastered: 0.0,
    };
    // state 0 = not mastered, 1 = mastered
    let trans = [[1.0 - p.t, p.t], [0.0, 1.0]];
    let mut alpha: Vec<[f64; 2]> = Vec::new();
    let mut scale: Vec<f64> = Vec::new();
    let mut beta: Vec<[f64; 2]> = Vec::new();
    for obs in sequences.iter().filter(|o| !o.is_empty()) {
        let n = obs.len();
        alpha.clear();
        scale.clear();
        let emit = |t: usize, s: usize| p.emission(s == 1, obs[t]);

        let a0 = [(1.0 - p.l0) * emit(0, 0), p.l0 * emit(0, 1)];
        let c0 = a0[0] + a0[1];
        alpha.push([a0[0] / c0, a0[1] / c0]);
        scale.push(c0);
        for t in 1..n {
            let prev = alpha[t - 1];
            let mut a = [0.0; 2];
            for (s, slot) in a.iter_mut().enumerate() {
                *slot = (prev[0] * trans[0][s] + prev[1] * trans[1][s]) * emit(t, s);
            }
            let c = a[0] + a[1];
            alpha.push([a[0] / c, a[1] / c]);
            scale.push(c);
        }

        beta.clear();
        beta.resize(n, [1.0, 1.0]);
        for t in (0..n - 1).rev() {
            for s in 0..2 {
                beta[t][s] = (0..2)
                    .map(|s2| trans[s][s2] * emit(t + 1, s2) * beta[t + 1][s2])
                    .sum::<f64>()
                    / scale[t + 1];
            }
        }

        e.loglik += scale.iter().map(|c| c.ln()).sum::<f64>();
        e.n_sequences += 1.0;
        for t in 0..n {
            let g0 = alpha[t][0] * beta[t][0];
            let g1 = alpha[t][1] * beta[t][1];
            let norm = g0 + g1;
            let (g0, g1) = (g0 / norm, g1 / norm);
            if t == 0 {
                e.first_mastered += g1;
            }
            e.unmastered += g0;
            e.mastered += g1;
            if obs[t] {
                e.unmastered_correct += g0;
            } else {
                e.mastered_wrong += g1;
            }
            if t + 1 < n {
                e.unmastered_before_last += g0;
                e.learn += alpha[t][0] * trans[0][1] * emit(t + 1, 1) * beta[t + 1][1] / scale[t + 1];
            }
        }
    }
    e
}

/// Log-likelihood of the sequences under `p`.
pub fn bkt_loglik(p: &BktParams, sequences: &[Vec<bool>]) -> f64 {
    e_step(p, sequences).loglik
}

fn ratio(num: f64, den: f64, fallback: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        fallback
    }
}

/// Baum-Welch for one skill. `sequences` holds each student's answers on it.
pub fn bkt_fit_em(sequences: &[Vec<bool>], opts: BktFitOptions, seed: u64) -> BktSkillFit {
    let n_obs: usize = sequences.iter().map(Vec::len).sum();
    if n_obs < 2 {
        return BktSkillFit {
            params: BktParams::default(),
            fallback: true,
            iterations: 0,
            loglik: Vec::new(),
        };
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = BktParams {
        l0: 0.5 * rng.gen_range(0.4..1.0),
        t: 0.5 * rng.gen_range(0.4..1.0),
        g: 0.2 + rng.gen_range(-0.05..0.05),
        s: 0.1 + rng.gen_range(-0.05..0.05),
    }
    .clamped(opts.caps);

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut e = e_step(&p, sequences);
    while iterations < opts.max_iters {
        trace.push(e.loglik);
        iterations += 1;
        p = BktParams {
            l0: ratio(e.first_mastered, e.n_sequences, p.l0),
            t: ratio(e.learn, e.unmastered_before_last, p.t),
            g: ratio(e.unmastered_correct, e.unmastered, p.g),
            s: ratio(e.mastered_wrong, e.mastered, p.s),
        }
        .clamped(opts.caps);
        let next = e_step(&p, sequences);
        let gain = next.loglik - e.loglik;
        e = next;
        if gain.abs() < opts.tol {
            break;
        }
    }
    trace.push(e.loglik);
    BktSkillFit {
        params: p,
        fallback: false,
        iterations,
        loglik: trace,
    }
}

/// Rows `skill,l0,t,g,s,fallback`.
pub fn write_bkt<W: Write>(out: W, tags: &[String], fits: &[BktSkillFit]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["skill", "l0", "t", "g", "s", "fallback"])?;
    for (tag, f) in tags.iter().zip(fits) {
        let p = f.params;
        w.write_record([
            tag.clone(),
            p.l0.to_string(),
            p.t.to_string(),
            p.g.to_string(),
            p.s.to_string(),
            (f.fallback as u8).to_string(),
        ])?;
    }
    w.flush()
}
