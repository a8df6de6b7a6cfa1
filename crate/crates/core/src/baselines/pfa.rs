//! Performance factor analysis: a logistic model over per-skill counts of
//! prior successes and failures.

use std::io::Write;

use crate::dataset::{SkillId, StudentSequence};
use crate::math::{clamp_prob, sigmoid};

#[derive(Clone, Debug, PartialEq)]
pub struct PfaParams {
    /// Per-skill easiness.
    pub beta: Vec<f64>,
    /// Gain per prior success.
    pub gamma: Vec<f64>,
    /// Gain per prior failure.
    pub rho: Vec<f64>,
}

impl PfaParams {
    pub fn zeros(n_skills: usize) -> Self {
        PfaParams {
            beta: vec![0.0; n_skills],
            gamma: vec![0.0; n_skills],
            rho: vec![0.0; n_skills],
        }
    }

    pub fn n_skills(&self) -> usize {
        self.beta.len()
    }

    pub fn write<W: Write>(&self, out: W, tags: &[String]) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["skill", "beta", "gamma", "rho"])?;
        for (k, tag) in tags.iter().enumerate() {
            w.write_record([
                tag.clone(),
                self.beta[k].to_string(),
                self.gamma[k].to_string(),
                self.rho[k].to_string(),
            ])?;
        }
        w.flush()
    }
}

/// A student's running success/failure counts per skill.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PfaCounters {
    pub success: Vec<u32>,
    pub failure: Vec<u32>,
}

impl PfaCounters {
    pub fn new(n_skills: usize) -> Self {
        PfaCounters {
            success: vec![0; n_skills],
            failure: vec![0; n_skills],
        }
    }

    pub fn observe(&mut self, skills: &[SkillId], correct: bool) {
        for &k in skills {
            if correct {
                self.success[k] += 1;
            } else {
                self.failure[k] += 1;
            }
        }
    }
}

/// Logit of a correct answer on an item tagged with `skills`.
pub fn pfa_logit(p: &PfaParams, skills: &[SkillId], c: &PfaCounters) -> f64 {
    skills
        .iter()
        .map(|&k| p.beta[k] + p.gamma[k] * c.success[k] as f64 + p.rho[k] * c.failure[k] as f64)
        .sum()
}

pub fn pfa_predict(p: &PfaParams, skills: &[SkillId], c: &PfaCounters) -> f64 {
    sigmoid(pfa_logit(p, skills, c))
}

/// One attempt with its counts as they stood just before it.
#[derive(Clone, Debug, PartialEq)]
pub struct PfaObservation {
    /// `(skill, successes, failures)` for every skill on the item.
    pub features: Vec<(SkillId, f64, f64)>,
    pub correct: bool,
}

/// Materializes count features for every attempt, in chronological order.
pub fn pfa_features<'a, I>(sequences: I, n_skills: usize) -> Vec<PfaObservation>
where
    I: IntoIterator<Item = &'a StudentSequence>,
{
    let mut out = Vec::new();
    for seq in sequences {
        let mut c = PfaCounters::new(n_skills);
        for r in &seq.records {
            let k = r.skill;
            out.push(PfaObservation {
                features: vec![(k, c.success[k] as f64, c.failure[k] as f64)],
                correct: r.correct,
            });
            c.observe(&[k], r.correct);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PfaFitOptions {
    pub l2: f64,
    pub learning_rate: f64,
    pub max_iters: usize,
    /// Stop once the objective changes by less than this.
    pub tol: f64,
}

impl Default for PfaFitOptions {
    fn default() -> Self {
        PfaFitOptions {
            l2: 1e-4,
            learning_rate: 0.1,
            max_iters: 2000,
            tol: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PfaFit {
    pub params: PfaParams,
    /// Penalized objective before each step and after the last.
    pub objective: Vec<f64>,
    pub iterations: usize,
    pub final_learning_rate: f64,
}

fn objective(p: &PfaParams, obs: &[PfaObservation], l2: f64) -> f64 {
    let nll: f64 = obs
        .iter()
        .map(|o| {
            let z: f64 = o
                .features
                .iter()
                .map(|&(k, s, f)| p.beta[k] + p.gamma[k] * s + p.rho[k] * f)
                .sum();
            let q = clamp_prob(sigmoid(z), 1e-12);
            if o.correct {
                -q.ln()
            } else {
                -(1.0 - q).ln()
            }
        })
        .sum();
    let penalty: f64 = p
        .beta
        .iter()
        .chain(&p.gamma)
        .chain(&p.rho)
        .map(|w| w * w)
        .sum();
    nll / obs.len().max(1) as f64 + 0.5 * l2 * penalty
}

/// Gradient descent on the mean negative log-likelihood plus an L2 penalty.
///
/// Each coordinate's step is divided by the mean square of its feature, so
/// skills with few attempts or large counts move at comparable rates.
pub fn pfa_fit(obs: &[PfaObservation], n_skills: usize, opts: PfaFitOptions) -> PfaFit {
    let n = obs.len().max(1) as f64;
    let mut scale = vec![[0.0f64; 3]; n_skills];
    for o in obs {
        for &(k, s, f) in &o.features {
            scale[k][0] += 1.0;
            scale[k][1] += s * s;
            scale[k][2] += f * f;
        }
    }
    for sc in &mut scale {
        for v in sc.iter_mut() {
            *v = *v / n + opts.l2;
        }
    }

    let mut p = PfaParams::zeros(n_skills);
    let mut lr = opts.learning_rate;
    let mut trace = vec![objective(&p, obs, opts.l2)];
    let mut rising = 0;
    let mut iterations = 0;
    let mut grad = vec![[0.0f64; 3]; n_skills];
    while iterations < opts.max_iters {
        iterations += 1;
        grad.iter_mut().for_each(|g| *g = [0.0; 3]);
        for o in obs {
            let z = o
                .features
                .iter()
                .map(|&(k, s, f)| p.beta[k] + p.gamma[k] * s + p.rho[k] * f)
                .sum::<f64>();
            let r = sigmoid(z) - o.correct as u8 as f64;
            for &(k, s, f) in &o.features {
                grad[k][0] += r;
                grad[k][1] += r * s;
                grad[k][2] += r * f;
            }
        }
        for k in 0..n_skills {
            let g = grad[k];
            p.beta[k] -= lr * (g[0] / n + opts.l2 * p.beta[k]) / scale[k][0];
            p.gamma[k] -= lr * (g[1] / n + opts.l2 * p.gamma[k]) / scale[k][1];
            p.rho[k] -= lr * (g[2] / n + opts.l2 * p.rho[k]) / scale[k][2];
        }
        let obj = objective(&p, obs, opts.l2);
        let prev = *trace.last().expect("seeded with initial objective");
        trace.push(obj);
        if obj > prev {
            rising += 1;
            if rising >= 10 {
                lr *= 0.5;
                rising = 0;
            }
        } else {
            rising = 0;
        }
        if (prev - obj).abs() < opts.tol {
            break;
        }
    }
    PfaFit {
        params: p,
        objective: trace,
        iterations,
        final_learning_rate: lr,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_logit() {
        let p = PfaParams {
            beta: vec![0.0],
            gamma: vec![0.2],
            rho: vec![-0.1],
        };
        let c = PfaCounters {
            success: vec![3],
            failure: vec![2],
        };
        assert!((pfa_logit(&p, &[0], &c) - 0.4).abs() < 1e-12);
        assert!((pfa_predict(&p, &[0], &c) - 0.59869).abs() < 1e-5);
    }

    #[test]
    fn zero_counters_give_bias_only() {
        let p = PfaParams {
            beta: vec![0.7],
            gamma: vec![0.2],
            rho: vec![-0.1],
        };
        let c = PfaCounters::new(1);
        assert_eq!(pfa_predict(&p, &[0], &c), sigmoid(0.7));
    }

    #[test]
    fn multiple_skills_sum() {
        let p = PfaParams {
            beta: vec![0.1, -0.3],
            gamma: vec![0.2, 0.05],
            rho: vec![-0.1, 0.0],
        };
        let c = PfaCounters {
            success: vec![1, 4],
            failure: vec![2, 1],
        };
        let both = pfa_logit(&p, &[0, 1], &c);
        let sum = pfa_logit(&p, &[0], &c) + pfa_logit(&p, &[1], &c);
        assert!((both - sum).abs() < 1e-15);
    }

    #[test]
    fn separable_data_stays_finite() {
        let obs: Vec<PfaObservation> = (0..40)
            .map(|i| PfaObservation {
                features: vec![(0, i as f64, 0.0)],
                correct: i >= 20,
            })
            .collect();
        let fit = pfa_fit(&obs, 1, PfaFitOptions::default());
        let p = &fit.params;
        assert!(p.beta[0].is_finite() && p.gamma[0].is_finite() && p.rho[0].is_finite());
        assert!(fit.objective.last().unwrap() < &fit.objective[0]);
    }

    #[test]
    fn counters_increase() {
        let mut c = PfaCounters::new(2);
        c.observe(&[1], true);
        c.observe(&[1], false);
        c.observe(&[0, 1], true);
        assert_eq!(c.success, vec![1, 2]);
        assert_eq!(c.failure, vec![0, 1]);
    }
}
