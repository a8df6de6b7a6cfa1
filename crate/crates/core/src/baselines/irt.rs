//! Rasch model with Gaussian priors, fitted by alternating Newton-Raphson.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::math::sigmoid;

/// Probability that a student of proficiency `theta` answers an item of
/// difficulty `beta` correctly.
#[inline]
pub fn irt_predict(theta: f64, beta: f64) -> f64 {
    sigmoid(theta - beta)
}

#[derive(Clone, Copy, Debug)]
pub struct IrtObservation<'a> {
    pub student: &'a str,
    pub item: &'a str,
    pub correct: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IrtFitOptions {
    pub prior_variance: f64,
    /// Cap on full sweeps over all parameters.
    pub max_newton_steps: usize,
    pub tol: f64,
}

impl Default for IrtFitOptions {
    fn default() -> Self {
        IrtFitOptions {
            prior_variance: 1.0,
            max_newton_steps: 500,
            tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IrtParams {
    pub theta: HashMap<String, f64>,
    pub beta: HashMap<String, f64>,
    pub prior_variance: f64,
}

#[derive(Clone, Debug)]
pub struct IrtFit {
    pub params: IrtParams,
    pub sweeps: usize,
    pub converged: bool,
}

impl IrtParams {
    /// Unseen students and items sit at the prior mean.
    pub fn theta_of(&self, student: &str) -> f64 {
        self.theta.get(student).copied().unwrap_or(0.0)
    }

    pub fn beta_of(&self, item: &str) -> f64 {
        self.beta.get(item).copied().unwrap_or(0.0)
    }

    pub fn predict(&self, student: &str, item: &str) -> f64 {
        irt_predict(self.theta_of(student), self.beta_of(item))
    }

    /// Next-attempt predictions for a student absent from training.
    ///
    /// Before each attempt the proficiency is the MAP estimate given the
    /// student's earlier answers and the fitted difficulties.
    pub fn predict_sequence(&self, attempts: &[(&str, bool)]) -> Vec<f64> {
        let mut theta = 0.0;
        let mut seen: Vec<(f64, bool)> = Vec::with_capacity(attempts.len());
        let mut out = Vec::with_capacity(attempts.len());
        for &(item, correct) in attempts {
            let beta = self.beta_of(item);
            out.push(irt_predict(theta, beta));
            seen.push((beta, correct));
            for _ in 0..50 {
                let step = newton_step(theta, self.prior_variance, seen.iter().copied(), 1.0);
                theta -= step;
                if step.abs() < 1e-10 {
                    break;
                }
            }
        }
        out
    }

    /// Rows `kind,id,value` for every student and item.
    pub fn write<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "id", "value"])?;
        let mut theta: Vec<_> = self.theta.iter().collect();
        theta.sort_by(|a, b| a.0.cmp(b.0));
        for (id, v) in theta {
            w.write_record(["theta", id.as_str(), v.to_string().as_str()])?;
        }
        let mut beta: Vec<_> = self.beta.iter().collect();
        beta.sort_by(|a, b| a.0.cmp(b.0));
        for (id, v) in beta {
            w.write_record(["beta", id.as_str(), v.to_string().as_str()])?;
        }
        w.flush()
    }
}

/// Newton step for one ability-like parameter `x` whose logit is `sign * (x - other)`.
///
/// `obs` yields `(other, correct)`; returns the amount to subtract from `x`.
fn newton_step<I>(x: f64, prior_variance: f64, obs: I, sign: f64) -> f64
where
    I: Iterator<Item = (f64, bool)>,
{
    let mut grad = -x / prior_variance;
    let mut hess = -1.0 / prior_variance;
    for (other, correct) in obs {
        let p = sigmoid(sign * (x - other));
        // d/dx log-lik of a Bernoulli with logit sign*(x - other)
        grad += sign * (correct as u8 as f64 - p);
        hess -= p * (1.0 - p);
    }
    grad / hess
}

struct Indexed {
    students: Vec<String>,
    items: Vec<String>,
    by_student: Vec<Vec<(usize, bool)>>,
    by_item: Vec<Vec<(usize, bool)>>,
}

fn index(obs: &[IrtObservation<'_>]) -> Indexed {
    let mut sid: HashMap<&str, usize> = HashMap::new();
    let mut iid: HashMap<&str, usize> = HashMap::new();
    let mut students = Vec::new();
    let mut items = Vec::new();
    let mut by_student: Vec<Vec<(usize, bool)>> = Vec::new();
    let mut by_item: Vec<Vec<(usize, bool)>> = Vec::new();
    for o in obs {
        let s = *sid.entry(o.student).or_insert_with(|| {
            students.push(o.student.to_owned());
            by_student.push(Vec::new());
            students.len() - 1
        });
        let i = *iid.entry(o.item).or_insert_with(|| {
            items.push(o.item.to_owned());
            by_item.push(Vec::new());
            items.len() - 1
        });
        by_student[s].push((i, o.correct));
        by_item[i].push((s, o.correct));
    }
    Indexed {
        students,
        items,
        by_student,
        by_item,
    }
}

/// MAP estimates of all proficiencies and difficulties.
pub fn irt_fit(obs: &[IrtObservation<'_>], opts: IrtFitOptions) -> Result<IrtFit> {
    if obs.is_empty() {
        return Err(Error::EmptyDataset("no IRT observations".into()));
    }
    if opts.prior_variance.is_nan() || opts.prior_variance <= 0.0 {
        return Err(Error::config("IRT prior variance must be positive"));
    }
    let ix = index(obs);
    let mut theta = vec![0.0; ix.students.len()];
    let mut beta = vec![0.0; ix.items.len()];
    let var = opts.prior_variance;

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < opts.max_newton_steps {
        sweeps += 1;
        let mut max_update: f64 = 0.0;
        for (s, answers) in ix.by_student.iter().enumerate() {
            let step = newton_step(theta[s], var, answers.iter().map(|&(i, c)| (beta[i], c)), 1.0);
            let step = damped(theta[s], step);
            theta[s] -= step;
            max_update = max_update.max(step.abs());
        }
        for (i, answers) in ix.by_item.iter().enumerate() {
            let step = newton_step(beta[i], var, answers.iter().map(|&(s, c)| (theta[s], c)), -1.0);
            let step = damped(beta[i], step);
            beta[i] -= step;
            max_update = max_update.max(step.abs());
        }
        if max_update < opts.tol {
            converged = true;
            break;
        }
    }

    Ok(IrtFit {
        params: IrtParams {
            theta: ix.students.into_iter().zip(theta).collect(),
            beta: ix.items.into_iter().zip(beta).collect(),
            prior_variance: var,
        },
        sweeps,
        converged,
    })
}

fn damped(x: f64, mut step: f64) -> f64 {
    while !(x - step).is_finite() && step.abs() > f64::MIN_POSITIVE {
        step *= 0.5;
    }
    if (x - step).is_finite() {
        step
    } else {
        0.0
    }
}

/// Largest absolute partial derivative of the penalized log-likelihood.
pub fn irt_gradient_max_norm(obs: &[IrtObservation<'_>], params: &IrtParams) -> f64 {
    let var = params.prior_variance;
    let mut g_theta: HashMap<&str, f64> = params
        .theta
        .iter()
        .map(|(k, v)| (k.as_str(), -v / var))
        .collect();
    let mut g_beta: HashMap<&str, f64> = params
        .beta
        .iter()
        .map(|(k, v)| (k.as_str(), -v / var))
        .collect();
    for o in obs {
        let r = o.correct as u8 as f64 - params.predict(o.student, o.item);
        *g_theta.entry(o.student).or_default() += r;
        *g_beta.entry(o.item).or_default() -= r;
    }
    g_theta
        .values()
        .chain(g_beta.values())
        .fold(0.0f64, |m, g| m.max(g.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn logistic_values() {
        assert_eq!(irt_predict(0.3, 0.3), 0.5);
        assert!((irt_predict(1.0, 0.0) - 0.73106).abs() < 1e-5);
        assert!((irt_predict(-1.0, 0.0) - 0.26894).abs() < 1e-5);
        for (a, b) in [(0.2, -1.3), (2.0, 0.5), (-3.0, 4.0)] {
            assert!((irt_predict(a, b) + irt_predict(-a, -b) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn symmetric_data_gives_equal_ability_and_difficulty() {
        let obs = [
            IrtObservation { student: "s", item: "i", correct: true },
            IrtObservation { student: "s", item: "i", correct: false },
        ];
        let fit = irt_fit(&obs, IrtFitOptions::default()).unwrap();
        assert!(fit.converged);
        let d = fit.params.theta_of("s") - fit.params.beta_of("i");
        assert!(d.abs() < 1e-12);
    }

    #[test]
    fn converges_to_stationary_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let students: Vec<String> = (0..40).map(|i| format!("s{i}")).collect();
        let items: Vec<String> = (0..15).map(|i| format!("q{i}")).collect();
        let mut obs = Vec::new();
        for s in &students {
            for q in &items {
                if rng.gen_bool(0.6) {
                    obs.push(IrtObservation {
                        student: s,
                        item: q,
                        correct: rng.gen_bool(0.55),
                    });
                }
            }
        }
        let fit = irt_fit(&obs, IrtFitOptions::default()).unwrap();
        assert!(fit.converged);
        assert!(irt_gradient_max_norm(&obs, &fit.params) < 1e-4);
    }

    #[test]
    fn unseen_entities_use_prior_mean() {
        let obs = [IrtObservation { student: "s", item: "i", correct: true }];
        let fit = irt_fit(&obs, IrtFitOptions::default()).unwrap();
        assert_eq!(fit.params.predict("new", "other"), 0.5);
    }

    #[test]
    fn sequential_prediction_tracks_ability() {
        let params = IrtParams {
            theta: HashMap::new(),
            beta: HashMap::new(),
            prior_variance: 1.0,
        };
        let strong: Vec<(&str, bool)> = (0..10).map(|_| ("q", true)).collect();
        let p = params.predict_sequence(&strong);
        assert_eq!(p[0], 0.5);
        assert!(p.windows(2).all(|w| w[1] > w[0]));
    }
}
