use log::debug;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::encoding::EncodedStudent;
use super::network::{accumulate_student, bce, forward_student, Truncation};
use super::params::{CellKind, RnnParams};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub hidden: usize,
    /// Students per mini-batch.
    pub batch_size: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    /// Probability of zeroing a hidden unit before the readout.
    pub dropout: f64,
    pub seed: u64,
    pub cell: CellKind,
    /// Gradients with a larger norm are rescaled to `clip_norm`.
    pub clip_threshold: f64,
    pub clip_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            hidden: 200,
            batch_size: 32,
            learning_rate: 0.01,
            epochs: 100,
            dropout: 0.5,
            seed: 0,
            cell: CellKind::Gated,
            clip_threshold: 100.0,
            clip_norm: 5.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.hidden == 0 || self.batch_size == 0 {
            return Err(Error::config("hidden size and batch size must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::config(format!("dropout {} not in [0, 1)", self.dropout)));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::config("learning rate must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: RnnParams,
    /// Mean training loss (without dropout) before training and after each epoch.
    pub loss_trace: Vec<f64>,
    pub clipped_batches: usize,
}

/// Mean log-loss over all targets, no dropout.
pub fn mean_loss(p: &RnnParams, students: &[EncodedStudent]) -> Result<f64> {
    let mut total = 0.0;
    let mut n = 0usize;
    for s in students {
        let preds = forward_student(p, s)?;
        let targets = s.segments.iter().flatten().filter(|st| st.mask());
        for (y, st) in preds.iter().zip(targets) {
            total += bce(*y, st.target.expect("masked step has a target").correct);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::UndefinedLoss);
    }
    Ok(total / n as f64)
}

/// Mini-batch gradient descent over students.
///
/// Each epoch visits students in a freshly shuffled order. A batch's
/// gradient is the per-step log-loss summed over each student's sequence and
/// averaged over the students in the batch. Gradients are truncated at
/// interval boundaries while the hidden state is carried forward.
pub fn train(students: &[EncodedStudent], n_skills: usize, cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let input_dim = students
        .iter()
        .flat_map(|s| s.segments.iter().flatten())
        .map(|st| st.input.dim())
        .next()
        .ok_or_else(|| Error::EmptyDataset("no training sequences".into()))?;
    let mut params = RnnParams::init(cfg.cell, input_dim, cfg.hidden, n_skills, cfg.seed);
    let mut trace = vec![mean_loss(&params, students)?];
    let mut order: Vec<usize> = (0..students.len()).collect();
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed_0f0d);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xd509_0a7e);
    let keep = 1.0 - cfg.dropout;
    let hidden = cfg.hidden;
    let mut clipped = 0;

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut shuffle_rng);
        for batch in order.chunks(cfg.batch_size) {
            let mut grad = params.zeros_like();
            let weight = 1.0 / batch.len() as f64;
            for &i in batch {
                if cfg.dropout > 0.0 {
                    let mut mask = || -> Vec<f64> {
                        (0..hidden)
                            .map(|_| if dropout_rng.gen_bool(keep) { 1.0 / keep } else { 0.0 })
                            .collect()
                    };
                    accumulate_student(&params, &students[i], weight, Truncation::Interval, Some(&mut mask), &mut grad)?;
                } else {
                    accumulate_student(&params, &students[i], weight, Truncation::Interval, None, &mut grad)?;
                }
            }
            let norm = grad.norm();
            if !norm.is_finite() {
                return Err(Error::Numerical {
                    step: epoch,
                    what: "gradient norm".into(),
                });
            }
            if norm > cfg.clip_threshold {
                debug!("epoch {epoch}: gradient norm {norm:.3} clipped to {}", cfg.clip_norm);
                grad.scale(cfg.clip_norm / norm);
                clipped += 1;
            }
            params.add_scaled(-cfg.learning_rate, &grad);
        }
        let l = mean_loss(&params, students)?;
        debug!("epoch {}: training loss {l:.5}", epoch + 1);
        trace.push(l);
    }
    Ok(TrainOutcome {
        params,
        loss_trace: trace,
        clipped_batches: clipped,
    })
}
