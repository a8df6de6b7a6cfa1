//! Analytic gradients against central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::encoding::{encode_dkt, EncodedStep, EncodedStudent, InputVector, Target};
use super::network::{loss_and_gradient, Truncation};
use super::params::{CellKind, RnnParams};
use crate::error::Result;

pub const FD_STEP: f64 = 1e-5;

/// Denominator floor of the relative error, so that near-zero gradients
/// are compared absolutely.
pub const REL_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    /// Tensor name and flat index of the worst coordinate.
    pub worst: (&'static str, usize),
    pub n_checked: usize,
}

/// Compares every coordinate of the analytic gradient of the mean log-loss
/// with a central difference of step [`FD_STEP`].
pub fn gradient_check(
    params: &RnnParams,
    students: &[EncodedStudent],
    truncation: Truncation,
) -> Result<GradCheck> {
    let (_, analytic) = loss_and_gradient(params, students, truncation)?;
    let loss_at = |p: &RnnParams| -> Result<f64> {
        Ok(loss_and_gradient(p, students, truncation)?.0)
    };
    let mut probe = params.clone();
    let mut report = GradCheck {
        max_rel_error: 0.0,
        worst: ("", 0),
        n_checked: 0,
    };
    for (ti, name) in RnnParams::TENSOR_NAMES.iter().enumerate() {
        let len = params.tensors()[ti].len();
        for k in 0..len {
            let orig = params.tensors()[ti][k];
            probe.tensors_mut()[ti][k] = orig + FD_STEP;
            let up = loss_at(&probe)?;
            probe.tensors_mut()[ti][k] = orig - FD_STEP;
            let down = loss_at(&probe)?;
            probe.tensors_mut()[ti][k] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let a = analytic.tensors()[ti][k];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
            if rel > report.max_rel_error {
                report.max_rel_error = rel;
                report.worst = (name, k);
            }
            report.n_checked += 1;
        }
    }
    Ok(report)
}

/// A random small network and a few short random sequences, each split into
/// intervals of `interval_len`.
pub fn random_instance(
    cell: CellKind,
    n_skills: usize,
    hidden: usize,
    seq_len: usize,
    interval_len: usize,
    seed: u64,
) -> (RnnParams, Vec<EncodedStudent>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let input_dim = 2 * n_skills;
    let mut p = RnnParams::zeros(cell, input_dim, hidden, n_skills);
    for t in p.tensors_mut() {
        for v in t.iter_mut() {
            *v = rng.gen_range(-0.8..0.8);
        }
    }
    let students = (0..3)
        .map(|s| {
            let attempts: Vec<(usize, bool)> = (0..seq_len)
                .map(|_| (rng.gen_range(0..n_skills), rng.gen_bool(0.5)))
                .collect();
            let steps: Vec<EncodedStep> = attempts
                .iter()
                .enumerate()
                .map(|(i, &(skill, correct))| EncodedStep {
                    input: encode_dkt(skill, correct, n_skills).expect("skill in range"),
                    target: attempts.get(i + 1).map(|&(skill, correct)| Target { skill, correct }),
                    padding: false,
                })
                .collect();
            let mut segments: Vec<Vec<EncodedStep>> =
                steps.chunks(interval_len).map(|c| c.to_vec()).collect();
            if let Some(last) = segments.last_mut() {
                while last.len() < interval_len {
                    last.push(EncodedStep {
                        input: InputVector::empty(input_dim),
                        target: None,
                        padding: true,
                    });
                }
            }
            EncodedStudent {
                student: format!("g{s}"),
                segments,
            }
        })
        .collect();
    (p, students)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vanilla_full_and_truncated() {
        for seed in 0..3 {
            let (p, s) = random_instance(CellKind::Vanilla, 3, 5, 6, 6, seed);
            let r = gradient_check(&p, &s, Truncation::None).unwrap();
            assert!(r.max_rel_error < 1e-4, "{r:?}");
        }
        // with several intervals the truncated gradient is not the loss
        // gradient, but the full one still is
        let (p, s) = random_instance(CellKind::Vanilla, 3, 5, 6, 2, 9);
        let r = gradient_check(&p, &s, Truncation::None).unwrap();
        assert!(r.max_rel_error < 1e-4, "{r:?}");
    }

    #[test]
    fn gated_full() {
        for seed in 0..3 {
            let (p, s) = random_instance(CellKind::Gated, 4, 6, 6, 4, seed);
            let r = gradient_check(&p, &s, Truncation::None).unwrap();
            assert!(r.max_rel_error < 1e-4, "{r:?}");
        }
    }
}
