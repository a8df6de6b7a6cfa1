//! Recurrent knowledge tracing: plain and group-conditioned inputs, a
//! vanilla or gated cell, interval-wise training with state carried across
//! intervals, and prediction.

pub mod encoding;
pub mod gradcheck;
pub mod matrix;
pub mod network;
pub mod params;
pub mod persist;
pub mod train;

pub use encoding::{
    dkt_input_dim, dktdsc_input_dim, encode_dkt, encode_dktdsc, EncodedStep, EncodedStudent,
    InputVector, Target,
};
pub use gradcheck::{gradient_check, random_instance, GradCheck};
pub use network::{forward_student, loss, loss_and_gradient, rnn_step, State, Truncation};
pub use params::{CellKind, RnnParams};
pub use persist::{read_params, write_params};
pub use train::{mean_loss, train, TrainConfig, TrainOutcome};

use crate::error::{Error, Result};
use crate::segmentation::Segment;

/// Group conditioning for one student: a label per interval and the size
/// of the label space.
#[derive(Clone, Copy, Debug)]
pub struct GroupLabels<'a> {
    pub labels: &'a [usize],
    pub n_groups: usize,
}

/// Encodes a student's intervals. Every attempt but the last is trained to
/// predict the attempt after it, including across interval boundaries.
pub fn encode_student(
    segments: &[Segment<'_>],
    n_skills: usize,
    groups: Option<GroupLabels<'_>>,
) -> Result<EncodedStudent> {
    if let Some(g) = groups {
        if g.labels.len() != segments.len() {
            return Err(Error::Encoding(format!(
                "{} group labels for {} intervals",
                g.labels.len(),
                segments.len()
            )));
        }
    }
    let input_dim = match groups {
        Some(g) => dktdsc_input_dim(n_skills, g.n_groups),
        None => dkt_input_dim(n_skills),
    };
    let records: Vec<_> = segments.iter().flat_map(|s| s.records()).collect();
    let mut next = 1;
    let mut out = Vec::with_capacity(segments.len());
    for (z, seg) in segments.iter().enumerate() {
        let mut steps = Vec::with_capacity(seg.slots.len());
        for slot in &seg.slots {
            match slot.record() {
                Some(r) => {
                    let input = match groups {
                        Some(g) => encode_dktdsc(r.skill, r.correct, g.labels[z], n_skills, g.n_groups)?,
                        None => encode_dkt(r.skill, r.correct, n_skills)?,
                    };
                    let target = records.get(next).map(|t| Target {
                        skill: t.skill,
                        correct: t.correct,
                    });
                    next += 1;
                    steps.push(EncodedStep {
                        input,
                        target,
                        padding: false,
                    });
                }
                None => steps.push(EncodedStep {
                    input: InputVector::empty(input_dim),
                    target: None,
                    padding: true,
                }),
            }
        }
        out.push(steps);
    }
    Ok(EncodedStudent {
        student: segments.first().map_or(String::new(), |s| s.student.to_owned()),
        segments: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{InteractionRecord, StudentSequence};
    use crate::segmentation::segment_sequence;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_seq(n: usize, n_skills: usize, seed: u64) -> StudentSequence {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        StudentSequence {
            student: "s".into(),
            records: (0..n)
                .map(|i| InteractionRecord {
                    student: "s".into(),
                    skill: rng.gen_range(0..n_skills),
                    item: None,
                    correct: rng.gen_bool(0.6),
                    order: i as u64,
                })
                .collect(),
        }
    }

    #[test]
    fn targets_cross_interval_boundaries() {
        let seq = random_seq(7, 3, 1);
        let segs = segment_sequence(&seq, 3).unwrap();
        let enc = encode_student(&segs, 3, None).unwrap();
        assert_eq!(enc.n_targets(), 6);
        let t = enc.segments[0][2].target.unwrap();
        assert_eq!(t.skill, seq.records[3].skill);
        assert!(enc.segments[2][1].padding);
        assert!(enc.segments[2][0].target.is_none());
    }

    #[test]
    fn single_attempt_has_no_prediction() {
        let seq = random_seq(1, 3, 2);
        let segs = segment_sequence(&seq, 5).unwrap();
        let enc = encode_student(&segs, 3, None).unwrap();
        let p = RnnParams::init(CellKind::Vanilla, 6, 4, 3, 0);
        assert!(forward_student(&p, &enc).unwrap().is_empty());
    }

    #[test]
    fn segmentation_does_not_change_predictions() {
        let seq = random_seq(10, 4, 3);
        let p = RnnParams::init(CellKind::Vanilla, 8, 6, 4, 5);
        let whole = segment_sequence(&seq, 10).unwrap();
        let split = segment_sequence(&seq, 5).unwrap();
        let a = forward_student(&p, &encode_student(&whole, 4, None).unwrap()).unwrap();
        let b = forward_student(&p, &encode_student(&split, 4, None).unwrap()).unwrap();
        assert_eq!(a.len(), 9);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn predictions_are_causal() {
        let seq = random_seq(8, 3, 4);
        let p = RnnParams::init(CellKind::Gated, 6, 5, 3, 1);
        let segs = segment_sequence(&seq, 4).unwrap();
        let base = forward_student(&p, &encode_student(&segs, 3, None).unwrap()).unwrap();
        let mut changed = seq.clone();
        changed.records[6].correct = !changed.records[6].correct;
        changed.records[7].skill = (changed.records[7].skill + 1) % 3;
        let segs2 = segment_sequence(&changed, 4).unwrap();
        let other = forward_student(&p, &encode_student(&segs2, 3, None).unwrap()).unwrap();
        // prediction k reads outputs after attempts 0..=k and targets attempt k+1
        assert_eq!(&base[..5], &other[..5]);
    }

    #[test]
    fn carried_state_reaches_next_interval() {
        let seq = random_seq(8, 3, 6);
        let p = RnnParams::init(CellKind::Vanilla, 6, 5, 3, 2);
        let segs = segment_sequence(&seq, 4).unwrap();
        let base = forward_student(&p, &encode_student(&segs, 3, None).unwrap()).unwrap();
        let mut changed = seq.clone();
        changed.records[1].correct = !changed.records[1].correct;
        let segs2 = segment_sequence(&changed, 4).unwrap();
        let other = forward_student(&p, &encode_student(&segs2, 3, None).unwrap()).unwrap();
        assert_ne!(base[4], other[4]);
    }

    #[test]
    fn mismatched_labels_rejected() {
        let seq = random_seq(8, 3, 6);
        let segs = segment_sequence(&seq, 4).unwrap();
        let g = GroupLabels {
            labels: &[1],
            n_groups: 3,
        };
        assert!(encode_student(&segs, 3, Some(g)).is_err());
    }

    #[test]
    fn padding_inputs_carry_no_gradient() {
        let seq = random_seq(7, 3, 8);
        let segs = segment_sequence(&seq, 4).unwrap();
        let enc = encode_student(&segs, 3, None).unwrap();
        let p = RnnParams::init(CellKind::Gated, 6, 4, 3, 3);
        let (_, g1) = loss_and_gradient(&p, std::slice::from_ref(&enc), Truncation::Interval).unwrap();
        let mut noisy = enc.clone();
        for step in noisy.segments.iter_mut().flatten().filter(|s| s.padding) {
            step.input = InputVector::one_hot(6, 5);
        }
        let (_, g2) = loss_and_gradient(&p, std::slice::from_ref(&noisy), Truncation::Interval).unwrap();
        assert_eq!(g1, g2);
    }

    #[test]
    fn zeroed_group_columns_reduce_to_plain_inputs() {
        let seq = random_seq(9, 3, 10);
        let segs = segment_sequence(&seq, 4).unwrap();
        let labels = [1, 3, 2];
        let plain = encode_student(&segs, 3, None).unwrap();
        let grouped = encode_student(
            &segs,
            3,
            Some(GroupLabels {
                labels: &labels,
                n_groups: 4,
            }),
        )
        .unwrap();
        let small = RnnParams::init(CellKind::Vanilla, 6, 5, 3, 4);
        let mut wide = RnnParams::zeros(CellKind::Vanilla, 10, 5, 3);
        for r in 0..5 {
            for c in 0..6 {
                wide.w_hx.set(r, c, small.w_hx.get(r, c));
            }
        }
        wide.w_hh = small.w_hh.clone();
        wide.w_yh = small.w_yh.clone();
        wide.b_h = small.b_h.clone();
        wide.b_y = small.b_y.clone();
        let a = forward_student(&small, &plain).unwrap();
        let b = forward_student(&wide, &grouped).unwrap();
        assert_eq!(a, b);
    }
}
