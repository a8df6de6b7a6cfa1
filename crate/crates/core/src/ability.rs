//! Learning-ability profiles: per-skill balance of successes over failures.
//!
//! Entry `j` of the profile after interval `z` is
//! `(correct_j - incorrect_j) / attempts_j` counted over intervals `1..=z`,
//! and 0 for a skill not yet attempted.

use std::io::Write;

use crate::dataset::SkillId;
use crate::segmentation::Segment;

/// How per-interval counts are normalized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ProfileNormalization {
    /// Counts accumulated over intervals `1..=z`, divided by the cumulative total.
    #[default]
    Cumulative,
    /// Sum over intervals of that interval's balance divided by the cumulative
    /// attempt count up to the interval. Not bounded by 1.
    PerInterval,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbilityProfile {
    pub student: String,
    /// Last interval included.
    pub upto: usize,
    pub values: Vec<f64>,
}

/// `(correct - incorrect) / (correct + incorrect)`, or 0 without attempts.
pub fn skill_balance(correct: usize, incorrect: usize) -> f64 {
    let total = correct + incorrect;
    if total == 0 {
        0.0
    } else {
        (correct as f64 - incorrect as f64) / total as f64
    }
}

/// Profile over intervals `1..=upto` of `segments`.
pub fn build_profile(
    segments: &[Segment<'_>],
    upto: usize,
    n_skills: usize,
    norm: ProfileNormalization,
) -> AbilityProfile {
    assert!(upto >= 1 && upto <= segments.len(), "interval {upto} out of range");
    let values = profiles_by_interval(&segments[..upto], n_skills, norm)
        .pop()
        .expect("at least one interval");
    AbilityProfile {
        student: segments[0].student.to_owned(),
        upto,
        values,
    }
}

/// Profiles after each interval: element `z - 1` covers intervals `1..=z`.
pub fn profiles_by_interval(
    segments: &[Segment<'_>],
    n_skills: usize,
    norm: ProfileNormalization,
) -> Vec<Vec<f64>> {
    let mut correct = vec![0usize; n_skills];
    let mut incorrect = vec![0usize; n_skills];
    let mut running = vec![0.0f64; n_skills];
    let mut out = Vec::with_capacity(segments.len());
    for seg in segments {
        let mut c_z = vec![0usize; n_skills];
        let mut w_z = vec![0usize; n_skills];
        for r in seg.records() {
            let j: SkillId = r.skill;
            if r.correct {
                c_z[j] += 1;
            } else {
                w_z[j] += 1;
            }
        }
        for j in 0..n_skills {
            correct[j] += c_z[j];
            incorrect[j] += w_z[j];
        }
        match norm {
            ProfileNormalization::Cumulative => {
                out.push(
                    (0..n_skills)
                        .map(|j| skill_balance(correct[j], incorrect[j]))
                        .collect(),
                );
            }
            ProfileNormalization::PerInterval => {
                for j in 0..n_skills {
                    let n = correct[j] + incorrect[j];
                    if n > 0 {
                        running[j] += (c_z[j] as f64 - w_z[j] as f64) / n as f64;
                    }
                }
                out.push(running.clone());
            }
        }
    }
    out
}

/// Writes `student,z,v0..v{n-1}` rows.
pub fn write_profiles<W: Write>(out: W, profiles: &[AbilityProfile]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = profiles.first().map_or(0, |p| p.values.len());
    let mut header = vec!["student".to_owned(), "z".to_owned()];
    header.extend((0..n).map(|j| format!("v{j}")));
    w.write_record(&header)?;
    for p in profiles {
        let mut row = vec![p.student.clone(), p.upto.to_string()];
        row.extend(p.values.iter().map(|v| v.to_string()));
        w.write_record(&row)?;
    }
    w.flush()
}
