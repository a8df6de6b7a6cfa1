//! Input encodings: one-hot `(skill, correct)` pairs, optionally with a
//! one-hot group block appended.

use crate::dataset::SkillId;
use crate::error::{Error, Result};

/// A sparse 0/1 input vector with at most two active coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputVector {
    dim: usize,
    active: [usize; 2],
    n_active: usize,
}

impl InputVector {
    /// All-zero vector, used for padding steps.
    pub fn empty(dim: usize) -> Self {
        InputVector {
            dim,
            active: [0; 2],
            n_active: 0,
        }
    }

    /// Unit vector at `index`.
    pub fn one_hot(dim: usize, index: usize) -> Self {
        assert!(index < dim, "one-hot index {index} outside {dim}");
        InputVector {
            dim,
            active: [index, 0],
            n_active: 1,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn active(&self) -> &[usize] {
        &self.active[..self.n_active]
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for &i in self.active() {
            v[i] = 1.0;
        }
        v
    }
}

/// Width of the plain encoding for `n_skills`.
pub fn dkt_input_dim(n_skills: usize) -> usize {
    2 * n_skills
}

/// Width of the group-conditioned encoding.
pub fn dktdsc_input_dim(n_skills: usize, n_groups: usize) -> usize {
    2 * n_skills + n_groups
}

/// One-hot at `skill + correct * n_skills`.
pub fn encode_dkt(skill: SkillId, correct: bool, n_skills: usize) -> Result<InputVector> {
    if skill >= n_skills {
        return Err(Error::Encoding(format!(
            "skill {skill} outside vocabulary of {n_skills}"
        )));
    }
    Ok(InputVector {
        dim: dkt_input_dim(n_skills),
        active: [skill + correct as usize * n_skills, 0],
        n_active: 1,
    })
}

/// The plain encoding followed by a one-hot block for the 1-based `group`.
pub fn encode_dktdsc(
    skill: SkillId,
    correct: bool,
    group: usize,
    n_skills: usize,
    n_groups: usize,
) -> Result<InputVector> {
    if group == 0 || group > n_groups {
        return Err(Error::Encoding(format!(
            "group {group} outside 1..={n_groups}"
        )));
    }
    let base = encode_dkt(skill, correct, n_skills)?;
    Ok(InputVector {
        dim: dktdsc_input_dim(n_skills, n_groups),
        active: [base.active[0], 2 * n_skills + group - 1],
        n_active: 2,
    })
}

/// The answer a step is trained to predict.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Target {
    pub skill: SkillId,
    pub correct: bool,
}

/// One position of an encoded interval.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedStep {
    pub input: InputVector,
    /// The student's next attempt, if there is one.
    pub target: Option<Target>,
    /// Padding slot: skipped entirely by the network.
    pub padding: bool,
}

impl EncodedStep {
    /// Whether this step contributes to the loss.
    pub fn mask(&self) -> bool {
        !self.padding && self.target.is_some()
    }
}

/// A student's intervals, ready for the network.
#[derive(Clone, Debug, PartialEq)]
pub struct EncodedStudent {
    pub student: String,
    pub segments: Vec<Vec<EncodedStep>>,
}

impl EncodedStudent {
    pub fn n_targets(&self) -> usize {
        self.segments.iter().flatten().filter(|s| s.mask()).count()
    }
}
