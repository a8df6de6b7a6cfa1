//! Forward and backward passes of the recurrent cell.

use super::encoding::{EncodedStep, EncodedStudent, InputVector};
use super::matrix::{axpy, dot};
use super::params::{CellKind, RnnParams};
use crate::error::{Error, Result};
use crate::math::sigmoid;

/// Probabilities are clamped to `[LOSS_EPS, 1 - LOSS_EPS]` inside the log-loss.
pub const LOSS_EPS: f64 = 1e-7;

/// Recurrent state carried between steps and intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct State {
    pub h: Vec<f64>,
    /// Memory cell of the gated form; empty for the vanilla cell.
    pub c: Vec<f64>,
}

impl State {
    pub fn initial(p: &RnnParams) -> Self {
        State {
            h: p.h0.clone(),
            c: match p.cell {
                CellKind::Vanilla => Vec::new(),
                CellKind::Gated => vec![0.0; p.hidden()],
            },
        }
    }
}

/// Per-step values kept for back-propagation.
struct Trace {
    /// For the vanilla cell: `h`. For the gated cell: activated gates `[i, f, o, g]`.
    acts: Vec<f64>,
    h: Vec<f64>,
    c: Vec<f64>,
}

fn cell_forward(p: &RnnParams, x: &InputVector, prev: &State) -> (State, Vec<f64>) {
    let mut pre = p.b_h.clone();
    p.w_hx.add_columns(x.active(), &mut pre);
    p.w_hh.add_matvec(&prev.h, &mut pre);
    match p.cell {
        CellKind::Vanilla => {
            let h: Vec<f64> = pre.iter().map(|a| a.tanh()).collect();
            (State { h: h.clone(), c: Vec::new() }, h)
        }
        CellKind::Gated => {
            let n = p.hidden();
            let mut acts = pre;
            for (k, a) in acts.iter_mut().enumerate() {
                *a = if k < 3 * n { sigmoid(*a) } else { a.tanh() };
            }
            let (i, rest) = acts.split_at(n);
            let (f, rest) = rest.split_at(n);
            let (o, g) = rest.split_at(n);
            let c: Vec<f64> = (0..n).map(|k| f[k] * prev.c[k] + i[k] * g[k]).collect();
            let h: Vec<f64> = (0..n).map(|k| o[k] * c[k].tanh()).collect();
            (State { h, c }, acts)
        }
    }
}

/// One step: new state and the full readout `y` over all skills.
///
/// `dropout` multiplies the hidden state before the readout only.
pub fn rnn_step(
    p: &RnnParams,
    x: &InputVector,
    prev: &State,
    dropout: Option<&[f64]>,
) -> (State, Vec<f64>) {
    let (state, _) = cell_forward(p, x, prev);
    let hd: Vec<f64> = match dropout {
        Some(m) => state.h.iter().zip(m).map(|(h, m)| h * m).collect(),
        None => state.h.clone(),
    };
    let mut y = p.b_y.clone();
    p.w_yh.add_matvec(&hd, &mut y);
    y.iter_mut().for_each(|v| *v = sigmoid(*v));
    (state, y)
}

/// Binary cross-entropy of one prediction, with clamping.
pub fn bce(p: f64, correct: bool) -> f64 {
    let q = p.clamp(LOSS_EPS, 1.0 - LOSS_EPS);
    if correct {
        -q.ln()
    } else {
        -(1.0 - q).ln()
    }
}

/// Mean binary cross-entropy over `(prediction, outcome)` pairs.
pub fn loss(pairs: &[(f64, bool)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::UndefinedLoss);
    }
    Ok(pairs.iter().map(|&(p, a)| bce(p, a)).sum::<f64>() / pairs.len() as f64)
}

/// Predictions for every target of a student, in step order. The state is
/// carried across interval boundaries.
pub fn forward_student(p: &RnnParams, student: &EncodedStudent) -> Result<Vec<f64>> {
    let mut state = State::initial(p);
    let mut out = Vec::with_capacity(student.n_targets());
    let mut step_index = 0;
    for step in student.segments.iter().flatten() {
        if step.padding {
            continue;
        }
        state = cell_forward(p, &step.input, &state).0;
        if let Some(t) = step.target {
            let z = p.b_y[t.skill] + dot(p.w_yh.row(t.skill), &state.h);
            let y = sigmoid(z);
            if !y.is_finite() || state.h.iter().any(|v| !v.is_finite()) {
                return Err(Error::Numerical {
                    step: step_index,
                    what: "hidden activation".into(),
                });
            }
            out.push(y);
        }
        step_index += 1;
    }
    Ok(out)
}

/// How gradients flow across interval boundaries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truncation {
    /// Gradients stop at each interval's first step; the state is still carried.
    Interval,
    /// Full back-propagation through the whole student sequence.
    None,
}

/// Loss summed over a student's targets, each term weighted by `weight`,
/// with its gradient accumulated into `grad`.
///
/// `dropout` yields one mask per non-padding step when training.
pub(crate) fn accumulate_student(
    p: &RnnParams,
    student: &EncodedStudent,
    weight: f64,
    truncation: Truncation,
    mut dropout: Option<&mut dyn FnMut() -> Vec<f64>>,
    grad: &mut RnnParams,
) -> Result<(f64, usize)> {
    let n = p.hidden();
    let steps: Vec<(usize, &EncodedStep)> = student
        .segments
        .iter()
        .enumerate()
        .flat_map(|(z, seg)| seg.iter().map(move |s| (z, s)))
        .filter(|(_, s)| !s.padding)
        .collect();

    let mut traces: Vec<Trace> = Vec::with_capacity(steps.len());
    let mut masks: Vec<Option<Vec<f64>>> = Vec::with_capacity(steps.len());
    let mut dz: Vec<f64> = Vec::with_capacity(steps.len());
    let mut state = State::initial(p);
    let mut total = 0.0;
    let mut count = 0;
    for (t, (_, step)) in steps.iter().enumerate() {
        let (next, acts) = cell_forward(p, &step.input, &state);
        state = next;
        if state.h.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical {
                step: t,
                what: "hidden activation".into(),
            });
        }
        let mask = dropout.as_mut().map(|f| f());
        let mut d = 0.0;
        if let Some(target) = step.target {
            let row = p.w_yh.row(target.skill);
            let z = p.b_y[target.skill]
                + match &mask {
                    Some(m) => state.h.iter().zip(m).zip(row).map(|((h, m), w)| h * m * w).sum(),
                    None => dot(row, &state.h),
                };
            let y = sigmoid(z);
            total += bce(y, target.correct) * weight;
            count += 1;
            // clamped region is flat
            if (LOSS_EPS..=1.0 - LOSS_EPS).contains(&y) {
                d = (y - target.correct as u8 as f64) * weight;
            }
        }
        dz.push(d);
        masks.push(mask);
        traces.push(Trace {
            acts,
            h: state.h.clone(),
            c: state.c.clone(),
        });
    }

    let init = State::initial(p);
    let mut dh_next = vec![0.0; n];
    let mut dc_next = vec![0.0; n];
    let mut dh = vec![0.0; n];
    let mut dpre = vec![0.0; p.cell.blocks() * n];
    for t in (0..steps.len()).rev() {
        let (z, step) = steps[t];
        let tr = &traces[t];
        dh.copy_from_slice(&dh_next);
        if dz[t] != 0.0 {
            let target = step.target.expect("gradient only on targets");
            let hd: Vec<f64> = match &masks[t] {
                Some(m) => tr.h.iter().zip(m).map(|(h, m)| h * m).collect(),
                None => tr.h.clone(),
            };
            axpy(dz[t], &hd, grad.w_yh.row_mut(target.skill));
            grad.b_y[target.skill] += dz[t];
            let row = p.w_yh.row(target.skill);
            match &masks[t] {
                Some(m) => {
                    for k in 0..n {
                        dh[k] += dz[t] * row[k] * m[k];
                    }
                }
                None => axpy(dz[t], row, &mut dh),
            }
        }

        let (h_prev, c_prev) = if t == 0 {
            (&init.h, &init.c)
        } else {
            (&traces[t - 1].h, &traces[t - 1].c)
        };
        match p.cell {
            CellKind::Vanilla => {
                for k in 0..n {
                    dpre[k] = dh[k] * (1.0 - tr.h[k] * tr.h[k]);
                }
            }
            CellKind::Gated => {
                let (i, rest) = tr.acts.split_at(n);
                let (f, rest) = rest.split_at(n);
                let (o, g) = rest.split_at(n);
                for k in 0..n {
                    let tc = tr.c[k].tanh();
                    let dc = dh[k] * o[k] * (1.0 - tc * tc) + dc_next[k];
                    dpre[k] = dc * g[k] * i[k] * (1.0 - i[k]);
                    dpre[n + k] = dc * c_prev[k] * f[k] * (1.0 - f[k]);
                    dpre[2 * n + k] = dh[k] * tc * o[k] * (1.0 - o[k]);
                    dpre[3 * n + k] = dc * i[k] * (1.0 - g[k] * g[k]);
                    dc_next[k] = dc * f[k];
                }
            }
        }
        grad.w_hx.add_to_columns(step.input.active(), &dpre);
        grad.w_hh.add_outer(&dpre, h_prev);
        axpy(1.0, &dpre, &mut grad.b_h);

        dh_next.iter_mut().for_each(|v| *v = 0.0);
        p.w_hh.add_matvec_t(&dpre, &mut dh_next);

        let boundary = t == 0 || steps[t - 1].0 != z;
        if t == 0 {
            axpy(1.0, &dh_next, &mut grad.h0);
        }
        if boundary && truncation == Truncation::Interval {
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            dc_next.iter_mut().for_each(|v| *v = 0.0);
        }
    }
    Ok((total, count))
}

/// Mean loss over all targets of `students` and its exact gradient
/// (no dropout).
pub fn loss_and_gradient(
    p: &RnnParams,
    students: &[EncodedStudent],
    truncation: Truncation,
) -> Result<(f64, RnnParams)> {
    let n_targets: usize = students.iter().map(|s| s.n_targets()).sum();
    if n_targets == 0 {
        return Err(Error::UndefinedLoss);
    }
    let w = 1.0 / n_targets as f64;
    let mut grad = p.zeros_like();
    let mut total = 0.0;
    for s in students {
        total += accumulate_student(p, s, w, truncation, None, &mut grad)?.0;
    }
    Ok((total, grad))
}
