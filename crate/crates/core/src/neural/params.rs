use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::matrix::Matrix;
use crate::error::{Error, Result};

/// Recurrent cell form.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum CellKind {
    /// `h = tanh(W_hx x + W_hh h + b_h)`.
    #[default]
    Vanilla,
    /// LSTM cell; gate blocks are stacked in the order input, forget, output, candidate.
    Gated,
}

impl CellKind {
    /// Number of stacked pre-activation blocks.
    pub fn blocks(self) -> usize {
        match self {
            CellKind::Vanilla => 1,
            CellKind::Gated => 4,
        }
    }

    pub(crate) fn code(self) -> u32 {
        match self {
            CellKind::Vanilla => 0,
            CellKind::Gated => 1,
        }
    }

    pub(crate) fn from_code(code: u32) -> Result<Self> {
        match code {
            0 => Ok(CellKind::Vanilla),
            1 => Ok(CellKind::Gated),
            other => Err(Error::Format(format!("unknown cell kind {other}"))),
        }
    }
}

impl FromStr for CellKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vanilla" => Ok(CellKind::Vanilla),
            "gated" | "lstm" => Ok(CellKind::Gated),
            other => Err(Error::config(format!(
                "unknown cell `{other}` (expected vanilla or gated)"
            ))),
        }
    }
}

impl fmt::Display for CellKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellKind::Vanilla => "vanilla",
            CellKind::Gated => "gated",
        })
    }
}

/// Weights of the one-layer recurrent network.
#[derive(Clone, Debug, PartialEq)]
pub struct RnnParams {
    pub cell: CellKind,
    /// `blocks * hidden` x `input_dim`
    pub w_hx: Matrix,
    /// `blocks * hidden` x `hidden`
    pub w_hh: Matrix,
    /// `n_skills` x `hidden`
    pub w_yh: Matrix,
    pub b_h: Vec<f64>,
    pub b_y: Vec<f64>,
    pub h0: Vec<f64>,
    /// Seed the weights were initialized from.
    pub seed: u64,
}

pub const INIT_RANGE: f64 = 0.05;

impl RnnParams {
    pub fn zeros(cell: CellKind, input_dim: usize, hidden: usize, n_skills: usize) -> Self {
        let g = cell.blocks() * hidden;
        RnnParams {
            cell,
            w_hx: Matrix::zeros(g, input_dim),
            w_hh: Matrix::zeros(g, hidden),
            w_yh: Matrix::zeros(n_skills, hidden),
            b_h: vec![0.0; g],
            b_y: vec![0.0; n_skills],
            h0: vec![0.0; hidden],
            seed: 0,
        }
    }

    /// Weights uniform in `[-INIT_RANGE, INIT_RANGE]`; biases and initial state zero.
    pub fn init(cell: CellKind, input_dim: usize, hidden: usize, n_skills: usize, seed: u64) -> Self {
        let mut p = RnnParams::zeros(cell, input_dim, hidden, n_skills);
        p.seed = seed;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in [&mut p.w_hx, &mut p.w_hh, &mut p.w_yh] {
            for v in m.as_mut_slice() {
                *v = rng.gen_range(-INIT_RANGE..=INIT_RANGE);
            }
        }
        p
    }

    pub fn hidden(&self) -> usize {
        self.h0.len()
    }

    pub fn input_dim(&self) -> usize {
        self.w_hx.cols()
    }

    pub fn n_skills(&self) -> usize {
        self.b_y.len()
    }

    /// All parameter tensors in declaration order.
    pub fn tensors(&self) -> [&[f64]; 6] {
        [
            self.w_hx.as_slice(),
            self.w_hh.as_slice(),
            self.w_yh.as_slice(),
            &self.b_h,
            &self.b_y,
            &self.h0,
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 6] {
        [
            self.w_hx.as_mut_slice(),
            self.w_hh.as_mut_slice(),
            self.w_yh.as_mut_slice(),
            &mut self.b_h,
            &mut self.b_y,
            &mut self.h0,
        ]
    }

    pub const TENSOR_NAMES: [&'static str; 6] = ["W_hx", "W_hh", "W_yh", "b_h", "b_y", "h_0"];

    pub fn zeros_like(&self) -> Self {
        RnnParams {
            seed: self.seed,
            ..RnnParams::zeros(self.cell, self.input_dim(), self.hidden(), self.n_skills())
        }
    }

    pub fn norm(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.iter())
            .map(|v| v * v)
            .sum::<f64>()
            .sqrt()
    }

    pub fn scale(&mut self, a: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= a);
        }
    }

    /// `self += a * other`
    pub fn add_scaled(&mut self, a: f64, other: &RnnParams) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += a * s;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}
