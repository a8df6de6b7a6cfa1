//! Fixed-length time intervals over a student's attempt sequence.
//!
//! An interval counts attempts, not seconds. The final interval of a student
//! is padded with [`Slot::Padding`] up to the interval length; no interval
//! consisting only of padding is ever emitted.

use crate::dataset::{InteractionRecord, StudentSequence};
use crate::error::{Error, Result};

/// Numeric marker used for padding when intervals are exported.
pub const SENTINEL: i64 = -1;

/// Attempts per interval used unless configured otherwise.
pub const DEFAULT_INTERVAL_LEN: usize = 20;

/// Interval lengths compared by the interval sweep.
pub const INTERVAL_SWEEP: [usize; 4] = [20, 30, 50, 100];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot<'a> {
    Attempt(&'a InteractionRecord),
    Padding,
}

impl<'a> Slot<'a> {
    pub fn record(&self) -> Option<&'a InteractionRecord> {
        match *self {
            Slot::Attempt(r) => Some(r),
            Slot::Padding => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment<'a> {
    pub student: &'a str,
    /// 1-based interval index `z`.
    pub index: usize,
    pub slots: Vec<Slot<'a>>,
}

impl<'a> Segment<'a> {
    pub fn records(&self) -> impl Iterator<Item = &'a InteractionRecord> + '_ {
        self.slots.iter().filter_map(Slot::record)
    }

    pub fn n_filled(&self) -> usize {
        self.slots.iter().filter(|s| s.record().is_some()).count()
    }

    pub fn n_padding(&self) -> usize {
        self.slots.len() - self.n_filled()
    }
}

pub fn segment_sequence(seq: &StudentSequence, interval_len: usize) -> Result<Vec<Segment<'_>>> {
    if interval_len == 0 {
        return Err(Error::config("interval length must be at least 1"));
    }
    Ok(seq
        .records
        .chunks(interval_len)
        .enumerate()
        .map(|(i, chunk)| {
            let mut slots: Vec<Slot<'_>> = chunk.iter().map(Slot::Attempt).collect();
            slots.resize(interval_len, Slot::Padding);
            Segment {
                student: &seq.student,
                index: i + 1,
                slots,
            }
        })
        .collect())
}

/// Number of intervals a sequence of `len` attempts occupies.
pub fn n_segments(len: usize, interval_len: usize) -> usize {
    len.div_ceil(interval_len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn seq(n: usize) -> StudentSequence {
        StudentSequence {
            student: "s".into(),
            records: (0..n)
                .map(|i| InteractionRecord {
                    student: "s".into(),
                    skill: i % 3,
                    item: Some(format!("i{i}")),
                    correct: i % 2 == 0,
                    order: i as u64,
                })
                .collect(),
        }
    }

    #[test]
    fn twenty_four_attempts_in_sixes() {
        let s = seq(24);
        let segs = segment_sequence(&s, 6).unwrap();
        assert_eq!(segs.len(), 4);
        assert!(segs.iter().all(|g| g.n_padding() == 0));
        assert_eq!(
            segs.iter().map(|g| g.index).collect::<Vec<_>>(),
            [1, 2, 3, 4]
        );
    }

    #[test]
    fn fourteen_attempts_in_sixes() {
        let s = seq(14);
        let segs = segment_sequence(&s, 6).unwrap();
        assert_eq!(segs.len(), 3);
        assert_eq!(segs[2].n_filled(), 2);
        assert_eq!(segs[2].n_padding(), 4);
        assert_eq!(segs[2].slots[2], Slot::Padding);
    }

    #[test]
    fn exact_fit() {
        let s = seq(6);
        let segs = segment_sequence(&s, 6).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!(segs[0].n_padding(), 0);
    }

    #[test]
    fn zero_length_rejected() {
        assert!(matches!(segment_sequence(&seq(3), 0), Err(Error::Config(_))));
    }

    proptest! {
        #[test]
        fn lossless_and_counted(l in 1usize..12, factor in 0.0f64..1.0) {
            let len = 1 + (factor * (3 * l) as f64) as usize;
            let len = len.min(3 * l);
            let s = seq(len);
            let segs = segment_sequence(&s, l).unwrap();
            prop_assert_eq!(segs.len(), n_segments(len, l));
            let flat: Vec<&InteractionRecord> = segs.iter().flat_map(|g| g.records()).collect();
            prop_assert_eq!(flat.len(), len);
            for (a, b) in flat.iter().zip(&s.records) {
                prop_assert_eq!(*a, b);
            }
            for g in &segs {
                prop_assert_eq!(g.slots.len(), l);
                let first_pad = g.slots.iter().position(|x| *x == Slot::Padding).unwrap_or(l);
                prop_assert!(g.slots[first_pad..].iter().all(|x| *x == Slot::Padding));
            }
        }
    }
}
