//! Fixtures for the benchmarks.

use ktbench::ability::ProfileNormalization;
use ktbench::clustering::pooled_profiles;
use ktbench::dataset::{generate_synthetic, Dataset, SynthConfig};
use ktbench::neural::{encode_student, EncodedStudent};
use ktbench::segmentation::segment_sequence;

pub fn synthetic(n_students: usize, attempts: usize) -> Dataset {
    generate_synthetic(&SynthConfig {
        n_students,
        attempts_per_student: attempts,
        ..SynthConfig::default()
    })
    .expect("valid synthetic config")
    .dataset
}

pub fn encoded(data: &Dataset, interval_len: usize) -> Vec<EncodedStudent> {
    data.sequences
        .iter()
        .map(|s| {
            let segs = segment_sequence(s, interval_len).expect("positive interval");
            encode_student(&segs, data.n_skills(), None).expect("skills in range")
        })
        .collect()
}

pub fn profiles(data: &Dataset, interval_len: usize) -> Vec<Vec<f64>> {
    let segs: Vec<_> = data
        .sequences
        .iter()
        .map(|s| segment_sequence(s, interval_len).expect("positive interval"))
        .collect();
    pooled_profiles(segs.iter().map(|s| s.as_slice()), data.n_skills(), ProfileNormalization::Cumulative)
}
