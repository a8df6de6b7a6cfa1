//! Published full-scale results, used by `--full` runs as targets.

use super::cv::ModelKind;

/// Allowed distance from a published value.
pub const REFERENCE_TOLERANCE: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reference {
    pub dataset: &'static str,
    /// AUC in the order BKT, IRT, PFA, DKT, DKT-DSC.
    pub auc: [f64; 5],
    pub rmse: [f64; 5],
}

pub const REFERENCES: [Reference; 4] = [
    Reference {
        dataset: "assistments09",
        auc: [0.67, 0.75, 0.70, 0.73, 0.91],
        rmse: [0.46, 0.44, 0.45, 0.45, 0.33],
    },
    Reference {
        dataset: "assistments12",
        auc: [0.61, 0.74, 0.67, 0.72, 0.87],
        rmse: [0.51, 0.44, 0.44, 0.43, 0.35],
    },
    Reference {
        dataset: "assistments14",
        auc: [0.64, 0.67, 0.69, 0.72, 0.87],
        rmse: [0.51, 0.44, 0.42, 0.42, 0.35],
    },
    Reference {
        dataset: "cognitive-tutor",
        auc: [0.61, 0.81, 0.76, 0.79, 0.81],
        rmse: [0.47, 0.37, 0.39, 0.36, 0.36],
    },
];

fn column(model: ModelKind) -> usize {
    match model {
        ModelKind::Bkt => 0,
        ModelKind::Irt => 1,
        ModelKind::Pfa => 2,
        ModelKind::Dkt => 3,
        ModelKind::DktDsc => 4,
    }
}

pub fn reference_for(dataset: &str) -> Option<&'static Reference> {
    let key = dataset.to_ascii_lowercase();
    REFERENCES.iter().find(|r| r.dataset == key)
}

/// Published `(auc, rmse)` for a model on a named dataset.
pub fn reference_scores(dataset: &str, model: ModelKind) -> Option<(f64, f64)> {
    reference_for(dataset).map(|r| (r.auc[column(model)], r.rmse[column(model)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup() {
        assert_eq!(reference_scores("ASSISTments09", ModelKind::DktDsc), Some((0.91, 0.33)));
        assert_eq!(reference_scores("assistments09", ModelKind::Dkt), Some((0.73, 0.45)));
        assert_eq!(reference_scores("nope", ModelKind::Dkt), None);
    }
}
