//! Non-neural comparison models.

pub mod bkt;
pub mod irt;
pub mod pfa;

pub use bkt::{
    bkt_filter, bkt_fit_em, bkt_loglik, bkt_predict, bkt_update, BktFitOptions, BktParams,
    BktSkillFit, BktUpdate, write_bkt,
};
pub use irt::{irt_fit, irt_gradient_max_norm, irt_predict, IrtFit, IrtFitOptions, IrtObservation, IrtParams};
pub use pfa::{
    pfa_features, pfa_fit, pfa_logit, pfa_predict, PfaCounters, PfaFit, PfaFitOptions,
    PfaObservation, PfaParams,
};
