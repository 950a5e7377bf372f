//! Fixtures shared by the benchmarks.

use vhetnet_core::{LaplaceEvalRequest, NetworkParams, SpectrumPolicy, TierLabel, ValidatedParams};

/// The reference network at user height `h_u`.
pub fn reference_params(h_u: f64) -> ValidatedParams {
    NetworkParams { h_u, ..Default::default() }.validate().expect("reference parameters are valid")
}

/// A LoS-served request at 0 dB threshold, 1.5 times the minimum distance.
pub fn los_request(p: &ValidatedParams, policy: SpectrumPolicy) -> LaplaceEvalRequest {
    let r = 1.5 * p.h_ut();
    let s = r.powf(p.alpha(TierLabel::L)) / p.mu(TierLabel::L);
    LaplaceEvalRequest::new(s, TierLabel::L, r, policy)
}

/// An aerial-served request at 0 dB threshold, 1.5 times the minimum distance.
pub fn aerial_request(p: &ValidatedParams, policy: SpectrumPolicy) -> LaplaceEvalRequest {
    let r = 1.5 * p.h_ua();
    let s = r.powf(p.alpha(TierLabel::A)) / p.mu(TierLabel::A);
    LaplaceEvalRequest::new(s, TierLabel::A, r, policy)
}
