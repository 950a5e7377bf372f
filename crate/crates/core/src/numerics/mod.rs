//! Shared numerical kernels.

pub mod derivative;
pub mod hypergeometric;
pub mod quadrature;
pub mod sampling;
pub mod simplex;
pub mod special;

pub use derivative::{richardson_derivative, DerivativeEstimate};
pub use hypergeometric::{gauss_2f1, meijer_g_12_22, meijer_g_21_22};
pub use quadrature::{integrate_adaptive, integrate_breaks, QuadratureResult};
pub use simplex::{nelder_mead, SimplexResult};
pub use special::upper_incomplete_gamma;
