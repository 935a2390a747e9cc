//! Option pricing under a perturbed Black-Scholes model.
//!
//! A trader who hedges with a noisy volatility estimate `sigma0 + eps A +
//! sqrt(eps Gamma) N` carries a biased and uncertain P&L. To first order in
//! `eps` this turns the Black-Scholes premium into a mid price plus a
//! bid/ask spread, and the implied volatilities of those quotes form a smile.
//!
//! Modules, bottom-up:
//!
//! - [`black_scholes`]: zero-rate call premium and volatility sensitivities.
//! - [`error_structure`]: error parameters and the first-order calculus of
//!   bias and variance.
//! - [`pricing`]: the drift integrals and the bid/mid/ask assembly.
//! - [`implied_vol`]: Black-Scholes inversion and strike sweeps.
//! - [`oracle`]: quadrature and Monte Carlo checks independent of the
//!   closed forms.
//!
//! Everything numeric is generic over [`Scalar`] (`f64` or `f32`); the
//! aliases below fix `f64`.

pub mod black_scholes;
pub mod error;
pub mod error_structure;
pub mod implied_vol;
pub mod oracle;
pub mod pricing;
pub mod scalar;
pub mod special;

pub use black_scholes::{BsState, OptionSpec, SigmaSensitivities};
pub use error::{PbsError, Result};
pub use error_structure::{ErrorMoments, ErrorStructure, Jet, QuoteConfig};
pub use implied_vol::{bs_implied_vol, vol_curve, ImpliedVolConfig, VolCurvePoint};
pub use pricing::{quote, DriftBranch, PbsQuote, QuoteWarnings};
pub use scalar::Scalar;

pub type OptionSpecF64 = OptionSpec<f64>;
pub type OptionSpecF32 = OptionSpec<f32>;
pub type ErrorStructureF64 = ErrorStructure<f64>;
pub type ErrorStructureF32 = ErrorStructure<f32>;
pub type QuoteConfigF64 = QuoteConfig<f64>;
pub type PbsQuoteF64 = PbsQuote<f64>;
pub type PbsQuoteF32 = PbsQuote<f32>;
pub type VolCurvePointF64 = VolCurvePoint<f64>;
