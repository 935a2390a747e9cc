use thiserror::Error;

/// Errors raised by the pricing, inversion and oracle routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PbsError {
    #[error("invalid {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("time to expiry must be positive (elapsed {elapsed} >= maturity {maturity})")]
    Expired { elapsed: f64, maturity: f64 },

    #[error("target price {price} is outside the no-arbitrage interior ({lower}, {upper})")]
    OutOfBounds { price: f64, lower: f64, upper: f64 },

    #[error("implied volatility for price {price} lies outside the search bracket [{low}, {high}]")]
    OutsideBracket { price: f64, low: f64, high: f64 },

    #[error("implied volatility did not converge after {iterations} iterations (residual {residual})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("quadrature did not converge: value {value}, refinement delta {delta} > tolerance {tolerance}")]
    QuadratureNotConverged {
        value: f64,
        delta: f64,
        tolerance: f64,
    },
}

pub type Result<T, E = PbsError> = std::result::Result<T, E>;

pub(crate) fn ensure(
    ok: bool,
    name: &'static str,
    value: f64,
    reason: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(PbsError::InvalidParameter {
            name,
            value,
            reason,
        })
    }
}
