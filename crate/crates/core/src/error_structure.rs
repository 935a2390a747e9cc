//! The trader's volatility error structure and first-order propagation.
//!
//! An estimated volatility is modelled as
//! `sigma0 + eps * A + sqrt(eps * Gamma) * Z` with `Z` standard normal. For a
//! smooth `F` the bias and variance of `F(sigma)` to first order in `eps` are
//!
//! ```text
//! bias     = eps * (F'(sigma0) * A + F''(sigma0) * Gamma / 2)
//! variance = eps * F'(sigma0)^2 * Gamma
//! ```
//!
//! [`propagate_chain_rule`] is the only place `eps` multiplies a coefficient;
//! the pricing module keeps its corrections `eps`-exclusive and applies `eps`
//! when assembling a quote.

use crate::error::{ensure, Result};
use crate::scalar::Scalar;
use crate::special::norm_quantile;

/// Scale and coefficients of the volatility perturbation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStructure<T> {
    epsilon: T,
    bias_coeff: T,
    var_coeff: T,
}

impl<T: Scalar> ErrorStructure<T> {
    /// `epsilon > 0`, `var_coeff >= 0`, all finite.
    pub fn new(epsilon: T, bias_coeff: T, var_coeff: T) -> Result<Self> {
        ensure(
            epsilon.is_finite() && epsilon > T::zero(),
            "epsilon",
            epsilon.as_f64(),
            "must be finite and > 0",
        )?;
        ensure(bias_coeff.is_finite(), "bias_coeff", bias_coeff.as_f64(), "must be finite")?;
        ensure(
            var_coeff.is_finite() && var_coeff >= T::zero(),
            "var_coeff",
            var_coeff.as_f64(),
            "must be finite and >= 0",
        )?;
        Ok(Self {
            epsilon,
            bias_coeff,
            var_coeff,
        })
    }

    /// Reference calibration used for the smile studies:
    /// `eps = 0.02`, `A = -5 sigma0`, `Gamma = sigma0^2`.
    pub fn reference(sigma0: T) -> Self {
        Self {
            epsilon: T::lit(0.02),
            bias_coeff: T::lit(-5.0) * sigma0,
            var_coeff: sigma0 * sigma0,
        }
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// `A[sigma](sigma0)`, in volatility units.
    pub fn bias_coeff(&self) -> T {
        self.bias_coeff
    }

    /// `Gamma[sigma](sigma0)`, in squared volatility units.
    pub fn var_coeff(&self) -> T {
        self.var_coeff
    }

    pub fn with_epsilon(&self, epsilon: T) -> Result<Self> {
        Self::new(epsilon, self.bias_coeff, self.var_coeff)
    }

    pub fn with_bias_coeff(&self, bias_coeff: T) -> Result<Self> {
        Self::new(self.epsilon, bias_coeff, self.var_coeff)
    }

    pub fn with_var_coeff(&self, var_coeff: T) -> Result<Self> {
        Self::new(self.epsilon, self.bias_coeff, var_coeff)
    }

    /// Coefficients for the scaled variable `sigma * sqrt(T)`:
    /// `A[sigma sqrt T] = sqrt(T) A[sigma]`, `Gamma[sigma sqrt T] = T Gamma[sigma]`.
    pub fn scaled_by_sqrt_maturity(&self, maturity: T) -> (T, T) {
        (maturity.sqrt() * self.bias_coeff, maturity * self.var_coeff)
    }

    /// True when the shift `eps |A|` exceeds half of `sigma0`, where a
    /// first-order expansion is no longer trustworthy.
    pub fn is_large_perturbation(&self, sigma0: T) -> bool {
        self.epsilon * self.bias_coeff.abs() / sigma0 > T::lit(0.5)
    }

    /// A sample of the perturbed volatility for a standard normal draw `z`.
    pub fn perturbed_sigma(&self, sigma0: T, z: T) -> T {
        sigma0 + self.epsilon * self.bias_coeff + (self.epsilon * self.var_coeff).sqrt() * z
    }
}

/// How far bid and ask sit from mid, in standard deviations of the P&L error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuoteConfig<T> {
    quantile_mult: T,
}

impl<T: Scalar> QuoteConfig<T> {
    pub fn new(quantile_mult: T) -> Result<Self> {
        ensure(
            quantile_mult.is_finite() && quantile_mult >= T::zero(),
            "quantile_mult",
            quantile_mult.as_f64(),
            "must be finite and >= 0",
        )?;
        Ok(Self { quantile_mult })
    }

    /// `k = |N^{-1}(alpha)|` for a supportable risk probability `alpha < 0.5`.
    pub fn from_risk_probability(alpha: T) -> Result<Self> {
        ensure(
            alpha > T::zero() && alpha < T::lit(0.5),
            "alpha",
            alpha.as_f64(),
            "must lie in (0, 0.5)",
        )?;
        Self::new(norm_quantile(alpha).abs())
    }

    pub fn quantile_mult(&self) -> T {
        self.quantile_mult
    }
}

impl<T: Scalar> Default for QuoteConfig<T> {
    /// One standard deviation each side of mid.
    fn default() -> Self {
        Self {
            quantile_mult: T::one(),
        }
    }
}

/// Value and first two derivatives of a scalar function at `sigma0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet<T> {
    pub value: T,
    pub first: T,
    pub second: T,
}

/// First-order error moments, already multiplied by `eps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorMoments<T> {
    pub bias: T,
    pub variance: T,
}

/// Chain rule for the bias and carré du champ operators.
pub fn propagate_chain_rule<T: Scalar>(jet: Jet<T>, es: &ErrorStructure<T>) -> ErrorMoments<T> {
    let eps = es.epsilon;
    ErrorMoments {
        bias: eps * (jet.first * es.bias_coeff + T::lit(0.5) * jet.second * es.var_coeff),
        variance: eps * jet.first * jet.first * es.var_coeff,
    }
}

/// Carré du champ of the Ornstein-Uhlenbeck structure: `Gamma[u] = u'^2`.
pub fn ou_gamma<T: Scalar>(u_prime: T) -> T {
    u_prime * u_prime
}

/// Generator of the Ornstein-Uhlenbeck structure: `A[u](x) = u''/2 - x u'/2`.
pub fn ou_generator<T: Scalar>(u_prime: T, u_second: T, x: T) -> T {
    T::lit(0.5) * u_second - T::lit(0.5) * x * u_prime
}
