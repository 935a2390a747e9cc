//! Black-Scholes call pricing at zero interest rate, with the volatility
//! sensitivities needed by the perturbative corrections.
//!
//! All assets are priced in units of the money market, so there is no rate
//! parameter. Every function takes an `elapsed` time `s` in `[0, T)` and
//! prices with time to expiry `tau = T - s`; user-facing quotes use `s = 0`.

use crate::error::{ensure, PbsError, Result};
use crate::scalar::Scalar;
use crate::special::{norm_cdf, norm_pdf};

/// Contract and market state of a European call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptionSpec<T> {
    spot: T,
    strike: T,
    maturity: T,
    sigma0: T,
    mu: T,
}

impl<T: Scalar> OptionSpec<T> {
    /// Validates and builds a spec. `spot`, `strike`, `maturity` and `sigma0`
    /// must be finite and strictly positive; `mu` may be any finite real.
    pub fn new(spot: T, strike: T, maturity: T, sigma0: T, mu: T) -> Result<Self> {
        let positive = |v: T| v.is_finite() && v > T::zero();
        ensure(positive(spot), "spot", spot.as_f64(), "must be finite and > 0")?;
        ensure(positive(strike), "strike", strike.as_f64(), "must be finite and > 0")?;
        ensure(positive(maturity), "maturity", maturity.as_f64(), "must be finite and > 0")?;
        ensure(positive(sigma0), "sigma0", sigma0.as_f64(), "must be finite and > 0")?;
        ensure(mu.is_finite(), "mu", mu.as_f64(), "must be finite")?;
        Ok(Self {
            spot,
            strike,
            maturity,
            sigma0,
            mu,
        })
    }

    pub fn spot(&self) -> T {
        self.spot
    }

    pub fn strike(&self) -> T {
        self.strike
    }

    pub fn maturity(&self) -> T {
        self.maturity
    }

    pub fn sigma0(&self) -> T {
        self.sigma0
    }

    pub fn mu(&self) -> T {
        self.mu
    }

    /// Strike over spot.
    pub fn moneyness(&self) -> T {
        self.strike / self.spot
    }

    pub fn with_spot(&self, spot: T) -> Result<Self> {
        Self::new(spot, self.strike, self.maturity, self.sigma0, self.mu)
    }

    pub fn with_strike(&self, strike: T) -> Result<Self> {
        Self::new(self.spot, strike, self.maturity, self.sigma0, self.mu)
    }

    pub fn with_maturity(&self, maturity: T) -> Result<Self> {
        Self::new(self.spot, self.strike, maturity, self.sigma0, self.mu)
    }

    pub fn with_sigma0(&self, sigma0: T) -> Result<Self> {
        Self::new(self.spot, self.strike, self.maturity, sigma0, self.mu)
    }

    pub fn with_mu(&self, mu: T) -> Result<Self> {
        Self::new(self.spot, self.strike, self.maturity, self.sigma0, mu)
    }

    /// Pricing state after `elapsed` years, keeping spot, strike and vol.
    pub fn at(&self, elapsed: T) -> Result<BsState<T>> {
        let tau = self.maturity - elapsed;
        if elapsed.is_nan() || tau.is_nan() || elapsed < T::zero() || tau <= T::zero() {
            return Err(PbsError::Expired {
                elapsed: elapsed.as_f64(),
                maturity: self.maturity.as_f64(),
            });
        }
        Ok(BsState {
            spot: self.spot,
            strike: self.strike,
            tau,
            sigma: self.sigma0,
        })
    }
}

/// Second- and third-order volatility sensitivities of the call premium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSensitivities<T> {
    /// dF/d(sigma)
    pub vega: T,
    /// d2F/d(sigma)2
    pub vomma: T,
    /// d2F/d(sigma)dx
    pub vanna: T,
    /// d3F/d(sigma)2 dx
    pub dvomma_dx: T,
    /// d2F/dK2
    pub density: T,
}

/// Unvalidated pricing point `(x, K, tau, sigma)`.
///
/// This is the raw form used inside integrals over `(s, S_s)`, where the
/// caller already guarantees positivity and building an [`OptionSpec`] per
/// node would only repeat the checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsState<T> {
    pub spot: T,
    pub strike: T,
    pub tau: T,
    pub sigma: T,
}

impl<T: Scalar> BsState<T> {
    pub fn new(spot: T, strike: T, tau: T, sigma: T) -> Self {
        Self {
            spot,
            strike,
            tau,
            sigma,
        }
    }

    /// `sigma * sqrt(tau)`.
    #[inline]
    pub fn total_vol(&self) -> T {
        self.sigma * self.tau.sqrt()
    }

    #[inline]
    pub fn d1_d2(&self) -> (T, T) {
        let v = self.total_vol();
        let d1 = ((self.spot / self.strike).ln() + v * v * T::lit(0.5)) / v;
        (d1, d1 - v)
    }

    /// Call premium. In the money the put-call parity form is used so the
    /// time value keeps its relative precision.
    pub fn call_price(&self) -> T {
        let (d1, d2) = self.d1_d2();
        if d1 > T::zero() {
            let put = self.strike * norm_cdf(-d2) - self.spot * norm_cdf(-d1);
            (self.spot - self.strike) + put.max(T::zero())
        } else {
            (self.spot * norm_cdf(d1) - self.strike * norm_cdf(d2)).max(T::zero())
        }
    }

    #[inline]
    pub fn delta(&self) -> T {
        norm_cdf(self.d1_d2().0)
    }

    /// dF/dK = -N(d2).
    #[inline]
    pub fn strike_delta(&self) -> T {
        -norm_cdf(self.d1_d2().1)
    }

    pub fn sensitivities(&self) -> SigmaSensitivities<T> {
        let (d1, d2) = self.d1_d2();
        let sqrt_tau = self.tau.sqrt();
        let sigma = self.sigma;
        let pdf = norm_pdf(d1);
        let vega = self.spot * sqrt_tau * pdf;
        SigmaSensitivities {
            vega,
            vomma: vega * d1 * d2 / sigma,
            vanna: -d2 * pdf / sigma,
            dvomma_dx: (d1 + d2 - d1 * d2 * d2) / (sigma * sigma) * pdf,
            density: self.spot / (self.strike * self.strike * sigma * sqrt_tau) * pdf,
        }
    }
}

/// `(d1, d2)` after `elapsed` years.
pub fn d1_d2<T: Scalar>(spec: &OptionSpec<T>, elapsed: T) -> Result<(T, T)> {
    Ok(spec.at(elapsed)?.d1_d2())
}

/// Call premium `x N(d1) - K N(d2)`.
pub fn call_price<T: Scalar>(spec: &OptionSpec<T>, elapsed: T) -> Result<T> {
    Ok(spec.at(elapsed)?.call_price())
}

/// Hedge ratio `N(d1)`.
pub fn call_delta<T: Scalar>(spec: &OptionSpec<T>, elapsed: T) -> Result<T> {
    Ok(spec.at(elapsed)?.delta())
}

pub fn sigma_sensitivities<T: Scalar>(
    spec: &OptionSpec<T>,
    elapsed: T,
) -> Result<SigmaSensitivities<T>> {
    Ok(spec.at(elapsed)?.sensitivities())
}
