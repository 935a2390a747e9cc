//! Black-Scholes inversion and implied-volatility curves across strikes.

use rayon::prelude::*;

use crate::black_scholes::{BsState, OptionSpec};
use crate::error::{ensure, PbsError, Result};
use crate::error_structure::{ErrorStructure, QuoteConfig};
use crate::pricing::{quote, PbsQuote};
use crate::scalar::Scalar;

/// Root-finder settings for [`bs_implied_vol`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedVolConfig<T> {
    pub low: T,
    pub high: T,
    /// Price residual tolerance as a fraction of spot.
    pub price_tol: T,
    pub max_iter: usize,
}

impl<T: Scalar> Default for ImpliedVolConfig<T> {
    fn default() -> Self {
        Self {
            low: T::lit(1e-6),
            high: T::lit(5.0),
            price_tol: T::lit(1e-12),
            max_iter: 200,
        }
    }
}

/// Volatility `sigma` with `call_price(spot, strike, maturity, sigma) = target`.
///
/// Newton on vega starting from `guess`, with the step replaced by bisection
/// whenever it leaves the current bracket. Iteration continues past the price
/// tolerance until the volatility step reaches the noise floor of the price,
/// so well-conditioned inputs recover `sigma` to near machine precision.
pub fn bs_implied_vol<T: Scalar>(
    target: T,
    spot: T,
    strike: T,
    maturity: T,
    guess: T,
    cfg: &ImpliedVolConfig<T>,
) -> Result<T> {
    let positive = |v: T| v.is_finite() && v > T::zero();
    ensure(positive(spot), "spot", spot.as_f64(), "must be finite and > 0")?;
    ensure(positive(strike), "strike", strike.as_f64(), "must be finite and > 0")?;
    ensure(positive(maturity), "maturity", maturity.as_f64(), "must be finite and > 0")?;

    let lower = (spot - strike).max(T::zero());
    if !(target > lower && target < spot) {
        return Err(PbsError::OutOfBounds {
            price: target.as_f64(),
            lower: lower.as_f64(),
            upper: spot.as_f64(),
        });
    }

    let price = |sigma: T| BsState::new(spot, strike, maturity, sigma).call_price();
    let (mut lo, mut hi) = (cfg.low, cfg.high);
    if target < price(lo) || target > price(hi) {
        return Err(PbsError::OutsideBracket {
            price: target.as_f64(),
            low: lo.as_f64(),
            high: hi.as_f64(),
        });
    }

    let tol = (cfg.price_tol * spot).max(T::lit(4.0) * T::epsilon() * spot);
    let step_floor = T::lit(64.0) * T::epsilon();
    let mut sigma = if guess > lo && guess < hi {
        guess
    } else {
        (lo + hi) * T::lit(0.5)
    };
    let mut prev_residual = T::infinity();

    for _ in 0..cfg.max_iter {
        let state = BsState::new(spot, strike, maturity, sigma);
        let residual = state.call_price() - target;
        if residual == T::zero() {
            return Ok(sigma);
        }
        if residual > T::zero() {
            hi = sigma;
        } else {
            lo = sigma;
        }

        let vega = state.sensitivities().vega;
        let newton = sigma - residual / vega;
        let next = if vega > T::zero() && newton > lo && newton < hi {
            newton
        } else {
            (lo + hi) * T::lit(0.5)
        };
        let step = (next - sigma).abs();
        let within_tol = residual.abs() <= tol;
        if within_tol && (step <= step_floor * sigma || residual.abs() >= prev_residual) {
            return Ok(sigma);
        }
        if hi - lo <= step_floor * sigma {
            return Ok(next);
        }
        prev_residual = residual.abs();
        sigma = next;
    }

    let residual = price(sigma) - target;
    if residual.abs() <= tol {
        Ok(sigma)
    } else {
        Err(PbsError::NoConvergence {
            iterations: cfg.max_iter,
            residual: residual.as_f64(),
        })
    }
}

/// One strike of an implied-volatility curve. Inversions that fail (quotes
/// outside the no-arbitrage interior) are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VolCurvePoint<T> {
    pub strike: T,
    pub moneyness: T,
    pub iv_bid: Option<T>,
    pub iv_mid: Option<T>,
    pub iv_ask: Option<T>,
    pub quote: PbsQuote<T>,
}

/// Quotes and inverts every strike. Output order follows `strikes`.
pub fn vol_curve<T: Scalar>(
    template: &OptionSpec<T>,
    es: &ErrorStructure<T>,
    qc: &QuoteConfig<T>,
    strikes: &[T],
    cfg: &ImpliedVolConfig<T>,
) -> Result<Vec<VolCurvePoint<T>>> {
    for pair in strikes.windows(2) {
        ensure(pair[1] > pair[0], "strikes", pair[1].as_f64(), "must be strictly increasing")?;
    }
    let specs = strikes
        .iter()
        .map(|&k| template.with_strike(k))
        .collect::<Result<Vec<_>>>()?;

    Ok(specs
        .par_iter()
        .map(|spec| {
            let q = quote(spec, es, qc);
            let invert = |price: T| {
                bs_implied_vol(
                    price,
                    spec.spot(),
                    spec.strike(),
                    spec.maturity(),
                    spec.sigma0(),
                    cfg,
                )
                .ok()
            };
            VolCurvePoint {
                strike: spec.strike(),
                moneyness: spec.moneyness(),
                iv_bid: invert(q.bid),
                iv_mid: invert(q.mid),
                iv_ask: invert(q.ask),
                quote: q,
            }
        })
        .collect())
}

/// Shape statistics of the mid implied-volatility curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveShape<T> {
    pub argmin_strike: T,
    pub min_iv: T,
    /// Max minus min over strikes.
    pub range: T,
    /// Higher wing minus the minimum.
    pub depth: T,
}

/// `None` when any mid volatility is absent.
pub fn mid_curve_shape<T: Scalar>(points: &[VolCurvePoint<T>]) -> Option<CurveShape<T>> {
    let ivs: Vec<T> = points.iter().map(|p| p.iv_mid).collect::<Option<_>>()?;
    let (first, last) = (*ivs.first()?, *ivs.last()?);
    let (mut argmin, mut min_iv, mut max_iv) = (0, ivs[0], ivs[0]);
    for (i, &v) in ivs.iter().enumerate() {
        if v < min_iv {
            argmin = i;
            min_iv = v;
        }
        max_iv = max_iv.max(v);
    }
    Some(CurveShape {
        argmin_strike: points[argmin].strike,
        min_iv,
        range: max_iv - min_iv,
        depth: first.max(last) - min_iv,
    })
}

/// Evenly spaced strikes from `min` to `max` inclusive.
pub fn strike_grid<T: Scalar>(min: T, max: T, count: usize) -> Result<Vec<T>> {
    ensure(min.is_finite() && min > T::zero(), "strike min", min.as_f64(), "must be finite and > 0")?;
    ensure(max.is_finite() && max > min, "strike max", max.as_f64(), "must exceed the minimum")?;
    ensure(count >= 2, "strike count", count as f64, "must be at least 2")?;
    let step = (max - min) / T::lit((count - 1) as f64);
    Ok((0..count)
        .map(|i| if i + 1 == count { max } else { min + step * T::lit(i as f64) })
        .collect())
}
