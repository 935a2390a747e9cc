//! Quadrature of the hedging expectations over `(s, S_s)`.
//!
//! Every expectation is written as an outer integral over time and an inner
//! Gaussian expectation over `y`, with `S_s = S0 exp((mu - sigma0^2/2) s +
//! sigma0 sqrt(s) y)`. The outer variable is `v = sqrt((T - s) / T)`, which
//! turns the `sqrt(T - s)` behaviour at expiry into a smooth integrand. The
//! inner rule is composite Gauss-Legendre on panels graded around the point
//! where the hedge ratio switches, since that feature narrows like
//! `sqrt((T - s) / s)` in `y`.
//!
//! Nothing here calls the closed forms of [`crate::pricing`]; the only shared
//! code is the Black-Scholes layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::quadrature::{gaussian_expectation, graded_breakpoints, GaussLegendre};
use super::SampleStats;
use crate::black_scholes::{BsState, OptionSpec};
use crate::error::{ensure, PbsError, Result};
use crate::error_structure::ErrorStructure;

/// Half-width of the inner domain in standard deviations of `y`.
const Y_SPAN: f64 = 10.0;
const MAX_PANEL: f64 = 1.0;

/// Node counts and acceptance tolerance of the quadrature oracle.
///
/// `space_nodes` is the Gauss-Legendre order on each inner panel. A result
/// is accepted when the change from `(n_t, n_y)` to `(2 n_t, 2 n_y)` nodes is
/// at most `rel_tol * |value| + abs_tol * spot`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub time_nodes: usize,
    pub space_nodes: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            time_nodes: 32,
            space_nodes: 20,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
        }
    }
}

impl QuadConfig {
    fn validate(&self) -> Result<()> {
        ensure(self.time_nodes >= 16, "time_nodes", self.time_nodes as f64, "must be at least 16")?;
        ensure(self.space_nodes >= 8, "space_nodes", self.space_nodes as f64, "must be at least 8")?;
        ensure(self.rel_tol >= 0.0, "rel_tol", self.rel_tol, "must be >= 0")?;
        ensure(self.abs_tol >= 0.0, "abs_tol", self.abs_tol, "must be >= 0")
    }
}

/// A quadrature value and its change under node doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadEstimate {
    pub value: f64,
    pub delta: f64,
}

fn accept(coarse: f64, fine: f64, scale: f64, qc: &QuadConfig) -> Result<QuadEstimate> {
    let delta = (fine - coarse).abs();
    let tolerance = qc.rel_tol * fine.abs() + qc.abs_tol * scale;
    if delta <= tolerance {
        Ok(QuadEstimate { value: fine, delta })
    } else {
        Err(PbsError::QuadratureNotConverged {
            value: fine,
            delta,
            tolerance,
        })
    }
}

/// Which mixed sensitivity is integrated against `dS`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedOrder {
    /// `d2F / dsigma dx`
    Second,
    /// `d3F / dsigma2 dx`
    Third,
}

struct Rules {
    time: GaussLegendre,
    space: GaussLegendre,
}

impl Rules {
    fn new(time_nodes: usize, space_nodes: usize) -> Self {
        Self {
            time: GaussLegendre::new(time_nodes),
            space: GaussLegendre::new(space_nodes),
        }
    }

    /// `int_0^T E[f(S_s, T - s)] ds`, with the feature of `f` at
    /// `ln S = ln K - vol^2 tau / 2` and log-width `vol sqrt(tau)`.
    fn time_integral<F>(&self, spec: &OptionSpec<f64>, feature_vol: f64, f: F) -> f64
    where
        F: Fn(f64, f64) -> f64,
    {
        let (s0, k, t, sigma, mu) = (spec.spot(), spec.strike(), spec.maturity(), spec.sigma0(), spec.mu());
        self.time.integrate(0.0, 1.0, |v| {
            let tau = t * v * v;
            let s = t - tau;
            let sqrt_s = s.sqrt();
            let drift = (mu - 0.5 * sigma * sigma) * s;
            let spread = sigma * sqrt_s;
            let center = ((k / s0).ln() - 0.5 * feature_vol * feature_vol * tau - drift) / spread;
            let width = feature_vol * tau.sqrt() / spread;
            let (lo, hi) = (spread.min(0.0) - Y_SPAN, spread.max(0.0) + Y_SPAN);
            let edges = graded_breakpoints(lo, hi, center, width, MAX_PANEL);
            let inner = gaussian_expectation(&self.space, &edges, |y| {
                f(s0 * (drift + spread * y).exp(), tau)
            });
            2.0 * t * v * inner
        })
    }

    /// `E[max(S_T - K, 0)]` under the drifted dynamics.
    fn expected_payoff(&self, spec: &OptionSpec<f64>) -> f64 {
        let (s0, k, t, sigma, mu) = (spec.spot(), spec.strike(), spec.maturity(), spec.sigma0(), spec.mu());
        let drift = (mu - 0.5 * sigma * sigma) * t;
        let spread = sigma * t.sqrt();
        let kink = ((k / s0).ln() - drift) / spread;
        let (lo, hi) = (spread.min(0.0) - Y_SPAN, spread.max(0.0) + Y_SPAN);
        let edges = graded_breakpoints(lo, hi, kink, MAX_PANEL, MAX_PANEL);
        gaussian_expectation(&self.space, &edges, |y| (s0 * (drift + spread * y).exp() - k).max(0.0))
    }
}

fn mixed_integral(spec: &OptionSpec<f64>, order: MixedOrder, rules: &Rules) -> f64 {
    let (k, sigma, mu) = (spec.strike(), spec.sigma0(), spec.mu());
    if mu == 0.0 {
        return 0.0;
    }
    mu * rules.time_integral(spec, sigma, |x, tau| {
        let g = BsState::new(x, k, tau, sigma).sensitivities();
        let derivative = match order {
            MixedOrder::Second => g.vanna,
            MixedOrder::Third => g.dvomma_dx,
        };
        derivative * x
    })
}

/// `E[int_0^T D F(sigma0, S_s, s) dS_s] = mu int_0^T E[D F(sigma0, S_s, s) S_s] ds`
/// for the mixed derivative `D` selected by `order`.
pub fn quad_expected_integral(
    spec: &OptionSpec<f64>,
    order: MixedOrder,
    qc: &QuadConfig,
) -> Result<QuadEstimate> {
    qc.validate()?;
    let coarse = mixed_integral(spec, order, &Rules::new(qc.time_nodes, qc.space_nodes));
    let fine = mixed_integral(spec, order, &Rules::new(2 * qc.time_nodes, 2 * qc.space_nodes));
    accept(coarse, fine, spec.spot(), qc)
}

/// Expected P&L of selling the call at trader volatility `trader_sigma` and
/// delta-hedging continuously with that volatility while the stock follows
/// the true dynamics:
///
/// `g = F(trader_sigma, S0, 0) - E[(S_T - K)^+] + mu int_0^T E[N(d1) S_s] ds`.
///
/// Rules and the expected payoff are built once and shared across
/// evaluations at different trader volatilities.
pub struct PnlQuadrature {
    spec: OptionSpec<f64>,
    qc: QuadConfig,
    coarse: Rules,
    fine: Rules,
    payoff_coarse: f64,
    payoff_fine: f64,
}

impl PnlQuadrature {
    pub fn new(spec: &OptionSpec<f64>, qc: &QuadConfig) -> Result<Self> {
        qc.validate()?;
        let coarse = Rules::new(qc.time_nodes, qc.space_nodes);
        let fine = Rules::new(2 * qc.time_nodes, 2 * qc.space_nodes);
        Ok(Self {
            spec: *spec,
            qc: *qc,
            payoff_coarse: coarse.expected_payoff(spec),
            payoff_fine: fine.expected_payoff(spec),
            coarse,
            fine,
        })
    }

    fn g(&self, trader_sigma: f64, rules: &Rules, payoff: f64) -> f64 {
        let (s0, k, t, mu) = (self.spec.spot(), self.spec.strike(), self.spec.maturity(), self.spec.mu());
        let premium = BsState::new(s0, k, t, trader_sigma).call_price();
        let hedge = if mu == 0.0 {
            0.0
        } else {
            mu * rules.time_integral(&self.spec, trader_sigma, |x, tau| {
                BsState::new(x, k, tau, trader_sigma).delta() * x
            })
        };
        premium - payoff + hedge
    }

    /// Single-resolution value at the configured node counts.
    pub fn value(&self, trader_sigma: f64) -> Result<f64> {
        ensure(trader_sigma.is_finite() && trader_sigma > 0.0, "trader_sigma", trader_sigma, "must be finite and > 0")?;
        Ok(self.g(trader_sigma, &self.coarse, self.payoff_coarse))
    }

    /// Value at doubled node counts, checked against the configured ones.
    pub fn estimate(&self, trader_sigma: f64) -> Result<QuadEstimate> {
        let coarse = self.value(trader_sigma)?;
        let fine = self.g(trader_sigma, &self.fine, self.payoff_fine);
        accept(coarse, fine, self.spec.spot(), &self.qc)
    }
}

pub fn expected_pnl(trader_sigma: f64, spec: &OptionSpec<f64>, qc: &QuadConfig) -> Result<QuadEstimate> {
    PnlQuadrature::new(spec, qc)?.estimate(trader_sigma)
}

/// Sample moments of `g(sigma0 + eps A + sqrt(eps Gamma) N)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMoments {
    pub bias: f64,
    pub bias_se: f64,
    pub variance: f64,
    pub variance_se: f64,
    pub draws: usize,
}

/// Samples the trader volatility from the error structure and returns the
/// sample mean and variance of `g`, which estimate `eps A[E P&L]` and
/// `eps Gamma[E P&L]` to first order.
///
/// Each sample is `g(sigma) - g(sigma0)` on the same nodes: `g(sigma0)` is
/// zero analytically, so this removes the shared quadrature error and a
/// degenerate structure yields exact zeros.
pub fn empirical_bias_variance(
    spec: &OptionSpec<f64>,
    es: &ErrorStructure<f64>,
    draws: usize,
    seed: u64,
    qc: &QuadConfig,
) -> Result<EmpiricalMoments> {
    ensure(draws >= 2, "draws", draws as f64, "must be at least 2")?;
    let quad = PnlQuadrature::new(spec, qc)?;
    let sigma0 = spec.sigma0();
    let at_truth = quad.value(sigma0)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigmas: Vec<f64> = (0..draws)
        .map(|_| es.perturbed_sigma(sigma0, rng.sample(StandardNormal)))
        .collect();
    let samples = sigmas
        .par_iter()
        .map(|&s| if s == sigma0 { Ok(0.0) } else { Ok(quad.value(s)? - at_truth) })
        .collect::<Result<Vec<_>>>()?;

    let stats = SampleStats::from_slice(&samples);
    Ok(EmpiricalMoments {
        bias: stats.mean,
        bias_se: stats.std_error,
        variance: stats.variance,
        variance_se: stats.variance_std_error,
        draws,
    })
}
