//! Monte Carlo paths of the stock and discrete delta-hedging P&L.
//!
//! Path `i` draws from its own ChaCha8 stream `(seed, i)`, so results do not
//! depend on thread count or scheduling. Reductions run in path order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::SampleStats;
use crate::black_scholes::{BsState, OptionSpec};
use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub paths: usize,
    pub steps: usize,
    pub seed: u64,
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        ensure(self.paths >= 2, "paths", self.paths as f64, "must be at least 2")?;
        ensure(self.steps >= 1, "steps", self.steps as f64, "must be at least 1")
    }
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

/// Exact lognormal stepper for `dS = mu S dt + sigma0 S dW`.
#[derive(Debug, Clone, Copy)]
struct Stepper {
    drift: f64,
    diffusion: f64,
}

impl Stepper {
    fn new(spec: &OptionSpec<f64>, dt: f64) -> Self {
        let sigma = spec.sigma0();
        Self {
            drift: (spec.mu() - 0.5 * sigma * sigma) * dt,
            diffusion: sigma * dt.sqrt(),
        }
    }

    fn step(&self, s: f64, rng: &mut ChaCha8Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        s * (self.drift + self.diffusion * z).exp()
    }
}

/// Simulated stock paths on the uniform grid `t_j = j T / steps`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub times: Vec<f64>,
    /// `paths[i][j]` is the price of path `i` at `times[j]`.
    pub paths: Vec<Vec<f64>>,
}

impl PathEnsemble {
    pub fn terminal(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p[p.len() - 1]).collect()
    }
}

pub fn gbm_paths(spec: &OptionSpec<f64>, mc: &McConfig) -> Result<PathEnsemble> {
    mc.validate()?;
    let dt = spec.maturity() / mc.steps as f64;
    let stepper = Stepper::new(spec, dt);
    let times = (0..=mc.steps).map(|j| j as f64 * dt).collect();
    let paths = (0..mc.paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(mc.seed, i);
            let mut path = Vec::with_capacity(mc.steps + 1);
            let mut s = spec.spot();
            path.push(s);
            for _ in 0..mc.steps {
                s = stepper.step(s, &mut rng);
                path.push(s);
            }
            path
        })
        .collect();
    Ok(PathEnsemble { times, paths })
}

/// P&L of selling the call at `trader_sigma` and rebalancing the delta
/// `N(d1(trader_sigma))` at every step:
/// `F(trader_sigma, S0, 0) + sum_j N(d1_j) (S_{j+1} - S_j) - (S_T - K)^+`.
///
/// Paths are generated on the fly, so memory does not grow with `steps`.
pub fn hedge_pnl(spec: &OptionSpec<f64>, trader_sigma: f64, mc: &McConfig) -> Result<SampleStats> {
    mc.validate()?;
    ensure(trader_sigma.is_finite() && trader_sigma > 0.0, "trader_sigma", trader_sigma, "must be finite and > 0")?;
    let (k, t) = (spec.strike(), spec.maturity());
    let dt = t / mc.steps as f64;
    let stepper = Stepper::new(spec, dt);
    let premium = BsState::new(spec.spot(), k, t, trader_sigma).call_price();

    let pnl: Vec<f64> = (0..mc.paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(mc.seed, i);
            let mut s = spec.spot();
            let mut gains = 0.0;
            for j in 0..mc.steps {
                let tau = t - j as f64 * dt;
                let delta = BsState::new(s, k, tau, trader_sigma).delta();
                let next = stepper.step(s, &mut rng);
                gains += delta * (next - s);
                s = next;
            }
            premium + gains - (s - k).max(0.0)
        })
        .collect();
    Ok(SampleStats::from_slice(&pnl))
}
