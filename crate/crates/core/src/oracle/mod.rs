//! Numerical ground truth for the closed forms: deterministic quadrature of
//! the hedging expectations and Monte Carlo simulation of discrete hedging.

pub mod expectation;
pub mod quadrature;
pub mod simulation;

pub use expectation::{
    empirical_bias_variance, expected_pnl, quad_expected_integral, EmpiricalMoments, MixedOrder,
    PnlQuadrature, QuadConfig, QuadEstimate,
};
pub use simulation::{gbm_paths, hedge_pnl, McConfig, PathEnsemble};

/// Mean and variance of a sample with their standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    /// Standard error of `mean`.
    pub std_error: f64,
    /// Standard error of `variance`, from the fourth central moment.
    pub variance_std_error: f64,
}

impl SampleStats {
    /// Two-pass moments, summed in slice order.
    pub fn from_slice(xs: &[f64]) -> Self {
        let n = xs.len();
        assert!(n >= 2, "need at least two samples");
        let nf = n as f64;
        let mean = xs.iter().sum::<f64>() / nf;
        let (m2, m4) = xs.iter().fold((0.0, 0.0), |(m2, m4), &x| {
            let d = (x - mean) * (x - mean);
            (m2 + d, m4 + d * d)
        });
        let variance = m2 / (nf - 1.0);
        let fourth = m4 / nf;
        let pop_var = m2 / nf;
        Self {
            count: n,
            mean,
            variance,
            std_error: (variance / nf).sqrt(),
            variance_std_error: ((fourth - pop_var * pop_var).max(0.0) / nf).sqrt(),
        }
    }
}
