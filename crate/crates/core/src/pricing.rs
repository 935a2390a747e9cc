//! Perturbative corrections to the call premium and bid/mid/ask assembly.
//!
//! The trader hedges with an estimated volatility. Expanding the expected
//! P&L to first order in the error scale `eps` gives a bias (which moves the
//! mid price) and a variance (which opens a bid/ask spread). Both involve
//!
//! ```text
//! I1 = E[ int_0^T d2F/dsigma dx (sigma0, S_s, s) dS_s ]
//! I2 = E[ int_0^T d3F/dsigma2 dx (sigma0, S_s, s) dS_s ]
//! ```
//!
//! which vanish when the stock has no drift. With `L = mu sqrt(T) / sigma0`,
//! `q = sigma0 sqrt(T)` and `e = d2 + L` they integrate to
//!
//! ```text
//! I1 = K sqrt(T) [ (N(e) - N(d2)) / L - phi(d2) ]
//! I2 = K sqrt(T) / sigma0 * { (1/L - 2q/L^2) (N(e) - N(d2))
//!                             + (2/L^2) phi(e)
//!                             + (2 d2/L + 2q/L - 2/L^2 - d2^2 - q d2) phi(d2) }
//! ```
//!
//! The drift correction to the bias is `I1 A[sigma] + I2 Gamma[sigma] / 2`.
//!
//! Evaluated literally, both forms cancel catastrophically as `L -> 0`. The
//! direct branch regroups them into second-order remainders computed without
//! cancellation (see [`crate::special::normal_mass_excess`]), which keeps
//! about `eps_mach / |L|` relative accuracy. Below [`SMALL_L_THRESHOLD`] a
//! power series in `L` is summed instead, so corrections are exactly zero at
//! `mu = 0` and smooth through it.

use crate::black_scholes::{BsState, OptionSpec};
use crate::error_structure::{ErrorStructure, QuoteConfig};
use crate::scalar::Scalar;
use crate::special::{exp_minus_linear, norm_pdf, normal_mass_excess};

/// `|L|` below which the drift integrals are summed as a power series.
pub const SMALL_L_THRESHOLD: f64 = 1e-4;

/// Evaluation route for the drift integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftBranch {
    /// Series below [`SMALL_L_THRESHOLD`], closed form above.
    #[default]
    Auto,
    /// Power series in `L`. Accurate while `|L| (|d2| + 1)` is small.
    Series,
    /// Integrated closed form. Undefined at `L = 0`.
    Direct,
}

/// Risk premium `lambda = mu / sigma0` and its cumulated form `L = lambda sqrt(T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulatedRiskPremium<T> {
    pub lambda: T,
    pub cumulated: T,
}

pub fn cumulated_risk_premium<T: Scalar>(spec: &OptionSpec<T>) -> CumulatedRiskPremium<T> {
    let lambda = spec.mu() / spec.sigma0();
    CumulatedRiskPremium {
        lambda,
        cumulated: lambda * spec.maturity().sqrt(),
    }
}

/// The two drift integrals and the bracket `(N(d2 + L) - N(d2)) / L - phi(d2)`
/// shared by the variance term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftIntegrals<T> {
    pub i1: T,
    pub i2: T,
    pub bracket: T,
}

struct Geometry<T> {
    d2: T,
    l: T,
    q: T,
    pdf_d2: T,
    strike_sqrt_t: T,
    sigma0: T,
}

impl<T: Scalar> Geometry<T> {
    fn new(spec: &OptionSpec<T>) -> Self {
        let q = spec.sigma0() * spec.maturity().sqrt();
        let d2 = (spec.spot() / spec.strike()).ln() / q - q * T::lit(0.5);
        Self {
            d2,
            l: cumulated_risk_premium(spec).cumulated,
            q,
            pdf_d2: norm_pdf(d2),
            strike_sqrt_t: spec.strike() * spec.maturity().sqrt(),
            sigma0: spec.sigma0(),
        }
    }
}

pub fn drift_integrals<T: Scalar>(spec: &OptionSpec<T>) -> DriftIntegrals<T> {
    drift_integrals_with(spec, DriftBranch::Auto)
}

pub fn drift_integrals_with<T: Scalar>(
    spec: &OptionSpec<T>,
    branch: DriftBranch,
) -> DriftIntegrals<T> {
    let g = Geometry::new(spec);
    let use_series = match branch {
        DriftBranch::Auto => g.l.abs() < T::lit(SMALL_L_THRESHOLD),
        DriftBranch::Series => true,
        DriftBranch::Direct => false,
    };
    if use_series {
        series_integrals(&g)
    } else {
        direct_integrals(&g)
    }
}

fn direct_integrals<T: Scalar>(g: &Geometry<T>) -> DriftIntegrals<T> {
    let (d2, l, q, pdf) = (g.d2, g.l, g.q, g.pdf_d2);
    let two = T::lit(2.0);
    let l2 = l * l;

    // N(d2 + L) - N(d2) - L phi(d2)
    let excess = normal_mass_excess(d2, l);
    let bracket = excess / l;
    let r1 = excess / l2;
    let j0 = pdf + bracket;

    // (phi(d2 + L) - phi(d2) - L phi'(d2)) / L^2
    let x = -l * (d2 + l * T::lit(0.5));
    let r2 = if x.abs() < T::lit(0.5) {
        pdf * (exp_minus_linear(x) - l2 * T::lit(0.5)) / l2
    } else {
        (norm_pdf(d2 + l) - pdf + d2 * l * pdf) / l2
    };

    DriftIntegrals {
        i1: g.strike_sqrt_t * bracket,
        i2: g.strike_sqrt_t / g.sigma0 * (j0 - two * q * r1 + two * r2 - (d2 * d2 + d2 * q) * pdf),
        bracket,
    }
}

/// Both integrals reduce to `int_0^1 poly(u) phi(d2 + L u) du`. Expanding
/// `phi(d2 + L u) = phi(d2) sum_n (-L u)^n He_n(d2) / n!` gives
/// `J_k = int_0^1 u^k phi(d2 + L u) du = phi(d2) sum_n a_n / (n + k + 1)`.
fn series_integrals<T: Scalar>(g: &Geometry<T>) -> DriftIntegrals<T> {
    const ORDER: usize = 6;
    let (d2, l, q) = (g.d2, g.l, g.q);

    // a_n = (-L)^n He_n(d2) / n!, via He_{n+1} = x He_n - n He_{n-1}.
    let mut j = [T::zero(); ORDER];
    let mut bracket_sum = T::zero();
    let (mut prev, mut cur) = (T::zero(), T::one());
    for n in 0..64 {
        let nf = T::lit(n as f64);
        for (k, jk) in j.iter_mut().enumerate() {
            *jk = *jk + cur / (nf + T::lit((k + 1) as f64));
        }
        if n > 0 {
            bracket_sum = bracket_sum + cur / (nf + T::one());
        }
        let next = (-l * d2 * cur - l * l * prev) / (nf + T::one());
        prev = cur;
        cur = next;
        if n >= 2 && cur.abs() <= T::epsilon() * T::lit(1e-3) && prev.abs() <= T::epsilon() {
            break;
        }
    }
    for jk in j.iter_mut() {
        *jk = *jk * g.pdf_d2;
    }

    // I1 = -K sqrt(T) L int (1-u) m phi(m) du, m = d2 + L u.
    let i1 = -g.strike_sqrt_t * l * (d2 * j[0] + (l - d2) * j[1] - l * j[2]);

    // I2 = K sqrt(T) L / sigma0 int P(u) phi(m) du with
    // P = (1-u)(2-3u) m + q (1-u)^2 - (1-u)^2 (m^3 + q m^2).
    let m = [d2, l];
    let one_minus_u_sq = [T::one(), T::lit(-2.0), T::one()];
    let m2 = poly_mul(&m, &m);
    let m3 = poly_mul(&m2, &m);
    let mut inner = m3.clone();
    for (c, v) in inner.iter_mut().zip(m2.iter()) {
        *c = *c + q * *v;
    }
    let mut p = poly_mul(&[T::lit(2.0), T::lit(-5.0), T::lit(3.0)], &m);
    poly_add(&mut p, &one_minus_u_sq.iter().map(|&c| q * c).collect::<Vec<_>>());
    poly_add(
        &mut p,
        &poly_mul(&one_minus_u_sq, &inner).iter().map(|&c| -c).collect::<Vec<_>>(),
    );
    let integral = p
        .iter()
        .zip(j.iter())
        .fold(T::zero(), |acc, (&c, &jk)| acc + c * jk);
    let i2 = g.strike_sqrt_t / g.sigma0 * l * integral;

    DriftIntegrals {
        i1,
        i2,
        bracket: g.pdf_d2 * bracket_sum,
    }
}

fn poly_mul<T: Scalar>(a: &[T], b: &[T]) -> Vec<T> {
    let mut out = vec![T::zero(); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (k, &y) in b.iter().enumerate() {
            out[i + k] = out[i + k] + x * y;
        }
    }
    out
}

fn poly_add<T: Scalar>(acc: &mut Vec<T>, other: &[T]) {
    if acc.len() < other.len() {
        acc.resize(other.len(), T::zero());
    }
    for (a, &b) in acc.iter_mut().zip(other) {
        *a = *a + b;
    }
}

/// `E[int_0^T d2F/dsigma dx dS]`.
pub fn integral_i1<T: Scalar>(spec: &OptionSpec<T>) -> T {
    drift_integrals(spec).i1
}

/// `E[int_0^T d3F/dsigma2 dx dS]`.
pub fn integral_i2<T: Scalar>(spec: &OptionSpec<T>) -> T {
    drift_integrals(spec).i2
}

fn state_at_inception<T: Scalar>(spec: &OptionSpec<T>) -> BsState<T> {
    BsState::new(spec.spot(), spec.strike(), spec.maturity(), spec.sigma0())
}

/// Bias of the premium for a driftless underlying (`eps`-exclusive):
/// `x phi(d1) { A[sigma sqrt T] + d1 d2 / (2 sigma0 sqrt T) Gamma[sigma sqrt T] }`,
/// i.e. `vega A + vomma Gamma / 2`.
pub fn bias_zero_drift<T: Scalar>(spec: &OptionSpec<T>, es: &ErrorStructure<T>) -> T {
    let state = state_at_inception(spec);
    let (d1, d2) = state.d1_d2();
    let q = state.total_vol();
    let (a_scaled, g_scaled) = es.scaled_by_sqrt_maturity(spec.maturity());
    spec.spot() * norm_pdf(d1) * (a_scaled + d1 * d2 / (T::lit(2.0) * q) * g_scaled)
}

/// Extra bias from a drifting underlying (`eps`-exclusive):
/// `I1 A[sigma] + I2 Gamma[sigma] / 2`.
pub fn drift_bias_correction<T: Scalar>(spec: &OptionSpec<T>, es: &ErrorStructure<T>) -> T {
    drift_bias_correction_with(spec, es, DriftBranch::Auto)
}

pub fn drift_bias_correction_with<T: Scalar>(
    spec: &OptionSpec<T>,
    es: &ErrorStructure<T>,
    branch: DriftBranch,
) -> T {
    let d = drift_integrals_with(spec, branch);
    d.i1 * es.bias_coeff() + T::lit(0.5) * d.i2 * es.var_coeff()
}

/// Variance of the expected P&L (`eps`-exclusive):
/// `{ x phi(d1) + K [ (N(d2+L) - N(d2)) / L - phi(d2) ] }^2 Gamma[sigma sqrt T]`.
pub fn gamma_call<T: Scalar>(spec: &OptionSpec<T>, es: &ErrorStructure<T>) -> T {
    let (d1, _) = state_at_inception(spec).d1_d2();
    let bracket = drift_integrals(spec).bracket;
    let sensitivity = spec.spot() * norm_pdf(d1) + spec.strike() * bracket;
    let (_, g_scaled) = es.scaled_by_sqrt_maturity(spec.maturity());
    sensitivity * sensitivity * g_scaled
}

/// Conditions under which the first-order quote leaves no-arbitrage bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuoteWarnings {
    pub bid_below_intrinsic: bool,
    pub mid_not_positive: bool,
}

impl QuoteWarnings {
    pub fn any(&self) -> bool {
        self.bid_below_intrinsic || self.mid_not_positive
    }
}

/// A decomposed perturbative quote.
///
/// The bias pieces and `variance_term` are `eps`-exclusive; the quote
/// applies `eps` once: `mid = bs_premium + eps * bias_total` and
/// `half_spread = k sqrt(eps * variance_term)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbsQuote<T> {
    pub bs_premium: T,
    pub bias_zero_drift: T,
    pub bias_drift_corr: T,
    pub bias_total: T,
    pub variance_term: T,
    pub epsilon: T,
    pub quantile_mult: T,
    pub mid: T,
    pub bid: T,
    pub ask: T,
    pub half_spread: T,
    pub spread: T,
    pub warnings: QuoteWarnings,
}

pub fn quote<T: Scalar>(
    spec: &OptionSpec<T>,
    es: &ErrorStructure<T>,
    qc: &QuoteConfig<T>,
) -> PbsQuote<T> {
    let bs_premium = state_at_inception(spec).call_price();
    let bias_zero = bias_zero_drift(spec, es);
    let bias_drift = drift_bias_correction(spec, es);
    let bias_total = bias_zero + bias_drift;
    let variance_term = gamma_call(spec, es);

    let eps = es.epsilon();
    let k = qc.quantile_mult();
    let mid = bs_premium + eps * bias_total;
    let half_spread = k * (eps * variance_term).sqrt();
    let bid = mid - half_spread;
    let ask = mid + half_spread;
    let intrinsic = (spec.spot() - spec.strike()).max(T::zero());

    PbsQuote {
        bs_premium,
        bias_zero_drift: bias_zero,
        bias_drift_corr: bias_drift,
        bias_total,
        variance_term,
        epsilon: eps,
        quantile_mult: k,
        mid,
        bid,
        ask,
        half_spread,
        spread: half_spread + half_spread,
        warnings: QuoteWarnings {
            bid_below_intrinsic: bid < intrinsic,
            mid_not_positive: mid <= T::zero(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::black_scholes::sigma_sensitivities;
    use proptest::prelude::*;

    fn spec(spot: f64, strike: f64, t: f64, sigma: f64, mu: f64) -> OptionSpec<f64> {
        OptionSpec::new(spot, strike, t, sigma, mu).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Plain closed forms, only trustworthy for moderate |L|.
    fn naive(s: &OptionSpec<f64>) -> (f64, f64) {
        use crate::special::norm_cdf;
        let q = s.sigma0() * s.maturity().sqrt();
        let d2 = (s.spot() / s.strike()).ln() / q - q / 2.0;
        let l = s.mu() * s.maturity().sqrt() / s.sigma0();
        let e = d2 + l;
        let dn = norm_cdf(e) - norm_cdf(d2);
        let c = s.strike() * s.maturity().sqrt();
        let i1 = -c * norm_pdf(d2) + c / l * dn;
        let i2 = c / s.sigma0()
            * ((1.0 / l - 2.0 * q / (l * l)) * dn
                + (-d2 * d2 - d2 * q + 2.0 * d2 / l + 2.0 * q / l - 2.0 / (l * l)) * norm_pdf(d2)
                + 2.0 / (l * l) * norm_pdf(e));
        (i1, i2)
    }

    /// Composite Simpson on the reduced one-dimensional integrands in u.
    fn reduced_quadrature(s: &OptionSpec<f64>) -> (f64, f64) {
        let q = s.sigma0() * s.maturity().sqrt();
        let d2 = (s.spot() / s.strike()).ln() / q - q / 2.0;
        let l = s.mu() * s.maturity().sqrt() / s.sigma0();
        let c = s.strike() * s.maturity().sqrt();
        let n = 4000;
        let h = 1.0 / n as f64;
        let (mut a1, mut a2) = (0.0, 0.0);
        for i in 0..=n {
            let u = i as f64 * h;
            let w = if i == 0 || i == n { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let m = d2 + l * u;
            let p = (1.0 - u) * (2.0 - 3.0 * u) * m + q * (1.0 - u).powi(2)
                - (1.0 - u).powi(2) * (m.powi(3) + q * m * m);
            a1 += w * (1.0 - u) * m * norm_pdf(m);
            a2 += w * p * norm_pdf(m);
        }
        (-c * l * a1 * h / 3.0, c * l / s.sigma0() * a2 * h / 3.0)
    }

    #[test]
    fn risk_premium_examples() {
        let r = cumulated_risk_premium(&spec(100.0, 100.0, 1.0, 0.2, 0.1));
        assert!((r.lambda - 0.5).abs() < 1e-15 && (r.cumulated - 0.5).abs() < 1e-15);
        let r = cumulated_risk_premium(&spec(100.0, 100.0, 1.0, 0.2, 0.0));
        assert_eq!((r.lambda, r.cumulated), (0.0, 0.0));
        let r = cumulated_risk_premium(&spec(100.0, 100.0, 1.0 / 12.0, 0.2, 0.2));
        assert!((r.lambda - 1.0).abs() < 1e-15);
        assert!((r.cumulated - 1.0 / 12.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn direct_branch_matches_naive_form_at_moderate_l() {
        for &(k, t, sig, mu) in &[
            (100.0, 1.0, 0.2, 0.1),
            (120.0, 1.0 / 12.0, 0.2, 0.05),
            (80.0, 0.25, 0.4, -0.05),
            (125.0, 1.0, 0.1, 0.2),
        ] {
            let s = spec(100.0, k, t, sig, mu);
            let d = drift_integrals_with(&s, DriftBranch::Direct);
            let (i1, i2) = naive(&s);
            assert!(rel(d.i1, i1) < 1e-10, "{k} {t} {sig} {mu}: {} vs {i1}", d.i1);
            assert!(rel(d.i2, i2) < 1e-10, "{k} {t} {sig} {mu}: {} vs {i2}", d.i2);
        }
    }

    #[test]
    fn reference_values_from_reduced_quadrature() {
        // Independent values (composite Simpson, 4000 panels) for two
        // reference cases; the full two-dimensional oracle lives in `oracle`.
        for &(k, t, mu) in &[(100.0, 1.0, 0.1), (120.0, 1.0 / 12.0, 0.05)] {
            let s = spec(100.0, k, t, 0.2, mu);
            let (q1, q2) = reduced_quadrature(&s);
            assert!(rel(integral_i1(&s), q1) < 1e-10);
            assert!(rel(integral_i2(&s), q2) < 1e-10);
        }
        // Frozen from the two-dimensional quadrature of the original integrands.
        let s = spec(100.0, 100.0, 1.0, 0.2, 0.1);
        assert!(rel(integral_i1(&s), -0.645_338_970_230_547) < 1e-9);
        assert!(rel(integral_i2(&s), 5.695_559_315_504) < 1e-9);
    }

    #[test]
    fn integrals_vanish_without_drift() {
        let s = spec(100.0, 95.0, 0.5, 0.3, 0.0);
        let d = drift_integrals(&s);
        assert_eq!((d.i1, d.i2, d.bracket), (0.0, 0.0, 0.0));
        let es = ErrorStructure::new(0.02, -1.5, 0.09).unwrap();
        assert_eq!(drift_bias_correction(&s, &es), 0.0);
    }

    #[test]
    fn small_positive_drift_makes_atm_i1_positive() {
        // d2 < 0 and L small: the average of phi over [d2, d2 + L] exceeds phi(d2).
        let s = spec(100.0, 100.0, 1.0, 0.2, 0.002);
        assert!(integral_i1(&s) > 0.0);
    }

    #[test]
    fn series_and_direct_agree_where_both_apply() {
        for &k in &[80.0, 95.0, 100.0, 110.0, 125.0] {
            for &l in &[1e-3, -1e-3, 5e-3, 2e-4] {
                let (t, sig) = (0.25, 0.2);
                let s = spec(100.0, k, t, sig, l * sig / t.sqrt());
                let a = drift_integrals_with(&s, DriftBranch::Series);
                let b = drift_integrals_with(&s, DriftBranch::Direct);
                assert!(rel(a.i1, b.i1) < 1e-11, "k={k} l={l}");
                assert!(rel(a.i2, b.i2) < 1e-10, "k={k} l={l} {} {}", a.i2, b.i2);
                assert!(rel(a.bracket, b.bracket) < 1e-11);
            }
        }
    }

    #[test]
    fn bias_zero_drift_examples() {
        let s = spec(100.0, 100.0, 1.0, 0.2, 0.0);
        let only_bias = ErrorStructure::new(0.02, -1.0, 0.0).unwrap();
        let (d1, _) = s.at(0.0).unwrap().d1_d2();
        let expected = -100.0 * norm_pdf(d1);
        assert!((bias_zero_drift(&s, &only_bias) - expected).abs() < 1e-12);
        assert!(bias_zero_drift(&s, &only_bias) < 0.0);

        // d1 d2 = 0 when ln(x/K) = sigma0^2 T / 2.
        let k = 100.0 / (0.02_f64).exp();
        let s0 = spec(100.0, k, 1.0, 0.2, 0.0);
        let only_var = ErrorStructure::new(0.02, 0.0, 0.3).unwrap();
        assert!(bias_zero_drift(&s0, &only_var).abs() < 1e-12);

        // vega A + vomma Gamma / 2.
        let es = ErrorStructure::new(0.02, -1.0, 1.0).unwrap();
        let g = sigma_sensitivities(&s, 0.0).unwrap();
        assert!((bias_zero_drift(&s, &es) - (-g.vega + 0.5 * g.vomma)).abs() < 1e-10);
    }

    #[test]
    fn gamma_call_identities() {
        let es = ErrorStructure::new(0.02, -1.0, 0.04).unwrap();
        let s0 = spec(100.0, 100.0, 1.0, 0.2, 0.0);
        let vega = sigma_sensitivities(&s0, 0.0).unwrap().vega;
        assert!(rel(gamma_call(&s0, &es), vega * vega * 0.04) < 1e-14);

        let none = ErrorStructure::new(0.02, -1.0, 0.0).unwrap();
        assert_eq!(gamma_call(&s0, &none), 0.0);

        let s = spec(100.0, 100.0, 1.0, 0.2, 0.1);
        let v = sigma_sensitivities(&s, 0.0).unwrap().vega + integral_i1(&s);
        assert!(rel(gamma_call(&s, &es), v * v * 0.04) < 1e-12);
    }

    #[test]
    fn quote_limits() {
        let s = spec(100.0, 100.0, 1.0 / 12.0, 0.2, 0.1);
        let tiny = ErrorStructure::new(1e-15, -1.0, 0.04).unwrap();
        let q = quote(&s, &tiny, &QuoteConfig::default());
        assert!((q.mid - q.bs_premium).abs() < 1e-12);
        assert!(q.spread < 1e-6);

        let es = ErrorStructure::reference(0.2);
        let q0 = quote(&s, &es, &QuoteConfig::new(0.0).unwrap());
        assert_eq!(q0.bid, q0.mid);
        assert_eq!(q0.ask, q0.mid);
        assert_eq!(q0.spread, 0.0);
    }

    #[test]
    fn reference_quote_is_below_black_scholes_at_the_money() {
        let s = spec(100.0, 100.0, 1.0 / 12.0, 0.2, 0.0);
        let q = quote(&s, &ErrorStructure::reference(0.2), &QuoteConfig::default());
        assert!(q.mid < q.bs_premium);
        assert!(!q.warnings.any());
    }

    #[test]
    fn f32_quote_tracks_f64() {
        let s32 = OptionSpec::new(100.0_f32, 102.0, 1.0 / 12.0, 0.2, 0.1).unwrap();
        let s64 = spec(100.0, 102.0, 1.0 / 12.0, 0.2, 0.1);
        let q32 = quote(&s32, &ErrorStructure::reference(0.2_f32), &QuoteConfig::default());
        let q64 = quote(&s64, &ErrorStructure::reference(0.2), &QuoteConfig::default());
        assert!((q32.mid as f64 - q64.mid).abs() < 1e-4);
        assert!((q32.spread as f64 - q64.spread).abs() < 1e-4);
    }

    proptest! {
        #[test]
        fn quote_decomposition_is_exact(
            m in 0.7..1.4_f64, t in 0.02..3.0_f64, sig in 0.05..0.6_f64,
            mu in -0.3..0.3_f64, eps in 1e-4..0.05_f64, k in 0.0..3.0_f64,
        ) {
            let s = spec(100.0, 100.0 * m, t, sig, mu);
            let es = ErrorStructure::new(eps, -5.0 * sig, sig * sig).unwrap();
            let q = quote(&s, &es, &QuoteConfig::new(k).unwrap());
            prop_assert!(q.spread >= 0.0 && q.variance_term >= 0.0);
            prop_assert!((q.mid - q.bs_premium - eps * q.bias_total).abs() <= 4.0 * f64::EPSILON * q.mid.abs().max(q.bs_premium));
            prop_assert_eq!(q.bias_total, q.bias_zero_drift + q.bias_drift_corr);
            prop_assert!(q.bid <= q.mid && q.mid <= q.ask);
        }

        #[test]
        fn corrections_continuous_through_zero_drift(
            m in 0.8..1.25_f64, t in 0.05..2.0_f64, sig in 0.1..0.5_f64,
        ) {
            let es = ErrorStructure::new(0.02, -5.0 * sig, sig * sig).unwrap();
            let at = |l: f64| drift_bias_correction(&spec(100.0, 100.0 * m, t, sig, l * sig / t.sqrt()), &es);
            // c(L) = a L + b L^2 + O(L^3): the fitted b must agree across scales.
            let slope = (at(1e-6) - at(-1e-6)) / 2e-6;
            let curvature = |l: f64| (at(l) / l - slope) / l;
            let reference = curvature(1e-3);
            for &l in &[1e-4, 1e-5, -1e-4] {
                let b = curvature(l);
                prop_assert!((b - reference).abs() <= 0.2 * reference.abs() + 1e-2 * slope.abs() + 1e-6);
            }
        }
    }
}
