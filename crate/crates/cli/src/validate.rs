//! Self-check of the closed forms against the numerical oracles.
//!
//! The closed forms under test are passed in as [`ClosedForms`], so a
//! deliberately broken implementation can be checked to fail.

use std::fmt::Write as _;
use std::time::Instant;

use pbs_core::black_scholes::{BsState, OptionSpec, SigmaSensitivities};
use pbs_core::error_structure::ErrorStructure;
use pbs_core::oracle::{empirical_bias_variance, hedge_pnl, quad_expected_integral, McConfig, MixedOrder, PnlQuadrature, QuadConfig};
use pbs_core::pricing;
use pbs_core::special::{norm_cdf, norm_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Fast,
    Full,
}

/// Failure categories, OR-ed into the exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Category {
    Quadrature = 1,
    FiniteDifference = 2,
    Continuity = 4,
    MonteCarlo = 8,
}

/// Exit status when any check fails: this base plus the category bits.
pub const FAILURE_BASE: u8 = 16;

/// The implementations being validated.
#[derive(Clone, Copy)]
pub struct ClosedForms {
    pub i1: fn(&OptionSpec<f64>) -> f64,
    pub i2: fn(&OptionSpec<f64>) -> f64,
    pub sensitivities: fn(&BsState<f64>) -> SigmaSensitivities<f64>,
    pub drift_bias_correction: fn(&OptionSpec<f64>, &ErrorStructure<f64>) -> f64,
}

impl Default for ClosedForms {
    fn default() -> Self {
        Self {
            i1: pricing::integral_i1,
            i2: pricing::integral_i2,
            sensitivities: |s| s.sensitivities(),
            drift_bias_correction: pricing::drift_bias_correction,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub category: Category,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub note: String,
}

impl CheckResult {
    fn new(name: &'static str, category: Category, worst: f64, tolerance: f64, note: String) -> Self {
        Self {
            name,
            category,
            worst,
            tolerance,
            passed: worst <= tolerance,
            note,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub level: Level,
    pub checks: Vec<CheckResult>,
    pub seconds: f64,
}

impl Report {
    pub fn failure_mask(&self) -> u8 {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .fold(0, |mask, c| mask | c.category as u8)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<34} {:>11} {:>11}  status", "check", "worst", "tolerance");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{:<34} {:>11.3e} {:>11.1e}  {}  {}",
                c.name,
                c.worst,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" },
                c.note
            );
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        let _ = writeln!(
            s,
            "{} checks, {failed} failed, {:.2}s ({:?} level)",
            self.checks.len(),
            self.seconds,
            self.level
        );
        s
    }
}

fn spec(m: f64, t: f64, sigma: f64, mu: f64) -> OptionSpec<f64> {
    OptionSpec::new(100.0, 100.0 * m, t, sigma, mu).expect("grid points are valid")
}

fn rel(a: f64, b: f64) -> f64 {
    let err = (a - b).abs() / b.abs();
    if err.is_nan() {
        f64::INFINITY
    } else {
        err
    }
}

struct Grid {
    moneyness: &'static [f64],
    maturities: &'static [f64],
    sigmas: &'static [f64],
    mus: &'static [f64],
}

const FAST_GRID: Grid = Grid {
    moneyness: &[0.8, 1.0, 1.25],
    maturities: &[1.0 / 12.0, 1.0],
    sigmas: &[0.2],
    mus: &[-0.01, 0.1],
};

const FULL_GRID: Grid = Grid {
    moneyness: &[0.8, 0.9, 1.0, 1.1, 1.25],
    maturities: &[1.0 / 12.0, 0.25, 1.0],
    sigmas: &[0.1, 0.2, 0.4],
    mus: &[0.01, -0.01, 0.05, 0.1, 0.2],
};

fn check_quadrature(forms: &ClosedForms, grid: &Grid) -> CheckResult {
    let qc = QuadConfig::default();
    let (mut worst, mut at, mut cases) = (0.0_f64, String::new(), 0);
    for &m in grid.moneyness {
        for &t in grid.maturities {
            for &sigma in grid.sigmas {
                for &mu in grid.mus {
                    let s = spec(m, t, sigma, mu);
                    cases += 1;
                    for (order, closed) in [(MixedOrder::Second, (forms.i1)(&s)), (MixedOrder::Third, (forms.i2)(&s))] {
                        let err = quad_expected_integral(&s, order, &qc).map_or(f64::INFINITY, |q| rel(closed, q.value));
                        if err > worst || err.is_nan() {
                            worst = err;
                            at = format!("{order:?} at m={m} T={t:.4} sigma={sigma} mu={mu}");
                        }
                    }
                }
            }
        }
    }
    CheckResult::new("drift integrals vs quadrature", Category::Quadrature, worst, 1e-6, format!("{cases} cases, worst {at}"))
}

fn richardson<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

/// `N(d)` up to a constant, on the tail that keeps relative precision.
fn tail_cdf(d: f64) -> f64 {
    if d > 0.0 {
        -norm_sf(d)
    } else {
        norm_cdf(d)
    }
}

fn time_value(s: &BsState<f64>) -> f64 {
    let (d1, d2) = s.d1_d2();
    if d1 > 0.0 {
        s.strike * norm_sf(d2) - s.spot * norm_sf(d1)
    } else {
        s.spot * norm_cdf(d1) - s.strike * norm_cdf(d2)
    }
}

fn check_sensitivities(forms: &ClosedForms, grid: &Grid) -> CheckResult {
    let mut worst = 0.0_f64;
    let mut at = String::new();
    for &m in grid.moneyness {
        for &t in grid.maturities {
            for &sigma in grid.sigmas {
                let k = 100.0 * m;
                let st = |x: f64, k: f64, v: f64| BsState::new(x, k, t, v);
                let g = (forms.sensitivities)(&st(100.0, k, sigma));
                let (hs, hx) = (1e-4 * sigma, 1e-2);
                let fields = [
                    ("vega", g.vega, richardson(|v| time_value(&st(100.0, k, v)), sigma, hs)),
                    ("vomma", g.vomma, richardson(|v| (forms.sensitivities)(&st(100.0, k, v)).vega, sigma, hs)),
                    ("vanna", g.vanna, richardson(|v| tail_cdf(st(100.0, k, v).d1_d2().0), sigma, hs)),
                    ("dvomma_dx", g.dvomma_dx, richardson(|x| (forms.sensitivities)(&st(x, k, sigma)).vomma, 100.0, hx)),
                    ("density", g.density, richardson(|kk| -tail_cdf(st(100.0, kk, sigma).d1_d2().1), k, 1e-4 * k)),
                ];
                for (name, analytic, fd) in fields {
                    let err = rel(fd, analytic);
                    if err > worst {
                        worst = err;
                        at = format!("{name} at m={m} T={t:.4} sigma={sigma}");
                    }
                }
            }
        }
    }
    CheckResult::new("sensitivities vs finite differences", Category::FiniteDifference, worst, 1e-5, format!("worst {at}"))
}

fn check_pnl_derivatives(forms: &ClosedForms, points: &[(f64, f64, f64, f64)]) -> Vec<CheckResult> {
    let qc = QuadConfig::default();
    let (mut w0, mut w1, mut w2) = (0.0_f64, 0.0_f64, 0.0_f64);
    for &(m, t, sigma, mu) in points {
        let s = spec(m, t, sigma, mu);
        let h = 1e-3 * sigma;
        let values = PnlQuadrature::new(&s, &qc).and_then(|q| {
            Ok([q.estimate(sigma - h)?.value, q.estimate(sigma)?.value, q.estimate(sigma + h)?.value])
        });
        let Ok([gm, g0, gp]) = values else {
            w0 = f64::INFINITY;
            continue;
        };
        let greeks = (forms.sensitivities)(&s.at(0.0).expect("maturity is positive"));
        w0 = w0.max(g0.abs() / s.spot());
        w1 = w1.max(rel((gp - gm) / (2.0 * h), greeks.vega + (forms.i1)(&s)));
        w2 = w2.max(rel((gp - 2.0 * g0 + gm) / (h * h), greeks.vomma + (forms.i2)(&s)));
    }
    let note = format!("{} points", points.len());
    vec![
        CheckResult::new("expected P&L at true vol / spot", Category::FiniteDifference, w0, 1e-8, note.clone()),
        CheckResult::new("first derivative = vega + I1", Category::FiniteDifference, w1, 1e-4, note.clone()),
        CheckResult::new("second derivative = vomma + I2", Category::FiniteDifference, w2, 1e-3, note),
    ]
}

fn check_continuity(forms: &ClosedForms, grid: &Grid) -> CheckResult {
    let mut worst = 0.0_f64;
    for &m in grid.moneyness {
        for &t in grid.maturities {
            for &sigma in grid.sigmas {
                let es = ErrorStructure::new(0.02, -5.0 * sigma, sigma * sigma).expect("valid structure");
                for sign in [1.0, -1.0] {
                    let ratios: Vec<f64> = [1e-3, 1e-4, 1e-5, 1e-6]
                        .iter()
                        .map(|&l| {
                            let l = sign * l;
                            (forms.drift_bias_correction)(&spec(m, t, sigma, l * sigma / t.sqrt()), &es) / l
                        })
                        .collect();
                    let hi = ratios.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let lo = ratios.iter().cloned().fold(f64::INFINITY, f64::min);
                    worst = worst.max(rel(hi, lo).max(rel(lo, hi)));
                }
                let at_zero = (forms.drift_bias_correction)(&spec(m, t, sigma, 0.0), &es);
                if at_zero != 0.0 {
                    worst = f64::INFINITY;
                }
            }
        }
    }
    CheckResult::new("drift correction linear as L -> 0", Category::Continuity, worst, 0.2, "ratio spread over |L| in 1e-3..1e-6".into())
}

fn check_monte_carlo(seed: u64) -> Vec<CheckResult> {
    let s = spec(1.0, 1.0 / 12.0, 0.2, 0.1);
    let runs: Vec<_> = [50, 200, 800]
        .iter()
        .map(|&steps| hedge_pnl(&s, 0.2, &McConfig { paths: 20_000, steps, seed }))
        .collect();
    let mut out = Vec::new();
    match runs.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(stats) => {
            let worst_mean = stats.iter().map(|st| st.mean.abs() / st.std_error).fold(0.0, f64::max);
            let worst_ratio = stats
                .windows(2)
                .map(|w| (w[0].variance / w[1].variance / 4.0 - 1.0).abs())
                .fold(0.0, f64::max);
            out.push(CheckResult::new("hedge P&L mean in standard errors", Category::MonteCarlo, worst_mean, 3.0, format!("seed {seed}")));
            out.push(CheckResult::new("hedge variance ratio vs 4x", Category::MonteCarlo, worst_ratio, 0.2, "steps 50/200/800".into()));
        }
        Err(e) => out.push(CheckResult::new("hedge P&L simulation", Category::MonteCarlo, f64::INFINITY, 0.0, e.to_string())),
    }

    let eps = 1e-4;
    let mut worst = 0.0_f64;
    for (i, &(m, t, sigma, mu)) in [(1.0, 1.0 / 12.0, 0.2, 0.1), (1.1, 1.0, 0.3, 0.2)].iter().enumerate() {
        let s = spec(m, t, sigma, mu);
        let es = ErrorStructure::new(eps, -5.0 * sigma, sigma * sigma).expect("valid structure");
        let q = pricing::quote(&s, &es, &pbs_core::QuoteConfig::default());
        match empirical_bias_variance(&s, &es, 10_000, seed.wrapping_add(i as u64), &QuadConfig::default()) {
            Ok(mo) => {
                let slack_b = 3.0 * mo.bias_se + 10.0 * eps * eps;
                let slack_v = 3.0 * mo.variance_se + 10.0 * eps * eps;
                worst = worst
                    .max((mo.bias - eps * q.bias_total).abs() / slack_b)
                    .max((mo.variance - eps * q.variance_term).abs() / slack_v);
            }
            Err(_) => worst = f64::INFINITY,
        }
    }
    out.push(CheckResult::new(
        "sampled bias/variance vs quote",
        Category::MonteCarlo,
        worst,
        1.0,
        "deviation in units of 3 SE + 10 eps^2".into(),
    ));
    out
}

pub fn run(level: Level, seed: u64, forms: &ClosedForms) -> Report {
    let start = Instant::now();
    let grid = match level {
        Level::Fast => &FAST_GRID,
        Level::Full => &FULL_GRID,
    };
    let fd_points: &[(f64, f64, f64, f64)] = match level {
        Level::Fast => &[(1.0, 1.0, 0.2, 0.1), (1.1, 0.25, 0.3, -0.1)],
        Level::Full => &[
            (1.0, 1.0, 0.2, 0.1),
            (1.0, 1.0 / 12.0, 0.2, 0.2),
            (0.9, 0.25, 0.2, 0.05),
            (1.1, 0.25, 0.3, 0.1),
            (0.8, 1.0, 0.4, 0.2),
            (1.25, 1.0, 0.4, -0.1),
            (0.95, 0.5, 0.15, 0.15),
            (1.05, 1.0 / 12.0, 0.25, -0.05),
            (1.0, 2.0, 0.2, 0.05),
            (1.15, 0.5, 0.2, 0.3),
        ],
    };

    let mut checks = vec![check_quadrature(forms, grid), check_sensitivities(forms, &FULL_GRID)];
    checks.extend(check_pnl_derivatives(forms, fd_points));
    checks.push(check_continuity(forms, grid));
    if level == Level::Full {
        checks.extend(check_monte_carlo(seed));
    }
    Report {
        level,
        checks,
        seconds: start.elapsed().as_secs_f64(),
    }
}
