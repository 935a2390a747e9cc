//! Gauss-Legendre rules and a graded composite rule for Gaussian
//! expectations with a sharp interior feature.

use std::f64::consts::PI;

use crate::special::norm_pdf;

/// `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n` from the Chebyshev-like guess
    /// `cos(pi (i + 3/4) / (n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d.is_finite() { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `(node, weight)` pairs mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Panel edges on `[a, b]` that grow geometrically away from `center`:
/// the first panels have width `width`, each next one doubles, capped at
/// `max_panel`. Resolves features of scale `width` without wasting nodes
/// elsewhere.
pub fn graded_breakpoints(a: f64, b: f64, center: f64, width: f64, max_panel: f64) -> Vec<f64> {
    debug_assert!(b > a && max_panel > 0.0);
    let c = center.clamp(a, b);
    let mut size = width.max((center - c).abs()).clamp(1e-10, max_panel);

    let mut right = Vec::new();
    let mut x = c;
    let mut step = size;
    while x + step < b {
        x += step;
        right.push(x);
        step = (2.0 * step).min(max_panel);
    }
    let mut left = Vec::new();
    x = c;
    while x - size > a {
        x -= size;
        left.push(x);
        size = (2.0 * size).min(max_panel);
    }

    let mut edges = Vec::with_capacity(left.len() + right.len() + 3);
    edges.push(a);
    edges.extend(left.into_iter().rev());
    if c > a && c < b {
        edges.push(c);
    }
    edges.extend(right);
    edges.push(b);
    edges
}

/// `E[h(Y)]` for standard normal `Y`, truncated to `[a, b]`, with composite
/// Gauss-Legendre on the panels given by `edges`.
pub fn gaussian_expectation<F: FnMut(f64) -> f64>(rule: &GaussLegendre, edges: &[f64], mut h: F) -> f64 {
    edges
        .windows(2)
        .map(|p| rule.integrate(p[0], p[1], |y| h(y) * norm_pdf(y)))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_rules_match_tables() {
        let r = GaussLegendre::new(2);
        assert!((r.nodes[1] - 1.0 / 3.0_f64.sqrt()).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = GaussLegendre::new(3);
        assert!((r.nodes[2] - 0.6_f64.sqrt()).abs() < 1e-15);
        assert!(r.nodes[1].abs() < 1e-16);
        assert!((r.weights[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in [1, 4, 9, 20, 64] {
            let r = GaussLegendre::new(n);
            let total: f64 = r.weights.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let exact = if deg % 2 == 0 { 2.0 / (deg as f64 + 1.0) } else { 0.0 };
            let v = r.integrate(-1.0, 1.0, |x| x.powi(deg as i32 - 1) * x);
            assert!((v - exact).abs() < 1e-12, "n={n}");
            let even = r.integrate(0.0, 2.0, |x| x.powi(2 * n as i32 - 2));
            let exact_even = 2f64.powi(2 * n as i32 - 1) / (2.0 * n as f64 - 1.0);
            assert!((even / exact_even - 1.0).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn graded_edges_are_increasing_and_cover_the_domain() {
        for &(c, w) in &[(0.3, 1e-6), (-20.0, 0.1), (20.0, 1e-3), (0.0, 5.0)] {
            let e = graded_breakpoints(-10.0, 10.0, c, w, 1.0);
            assert_eq!(e[0], -10.0);
            assert_eq!(*e.last().unwrap(), 10.0);
            assert!(e.windows(2).all(|p| p[1] > p[0]), "c={c} w={w}");
            assert!(e.windows(2).all(|p| p[1] - p[0] <= 1.0 + 1e-12));
            assert!(e.len() < 80);
        }
    }

    #[test]
    fn gaussian_expectation_of_a_sharp_step() {
        // E[N((Y - c) / w)] = N(-c / sqrt(1 + w^2)).
        let rule = GaussLegendre::new(16);
        let (c, w) = (0.4, 1e-4);
        let edges = graded_breakpoints(-10.0, 10.0, c, w, 1.0);
        let v = gaussian_expectation(&rule, &edges, |y| crate::special::norm_cdf((y - c) / w));
        let exact = crate::special::norm_cdf(-c / (1.0 + w * w).sqrt());
        assert!((v - exact).abs() < 1e-13, "{v} {exact}");
    }
}
