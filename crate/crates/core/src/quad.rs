//! Gauss-Legendre quadrature, fixed order and adaptive.

use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            // Newton iteration from the Chebyshev-like initial guess.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d.is_finite() {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let prev = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * p - prev) / (x * x - 1.0);
    (p, d)
}

/// Adaptive bisection with a Gauss-Legendre rule: an interval is accepted
/// when its estimate agrees with the sum over its two halves to within
/// `tol * max(1, |total|)`.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Usage("quadrature tolerance must be positive".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let rule = GaussLegendre::new(10);
    let whole = rule.integrate(a, b, &f);
    let value = refine(&rule, &f, a, b, whole, tol, max_depth)?;
    if !value.is_finite() {
        return Err(Error::Evaluation(format!("quadrature on [{a}, {b}] produced {value}")));
    }
    Ok(value)
}

fn refine(
    rule: &GaussLegendre,
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let left = rule.integrate(a, m, f);
    let right = rule.integrate(m, b, f);
    let split = left + right;
    if (split - whole).abs() <= tol * split.abs().max(1.0) {
        return Ok(split);
    }
    if depth == 0 {
        return Err(Error::Evaluation(format!(
            "adaptive quadrature did not converge on [{a}, {b}] (estimates {whole} vs {split})"
        )));
    }
    Ok(refine(rule, f, a, m, left, tol, depth - 1)? + refine(rule, f, m, b, right, tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two_and_nodes_are_symmetric() {
        for n in [1, 2, 5, 10, 21] {
            let r = GaussLegendre::new(n);
            assert!((r.weights.iter().sum::<f64>() - 2.0).abs() < 1e-14, "n = {n}");
            for (x, y) in r.nodes.iter().zip(r.nodes.iter().rev()) {
                assert!((x + y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let r = GaussLegendre::new(5);
        for k in 0..10 {
            let got = r.integrate(-0.5, 2.0, |x| x.powi(k));
            let want = (2f64.powi(k + 1) - (-0.5f64).powi(k + 1)) / (k + 1) as f64;
            assert!((got - want).abs() < 1e-13 * want.abs().max(1.0), "k = {k}");
        }
    }

    #[test]
    fn adaptive_handles_peaked_integrands() {
        let v = adaptive(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, 1e-13, 40).unwrap();
        let want = 2.0 * (1.0 / 1e-4f64.sqrt()) * (1.0 / 1e-4f64.sqrt()).atan();
        assert!((v - want).abs() < 1e-10 * want);
        assert_eq!(adaptive(|x| x, 1.0, 1.0, 1e-12, 10).unwrap(), 0.0);
        assert!(adaptive(|x| 1.0 / x.abs().sqrt(), 0.0, 1.0, 1e-15, 3).is_err());
    }
}
