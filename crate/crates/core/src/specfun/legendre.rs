use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 64;

/// Nodes and weights of an N-point Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Nodes in strictly increasing order, symmetric about zero.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(b - a)/2 * sum_i w_i f((b - a)/2 z_i + (a + b)/2)`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(z, w)| w * f(half * z + mid))
            .sum::<f64>()
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let dp = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

fn build_rule(n: usize) -> QuadratureRule {
    match n {
        1 => {
            return QuadratureRule {
                order: 1,
                nodes: vec![0.0],
                weights: vec![2.0],
            }
        }
        2 => {
            let z = 3f64.sqrt() / 3.0;
            return QuadratureRule {
                order: 2,
                nodes: vec![-z, z],
                weights: vec![1.0, 1.0],
            };
        }
        _ => {}
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    // Newton on the positive roots; the negative half is mirrored.
    for i in 0..n / 2 {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d.is_finite() { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_with_derivative(n, 0.0);
        nodes[n / 2] = 0.0;
        weights[n / 2] = 2.0 / (d * d);
    }
    QuadratureRule {
        order: n,
        nodes,
        weights,
    }
}

fn rules() -> &'static [QuadratureRule] {
    static RULES: OnceLock<Vec<QuadratureRule>> = OnceLock::new();
    RULES.get_or_init(|| (1..=MAX_ORDER).map(build_rule).collect())
}

/// The order-`n` Gauss-Legendre rule, `1 <= n <= 64`. Rules are built once and shared.
pub fn gauss_legendre_rule(n: usize) -> Result<&'static QuadratureRule> {
    if !(1..=MAX_ORDER).contains(&n) {
        return Err(Error::Range {
            what: "Gauss-Legendre order",
            value: n as f64,
            range: "1..=64",
        });
    }
    Ok(&rules()[n - 1])
}
