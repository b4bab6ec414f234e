//! Gaussian quadrature rules.
//!
//! Gauss–Hermite rules are normalized for the standard normal density `φ`, so
//! `Σ wᵢ f(yᵢ) ≈ ∫ f(y) φ(y) dy` and the weights sum to one. Nodes and weights
//! come from the Golub–Welsch construction: the nodes are the eigenvalues of the
//! symmetric tridiagonal Jacobi matrix of the probabilists' Hermite polynomials
//! (zero diagonal, off-diagonal `√k`), the weights are the squared first
//! components of the normalized eigenvectors.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

pub const MIN_NODES: usize = 3;
pub const MAX_NODES: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ wᵢ f(yᵢ)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&y, &w)| w * f(y))
            .sum()
    }
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Hermite rule with `n` nodes for the standard normal weight. Rules are
/// computed once per `n` and shared.
pub fn gauss_hermite_rule(n: usize) -> Result<Arc<QuadratureRule>> {
    if !(MIN_NODES..=MAX_NODES).contains(&n) {
        return Err(Error::invalid(
            "nodes",
            format!("{n} is outside [{MIN_NODES}, {MAX_NODES}]"),
        ));
    }
    if let Some(rule) = cache().lock().expect("rule cache poisoned").get(&n) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_gauss_hermite(n));
    let mut guard = cache().lock().expect("rule cache poisoned");
    Ok(Arc::clone(guard.entry(n).or_insert(rule)))
}

fn build_gauss_hermite(n: usize) -> QuadratureRule {
    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (1..n).map(|k| (k as f64).sqrt()).collect();
    off.push(0.0);
    let mut first_row = vec![0.0; n];
    first_row[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut off, &mut first_row);

    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first_row.into_iter().map(|z| z * z))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Enforce the exact symmetry of the rule about zero.
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (pairs[j].0 - pairs[i].0);
        let w = 0.5 * (pairs[i].1 + pairs[j].1);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        weights[n / 2] = pairs[n / 2].1;
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    QuadratureRule { nodes, weights }
}

/// Implicit QL with Wilkinson shifts on a symmetric tridiagonal matrix.
///
/// `diag` holds the diagonal and is overwritten with the eigenvalues. `off[i]`
/// couples rows `i` and `i + 1` (the last entry is scratch). Only the first row
/// of the accumulated eigenvector matrix is tracked, in `first_row`.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first_row: &mut [f64]) {
    let n = diag.len();
    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() + dd == dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            assert!(iterations <= 100, "tridiagonal QL failed to converge");

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;

                let z = first_row[i + 1];
                first_row[i + 1] = s * first_row[i] + c * z;
                first_row[i] = c * first_row[i] - s * z;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
}

/// Gauss–Legendre rule on `[-1, 1]` with `n ≥ 1` nodes.
pub fn gauss_legendre_rule(n: usize) -> QuadratureRule {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
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
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    QuadratureRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
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

/// Composite Gauss–Legendre integral of `f` over `[a, b]` using `panels`
/// equal panels of the given rule.
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    rule: &QuadratureRule,
    a: f64,
    b: f64,
    panels: usize,
    mut f: F,
) -> f64 {
    if b <= a || panels == 0 {
        return 0.0;
    }
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    (0..panels)
        .map(|k| {
            let mid = a + (k as f64 + 0.5) * width;
            half * rule.integrate(|t| f(mid + half * t))
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn double_factorial(k: u64) -> f64 {
        (1..=k).rev().step_by(2).map(|v| v as f64).product()
    }

    #[test]
    fn rejects_out_of_range_sizes() {
        assert!(gauss_hermite_rule(2).is_err());
        assert!(gauss_hermite_rule(1025).is_err());
        assert!(gauss_hermite_rule(3).is_ok());
    }

    #[test]
    fn weights_sum_to_one_and_nodes_symmetric() {
        for n in [3, 4, 5, 20, 201, 402, 1024] {
            let rule = gauss_hermite_rule(n).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 1.0).abs() <= 1e-14, "n={n} sum={total}");
            for i in 0..n {
                assert_eq!(rule.nodes()[i], -rule.nodes()[n - 1 - i]);
            }
        }
    }

    #[test]
    fn small_rule_matches_known_nodes() {
        // He_3(y) = y³ − 3y, roots 0 and ±√3, weights 1/6, 2/3, 1/6.
        let rule = gauss_hermite_rule(3).unwrap();
        assert_relative_eq!(rule.nodes()[2], 3f64.sqrt(), max_relative = 1e-14);
        assert!(rule.nodes()[1].abs() < 1e-15);
        assert_relative_eq!(rule.weights()[0], 1.0 / 6.0, max_relative = 1e-13);
        assert_relative_eq!(rule.weights()[1], 2.0 / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn second_and_eighth_moments() {
        for n in [3, 5, 8, 201] {
            let rule = gauss_hermite_rule(n).unwrap();
            assert_relative_eq!(rule.integrate(|y| y * y), 1.0, max_relative = 1e-12);
        }
        for n in [5, 9, 201, 402] {
            let rule = gauss_hermite_rule(n).unwrap();
            assert_relative_eq!(rule.integrate(|y| y.powi(8)), 105.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn even_moments_exact_up_to_degree_2n_minus_2() {
        for n in [3usize, 6, 10, 15] {
            let rule = gauss_hermite_rule(n).unwrap();
            for k in (0..=(2 * n - 2)).step_by(2) {
                let exact = if k == 0 {
                    1.0
                } else {
                    double_factorial(k as u64 - 1)
                };
                let got = rule.integrate(|y| y.powi(k as i32));
                assert_relative_eq!(got, exact, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn node_doubling_on_smooth_log() {
        let a = gauss_hermite_rule(201)
            .unwrap()
            .integrate(|y| (2.0 + 0.1 * y * y).ln());
        let b = gauss_hermite_rule(402)
            .unwrap()
            .integrate(|y| (2.0 + 0.1 * y * y).ln());
        assert!((a - b).abs() <= 1e-12 * a.abs());
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let rule = gauss_legendre_rule(20);
        let total: f64 = rule.weights().iter().sum();
        assert_relative_eq!(total, 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            integrate_interval(&rule, 0.0, 2.0, 3, |x| x.powi(7)),
            32.0,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            integrate_interval(&rule, -1.0, 3.0, 4, |x| (-x * x).exp()),
            0.5 * std::f64::consts::PI.sqrt() * (erf_ref(3.0) + erf_ref(1.0)),
            max_relative = 1e-12
        );
    }

    // erf via its Maclaurin series; adequate for |x| <= 3.
    fn erf_ref(x: f64) -> f64 {
        let mut term = x;
        let mut sum = x;
        for k in 1..200 {
            term *= -x * x / k as f64;
            sum += term / (2 * k + 1) as f64;
        }
        2.0 / std::f64::consts::PI.sqrt() * sum
    }
}
