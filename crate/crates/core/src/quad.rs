//! Gauss–Jacobi and Gauss–Legendre quadrature.
//!
//! Rules are generated by the Golub–Welsch algorithm: the nodes are the
//! eigenvalues of the symmetric tridiagonal Jacobi matrix of the orthogonal
//! polynomial recurrence, and the weights come from the first components of
//! the eigenvectors. Rules are cached by `(n, alpha, beta)`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;

/// Natural logarithm of the Gamma function (Lanczos, g = 7, 9 coefficients).
///
/// Accurate to roughly 2e-10 relative over the positive axis, which is all
/// the Jacobi-weight normalisation needs.
pub fn ln_gamma(x: f64) -> f64 {
    #[allow(clippy::excessive_precision)] // published constants, kept verbatim
    const P: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    if x < 0.5 {
        // Reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        let s = (std::f64::consts::PI * x).sin();
        return std::f64::consts::PI.ln() - s.abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut t = P[0];
    for (i, &p) in P.iter().enumerate().skip(1) {
        t += p / (x + i as f64);
    }
    let w = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * w.ln() - w + t.ln()
}

/// Euler Beta function via `ln_gamma`.
pub fn beta(a: f64, b: f64) -> f64 {
    (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)).exp()
}

/// A quadrature rule on `[-1, 1]` with weight `(1-x)^alpha (1+x)^beta`.
#[derive(Debug, Clone)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn jacobi_rule_uncached(n: usize, alpha: f64, beta_e: f64) -> Rule {
    assert!(n >= 1 && alpha > -1.0 && beta_e > -1.0);
    let ab = alpha + beta_e;
    let mut diag = vec![0.0f64; n];
    let mut off = vec![0.0f64; n.saturating_sub(1)];
    diag[0] = (beta_e - alpha) / (ab + 2.0);
    for k in 1..n {
        let kf = k as f64;
        let denom = (2.0 * kf + ab) * (2.0 * kf + ab + 2.0);
        diag[k] = if denom != 0.0 {
            (beta_e * beta_e - alpha * alpha) / denom
        } else {
            0.0
        };
        let b2 = if k == 1 {
            4.0 * (1.0 + alpha) * (1.0 + beta_e) / ((2.0 + ab) * (2.0 + ab) * (3.0 + ab))
        } else {
            4.0 * kf * (kf + alpha) * (kf + beta_e) * (kf + ab)
                / ((2.0 * kf + ab) * (2.0 * kf + ab) * (2.0 * kf + ab + 1.0) * (2.0 * kf + ab - 1.0))
        };
        off[k - 1] = b2.sqrt();
    }
    // mu0 = integral of the weight over [-1, 1]
    let mu0 = (ab + 1.0) * 2.0f64.ln() + ln_gamma(alpha + 1.0) + ln_gamma(beta_e + 1.0)
        - ln_gamma(ab + 2.0);
    let mu0 = mu0.exp();

    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = diag[i];
        if i + 1 < n {
            m[(i, i + 1)] = off[i];
            m[(i + 1, i)] = off[i];
        }
    }
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let node = eig.eigenvalues[j];
            let first = eig.eigenvectors[(0, j)];
            (node, mu0 * first * first)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Rule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

type RuleKey = (usize, u64, u64);

fn cache() -> &'static Mutex<HashMap<RuleKey, Arc<Rule>>> {
    static CACHE: OnceLock<Mutex<HashMap<RuleKey, Arc<Rule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss–Jacobi rule with weight `(1-x)^alpha (1+x)^beta`, cached.
pub fn jacobi_rule(n: usize, alpha: f64, beta_e: f64) -> Arc<Rule> {
    let key = (n, alpha.to_bits(), beta_e.to_bits());
    if let Some(r) = cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let rule = Arc::new(jacobi_rule_uncached(n, alpha, beta_e));
    cache().lock().unwrap().insert(key, rule.clone());
    rule
}

/// Gauss–Legendre rule (Jacobi with alpha = beta = 0), cached.
pub fn legendre_rule(n: usize) -> Arc<Rule> {
    jacobi_rule(n, 0.0, 0.0)
}

/// Default node counts and convergence policy for the period integrals.
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Relative quadrature error target.
    pub eta: f64,
    /// Gauss–Jacobi nodes on endpoint segments.
    pub jacobi_nodes: usize,
    /// Gauss–Legendre nodes on interior polyline pieces.
    pub legendre_nodes: usize,
    /// How many times node counts may be doubled before giving up.
    pub max_doublings: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig {
            eta: 1e-8,
            jacobi_nodes: 64,
            legendre_nodes: 32,
            max_doublings: 3,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-12);
        assert!((ln_gamma(2.0)).abs() < 1e-12);
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-10);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-10);
    }

    #[test]
    fn legendre_two_point_rule() {
        let r = legendre_rule(2);
        let x = 1.0 / 3.0f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-12);
        assert!((r.nodes[1] - x).abs() < 1e-12);
        assert!((r.weights[0] - 1.0).abs() < 1e-12);
        assert!((r.weights[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        // n nodes are exact through degree 2n-1
        let r = legendre_rule(8);
        let approx: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| w * x.powi(14))
            .sum();
        assert!((approx - 2.0 / 15.0).abs() < 1e-13);
    }

    #[test]
    fn jacobi_rule_matches_beta_moments() {
        // integral over [-1,1] of (1-x)^a (1+x)^b dx = 2^(a+b+1) B(a+1, b+1)
        for &(a, b) in &[(-0.3, -0.7), (-0.9, 0.4), (0.0, -0.5)] {
            let r = jacobi_rule(16, a, b);
            let total: f64 = r.weights.iter().sum();
            let exact = 2.0f64.powf(a + b + 1.0) * beta(a + 1.0, b + 1.0);
            assert!(
                (total - exact).abs() < 1e-10 * exact.abs(),
                "moment mismatch for ({a}, {b}): {total} vs {exact}"
            );
            // first moment: weighted integral of x
            let m1: f64 = r.nodes.iter().zip(&r.weights).map(|(&x, &w)| w * x).sum();
            let exact_m1 = exact * (b - a) / (a + b + 2.0);
            assert!((m1 - exact_m1).abs() < 1e-10 * exact.abs());
        }
    }

    #[test]
    fn jacobi_rule_integrates_smooth_factor() {
        // integral_0^1 s^(-0.5) e^s ds mapped to [-1,1] with beta = -0.5
        let r = jacobi_rule(24, 0.0, -0.5);
        let approx: f64 = r
            .nodes
            .iter()
            .zip(&r.weights)
            .map(|(&x, &w)| {
                let s = 0.5 * (x + 1.0);
                // ds = dx/2, and s^(-1/2) = ((1+x)/2)^(-1/2)
                w * 2.0f64.powf(0.5) * 0.5 * s.exp()
            })
            .sum();
        // reference: integral_0^1 s^(-1/2) e^s ds = sqrt(pi) * erfi(1) = 2.9253034918143
        let reference = 2.925303491814364;
        assert!((approx - reference).abs() < 1e-10, "{approx}");
    }
}
