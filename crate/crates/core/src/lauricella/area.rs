//! The plane integral `N(z) = -(i/2) int eta wedge conj(eta)`.
//!
//! With `eta = prod (z_i - xi)^{-mu_i} dxi` the 2-form reduces to
//! `-(i/2) |f|^2 dxi wedge conj(dxi) = -|f|^2 dA`, so
//! `N(z) = - int_C prod_i |xi - z_i|^{-2 mu_i} dA(xi)`, a single-valued
//! integral. It converges exactly in the hyperbolic range `1 < |mu| < 2`
//! (each local exponent `2 mu_i < 2`, the decay at infinity `2|mu| > 2`).
//!
//! The plane is split by a smooth partition of unity: polar Gauss-Jacobi
//! caps around each point (radial weight `r^{1 - 2 mu_i}`), an inverted
//! far field (weight `u^{2|mu| - 3}`), and an adaptive tensor-Legendre
//! quadtree on the smooth compact middle.

use crate::error::{Error, Result};
use crate::quad;
use crate::C64;

use super::periods::Configuration;
use super::weights::WeightSystem;

#[derive(Debug, Clone, Copy)]
pub struct NormIntegral {
    /// `N(z)` (negative in the hyperbolic range).
    pub value: f64,
    /// Estimated absolute error.
    pub error: f64,
}

/// Smooth step: 0 at `t <= 0`, 1 at `t >= 1`, C-infinity in between.
fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let sig = |x: f64| (-1.0 / x).exp();
        sig(t) / (sig(t) + sig(1.0 - t))
    }
}

pub fn norm_integral(weights: &WeightSystem, config: &Configuration) -> Result<NormIntegral> {
    let total = weights.total();
    if !(total > 1.0 + 1e-9 && total < 2.0 - 1e-9) {
        return Err(Error::NotHyperbolic(total));
    }
    if config.len() != weights.len() {
        return Err(Error::InvalidInput("configuration/weight size mismatch".into()));
    }
    let mu = weights.mu();
    let z = config.points();
    let m = z.len();
    let centroid = z.iter().sum::<C64>() / C64::new(m as f64, 0.0);
    let rho = 0.35 * config.min_gap();
    let r_max = z.iter().map(|p| (p - centroid).norm()).fold(0.0f64, f64::max);
    let r1 = (2.0 * r_max).max(config.min_gap());
    let r2 = 2.0 * r1;

    // chi_i(r): 1 on [0, rho/2], 0 beyond rho.
    let chi = move |r: f64| 1.0 - smooth_step((r - 0.5 * rho) / (0.5 * rho));
    // psi(r): 0 up to r1, 1 beyond r2.
    let psi = move |r: f64| smooth_step((r - r1) / (r2 - r1));

    let density = |xi: C64| -> f64 {
        let mut ln = 0.0;
        for i in 0..m {
            ln -= 2.0 * mu[i] * (xi - z[i]).norm().ln();
        }
        ln.exp()
    };

    let tol = 1e-6;
    let mut err_total = 0.0;

    // Singular caps.
    let mut caps = 0.0;
    for i in 0..m {
        let f = |nr: usize, nt: usize| -> f64 {
            let rule = quad::jacobi_rule(nr, 0.0, 1.0 - 2.0 * mu[i]);
            let mut acc = 0.0;
            for (node, wq) in rule.nodes.iter().zip(&rule.weights) {
                let t = 0.5 * (node + 1.0);
                let r = rho * t;
                // radial factor r^{1-2mu} = (rho t)^{1-2mu}; t-part in the
                // rule weight, the rho-part explicit; dr = rho/2 dx.
                let scale = rho.powf(1.0 - 2.0 * mu[i]) * 0.5f64.powf(1.0 - 2.0 * mu[i]) * (rho * 0.5);
                let mut theta_sum = 0.0;
                for s in 0..nt {
                    let th = 2.0 * std::f64::consts::PI * (s as f64) / (nt as f64);
                    let xi = z[i] + C64::from_polar(r, th);
                    let mut ln = 0.0;
                    for j in 0..m {
                        if j != i {
                            ln -= 2.0 * mu[j] * (xi - z[j]).norm().ln();
                        }
                    }
                    theta_sum += chi(r) * ln.exp();
                }
                theta_sum *= 2.0 * std::f64::consts::PI / nt as f64;
                acc += wq * scale * theta_sum;
            }
            acc
        };
        let (v, e) = double_until(|p| f(48 << p, 96 << p), tol)?;
        caps += v;
        err_total += e;
    }

    // Far field through inversion u = 1/r around the centroid.
    let far = {
        let f = |nr: usize, nt: usize| -> f64 {
            let rule = quad::jacobi_rule(nr, 0.0, 2.0 * total - 3.0);
            let mut acc = 0.0;
            for (node, wq) in rule.nodes.iter().zip(&rule.weights) {
                let t = 0.5 * (node + 1.0);
                let u = t / r1;
                // u^{2|mu|-3} du: t-part in the weight, (1/r1)-part explicit.
                let scale = r1.powf(3.0 - 2.0 * total) * 0.5f64.powf(2.0 * total - 3.0) * (0.5 / r1);
                let mut theta_sum = 0.0;
                for s in 0..nt {
                    let th = 2.0 * std::f64::consts::PI * (s as f64) / (nt as f64);
                    let dir = C64::from_polar(1.0, th);
                    let mut ln = 0.0;
                    for j in 0..m {
                        ln -= 2.0 * mu[j] * (dir - (z[j] - centroid) * u).norm().ln();
                    }
                    theta_sum += psi(1.0 / u) * ln.exp();
                }
                theta_sum *= 2.0 * std::f64::consts::PI / nt as f64;
                acc += wq * scale * theta_sum;
            }
            acc
        };
        let (v, e) = double_until(|p| f(48 << p, 96 << p), tol)?;
        err_total += e;
        v
    };

    // Smooth compact middle on [centroid - r2, centroid + r2]^2.
    let chi_mid = |xi: C64| -> f64 {
        let mut c = 1.0 - psi((xi - centroid).norm());
        for &p in z.iter() {
            c -= chi((xi - p).norm());
        }
        c.max(0.0)
    };
    let integrand = |xi: C64| -> f64 {
        let c = chi_mid(xi);
        if c == 0.0 {
            0.0
        } else {
            c * density(xi)
        }
    };
    let rough = quadtree_fixed(&integrand, centroid, r2, 4);
    let scale_hint = caps.abs() + far.abs() + rough.abs();
    let mut mid_err = 0.0;
    let middle = quadtree_adaptive(
        &integrand,
        centroid,
        r2,
        1e-6 * scale_hint,
        13,
        &mut mid_err,
    );
    err_total += mid_err;

    let value = -(caps + middle + far);
    if err_total > 1e-3 * value.abs().max(f64::MIN_POSITIVE) {
        return Err(Error::IntegralNotConverged(err_total / value.abs()));
    }
    Ok(NormIntegral {
        value,
        error: err_total,
    })
}

/// Double the resolution parameter until the relative change drops below
/// `tol`; returns the value and the last change.
fn double_until(f: impl Fn(usize) -> f64, tol: f64) -> Result<(f64, f64)> {
    let mut prev = f(0);
    let mut last = f64::INFINITY;
    for p in 1..=3 {
        let next = f(p);
        last = (next - prev).abs();
        prev = next;
        if last <= tol * prev.abs().max(f64::MIN_POSITIVE) {
            return Ok((prev, last));
        }
    }
    Err(Error::IntegralNotConverged(last / prev.abs().max(f64::MIN_POSITIVE)))
}

/// Tensor 8-point Gauss-Legendre over a square cell.
fn cell_gl8(f: &impl Fn(C64) -> f64, cx: f64, cy: f64, half: f64) -> f64 {
    let rule = quad::legendre_rule(8);
    let mut acc = 0.0;
    for (xi, wx) in rule.nodes.iter().zip(&rule.weights) {
        for (yi, wy) in rule.nodes.iter().zip(&rule.weights) {
            acc += wx * wy * f(C64::new(cx + half * xi, cy + half * yi));
        }
    }
    acc * half * half
}

fn quadtree_fixed(f: &impl Fn(C64) -> f64, center: C64, half: f64, depth: usize) -> f64 {
    if depth == 0 {
        return cell_gl8(f, center.re, center.im, half);
    }
    let h = half / 2.0;
    [(-h, -h), (-h, h), (h, -h), (h, h)]
        .iter()
        .map(|&(dx, dy)| quadtree_fixed(f, center + C64::new(dx, dy), h, depth - 1))
        .sum()
}

fn quadtree_adaptive(
    f: &impl Fn(C64) -> f64,
    center: C64,
    half: f64,
    budget: f64,
    depth: usize,
    err: &mut f64,
) -> f64 {
    let coarse = cell_gl8(f, center.re, center.im, half);
    let h = half / 2.0;
    let fine: f64 = [(-h, -h), (-h, h), (h, -h), (h, h)]
        .iter()
        .map(|&(dx, dy)| cell_gl8(f, center.re + dx, center.im + dy, h))
        .sum();
    let delta = (fine - coarse).abs();
    if delta <= budget || depth == 0 {
        *err += delta;
        return fine;
    }
    [(-h, -h), (-h, h), (h, -h), (h, h)]
        .iter()
        .map(|&(dx, dy)| {
            quadtree_adaptive(f, center + C64::new(dx, dy), h, budget / 4.0, depth - 1, err)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::QuadConfig;

    #[test]
    fn rejects_non_hyperbolic_weights() {
        let w = WeightSystem::new(&[0.2; 4]).unwrap();
        let c = Configuration::from_reals(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(norm_integral(&w, &c), Err(Error::NotHyperbolic(_))));
    }

    #[test]
    fn two_point_complex_beta_identity() {
        // For two points the identity H(F, F) = N(z) reduces to
        // sin(pi mu_1) F_1 F_2 = int |xi|^{-2mu_0} |1-xi|^{-2mu_1} dA,
        // with both sides computable independently.
        let mu = [0.8, 0.8];
        let w = WeightSystem::new(&mu).unwrap();
        let c = Configuration::from_reals(&[0.0, 1.0]).unwrap();
        let n = norm_integral(&w, &c).unwrap();
        let f1 = quad::beta(1.0 - mu[0], 1.0 - mu[1]);
        let f2 = quad::beta(mu[0] + mu[1] - 1.0, 1.0 - mu[1]);
        let expect = -(std::f64::consts::PI * mu[1]).sin() * f1 * f2;
        assert!(
            (n.value - expect).abs() < 5e-4 * expect.abs(),
            "{} vs {expect}",
            n.value
        );
    }

    #[test]
    fn scaling_law() {
        // N(lambda z) = lambda^{2(1-|mu|)} N(z) for real lambda > 0.
        let w = WeightSystem::new(&[0.45, 0.4, 0.35]).unwrap();
        let base = [0.0, 1.0, 2.2];
        let lambda = 1.6;
        let scaled: Vec<f64> = base.iter().map(|v| v * lambda).collect();
        let n1 = norm_integral(&w, &Configuration::from_reals(&base).unwrap()).unwrap();
        let n2 = norm_integral(&w, &Configuration::from_reals(&scaled).unwrap()).unwrap();
        let factor = lambda.powf(2.0 * (1.0 - w.total()));
        assert!(
            (n2.value / n1.value - factor).abs() < 1e-3 * factor.abs(),
            "{} vs {factor}",
            n2.value / n1.value
        );
    }

    #[test]
    fn matches_hermitian_square_of_periods() {
        use super::super::{hermitian_form, period};
        let mu = [0.45, 0.4, 0.35];
        let w = WeightSystem::new(&mu).unwrap();
        let c = Configuration::from_reals(&[0.0, 1.0, 2.2]).unwrap();
        let n = norm_integral(&w, &c).unwrap();
        let pv = period(&w, &c, &QuadConfig::default()).unwrap();
        let h = hermitian_form(&w);
        let full = {
            let mut v = pv.f.clone();
            v.push(pv.f_last.unwrap());
            nalgebra::DVector::from_vec(v)
        };
        let quad_form = (full.adjoint() * &h.h_tilde * &full)[(0, 0)].re;
        assert!(
            (quad_form - n.value).abs() < 0.01 * n.value.abs(),
            "H(F,F) = {quad_form} vs N = {}",
            n.value
        );
    }
}
