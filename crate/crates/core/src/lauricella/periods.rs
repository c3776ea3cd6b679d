//! Hypergeometric period integrals of the Lauricella differential.
//!
//! A period `F_k` integrates the split-factor integrand
//! `prod_{i<k} (xi - z_i)^{-mu_i} prod_{i>=k} (z_i - xi)^{-mu_i}`
//! over an arc from `z_{k-1}` to `z_k`. On a real strictly increasing
//! configuration with straight arcs every factor is positive real; this is
//! the base determination, and all branch bookkeeping is relative to it.
//!
//! Branches are carried explicitly: each arc stores, at every polyline
//! vertex, the continuous argument of `(vertex - z_i)` for every factor.
//! Within one straight segment the argument increment of a linear factor is
//! principal (a segment subtends less than a half turn at any point off it),
//! so updates are exact and no sampling density is involved.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::quad::{self, QuadConfig};
use crate::C64;

use super::weights::WeightSystem;

/// An ordered configuration of distinct points in the complex plane.
#[derive(Debug, Clone)]
pub struct Configuration {
    z: Vec<C64>,
    min_gap: f64,
}

impl Configuration {
    pub fn new(z: Vec<C64>) -> Result<Self> {
        if z.len() < 2 {
            return Err(Error::InvalidInput("need at least two points".into()));
        }
        let mut min_gap = f64::INFINITY;
        for i in 0..z.len() {
            for j in (i + 1)..z.len() {
                min_gap = min_gap.min((z[i] - z[j]).norm());
            }
        }
        if min_gap <= 0.0 {
            return Err(Error::InvalidInput("configuration points must be pairwise distinct".into()));
        }
        Ok(Configuration { z, min_gap })
    }

    pub fn from_reals(x: &[f64]) -> Result<Self> {
        Configuration::new(x.iter().map(|&v| C64::new(v, 0.0)).collect())
    }

    pub fn points(&self) -> &[C64] {
        &self.z
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    /// Real strictly increasing (the precondition for the canonical arcs).
    pub fn is_real_increasing(&self) -> bool {
        let scale = self.z.iter().map(|c| c.norm()).fold(1.0f64, f64::max);
        self.z.iter().all(|c| c.im.abs() <= 1e-14 * scale)
            && self.z.windows(2).all(|w| w[1].re > w[0].re)
    }
}

/// One arc as a polyline with per-vertex continuous arguments of every
/// factor `(vertex - z_i)`.
#[derive(Debug, Clone)]
pub struct Arc {
    pub vertices: Vec<C64>,
    /// `args[v][i]` = continuous argument of `vertices[v] - z[i]`.
    /// At an endpoint where the factor vanishes the entry holds the
    /// limiting (directional) argument.
    pub args: Vec<Vec<f64>>,
}

/// A full arc system: arc `k` (0-based) joins `z[k]` to `z[k+1]`.
#[derive(Debug, Clone)]
pub struct ArcSystem {
    pub arcs: Vec<Arc>,
}

impl ArcSystem {
    /// The canonical straight-segment system on a real strictly increasing
    /// configuration; every factor argument is 0 to the left of a point and
    /// pi to the right, matching the positive-real base determination.
    pub fn canonical(config: &Configuration) -> Result<ArcSystem> {
        if !config.is_real_increasing() {
            return Err(Error::InvalidInput(
                "canonical arcs need a real strictly increasing configuration".into(),
            ));
        }
        let z = config.points();
        let m = z.len();
        let mut arcs = Vec::with_capacity(m - 1);
        for k in 0..(m - 1) {
            let vertices = vec![z[k], z[k + 1]];
            let args = vertices
                .iter()
                .enumerate()
                .map(|(vi, v)| {
                    (0..m)
                        .map(|i| {
                            // Vanishing factor at its own endpoint: use the
                            // travel direction (positive real axis): 0 when
                            // leaving z_k to the right, pi when the factor
                            // point is to the right of the arc.
                            if i == k && vi == 0 {
                                0.0
                            } else if i == k + 1 && vi == 1 {
                                std::f64::consts::PI
                            } else if z[i].re < v.re {
                                0.0
                            } else {
                                std::f64::consts::PI
                            }
                        })
                        .collect()
                })
                .collect();
            arcs.push(Arc { vertices, args });
        }
        Ok(ArcSystem { arcs })
    }

    /// Arc system over user-supplied polylines (arc `k` must run from
    /// `z[k]` to `z[k+1]`). The determination is anchored at each arc's
    /// middle vertex by principal arguments — factors to the left of the
    /// arc in `(-pi, pi]`, factors to the right in `[0, 2 pi)` — and walked
    /// outward; on straight real-segment arcs this reproduces the base
    /// determination.
    pub fn from_polylines(config: &Configuration, polylines: Vec<Vec<C64>>) -> Result<ArcSystem> {
        let z = config.points();
        let m = z.len();
        if polylines.len() != m - 1 {
            return Err(Error::InvalidInput(format!(
                "need {} arcs, got {}",
                m - 1,
                polylines.len()
            )));
        }
        let mut arcs = Vec::with_capacity(m - 1);
        for (k, vertices) in polylines.into_iter().enumerate() {
            if vertices.len() < 2 {
                return Err(Error::InvalidInput(format!("arc {k} needs at least two vertices")));
            }
            let scale = 1.0 + z[k].norm() + z[k + 1].norm();
            if (vertices[0] - z[k]).norm() > 1e-12 * scale
                || (vertices[vertices.len() - 1] - z[k + 1]).norm() > 1e-12 * scale
            {
                return Err(Error::InvalidInput(format!(
                    "arc {k} endpoints must be z[{k}] and z[{}]",
                    k + 1
                )));
            }
            let nv = vertices.len();
            // Anchor point: midpoint of the middle segment; no factor
            // vanishes there.
            let seg = (nv - 1) / 2;
            let q = (vertices[seg] + vertices[seg + 1]) * 0.5;
            let mut args = vec![vec![0.0; m]; nv];
            for i in 0..m {
                let anchor = {
                    let a = (q - z[i]).arg();
                    if i >= k + 1 && a < 0.0 {
                        a + 2.0 * std::f64::consts::PI
                    } else {
                        a
                    }
                };
                // outward from the anchor to the two segment endpoints,
                // then vertex by vertex; the vanishing factors keep the
                // directional argument of their neighbouring vertex.
                args[seg][i] = anchor + principal_increment(z[i], q, vertices[seg]);
                args[seg + 1][i] = anchor + principal_increment(z[i], q, vertices[seg + 1]);
                for v in (0..seg).rev() {
                    args[v][i] = args[v + 1][i] + principal_increment(z[i], vertices[v + 1], vertices[v]);
                }
                for v in (seg + 2)..nv {
                    args[v][i] = args[v - 1][i] + principal_increment(z[i], vertices[v - 1], vertices[v]);
                }
            }
            // Directional arguments at the vanishing endpoints: constant
            // along their end segments.
            for i in 0..m {
                if i == k {
                    args[0][i] = args[1][i];
                }
                if i == k + 1 {
                    args[nv - 1][i] = args[nv - 2][i];
                }
            }
            arcs.push(Arc { vertices, args });
        }
        Ok(ArcSystem { arcs })
    }

    /// Minimum distance from arc `k` to any configuration point other than
    /// its endpoints.
    pub fn clearance(&self, k: usize, config: &Configuration) -> f64 {
        let arc = &self.arcs[k];
        let mut best = f64::INFINITY;
        for (i, &p) in config.points().iter().enumerate() {
            if i == k || i == k + 1 {
                continue;
            }
            for w in arc.vertices.windows(2) {
                best = best.min(dist_point_segment(p, w[0], w[1]));
            }
        }
        best
    }

    pub fn min_clearance(&self, config: &Configuration) -> f64 {
        (0..self.arcs.len())
            .map(|k| self.clearance(k, config))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Distance from a point to a closed segment.
pub(crate) fn dist_point_segment(p: C64, a: C64, b: C64) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).re * ab.re + (p - a).im * ab.im) / len2;
    let t = t.clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

/// Principal argument increment of the linear factor `xi - q` moving from
/// `from` to `to` (exact along a straight segment avoiding `q`).
pub(crate) fn principal_increment(q: C64, from: C64, to: C64) -> f64 {
    ((to - q) / (from - q)).arg()
}

/// The periods `F_1 .. F_{n+1}` over the finite arcs, with the optional
/// regularised period over the arc to infinity, and the branch data that
/// produced them.
#[derive(Debug, Clone)]
pub struct PeriodVector {
    /// `F_k` for k = 1..n+1 (index 0 holds `F_1`).
    pub f: Vec<C64>,
    /// Regularised `F_{n+2}` (present on real-increasing configurations
    /// away from `|mu| = 1`, where the defining integral or its finite part
    /// exists).
    pub f_last: Option<C64>,
    /// Largest relative quadrature-step change at acceptance.
    pub quad_error: f64,
    /// Accumulated argument of every factor `(xi - z_i)` at the middle
    /// vertex of each arc: `branch[arc][factor]`. All zeros to the left of
    /// a point and pi to the right on the base determination.
    pub branch: Vec<Vec<f64>>,
}

impl PeriodVector {
    /// `(F_1, .., F_{n+1})` as a vector.
    pub fn as_vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.f)
    }

    pub fn max_abs(&self) -> f64 {
        self.f
            .iter()
            .chain(self.f_last.iter())
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Residual of the linear relation `sum_{k=1}^{n+2} Im(w_k) F_k = 0`.
    ///
    /// At `|mu| = 1` the last period diverges logarithmically while its
    /// coefficient `Im(w_{n+2}) = sin(pi |mu|)` vanishes; the product has
    /// the finite limit `-pi` (the `1/(|mu|-1)` pole of the regularised
    /// tail against `sin(pi|mu|) ~ -pi(|mu|-1)`), so the truncated relation
    /// reads `sum_{k<=n+1} Im(w_k) F_k = pi`. For mu = (1/2, 1/2) this is
    /// the Beta value `F_1 = B(1/2, 1/2) = pi` on the nose.
    pub fn linear_relation_residual(&self, weights: &WeightSystem) -> f64 {
        let s = weights.im_w();
        let mut acc = C64::new(0.0, 0.0);
        for (k, fk) in self.f.iter().enumerate() {
            acc += fk * s[k];
        }
        match self.f_last {
            Some(fl) => acc += fl * s[s.len() - 1],
            None => acc -= std::f64::consts::PI,
        }
        acc.norm()
    }
}

/// Evaluate the periods over a given arc system.
pub fn period_over_arcs(
    weights: &WeightSystem,
    config: &Configuration,
    arcs: &ArcSystem,
    cfg: &QuadConfig,
) -> Result<PeriodVector> {
    let m = weights.len();
    if config.len() != m {
        return Err(Error::InvalidInput(format!(
            "configuration has {} points but the weight system has {m}",
            config.len()
        )));
    }
    let floor = config.min_gap() / 8.0;
    for k in 0..arcs.arcs.len() {
        let c = arcs.clearance(k, config);
        if c < floor {
            let point = config
                .points()
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k && i != k + 1)
                .min_by(|a, b| {
                    let da = arcs.arcs[k]
                        .vertices
                        .windows(2)
                        .map(|w| dist_point_segment(*a.1, w[0], w[1]))
                        .fold(f64::INFINITY, f64::min);
                    let db = arcs.arcs[k]
                        .vertices
                        .windows(2)
                        .map(|w| dist_point_segment(*b.1, w[0], w[1]))
                        .fold(f64::INFINITY, f64::min);
                    da.partial_cmp(&db).unwrap()
                })
                .map(|(i, _)| i)
                .unwrap_or(0);
            return Err(Error::ArcTooClose {
                arc: k,
                point,
                clearance: c,
                floor,
            });
        }
    }
    let mut f = Vec::with_capacity(m - 1);
    let mut branch = Vec::with_capacity(m - 1);
    let mut worst = 0.0f64;
    for k in 0..(m - 1) {
        let (value, err) = arc_integral(weights, config, &arcs.arcs[k], k, cfg)?;
        worst = worst.max(err);
        f.push(value);
        let mid = arcs.arcs[k].vertices.len() / 2;
        branch.push(arcs.arcs[k].args[mid].clone());
    }
    Ok(PeriodVector {
        f,
        f_last: None,
        quad_error: worst,
        branch,
    })
}

/// Periods on a real strictly increasing configuration with canonical arcs;
/// also computes the regularised period over the arc to infinity when it is
/// defined.
pub fn period(weights: &WeightSystem, config: &Configuration, cfg: &QuadConfig) -> Result<PeriodVector> {
    let arcs = ArcSystem::canonical(config)?;
    let mut pv = period_over_arcs(weights, config, &arcs, cfg)?;
    if (weights.total() - 1.0).abs() > 1e-6 {
        pv.f_last = Some(tail_period(weights, config, cfg)?);
    }
    Ok(pv)
}

/// Integral over one arc with doubling node counts until the relative
/// change drops below `eta`.
fn arc_integral(
    weights: &WeightSystem,
    config: &Configuration,
    arc: &Arc,
    k: usize,
    cfg: &QuadConfig,
) -> Result<(C64, f64)> {
    let mut nj = cfg.jacobi_nodes;
    let mut nl = cfg.legendre_nodes;
    let mut prev = arc_integral_once(weights, config, arc, k, nj, nl);
    let mut last_rel = f64::INFINITY;
    for _ in 0..cfg.max_doublings {
        nj *= 2;
        nl *= 2;
        let next = arc_integral_once(weights, config, arc, k, nj, nl);
        last_rel = (next - prev).norm() / next.norm().max(f64::MIN_POSITIVE);
        prev = next;
        if last_rel <= cfg.eta {
            return Ok((prev, last_rel));
        }
    }
    Err(Error::QuadratureNotConverged(last_rel))
}

/// Single-pass quadrature over the arc polyline. Segment 0 carries the
/// `(xi - z_k)^{-mu_k}` endpoint weight, the final segment carries
/// `(z_{k+1} - xi)^{-mu_{k+1}}`; interior pieces are analytic.
fn arc_integral_once(
    weights: &WeightSystem,
    config: &Configuration,
    arc: &Arc,
    k: usize,
    nj: usize,
    nl: usize,
) -> C64 {
    let mu = weights.mu();
    let z = config.points();
    let m = z.len();
    let nseg = arc.vertices.len() - 1;
    let mut total = C64::new(0.0, 0.0);
    for seg in 0..nseg {
        let a = arc.vertices[seg];
        let b = arc.vertices[seg + 1];
        let delta = b - a;
        let first = seg == 0;
        let last = seg == nseg - 1;
        // Jacobi weight exponents on [-1, 1]: (1-x)^alpha at the far end,
        // (1+x)^beta at the near end.
        let alpha = if last { -mu[k + 1] } else { 0.0 };
        let beta = if first { -mu[k] } else { 0.0 };
        let rule = if first || last {
            quad::jacobi_rule(nj, alpha, beta)
        } else {
            quad::legendre_rule(nl)
        };
        // Constant branch data for the two singular factors on their
        // segments: the factor direction equals the segment direction.
        let ln_delta = delta.norm().ln();
        let arg_start_dir = arc.args[1.min(arc.vertices.len() - 1)][k]; // arg of (p1 - z_k) on segment 0
        let arg_end_dir = arc.args[arc.vertices.len() - 2][k + 1]; // arg of (p_{m-1} - z_{k+1})
        let mut seg_sum = C64::new(0.0, 0.0);
        for (node, wq) in rule.nodes.iter().zip(&rule.weights) {
            let t = 0.5 * (node + 1.0);
            let xi = a + delta * t;
            // Accumulate -sum_i mu_i * log(factor_i) with tracked branches.
            let mut log_sum = C64::new(0.0, 0.0);
            for i in 0..m {
                if first && i == k {
                    // (xi - z_k) = t * delta on this segment; modulus t is in
                    // the rule weight, the rest is constant.
                    log_sum += C64::new(ln_delta + (0.5f64).ln(), arg_start_dir) * mu[i];
                    continue;
                }
                if last && i == k + 1 {
                    // (z_{k+1} - xi) = (1 - t)|delta| with argument
                    // arg(p_{m-1} - z_{k+1}) - pi + pi = constant; the
                    // tracked argument of (xi - z_{k+1}) along the segment
                    // equals its value at the segment start, and the split
                    // convention subtracts pi.
                    log_sum +=
                        C64::new(ln_delta + (0.5f64).ln(), arg_end_dir - std::f64::consts::PI) * mu[i];
                    continue;
                }
                let base = arc.args[seg][i];
                let inc = principal_increment(z[i], a, xi);
                let argument = if i >= k + 1 {
                    base + inc - std::f64::consts::PI
                } else {
                    base + inc
                };
                let modulus = (xi - z[i]).norm();
                log_sum += C64::new(modulus.ln(), argument) * mu[i];
            }
            seg_sum += (-log_sum).exp() * *wq;
        }
        // Jacobi weights absorbed (1-x)^alpha (1+x)^beta; the mapping
        // xi = a + (x+1)/2 delta contributes dxi = delta/2 dx and the
        // singular moduli contribute ((1+x)/2)^{-mu_k} = (1+x)^beta 2^{-beta}
        // (the 2^{-beta} is folded into the constant above via ln(1/2)*mu).
        total += seg_sum * delta * 0.5;
    }
    total
}

/// Regularised period over the conventional arc `[z_{n+1}, +infinity)` on a
/// real increasing configuration: a finite stretch by quadrature plus the
/// analytic continuation of the asymptotic tail
/// `int_R^inf xi^{-|mu| - m} dxi = R^{1 - |mu| - m} / (|mu| + m - 1)`,
/// which is the convergent integral for `|mu| > 1` and its finite part for
/// `|mu| < 1`. Undefined in the parabolic band (the `m = 0` term becomes a
/// logarithm).
pub fn tail_period(weights: &WeightSystem, config: &Configuration, cfg: &QuadConfig) -> Result<C64> {
    if !config.is_real_increasing() {
        return Err(Error::InvalidInput(
            "the arc to infinity is materialised on real increasing configurations".into(),
        ));
    }
    let total = weights.total();
    if (total - 1.0).abs() <= 1e-6 {
        return Err(Error::InvalidInput(
            "|mu| = 1: the tail has a logarithmic finite part; the linear relation drops F_{n+2}".into(),
        ));
    }
    let mu = weights.mu();
    let z: Vec<f64> = config.points().iter().map(|c| c.re).collect();
    let m = z.len();
    let z_last = z[m - 1];
    let max_abs = z.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1.0);
    let r0 = (3.0 * max_abs).max(z_last + 2.0 * (z_last - z[0])).max(z_last + 1.0);

    // Finite stretch [z_last, r0]: a Jacobi piece over the local gap, then
    // Legendre pieces doubling in length.
    let gap = z_last - z[m - 2];
    let mut cuts = vec![z_last, (z_last + gap).min(r0)];
    let mut len = gap;
    while *cuts.last().unwrap() < r0 {
        len *= 2.0;
        let next = (cuts.last().unwrap() + len).min(r0);
        cuts.push(next);
    }
    let integrand_ln = |xi: f64| -> f64 {
        // all factors (xi - z_i) positive on the ray
        -(0..m).map(|i| mu[i] * (xi - z[i]).ln()).sum::<f64>()
    };
    let mut nj = cfg.jacobi_nodes;
    let mut nl = cfg.legendre_nodes;
    let eval = |nj: usize, nl: usize| -> f64 {
        let mut acc = 0.0;
        for (piece, w) in cuts.windows(2).enumerate() {
            let (a, b) = (w[0], w[1]);
            let h = 0.5 * (b - a);
            if piece == 0 {
                let rule = quad::jacobi_rule(nj, 0.0, -mu[m - 1]);
                for (node, wq) in rule.nodes.iter().zip(&rule.weights) {
                    let t = 0.5 * (node + 1.0);
                    let xi = a + (b - a) * t;
                    // (xi - z_last)^{-mu} = (t (b-a))^{-mu}; t^{-mu} sits in
                    // the rule weight as (1+x)^{-mu} 2^{mu}.
                    let rest: f64 = -(0..m - 1).map(|i| mu[i] * (xi - z[i]).ln()).sum::<f64>();
                    let const_part = -mu[m - 1] * ((b - a).ln() + (0.5f64).ln());
                    acc += wq * (rest + const_part).exp() * h;
                }
            } else {
                let rule = quad::legendre_rule(nl);
                for (node, wq) in rule.nodes.iter().zip(&rule.weights) {
                    let xi = a + (b - a) * 0.5 * (node + 1.0);
                    acc += wq * integrand_ln(xi).exp() * h;
                }
            }
        }
        acc
    };
    let mut finite = eval(nj, nl);
    let mut err = f64::INFINITY;
    for _ in 0..cfg.max_doublings {
        nj *= 2;
        nl *= 2;
        let next = eval(nj, nl);
        err = (next - finite).abs() / next.abs().max(f64::MIN_POSITIVE);
        finite = next;
        if err <= cfg.eta {
            break;
        }
    }
    if err > cfg.eta {
        return Err(Error::QuadratureNotConverged(err));
    }

    // Asymptotic tail beyond r0 via the product of binomial series
    // prod_i (1 - z_i/xi)^{-mu_i} = sum_m c_m xi^{-m}.
    const SERIES_LEN: usize = 48;
    let mut c = vec![0.0f64; SERIES_LEN];
    c[0] = 1.0;
    for i in 0..m {
        // (1 - z_i u)^{-mu_i} = sum_p (mu_i)_p / p! (z_i u)^p
        let mut series = vec![0.0f64; SERIES_LEN];
        let mut term = 1.0;
        series[0] = 1.0;
        for p in 1..SERIES_LEN {
            term *= (mu[i] + (p as f64 - 1.0)) / p as f64 * z[i];
            series[p] = term;
        }
        let mut out = vec![0.0f64; SERIES_LEN];
        for a in 0..SERIES_LEN {
            if c[a] == 0.0 {
                continue;
            }
            for b in 0..(SERIES_LEN - a) {
                out[a + b] += c[a] * series[b];
            }
        }
        c = out;
    }
    let mut tail = 0.0;
    for (mm, &cm) in c.iter().enumerate() {
        let denom = total + mm as f64 - 1.0;
        tail += cm * r0.powf(1.0 - total - mm as f64) / denom;
    }
    Ok(C64::new(finite + tail, 0.0))
}
