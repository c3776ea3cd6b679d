//! Numerical analytic continuation of the period map and monodromy.
//!
//! Continuation never integrates along the way: it transports the arc
//! system and its branch data (a discrete object) through configuration
//! space and evaluates the quadrature at the endpoints. Arcs are deformed
//! by a local isotopy: every polyline vertex moves with a bump-weighted
//! average of the point displacements, so vertices near a moving point
//! travel with it rigidly and the deformed arc stays in the correct
//! homotopy class; the trace a moving point leaves behind is exactly the
//! appended loop the monodromy action requires.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quad::QuadConfig;
use crate::{linalg, C64};

use super::periods::{
    dist_point_segment, principal_increment, Arc, ArcSystem, Configuration, PeriodVector,
    period_over_arcs,
};
use super::weights::{hermitian_form, WeightSystem};

/// A way-pointed path in configuration space. Consecutive waypoints must
/// stay within `min_gap / 4` per point; the stepper refines further.
#[derive(Debug, Clone)]
pub struct ConfigPath {
    pub configs: Vec<Configuration>,
}

impl ConfigPath {
    /// Closed loop in which point `i` encircles point `j` once, positively,
    /// at the given radius (default: the current distance).
    pub fn encircle(base: &Configuration, i: usize, j: usize, radius: Option<f64>) -> Result<ConfigPath> {
        let z = base.points();
        if i == j || i >= z.len() || j >= z.len() {
            return Err(Error::InvalidInput(format!("invalid loop indices {i}, {j}")));
        }
        let r = radius.unwrap_or((z[i] - z[j]).norm());
        if r <= 0.0 {
            return Err(Error::InvalidInput("loop radius must be positive".into()));
        }
        // Walk in: move z_i radially onto the circle of radius r, run the
        // circle, walk back out. Steps sized well under a quarter of the
        // smallest gap reached along the way (the circle keeps |z_i - z_j|
        // at r).
        let start_offset = z[i] - z[j];
        let circle_start = z[j] + start_offset * (r / start_offset.norm());
        let step = base.min_gap().min(r) / 5.0;
        let mut configs = vec![base.clone()];
        let push = |zs: Vec<C64>, configs: &mut Vec<Configuration>| -> Result<()> {
            configs.push(Configuration::new(zs)?);
            Ok(())
        };
        // radial leg
        let leg = circle_start - z[i];
        let nin = (leg.norm() / step).ceil().max(1.0) as usize;
        for s in 1..=nin {
            let mut zs = z.to_vec();
            zs[i] = z[i] + leg * (s as f64 / nin as f64);
            push(zs, &mut configs)?;
        }
        // circle
        let ncirc = (2.0 * std::f64::consts::PI * r / step).ceil().max(8.0) as usize;
        let phase0 = (circle_start - z[j]).arg();
        for s in 1..=ncirc {
            let th = phase0 + 2.0 * std::f64::consts::PI * (s as f64 / ncirc as f64);
            let mut zs = z.to_vec();
            zs[i] = z[j] + C64::from_polar(r, th);
            push(zs, &mut configs)?;
        }
        // radial leg back
        for s in 1..=nin {
            let mut zs = z.to_vec();
            zs[i] = circle_start - leg * (s as f64 / nin as f64);
            push(zs, &mut configs)?;
        }
        Ok(ConfigPath { configs })
    }

    /// Traverse `self`, then `next` (which must start where `self` ends).
    pub fn then(&self, next: &ConfigPath) -> ConfigPath {
        let mut configs = self.configs.clone();
        configs.extend(next.configs.iter().skip(1).cloned());
        ConfigPath { configs }
    }

    /// The same path traversed backwards.
    pub fn reversed(&self) -> ConfigPath {
        let mut configs = self.configs.clone();
        configs.reverse();
        ConfigPath { configs }
    }

    /// Pointwise translation of every waypoint (used for continuing from a
    /// perturbed base configuration along a homotopic copy of the path).
    pub fn translated(&self, offset: &[C64]) -> Result<ConfigPath> {
        let mut configs = Vec::with_capacity(self.configs.len());
        for c in &self.configs {
            let zs: Vec<C64> = c
                .points()
                .iter()
                .zip(offset)
                .map(|(z, o)| z + o)
                .collect();
            configs.push(Configuration::new(zs)?);
        }
        Ok(ConfigPath { configs })
    }
}

/// Continue the periods along a path, returning the period vector at the
/// end together with the transported arc system.
pub fn continue_period(
    weights: &WeightSystem,
    path: &[Configuration],
    arcs: &ArcSystem,
    cfg: &QuadConfig,
) -> Result<(PeriodVector, ArcSystem)> {
    if path.is_empty() {
        return Err(Error::InvalidInput("empty path".into()));
    }
    let mut arcs = arcs.clone();
    for w in path.windows(2) {
        arcs = advance(&w[0], &w[1], arcs)?;
    }
    let end = path.last().unwrap();
    let pv = period_over_arcs(weights, end, &arcs, cfg)?;
    Ok((pv, arcs))
}

/// One user-level step, refined internally so that every substep keeps the
/// per-factor winding below pi/4 and the arcs clear of the points.
fn advance(from: &Configuration, to: &Configuration, arcs: ArcSystem) -> Result<ArcSystem> {
    let gap = from.min_gap().min(to.min_gap());
    let max_disp = from
        .points()
        .iter()
        .zip(to.points())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0f64, f64::max);
    if max_disp >= gap / 4.0 {
        return Err(Error::StepTooLarge {
            step: max_disp,
            limit: gap / 4.0,
        });
    }
    let nsub = (max_disp / (gap / 12.0)).ceil().max(1.0) as usize;
    let mut current = from.clone();
    let mut arcs = arcs;
    for s in 1..=nsub {
        let target = interpolate(from, to, s as f64 / nsub as f64)?;
        arcs = substep(&current, &target, arcs, 0)?;
        current = target;
    }
    Ok(arcs)
}

fn interpolate(from: &Configuration, to: &Configuration, t: f64) -> Result<Configuration> {
    let zs: Vec<C64> = from
        .points()
        .iter()
        .zip(to.points())
        .map(|(a, b)| a + (b - a) * t)
        .collect();
    Configuration::new(zs)
}

/// A single isotopy substep, with recursive halving on winding or
/// clearance violations.
fn substep(from: &Configuration, to: &Configuration, arcs: ArcSystem, depth: usize) -> Result<ArcSystem> {
    let gap = from.min_gap().min(to.min_gap());
    // The rigid radius sets the distance at which dragged arc pockets stay
    // glued to a moving point. It must clear the min_gap/8 floor even after
    // the configuration relaxes from its tightest moment (gaps can grow by
    // a factor ~8/3 before the frozen pocket distance meets the floor).
    let rigid = gap / 3.0;
    let support = gap / 2.2;
    let zf = from.points();
    let zt = to.points();
    let disp: Vec<C64> = zf.iter().zip(zt).map(|(a, b)| b - a).collect();
    let m = zf.len();

    let mut moved = Vec::with_capacity(arcs.arcs.len());
    let mut winding_ok = true;
    for (k, arc) in arcs.arcs.iter().enumerate() {
        let nvert = arc.vertices.len();
        let mut vertices = Vec::with_capacity(nvert);
        for (vi, &v) in arc.vertices.iter().enumerate() {
            if vi == 0 {
                vertices.push(zt[k]);
                continue;
            }
            if vi == nvert - 1 {
                vertices.push(zt[k + 1]);
                continue;
            }
            let mut shift = C64::new(0.0, 0.0);
            for i in 0..m {
                let d = (v - zf[i]).norm();
                shift += disp[i] * bump(d, rigid, support);
            }
            vertices.push(v + shift);
        }
        // Branch updates: the principal increment of each factor along the
        // straight homotopy of vertex and point, capped at pi/4.
        let mut args = Vec::with_capacity(nvert);
        for vi in 0..nvert {
            let mut row = Vec::with_capacity(m);
            for i in 0..m {
                let (old_val, new_val) = if vi == 0 && i == k {
                    (arc.vertices[1] - arc.vertices[0], vertices[1] - vertices[0])
                } else if vi == nvert - 1 && i == k + 1 {
                    (
                        arc.vertices[nvert - 2] - arc.vertices[nvert - 1],
                        vertices[nvert - 2] - vertices[nvert - 1],
                    )
                } else {
                    (arc.vertices[vi] - zf[i], vertices[vi] - zt[i])
                };
                let inc = (new_val / old_val).arg();
                if inc.abs() >= std::f64::consts::FRAC_PI_4 {
                    winding_ok = false;
                }
                row.push(arc.args[vi][i] + inc);
            }
            args.push(row);
        }
        moved.push(Arc { vertices, args });
    }

    let mut candidate = ArcSystem { arcs: moved };
    if winding_ok {
        resample(&mut candidate, to, gap / 5.0);
        let floor = to.min_gap() / 8.0;
        if candidate.min_clearance(to) >= floor {
            return Ok(candidate);
        }
    }
    if depth >= 24 {
        // Identify the worst offender for the report.
        let (mut worst_arc, mut worst_pt, mut worst) = (0usize, 0usize, f64::INFINITY);
        for k in 0..arcs.arcs.len() {
            for (i, &p) in to.points().iter().enumerate() {
                if i == k || i == k + 1 {
                    continue;
                }
                for w in arcs.arcs[k].vertices.windows(2) {
                    let d = dist_point_segment(p, w[0], w[1]);
                    if d < worst {
                        worst = d;
                        worst_arc = k;
                        worst_pt = i;
                    }
                }
            }
        }
        return Err(Error::PathCollision {
            point: worst_pt,
            arc: worst_arc,
        });
    }
    let mid = interpolate(from, to, 0.5)?;
    let half = substep(from, &mid, arcs, depth + 1)?;
    substep(&mid, to, half, depth + 1)
}

/// Smooth bump: 1 on `[0, rigid]`, 0 beyond `support`.
fn bump(d: f64, rigid: f64, support: f64) -> f64 {
    if d <= rigid {
        1.0
    } else if d >= support {
        0.0
    } else {
        let t = (d - rigid) / (support - rigid);
        let sig = |x: f64| (-1.0 / x).exp();
        let s = sig(t) / (sig(t) + sig(1.0 - t));
        1.0 - s
    }
}

/// Split segments longer than `h_max`, assigning exact in-segment branch
/// increments to inserted vertices. The two vanishing factors keep their
/// directional arguments, which are constant along their end segments.
fn resample(arcs: &mut ArcSystem, config: &Configuration, h_max: f64) {
    let z = config.points();
    let m = z.len();
    for (k, arc) in arcs.arcs.iter_mut().enumerate() {
        let nseg = arc.vertices.len() - 1;
        let mut vertices = vec![arc.vertices[0]];
        let mut args = vec![arc.args[0].clone()];
        for seg in 0..nseg {
            let a = arc.vertices[seg];
            let b = arc.vertices[seg + 1];
            let first = seg == 0;
            let last = seg == nseg - 1;
            let pieces = ((b - a).norm() / h_max).ceil().max(1.0) as usize;
            for p in 1..=pieces {
                let t = p as f64 / pieces as f64;
                let xi = a + (b - a) * t;
                let mut row = Vec::with_capacity(m);
                for i in 0..m {
                    let vanishing_start = first && i == k;
                    let vanishing_end = last && i == k + 1;
                    if vanishing_start {
                        // direction constant along the first segment
                        row.push(arc.args[seg + 1][i]);
                    } else if vanishing_end {
                        row.push(arc.args[seg][i]);
                    } else {
                        row.push(arc.args[seg][i] + principal_increment(z[i], a, xi));
                    }
                }
                if p == pieces {
                    // Keep the transported end-vertex arguments exactly.
                    vertices.push(b);
                    args.push(arc.args[seg + 1].clone());
                } else {
                    vertices.push(xi);
                    args.push(row);
                }
            }
        }
        arc.vertices = vertices;
        arc.args = args;
    }
}

/// The monodromy matrix of a closed loop, acting on the truncated period
/// coordinates `(F_1 .. F_{n+1})` by `F_end = M F_start`.
///
/// `M` expresses the dragged cycles in the original cycle basis (a row
/// action on cycle labels), so concatenated loops compose in traversal
/// order: `M(a then b) = M(a) M(b)`.
#[derive(Debug, Clone)]
pub struct MonodromyMatrix {
    pub matrix: DMatrix<C64>,
    pub eigenvalues: Vec<C64>,
    /// `||M^H H M - H||_F / ||H||_F` for the restricted invariant form.
    pub invariance_defect: f64,
    /// Condition number of the start frame.
    pub frame_condition: f64,
}

/// Assemble the monodromy of a closed loop based at a real strictly
/// increasing configuration.
///
/// The frame is built from `n+1` starting configurations obtained by small
/// imaginary perturbations of individual points; each is continued along a
/// translated (homotopic) copy of the loop, and `M` solves the resulting
/// linear system. Independence of the frame is checked by its condition
/// number.
pub fn monodromy(
    weights: &WeightSystem,
    looppath: &ConfigPath,
    cfg: &QuadConfig,
) -> Result<MonodromyMatrix> {
    let base = &looppath.configs[0];
    let endc = looppath.configs.last().unwrap();
    let closed = base
        .points()
        .iter()
        .zip(endc.points())
        .all(|(a, b)| (a - b).norm() < 1e-12 * (1.0 + a.norm()));
    if !closed {
        return Err(Error::InvalidInput("monodromy needs a closed loop".into()));
    }
    let base_arcs = ArcSystem::canonical(base)?;
    let m = weights.len();
    let n1 = m - 1;
    let eps = base.min_gap() / 10.0;

    let mut start_cols: Vec<PeriodVector> = Vec::with_capacity(n1);
    let mut end_cols: Vec<PeriodVector> = Vec::with_capacity(n1);
    for a in 0..n1 {
        let mut offset = vec![C64::new(0.0, 0.0); m];
        offset[a] = C64::new(0.0, eps);
        let perturbed: Vec<C64> = base
            .points()
            .iter()
            .zip(&offset)
            .map(|(z, o)| z + o)
            .collect();
        let perturbed = Configuration::new(perturbed)?;
        // short leg base -> perturbed carries arcs and branch there
        let (start_pv, start_arcs) =
            continue_period(weights, &[base.clone(), perturbed.clone()], &base_arcs, cfg)?;
        let loop_a = looppath.translated(&offset)?;
        let (end_pv, _) = continue_period(weights, &loop_a.configs, &start_arcs, cfg)?;
        start_cols.push(start_pv);
        end_cols.push(end_pv);
    }
    let mut s = DMatrix::zeros(n1, n1);
    let mut e = DMatrix::zeros(n1, n1);
    for (j, (sp, ep)) in start_cols.iter().zip(&end_cols).enumerate() {
        for i in 0..n1 {
            s[(i, j)] = sp.f[i];
            e[(i, j)] = ep.f[i];
        }
    }
    let cond = linalg::condition_number(&s);
    if cond.is_nan() || cond >= 1e6 {
        return Err(Error::SingularBasis(cond));
    }
    let s_inv = s
        .clone()
        .try_inverse()
        .ok_or(Error::SingularBasis(f64::INFINITY))?;
    let mat = &e * s_inv;
    let h = hermitian_form(weights).h_restricted;
    let defect = linalg::fro_norm(&(mat.adjoint() * &h * &mat - &h)) / linalg::fro_norm(&h);
    let eigenvalues = linalg::complex_eigenvalues(&mat);
    Ok(MonodromyMatrix {
        matrix: mat,
        eigenvalues,
        invariance_defect: defect,
        frame_condition: cond,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> QuadConfig {
        QuadConfig::default()
    }

    #[test]
    fn constant_path_is_identity_on_periods() {
        let w = WeightSystem::new(&[0.3, 0.4, 0.5]).unwrap();
        let c = Configuration::from_reals(&[0.0, 1.0, 2.0]).unwrap();
        let arcs = ArcSystem::canonical(&c).unwrap();
        let before = period_over_arcs(&w, &c, &arcs, &cfg()).unwrap();
        let (after, _) = continue_period(&w, &[c.clone(), c.clone()], &arcs, &cfg()).unwrap();
        for (a, b) in before.f.iter().zip(&after.f) {
            assert!((a - b).norm() < 1e-10 * a.norm());
        }
    }

    #[test]
    fn round_trip_returns_original() {
        let w = WeightSystem::new(&[0.3, 0.4, 0.5]).unwrap();
        let c0 = Configuration::from_reals(&[0.0, 1.0, 2.0]).unwrap();
        let arcs = ArcSystem::canonical(&c0).unwrap();
        let before = period_over_arcs(&w, &c0, &arcs, &cfg()).unwrap();
        // out along a wiggle and back
        let mid1 = Configuration::new(vec![
            C64::new(0.0, 0.2),
            C64::new(1.1, -0.1),
            C64::new(2.0, 0.15),
        ])
        .unwrap();
        let mid2 = Configuration::new(vec![
            C64::new(-0.1, 0.3),
            C64::new(1.2, -0.2),
            C64::new(1.9, 0.3),
        ])
        .unwrap();
        let path = vec![c0.clone(), mid1.clone(), mid2.clone(), mid1.clone(), c0.clone()];
        let (after, _) = continue_period(&w, &path, &arcs, &cfg()).unwrap();
        for (a, b) in before.f.iter().zip(&after.f) {
            assert!((a - b).norm() < 1e-6 * a.norm(), "{a} vs {b}");
        }
    }

    #[test]
    fn step_too_large_detected() {
        let w = WeightSystem::new(&[0.3, 0.4, 0.5]).unwrap();
        let c0 = Configuration::from_reals(&[0.0, 1.0, 2.0]).unwrap();
        let c1 = Configuration::from_reals(&[0.5, 1.0, 2.0]).unwrap();
        let arcs = ArcSystem::canonical(&c0).unwrap();
        assert!(matches!(
            continue_period(&w, &[c0, c1], &arcs, &cfg()),
            Err(Error::StepTooLarge { .. })
        ));
    }

    #[test]
    fn local_monodromy_eigenvalues_n1() {
        // Loop of z_1 around z_2: eigenvalues {1, exp(-2 pi i (mu_1 + mu_2))}.
        let mu = [0.3, 0.4, 0.5];
        let w = WeightSystem::new(&mu).unwrap();
        let base = Configuration::from_reals(&[0.0, 1.0, 2.0]).unwrap();
        let lp = ConfigPath::encircle(&base, 1, 2, None).unwrap();
        let m = monodromy(&w, &lp, &cfg()).unwrap();
        let expected = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (mu[1] + mu[2]));
        let mut evs = m.eigenvalues.clone();
        // one eigenvalue near 1, one near expected
        evs.sort_by(|a, b| {
            (a - C64::new(1.0, 0.0))
                .norm()
                .partial_cmp(&(b - C64::new(1.0, 0.0)).norm())
                .unwrap()
        });
        assert!((evs[0] - C64::new(1.0, 0.0)).norm() < 1e-4, "{evs:?}");
        assert!((evs[1] - expected).norm() < 1e-4, "{evs:?} vs {expected}");
        assert!(m.invariance_defect < 1e-6, "defect {}", m.invariance_defect);
    }

    #[test]
    fn classical_gauss_exponent_dictionary_n1() {
        // For eta with points (0, x, 1) the period is an Euler integral of
        // F(a, b; c; x) with a = mu_2, b = 1 - mu_0, c = 2 - mu_0 - mu_1.
        // The circuit of x around 1 has eigenvalues {1, e^{2 pi i (c-a-b)}};
        // c - a - b = 1 - mu_1 - mu_2, computed here from (a, b, c) as an
        // independent route to the same prediction.
        let mu = [0.35, 0.25, 0.3];
        let (a, b, c) = (mu[2], 1.0 - mu[0], 2.0 - mu[0] - mu[1]);
        let w = WeightSystem::new(&mu).unwrap();
        let base = Configuration::from_reals(&[0.0, 0.6, 1.0]).unwrap();
        let lp = ConfigPath::encircle(&base, 1, 2, None).unwrap();
        let m = monodromy(&w, &lp, &cfg()).unwrap();
        let expected = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (c - a - b));
        let best = m
            .eigenvalues
            .iter()
            .map(|e| (e - expected).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-4, "{:?} vs {expected}", m.eigenvalues);
    }

    #[test]
    fn monodromy_preserves_hermitian_form_n2() {
        let mu = [0.3, 0.35, 0.4, 0.45];
        let w = WeightSystem::new(&mu).unwrap();
        let base = Configuration::from_reals(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        let lp = ConfigPath::encircle(&base, 2, 3, None).unwrap();
        let m = monodromy(&w, &lp, &cfg()).unwrap();
        assert!(m.invariance_defect < 1e-6, "defect {}", m.invariance_defect);
        let expected = C64::from_polar(1.0, -2.0 * std::f64::consts::PI * (mu[2] + mu[3]));
        let best = m
            .eigenvalues
            .iter()
            .map(|e| (e - expected).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(best < 1e-4);
        let ones = m
            .eigenvalues
            .iter()
            .filter(|e| (*e - C64::new(1.0, 0.0)).norm() < 1e-4)
            .count();
        assert_eq!(ones, 2, "{:?}", m.eigenvalues);
    }

    #[test]
    fn monodromy_composition_is_homomorphism() {
        let mu = [0.3, 0.4, 0.5];
        let w = WeightSystem::new(&mu).unwrap();
        let base = Configuration::from_reals(&[0.0, 1.0, 2.0]).unwrap();
        let l1 = ConfigPath::encircle(&base, 1, 2, None).unwrap();
        let l2 = ConfigPath::encircle(&base, 1, 0, None).unwrap();
        let m1 = monodromy(&w, &l1, &cfg()).unwrap();
        let m2 = monodromy(&w, &l2, &cfg()).unwrap();
        let m12 = monodromy(&w, &l1.then(&l2), &cfg()).unwrap();
        // cycle-label convention: traversal order composes left to right
        let prod = &m1.matrix * &m2.matrix;
        let err = linalg::fro_norm(&(&m12.matrix - prod)) / linalg::fro_norm(&m12.matrix);
        assert!(err < 1e-5, "composition error {err}");
    }
}
