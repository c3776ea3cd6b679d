//! Cone-manifold stratification bookkeeping.
//!
//! Everything here is combinatorial arithmetic over the exponent table: the
//! scalar cone angle `gamma(Q) = 2 pi |1 - kappa_L| / p_L`, the link
//! fractions `(gamma/2pi)^{q-1}/N_Q` and `(gamma/2pi)^q/N_Q`, the per-flat
//! contraction/cusp actions of the metric completion, flag chains with
//! their quotient factorizations, and symbolic tangent-cone join
//! descriptors. Tangent cones are descriptors, not metric spaces: the
//! sphere join factor, the Seifert datum of the normal cone and the local
//! curvature-model exponents are the computable content.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dunkl::{exponent_table, DunklSystem};
use crate::error::{Error, Result};
use crate::lattice::IntersectionLattice;
use crate::{linalg, C64, GeometryType, Tol};

/// Which side of the blow-down a stratum lives on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `P(L^o)`, kept when `kappa_L < 1`.
    Longitudinal,
    /// `P((V/L)^o)`, kept when `kappa_L > 1`.
    Transversal,
    /// `kappa_L = 1` within the band: a finite-volume end, no cone angle.
    Cusp,
}

/// Per-stratum geometry data.
#[derive(Debug, Clone, Serialize)]
pub struct StratumDescriptor {
    /// Lattice index of the flat, when the descriptor is flat-backed.
    pub flat_index: Option<usize>,
    pub side: Side,
    /// Complex codimension of the stratum in `P(V)`.
    pub q: usize,
    pub kappa: f64,
    /// Schwarz rotation order dividing the cone angle.
    pub p: u32,
    /// Order of the transversal Schwarz symmetry group.
    pub n_q: u32,
    /// Complex projective dimension of the ambient space.
    pub ambient_dim: usize,
}

impl StratumDescriptor {
    pub fn new(
        side: Side,
        q: usize,
        kappa: f64,
        p: u32,
        n_q: u32,
        ambient_dim: usize,
        band: f64,
    ) -> Result<Self> {
        if q < 1 || p < 1 || n_q < 1 {
            return Err(Error::InvalidInput("q, p, N_Q must all be >= 1".into()));
        }
        let consistent = match side {
            Side::Cusp => (kappa - 1.0).abs() <= band,
            Side::Longitudinal => kappa < 1.0 - band,
            Side::Transversal => kappa > 1.0 + band,
        };
        if !consistent {
            return Err(Error::InvalidInput(format!(
                "side {side:?} inconsistent with kappa = {kappa}"
            )));
        }
        Ok(StratumDescriptor {
            flat_index: None,
            side,
            q,
            kappa,
            p,
            n_q,
            ambient_dim,
        })
    }
}

/// Scalar cone angle `gamma(Q) = 2 pi |1 - kappa_L| / p_L`.
pub fn cone_angle(desc: &StratumDescriptor) -> Result<f64> {
    if desc.side == Side::Cusp {
        return Err(Error::CuspHasNoAngle);
    }
    Ok(2.0 * std::f64::consts::PI * (1.0 - desc.kappa).abs() / desc.p as f64)
}

/// `((gamma/2pi)^{q-1} / N_Q, (gamma/2pi)^q / N_Q)`.
pub fn link_fractions(desc: &StratumDescriptor) -> Result<(f64, f64)> {
    let gamma = cone_angle(desc)?;
    let ratio = gamma / (2.0 * std::f64::consts::PI);
    let complex = ratio.powi(desc.q as i32 - 1) / desc.n_q as f64;
    let real = complex * ratio;
    Ok((complex, real))
}

/// Completion action for one irreducible flat.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    /// `kappa_L < 1`: the transversal direction of `P(L)` is contracted.
    ContractTransversal,
    /// `kappa_L > 1`: `P(L)`'s own direction is contracted.
    ContractLongitudinal,
    /// `kappa_L = 1` within the band.
    Cusp,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompletionPlan {
    pub geometry: GeometryType,
    /// `(flat index, action)` over all irreducible proper flats.
    pub actions: Vec<(usize, Action)>,
    /// Flats inside the cusp band.
    pub cusps: Vec<usize>,
    /// Human-readable record of the verified hypotheses.
    pub checks: Vec<String>,
}

impl CompletionPlan {
    pub fn action(&self, flat: usize) -> Option<Action> {
        self.actions
            .iter()
            .find(|(f, _)| *f == flat)
            .map(|(_, a)| *a)
    }
}

/// Per-flat actions by `kappa_L` against 1, plus the type-specific
/// hypothesis checks. Fails loudly with the first violated condition.
pub fn completion_plan(sys: &DunklSystem, geometry: GeometryType) -> Result<CompletionPlan> {
    let tol = sys.tol();
    let band = tol.cusp_band;
    let table = exponent_table(sys);
    let lat = sys.lattice();
    let mut actions = Vec::new();
    let mut cusps = Vec::new();
    for fi in lat.irreducible_flats() {
        let k = table.kappa[fi];
        let action = if (k - 1.0).abs() <= band {
            cusps.push(fi);
            Action::Cusp
        } else if k < 1.0 {
            Action::ContractTransversal
        } else {
            Action::ContractLongitudinal
        };
        actions.push((fi, action));
    }
    let mut checks = Vec::new();
    match geometry {
        GeometryType::Parabolic => {
            if (table.kappa_origin - 1.0).abs() > band {
                return Err(Error::HypothesisViolated {
                    geometry: "parabolic".into(),
                    condition: format!("kappa_0 = {} is not 1", table.kappa_origin),
                });
            }
            checks.push(format!("kappa_0 = {} within the band", table.kappa_origin));
            for (i, h) in sys.arrangement().hyperplanes().iter().enumerate() {
                if h.kappa() >= 1.0 - band {
                    return Err(Error::HypothesisViolated {
                        geometry: "parabolic".into(),
                        condition: format!("kappa of hyperplane {i} = {} is not in (0, 1)", h.kappa()),
                    });
                }
            }
            checks.push("all hyperplane weights in (0, 1)".into());
        }
        GeometryType::Elliptic => {
            if let Some(&fi) = cusps.first() {
                return Err(Error::HypothesisViolated {
                    geometry: "elliptic".into(),
                    condition: format!(
                        "irreducible flat {fi} has kappa_L = {} in the cusp band",
                        table.kappa[fi]
                    ),
                });
            }
            checks.push("no irreducible flat with kappa_L = 1".into());
            // Pairwise condition on flats with kappa > 1: their intersection
            // must carry an irreducible hyperplane set.
            let heavy: Vec<usize> = actions
                .iter()
                .filter(|(_, a)| *a == Action::ContractLongitudinal)
                .map(|(f, _)| *f)
                .collect();
            for (ai, &a) in heavy.iter().enumerate() {
                for &b in heavy.iter().skip(ai + 1) {
                    let meet = meet_flat(lat, a, b, tol)?;
                    if !lat.is_irreducible(meet) {
                        return Err(Error::HypothesisViolated {
                            geometry: "elliptic".into(),
                            condition: format!(
                                "intersection of flats {a} and {b} (flat {meet}) is reducible"
                            ),
                        });
                    }
                }
            }
            checks.push("pairwise intersections of kappa > 1 flats irreducible".into());
        }
        GeometryType::Hyperbolic => {
            checks.push(format!("{} cusp flat(s) flagged", cusps.len()));
        }
    }
    Ok(CompletionPlan {
        geometry,
        actions,
        cusps,
        checks,
    })
}

/// Lattice index of the intersection of two flats (the lattice is
/// meet-closed, so it exists).
fn meet_flat(lat: &IntersectionLattice, a: usize, b: usize, tol: &Tol) -> Result<usize> {
    let (fa, fb) = (lat.flat(a), lat.flat(b));
    let n = fa.basis.nrows();
    let da = fa.basis.ncols();
    let db = fb.basis.ncols();
    if da == 0 || db == 0 {
        // meeting the origin gives the origin
        return lat
            .flats()
            .iter()
            .position(|f| f.is_origin())
            .ok_or(Error::FlatNotInLattice);
    }
    // x in both spans iff (I - P_a) x = 0 and (I - P_b) x = 0.
    let pa = DMatrix::identity(n, n) - linalg::projector(&fa.basis);
    let pb = DMatrix::identity(n, n) - linalg::projector(&fb.basis);
    let mut stack = DMatrix::<C64>::zeros(2 * n, n);
    stack.view_mut((0, 0), (n, n)).copy_from(&pa);
    stack.view_mut((n, 0), (n, n)).copy_from(&pb);
    let kernel = linalg::null_space(&stack, tol.rank);
    lat.find_by_subspace(&kernel, tol.rank * 1e3)
        .ok_or(Error::FlatNotInLattice)
}

/// A strictly nested chain of irreducible proper flats, ordered by
/// increasing dimension.
#[derive(Debug, Clone, Serialize)]
pub struct FlagChain {
    pub flats: Vec<usize>,
}

/// All strictly nested chains of irreducible proper flats.
pub fn enumerate_flags(lat: &IntersectionLattice) -> Vec<FlagChain> {
    let mut nodes: Vec<usize> = lat.irreducible_flats().collect();
    // ascending dimension = descending codimension
    nodes.sort_by_key(|&i| std::cmp::Reverse(lat.flat(i).codim));
    let mut chains = Vec::new();
    fn extend(
        lat: &IntersectionLattice,
        nodes: &[usize],
        chain: &mut Vec<usize>,
        out: &mut Vec<FlagChain>,
    ) {
        let last = *chain.last().unwrap();
        for &next in nodes {
            if lat.flat(next).codim < lat.flat(last).codim && lat.contains(last, next) {
                chain.push(next);
                out.push(FlagChain { flats: chain.clone() });
                extend(lat, nodes, chain, out);
                chain.pop();
            }
        }
    }
    for &start in &nodes {
        let mut chain = vec![start];
        chains.push(FlagChain { flats: chain.clone() });
        extend(lat, &nodes, &mut chain, &mut chains);
    }
    chains.sort_by(|a, b| a.flats.cmp(&b.flats));
    chains
}

/// One factor `P((upper/lower)^o)` of a flag stratum, or the top factor
/// `P((V/last)^o)` when `upper` is `None`.
#[derive(Debug, Clone, Serialize)]
pub struct FactorDescriptor {
    pub lower: usize,
    /// `None` stands for the ambient space `V`.
    pub upper: Option<usize>,
    /// Complex projective dimension of the quotient factor.
    pub dim: usize,
    /// Marked in a hyperbolic plan when the factor sits above a cusp flat
    /// (the projective factor becomes a ray space).
    pub ray_space: bool,
}

/// Quotient factors of a flag stratum: consecutive quotients along the
/// chain plus the top factor `V/last`.
pub fn stratum_factorization(
    sys: &DunklSystem,
    chain: &FlagChain,
    plan: &CompletionPlan,
) -> Vec<FactorDescriptor> {
    let lat = sys.lattice();
    let dim = sys.dim();
    let mut factors = Vec::new();
    let is_cusp = |fi: usize| plan.geometry == GeometryType::Hyperbolic
        && plan.action(fi) == Some(Action::Cusp);
    for w in chain.flats.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        factors.push(FactorDescriptor {
            lower: lo,
            upper: Some(hi),
            dim: lat.flat(hi).dim() - lat.flat(lo).dim() - 1,
            ray_space: is_cusp(lo),
        });
    }
    let last = *chain.flats.last().unwrap();
    factors.push(FactorDescriptor {
        lower: last,
        upper: None,
        dim: dim - lat.flat(last).dim() - 1,
        ray_space: is_cusp(last),
    });
    factors
}

/// Which constant-curvature local model applies (the positive, zero and
/// negative curvature forms respectively).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalModel {
    PositiveCurvature,
    ZeroCurvature,
    NegativeCurvature,
}

impl LocalModel {
    fn of(geometry: GeometryType) -> LocalModel {
        match geometry {
            GeometryType::Elliptic => LocalModel::PositiveCurvature,
            GeometryType::Parabolic => LocalModel::ZeroCurvature,
            GeometryType::Hyperbolic => LocalModel::NegativeCurvature,
        }
    }
}

/// Seifert datum of a normal cone: a circle of length `gamma` over a
/// complex-link descriptor.
#[derive(Debug, Clone, Serialize)]
pub struct SeifertDatum {
    pub circle_length: f64,
    pub complex_link: Box<TangentConeDescriptor>,
}

/// Symbolic tangent cone: a join `S^{k-1} * N_1 * ... * N_r` with prime
/// Seifert factors, plus the local curvature model with its exponents.
#[derive(Debug, Clone, Serialize)]
pub struct TangentConeDescriptor {
    /// `k` in the sphere join factor `S^{k-1}` (so `k = 2d` for a smooth
    /// flat complex factor of dimension `d`).
    pub sphere_dim: usize,
    pub primes: Vec<SeifertDatum>,
    pub local_model: Option<LocalModel>,
    /// Cone exponents `beta_i = gamma_i / 2 pi` of the crossing factors.
    pub exponents: Vec<f64>,
}

impl TangentConeDescriptor {
    /// The tangent cone at a smooth point of complex dimension `n`:
    /// the pure sphere `S^{2n-1}`.
    pub fn smooth(n: usize) -> TangentConeDescriptor {
        TangentConeDescriptor {
            sphere_dim: 2 * n,
            primes: Vec::new(),
            local_model: None,
            exponents: Vec::new(),
        }
    }

    /// Whether the descriptor is a pure sphere.
    pub fn is_sphere(&self) -> bool {
        self.primes.is_empty()
    }

    /// Join of descriptors: sphere factors satisfy
    /// `S^{m} * S^{n} = S^{m+n+1}` (the `k` indices add), prime factors
    /// concatenate.
    pub fn join(&self, other: &TangentConeDescriptor) -> TangentConeDescriptor {
        let mut primes = self.primes.clone();
        primes.extend(other.primes.iter().cloned());
        let mut exponents = self.exponents.clone();
        exponents.extend(other.exponents.iter().cloned());
        TangentConeDescriptor {
            sphere_dim: self.sphere_dim + other.sphere_dim,
            primes,
            local_model: self.local_model.or(other.local_model),
            exponents,
        }
    }
}

/// Tangent cone at a generic point of an irreducible stratum: the join of
/// the sphere of the stratum's own directions with the normal cone, a
/// circle bundle of length `gamma(Q)` over the (generically smooth) complex
/// link.
pub fn tangent_cone(desc: &StratumDescriptor, geometry: GeometryType) -> Result<TangentConeDescriptor> {
    let gamma = cone_angle(desc)?;
    let stratum_dim = desc.ambient_dim - desc.q;
    let link = TangentConeDescriptor::smooth(desc.q - 1);
    Ok(TangentConeDescriptor {
        sphere_dim: 2 * stratum_dim,
        primes: vec![SeifertDatum {
            circle_length: gamma,
            complex_link: Box::new(link),
        }],
        local_model: Some(LocalModel::of(geometry)),
        exponents: vec![gamma / (2.0 * std::f64::consts::PI)],
    })
}

/// One line of the stratification report.
#[derive(Debug, Clone, Serialize)]
pub struct StratumRecord {
    pub flat: usize,
    pub members: Vec<usize>,
    pub irreducible: bool,
    pub kappa: f64,
    pub action: Action,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub p: u32,
    pub n_q: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub real_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tangent_cone: Option<TangentConeDescriptor>,
    /// Component partition for reducible flats (reported as products).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<Vec<usize>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StrataReport {
    pub geometry: GeometryType,
    pub records: Vec<StratumRecord>,
}

/// Assemble the full per-flat report. Symmetry orders `(p, N_Q)` default to
/// 1 and may be supplied per flat index by the caller (for the Lauricella
/// family see [`lauricella_symmetry_orders`]).
pub fn strata_report(
    sys: &DunklSystem,
    plan: &CompletionPlan,
    symmetry: Option<&BTreeMap<usize, (u32, u32)>>,
) -> Result<StrataReport> {
    let lat = sys.lattice();
    let table = exponent_table(sys);
    let band = sys.tol().cusp_band;
    let mut records = Vec::new();
    for fi in lat.proper_flats() {
        let flat = lat.flat(fi);
        let kappa = table.kappa[fi];
        let (p, n_q) = symmetry.and_then(|m| m.get(&fi)).copied().unwrap_or((1, 1));
        let action = if (kappa - 1.0).abs() <= band {
            Action::Cusp
        } else if kappa < 1.0 {
            Action::ContractTransversal
        } else {
            Action::ContractLongitudinal
        };
        if lat.is_irreducible(fi) {
            // The stratum: P(L^o) below the wall, P((V/L)^o) above it;
            // the origin flat has no projective stratum of its own.
            let side = match action {
                Action::Cusp => Side::Cusp,
                Action::ContractTransversal => Side::Longitudinal,
                Action::ContractLongitudinal => Side::Transversal,
            };
            let q = match side {
                Side::Longitudinal | Side::Cusp => flat.codim,
                Side::Transversal => flat.dim(),
            };
            let degenerate = flat.dim() == 0 || q == 0;
            let desc = if degenerate || side == Side::Cusp {
                None
            } else {
                Some(StratumDescriptor {
                    flat_index: Some(fi),
                    side,
                    q,
                    kappa,
                    p,
                    n_q,
                    ambient_dim: sys.dim() - 1,
                })
            };
            let (gamma, fracs, cone) = match &desc {
                Some(d) => {
                    let g = cone_angle(d)?;
                    let f = link_fractions(d)?;
                    let c = tangent_cone(d, plan.geometry)?;
                    (Some(g), Some(f), Some(c))
                }
                None => (None, None, None),
            };
            records.push(StratumRecord {
                flat: fi,
                members: flat.members.clone(),
                irreducible: true,
                kappa,
                action,
                gamma,
                p,
                n_q,
                complex_fraction: fracs.map(|f| f.0),
                real_fraction: fracs.map(|f| f.1),
                tangent_cone: cone,
                components: None,
            });
        } else {
            // Product flats: no single cone angle; the tangent cone is the
            // join of the component normal cones, recorded per component.
            records.push(StratumRecord {
                flat: fi,
                members: flat.members.clone(),
                irreducible: false,
                kappa,
                action,
                gamma: None,
                p,
                n_q,
                complex_fraction: None,
                real_fraction: None,
                tangent_cone: None,
                components: Some(lat.components(fi).to_vec()),
            });
        }
    }
    records.sort_by_key(|r| r.flat);
    Ok(StrataReport {
        geometry: plan.geometry,
        records,
    })
}

/// Symmetry orders for the Lauricella family: the Schwarz rotation group of
/// a hyperplane `z_i = z_j` has order 2 exactly when `mu_i = mu_j` (the
/// transposition acts as -1 on the normal line); higher flats admit no
/// scalar rotation. `N_Q` is the order of the permutation group of the
/// merged index set `I` preserving the weights, `prod (multiplicity!)`.
pub fn lauricella_symmetry_orders(mu: &[f64], sys: &DunklSystem) -> BTreeMap<usize, (u32, u32)> {
    let m = mu.len();
    let pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|i| ((i + 1)..m).map(move |j| (i, j)))
        .collect();
    let lat = sys.lattice();
    let mut out = BTreeMap::new();
    for fi in lat.proper_flats() {
        let flat = lat.flat(fi);
        // Merged index set of the flat: union over member pairs.
        let mut index_set: Vec<usize> = flat
            .members
            .iter()
            .flat_map(|&h| [pairs[h].0, pairs[h].1])
            .collect();
        index_set.sort_unstable();
        index_set.dedup();
        let p = if flat.codim == 1 {
            let (i, j) = pairs[flat.members[0]];
            if (mu[i] - mu[j]).abs() <= 1e-9 {
                2
            } else {
                1
            }
        } else {
            1
        };
        // multiplicity factorial product over equal weights inside I
        let mut n_q: u64 = 1;
        let mut seen: Vec<(f64, u64)> = Vec::new();
        for &i in &index_set {
            match seen.iter_mut().find(|(v, _)| (*v - mu[i]).abs() <= 1e-9) {
                Some((_, c)) => {
                    *c += 1;
                    n_q *= *c;
                }
                None => seen.push((mu[i], 1)),
            }
        }
        out.insert(fi, (p, n_q.min(u32::MAX as u64) as u32));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::{boolean, lauricella_arrangement};
    use crate::dunkl::DunklSystem;

    fn desc(side: Side, q: usize, kappa: f64, p: u32, n_q: u32) -> StratumDescriptor {
        StratumDescriptor::new(side, q, kappa, p, n_q, 4, 1e-9).unwrap()
    }

    #[test]
    fn cone_angle_values() {
        let d = desc(Side::Longitudinal, 2, 0.5, 1, 1);
        assert!((cone_angle(&d).unwrap() - std::f64::consts::PI).abs() < 1e-14);
        let d = desc(Side::Transversal, 2, 1.5, 1, 1);
        assert!((cone_angle(&d).unwrap() - std::f64::consts::PI).abs() < 1e-14);
        let d = desc(Side::Longitudinal, 1, 0.5, 2, 1);
        assert!((cone_angle(&d).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
        let d = StratumDescriptor::new(Side::Cusp, 2, 1.0, 1, 1, 4, 1e-9).unwrap();
        assert!(matches!(cone_angle(&d), Err(Error::CuspHasNoAngle)));
    }

    #[test]
    fn link_fraction_values() {
        // q = 2, gamma = pi, N_Q = 1 -> (1/2, 1/4)
        let d = desc(Side::Longitudinal, 2, 0.5, 1, 1);
        let (c, r) = link_fractions(&d).unwrap();
        assert!((c - 0.5).abs() < 1e-14 && (r - 0.25).abs() < 1e-14);
        // q = 1: complex fraction is the empty product
        let d = desc(Side::Longitudinal, 1, 0.25, 1, 1);
        let (c, r) = link_fractions(&d).unwrap();
        assert!((c - 1.0).abs() < 1e-14 && (r - 0.75).abs() < 1e-14);
        // N_Q division
        let d = desc(Side::Longitudinal, 2, 0.5, 1, 2);
        let (c, r) = link_fractions(&d).unwrap();
        assert!((c - 0.25).abs() < 1e-14 && (r - 0.125).abs() < 1e-14);
    }

    #[test]
    fn real_fraction_is_complex_times_ratio() {
        for (q, kappa, p, n_q) in [(1usize, 0.3, 1u32, 1u32), (2, 0.5, 2, 3), (3, 1.7, 1, 2)] {
            let side = if kappa < 1.0 { Side::Longitudinal } else { Side::Transversal };
            let d = desc(side, q, kappa, p, n_q);
            let g = cone_angle(&d).unwrap();
            let (c, r) = link_fractions(&d).unwrap();
            assert!((r - c * g / (2.0 * std::f64::consts::PI)).abs() <= 1e-15 * (1.0 + r.abs()));
        }
    }

    #[test]
    fn parabolic_plan_for_quarter_weights() {
        let sys = DunklSystem::new(
            lauricella_arrangement(&[0.25; 4], &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        let plan = completion_plan(&sys, GeometryType::Parabolic).unwrap();
        // six hyperplane flats, kappa = 1/2 < 1
        let hyper: Vec<_> = plan
            .actions
            .iter()
            .filter(|(f, _)| sys.lattice().flat(*f).codim == 1)
            .collect();
        assert_eq!(hyper.len(), 6);
        assert!(hyper.iter().all(|(_, a)| *a == Action::ContractTransversal));
    }

    #[test]
    fn elliptic_plan_rejects_cusp_band() {
        // mu with an exact kappa_L = 1 flat: 0.5 + 0.5 = 1
        let sys = DunklSystem::new(
            lauricella_arrangement(&[0.5, 0.5, 0.1, 0.1], &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        match completion_plan(&sys, GeometryType::Elliptic) {
            Err(Error::HypothesisViolated { geometry, .. }) => assert_eq!(geometry, "elliptic"),
            other => panic!("expected HypothesisViolated, got {other:?}"),
        }
    }

    #[test]
    fn hyperbolic_plan_assigns_actions_by_kappa() {
        let sys = DunklSystem::new(
            lauricella_arrangement(&[0.3; 6], &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        let plan = completion_plan(&sys, GeometryType::Hyperbolic).unwrap();
        let table = exponent_table(&sys);
        for &(fi, action) in &plan.actions {
            let k = table.kappa[fi];
            let expect = if k < 1.0 {
                Action::ContractTransversal
            } else {
                Action::ContractLongitudinal
            };
            assert_eq!(action, expect, "flat {fi} with kappa {k}");
        }
        // |I| = 2, 3 contract transversal; |I| = 4, 5 contract longitudinal
        for &(fi, action) in &plan.actions {
            let members = &sys.lattice().flat(fi).members;
            let k = table.kappa[fi];
            match members.len() {
                1 | 3 => {
                    assert!((k - 0.6).abs() < 1e-12 || (k - 0.9).abs() < 1e-12);
                    assert_eq!(action, Action::ContractTransversal);
                }
                6 => {
                    assert!((k - 1.2).abs() < 1e-12);
                    assert_eq!(action, Action::ContractLongitudinal);
                }
                10 => {
                    assert!((k - 1.5).abs() < 1e-12);
                    assert_eq!(action, Action::ContractLongitudinal);
                }
                _ => {}
            }
        }
    }

    #[test]
    fn parabolic_plan_rejects_wrong_origin() {
        let sys = DunklSystem::new(
            lauricella_arrangement(&[0.2; 4], &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        assert!(matches!(
            completion_plan(&sys, GeometryType::Parabolic),
            Err(Error::HypothesisViolated { .. })
        ));
    }

    #[test]
    fn flag_chains_of_braid_a2() {
        let sys = DunklSystem::new(
            crate::arrangement::coxeter_a(2, 0.5, &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        let chains = enumerate_flags(sys.lattice());
        // 3 hyperplанes + origin singletons + 3 chains origin < H_i
        assert_eq!(chains.len(), 7);
        let pairs = chains.iter().filter(|c| c.flats.len() == 2).count();
        assert_eq!(pairs, 3);
    }

    #[test]
    fn factorization_dims_in_dim2() {
        let sys = DunklSystem::new(
            crate::arrangement::coxeter_a(2, 0.5, &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        let plan = completion_plan(&sys, GeometryType::Elliptic).unwrap();
        let chains = enumerate_flags(sys.lattice());
        let pair = chains.iter().find(|c| c.flats.len() == 2).unwrap();
        let factors = stratum_factorization(&sys, pair, &plan);
        assert_eq!(factors.len(), 2);
        assert_eq!(factors[0].dim, 0); // P((H/0)^o)
        assert_eq!(factors[1].dim, 0); // P((V/H)^o)
    }

    #[test]
    fn ray_space_marked_above_cusp() {
        // kappa_L = 1 on the triple flat {0,1,2}: 0.4 + 0.3 + 0.3 = 1
        let mu = [0.4, 0.3, 0.3, 0.45];
        let sys = DunklSystem::new(
            lauricella_arrangement(&mu, &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        let plan = completion_plan(&sys, GeometryType::Hyperbolic).unwrap();
        assert_eq!(plan.cusps.len(), 1);
        let cusp = plan.cusps[0];
        let chains = enumerate_flags(sys.lattice());
        let chain = chains
            .iter()
            .find(|c| c.flats.len() == 2 && c.flats[0] == cusp)
            .expect("a chain starting at the cusp flat");
        let factors = stratum_factorization(&sys, chain, &plan);
        assert!(factors[0].ray_space);
        assert!(!factors[1].ray_space);
    }

    #[test]
    fn tangent_cone_join_arithmetic() {
        // S^m * S^n = S^{m+n+1}; in descriptor terms the k indices add
        let a = TangentConeDescriptor::smooth(2); // S^3
        let b = TangentConeDescriptor::smooth(1); // S^1
        let j = a.join(&b);
        assert_eq!(j.sphere_dim, 6); // S^5
        assert!(j.is_sphere());
        // associativity on sphere parts
        let c = TangentConeDescriptor::smooth(3);
        let left = a.join(&b).join(&c);
        let right = a.join(&b.join(&c));
        assert_eq!(left.sphere_dim, right.sphere_dim);
    }

    #[test]
    fn tangent_cone_of_generic_hyperplane_point() {
        // kappa_H = 1/2 in the parabolic plan: model exponent beta = 1/2,
        // join S^{2(n-1)-1} * (circle bundle over a point) in ambient n.
        let d = StratumDescriptor::new(Side::Longitudinal, 1, 0.5, 1, 1, 3, 1e-9).unwrap();
        let cone = tangent_cone(&d, GeometryType::Parabolic).unwrap();
        assert_eq!(cone.local_model, Some(LocalModel::ZeroCurvature));
        assert_eq!(cone.exponents, vec![0.5]);
        assert_eq!(cone.sphere_dim, 2 * (3 - 1));
        assert_eq!(cone.primes.len(), 1);
        assert!((cone.primes[0].circle_length - std::f64::consts::PI).abs() < 1e-14);
        assert!(cone.primes[0].complex_link.is_sphere());
    }

    #[test]
    fn report_marks_products_and_strata() {
        let sys = DunklSystem::new(
            boolean(2, &[0.5, 0.5], &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        let plan = completion_plan(&sys, GeometryType::Hyperbolic).unwrap();
        let report = strata_report(&sys, &plan, None).unwrap();
        let origin = report
            .records
            .iter()
            .find(|r| r.members.len() == 2)
            .unwrap();
        assert!(!origin.irreducible);
        assert_eq!(origin.components.as_ref().unwrap().len(), 2);
        assert!(origin.gamma.is_none());
        let hyper = report.records.iter().find(|r| r.members.len() == 1).unwrap();
        assert!(hyper.irreducible);
        assert!(hyper.gamma.is_some());
    }

    #[test]
    fn lauricella_orders_for_quarter_weights() {
        let mu = [0.25; 4];
        let sys = DunklSystem::new(
            lauricella_arrangement(&mu, &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        let orders = lauricella_symmetry_orders(&mu, &sys);
        for fi in sys.lattice().proper_flats() {
            let flat = sys.lattice().flat(fi);
            let (p, n_q) = orders[&fi];
            match flat.members.len() {
                1 => {
                    assert_eq!(p, 2); // equal weights: transposition rotates
                    assert_eq!(n_q, 2); // |I| = 2, equal weights: 2!
                }
                3 => {
                    assert_eq!(p, 1);
                    assert_eq!(n_q, 6); // |I| = 3: 3!
                }
                6 => {
                    assert_eq!(p, 1);
                    assert_eq!(n_q, 24); // |I| = 4: 4!
                }
                _ => {}
            }
        }
    }

    #[test]
    fn plan_actions_partition_irreducible_flats() {
        let sys = DunklSystem::new(
            lauricella_arrangement(&[0.3; 6], &Tol::default()).unwrap(),
            Tol::default(),
        )
        .unwrap();
        let plan = completion_plan(&sys, GeometryType::Hyperbolic).unwrap();
        let irr: Vec<usize> = sys.lattice().irreducible_flats().collect();
        let covered: Vec<usize> = plan.actions.iter().map(|(f, _)| *f).collect();
        assert_eq!(irr, covered);
        // changing the type never changes the kappa values, only verdicts
        let plan2 = completion_plan(&sys, GeometryType::Elliptic);
        assert!(plan2.is_ok() || matches!(plan2, Err(Error::HypothesisViolated { .. })));
    }
}
