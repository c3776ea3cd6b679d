//! Dunkl connection data: projection operators, flatness, exponents and the
//! hereditary (longitudinal/transversal) systems.
//!
//! The connection form itself is never materialised; the system is fully
//! determined by the family `rho_H = kappa_H pi_H` of weighted orthogonal
//! projections onto the normal lines.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::arrangement::{Arrangement, Hyperplane, InnerProductSpace};
use crate::error::{Error, Result};
use crate::lattice::{self, IntersectionLattice};
use crate::{linalg, C64, Tol};

/// The weighted projection `rho_H = kappa_H pi_H`, self-adjoint for the
/// arrangement's inner product, with kernel `H`, rank 1 and trace `kappa_H`.
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    pub matrix: DMatrix<C64>,
    pub hyperplane_index: usize,
}

/// Build `rho_H` for one hyperplane: `x -> kappa <x, nu>/<nu, nu> nu`,
/// i.e. `kappa (nu nu^H G) / (nu^H G nu)`.
pub fn projection(arr: &Arrangement, index: usize) -> ProjectionOperator {
    let h = &arr.hyperplanes()[index];
    let nu = h.normal();
    let g = arr.space().gram();
    let denom = (nu.adjoint() * g * nu)[(0, 0)];
    let outer = nu * nu.adjoint() * g;
    ProjectionOperator {
        matrix: outer.map(|c| c * h.kappa() / denom),
        hyperplane_index: index,
    }
}

/// Result of the codimension-2 flatness check.
#[derive(Debug, Clone, Serialize)]
pub struct FlatnessReport {
    pub is_flat: bool,
    /// Largest relative commutator norm over all codimension-2 checks.
    pub max_relative_commutator: f64,
    /// Violations sorted by flat index.
    pub violations: Vec<FlatnessViolation>,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlatnessViolation {
    pub flat_index: usize,
    pub members: Vec<usize>,
    pub relative_commutator: f64,
}

/// A weighted arrangement together with its lattice, projections and
/// flatness certificate.
#[derive(Debug, Clone)]
pub struct DunklSystem {
    arrangement: Arrangement,
    lattice: IntersectionLattice,
    projections: Vec<ProjectionOperator>,
    flatness: FlatnessReport,
    tol: Tol,
}

impl DunklSystem {
    pub fn new(arrangement: Arrangement, tol: Tol) -> Result<Self> {
        let lattice = lattice::build_lattice(&arrangement, &tol)?;
        let projections = (0..arrangement.len())
            .map(|i| projection(&arrangement, i))
            .collect();
        let mut sys = DunklSystem {
            arrangement,
            lattice,
            projections,
            flatness: FlatnessReport {
                is_flat: false,
                max_relative_commutator: 0.0,
                violations: Vec::new(),
                tolerance: tol.flatness,
            },
            tol,
        };
        sys.flatness = flatness_check(&sys);
        Ok(sys)
    }

    pub fn arrangement(&self) -> &Arrangement {
        &self.arrangement
    }

    pub fn lattice(&self) -> &IntersectionLattice {
        &self.lattice
    }

    pub fn projections(&self) -> &[ProjectionOperator] {
        &self.projections
    }

    pub fn flatness(&self) -> &FlatnessReport {
        &self.flatness
    }

    pub fn is_flat(&self) -> bool {
        self.flatness.is_flat
    }

    pub fn tol(&self) -> &Tol {
        &self.tol
    }

    pub fn dim(&self) -> usize {
        self.arrangement.dim()
    }

    /// Sum of the projections over a member set.
    fn projection_sum(&self, members: &[usize]) -> DMatrix<C64> {
        let n = self.dim();
        let mut s = DMatrix::zeros(n, n);
        for &h in members {
            s += &self.projections[h].matrix;
        }
        s
    }
}

/// Codimension-2 flatness criterion: for every codimension-2 flat `L`, the
/// sum `S = sum_{H in H_L} rho_H` must commute with each of its terms.
/// A check passes when `||[S, rho_H]|| <= tol ||S|| ||rho_H||`.
pub fn flatness_check(sys: &DunklSystem) -> FlatnessReport {
    let tol = sys.tol.flatness;
    let mut max_rel: f64 = 0.0;
    let mut violations = Vec::new();
    for (fi, flat) in sys.lattice.flats().iter().enumerate() {
        if flat.codim != 2 {
            continue;
        }
        let s = sys.projection_sum(&flat.members);
        let s_norm = linalg::fro_norm(&s);
        let mut worst: f64 = 0.0;
        for &h in &flat.members {
            let rho = &sys.projections[h].matrix;
            let comm = &s * rho - rho * &s;
            let rel = linalg::fro_norm(&comm) / (s_norm * linalg::fro_norm(rho));
            worst = worst.max(rel);
        }
        max_rel = max_rel.max(worst);
        if worst > tol {
            violations.push(FlatnessViolation {
                flat_index: fi,
                members: flat.members.clone(),
                relative_commutator: worst,
            });
        }
    }
    violations.sort_by_key(|v| v.flat_index);
    FlatnessReport {
        is_flat: violations.is_empty(),
        max_relative_commutator: max_rel,
        violations,
        tolerance: tol,
    }
}

/// Exponents `kappa_L = codim(L)^{-1} sum_{H in H_L} kappa_H` per flat,
/// `kappa_0` for the origin flat, and the logarithmic exponent
/// `kappa_L - 1`. The formula is combinatorial and needs no flatness.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentTable {
    /// kappa_L per lattice flat index (0.0 for the ambient flat `V`).
    pub kappa: Vec<f64>,
    /// kappa_L - 1 per flat.
    pub log_exponent: Vec<f64>,
    /// kappa_0 = dim^{-1} sum of all weights (the origin exponent).
    pub kappa_origin: f64,
}

pub fn exponent(sys: &DunklSystem, flat_index: usize) -> Result<f64> {
    let flat = sys
        .lattice
        .flats()
        .get(flat_index)
        .ok_or(Error::FlatNotInLattice)?;
    if flat.is_ambient() {
        return Ok(0.0);
    }
    let sum: f64 = flat
        .members
        .iter()
        .map(|&h| sys.arrangement.hyperplanes()[h].kappa())
        .sum();
    Ok(sum / flat.codim as f64)
}

pub fn exponent_table(sys: &DunklSystem) -> ExponentTable {
    let kappa: Vec<f64> = (0..sys.lattice.len())
        .map(|i| exponent(sys, i).expect("flat index in range"))
        .collect();
    let log_exponent = kappa.iter().map(|k| k - 1.0).collect();
    let total: f64 = sys
        .arrangement
        .hyperplanes()
        .iter()
        .map(Hyperplane::kappa)
        .sum();
    ExponentTable {
        kappa,
        log_exponent,
        kappa_origin: total / sys.dim() as f64,
    }
}

/// Euler dilatation factor `1 - kappa_0` (zero means the scalar flow acts
/// like a translation).
pub fn euler_dilatation(sys: &DunklSystem) -> f64 {
    1.0 - exponent_table(sys).kappa_origin
}

/// On an irreducible flat of a flat system, `sum_{H in H_L} rho_H` equals
/// `kappa_L pi_L` with `pi_L` the orthogonal projection onto `L^perp`.
/// Returns the relative residual of that identity.
pub fn verify_projection_identity(sys: &DunklSystem, flat_index: usize) -> Result<f64> {
    let flat = sys
        .lattice
        .flats()
        .get(flat_index)
        .ok_or(Error::FlatNotInLattice)?;
    if !sys.lattice.is_irreducible(flat_index) || flat.is_ambient() {
        return Err(Error::FlatReducible(flat_index));
    }
    let kappa_l = exponent(sys, flat_index)?;
    let g = sys.arrangement.space().gram();
    let n = sys.dim();
    // pi_L: G-orthogonal projection onto L^perp. With a G-orthonormal basis
    // Q of L^perp the projector is Q Q^H G; the origin flat gives the
    // identity.
    let pi_l = if flat.is_origin() {
        DMatrix::identity(n, n)
    } else {
        let rows = flat.basis.adjoint() * g;
        let kernel = linalg::null_space(&rows, sys.tol.rank);
        let q = linalg::gram_orthonormalize(&kernel, g, sys.tol.rank);
        &q * q.adjoint() * g
    };
    let target = pi_l.map(|c| c * kappa_l);
    let s = sys.projection_sum(&flat.members);
    Ok(linalg::fro_norm(&(s - &target)) / linalg::fro_norm(&target))
}

/// The longitudinal Dunkl system on a proper flat `L`: the restricted
/// arrangement `H^L` with the weight of each traced hyperplane `I` taken
/// from the irreducible flat `I(L)` with `I(L) cap L = I`.
///
/// `I(L)` is found as the lattice flat cut out by all ambient hyperplanes
/// tracing `I` (their common intersection is closed, hence a flat). The
/// uniqueness the construction relies on holds for Dunkl systems; a
/// reducible or mismatched candidate is surfaced as an error, not patched.
pub fn longitudinal_system(sys: &DunklSystem, flat_index: usize) -> Result<DunklSystem> {
    let flat = sys
        .lattice
        .flats()
        .get(flat_index)
        .ok_or(Error::FlatNotInLattice)?;
    if flat.is_ambient() {
        return Err(Error::InvalidInput("longitudinal system of V is the system itself".into()));
    }
    let (restricted, groups) = lattice::restriction_with_groups(&sys.arrangement, flat, &sys.tol)?;
    let space = restricted.space().clone();
    let mut hyperplanes = Vec::with_capacity(restricted.len());
    for (i, group) in groups.iter().enumerate() {
        // Intersect the tracing hyperplanes; the resulting subspace is a
        // lattice flat whose exponent is the longitudinal weight.
        let mut basis = DMatrix::<C64>::identity(sys.dim(), sys.dim());
        for &h in group {
            basis = intersect(sys, &basis, h)?;
        }
        let mi = sys
            .lattice
            .find_by_subspace(&basis, sys.tol.rank * 1e3)
            .ok_or_else(|| {
                Error::AmbiguousIrreducibleIntersection(i, "no lattice flat matches".into())
            })?;
        if !sys.lattice.is_irreducible(mi) {
            return Err(Error::AmbiguousIrreducibleIntersection(
                i,
                format!("candidate flat {mi} is reducible"),
            ));
        }
        let kappa = exponent(sys, mi)?;
        hyperplanes.push(Hyperplane::new(
            restricted.hyperplanes()[i].normal().clone(),
            kappa,
            &space,
        )?);
    }
    let arr = rebuild(space, hyperplanes, &sys.tol)?;
    DunklSystem::new(arr, sys.tol)
}

fn intersect(sys: &DunklSystem, basis: &DMatrix<C64>, h: usize) -> Result<DMatrix<C64>> {
    let nu = sys.arrangement.hyperplanes()[h].normal();
    let g = sys.arrangement.space().gram();
    let row = nu.adjoint() * g * basis;
    let scale = row.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if scale <= sys.tol.rank {
        return Ok(basis.clone());
    }
    let row_m = DMatrix::from_fn(1, basis.ncols(), |_, j| row[(0, j)]);
    let kernel = linalg::null_space(&row_m, sys.tol.rank);
    Ok(basis * kernel)
}

fn rebuild(space: InnerProductSpace, hyperplanes: Vec<Hyperplane>, tol: &Tol) -> Result<Arrangement> {
    match Arrangement::new(space.clone(), hyperplanes.clone(), tol) {
        Ok(a) => Ok(a),
        // Restrictions may be non-essential in L (e.g. a single traced
        // hyperplane in a higher-dimensional flat); keep them as-is.
        Err(Error::NotEssential { .. }) => Ok(Arrangement::from_parts(space, hyperplanes)),
        Err(e) => Err(e),
    }
}

/// The transversal Dunkl system on `V/L` (realised on `L^perp`): only the
/// members of `H_L` descend, with unchanged weights. Flat whenever the
/// ambient system is flat.
pub fn transversal_system(sys: &DunklSystem, flat_index: usize) -> Result<DunklSystem> {
    let flat = sys
        .lattice
        .flats()
        .get(flat_index)
        .ok_or(Error::FlatNotInLattice)?;
    let arr = lattice::transversal_arrangement(&sys.arrangement, flat, &sys.tol)?;
    DunklSystem::new(arr, sys.tol)
}
