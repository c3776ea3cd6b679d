//! Intersection lattices of hyperplane arrangements.
//!
//! Flats are stored with Euclidean-orthonormal bases of their subspaces and a
//! closed member set (every hyperplane containing the flat is listed).
//! Construction is a breadth-first intersection closure rather than subset
//! enumeration, deduplicating flats by subspace distance.

use nalgebra::{DMatrix, DVector};

use crate::arrangement::{Arrangement, Hyperplane, InnerProductSpace};
use crate::error::{Error, Result};
use crate::{linalg, C64, Tol};

/// A flat `L` of the lattice: members are the indices of all hyperplanes
/// containing `L`, `basis` is an orthonormal basis of the subspace, and
/// `codim = dim(V) - dim(L)`.
#[derive(Debug, Clone)]
pub struct Flat {
    pub members: Vec<usize>,
    pub basis: DMatrix<C64>,
    pub codim: usize,
}

impl Flat {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_ambient(&self) -> bool {
        self.codim == 0
    }

    pub fn is_origin(&self) -> bool {
        self.dim() == 0
    }
}

/// The intersection lattice `L(H)`, ordered by reverse inclusion of
/// subspaces. `V` is the unique codimension-0 element with empty members;
/// flats are sorted by `(codim, members)` so indices are deterministic.
#[derive(Debug, Clone)]
pub struct IntersectionLattice {
    flats: Vec<Flat>,
    irreducible: Vec<bool>,
    components: Vec<Vec<Vec<usize>>>,
}

impl IntersectionLattice {
    pub fn flats(&self) -> &[Flat] {
        &self.flats
    }

    pub fn len(&self) -> usize {
        self.flats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flats.is_empty()
    }

    pub fn flat(&self, i: usize) -> &Flat {
        &self.flats[i]
    }

    pub fn is_irreducible(&self, i: usize) -> bool {
        self.irreducible[i]
    }

    /// The irreducible-component partition of the flat's members.
    pub fn components(&self, i: usize) -> &[Vec<usize>] {
        &self.components[i]
    }

    /// Indices of proper flats (everything except `V`).
    pub fn proper_flats(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.flats.len()).filter(|&i| !self.flats[i].is_ambient())
    }

    /// Indices of irreducible proper flats.
    pub fn irreducible_flats(&self) -> impl Iterator<Item = usize> + '_ {
        self.proper_flats().filter(|&i| self.irreducible[i])
    }

    /// Index of the flat whose members equal the given closed set, if any.
    pub fn find_by_members(&self, members: &[usize]) -> Option<usize> {
        let mut m = members.to_vec();
        m.sort_unstable();
        self.flats.iter().position(|f| f.members == m)
    }

    /// Index of the lattice flat spanning the same subspace, if any.
    pub fn find_by_subspace(&self, basis: &DMatrix<C64>, tol: f64) -> Option<usize> {
        self.flats
            .iter()
            .position(|f| linalg::same_subspace(&f.basis, basis, tol))
    }

    /// Hyperplanes containing a flat given by lattice index.
    pub fn hyperplanes_containing(&self, flat_index: usize) -> Result<&[usize]> {
        self.flats
            .get(flat_index)
            .map(|f| f.members.as_slice())
            .ok_or(Error::FlatNotInLattice)
    }

    /// Whether flat `a` is contained in flat `b` as subspaces. For closed
    /// flats this is the combinatorial test `members(a) >= members(b)`.
    pub fn contains(&self, a: usize, b: usize) -> bool {
        let (fa, fb) = (&self.flats[a], &self.flats[b]);
        fb.members.iter().all(|h| fa.members.binary_search(h).is_ok()) && fa.codim >= fb.codim
    }
}

/// Build the full intersection lattice of an arrangement.
pub fn build_lattice(arr: &Arrangement, tol: &Tol) -> Result<IntersectionLattice> {
    let dim = arr.dim();
    let ambient = Flat {
        members: Vec::new(),
        basis: DMatrix::identity(dim, dim),
        codim: 0,
    };
    let mut flats: Vec<Flat> = vec![ambient];
    let mut frontier: Vec<usize> = vec![0];

    while let Some(&_) = frontier.first() {
        let mut next = Vec::new();
        for &fi in &frontier {
            let base = flats[fi].basis.clone();
            for h in 0..arr.len() {
                let inter = intersect_with_hyperplane(&base, arr.hyperplanes()[h].normal(), arr.space(), tol);
                let Some(basis) = inter else { continue };
                if flats
                    .iter()
                    .any(|f| f.dim() == basis.ncols() && linalg::same_subspace(&f.basis, &basis, tol.rank * 1e3))
                {
                    continue;
                }
                let members = members_of(&basis, arr, tol);
                let codim = dim - basis.ncols();
                flats.push(Flat { members, basis, codim });
                next.push(flats.len() - 1);
            }
        }
        frontier = next;
    }

    flats.sort_by(|a, b| (a.codim, &a.members).cmp(&(b.codim, &b.members)));
    let mut components = Vec::with_capacity(flats.len());
    let mut irreducible = Vec::with_capacity(flats.len());
    for f in &flats {
        let parts = if f.members.is_empty() {
            Vec::new()
        } else {
            irreducible_components(arr, &f.members, tol)
        };
        irreducible.push(parts.len() == 1);
        components.push(parts);
    }
    Ok(IntersectionLattice {
        flats,
        irreducible,
        components,
    })
}

/// Intersect the subspace spanned by `basis` with a hyperplane. Returns
/// `None` when the subspace already lies inside the hyperplane.
fn intersect_with_hyperplane(
    basis: &DMatrix<C64>,
    normal: &DVector<C64>,
    space: &InnerProductSpace,
    tol: &Tol,
) -> Option<DMatrix<C64>> {
    if basis.ncols() == 0 {
        return None;
    }
    // Row functional c -> <B c, nu>_G = nu^H G B c in basis coordinates.
    let row = normal.adjoint() * space.gram() * basis;
    let scale = row.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    if scale <= tol.rank {
        return None; // flat already inside the hyperplane
    }
    let row_m = DMatrix::from_fn(1, basis.ncols(), |_, j| row[(0, j)]);
    let kernel = linalg::null_space(&row_m, tol.rank);
    Some(basis * kernel)
}

/// Closed member set of a subspace: all hyperplanes containing it. The
/// origin belongs to every hyperplane of a linear arrangement.
fn members_of(basis: &DMatrix<C64>, arr: &Arrangement, tol: &Tol) -> Vec<usize> {
    (0..arr.len())
        .filter(|&h| {
            let vals = arr.hyperplanes()[h].normal().adjoint() * arr.space().gram() * basis;
            vals.iter().all(|c| c.norm() <= tol.rank * 1e2)
        })
        .collect()
}

/// The finest partition of `members` into blocks whose normal sets are
/// rank-additive (the components of the linear matroid of the normals).
/// One block means the set is irreducible.
///
/// A greedy basis is extracted first; every dependent normal is expanded in
/// that basis and its fundamental circuit (the basis vectors with nonzero
/// coefficients plus itself) is recorded. Connected components over the
/// fundamental circuits realise the finest rank-additive partition: a
/// circuit can never be split across a direct-sum decomposition, and blocks
/// built this way span independent subspaces by construction. Note that
/// merging blocks only when a *pair* fails rank additivity is not enough:
/// three concurrent lines in dimension 2 are pairwise independent but form
/// a single component.
pub fn irreducible_components(arr: &Arrangement, members: &[usize], tol: &Tol) -> Vec<Vec<usize>> {
    let m = members.len();
    if m == 0 {
        return Vec::new();
    }
    let dim = arr.dim();
    // Greedy basis with incremental orthonormalisation.
    let mut basis_idx: Vec<usize> = Vec::new(); // positions into `members`
    let mut ortho: Vec<DVector<C64>> = Vec::new();
    let mut circuits: Vec<Vec<usize>> = Vec::new(); // positions into `members`
    for (pos, &h) in members.iter().enumerate() {
        let v: DVector<C64> = arr.hyperplanes()[h].normal().clone();
        let mut r = v.clone();
        for q in &ortho {
            let c = (q.adjoint() * &r)[(0, 0)];
            r -= q * c;
        }
        for q in &ortho {
            let c = (q.adjoint() * &r)[(0, 0)];
            r -= q * c;
        }
        let rn = r.norm();
        if rn > tol.rank * (1.0 + v.norm()) {
            ortho.push(r / C64::new(rn, 0.0));
            basis_idx.push(pos);
        } else {
            // Dependent: expand in the chosen basis columns via least squares.
            let mut b = DMatrix::zeros(dim, basis_idx.len());
            for (j, &bp) in basis_idx.iter().enumerate() {
                b.set_column(j, arr.hyperplanes()[members[bp]].normal());
            }
            let coeffs = linalg::lstsq(&b, &v).expect("least-squares expansion");
            let cmax = coeffs.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
            let mut circuit = vec![pos];
            for (j, c) in coeffs.iter().enumerate() {
                if c.norm() > tol.rank.sqrt() * (1.0 + cmax) {
                    circuit.push(basis_idx[j]);
                }
            }
            circuits.push(circuit);
        }
    }
    // Union-find over circuit hyperedges.
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for circuit in &circuits {
        let root = find(&mut parent, circuit[0]);
        for &p in &circuit[1..] {
            let r = find(&mut parent, p);
            parent[r] = root;
        }
    }
    let mut blocks_map: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for pos in 0..m {
        let root = find(&mut parent, pos);
        blocks_map.entry(root).or_default().push(members[pos]);
    }
    let mut blocks: Vec<Vec<usize>> = blocks_map.into_values().collect();
    for b in &mut blocks {
        b.sort_unstable();
    }
    blocks.sort();
    blocks
}

/// The restriction `H^L` of an arrangement to a proper flat: hyperplanes not
/// containing `L` traced on `L` and deduplicated (distinct hyperplanes may
/// restrict to the same hyperplane of `L`; their weights are summed, a
/// placeholder the longitudinal Dunkl system replaces with `kappa_{I(L)}`).
pub fn restriction(arr: &Arrangement, flat: &Flat, tol: &Tol) -> Result<Arrangement> {
    restriction_with_groups(arr, flat, tol).map(|(a, _)| a)
}

/// Restriction plus, for each restricted hyperplane, the list of ambient
/// hyperplanes tracing it.
pub fn restriction_with_groups(
    arr: &Arrangement,
    flat: &Flat,
    tol: &Tol,
) -> Result<(Arrangement, Vec<Vec<usize>>)> {
    if flat.is_origin() {
        return Err(Error::FlatIsOrigin);
    }
    let b = &flat.basis;
    let gram_l = (b.adjoint() * arr.space().gram() * b).clone();
    let space = InnerProductSpace::new(gram_l.clone(), tol)?;
    let gram_inv = gram_l.clone().try_inverse().ok_or_else(|| {
        Error::InvalidInput("restricted gram matrix is singular".into())
    })?;

    let mut normals: Vec<DVector<C64>> = Vec::new();
    let mut kappas: Vec<f64> = Vec::new();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for h in 0..arr.len() {
        if flat.members.contains(&h) {
            continue;
        }
        // Functional x -> <x, nu> on L, represented against the restricted gram.
        let row = b.adjoint() * arr.space().gram().adjoint() * arr.hyperplanes()[h].normal();
        let n_l = &gram_inv * row;
        let hp = Hyperplane::new(n_l, arr.hyperplanes()[h].kappa(), &space)?;
        match normals
            .iter()
            .position(|n| (n - hp.normal()).norm() <= tol.rank * 1e3 * (1.0 + n.norm()))
        {
            Some(k) => {
                kappas[k] += hp.kappa();
                groups[k].push(h);
            }
            None => {
                normals.push(hp.normal().clone());
                kappas.push(hp.kappa());
                groups.push(vec![h]);
            }
        }
    }
    let hyperplanes = normals
        .into_iter()
        .zip(&kappas)
        .map(|(n, &k)| Hyperplane::new(n, k, &space))
        .collect::<Result<Vec<_>>>()?;
    // A restriction needs not be essential in L, so skip the rank check.
    Ok((Arrangement::from_parts(space, hyperplanes), groups))
}

/// The arrangement induced by `H_L` on the quotient `V/L`, realised as the
/// orthogonal complement `L^perp` with the inherited inner product (made
/// orthonormal, so the quotient gram is the identity). Only members of `H_L`
/// descend; weights are unchanged.
pub fn transversal_arrangement(arr: &Arrangement, flat: &Flat, tol: &Tol) -> Result<Arrangement> {
    if flat.is_ambient() {
        return Err(Error::InvalidInput("transversal arrangement of V is empty".into()));
    }
    let dim = arr.dim();
    // L^perp for the gram product: kernel of b^H G.
    let rows = (flat.basis.adjoint() * arr.space().gram()).clone();
    let kernel = if flat.dim() == 0 {
        DMatrix::identity(dim, dim)
    } else {
        linalg::null_space(&rows, tol.rank)
    };
    let q = linalg::gram_orthonormalize(&kernel, arr.space().gram(), tol.rank);
    debug_assert_eq!(q.ncols(), flat.codim);
    let space = InnerProductSpace::standard(flat.codim);
    let mut hyperplanes = Vec::new();
    for &h in &flat.members {
        // Normals of members are G-orthogonal to L, so they lie in L^perp;
        // their coordinates in the G-orthonormal basis are q^H G nu.
        let coords = q.adjoint() * arr.space().gram() * arr.hyperplanes()[h].normal();
        hyperplanes.push(Hyperplane::new(coords, arr.hyperplanes()[h].kappa(), &space)?);
    }
    Arrangement::new(space, hyperplanes, tol)
}
