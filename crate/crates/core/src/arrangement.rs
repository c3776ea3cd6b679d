//! Weighted complex hyperplane arrangements and catalog builders.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::{linalg, C64, Tol};

/// A finite-dimensional complex vector space with a positive definite
/// Hermitian inner product `<u, v> = v^H G u`.
#[derive(Debug, Clone)]
pub struct InnerProductSpace {
    dim: usize,
    gram: DMatrix<C64>,
}

impl InnerProductSpace {
    pub fn new(gram: DMatrix<C64>, tol: &Tol) -> Result<Self> {
        let dim = gram.nrows();
        if dim == 0 || gram.ncols() != dim {
            return Err(Error::InvalidInput("gram matrix must be square and nonempty".into()));
        }
        let scale = linalg::fro_norm(&gram);
        let asym = linalg::fro_norm(&(gram.clone() - gram.adjoint()));
        if asym > tol.rank * scale {
            return Err(Error::InvalidInput(format!(
                "gram matrix is not Hermitian (asymmetry {asym:.3e})"
            )));
        }
        let ev = linalg::hermitian_eigenvalues(&gram);
        let max = ev.last().copied().unwrap_or(0.0);
        if ev.first().copied().unwrap_or(0.0) <= tol.rank * max.max(1.0) {
            return Err(Error::InvalidInput("gram matrix is not positive definite".into()));
        }
        Ok(InnerProductSpace { dim, gram })
    }

    pub fn standard(dim: usize) -> Self {
        InnerProductSpace {
            dim,
            gram: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &DMatrix<C64> {
        &self.gram
    }

    /// `<u, v> = v^H G u`, sesquilinear, linear in `u`.
    pub fn inner(&self, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
        (v.adjoint() * &self.gram * u)[(0, 0)]
    }

    pub fn norm(&self, u: &DVector<C64>) -> f64 {
        self.inner(u, u).re.max(0.0).sqrt()
    }
}

/// A linear hyperplane `H = { z : <z, normal> = 0 }` with weight `kappa > 0`.
///
/// Normals are stored normalised: unit norm for the space's inner product and
/// the first significant coordinate rotated to the positive real axis, so
/// hyperplane equality is equality of stored normals to tolerance.
#[derive(Debug, Clone)]
pub struct Hyperplane {
    normal: DVector<C64>,
    kappa: f64,
}

impl Hyperplane {
    pub fn new(normal: DVector<C64>, kappa: f64, space: &InnerProductSpace) -> Result<Self> {
        if kappa <= 0.0 {
            return Err(Error::WeightOutOfRange(format!("kappa = {kappa} must be positive")));
        }
        let normal = normalize_normal(normal, space)?;
        Ok(Hyperplane { normal, kappa })
    }

    pub fn normal(&self) -> &DVector<C64> {
        &self.normal
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Whether the stored normals agree to tolerance (same hyperplane).
    pub fn same_hyperplane(&self, other: &Hyperplane, tol: f64) -> bool {
        (&self.normal - &other.normal).norm() <= tol * (1.0 + self.normal.norm())
    }
}

fn normalize_normal(mut normal: DVector<C64>, space: &InnerProductSpace) -> Result<DVector<C64>> {
    let norm = space.norm(&normal);
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidInput("hyperplane normal must be nonzero".into()));
    }
    normal /= C64::new(norm, 0.0);
    // Rotate the first significant coordinate to positive real.
    let max_abs = normal.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let lead = normal
        .iter()
        .find(|c| c.norm() > 1e-12 * max_abs.max(1.0))
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = lead / C64::new(lead.norm(), 0.0);
    normal /= phase;
    Ok(normal)
}

/// An essential weighted arrangement: no two hyperplanes proportional and
/// the normals span the whole space.
#[derive(Debug, Clone)]
pub struct Arrangement {
    space: InnerProductSpace,
    hyperplanes: Vec<Hyperplane>,
}

impl Arrangement {
    pub fn new(space: InnerProductSpace, hyperplanes: Vec<Hyperplane>, tol: &Tol) -> Result<Self> {
        for i in 0..hyperplanes.len() {
            for j in (i + 1)..hyperplanes.len() {
                if hyperplanes[i].same_hyperplane(&hyperplanes[j], tol.rank * 1e3) {
                    return Err(Error::DegenerateArrangement(i, j));
                }
            }
        }
        let r = linalg::rank(&normal_matrix(&hyperplanes, space.dim()), tol.rank);
        if r < space.dim() {
            return Err(Error::NotEssential {
                rank: r,
                dim: space.dim(),
            });
        }
        Ok(Arrangement { space, hyperplanes })
    }

    /// Constructor without the proportionality/essential checks, for
    /// restrictions (which may legitimately be non-essential in the flat).
    pub(crate) fn from_parts(space: InnerProductSpace, hyperplanes: Vec<Hyperplane>) -> Self {
        Arrangement { space, hyperplanes }
    }

    pub fn space(&self) -> &InnerProductSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn hyperplanes(&self) -> &[Hyperplane] {
        &self.hyperplanes
    }

    pub fn len(&self) -> usize {
        self.hyperplanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hyperplanes.is_empty()
    }

    /// Matrix whose columns are the hyperplane normals.
    pub fn normal_matrix(&self) -> DMatrix<C64> {
        normal_matrix(&self.hyperplanes, self.dim())
    }

    /// Normals of a subset of hyperplanes as matrix columns.
    pub fn normal_matrix_of(&self, members: &[usize]) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), members.len());
        for (j, &i) in members.iter().enumerate() {
            m.set_column(j, self.hyperplanes[i].normal());
        }
        m
    }
}

fn normal_matrix(hyperplanes: &[Hyperplane], dim: usize) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(dim, hyperplanes.len());
    for (j, h) in hyperplanes.iter().enumerate() {
        m.set_column(j, h.normal());
    }
    m
}

// ---------------------------------------------------------------------------
// Catalog builders
// ---------------------------------------------------------------------------

/// Shared construction for arrangements of diagonal hyperplanes `z_i = z_j`
/// inside the essential quotient of `C^m` by the main diagonal, realised as
/// the hyperplane `sum_i mu_i z_i = 0` with the inner product
/// `(eps_i, eps_j) = mu_i delta_ij`. The ambient normal of `H_ij` is
/// `mu_j eps_i - mu_i eps_j`.
fn diagonal_arrangement(mu: &[f64], kappa: impl Fn(usize, usize) -> f64, tol: &Tol) -> Result<Arrangement> {
    let m = mu.len();
    if m < 2 {
        return Err(Error::InvalidInput("need at least two points".into()));
    }
    let dim = m - 1;
    let gram_amb = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            C64::new(mu[i], 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    // Basis of { sum mu_i z_i = 0 }: vectors eps_i - (mu_i / mu_last) eps_last,
    // orthonormalised for the mu-weighted inner product.
    let mut span = DMatrix::zeros(m, dim);
    for i in 0..dim {
        span[(i, i)] = C64::new(1.0, 0.0);
        span[(m - 1, i)] = C64::new(-mu[i] / mu[m - 1], 0.0);
    }
    let basis = linalg::gram_orthonormalize(&span, &gram_amb, tol.rank);
    debug_assert_eq!(basis.ncols(), dim);

    let space = InnerProductSpace::standard(dim);
    let mut hyperplanes = Vec::new();
    for i in 0..m {
        for j in (i + 1)..m {
            let mut nu = DVector::zeros(m);
            nu[i] = C64::new(mu[j], 0.0);
            nu[j] = C64::new(-mu[i], 0.0);
            // nu lies in the subspace; its coordinates in the orthonormal
            // basis are <nu, b_k> = b_k^H G nu.
            let coords = basis.adjoint() * &gram_amb * nu;
            hyperplanes.push(Hyperplane::new(coords, kappa(i, j), &space)?);
        }
    }
    Arrangement::new(space, hyperplanes, tol)
}

/// The Lauricella arrangement for weights `mu_i in (0, 1)`: diagonal
/// hyperplanes `z_i = z_j` with `kappa_{H_ij} = mu_i + mu_j`.
pub fn lauricella_arrangement(mu: &[f64], tol: &Tol) -> Result<Arrangement> {
    for (i, &m) in mu.iter().enumerate() {
        if !(m > 0.0 && m < 1.0) {
            return Err(Error::WeightOutOfRange(format!("mu[{i}] = {m} not in (0, 1)")));
        }
    }
    diagonal_arrangement(mu, |i, j| mu[i] + mu[j], tol)
}

/// The essentialised braid arrangement of type `A_n` (`n+1` coordinates,
/// hyperplanes `z_i = z_j`) with a constant weight.
pub fn coxeter_a(n: usize, kappa_const: f64, tol: &Tol) -> Result<Arrangement> {
    if kappa_const <= 0.0 {
        return Err(Error::WeightOutOfRange(format!(
            "kappa = {kappa_const} must be positive"
        )));
    }
    let mu = vec![1.0; n + 1];
    diagonal_arrangement(&mu, |_, _| kappa_const, tol)
}

/// Coordinate hyperplanes `z_i = 0` in `C^dim` with the standard inner
/// product; reducible for `dim > 1`.
pub fn boolean(dim: usize, kappas: &[f64], tol: &Tol) -> Result<Arrangement> {
    if kappas.len() != dim {
        return Err(Error::InvalidInput(format!(
            "boolean arrangement needs {dim} weights, got {}",
            kappas.len()
        )));
    }
    let space = InnerProductSpace::standard(dim);
    let mut hyperplanes = Vec::new();
    for (i, &k) in kappas.iter().enumerate() {
        let mut nu = DVector::zeros(dim);
        nu[i] = C64::new(1.0, 0.0);
        hyperplanes.push(Hyperplane::new(nu, k, &space)?);
    }
    Arrangement::new(space, hyperplanes, tol)
}

/// Seeded generic arrangement: `m >= dim` random hyperplanes with generic
/// weights. A negative-control fixture: for `m > dim` the codimension-2
/// flats almost surely violate the flatness criterion.
pub fn random_generic(dim: usize, m: usize, seed: u64, tol: &Tol) -> Result<Arrangement> {
    if m < dim {
        return Err(Error::InvalidInput(format!("need m >= dim, got m = {m}, dim = {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = InnerProductSpace::standard(dim);
    for _attempt in 0..64 {
        let mut hyperplanes = Vec::with_capacity(m);
        for _ in 0..m {
            let nu = DVector::from_fn(dim, |_, _| {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            });
            let kappa = rng.gen_range(0.2..1.8);
            hyperplanes.push(Hyperplane::new(nu, kappa, &space)?);
        }
        if let Ok(arr) = Arrangement::new(space.clone(), hyperplanes, tol) {
            return Ok(arr);
        }
    }
    Err(Error::InvalidInput("could not draw an essential generic arrangement".into()))
}

// ---------------------------------------------------------------------------
// JSON schema
// ---------------------------------------------------------------------------

type ComplexDto = [f64; 2];

fn to_dto(c: &C64) -> ComplexDto {
    [c.re, c.im]
}

fn from_dto(d: &ComplexDto) -> C64 {
    C64::new(d[0], d[1])
}

/// Wire format: `{ "dim": int, "gram": [[[re,im],...]], "hyperplanes":
/// [ { "normal": [[re,im],...], "kappa": float } ] }`. `gram` defaults to
/// the identity.
#[derive(Debug, Serialize, Deserialize)]
pub struct ArrangementDto {
    pub dim: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gram: Option<Vec<Vec<ComplexDto>>>,
    pub hyperplanes: Vec<HyperplaneDto>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HyperplaneDto {
    pub normal: Vec<ComplexDto>,
    pub kappa: f64,
}

impl Arrangement {
    pub fn to_dto(&self) -> ArrangementDto {
        let g = self.space.gram();
        let gram = if *g == DMatrix::identity(self.dim(), self.dim()) {
            None
        } else {
            Some(
                (0..g.nrows())
                    .map(|i| (0..g.ncols()).map(|j| to_dto(&g[(i, j)])).collect())
                    .collect(),
            )
        };
        ArrangementDto {
            dim: self.dim(),
            gram,
            hyperplanes: self
                .hyperplanes
                .iter()
                .map(|h| HyperplaneDto {
                    normal: h.normal().iter().map(to_dto).collect(),
                    kappa: h.kappa(),
                })
                .collect(),
        }
    }

    pub fn from_dto(dto: &ArrangementDto, tol: &Tol) -> Result<Self> {
        let dim = dto.dim;
        let gram = match &dto.gram {
            None => DMatrix::identity(dim, dim),
            Some(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(Error::InvalidInput("gram matrix has wrong shape".into()));
                }
                DMatrix::from_fn(dim, dim, |i, j| from_dto(&rows[i][j]))
            }
        };
        let space = InnerProductSpace::new(gram, tol)?;
        let mut hyperplanes = Vec::new();
        for h in &dto.hyperplanes {
            if h.normal.len() != dim {
                return Err(Error::InvalidInput("normal has wrong length".into()));
            }
            let nu = DVector::from_iterator(dim, h.normal.iter().map(from_dto));
            hyperplanes.push(Hyperplane::new(nu, h.kappa, &space)?);
        }
        Arrangement::new(space, hyperplanes, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boolean_is_valid_and_normalized() {
        let tol = Tol::default();
        let arr = boolean(2, &[1.0, 1.0], &tol).unwrap();
        assert_eq!(arr.len(), 2);
        assert_eq!(arr.dim(), 2);
        assert!((arr.hyperplanes()[0].normal()[0].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn proportional_normals_rejected() {
        let tol = Tol::default();
        let space = InnerProductSpace::standard(2);
        let h1 = Hyperplane::new(DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(2.0, 0.0)]), 0.5, &space).unwrap();
        let h2 = Hyperplane::new(
            DVector::from_vec(vec![C64::new(0.0, -2.0), C64::new(0.0, -4.0)]),
            0.5,
            &space,
        )
        .unwrap();
        match Arrangement::new(space, vec![h1, h2], &tol) {
            Err(Error::DegenerateArrangement(0, 1)) => {}
            other => panic!("expected DegenerateArrangement, got {other:?}"),
        }
    }

    #[test]
    fn non_essential_rejected() {
        let tol = Tol::default();
        let space = InnerProductSpace::standard(2);
        let h = Hyperplane::new(DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]), 0.5, &space).unwrap();
        match Arrangement::new(space, vec![h], &tol) {
            Err(Error::NotEssential { rank: 1, dim: 2 }) => {}
            other => panic!("expected NotEssential, got {other:?}"),
        }
    }

    #[test]
    fn gram_matrix_validation() {
        let tol = Tol::default();
        // not Hermitian
        let g = DMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0), C64::new(0.5, 0.1),
            C64::new(0.5, 0.1), C64::new(1.0, 0.0),
        ]);
        assert!(InnerProductSpace::new(g, &tol).is_err());
        // Hermitian but not positive definite
        let g = DMatrix::from_row_slice(2, 2, &[
            C64::new(1.0, 0.0), C64::new(2.0, 0.0),
            C64::new(2.0, 0.0), C64::new(1.0, 0.0),
        ]);
        assert!(InnerProductSpace::new(g, &tol).is_err());
        // Hermitian positive definite with complex off-diagonal
        let g = DMatrix::from_row_slice(2, 2, &[
            C64::new(2.0, 0.0), C64::new(0.3, 0.4),
            C64::new(0.3, -0.4), C64::new(2.0, 0.0),
        ]);
        assert!(InnerProductSpace::new(g, &tol).is_ok());
    }

    #[test]
    fn lauricella_quarter_weights() {
        let tol = Tol::default();
        let arr = lauricella_arrangement(&[0.25; 4], &tol).unwrap();
        assert_eq!(arr.len(), 6);
        assert_eq!(arr.dim(), 3);
        for h in arr.hyperplanes() {
            assert!((h.kappa() - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn lauricella_rejects_bad_weights() {
        let tol = Tol::default();
        assert!(matches!(
            lauricella_arrangement(&[0.25, 1.0, 0.25, 0.25], &tol),
            Err(Error::WeightOutOfRange(_))
        ));
    }

    #[test]
    fn dto_round_trip() {
        let tol = Tol::default();
        let arr = lauricella_arrangement(&[0.2, 0.3, 0.4], &tol).unwrap();
        let json = serde_json::to_string(&arr.to_dto()).unwrap();
        let dto: ArrangementDto = serde_json::from_str(&json).unwrap();
        let back = Arrangement::from_dto(&dto, &tol).unwrap();
        assert_eq!(back.len(), arr.len());
        for (a, b) in arr.hyperplanes().iter().zip(back.hyperplanes()) {
            assert!(a.same_hyperplane(b, 1e-10));
            assert!((a.kappa() - b.kappa()).abs() < 1e-14);
        }
    }

    #[test]
    fn random_generic_is_deterministic() {
        let tol = Tol::default();
        let a = random_generic(2, 3, 7, &tol).unwrap();
        let b = random_generic(2, 3, 7, &tol).unwrap();
        for (x, y) in a.hyperplanes().iter().zip(b.hyperplanes()) {
            assert!(x.same_hyperplane(y, 1e-14));
        }
    }
}
