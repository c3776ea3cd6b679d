//! Dunkl systems on complex hyperplane arrangements.
//!
//! * [`arrangement`] — weighted linear hyperplane arrangements in a complex
//!   inner-product space, plus catalog builders (Lauricella, Coxeter A,
//!   boolean, seeded generic fixtures);
//! * [`lattice`] — intersection lattices, flat closure, irreducible
//!   decomposition, restriction and transversal arrangements;
//! * [`dunkl`] — the projections `rho_H = kappa_H pi_H`, the codimension-2
//!   flatness check, exponents and the hereditary systems;
//! * [`lauricella`] — hypergeometric periods, the invariant Hermitian form,
//!   classification, analytic continuation and monodromy;
//! * [`strata`] — cone angles, link fractions, completion plans and
//!   tangent-cone join descriptors.
//!
//! All arithmetic is double-precision complex floating point; rank and
//! subspace decisions use eigenvalue thresholds with a configurable
//! relative tolerance (see [`Tol`]).

pub mod arrangement;
pub mod dunkl;
pub mod error;
pub mod lattice;
pub mod lauricella;
pub mod linalg;
pub mod quad;
pub mod strata;

pub use arrangement::{Arrangement, Hyperplane, InnerProductSpace};
pub use dunkl::{DunklSystem, ExponentTable, FlatnessReport, ProjectionOperator};
pub use error::Error;
pub use lattice::{Flat, IntersectionLattice};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// The three constant-curvature regimes of the flat invariant Hermitian
/// form: positive definite, semidefinite with Euler-field kernel, or of
/// hyperbolic signature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GeometryType {
    Elliptic,
    Parabolic,
    Hyperbolic,
}

/// Numerical tolerances for rank, subspace-equality and flatness decisions.
#[derive(Debug, Clone, Copy)]
pub struct Tol {
    /// Relative tolerance for rank and subspace-equality decisions.
    pub rank: f64,
    /// Relative tolerance for flatness commutator norms.
    pub flatness: f64,
    /// Half-width of the band around `kappa_L = 1` that declares a cusp.
    pub cusp_band: f64,
}

impl Default for Tol {
    fn default() -> Self {
        Tol {
            rank: 1e-9,
            flatness: 1e-9,
            cusp_band: 1e-9,
        }
    }
}

impl Tol {
    pub fn with_rank(rank: f64) -> Self {
        Tol {
            rank,
            ..Tol::default()
        }
    }
}
