//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate arrangement: hyperplanes {0} and {1} are proportional")]
    DegenerateArrangement(usize, usize),

    #[error("arrangement is not essential: normals span rank {rank} < dim {dim}")]
    NotEssential { rank: usize, dim: usize },

    #[error("flat is not a member of the lattice")]
    FlatNotInLattice,

    #[error("cannot restrict to the origin flat (dimension 0)")]
    FlatIsOrigin,

    #[error("weight out of range: {0}")]
    WeightOutOfRange(String),

    #[error("flat {0} is reducible; the projection identity is asserted on irreducible flats only")]
    FlatReducible(usize),

    #[error("irreducible intersection I(L) for hyperplane {0} of the restriction is {1}")]
    AmbiguousIrreducibleIntersection(usize, String),

    #[error("arc {arc} passes within {clearance:.3e} of point {point} (floor {floor:.3e})")]
    ArcTooClose {
        arc: usize,
        point: usize,
        clearance: f64,
        floor: f64,
    },

    #[error("quadrature did not converge: last relative change {0:.3e}")]
    QuadratureNotConverged(f64),

    #[error("weight system is not hyperbolic (|mu| = {0}); the norm integral converges only for 1 < |mu| < 2")]
    NotHyperbolic(f64),

    #[error("2d integral did not converge: estimated relative error {0:.3e}")]
    IntegralNotConverged(f64),

    #[error("point {point} crossed arc {arc} with no legal re-route at the configured clearance")]
    PathCollision { point: usize, arc: usize },

    #[error("continuation step too large: per-point displacement {step:.3e} exceeds min_gap/4 = {limit:.3e}")]
    StepTooLarge { step: f64, limit: f64 },

    #[error("monodromy start basis is numerically dependent (condition number {0:.3e})")]
    SingularBasis(f64),

    #[error("classification mismatch: |mu| threshold gives {threshold} but the restricted form has signature {signature}")]
    ClassificationMismatch {
        threshold: String,
        signature: String,
    },

    #[error("|mu| = {0} is out of range (expected 0 < |mu| < 2)")]
    OutOfRange(f64),

    #[error("cusp strata carry no cone angle (kappa_L = 1)")]
    CuspHasNoAngle,

    #[error("completion-plan hypothesis violated for {geometry} type: {condition}")]
    HypothesisViolated { geometry: String, condition: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
