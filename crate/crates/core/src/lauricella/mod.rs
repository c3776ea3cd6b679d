//! The Deligne–Mostow/Thurston specialization: Lauricella periods, the
//! invariant Hermitian form, geometric-type classification, numerical
//! analytic continuation and monodromy.

mod area;
mod continuation;
mod periods;
mod weights;

pub use area::norm_integral;
pub use continuation::{continue_period, monodromy, ConfigPath, MonodromyMatrix};
pub use periods::{
    period, period_over_arcs, tail_period, Arc, ArcSystem, Configuration, PeriodVector,
};
pub use weights::{
    classify, classify_with_band, h_tilde_value, hermitian_form, schwarz_group, Classification,
    HermitianMatrix, SchwarzGroup, WeightSystem,
};
