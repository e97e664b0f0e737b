//! Nonlinear third-order equation on a torus: exact linear part, pseudospectral
//! quadratic nonlinearity, evolution-space norms and small-data studies.

mod duhamel;
mod integrator;
mod kuznetsov;
mod nonlinear;
mod study;
mod xs;

pub use duhamel::duhamel_apply;
pub use integrator::{forcing_keys, geometric_steps, jmgt_evolve, stability_bound, JmgtOptions, JmgtRun, UNSUPPORTED_BY_THEOREM};
pub use kuznetsov::{kuznetsov_nonlinear_evolve, nonlinear_compatible_second, KuznetsovNonlinear};
pub use nonlinear::{dealias_mask, nonlinearity, NonlinearEvaluator};
pub use study::{
    contraction_constant, epsilon_order, nonlinear_deviation, smalldata_study, EntryStatus, ForcingCheck, RateCheck, SmallDataEntry, SmallDataOptions, StudySeries, BOUNDED_RATIO,
    EXPONENT_TOLERANCE,
};
pub use xs::{xs_keys, xs_norm, XsSeries, XsWeights};
