//! Linear propagation of single modes and whole fields.

pub mod evolve;
pub mod kernel;
pub mod kuznetsov;
pub mod ode;

pub use evolve::{
    geometric_times, kuznetsov_evolve, kuznetsov_state_at, mgt_evolve, GridPropagator, NormKey, Recording,
    StateTrajectory,
};
pub use kernel::{kernel_eval, KernelEval, ModePropagator};
pub use kuznetsov::{kuznetsov_propagator, kuznetsov_roots, kuznetsov_state, KuznetsovRoots};
pub use ode::{kernel_rk4_audit, mode_ode_reference, spectral_radius, ModeTrajectory};
