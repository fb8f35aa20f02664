//! Continuum limit of the collision chain: the memory-kernel master equation
//! for the dynamical map `Λ(t)`, its convolution-series solution, the two
//! rival master equations, Markov limits and CPT certification.

mod certify;
mod cm;
mod diagnostics;
mod grid;
mod markov;
pub mod quadrature;
mod rival;
mod trajectory;
pub mod volterra;

pub use certify::{cpt_certify, CertificationReport, CptSample};
pub use cm::{
    lambda_series, solve_cm_me, trace_weight_sum, truncation_order, SeriesSolution, KERNEL_CUTOFF,
    SERIES_MAX_TERMS,
};
pub(crate) use cm::scalar_renewal;
pub use diagnostics::{kernel_term_norms, KernelTermNorms};
pub use grid::{validate_resolution, MemoryRate, TimeGrid};
pub use markov::{lindblad_propagate, markov_limit_generator};
pub use rival::{solve_phenomenological, solve_shabani_lidar, MemoryKernel, MAX_STEP_NORM};
pub use trajectory::{AnalyticTag, GeneratorMapTrajectory, MapTrajectory, GENERATOR_CPT_TOL, INITIAL_MAP_TOL};
