//! Collision-model approach to non-Markovian open quantum dynamics.
//!
//! The crate is organised in four layers:
//!
//! * [`linalg`], [`state`], [`channel`]: dense complex linear algebra, density
//!   matrices and the three interconvertible channel representations
//!   (superoperator, Kraus, Choi).
//! * [`chain`]: the discrete collision chain with stochastic partial swaps
//!   between neighbouring ancillas, evaluated by brute force, by the joint
//!   recursion and by the reduced recursion on the system alone.
//! * [`kernel`]: continuum-limit solvers for the memory-kernel master equation
//!   (Volterra stepping and the convolution series), the phenomenological and
//!   Shabani–Lidar rivals, and CPT certification of map trajectories.
//! * [`benchmark`]: the two-level atom in a Lorentzian bath, with the exact
//!   solution, the collision-model mapping and non-Markovianity diagnostics.
//!
//! Superoperators act on column-stacked density matrices:
//! `vec(ρ)[i + d·j] = ρ[i, j]`, so that `vec(AρB) = (Bᵀ ⊗ A) vec(ρ)`.

pub mod benchmark;
pub mod chain;
pub mod channel;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod random;
pub mod state;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
