//! Block-coordinate solvers for Tucker factorization of partially observed
//! tensors.
//!
//! Two methods share the machinery here:
//!
//! * [`ihooi_solve`] alternates truncated left singular subspaces with
//!   imputation of the unobserved entries, working on the core-free
//!   formulation `min ½‖X ×ᵢ AᵢAᵢᵀ − X‖²` subject to `P_Ω(X) = P_Ω(M)`.
//! * [`alsas_solve`] keeps an explicit core and updates each factor by least
//!   squares followed by a QR renormalization.
//!
//! [`hooi_solve`] is the complete-data special case.

mod alsas;
mod general;
mod hooi;
mod ihooi;
mod kkt;
mod model;
mod objective;
mod rank;
mod trace;

pub use alsas::{
    alsas_core_update, alsas_factor_update, alsas_iterate, alsas_solve, alsas_solve_with_init,
    normalize_factors, AlsasState,
};
pub use general::generalized_x_update;
pub use hooi::{hooi_solve, truncated_hosvd};
pub use ihooi::{
    ihooi_iterate, ihooi_solve, ihooi_solve_with_init, mode_gram_input, IhooiState,
};
pub use kkt::{kkt_residual, KktResidual};
pub use model::{
    initial_factors, FactorModel, MaskedData, MultilinearRank, RankStrategy, SolverConfig,
    SolverKind, ORTHONORMAL_TOL,
};
pub use objective::{grad_h, objective_f, objective_g, objective_g_energy, objective_h};
pub use rank::{augment_factor, maybe_increase_rank, pad_core, stall_detected, RankDecision};
pub use trace::{IterationRecord, IterationTrace, SolveOutput, StopReason};
