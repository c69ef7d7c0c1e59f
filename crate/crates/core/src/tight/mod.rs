//! Tight extensions of vector-valued data through `I_s` minimization.

pub mod admm;
pub mod blocks;
pub mod energy;
pub mod prox;

pub use admm::{
    minimize_is, tight_extension, AdmmConfig, AdmmReport, AdmmSolver, AdmmState, Scaling, MAX_S,
};
pub use blocks::{BlockSystem, GroupKind, RowGroup};
pub use energy::{energy_is, energy_logexp};
pub use prox::{
    norm_21, norm_2inf, norm_2p, prox_conjugate, prox_group_maxnorm_pow, psi, ProxOutcome,
    ThresholdEquation, NEWTON_TOL,
};
