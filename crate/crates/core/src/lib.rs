//! Structural ZD/ZDS block-implicit integrators for Hamiltonian systems.

pub mod baselines;
pub mod blocksolver;
pub mod numerics;
pub mod harness;
pub mod problems;
pub mod secoeff;
