//! Two-prover XOR games: construction, exact classical bias, certified
//! quantum bias, and explicit operator strategies.
//!
//! The crate is organized around the signed cost matrix of a game:
//! - `game`: builders for the perturbed AND family, distributed-knowledge
//!   games, game sums, and the magic-square game.
//! - `classical`: exact classical bias by exhaustive gauge-fixed search, plus
//!   the shared-randomness reduction between perturbed and unperturbed games.
//! - `quantum`: quantum bias via alternating ascent over Gram vectors with a
//!   dual-feasibility upper bound, and the closed-form region values.
//! - `verifier`: explicit operator strategies, observable validation and
//!   repair, exact bias on the maximally entangled state, and Monte Carlo
//!   round simulation.
//! - `acceptance`: the reproduction suite tying all measured numbers to their
//!   expected values.

pub mod acceptance;
pub mod bitstring;
pub mod classical;
pub mod cmatrix;
pub mod error;
pub mod game;
pub mod linalg;
pub mod quantum;
pub mod verifier;

pub use bitstring::BitString;
pub use classical::{
    classical_bias_exact, classical_bias_exact_guarded, reduce_to_full_knowledge, strategy_bias,
    ClassicalResult, ClassicalStrategy,
};
pub use cmatrix::{spectral_sign, validate_observable, ComplexMatrix, ObservableReport};
pub use error::{Error, Result};
pub use game::{
    build_distributed_game, build_magic_square_game, build_perturbed_and_game, sum_games,
    KnowledgeSpec, Side, XorGame,
};
pub use linalg::{jacobi_eigen, min_eigenvalue};
pub use quantum::{
    closed_form_bias, closed_form_region1, closed_form_region2, quantum_bias,
    quantum_bias_default, quantum_bias_of_sum, region_of, BiasCertificate, Region, VectorStrategy,
};
pub use verifier::{
    build_region1_strategy, build_region2_strategy, classical_operator_strategy, operator_bias,
    simulate_rounds, ConstructionReport, OperatorStrategy, RoundSample, SimulationSummary,
};
