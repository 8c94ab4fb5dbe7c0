//! Minimum-error discrimination of qubit states.
//!
//! The central object is the Lagrangian operator `C = Σ_j p_j ρ_j Π_j`. Its
//! trace fixes the error probability (`P_e = 1 − Tr C`), and any strategy
//! whose elements satisfy `(C − p_k ρ_k) Π_k = 0` for an optimal `C` is an
//! optimal strategy. The crate therefore solves for `C` first and derives the
//! measurements from it.
//!
//! Layout:
//!
//! * [`qubit`]: closed-form algebra for 2×2 Hermitian operators in Bloch form.
//! * [`ensemble`]: the hypothesis set `{(p_j, ρ_j)}` and its file format.
//! * [`conditions`]: POVMs and optimality certificates.
//! * [`solver`]: constructive solution for equiprobable pure states (plus the
//!   two-state case) and enumeration of the full optimal family.
//! * [`oracle`]: an independent numerical solution of the dual problem.
//! * [`simulator`]: seeded Monte Carlo of the measurement experiment.

pub mod conditions;
pub mod ensemble;
pub mod error;
pub mod oracle;
pub mod polytope;
pub mod qubit;
pub mod simulator;
pub mod solver;
pub mod tol;

pub use conditions::{
    check_det_condition, check_dual_feasible, check_global, check_global_with_tolerance,
    check_stationarity, compute_lagrangian, error_probability, Certificate, Lagrangian, Povm,
    Verdict,
};
pub use ensemble::{AnglesSpec, Ensemble, EnsembleDocument, Overlap, StateSpec, WeightedState};
pub use error::{Error, Result};
pub use oracle::{primal_random_search, recover_povm_from_dual, solve_dual, DualOptions, DualResult};
pub use polytope::{ElementShape, WeightPolytope};
pub use qubit::{BlochDirection, DensityOp, Effect, Eigen, HermitianOp2, Op2};
pub use simulator::{simulate, SimulationReport};
pub use solver::{
    construct_candidate_povm, enumerate_optimal_family, find_common_latitude_basis,
    helstrom_two_state, min_error_common_latitude, solve_equiprobable_pure, check_yuen_case,
    Candidate, FamilyReport, LatitudeBasis, OptimalSolution, SolutionCase,
};
