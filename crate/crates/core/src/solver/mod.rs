//! Picard solver for `Y(t,ξ) = φ(ξ) + ∫_0^t ∫_0^ξ A(Y(s,η)) dg(s,η) ds`.

pub mod checks;
pub mod coefficient;
pub mod constants;
pub mod operator;
pub mod solve;

pub use checks::{
    ball_invariance_check, contraction_probe, gronwall_check, quadruple_inequality_check, random_ball_field, BallCheck,
    ContractionProbe, GronwallVerdict, QuadrupleVerdict,
};
pub use coefficient::Coefficient;
pub use constants::{compute_constants, default_r1, ProofConstants};
pub use operator::{apply_f, FixedPointOperator};
pub use solve::{solve, InitialGuess, SolverConfig, SolverReport, WindowPolicy, WindowRecord};
