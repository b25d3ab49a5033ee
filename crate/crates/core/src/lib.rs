//! Discrete spectrum of the Dirichlet Laplacian on two parallel strips
//! `(0, pi)` and `(-d, 0)` coupled through the window `|x1| < l` of their
//! common wall.
//!
//! Eigenvalues are located by mode matching inside the explicit brackets
//! `Lambda_{m-1}(l) < lambda_m(l) < Lambda_m(l)`; critical window lengths and
//! threshold solutions come from the same system at `lambda = 1`. A
//! finite-difference solver serves as an independent check, and [`verify`]
//! turns the known inequalities and asymptotic laws into pass/fail reports.

pub mod error;
pub mod geometry;
mod linalg;
pub mod matching;
pub mod modes;
pub mod oracle;
mod roots;
pub mod spectrum;
pub mod threshold;
pub mod verify;

pub use error::{Error, Result};
pub use geometry::{bracket_for, count_bounds, lambda_bound, make_geometry, Geometry, SpectralBracket};
pub use matching::{
    assemble, eigenfunction, evaluate_field, indicator, solve_in_bracket, EigenfunctionExpansion,
    FieldExpansion, Indicator, MatchingMatrix, ModeBasis, Parity, SolveOptions,
};
pub use modes::{longitudinal_rate, mode_value, overlap_lower, overlap_upper, Region, TransverseMode};
pub use spectrum::{discrete_spectrum, extrapolated_spectrum, sweep_over_l, DiscreteSpectrum, SpectralPoint, SweepTable};
pub use threshold::{
    assemble_threshold, critical_lengths, emergence_prediction, mu_coefficient, threshold_solution, ThresholdSolution,
};
pub use verify::{run_suite, CheckReport, Suite, VerifyConfig};
