//! Physics-informed training of the trial solution: benchmark problems,
//! collocation sets, the Hermite-stencil loss and forward/inverse solves.

mod collocation;
mod objective;
mod problem;
mod residual;
mod run;
mod sampling;

pub use collocation::CollocationSet;
pub use objective::{sigmoid, thread_count, Coefficients, InverseConfig, LossTerms, Objective};
pub use problem::{builtin, builtin_problems, ExactJet, PdeProblem, ProblemId, Sampling, SpatialOperator};
pub use residual::{residual_at, total_loss, ExactSolution, FieldSource};
pub use run::{
    evaluate_trial, initial_condition_gap, solve_forward, solve_forward_on, solve_inverse, solve_inverse_on, test_error,
    test_set, Estimate, ForwardReport, InverseReport, SolveConfig, TestSet, MAX_TEST_POINTS,
};
pub use sampling::{sample_equidistant, sample_faces, sample_lhs, GridSample};
