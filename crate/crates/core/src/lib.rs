//! Frank-Wolfe solvers built around a secant line search.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] holds the dense vector and matrix kernels,
//! * [`oracle`] defines the [`Objective`] interface,
//! * [`rootfind`] provides scalar secant and Newton iterations,
//! * [`linesearch`] applies the secant iteration to the directional slope,
//! * [`stepsizes`] collects the competing step-size rules,
//! * [`lmo`] implements the linear minimization oracles,
//! * [`fw`] runs vanilla Frank-Wolfe and blended pairwise conditional gradients,
//! * [`problems`] generates the benchmark instances.

pub mod error;
pub mod fw;
pub mod linalg;
pub mod linesearch;
pub mod lmo;
pub mod oracle;
pub mod problems;
pub mod rootfind;
pub mod stepsizes;
pub mod trajectory;

pub use error::{DimensionError, LmoError, OracleError, ProblemError, RootError, SolveError, StepError};
pub use linalg::{dot, DenseMatrix};
pub use linesearch::{golden_section, sls, LineSearchResult, SlsState};
pub use oracle::{finite_difference_gradient, Objective};
pub use rootfind::{solve_newton, solve_secant, RootResult};
pub use trajectory::{StepKind, TrajectoryRecord};
