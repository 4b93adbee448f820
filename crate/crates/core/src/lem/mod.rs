//! Synthetic landscape-evolution forward model used as the expensive model.

pub mod flow;
pub mod grid;
pub mod model;
pub mod problem;

pub use flow::{flow_route, FlowField};
pub use grid::GridTopography;
pub use model::{diagonal_sites, simulate, step, LemConfig, ParamName, ParameterVector, SedimentRecord, SimulationOutput};
pub use problem::{make_synthetic_problem, Problem, ProblemKind};
