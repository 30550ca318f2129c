//! Downset combinatorics and the executable uniform intersection
//! property (UIP).
//!
//! A tuple of factors indexed by a downset has the UIP when every family
//! of member-measurable events with null joint intersection can be
//! certified by events in the same factors whose joint intersection is
//! *literally empty*, each missing at most epsilon of its original
//! event's mass. On finite spaces with exactly-independent systems the
//! constructor in [`construct`] realizes this with achieved bounds of 0.

pub mod construct;
pub mod downset;
pub mod gen;
pub mod json;
pub mod steps;
pub mod system;

pub use construct::{
    uip_construct, validate_solution, Certificate, SolveMode, UipProblem, UipSolution,
};
pub use downset::{mask_label, Downset};
pub use gen::{generate_certified_problem, GeneratorConfig};
pub use json::{UipProblemJson, UipSolutionJson};
pub use steps::{
    chain_limit_step, finite_rank_decompose, weak_mixing_step, ChainSlot, ChainStepReport,
    DecompTerm,
};
pub use system::{FactorSystem, HypothesisReport};
