//! Linear programs, a dense primal simplex, binary branch and bound and a
//! CPLEX LP writer.

mod branch;
mod lp_format;
mod model;
mod simplex;

pub use branch::{solve_ip, solve_ip_with, IpOptions, IpSolution};
pub use lp_format::{export_lp_file, sanitize_name, to_lp_string, write_lp};
pub use model::{Constraint, LinearProgram, LpSolution, LpStatus, Relation, Sense, VarId, Variable};
pub use simplex::{solve_lp, solve_lp_with, PivotRule, SolveOptions};

#[derive(Debug, thiserror::Error)]
pub enum LpError {
    #[error("variable `{0}` declared twice")]
    DuplicateVariable(String),
    #[error("{owner} references undeclared variable #{index}")]
    UnknownVariable { owner: String, index: usize },
    #[error("integer variable `{0}` is not bounded to [0, 1]")]
    NonBinaryInteger(String),
    #[error("relaxation inside branch and bound ended with status {0:?}")]
    RelaxationFailed(LpStatus),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
