//! LP-based randomized rounding for the virtual network embedding problem.
//!
//! The pipeline: build a substrate and requests ([`model`]), formulate the
//! flow relaxation or the cactus relaxation ([`formulations`]), solve it
//! ([`lp`]), decompose the solution into weighted valid mappings
//! ([`decompose`]) and round ([`rounding`]). [`oracle`] enumerates mappings
//! of tiny instances for cross-checks; [`scenarios`] generates random
//! instances; [`io`] holds the JSON schema.
//!
//! The LP layer is generic over [`num::Scalar`]; the domain model works in
//! `f64`.

pub mod cactus;
pub mod decompose;
pub mod fixtures;
pub mod formulations;
pub mod io;
pub mod lp;
pub mod model;
pub mod num;
pub mod oracle;
pub mod rounding;
pub mod scenarios;

use num_rational::BigRational;

pub use model::{Instance, Mapping, Request, Resource, SubstrateNetwork, TOLERANCE};

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;
/// LP over `f64`, as produced by the formulation builders.
pub type Lp = lp::LinearProgram<f64>;
/// LP over exact rationals.
pub type ExactLp = lp::LinearProgram<Rational>;
pub type LpSolution = lp::LpSolution<f64>;
pub type ExactLpSolution = lp::LpSolution<Rational>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Cactus(#[from] cactus::CactusError),
    #[error(transparent)]
    Lp(#[from] lp::LpError),
    #[error(transparent)]
    Formulation(#[from] formulations::FormulationError),
    #[error(transparent)]
    Decompose(#[from] decompose::DecomposeError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Rounding(#[from] rounding::RoundingError),
    #[error(transparent)]
    Scenario(#[from] scenarios::ScenarioError),
    #[error(transparent)]
    Io(#[from] io::IoError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
