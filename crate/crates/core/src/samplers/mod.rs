//! Negative-phase samplers over the QUBO form of an RBM.
//!
//! Every backend returns a [`SampleSet`] whose energies are the QUBO
//! objective of each assignment and whose occurrence counts sum to the
//! requested number of reads. Backends:
//!
//! * [`exact_boltzmann`]: full enumeration, for small problems and as a test
//!   oracle
//! * [`gibbs_sample`]: block Gibbs chains on the RBM itself
//! * [`sa_sample`]: simulated annealing on the QUBO
//! * [`RemoteSampler`]: an HTTP annealing service, with [`stub`] as a local
//!   implementation backed by [`sa_sample`]

mod anneal;
mod exact;
mod gibbs;
mod negative;
mod qubo;
pub mod remote;
mod sample_set;
pub mod stub;

pub use anneal::{sa_sample, AnnealSchedule};
pub use exact::{exact_boltzmann, total_variation, BoltzmannDistribution, MAX_EXACT_VARS};
pub use gibbs::gibbs_sample;
pub use negative::{negative_phase, PhaseStatistics};
pub use qubo::{rbm_to_qubo, split_assignment, QuboProblem};
pub use remote::{remote_sample, RemoteSampler, WireProblem, WireSampleSet};
pub use sample_set::SampleSet;

pub(crate) use exact::index_assignment;

#[derive(Debug, thiserror::Error)]
pub enum SamplerError {
    #[error("invalid QUBO problem: {0}")]
    InvalidProblem(String),
    #[error("assignment has {got} variables, expected {expected}")]
    AssignmentLength { expected: usize, got: usize },
    #[error("assignment contains a value other than 0 or 1")]
    NotBinary,
    #[error("{n_vars} variables is too many for exact enumeration (max {max})")]
    TooLarge { n_vars: usize, max: usize },
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("malformed sampler response: {0}")]
    MalformedResponse(String),
    #[error("reported energy {reported} does not match recomputed {recomputed}")]
    EnergyMismatch { reported: f64, recomputed: f64 },
    #[error("occurrences sum to {got}, expected {expected} reads")]
    ReadCount { expected: u64, got: u64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error("sampler request for problem {problem_id} timed out")]
    Timeout { problem_id: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("sampler service returned HTTP {status}: {body}")]
    HttpStatus { status: u16, body: String },
}

pub type Result<T> = std::result::Result<T, SamplerError>;
