use std::hash::Hasher;
use std::time::Duration;

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};

use super::{QuboProblem, Result, SampleSet, SamplerError};
use crate::Scalar;

/// Energies returned by a service must agree with the local objective to
/// within this absolute tolerance.
pub const REMOTE_ENERGY_TOLERANCE: f64 = 1e-6;

/// Request body for `POST /sample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireProblem {
    pub linear: Vec<f64>,
    /// `[i, j, q_ij]` triples with `i < j`.
    pub quadratic: Vec<(usize, usize, f64)>,
    pub offset: f64,
    pub num_reads: usize,
}

/// Response body for `POST /sample`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WireSampleSet {
    pub assignments: Vec<Vec<u8>>,
    pub energies: Vec<f64>,
    pub occurrences: Vec<u64>,
    pub sampler_info: String,
}

impl WireProblem {
    pub fn from_problem<T: Scalar>(problem: &QuboProblem<T>, num_reads: usize) -> Self {
        Self {
            linear: problem.linear().iter().map(|x| x.as_f64()).collect(),
            quadratic: problem
                .quadratic()
                .iter()
                .map(|(&(i, j), q)| (i, j, q.as_f64()))
                .collect(),
            offset: problem.offset().as_f64(),
            num_reads,
        }
    }

    pub fn to_problem(&self) -> Result<QuboProblem<f64>> {
        QuboProblem::new(
            self.linear.clone(),
            self.quadratic.iter().map(|&(i, j, q)| ((i, j), q)),
            self.offset,
        )
    }

    /// Stable identifier for log lines and error reports: FNV-1a over the
    /// serialized request, as 16 hex digits.
    pub fn problem_id(&self) -> String {
        let mut h = FnvHasher::default();
        h.write(serde_json::to_string(self).expect("wire problem serializes").as_bytes());
        format!("{:016x}", h.finish())
    }
}

impl<T: Scalar> From<&SampleSet<T>> for WireSampleSet {
    fn from(s: &SampleSet<T>) -> Self {
        Self {
            assignments: s.assignments.clone(),
            energies: s.energies.iter().map(|e| e.as_f64()).collect(),
            occurrences: s.occurrences.clone(),
            sampler_info: s.sampler_info.clone(),
        }
    }
}

impl WireSampleSet {
    fn into_sample_set<T: Scalar>(self) -> SampleSet<T> {
        SampleSet {
            assignments: self.assignments,
            energies: self.energies.into_iter().map(T::lit).collect(),
            occurrences: self.occurrences,
            sampler_info: self.sampler_info,
        }
    }
}

/// Blocking client for an annealing service speaking the `/sample` protocol.
#[derive(Debug, Clone)]
pub struct RemoteSampler {
    endpoint: String,
    agent: ureq::Agent,
}

impl RemoteSampler {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(false)
            .build();
        Self {
            endpoint: endpoint.into().trim_end_matches('/').to_string(),
            agent: ureq::Agent::new_with_config(config),
        }
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    /// Sends `problem` and returns the service's reads after checking every
    /// reported energy and the total read count against the local problem.
    pub fn sample<T: Scalar>(&self, problem: &QuboProblem<T>, num_reads: usize, seed: u64) -> Result<SampleSet<T>> {
        let wire = WireProblem::from_problem(problem, num_reads);
        let problem_id = wire.problem_id();
        let body = serde_json::to_string(&wire).expect("wire problem serializes");
        log::debug!("remote sample {problem_id}: {} vars, {num_reads} reads", problem.n_vars());
        let url = format!("{}/sample", self.endpoint);
        let mut response = self
            .agent
            .post(&url)
            .query("seed", seed.to_string())
            .header("content-type", "application/json")
            .send(body.as_str())
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => SamplerError::Timeout { problem_id: problem_id.clone() },
                other => SamplerError::Transport(other.to_string()),
            })?;
        let status = response.status().as_u16();
        let text = response.body_mut().read_to_string().map_err(|e| match e {
            ureq::Error::Timeout(_) => SamplerError::Timeout { problem_id: problem_id.clone() },
            other => SamplerError::Transport(other.to_string()),
        })?;
        if status != 200 {
            return Err(SamplerError::HttpStatus { status, body: text });
        }
        let reply: WireSampleSet =
            serde_json::from_str(&text).map_err(|e| SamplerError::MalformedResponse(e.to_string()))?;
        // validate in f64 so the tolerance means the same thing for every T
        let as_f64 = wire.to_problem()?;
        let check = SampleSet::<f64> {
            assignments: reply.assignments.clone(),
            energies: reply.energies.clone(),
            occurrences: reply.occurrences.clone(),
            sampler_info: String::new(),
        };
        check.validate(&as_f64, num_reads as u64, REMOTE_ENERGY_TOLERANCE)?;
        Ok(reply.into_sample_set())
    }
}

/// One-shot form of [`RemoteSampler::sample`].
pub fn remote_sample<T: Scalar>(
    endpoint: &str,
    problem: &QuboProblem<T>,
    num_reads: usize,
    timeout: Duration,
    seed: u64,
) -> Result<SampleSet<T>> {
    RemoteSampler::new(endpoint, timeout).sample(problem, num_reads, seed)
}
