use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{QuboProblem, Result, SamplerError};
use crate::Scalar;

/// Distinct assignments with their objective values and read counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet<T> {
    pub assignments: Vec<Vec<u8>>,
    pub energies: Vec<T>,
    pub occurrences: Vec<u64>,
    pub sampler_info: String,
}

impl<T: Scalar> SampleSet<T> {
    pub fn empty(sampler_info: impl Into<String>) -> Self {
        Self {
            assignments: Vec::new(),
            energies: Vec::new(),
            occurrences: Vec::new(),
            sampler_info: sampler_info.into(),
        }
    }

    /// Aggregates raw reads, keeping first-seen order, and evaluates each
    /// distinct assignment against `problem`.
    pub fn from_reads(problem: &QuboProblem<T>, reads: Vec<Vec<u8>>, sampler_info: impl Into<String>) -> Self {
        let mut set = Self::empty(sampler_info);
        let mut index: HashMap<Vec<u8>, usize> = HashMap::new();
        for read in reads {
            match index.get(&read) {
                Some(&k) => set.occurrences[k] += 1,
                None => {
                    index.insert(read.clone(), set.assignments.len());
                    set.energies.push(problem.energy_unchecked(&read));
                    set.assignments.push(read);
                    set.occurrences.push(1);
                }
            }
        }
        set
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn num_reads(&self) -> u64 {
        self.occurrences.iter().sum()
    }

    /// Lowest-energy assignment, first one on ties.
    pub fn lowest(&self) -> Option<(&[u8], T)> {
        let mut best: Option<(usize, T)> = None;
        for (k, &e) in self.energies.iter().enumerate() {
            if best.is_none_or(|(_, b)| e < b) {
                best = Some((k, e));
            }
        }
        best.map(|(k, e)| (self.assignments[k].as_slice(), e))
    }

    /// Checks shape, bit values, reported energies against a local
    /// recomputation, and the total read count.
    pub fn validate(&self, problem: &QuboProblem<T>, num_reads: u64, tolerance: f64) -> Result<()> {
        if self.energies.len() != self.len() || self.occurrences.len() != self.len() {
            return Err(SamplerError::MalformedResponse(format!(
                "{} assignments, {} energies, {} occurrence counts",
                self.len(),
                self.energies.len(),
                self.occurrences.len()
            )));
        }
        for (x, &reported) in self.assignments.iter().zip(&self.energies) {
            let local = problem.energy(x)?;
            if (local - reported).abs().as_f64() > tolerance || !reported.is_finite() {
                return Err(SamplerError::EnergyMismatch {
                    reported: reported.as_f64(),
                    recomputed: local.as_f64(),
                });
            }
        }
        let total = self.num_reads();
        if total != num_reads {
            return Err(SamplerError::ReadCount {
                expected: num_reads,
                got: total,
            });
        }
        Ok(())
    }

    /// Occurrence-weighted frequency of each of the `2^n` assignments, indexed
    /// with bit `i` of the index equal to `x_i`.
    pub fn empirical_distribution(&self, n_vars: usize) -> Vec<f64> {
        let mut p = vec![0.0; 1usize << n_vars];
        let total = self.num_reads() as f64;
        for (x, &c) in self.assignments.iter().zip(&self.occurrences) {
            p[super::exact::assignment_index(x)] += c as f64 / total;
        }
        p
    }
}
