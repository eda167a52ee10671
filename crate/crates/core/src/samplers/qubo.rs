use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Result, SamplerError};
use crate::rbm::RbmModel;
use crate::Scalar;

/// Quadratic objective over binary variables:
/// `offset + Σ linear_i x_i + Σ_{i<j} quadratic_ij x_i x_j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboProblem<T> {
    linear: Vec<T>,
    quadratic: BTreeMap<(usize, usize), T>,
    offset: T,
}

impl<T: Scalar> QuboProblem<T> {
    /// Builds a problem; every quadratic key must satisfy `i < j < n`.
    /// Repeated keys are summed.
    pub fn new<I>(linear: Vec<T>, quadratic: I, offset: T) -> Result<Self>
    where
        I: IntoIterator<Item = ((usize, usize), T)>,
    {
        let n = linear.len();
        let mut map = BTreeMap::new();
        for ((i, j), q) in quadratic {
            if i >= j || j >= n {
                return Err(SamplerError::InvalidProblem(format!(
                    "quadratic key ({i}, {j}) is not strictly upper-triangular in {n} variables"
                )));
            }
            *map.entry((i, j)).or_insert_with(T::zero) += q;
        }
        let problem = Self {
            linear,
            quadratic: map,
            offset,
        };
        if !problem.is_finite() {
            return Err(SamplerError::InvalidProblem(
                "coefficients must be finite".into(),
            ));
        }
        Ok(problem)
    }

    pub fn n_vars(&self) -> usize {
        self.linear.len()
    }

    pub fn linear(&self) -> &[T] {
        &self.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), T> {
        &self.quadratic
    }

    pub fn offset(&self) -> T {
        self.offset
    }

    fn is_finite(&self) -> bool {
        self.offset.is_finite()
            && self.linear.iter().all(|x| x.is_finite())
            && self.quadratic.values().all(|x| x.is_finite())
    }

    /// Objective value of a 0/1 assignment.
    pub fn energy(&self, x: &[u8]) -> Result<T> {
        if x.len() != self.n_vars() {
            return Err(SamplerError::AssignmentLength {
                expected: self.n_vars(),
                got: x.len(),
            });
        }
        if x.iter().any(|&b| b > 1) {
            return Err(SamplerError::NotBinary);
        }
        Ok(self.energy_unchecked(x))
    }

    /// Sums offset, linear terms in variable order, then quadratic terms in
    /// key order.
    pub(crate) fn energy_unchecked(&self, x: &[u8]) -> T {
        let mut e = self.offset;
        for (&bit, &l) in x.iter().zip(&self.linear) {
            if bit == 1 {
                e += l;
            }
        }
        for (&(i, j), &q) in &self.quadratic {
            if x[i] == 1 && x[j] == 1 {
                e += q;
            }
        }
        e
    }

    /// Symmetric adjacency lists `(neighbor, coefficient)`.
    pub(crate) fn neighbors(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.n_vars()];
        for (&(i, j), &q) in &self.quadratic {
            adj[i].push((j, q));
            adj[j].push((i, q));
        }
        adj
    }

    /// Same problem with variable `k` renamed to `perm[k]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n_vars();
        if perm.len() != n {
            return Err(SamplerError::AssignmentLength {
                expected: n,
                got: perm.len(),
            });
        }
        let mut linear = vec![T::zero(); n];
        for (k, &l) in self.linear.iter().enumerate() {
            linear[perm[k]] = l;
        }
        let quad = self.quadratic.iter().map(|(&(i, j), &q)| {
            let (a, b) = (perm[i], perm[j]);
            ((a.min(b), a.max(b)), q)
        });
        Self::new(linear, quad.collect::<Vec<_>>(), self.offset)
    }
}

/// Maps an RBM onto a QUBO whose objective equals the RBM energy.
///
/// Variables `0..n_visible` are the visible units, followed by the hidden
/// units. Linear terms are the negated biases, couplings the negated
/// weights, offset zero.
pub fn rbm_to_qubo<T: Scalar>(model: &RbmModel<T>) -> QuboProblem<T> {
    let nv = model.n_visible();
    let nh = model.n_hidden();
    let linear: Vec<T> = model
        .visible_bias
        .iter()
        .chain(model.hidden_bias.iter())
        .map(|&x| -x)
        .collect();
    let mut quadratic = BTreeMap::new();
    for i in 0..nv {
        for j in 0..nh {
            quadratic.insert((i, nv + j), -model.weights[[i, j]]);
        }
    }
    QuboProblem {
        linear,
        quadratic,
        offset: T::zero(),
    }
}

/// Splits a QUBO-ordered joint assignment into `(v, h)`.
pub fn split_assignment(x: &[u8], n_visible: usize) -> (&[u8], &[u8]) {
    x.split_at(n_visible)
}
