use ndarray::{Array1, Array2};

use super::{negative::PhaseStatistics, QuboProblem, Result, SamplerError};
use crate::Scalar;

/// Largest problem that exact enumeration accepts.
pub const MAX_EXACT_VARS: usize = 20;

/// Boltzmann distribution `p(x) ∝ exp(−β·E(x))` over all assignments.
#[derive(Debug, Clone)]
pub struct BoltzmannDistribution<T> {
    n_vars: usize,
    probabilities: Vec<T>,
}

#[inline]
pub(crate) fn assignment_index(x: &[u8]) -> usize {
    x.iter()
        .enumerate()
        .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i))
}

#[inline]
pub(crate) fn index_assignment(index: usize, n: usize) -> Vec<u8> {
    (0..n).map(|i| ((index >> i) & 1) as u8).collect()
}

/// Enumerates all `2^n` assignments of `problem` at inverse temperature
/// `beta`. Index `k` of the result is the assignment with `x_i` = bit `i` of
/// `k`.
pub fn exact_boltzmann<T: Scalar>(problem: &QuboProblem<T>, beta: T) -> Result<BoltzmannDistribution<T>> {
    let n = problem.n_vars();
    if n > MAX_EXACT_VARS {
        return Err(SamplerError::TooLarge {
            n_vars: n,
            max: MAX_EXACT_VARS,
        });
    }
    let log_weights: Vec<T> = (0..1usize << n)
        .map(|k| -beta * problem.energy_unchecked(&index_assignment(k, n)))
        .collect();
    let max = log_weights
        .iter()
        .copied()
        .fold(T::neg_infinity(), T::max);
    let mut probabilities: Vec<T> = log_weights.iter().map(|&w| (w - max).exp()).collect();
    let z: T = probabilities.iter().copied().sum();
    for p in &mut probabilities {
        *p /= z;
    }
    Ok(BoltzmannDistribution {
        n_vars: n,
        probabilities,
    })
}

impl<T: Scalar> BoltzmannDistribution<T> {
    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn probabilities(&self) -> &[T] {
        &self.probabilities
    }

    pub fn probability(&self, x: &[u8]) -> T {
        self.probabilities[assignment_index(x)]
    }

    /// `P(x_i = 1)` for every variable.
    pub fn marginals(&self) -> Vec<T> {
        let mut m = vec![T::zero(); self.n_vars];
        for (k, &p) in self.probabilities.iter().enumerate() {
            for (i, mi) in m.iter_mut().enumerate() {
                if (k >> i) & 1 == 1 {
                    *mi += p;
                }
            }
        }
        m
    }

    /// Model expectations `⟨v hᵀ⟩, ⟨v⟩, ⟨h⟩` when the variables are an RBM's
    /// visible units followed by its hidden units.
    pub fn rbm_statistics(&self, n_visible: usize, n_hidden: usize) -> Result<PhaseStatistics<T>> {
        if n_visible + n_hidden != self.n_vars {
            return Err(SamplerError::AssignmentLength {
                expected: self.n_vars,
                got: n_visible + n_hidden,
            });
        }
        let mut vh = Array2::zeros((n_visible, n_hidden));
        let mut v = Array1::zeros(n_visible);
        let mut h = Array1::zeros(n_hidden);
        for (k, &p) in self.probabilities.iter().enumerate() {
            let bit = |i: usize| (k >> i) & 1 == 1;
            for i in 0..n_visible {
                if bit(i) {
                    v[i] += p;
                    for j in 0..n_hidden {
                        if bit(n_visible + j) {
                            vh[[i, j]] += p;
                        }
                    }
                }
            }
            for j in 0..n_hidden {
                if bit(n_visible + j) {
                    h[j] += p;
                }
            }
        }
        Ok(PhaseStatistics { vh, v, h })
    }

    /// Total-variation distance `½ Σ |p − q|` to another distribution over
    /// the same index space.
    pub fn total_variation(&self, other: &[f64]) -> f64 {
        total_variation(
            &self.probabilities.iter().map(|p| p.as_f64()).collect::<Vec<_>>(),
            other,
        )
    }
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    assert_eq!(p.len(), q.len(), "distributions over different supports");
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rbm::RbmModel;
    use crate::samplers::rbm_to_qubo;
    use ndarray::{Array1, Array2};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(n: usize, rng: &mut ChaCha8Rng) -> QuboProblem<f64> {
        let linear = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let quad: Vec<_> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|k| (k, rng.random_range(-1.0..1.0)))
            .collect();
        QuboProblem::new(linear, quad, 0.0).unwrap()
    }

    #[test]
    fn uniform_problem() {
        let q = QuboProblem::<f64>::new(vec![0.0; 4], [], 0.0).unwrap();
        let d = exact_boltzmann(&q, 1.0).unwrap();
        assert!(d.probabilities().iter().all(|&p| (p - 1.0 / 16.0).abs() < 1e-15));
    }

    #[test]
    fn normalized() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..=10 {
            let d = exact_boltzmann(&random_problem(n, &mut rng), 1.7).unwrap();
            let s: f64 = d.probabilities().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_temperature_limit() {
        let q = QuboProblem::new(vec![1.0, -2.0, 0.5], [((0, 1), -0.5), ((1, 2), 1.0)], 0.0).unwrap();
        let d = exact_boltzmann(&q, 50.0).unwrap();
        // argmin: x = (0,1,0) with energy -2, next best -1.5
        assert!(d.probability(&[0, 1, 0]) >= 0.999);
    }

    #[test]
    fn too_large() {
        let q = QuboProblem::new(vec![0.0; 21], [], 0.0).unwrap();
        assert!(matches!(
            exact_boltzmann(&q, 1.0),
            Err(SamplerError::TooLarge { n_vars: 21, .. })
        ));
    }

    #[test]
    fn relabeling_permutes_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let q = random_problem(6, &mut rng);
        let perm = [3, 0, 5, 1, 4, 2];
        let d = exact_boltzmann(&q, 1.0).unwrap();
        let dp = exact_boltzmann(&q.relabeled(&perm).unwrap(), 1.0).unwrap();
        for k in 0..64 {
            let x = index_assignment(k, 6);
            let mut y = vec![0u8; 6];
            for i in 0..6 {
                y[perm[i]] = x[i];
            }
            assert!((d.probability(&x) - dp.probability(&y)).abs() < 1e-14);
        }
    }

    #[test]
    fn marginals_match_direct_rbm_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m: RbmModel<f64> = RbmModel::from_parts(
            Array2::from_shape_simple_fn((3, 2), || rng.random_range(-1.5..1.5)),
            Array1::from_shape_simple_fn(3, || rng.random_range(-1.0..1.0)),
            Array1::from_shape_simple_fn(2, || rng.random_range(-1.0..1.0)),
        )
        .unwrap();
        let d = exact_boltzmann(&rbm_to_qubo(&m), 1.0).unwrap();
        // direct: sum over (v, h) of exp(-E) using the RBM's own energy
        let mut z = 0.0;
        let mut direct = vec![0.0; 5];
        for v in 0..8usize {
            for h in 0..4usize {
                let vb: Vec<u8> = (0..3).map(|i| ((v >> i) & 1) as u8).collect();
                let hb: Vec<u8> = (0..2).map(|j| ((h >> j) & 1) as u8).collect();
                let w = (-m.energy(&vb, &hb).unwrap()).exp();
                z += w;
                for i in 0..3 {
                    direct[i] += w * vb[i] as f64;
                }
                for j in 0..2 {
                    direct[3 + j] += w * hb[j] as f64;
                }
            }
        }
        for (a, b) in d.marginals().iter().zip(direct.iter().map(|x| x / z)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
