use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::exact::assignment_index;
use super::{rbm_to_qubo, Result, SampleSet, SamplerError};
use crate::rbm::RbmModel;
use crate::Scalar;

/// Layers up to this width get their conditionals tabulated once per call.
const TABLE_BITS: usize = 12;

/// Independent per-read generator: the master seed selects the key, the read
/// index selects the ChaCha stream.
pub(crate) fn read_rng(seed: u64, read: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read as u64);
    rng
}

/// Probability `p` as an acceptance bound for a uniform `u32` draw, so that
/// `P(draw < bound) = p` up to `2^-32`.
#[inline]
fn bound<T: Scalar>(p: T) -> u64 {
    (p.as_f64() * 4_294_967_296.0).round().clamp(0.0, 4_294_967_296.0) as u64
}

enum Conditionals<'a, T> {
    Direct(&'a RbmModel<T>),
    Table {
        hidden: Vec<u64>,
        visible: Vec<u64>,
        nv: usize,
        nh: usize,
    },
}

impl<'a, T: Scalar> Conditionals<'a, T> {
    fn new(model: &'a RbmModel<T>) -> Self {
        let (nv, nh) = (model.n_visible(), model.n_hidden());
        if nv > TABLE_BITS || nh > TABLE_BITS {
            return Self::Direct(model);
        }
        let bits = |k: usize, n: usize| -> Vec<u8> { (0..n).map(|i| ((k >> i) & 1) as u8).collect() };
        let mut probs = vec![T::zero(); nh];
        let mut hidden = Vec::with_capacity((1 << nv) * nh);
        for k in 0..1usize << nv {
            model.fill_hidden_probs(&bits(k, nv), &mut probs);
            hidden.extend(probs.iter().map(|&p| bound(p)));
        }
        let mut probs = vec![T::zero(); nv];
        let mut visible = Vec::with_capacity((1 << nh) * nv);
        for k in 0..1usize << nh {
            model.fill_visible_probs(&bits(k, nh), &mut probs);
            visible.extend(probs.iter().map(|&p| bound(p)));
        }
        Self::Table {
            hidden,
            visible,
            nv,
            nh,
        }
    }

    fn hidden<'b>(&'b self, v: &[u8], probs: &mut [T], buf: &'b mut [u64]) -> &'b [u64] {
        match self {
            Self::Direct(m) => {
                m.fill_hidden_probs(v, probs);
                for (b, &p) in buf.iter_mut().zip(probs.iter()) {
                    *b = bound(p);
                }
                buf
            }
            Self::Table { hidden, nh, .. } => {
                let k = assignment_index(v);
                &hidden[k * nh..(k + 1) * nh]
            }
        }
    }

    fn visible<'b>(&'b self, h: &[u8], probs: &mut [T], buf: &'b mut [u64]) -> &'b [u64] {
        match self {
            Self::Direct(m) => {
                m.fill_visible_probs(h, probs);
                for (b, &p) in buf.iter_mut().zip(probs.iter()) {
                    *b = bound(p);
                }
                buf
            }
            Self::Table { visible, nv, .. } => {
                let k = assignment_index(h);
                &visible[k * nv..(k + 1) * nv]
            }
        }
    }
}

#[inline]
fn draw<R: RngCore>(bounds: &[u64], out: &mut [u8], rng: &mut R) {
    for (o, &b) in out.iter_mut().zip(bounds) {
        *o = u8::from(u64::from(rng.next_u32()) < b);
    }
}

fn chain<T: Scalar>(cond: &Conditionals<'_, T>, nv: usize, nh: usize, steps: usize, rng: &mut ChaCha8Rng) -> Vec<u8> {
    let mut v: Vec<u8> = (0..nv).map(|_| rng.random_range(0..=1u8)).collect();
    let mut h = vec![0u8; nh];
    let (mut hp, mut vp) = (vec![T::zero(); nh], vec![T::zero(); nv]);
    let (mut hb, mut vb) = (vec![0u64; nh], vec![0u64; nv]);
    for _ in 0..steps {
        draw(cond.hidden(&v, &mut hp, &mut hb), &mut h, rng);
        draw(cond.visible(&h, &mut vp, &mut vb), &mut v, rng);
    }
    draw(cond.hidden(&v, &mut hp, &mut hb), &mut h, rng);
    v.extend_from_slice(&h);
    v
}

/// Block Gibbs sampling `h|v, v|h` for `steps` sweeps from uniform random
/// visible states, one independent chain per read.
///
/// Each read returns the final joint state in QUBO order (visible then
/// hidden), with energies from [`rbm_to_qubo`].
pub fn gibbs_sample<T: Scalar>(model: &RbmModel<T>, steps: usize, num_reads: usize, seed: u64) -> Result<SampleSet<T>> {
    if steps == 0 {
        return Err(SamplerError::InvalidArgument("gibbs steps must be at least 1".into()));
    }
    let cond = Conditionals::new(model);
    let (nv, nh) = (model.n_visible(), model.n_hidden());
    let reads: Vec<Vec<u8>> = (0..num_reads)
        .into_par_iter()
        .map(|r| chain(&cond, nv, nh, steps, &mut read_rng(seed, r)))
        .collect();
    Ok(SampleSet::from_reads(
        &rbm_to_qubo(model),
        reads,
        format!("gibbs(steps={steps}, seed={seed})"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samplers::exact_boltzmann;
    use ndarray::{Array1, Array2};

    fn model(nv: usize, nh: usize, seed: u64) -> RbmModel<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        RbmModel::from_parts(
            Array2::from_shape_simple_fn((nv, nh), || rng.random_range(-1.0..1.0)),
            Array1::from_shape_simple_fn(nv, || rng.random_range(-0.5..0.5)),
            Array1::from_shape_simple_fn(nh, || rng.random_range(-0.5..0.5)),
        )
        .unwrap()
    }

    #[test]
    fn zero_reads_and_zero_steps() {
        let m = model(3, 2, 0);
        assert!(gibbs_sample(&m, 5, 0, 1).unwrap().is_empty());
        assert!(gibbs_sample(&m, 0, 5, 1).is_err());
    }

    #[test]
    fn reproducible_and_consistent() {
        let m = model(4, 3, 1);
        let a = gibbs_sample(&m, 20, 300, 42).unwrap();
        let b = gibbs_sample(&m, 20, 300, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.num_reads(), 300);
        a.validate(&rbm_to_qubo(&m), 300, 1e-9).unwrap();
        assert_ne!(a, gibbs_sample(&m, 20, 300, 43).unwrap());
    }

    #[test]
    fn table_and_direct_paths_agree() {
        let m = model(4, 3, 2);
        let table = Conditionals::new(&m);
        let direct = Conditionals::Direct(&m);
        for r in 0..50 {
            let a = chain(&table, 4, 3, 15, &mut read_rng(9, r));
            let b = chain(&direct, 4, 3, 15, &mut read_rng(9, r));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn approaches_boltzmann() {
        let m = model(3, 2, 3);
        let s = gibbs_sample(&m, 50, 20_000, 5).unwrap();
        let exact = exact_boltzmann(&rbm_to_qubo(&m), 1.0).unwrap();
        let tv = exact.total_variation(&s.empirical_distribution(5));
        assert!(tv < 0.03, "tv = {tv}");
    }
}
