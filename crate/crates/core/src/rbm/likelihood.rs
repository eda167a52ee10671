use ndarray::ArrayView2;

use super::{RbmError, RbmModel, Result};
use crate::samplers::{index_assignment, MAX_EXACT_VARS};
use crate::Scalar;

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `F(v) = −aᵀv − Σ_j softplus(b_j + vᵀW_j)`, so that `p(v) ∝ exp(−F(v))`.
/// `v` may be real-valued.
pub fn free_energy<T: Scalar>(model: &RbmModel<T>, v: &[f64]) -> f64 {
    let mut f = 0.0;
    for (i, &vi) in v.iter().enumerate() {
        f -= model.visible_bias[i].as_f64() * vi;
    }
    for j in 0..model.n_hidden() {
        let mut x = model.hidden_bias[j].as_f64();
        for (i, &vi) in v.iter().enumerate() {
            x += vi * model.weights[[i, j]].as_f64();
        }
        f -= softplus(x);
    }
    f
}

/// `ln Z`, summing out the hidden layer analytically and enumerating the
/// visible layer.
pub fn log_partition<T: Scalar>(model: &RbmModel<T>) -> Result<f64> {
    let nv = model.n_visible();
    if nv > MAX_EXACT_VARS {
        return Err(RbmError::InvalidConfig(format!(
            "cannot enumerate {nv} visible units (max {MAX_EXACT_VARS})"
        )));
    }
    let terms: Vec<f64> = (0..1usize << nv)
        .map(|k| {
            let v: Vec<f64> = index_assignment(k, nv).into_iter().map(f64::from).collect();
            -free_energy(model, &v)
        })
        .collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln())
}

/// Mean exact log-likelihood of the rows of `data` (nats per sample).
pub fn log_likelihood<T: Scalar>(model: &RbmModel<T>, data: ArrayView2<T>) -> Result<f64> {
    if data.ncols() != model.n_visible() {
        return Err(RbmError::LengthMismatch {
            expected: model.n_visible(),
            got: data.ncols(),
        });
    }
    if data.nrows() == 0 {
        return Err(RbmError::EmptyBatch);
    }
    let log_z = log_partition(model)?;
    let total: f64 = data
        .rows()
        .into_iter()
        .map(|r| {
            let v: Vec<f64> = r.iter().map(|x| x.as_f64()).collect();
            -free_energy(model, &v) - log_z
        })
        .sum();
    Ok(total / data.nrows() as f64)
}
