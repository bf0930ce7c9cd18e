//! Brute-force normalization over the whole visible space. Validation only.

use super::RbmParameters;
use crate::error::{Error, Result};

/// Largest visible space that will be enumerated.
pub const ENUMERATION_LIMIT: usize = 1_000_000;

fn effective_energies(params: &RbmParameters) -> Result<Vec<f64>> {
    let space = params.space();
    let dim = space.total_dim();
    if dim > ENUMERATION_LIMIT {
        return Err(Error::TooLarge { dim, limit: ENUMERATION_LIMIT });
    }
    let mut digits = vec![0u32; space.n_sites()];
    Ok((0..dim)
        .map(|x| {
            space.decode_into(x, &mut digits);
            params.effective_energy(&digits)
        })
        .collect())
}

fn log_sum_exp_neg(energies: &[f64]) -> f64 {
    let min = energies.iter().copied().fold(f64::INFINITY, f64::min);
    -min + energies.iter().map(|&e| (min - e).exp()).sum::<f64>().ln()
}

/// `ln Z_λ`.
pub fn exact_log_partition(params: &RbmParameters) -> Result<f64> {
    Ok(log_sum_exp_neg(&effective_energies(params)?))
}

/// `Z_λ = Σ_σ e^{−ℰ(σ)}`.
pub fn exact_partition(params: &RbmParameters) -> Result<f64> {
    exact_log_partition(params).map(f64::exp)
}

/// `p_λ(σ)` for every basis index, in the global index order.
pub fn exact_distribution(params: &RbmParameters) -> Result<Vec<f64>> {
    let energies = effective_energies(params)?;
    let log_z = log_sum_exp_neg(&energies);
    Ok(energies.into_iter().map(|e| (-e - log_z).exp()).collect())
}

/// `Σ q ln(q/p_λ)`, with `0·ln 0 = 0`.
pub fn exact_kl(params: &RbmParameters, q: &[f64]) -> Result<f64> {
    let energies = effective_energies(params)?;
    if q.len() != energies.len() {
        return Err(Error::DimensionMismatch { expected: energies.len(), found: q.len() });
    }
    let log_z = log_sum_exp_neg(&energies);
    Ok(q.iter()
        .zip(&energies)
        .filter(|(&qi, _)| qi > 0.0)
        .map(|(&qi, &e)| qi * (qi.ln() + e + log_z))
        .sum())
}
