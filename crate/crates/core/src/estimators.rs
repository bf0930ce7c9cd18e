//! Monte Carlo observables on samples from an RBM.
//!
//! Every estimator averages a per-sample local value. The kinetic term is
//! diagonal in the rotor basis; the potential term sums
//! `ψ̃(σ')/ψ̃(σ)·V[σ, σ']` over the configurations connected to `σ`, with the
//! amplitude ratio taken as `exp((ℰ(σ) − ℰ(σ'))/2)` so `Z` never appears.

use serde::{Deserialize, Serialize};

use crate::basis::RotorConfiguration;
use crate::eigensolver::{Spectrum, DEGENERACY_THRESHOLD};
use crate::error::{Error, Result};
use crate::hamiltonian::SparseHamiltonian;
use crate::rbm::{exact_distribution, gibbs_sample, softplus, Evaluation, Evaluator, GibbsChainState, RbmParameters};
use crate::rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub kinetic: f64,
    /// `⟨V⟩` without the `1/R³` factor.
    pub potential: f64,
    /// `kinetic + potential/R³`, in units of `B`.
    pub total: f64,
    pub std_error: f64,
    pub n_samples: usize,
    /// Per-sample `K_loc + V_loc/R³`.
    #[serde(skip)]
    pub local_energies: Vec<f64>,
}

/// Mean and standard error of the mean.
fn mean_stderr(values: impl ExactSizeIterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.clone().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn non_empty(samples: &[RotorConfiguration]) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Domain("estimator needs at least one sample".into()));
    }
    Ok(())
}

/// Sample mean of `Σᵢ ℓᵢ(ℓᵢ+1)`.
pub fn kinetic_estimator(samples: &[RotorConfiguration]) -> Result<(f64, f64)> {
    non_empty(samples)?;
    Ok(mean_stderr(samples.iter().map(RotorConfiguration::kinetic)))
}

/// Scratch buffers for local potential evaluations.
#[derive(Debug)]
pub struct LocalPotential<'a> {
    params: &'a RbmParameters,
    h: &'a SparseHamiltonian,
    field: Vec<f64>,
    shifted: Vec<f64>,
}

impl<'a> LocalPotential<'a> {
    pub fn new(params: &'a RbmParameters, h: &'a SparseHamiltonian) -> Result<Self> {
        if params.space() != *h.space() {
            return Err(Error::Domain("RBM and Hamiltonian act on different spaces".into()));
        }
        let n_h = params.n_hidden();
        Ok(Self { params, h, field: vec![0.0; n_h], shifted: vec![0.0; n_h] })
    }

    /// `Σ_σ' ψ̃(σ')/ψ̃(σ)·V[σ, σ']`, without `1/R³`.
    pub fn evaluate(&mut self, sigmas: &[u32]) -> f64 {
        let p = self.params;
        p.hidden_field_into(sigmas, &mut self.field);
        let visible = p.visible_term(sigmas);
        let e0 = visible - self.field.iter().map(|&t| softplus(t)).sum::<f64>();
        let (field, shifted) = (&self.field, &mut self.shifted);
        let mut total = 0.0;
        self.h.for_each_connection(sigmas, |i, j, a, b, elem| {
            let (si, sj) = (sigmas[i] as usize, sigmas[j] as usize);
            let (a, b) = (a as usize, b as usize);
            let mut e1 = visible - (p.b(i, a) - p.b(i, si) + p.b(j, b) - p.b(j, sj));
            for (k, s) in shifted.iter_mut().enumerate() {
                *s = field[k] + p.w(i, k, a) - p.w(i, k, si) + p.w(j, k, b) - p.w(j, k, sj);
                e1 -= softplus(*s);
            }
            total += elem * (0.5 * (e0 - e1)).exp();
        });
        total
    }
}

/// `⟨V⟩` without `1/R³` over samples drawn from `p_λ`.
pub fn potential_estimator(
    params: &RbmParameters,
    samples: &[RotorConfiguration],
    h: &SparseHamiltonian,
) -> Result<(f64, f64)> {
    non_empty(samples)?;
    let mut local = LocalPotential::new(params, h)?;
    let values: Vec<f64> = samples.iter().map(|s| local.evaluate(s.sigmas())).collect();
    Ok(mean_stderr(values.iter().copied()))
}

/// `E_RBM` with per-sample local energies.
pub fn energy_rbm(
    params: &RbmParameters,
    samples: &[RotorConfiguration],
    h: &SparseHamiltonian,
) -> Result<EnergyEstimate> {
    non_empty(samples)?;
    let mut local = LocalPotential::new(params, h)?;
    let coupling = h.coupling();
    let mut kin = Vec::with_capacity(samples.len());
    let mut pot = Vec::with_capacity(samples.len());
    for s in samples {
        kin.push(s.kinetic());
        pot.push(local.evaluate(s.sigmas()));
    }
    let local_energies: Vec<f64> = kin.iter().zip(&pot).map(|(k, v)| k + coupling * v).collect();
    let (kinetic, _) = mean_stderr(kin.iter().copied());
    let (potential, _) = mean_stderr(pot.iter().copied());
    let (_, std_error) = mean_stderr(local_energies.iter().copied());
    Ok(EnergyEstimate {
        kinetic,
        potential,
        total: kinetic + coupling * potential,
        std_error,
        n_samples: samples.len(),
        local_energies,
    })
}

/// `⟨ψ_λ|H|ψ_λ⟩` by weighting every basis state with `p_λ`. Tiny spaces only.
pub fn energy_rbm_exact(params: &RbmParameters, h: &SparseHamiltonian) -> Result<EnergyEstimate> {
    let probs = exact_distribution(params)?;
    let space = h.space();
    let mut local = LocalPotential::new(params, h)?;
    let mut digits = vec![0u32; space.n_sites()];
    let (mut kinetic, mut potential) = (0.0, 0.0);
    for (x, &p) in probs.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        space.decode_into(x, &mut digits);
        kinetic += p * h.kinetic_diag()[x];
        potential += p * local.evaluate(&digits);
    }
    Ok(EnergyEstimate {
        kinetic,
        potential,
        total: kinetic + h.coupling() * potential,
        std_error: 0.0,
        n_samples: probs.len(),
        local_energies: Vec::new(),
    })
}

/// `|E_rbm − E_exact| / gap`.
pub fn delta(e_rbm: f64, e_exact: f64, gap: f64) -> Result<f64> {
    if gap.is_nan() || gap <= 0.0 {
        return Err(Error::Domain(format!("gap must be positive, got {gap}")));
    }
    Ok((e_rbm - e_exact).abs() / gap)
}

/// Samples split by whether they lie in the ground-state symmetry sector.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetrySplit {
    /// Fraction of samples outside the sector.
    pub fraction: f64,
    pub symmetric: Vec<RotorConfiguration>,
    pub violating: Vec<RotorConfiguration>,
}

pub fn symmetry_violation_fraction(samples: &[RotorConfiguration]) -> Result<SymmetrySplit> {
    non_empty(samples)?;
    let (symmetric, violating): (Vec<_>, Vec<_>) =
        samples.iter().cloned().partition(RotorConfiguration::is_symmetric);
    Ok(SymmetrySplit {
        fraction: violating.len() as f64 / samples.len() as f64,
        symmetric,
        violating,
    })
}

/// `((E_ψ − E₀)/ΔE₁, |⟨1|ψ⟩|²)`. The first exceeds the second by
/// `Σ_{n≥2} |c_n|²·ΔE_n/ΔE₁`, so a small left side bounds the contamination.
pub fn contamination_proxy(psi: &[f64], spectrum: &Spectrum) -> Result<(f64, f64)> {
    let dim = spectrum.values.len();
    if psi.len() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: psi.len() });
    }
    if dim < 2 {
        return Err(Error::Domain("spectrum needs at least two levels".into()));
    }
    let gap = spectrum.values[1] - spectrum.values[0];
    if gap < DEGENERACY_THRESHOLD {
        return Err(Error::DegenerateGroundState { gap });
    }
    let norm2: f64 = psi.iter().map(|v| v * v).sum();
    if norm2.is_nan() || norm2 <= 0.0 {
        return Err(Error::Domain("state has zero norm".into()));
    }
    let mut excess = 0.0;
    let mut c1_sq = 0.0;
    for (n, col) in spectrum.vectors.column_iter().enumerate() {
        let c: f64 = col.iter().zip(psi).map(|(a, b)| a * b).sum();
        let w = c * c / norm2;
        excess += w * (spectrum.values[n] - spectrum.values[0]);
        if n == 1 {
            c1_sq = w;
        }
    }
    Ok((excess / gap, c1_sq))
}

/// δ from Gibbs samples drawn from the all-zero configuration; the seed of
/// each evaluation is derived from the epoch.
#[derive(Debug)]
pub struct MonteCarloEvaluator<'a> {
    pub h: &'a SparseHamiltonian,
    pub e_exact: f64,
    pub gap: f64,
    pub n_samples: usize,
    pub gibbs_steps: usize,
    pub seed: u64,
}

impl MonteCarloEvaluator<'_> {
    pub fn samples(&self, params: &RbmParameters, epoch: usize) -> Vec<RotorConfiguration> {
        let start = GibbsChainState::all_zero(params.n_sites(), params.n_hidden());
        gibbs_sample(params, &start, self.gibbs_steps, self.n_samples, rng::derive_seed(self.seed, epoch as u64))
    }
}

impl Evaluator for MonteCarloEvaluator<'_> {
    fn evaluate(&mut self, params: &RbmParameters, epoch: usize) -> Result<Evaluation> {
        let est = energy_rbm(params, &self.samples(params, epoch), self.h)?;
        Ok(Evaluation {
            delta: delta(est.total, self.e_exact, self.gap)?,
            delta_stderr: est.std_error / self.gap,
            energy: est.total,
            kinetic: est.kinetic,
            potential: est.potential,
        })
    }
}

/// δ from exact enumeration of `p_λ`; no sampling noise. Tiny spaces only.
#[derive(Debug)]
pub struct ExactEvaluator<'a> {
    pub h: &'a SparseHamiltonian,
    pub e_exact: f64,
    pub gap: f64,
}

impl Evaluator for ExactEvaluator<'_> {
    fn evaluate(&mut self, params: &RbmParameters, _epoch: usize) -> Result<Evaluation> {
        let est = energy_rbm_exact(params, self.h)?;
        Ok(Evaluation {
            delta: delta(est.total, self.e_exact, self.gap)?,
            delta_stderr: 0.0,
            energy: est.total,
            kinetic: est.kinetic,
            potential: est.potential,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::HilbertSpace;
    use crate::eigensolver::full_spectrum;
    use crate::hamiltonian::build_hamiltonian;

    fn cfg(labels: &[(u32, i32)]) -> RotorConfiguration {
        RotorConfiguration::from_labels(labels).unwrap()
    }

    #[test]
    fn kinetic_examples() {
        let zeros = vec![RotorConfiguration::ground(3); 5];
        assert_eq!(kinetic_estimator(&zeros).unwrap(), (0.0, 0.0));
        let (m, _) = kinetic_estimator(&[cfg(&[(1, 0), (2, -1)])]).unwrap();
        assert_eq!(m, 8.0);
        assert!(kinetic_estimator(&[]).is_err());
    }

    #[test]
    fn delta_examples() {
        assert_eq!(delta(1.0, 1.0, 2.0).unwrap(), 0.0);
        assert!((delta(3.0, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((delta(1.0 - 0.1, 1.0, 2.0).unwrap() - 0.05).abs() < 1e-12);
        assert!(delta(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn violation_fraction() {
        let s = symmetry_violation_fraction(&[cfg(&[(1, 1), (0, 0)])]).unwrap();
        assert_eq!(s.fraction, 1.0);
        let s = symmetry_violation_fraction(&[cfg(&[(1, 1), (1, -1)]), cfg(&[(1, 0), (0, 0)])]).unwrap();
        assert_eq!(s.fraction, 0.5);
        assert_eq!(s.symmetric.len(), 1);
    }

    #[test]
    fn delta_state_has_no_potential() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let h = build_hamiltonian(space, 1.0).unwrap();
        let mut p = RbmParameters::zeros(&space, 2);
        for i in 0..2 {
            p.visible_bias[i * 4] = 200.0;
        }
        let samples = vec![RotorConfiguration::ground(2); 10];
        let e = energy_rbm(&p, &samples, &h).unwrap();
        assert!(e.total.abs() < 1e-30);
    }

    #[test]
    fn exhaustive_weighting_matches_dense_expectation() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let h = build_hamiltonian(space, 1.3).unwrap();
        let p = RbmParameters::random(&space, 3, 11);
        let probs = exact_distribution(&p).unwrap();
        let psi: Vec<f64> = probs.iter().map(|q| q.sqrt()).collect();
        let hpsi = h.apply(&psi).unwrap();
        let dense: f64 = psi.iter().zip(&hpsi).map(|(a, b)| a * b).sum();
        let est = energy_rbm_exact(&p, &h).unwrap();
        assert!((est.total - dense).abs() < 1e-10, "{} vs {dense}", est.total);
    }

    #[test]
    fn contamination_examples() {
        let space = HilbertSpace::new(2, 1).unwrap();
        let h = build_hamiltonian(space, 1.0).unwrap();
        let spec = full_spectrum(&h).unwrap();
        let v0: Vec<f64> = spec.vectors.column(0).iter().copied().collect();
        let v1: Vec<f64> = spec.vectors.column(1).iter().copied().collect();
        let (l, c) = contamination_proxy(&v0, &spec).unwrap();
        assert!(l.abs() < 1e-12 && c.abs() < 1e-12);
        let (l, c) = contamination_proxy(&v1, &spec).unwrap();
        assert!((l - 1.0).abs() < 1e-12 && (c - 1.0).abs() < 1e-12);
        let mix: Vec<f64> = v0.iter().zip(&v1).map(|(a, b)| 0.9f64.sqrt() * a + 0.1f64.sqrt() * b).collect();
        let (l, c) = contamination_proxy(&mix, &spec).unwrap();
        assert!((l - 0.1).abs() < 1e-12 && (c - 0.1).abs() < 1e-12);
    }
}
